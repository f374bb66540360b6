"""Command line front end.

Subcommands select what to produce from one JSON config:

  synth      synthesize the control only (control.json, controls.png)
  simulate   synthesize + integrate the nominal system (trajectory, umatrix)
  ensemble   synthesize + run the seeded ensemble campaign (report.json)
  sweep      sweep-rate scaling study (task.kind must be "sweep")
  branches   eigenvalue-branch diagram (branches.csv/png)
  labframe   lab-frame vs chirped-frame population validation

Verbosity comes from the LADDERCTL_LOG environment variable (DEBUG, INFO,
WARNING, ...; default WARNING).
"""
from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import parse_config, config_to_dict
from .errors import LadderctlError, ValidationError
from .output import ArtifactWriter, write_json
from .runner import run, _synthesize, _write_control

log = logging.getLogger("ladderctl")


def _setup_logging() -> None:
    level = os.environ.get("LADDERCTL_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", required=True, help="path to JSON config")
    sub.add_argument("--out", default=None, help="output directory")
    sub.add_argument("--check-convergence", action="store_true",
                     help="verify the propagator by step halving")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ladderctl",
        description="chirped-pulse population-permutation controls for "
                    "anharmonic quantum ladders")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
            ("synth", "synthesize the control and write control.json"),
            ("simulate", "synthesize and integrate the nominal system"),
            ("ensemble", "run the seeded ensemble campaign"),
            ("sweep", "sweep-rate scaling study"),
            ("branches", "export the eigenvalue branch diagram"),
            ("labframe", "validate the rotating-frame reduction"),
    ]:
        sub = subs.add_parser(name, help=help_text)
        _add_common(sub)
    return parser


def _dispatch(args) -> int:
    config = parse_config(args.config)
    out = args.out or config.output["directory"]
    if args.command == "synth":
        with ArtifactWriter(out) as writer:
            write_json(writer.path("config.json"), config_to_dict(config))
            control, _sigma, info = _synthesize(config)
            _write_control(writer, config, control, info)
        print(f"control written to {out}")
        return 0
    if args.command == "sweep" and config.task["kind"] != "sweep":
        raise ValidationError("the sweep subcommand needs task.kind = 'sweep'")
    if args.command == "labframe" and config.task["kind"] != "labframe":
        config.task.clear()
        config.task.update(kind="labframe",
                           omega0_factors=[100.0, 500.0, 2000.0])
    if args.command == "branches" and config.task["kind"] not in (
            "branches", "transfer", "permutation", "inversion"):
        raise ValidationError(
            "the branches subcommand needs a control-defining task")
    if args.command == "branches" and config.task["kind"] != "branches":
        keep = {k: v for k, v in config.task.items() if k in ("images", "l", "p")}
        config.task.clear()
        config.task.update(kind="branches", **keep)
    summary = run(config, out_dir=args.out,
                  check_convergence=args.check_convergence)
    for key, value in summary.items():
        if key not in ("task", "output_dir"):
            print(f"{key}: {value}")
    print(f"artifacts in {summary['output_dir']}")
    return 0


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except ValidationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except LadderctlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
