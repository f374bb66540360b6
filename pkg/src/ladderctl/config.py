"""Run configuration: JSON schema, defaults, validation."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .controls import ChirpProfile, Permutation
from .errors import ValidationError
from .ladder import EnsembleBounds

__all__ = ["RunConfig", "parse_config", "config_to_dict"]

TASK_KINDS = ("transfer", "permutation", "inversion", "sweep", "branches",
              "labframe")

SIM_DEFAULTS = {
    "epsilon": 1e-3,
    "n_steps": None,
    "seed": 42,
    "count": 10,
    "bump_width": 0.05,
    "bump_height": 3.0,
    "calibrate": True,
}


@dataclass
class RunConfig:
    bounds: EnsembleBounds
    chirp: ChirpProfile
    task: dict
    simulation: dict
    output: dict = field(default_factory=dict)


def _require(block: dict, key: str, where: str):
    if key not in block:
        raise ValidationError(f"missing field {where}.{key}")
    return block[key]


def _parse_system(block: dict) -> EnsembleBounds:
    n_levels = int(_require(block, "n_levels", "system"))
    mu = _require(block, "mu", "system")
    if not (isinstance(mu, (list, tuple)) and len(mu) == 2):
        raise ValidationError("system.mu must be a [mu_min, mu_max] pair")
    deltas = block.get("deltas")
    delta_bound = block.get("delta_bound")
    if (deltas is None) == (delta_bound is None):
        raise ValidationError(
            "system needs exactly one of 'deltas' / 'delta_bound'")
    try:
        return EnsembleBounds(
            n_levels=n_levels, mu_min=float(mu[0]), mu_max=float(mu[1]),
            delta_bound=None if delta_bound is None else float(delta_bound),
            fixed_deltas=None if deltas is None else tuple(deltas),
            omega0=float(block.get("omega0", 200.0)))
    except ValidationError as exc:
        raise ValidationError(f"system: {exc}") from exc


def _parse_chirp(block: dict) -> ChirpProfile:
    if "alpha" in block:
        return ChirpProfile.linear(float(block["alpha"]))
    if "s_nodes" in block and "omega_nodes" in block:
        return ChirpProfile.tabulated(block["s_nodes"], block["omega_nodes"])
    raise ValidationError(
        "chirp needs 'alpha' or 's_nodes'/'omega_nodes'")


def _parse_task(block: dict, n_levels: int) -> dict:
    kind = _require(block, "kind", "task")
    if kind not in TASK_KINDS:
        raise ValidationError(f"task.kind must be one of {TASK_KINDS}, got {kind!r}")
    task = {"kind": kind}
    if kind == "transfer":
        l = int(_require(block, "l", "task"))
        p = int(_require(block, "p", "task"))
        if not (0 <= l < n_levels and 0 <= p < n_levels):
            raise ValidationError(
                f"task levels l={l}, p={p} must be < n_levels={n_levels}")
        task.update(l=l, p=p)
    elif kind == "permutation":
        images = _require(block, "images", "task")
        if images == "all":
            task.update(images="all")
        else:
            try:
                sigma = Permutation(images)
            except ValidationError as exc:
                raise ValidationError(f"task.images: {exc}") from exc
            if len(sigma) != n_levels:
                raise ValidationError(
                    f"task.images has {len(sigma)} entries for "
                    f"n_levels={n_levels}")
            task.update(images=list(sigma.images))
    elif kind == "sweep":
        eps = _require(block, "epsilons", "task")
        if not isinstance(eps, (list, tuple)) or len(eps) < 3:
            raise ValidationError("task.epsilons needs at least 3 values")
        task.update(epsilons=[float(e) for e in eps])
        if "images" in block:
            task.update(images=list(Permutation(block["images"]).images))
        if "l" in block and "p" in block:
            task.update(l=int(block["l"]), p=int(block["p"]))
    elif kind == "labframe":
        factors = block.get("omega0_factors", [100.0, 500.0, 2000.0])
        task.update(omega0_factors=[float(f) for f in factors])
    elif kind == "branches":
        if "images" in block:
            task.update(images=list(Permutation(block["images"]).images))
        if "l" in block and "p" in block:
            task.update(l=int(block["l"]), p=int(block["p"]))
    return task


def parse_config(path) -> RunConfig:
    """Load and validate a JSON run configuration, applying defaults."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"config parse error in {path} at line {exc.lineno}, "
            f"column {exc.colno}: {exc.msg}")
    for block in ("system", "chirp", "task"):
        if block not in raw:
            raise ValidationError(f"missing config block '{block}'")
    bounds = _parse_system(raw["system"])
    chirp = _parse_chirp(raw["chirp"])
    task = _parse_task(raw["task"], bounds.n_levels)
    sim = dict(SIM_DEFAULTS)
    for key, val in raw.get("simulation", {}).items():
        if key not in SIM_DEFAULTS:
            raise ValidationError(f"unknown field simulation.{key}")
        sim[key] = val
    sim["epsilon"] = float(sim["epsilon"])
    if sim["epsilon"] <= 0:
        raise ValidationError("simulation.epsilon must be positive")
    if sim["n_steps"] is not None:
        sim["n_steps"] = int(sim["n_steps"])
    sim["seed"] = int(sim["seed"])
    sim["count"] = int(sim["count"])
    output = {"directory": raw.get("output", {}).get("directory", "out"),
              "formats": list(raw.get("output", {}).get(
                  "formats", ["csv", "json", "pgm", "png"]))}
    for fmt in output["formats"]:
        if fmt not in ("csv", "json", "pgm", "png"):
            raise ValidationError(f"unknown output format {fmt!r}")
    return RunConfig(bounds=bounds, chirp=chirp, task=task, simulation=sim,
                     output=output)


def config_to_dict(config: RunConfig) -> dict:
    """Materialized configuration (defaults applied); reparseable."""
    system: dict = {
        "n_levels": config.bounds.n_levels,
        "mu": [config.bounds.mu_min, config.bounds.mu_max],
        "omega0": config.bounds.omega0,
    }
    if config.bounds.fixed_deltas is not None:
        system["deltas"] = list(config.bounds.fixed_deltas)
    else:
        system["delta_bound"] = config.bounds.delta_bound
    return {
        "system": system,
        "chirp": config.chirp.to_dict(),
        "task": dict(config.task),
        "simulation": dict(config.simulation),
        "output": dict(config.output),
    }
