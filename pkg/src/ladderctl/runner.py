"""Task dispatch: execute a RunConfig and write artifacts atomically."""
from __future__ import annotations

import itertools
import logging

import numpy as np

from .config import RunConfig, config_to_dict
from .controls import AmplitudeProfile, ControlProfile, Permutation
from .ensemble import (run_permutation_campaign, run_transfer_campaign,
                       epsilon_sweep, sample_ensemble)
from .errors import ValidationError
from .ladder import LadderSystem
from .output import ArtifactWriter, montage_matrix, pgm_bytes, write_csv, write_json
from .propagator import SimulationConfig, integrate_u, lab_frame_validate
from .spectral import crossing_set, track_branches
from .synthesis import (build_amplitude, synthesize_permutation_control,
                        synthesize_transfer_control)

__all__ = ["run"]

log = logging.getLogger("ladderctl")


def _task_sigma(config: RunConfig) -> Permutation | None:
    task = config.task
    n = config.bounds.n_levels
    if task["kind"] == "inversion":
        return Permutation.reversal(n)
    if task.get("images") and task["images"] != "all":
        return Permutation(task["images"])
    return None


def _synthesize(config: RunConfig):
    """Control + sigma for the configured task on the nominal system."""
    bounds = config.bounds
    sim = config.simulation
    nominal = bounds.nominal_system()
    task = config.task
    targetless = "l" not in task and not task.get("images")
    if bounds.varies_deltas or task["kind"] == "inversion" or (
            task["kind"] in ("branches", "sweep", "labframe") and targetless):
        sigma = Permutation.reversal(bounds.n_levels)
        if bounds.varies_deltas:
            control = ControlProfile(config.chirp, AmplitudeProfile((0.0, 1.0)))
            return control, sigma, {"calibrated": False, "zero_set": []}
        control, info = synthesize_permutation_control(
            nominal, config.chirp, sigma, sim["epsilon"],
            mu_ref=bounds.mu_min, calibrate=sim["calibrate"])
        return control, sigma, info
    if "l" in task and "p" in task:
        control, info = synthesize_transfer_control(
            nominal, config.chirp, task["l"], task["p"], sim["epsilon"],
            mu_ref=bounds.mu_min, calibrate=sim["calibrate"])
        return control, None, info
    sigma = _task_sigma(config)
    if sigma is None:
        raise ValidationError(f"task {task} does not define a control target")
    if sim["calibrate"]:
        control, info = synthesize_permutation_control(
            nominal, config.chirp, sigma, sim["epsilon"],
            mu_ref=bounds.mu_min, calibrate=True)
    else:
        crossings = crossing_set(nominal, config.chirp)
        from .synthesis import zero_set_for_permutation
        zeros = zero_set_for_permutation(nominal, config.chirp, sigma, crossings)
        control = ControlProfile(config.chirp, build_amplitude(
            zeros, crossings, sim["bump_width"], sim["bump_height"]))
        info = {"calibrated": False, "zero_set": zeros}
    return control, sigma, info


def _want(config: RunConfig, fmt: str) -> bool:
    return fmt in config.output["formats"]


def _write_control(writer, config, control, info) -> None:
    payload = control.to_dict()
    payload["synthesis"] = {k: v for k, v in info.items() if k != "candidate"}
    if info.get("candidate") is not None:
        c = info["candidate"]
        payload["synthesis"]["candidate"] = {
            "chirp_kind": c.chirp_kind, "p_tol": c.p_tol, "cap": c.cap,
            "w_max": c.w_max, "w_frac": c.w_frac,
            "target_scale": c.target_scale}
    write_json(writer.path("control.json"), payload)
    if _want(config, "png"):
        from .plots import plot_control
        plot_control(control, writer.path("controls.png"))


def _write_umatrix(writer, config, u, stem="umatrix") -> None:
    values = np.abs(u) ** 2
    if _want(config, "csv"):
        rows = [[f"{v:.12g}" for v in row] for row in values]
        write_csv(writer.path(f"{stem}.csv"), rows)
    if _want(config, "pgm"):
        writer.path(f"{stem}.pgm").write_bytes(pgm_bytes(values))
    if _want(config, "png"):
        from .plots import plot_umatrix
        plot_umatrix(u, writer.path(f"{stem}.png"))


def _write_trajectory(writer, config, system, control, sim, initial_level) -> None:
    checkpoints = np.linspace(0.0, 1.0, 201)
    sim_config = SimulationConfig(epsilon=sim["epsilon"], n_steps=sim["n_steps"],
                                  check_convergence=sim.get("check_convergence",
                                                            False))
    traj = integrate_u(system, control, sim_config, checkpoints=checkpoints)
    pops = traj.populations(initial_level)
    if _want(config, "csv"):
        header = ["s"] + [f"pop_{p}" for p in range(system.n_levels)]
        rows = [header] + [
            [f"{traj.grid[i]:.8g}"] + [f"{v:.10g}" for v in pops[i]]
            for i in range(len(traj.grid))]
        write_csv(writer.path("trajectory.csv"), rows)
    if _want(config, "png"):
        from .plots import plot_populations
        plot_populations(traj.grid, pops, writer.path("populations.png"),
                         initial_level)
    return traj


def run(config: RunConfig, out_dir=None, check_convergence: bool = False) -> dict:
    """Execute the configured task; returns a result summary dict."""
    sim = dict(config.simulation)
    sim["check_convergence"] = check_convergence
    out = out_dir or config.output["directory"]
    task = config.task
    summary: dict = {"task": task["kind"]}
    with ArtifactWriter(out) as writer:
        write_json(writer.path("config.json"), config_to_dict(config))
        if task["kind"] == "labframe":
            summary.update(_run_labframe(writer, config, sim))
        elif task["kind"] == "sweep":
            summary.update(_run_sweep(writer, config, sim))
        elif task["kind"] == "branches":
            summary.update(_run_branches(writer, config, sim))
        elif task["kind"] == "permutation" and task.get("images") == "all":
            summary.update(_run_montage(writer, config, sim))
        else:
            summary.update(_run_campaign(writer, config, sim))
    summary["output_dir"] = str(out)
    return summary


def _run_campaign(writer, config: RunConfig, sim) -> dict:
    bounds = config.bounds
    control, sigma, info = _synthesize(config)
    _write_control(writer, config, control, info)
    task = config.task
    initial = task.get("l", 0)
    nominal = bounds.nominal_system()
    traj = _write_trajectory(writer, config, nominal, control, sim, initial)
    _write_umatrix(writer, config, traj.final_unitary)
    members = sample_ensemble(bounds, sim["count"], sim["seed"])
    check = sim.get("check_convergence", False)
    if sigma is None:
        campaign = run_transfer_campaign(
            bounds, task["l"], task["p"], config.chirp, sim["epsilon"],
            members=members, control=control, seed=sim["seed"],
            n_steps=sim["n_steps"], check_convergence=check)
        summary_value = min(e["transfer_population"]
                            for e in campaign.per_system)
    else:
        campaign = run_permutation_campaign(
            bounds, sigma, config.chirp, sim["epsilon"],
            members=members, control=control, seed=sim["seed"],
            n_steps=sim["n_steps"], check_convergence=check)
        summary_value = campaign.worst_case
    write_json(writer.path("report.json"), campaign.to_dict())
    if _want(config, "csv"):
        rows = [["member", "worst_fidelity", "entry_deviation"]]
        for i, e in enumerate(campaign.per_system):
            rows.append([i, f"{max(e['fidelity'].values()):.8g}",
                         f"{e['entry_deviation']:.8g}"])
        write_csv(writer.path("report.csv"), rows)
    return {"worst_case": campaign.worst_case,
            "summary_value": summary_value,
            "entry_deviation": campaign.worst_entry_deviation}


def _run_branches(writer, config: RunConfig, sim) -> dict:
    bounds = config.bounds
    control, sigma, info = _synthesize(config)
    _write_control(writer, config, control, info)
    nominal = bounds.nominal_system()
    diagram = track_branches(nominal, control)
    if _want(config, "csv"):
        write_csv(writer.path("branches.csv"), diagram.csv_rows())
    if _want(config, "png"):
        from .plots import plot_branches
        plot_branches(diagram, writer.path("branches.png"))
    return {"swap_events": [list(e) for e in diagram.swap_events],
            "permutation": list(diagram.permutation().images)}


def _run_montage(writer, config: RunConfig, sim) -> dict:
    bounds = config.bounds
    if bounds.varies_deltas:
        raise ValidationError("the permutation montage needs fixed detunings")
    n = bounds.n_levels
    if n > 4:
        raise ValidationError("montage limited to n_levels <= 4 (n! controls)")
    nominal = bounds.nominal_system()
    labeled, worst = [], {}
    for images in itertools.permutations(range(n)):
        sigma = Permutation(images)
        campaign = run_permutation_campaign(
            bounds, sigma, config.chirp, sim["epsilon"],
            members=[nominal], seed=sim["seed"], n_steps=sim["n_steps"],
            calibrate=sim["calibrate"])
        u = campaign.per_system[0]["final_unitary"]
        labeled.append((str(tuple(images)), np.abs(u) ** 2))
        worst[str(tuple(images))] = campaign.worst_entry_deviation
        log.info("montage sigma=%s entry deviation %.4f", images,
                 campaign.worst_entry_deviation)
    grid = montage_matrix([v for _, v in labeled])
    if _want(config, "pgm"):
        writer.path("montage.pgm").write_bytes(pgm_bytes(grid, cell=24))
    if _want(config, "png"):
        from .plots import plot_montage
        plot_montage(labeled, writer.path("montage.png"))
    write_json(writer.path("report.json"),
               {"entry_deviation": worst,
                "worst": max(worst.values())})
    return {"worst_entry_deviation": max(worst.values())}


def _run_sweep(writer, config: RunConfig, sim) -> dict:
    bounds = config.bounds
    task = config.task
    transfer = (task["l"], task["p"]) if "l" in task and "p" in task else None
    if transfer is not None:
        sigma = None
    else:
        sigma = Permutation(task["images"]) if task.get("images") \
            else Permutation.reversal(bounds.n_levels)
    result = epsilon_sweep(bounds, sigma, config.chirp, task["epsilons"],
                           count=sim["count"], seed=sim["seed"],
                           calibrate=sim["calibrate"], transfer=transfer)
    write_json(writer.path("report.json"), result.to_dict())
    if _want(config, "csv"):
        rows = [["epsilon", "worst_case"]]
        rows += [[f"{e:.8g}", f"{w:.8g}"] for e, w in result.table()]
        rows.append(["slope", f"{result.slope:.6g}"])
        write_csv(writer.path("sweep.csv"), rows)
    return {"slope": result.slope, "worst_cases": result.worst_cases}


def _run_labframe(writer, config: RunConfig, sim) -> dict:
    bounds = config.bounds
    control, sigma, info = _synthesize(config)
    _write_control(writer, config, control, info)
    nominal = bounds.nominal_system()
    delta_scale = max((abs(d) for d in nominal.deltas[1:]), default=0.0)
    if delta_scale == 0.0:
        delta_scale = bounds.delta_bound or 1.0
    rows = [["omega0", "scale_ratio", "final_discrepancy", "max_discrepancy"]]
    results = []
    sim_config = SimulationConfig(epsilon=sim["epsilon"], n_steps=sim["n_steps"])
    for factor in config.task["omega0_factors"]:
        omega0 = factor * delta_scale
        report = lab_frame_validate(nominal, control, sim_config, omega0=omega0)
        results.append({"omega0": report.omega0,
                        "factor": factor,
                        "scale_ratio": report.scale_ratio,
                        "final_discrepancy": report.final_discrepancy,
                        "max_discrepancy": report.max_discrepancy})
        rows.append([f"{report.omega0:.8g}", f"{report.scale_ratio:.6g}",
                     f"{report.final_discrepancy:.8g}",
                     f"{report.max_discrepancy:.8g}"])
        log.info("labframe omega0=%.3g final discrepancy %.4g",
                 report.omega0, report.final_discrepancy)
    write_json(writer.path("report.json"), {"runs": results})
    if _want(config, "csv"):
        write_csv(writer.path("labframe.csv"), rows)
    return {"runs": results}
