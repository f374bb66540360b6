"""Ensemble sampling, campaign execution, and sweep-rate scaling studies.

A campaign synthesizes one control from the nominal detunings and applies it
unchanged to every sampled member, mirroring the single-control-for-an-ensemble
robustness claims.  Detunings vary across members only for full-inversion
(gap-protected) campaigns; transfer/permutation campaigns require the fixed
detunings that pin the crossing times.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .controls import AmplitudeProfile, ChirpProfile, ControlProfile, Permutation
from .errors import ValidationError
from .ladder import EnsembleBounds, LadderSystem
from .propagator import SimulationConfig, integrate_u, transfer_fidelity
from .synthesis import synthesize_permutation_control

__all__ = [
    "EnsembleReport",
    "SweepResult",
    "sample_ensemble",
    "run_permutation_campaign",
    "run_transfer_campaign",
    "epsilon_sweep",
]


def sample_ensemble(bounds: EnsembleBounds, count: int, seed: int) -> list[LadderSystem]:
    """Draw ``count`` systems: couplings uniform, detunings uniform or fixed."""
    if count < 1:
        raise ValidationError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    members = []
    for _ in range(count):
        mus = rng.uniform(bounds.mu_min, bounds.mu_max, size=bounds.n_levels - 1)
        if bounds.varies_deltas:
            deltas = rng.uniform(-bounds.delta_bound, bounds.delta_bound,
                                 size=bounds.n_levels)
        else:
            deltas = np.asarray(bounds.fixed_deltas)
        members.append(LadderSystem(bounds.n_levels, tuple(deltas), tuple(mus),
                                    bounds.omega0))
    return members


@dataclass
class EnsembleReport:
    """Per-member fidelities for one control applied across an ensemble."""

    sigma: tuple[int, ...]
    epsilon: float
    seed: int
    count: int
    control: dict
    per_system: list[dict] = field(default_factory=list)
    worst_case: float = 0.0
    mean_case: float = 0.0
    worst_entry_deviation: float = 0.0

    def recompute(self) -> None:
        worst_fids = [max(entry["fidelity"].values()) for entry in self.per_system]
        self.worst_case = float(max(worst_fids))
        self.mean_case = float(np.mean(worst_fids))
        self.worst_entry_deviation = float(
            max(entry["entry_deviation"] for entry in self.per_system))

    def to_dict(self) -> dict:
        return {
            "sigma": list(self.sigma),
            "epsilon": self.epsilon,
            "seed": self.seed,
            "count": self.count,
            "control": self.control,
            "worst_case": self.worst_case,
            "mean_case": self.mean_case,
            "worst_entry_deviation": self.worst_entry_deviation,
            "per_system": [
                {
                    "mus": entry["mus"],
                    "deltas": entry["deltas"],
                    "fidelity": {str(k): v for k, v in entry["fidelity"].items()},
                    "entry_deviation": entry["entry_deviation"],
                    **({"transfer_population": entry["transfer_population"]}
                       if "transfer_population" in entry else {}),
                }
                for entry in self.per_system
            ],
        }


def _default_control(bounds: EnsembleBounds, sigma: Permutation,
                     chirp: ChirpProfile, epsilon: float,
                     calibrate: bool) -> tuple[ControlProfile, dict]:
    nominal = bounds.nominal_system()
    if bounds.varies_deltas:
        if sigma != Permutation.reversal(bounds.n_levels):
            raise ValidationError(
                "interval detunings only support the full-inversion "
                "permutation; transfers and general permutations need fixed "
                "detunings (crossing times must be shared by all members)")
        control = ControlProfile(chirp, AmplitudeProfile((0.0, 1.0)))
        return control, {"calibrated": False, "zero_set": []}
    control, info = synthesize_permutation_control(
        nominal, chirp, sigma, epsilon, mu_ref=bounds.mu_min,
        calibrate=calibrate)
    return control, info


def run_permutation_campaign(bounds: EnsembleBounds, sigma: Permutation,
                             chirp: ChirpProfile, epsilon: float,
                             count: int = 10, seed: int = 42,
                             members: list[LadderSystem] | None = None,
                             control: ControlProfile | None = None,
                             calibrate: bool = True,
                             n_steps: int | None = None,
                             check_convergence: bool = False) -> EnsembleReport:
    """Synthesize one control and measure its transfer fidelity memberwise.

    ``members`` overrides the seeded sample (e.g. to run just the nominal
    system); ``control`` overrides synthesis entirely.
    """
    info: dict = {}
    if control is None:
        control, info = _default_control(bounds, sigma, chirp, epsilon, calibrate)
    if members is None:
        members = sample_ensemble(bounds, count, seed)
    config = SimulationConfig(epsilon=epsilon, n_steps=n_steps,
                              check_convergence=check_convergence)
    sigma_matrix = sigma.matrix()
    report = EnsembleReport(sigma=sigma.images, epsilon=epsilon, seed=seed,
                            count=len(members),
                            control={**control.to_dict(),
                                     "synthesis": _info_dict(info)})
    for member in members:
        traj = integrate_u(member, control, config)
        u = traj.final_unitary
        fids = {k: transfer_fidelity(u, k, sigma(k))
                for k in range(bounds.n_levels)}
        entry_dev = float(np.max(np.abs(np.abs(u) ** 2 - sigma_matrix)))
        report.per_system.append({
            "mus": list(member.mus),
            "deltas": list(member.deltas),
            "fidelity": fids,
            "entry_deviation": entry_dev,
            "final_unitary": u,
        })
    report.recompute()
    return report


def run_transfer_campaign(bounds: EnsembleBounds, l: int, p: int,
                          chirp: ChirpProfile, epsilon: float,
                          count: int = 10, seed: int = 42,
                          members: list[LadderSystem] | None = None,
                          control: ControlProfile | None = None,
                          calibrate: bool = True,
                          n_steps: int | None = None,
                          check_convergence: bool = False) -> EnsembleReport:
    """Campaign for a bare l -> p transfer; only the l column is scored."""
    from .synthesis import synthesize_transfer_control

    info: dict = {}
    if control is None:
        nominal = bounds.nominal_system()
        control, info = synthesize_transfer_control(
            nominal, chirp, l, p, epsilon, mu_ref=bounds.mu_min,
            calibrate=calibrate)
    if members is None:
        members = sample_ensemble(bounds, count, seed)
    config = SimulationConfig(epsilon=epsilon, n_steps=n_steps,
                              check_convergence=check_convergence)
    target_col = np.zeros(bounds.n_levels)
    target_col[p] = 1.0
    report = EnsembleReport(sigma=(l, p), epsilon=epsilon, seed=seed,
                            count=len(members),
                            control={**control.to_dict(),
                                     "synthesis": _info_dict(info)})
    for member in members:
        traj = integrate_u(member, control, config)
        u = traj.final_unitary
        fids = {l: transfer_fidelity(u, l, p)}
        col_dev = float(np.max(np.abs(np.abs(u[:, l]) ** 2 - target_col)))
        report.per_system.append({
            "mus": list(member.mus),
            "deltas": list(member.deltas),
            "fidelity": fids,
            "entry_deviation": col_dev,
            "transfer_population": float(np.abs(u[p, l]) ** 2),
            "final_unitary": u,
        })
    report.recompute()
    return report


def _info_dict(info: dict) -> dict:
    out = {}
    for key, val in info.items():
        if key == "candidate" and val is not None:
            out[key] = {
                "chirp_kind": val.chirp_kind, "p_tol": val.p_tol,
                "cap": val.cap, "w_max": val.w_max, "w_frac": val.w_frac,
                "target_scale": val.target_scale,
            }
        else:
            out[key] = val
    return out


@dataclass
class SweepResult:
    """Worst-case error against sweep rate, plus the fitted log-log slope."""

    sigma: tuple[int, ...]
    epsilons: list[float]
    worst_cases: list[float]
    slope: float
    reports: list[EnsembleReport] = field(default_factory=list)

    def table(self) -> list[tuple[float, float]]:
        return list(zip(self.epsilons, self.worst_cases))

    def to_dict(self) -> dict:
        return {
            "sigma": list(self.sigma),
            "epsilons": self.epsilons,
            "worst_cases": self.worst_cases,
            "slope": self.slope,
        }


def epsilon_sweep(bounds: EnsembleBounds, sigma: Permutation,
                  chirp: ChirpProfile, epsilons, count: int = 10,
                  seed: int = 42,
                  members: list[LadderSystem] | None = None,
                  control: ControlProfile | None = None,
                  calibrate: bool = True,
                  transfer: tuple[int, int] | None = None) -> SweepResult:
    """Run the same control and ensemble at several sweep rates.

    ``epsilons`` must be sorted descending with at least three entries.  The
    control is synthesized once, for the smallest rate, and reused across the
    grid so the scaling is that of a fixed control.  With ``transfer=(l, p)``
    only the l -> p fidelity is scored (sweep of a bare transfer).
    """
    eps_list = [float(e) for e in epsilons]
    if len(eps_list) < 3:
        raise ValidationError("need at least 3 epsilon values")
    if any(a <= b for a, b in zip(eps_list, eps_list[1:])):
        raise ValidationError("epsilons must be sorted descending")
    if control is None:
        if transfer is not None:
            from .synthesis import synthesize_transfer_control
            control, _info = synthesize_transfer_control(
                bounds.nominal_system(), chirp, transfer[0], transfer[1],
                min(eps_list), mu_ref=bounds.mu_min, calibrate=calibrate)
        else:
            control, _info = _default_control(bounds, sigma, chirp,
                                              min(eps_list), calibrate)
    if members is None:
        members = sample_ensemble(bounds, count, seed)
    reports, worst = [], []
    for eps in eps_list:
        if transfer is not None:
            rep = run_transfer_campaign(bounds, transfer[0], transfer[1],
                                        chirp, eps, members=members,
                                        control=control, seed=seed)
        else:
            rep = run_permutation_campaign(bounds, sigma, chirp, eps,
                                           members=members, control=control,
                                           seed=seed)
        reports.append(rep)
        worst.append(rep.worst_case)
    slope = float(np.polyfit(np.log(eps_list), np.log(worst), 1)[0])
    sig = sigma.images if sigma is not None else tuple(transfer)
    return SweepResult(sigma=sig, epsilons=eps_list,
                       worst_cases=worst, slope=slope, reports=reports)
