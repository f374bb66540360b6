"""Synthesis of chirp/amplitude controls realizing transfers and permutations.

The designed zero set of the amplitude decides which level-pair degeneracies
become true crossings (the state rides through diabatically) and which become
avoided crossings (the state switches lines).  Transfers l -> p follow the
next-crossing walk on the diagonal-level diagram; arbitrary permutations come
from a recurrence that peels off the top level.

At finite sweep rate the avoided crossings only work if the amplitude is large
enough there, so synthesized amplitudes can be calibrated: each anti-crossing
point gets a Gaussian bump sized from a Landau-Zener estimate of the effective
two-level coupling (which is of order |m - n| in the amplitude for the pair
(m, n), suppressed by the intermediate-level spacings).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .controls import AmplitudeProfile, ChirpProfile, ControlProfile, Permutation
from .errors import SynthesisError, ValidationError
from .ladder import EnsembleBounds, LadderSystem
from .spectral import (CrossingRecord, CrossingSet, ZERO_MATCH_TOL,
                       crossing_set, track_branches)

__all__ = [
    "validate_chirp",
    "zero_set_for_transfer",
    "zero_set_for_permutation",
    "build_amplitude",
    "required_amplitude",
    "calibrate_amplitude",
    "spread_chirp",
    "synthesize_permutation_control",
    "synthesize_transfer_control",
    "CalibrationCandidate",
    "DEFAULT_CANDIDATES",
]

_COARSE_GRID = np.linspace(0.0, 1.0, 33)


def _endpoint_ordering_ok(deltas, w: float, increasing: bool) -> bool:
    lam = np.arange(len(deltas)) * (np.asarray(deltas) - w)
    diffs = np.diff(lam)
    return bool(np.all(diffs > 0)) if increasing else bool(np.all(diffs < 0))


def validate_chirp(bounds: EnsembleBounds, chirp: ChirpProfile) -> bool:
    """Endpoint level-ordering check (full inversion condition) for an ensemble.

    True when every member's diagonal levels are strictly increasing at one end
    of the sweep and strictly decreasing at the other (either sweep direction).
    For interval-valued detunings the check runs at the worst-case corners,
    which is sufficient because the pairwise differences are affine in them.
    """
    w0, w1 = float(chirp.omega(0.0)), float(chirp.omega(1.0))
    if bounds.fixed_deltas is not None:
        d = bounds.fixed_deltas
        up = _endpoint_ordering_ok(d, w0, True) and _endpoint_ordering_ok(d, w1, False)
        down = _endpoint_ordering_ok(d, w0, False) and _endpoint_ordering_ok(d, w1, True)
        return up or down
    # interval deltas: difference (k+1)(d_{k+1} - w) - k(d_k - w) is minimized
    # (resp. maximized) at the corner d_{k+1} = -/+ bound, d_k = +/- bound,
    # giving the threshold (2k+1) * bound, worst at k = N - 2
    b = bounds.delta_bound
    thr = (2 * bounds.n_levels - 3) * b
    up = w0 < -thr and w1 > thr
    down = w0 > thr and w1 < -thr
    return up or down


# ---------------------------------------------------------------------------
# zero-set construction
# ---------------------------------------------------------------------------

def _next_crossing(crossings: CrossingSet, k: int, x: float, side: str):
    """Earliest crossing of level k after time x, on the given side.

    side "plus": pairs (k, n) with n > k; side "minus": pairs (m, k) with
    m < k.  Returns (time, partner) or (inf, None).
    """
    best_t, best_partner = np.inf, None
    for rec in crossings:
        if rec.s_cross <= x:
            continue
        if side == "plus" and rec.m == k:
            t, partner = rec.s_cross, rec.n
        elif side == "minus" and rec.n == k:
            t, partner = rec.s_cross, rec.m
        else:
            continue
        if t < best_t:
            best_t, best_partner = t, partner
    return best_t, best_partner


def zero_set_for_transfer(system: LadderSystem, chirp: ChirpProfile,
                          l: int, p: int,
                          crossings: CrossingSet | None = None) -> list[float]:
    """Times where the amplitude must vanish to carry level l to level p.

    Walks the diagonal-level diagram from level l: while the next crossing on
    the current line comes from the wrong side it is left avoided (the walk
    hops onto the partner line); crossings from the right side are designated
    as true crossings until |N - l - p - 1| of them are collected.
    """
    n = system.n_levels
    if not (0 <= l < n and 0 <= p < n):
        raise ValidationError(f"levels out of range: l={l}, p={p}, N={n}")
    if crossings is None:
        crossings = crossing_set(system, chirp)
    count = abs(n - l - p - 1)
    if count == 0:
        return []
    if p <= n - l - 1:
        take, hop = "plus", "minus"
    else:
        take, hop = "minus", "plus"
    zeros: list[float] = []
    k, x = l, 0.0
    while len(zeros) < count:
        while True:
            t_hop, partner_hop = _next_crossing(crossings, k, x, hop)
            t_take, _ = _next_crossing(crossings, k, x, take)
            if partner_hop is not None and t_hop < t_take:
                k, x = partner_hop, t_hop
            else:
                break
        t_take, _ = _next_crossing(crossings, k, x, take)
        if not np.isfinite(t_take):
            raise SynthesisError(
                f"transfer {l} -> {p}: ran out of crossings on level {k}")
        zeros.append(t_take)
        x = t_take
    return sorted(zeros)


def _perm_zeros(system: LadderSystem, chirp: ChirpProfile,
                crossings: CrossingSet, images: list[int],
                outer_zeros: frozenset[float] = frozenset()) -> set[float]:
    top = len(images) - 1
    if top <= 0:
        return set()
    lookup = {rec.pair: rec.s_cross for rec in crossings}
    if top == 1:
        return set() if images == [1, 0] else {lookup[(0, 1)]}
    if images[top] == top:
        line_zeros = {lookup[(m, top)] for m in range(top)}
        zeros = _perm_zeros(system, chirp, crossings, images[:top],
                            outer_zeros | line_zeros)
        return zeros | line_zeros
    l = images.index(top)
    p = images[top]
    bar = list(images)
    bar[l], bar[top] = p, top
    zeros_bar = _perm_zeros(system, chirp, crossings, bar, outer_zeros)
    # under the auxiliary control (including the crossings designed by the
    # enclosing recursion levels, which keep the higher branches out of the
    # way) the branch from level l travels to level p while the top branch
    # rides its own line; un-designing the one crossing where the two meet
    # splices l -> top and top -> p
    aux = ControlProfile(chirp,
                         build_amplitude(zeros_bar | outer_zeros, crossings))
    diagram = track_branches(system, aux, grid=_COARSE_GRID,
                             min_gap_check=False, crossings=crossings)
    s_meet = None
    for (s, _), branches in zip(diagram.swap_events, diagram.swap_branches):
        if set(branches) == {l, top}:
            s_meet = s
            break
    if s_meet is None:
        raise SynthesisError(
            f"no crossing between branches {l} and {top} under the auxiliary "
            f"control; cannot splice the permutation")
    return zeros_bar - {s_meet}


def zero_set_for_permutation(system: LadderSystem, chirp: ChirpProfile,
                             sigma: Permutation,
                             crossings: CrossingSet | None = None) -> list[float]:
    """Designed zero set realizing the level permutation sigma.

    Recursive construction: a fixed top level designs every crossing on its
    line and reduces the problem by one level; otherwise the permutation is
    solved with the top level held fixed and the single crossing where the
    displaced branch meets the top branch is released into an anti-crossing.
    The result is verified by branch tracking before being returned.
    """
    if len(sigma) != system.n_levels:
        raise ValidationError(
            f"permutation on {len(sigma)} symbols for {system.n_levels} levels")
    if crossings is None:
        crossings = crossing_set(system, chirp)
    if sigma == Permutation.reversal(system.n_levels):
        # full inversion: avoiding every crossing already reverses the levels,
        # so the empty designed set is returned instead of unwinding the
        # recurrence (which builds a larger equivalent set)
        zeros: list[float] = []
    else:
        zeros = sorted(_perm_zeros(system, chirp, crossings,
                                   list(sigma.images)))
    control = ControlProfile(chirp, build_amplitude(zeros, crossings))
    diagram = track_branches(system, control, grid=_COARSE_GRID,
                             min_gap_check=False, crossings=crossings)
    realized = diagram.permutation()
    if realized != sigma:
        raise SynthesisError(
            f"synthesis check failed: zero set {zeros} induces "
            f"{realized.images}, wanted {sigma.images}")
    return zeros


def build_amplitude(zero_set, crossings: CrossingSet,
                    bump_width=0.05, bump_height=3.0) -> AmplitudeProfile:
    """Amplitude with the given interior zeros; bumps on every other crossing.

    The anti-crossing points are exactly the crossing times not in the zero
    set, so the profile stays away from zero wherever an avoided crossing is
    required.
    """
    zs = set(float(z) for z in zero_set) | {0.0, 1.0}
    times = crossings.times()
    for z in zs - {0.0, 1.0}:
        if not any(abs(z - t) <= ZERO_MATCH_TOL for t in times):
            raise ValidationError(
                f"zero at s = {z} does not coincide with any crossing time")
    anti = [t for t in times
            if not any(abs(t - z) <= ZERO_MATCH_TOL for z in zs)]
    return AmplitudeProfile(sorted(zs), sorted(anti), bump_width, bump_height)


# ---------------------------------------------------------------------------
# finite-sweep-rate calibration
# ---------------------------------------------------------------------------

def required_amplitude(system: LadderSystem, chirp: ChirpProfile,
                       rec: CrossingRecord, epsilon: float,
                       p_tol: float = 0.02, mu_ref: float | None = None) -> float:
    """Amplitude needed at an anti-crossing to keep the diabatic leak <= p_tol.

    LZ estimate: leak = exp(-2 pi g^2 / (eps * d_alpha)) with relative line
    slope d_alpha = (n - m) omega'(s).  The effective pair coupling is the
    chain product g = (A mu)^r / prod |E - E_mid| over the r - 1 intermediate
    levels (r = n - m), inverted here for A at the reference coupling mu_ref.
    """
    m, n = rec.pair
    d_alpha = (n - m) * abs(float(chirp.omega_prime(rec.s_cross)))
    g_req = np.sqrt(np.log(1.0 / p_tol) * epsilon * d_alpha / (2.0 * np.pi))
    lam = np.arange(system.n_levels) * (np.asarray(system.deltas) - rec.omega_cross)
    denom = 1.0
    for j in range(m + 1, n):
        denom *= abs(lam[m] - lam[j])
    if mu_ref is None:
        mu_ref = min(system.mus)
    r = n - m
    return float((g_req * denom / mu_ref ** r) ** (1.0 / r))


def _solve_heights(poly_at, targets, widths, pts):
    """Joint heights so each |A(a_i)| hits its target despite bump overlap."""
    k = len(pts)
    if k == 0:
        return []
    g = np.array([[np.exp(-((pts[i] - pts[j]) ** 2) / (2.0 * widths[j] ** 2))
                   for j in range(k)] for i in range(k)])
    h = np.zeros(k)
    for _ in range(500):
        h_new = np.empty(k)
        for i in range(k):
            other = np.prod([1.0 + h[j] * g[i, j] for j in range(k) if j != i])
            h_new[i] = max(targets[i] / (poly_at[i] * other) - 1.0, 0.0)
        if np.allclose(h_new, h, rtol=1e-12, atol=1e-14):
            h = h_new
            break
        h = h_new
    return list(h)


def calibrate_amplitude(system: LadderSystem, chirp: ChirpProfile,
                        zero_set, crossings: CrossingSet, epsilon: float,
                        mu_ref: float | None = None, p_tol: float = 0.02,
                        cap: float = 0.45, w_max: float = 0.05,
                        w_frac: float = 0.6,
                        target_scale: float = 1.0) -> AmplitudeProfile:
    """Amplitude with per-point bump widths and heights sized for epsilon.

    Widths shrink near neighboring crossings (spilling a strong bump onto a
    designed zero corrupts that crossing); heights are solved jointly so the
    profile reaches each point's LZ target, capped to keep couplings below the
    level spacings.
    """
    base = build_amplitude(zero_set, crossings)
    anti = list(base.antizero_set)
    if not anti:
        return base
    times = crossings.times()
    bare = AmplitudeProfile(base.zero_set, ())
    widths, targets, poly_at = [], [], []
    for a in anti:
        rec = crossings.lookup(a)
        dists = [abs(a - t) for t in times if abs(a - t) > ZERO_MATCH_TOL]
        dists += [a, 1.0 - a]  # the endpoint zeros always bound the plateau
        widths.append(min(w_max, w_frac * min(dists)))
        req = required_amplitude(system, chirp, rec, epsilon, p_tol, mu_ref)
        targets.append(min(req * target_scale, cap))
        poly_at.append(abs(bare(a)))
    heights = _solve_heights(poly_at, targets, widths, anti)
    return AmplitudeProfile(base.zero_set, anti, tuple(widths), tuple(heights))


def spread_chirp(system: LadderSystem, omega_start: float | None = None,
                 omega_end: float | None = None) -> ChirpProfile:
    """Monotone chirp placing the crossing frequencies at equispaced times.

    A linear sweep can pile several crossings into a narrow time window; this
    profile sweeps the same frequency span but slows down and speeds up so
    consecutive degeneracies are evenly separated, giving every bump room.
    """
    n = system.n_levels
    d = system.deltas
    oms = sorted((p * d[p] - m * d[m]) / (p - m)
                 for m in range(n) for p in range(m + 1, n))
    span = oms[-1] - oms[0]
    margin = max(0.2 * span, 0.2)
    w0 = omega_start if omega_start is not None else oms[0] - margin
    w1 = omega_end if omega_end is not None else oms[-1] + margin
    if not (w0 < oms[0] and w1 > oms[-1]):
        raise ValidationError("spread chirp window must contain every crossing")
    m_count = len(oms)
    s_nodes = [0.0] + [(k + 1) / (m_count + 1) for k in range(m_count)] + [1.0]
    return ChirpProfile.tabulated(s_nodes, [w0] + oms + [w1])


@dataclass(frozen=True)
class CalibrationCandidate:
    """One point in the calibration ladder tried by the synthesis probe."""

    chirp_kind: str = "given"      # "given" or "spread"
    p_tol: float = 0.02
    cap: float = 0.45
    w_max: float = 0.05
    w_frac: float = 0.6
    target_scale: float = 1.0


DEFAULT_CANDIDATES = (
    CalibrationCandidate("given", 0.02, 0.45, 0.05, 0.60, 1.0),
    CalibrationCandidate("given", 0.02, 0.45, 0.04, 0.50, 1.0),
    CalibrationCandidate("given", 0.01, 0.50, 0.06, 0.70, 1.0),
    CalibrationCandidate("given", 0.05, 0.40, 0.05, 0.50, 1.0),
    CalibrationCandidate("given", 0.02, 0.35, 0.035, 0.45, 0.75),
    CalibrationCandidate("given", 0.01, 0.55, 0.07, 0.80, 1.2),
    CalibrationCandidate("spread", 0.02, 0.45, 0.05, 0.60, 1.0),
    CalibrationCandidate("spread", 0.01, 0.50, 0.06, 0.70, 1.0),
)


def _induced_images(crossings: CrossingSet, zero_pairs, n: int) -> tuple[int, ...]:
    """Level map from the crossing order and the designed-pair subset.

    Branch k starts on line k; at an avoided crossing the two occupants of the
    degenerate lines trade lines, at a designed crossing nothing changes.
    """
    cur = list(range(n))
    for rec in crossings:
        if rec.pair not in zero_pairs:
            bm, bn = cur.index(rec.m), cur.index(rec.n)
            cur[bm], cur[bn] = rec.n, rec.m
    return tuple(cur)


def _alternative_zero_pairs(crossings: CrossingSet, n: int, predicate,
                            limit: int = 4) -> list[frozenset]:
    """Designed-pair subsets matching ``predicate``, friendliest first.

    Friendliness penalizes anti-crossings of non-adjacent levels (their
    avoided gaps are high order in the amplitude) and consecutive high-order
    anti-crossings with no designed zero between them (their boosted bumps
    overlap).  Enumeration is only attempted for small crossing sets.
    """
    recs = list(crossings)
    m_count = len(recs)
    if m_count > 10:
        return []
    scored = []
    for bits in range(2 ** m_count):
        zero_pairs = frozenset(recs[i].pair for i in range(m_count)
                               if bits >> i & 1)
        if not predicate(_induced_images(crossings, zero_pairs, n)):
            continue
        antis = [recs[i] for i in range(m_count) if not bits >> i & 1]
        high = [r for r in antis if r.n - r.m >= 2]
        zero_times = [recs[i].s_cross for i in range(m_count) if bits >> i & 1]
        adjacent_high = 0
        for a, b in zip(high, high[1:]):
            if not any(a.s_cross < z < b.s_cross for z in zero_times):
                adjacent_high += 1
        score = (len(high), adjacent_high,
                 sum(r.n - r.m - 1 for r in antis), len(antis))
        scored.append((score, sorted(p for p in zero_pairs), zero_pairs))
    scored.sort(key=lambda t: (t[0], t[1]))
    return [zp for _, _, zp in scored[:limit]]


def _probe_entry_deviation(system, control, epsilon, sigma_matrix, n_steps):
    from .propagator import SimulationConfig, integrate_u
    config = SimulationConfig(epsilon=epsilon, n_steps=n_steps,
                              tolerance_unitarity=1e-8)
    traj = integrate_u(system, control, config)
    populations = np.abs(traj.final_unitary) ** 2
    return float(np.max(np.abs(populations - sigma_matrix)))


class _ChirpOptions:
    """Lazily built (chirp, crossings) per candidate kind."""

    def __init__(self, system: LadderSystem, chirp: ChirpProfile,
                 crossings: CrossingSet):
        self.system = system
        self.options = {"given": (chirp, crossings)}

    def get(self, kind: str):
        if kind not in self.options:
            given_chirp = self.options["given"][0]
            sc = spread_chirp(self.system, float(given_chirp.omega(0.0)),
                              float(given_chirp.omega(1.0)))
            self.options["spread"] = (sc, crossing_set(self.system, sc))
        return self.options[kind]


def _probe_ladder(system, chirps, zero_pairs, epsilon, mu_ref, candidates,
                  metric, threshold):
    """Try every calibration candidate on one designed-pair set."""
    best = None
    for cand in candidates:
        chirp_c, crossings_c = chirps.get(cand.chirp_kind)
        times = {rec.pair: rec.s_cross for rec in crossings_c}
        zeros = sorted(times[pair] for pair in zero_pairs)
        amp = calibrate_amplitude(system, chirp_c, zeros, crossings_c,
                                  epsilon, mu_ref=mu_ref, p_tol=cand.p_tol,
                                  cap=cand.cap, w_max=cand.w_max,
                                  w_frac=cand.w_frac,
                                  target_scale=cand.target_scale)
        control = ControlProfile(chirp_c, amp)
        dev = metric(control)
        if best is None or dev < best[0]:
            best = (dev, cand, control)
        if dev <= threshold:
            break
    return best


def _synthesize_probed(system, chirp, epsilon, mu_ref, candidates,
                       probe_threshold, probe_steps, primary_pairs,
                       predicate, metric):
    if probe_steps is None:
        probe_steps = max(2000, int(np.ceil(24.0 / epsilon)))
    crossings = crossing_set(system, chirp)
    chirps = _ChirpOptions(system, chirp, crossings)
    best = _probe_ladder(system, chirps, primary_pairs, epsilon, mu_ref,
                         candidates, metric, probe_threshold)
    if best[0] > probe_threshold:
        # the construction's zero set is dynamically unfavorable at this
        # sweep rate; several designed-pair subsets induce the same level map,
        # so try the friendlier ones
        for alt in _alternative_zero_pairs(crossings, system.n_levels,
                                           predicate):
            if alt == primary_pairs:
                continue
            trial = _probe_ladder(system, chirps, alt, epsilon, mu_ref,
                                  candidates, metric, probe_threshold)
            if trial[0] < best[0]:
                best = trial
            if best[0] <= probe_threshold:
                break
    return best


def synthesize_permutation_control(system: LadderSystem, chirp: ChirpProfile,
                                   sigma: Permutation, epsilon: float,
                                   mu_ref: float | None = None,
                                   calibrate: bool = True,
                                   candidates=DEFAULT_CANDIDATES,
                                   probe_threshold: float = 0.06,
                                   probe_steps: int | None = None):
    """Control realizing sigma, tuned for the requested sweep rate.

    Without calibration returns the recurrence zero set with default bumps.
    With calibration, candidates (bump sizing rules, optionally a
    crossing-spreading chirp over the same frequency window, and if needed
    alternative designed-pair sets inducing the same permutation) are probed
    by a reduced-step integration on the given system; the first whose final
    populations sit within ``probe_threshold`` of the permutation matrix
    wins, else the best seen.  Returns (control, info dict).
    """
    crossings = crossing_set(system, chirp)
    zeros = zero_set_for_permutation(system, chirp, sigma, crossings)
    if not calibrate:
        control = ControlProfile(chirp, build_amplitude(zeros, crossings))
        return control, {"calibrated": False, "zero_set": zeros}
    sigma_matrix = sigma.matrix()
    probe_n = probe_steps or max(2000, int(np.ceil(24.0 / epsilon)))

    def metric(control):
        return _probe_entry_deviation(system, control, epsilon, sigma_matrix,
                                      probe_n)

    primary_pairs = frozenset(crossings.lookup(z).pair for z in zeros)
    dev, cand, control = _synthesize_probed(
        system, chirp, epsilon, mu_ref, candidates, probe_threshold,
        probe_steps, primary_pairs, lambda imgs: imgs == sigma.images, metric)
    realized = track_branches(system, control, grid=_COARSE_GRID,
                              min_gap_check=False).permutation()
    if realized != sigma:
        raise SynthesisError(
            f"synthesis check failed: control induces {realized.images}, "
            f"wanted {sigma.images}")
    info = {"calibrated": True, "probe_deviation": dev, "candidate": cand,
            "zero_set": list(control.amplitude.interior_zeros)}
    return control, info


def synthesize_transfer_control(system: LadderSystem, chirp: ChirpProfile,
                                l: int, p: int, epsilon: float,
                                mu_ref: float | None = None,
                                calibrate: bool = True,
                                candidates=DEFAULT_CANDIDATES,
                                probe_threshold: float = 0.06,
                                probe_steps: int | None = None):
    """Control transferring level l to level p; same probing as permutations.

    Only the column of the initial level enters the probe metric, since a bare
    transfer leaves the other levels' destinations unconstrained.
    """
    crossings = crossing_set(system, chirp)
    zeros = zero_set_for_transfer(system, chirp, l, p, crossings)
    if not calibrate:
        control = ControlProfile(chirp, build_amplitude(zeros, crossings))
        return control, {"calibrated": False, "zero_set": zeros}
    target_col = np.zeros(system.n_levels)
    target_col[p] = 1.0
    probe_n = probe_steps or max(2000, int(np.ceil(24.0 / epsilon)))

    from .propagator import SimulationConfig, integrate_u

    def metric(control):
        config = SimulationConfig(epsilon=epsilon, n_steps=probe_n,
                                  tolerance_unitarity=1e-8)
        traj = integrate_u(system, control, config)
        col = np.abs(traj.final_unitary[:, l]) ** 2
        return float(np.max(np.abs(col - target_col)))

    primary_pairs = frozenset(crossings.lookup(z).pair for z in zeros)
    dev, cand, control = _synthesize_probed(
        system, chirp, epsilon, mu_ref, candidates, probe_threshold,
        probe_steps, primary_pairs, lambda imgs: imgs[l] == p, metric)
    info = {"calibrated": True, "probe_deviation": dev, "candidate": cand,
            "zero_set": list(control.amplitude.interior_zeros)}
    return control, info
