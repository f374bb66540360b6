"""Crossing structure of the chirped-frame spectrum and eigenvalue branches.

The diagonal levels ``lambda^R_k(s) = k (delta_k - omega(s))`` cross pairwise;
the crossing of levels (m, n) happens where ``omega = (n d_n - m d_m)/(n - m)``
and is mapped to slow time through the monotone chirp.  Whether the full
Hamiltonian's analytic eigenvalue branches actually cross there or avoid each
other is decided purely by whether the amplitude vanishes at that instant, so
branch tracking is driven by the designed zero set, never by heuristics on
numerically close eigenvalues.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .controls import ControlProfile, ChirpProfile, Permutation
from .errors import (AssumptionViolationError, SweepWindowError,
                     TrackingAmbiguityError, ValidationError)
from .ladder import LadderSystem, build_h1

__all__ = [
    "CrossingRecord",
    "CrossingSet",
    "crossing_time",
    "crossing_set",
    "tridiag_char_poly",
    "assert_nondegenerate",
    "min_eigengap",
    "BranchDiagram",
    "track_branches",
    "branch_slopes_at_crossing",
    "hamiltonian_batch",
]

A1_TOL = 1e-10          # two pairs degenerate within this omega spacing -> reject
ZERO_MATCH_TOL = 1e-9   # designed zero <-> crossing time matching
GAP_FLOOR = 1e-9        # ambiguity guard away from designed crossings


@dataclass(frozen=True)
class CrossingRecord:
    m: int
    n: int
    s_cross: float
    omega_cross: float

    @property
    def pair(self) -> tuple[int, int]:
        return (self.m, self.n)


@dataclass(frozen=True)
class CrossingSet:
    """All level-pair degeneracy times inside the sweep window, time-sorted."""

    entries: tuple[CrossingRecord, ...]

    def times(self) -> list[float]:
        return [e.s_cross for e in self.entries]

    def pairs(self) -> list[tuple[int, int]]:
        return [e.pair for e in self.entries]

    def of_level(self, k: int) -> "CrossingSet":
        """Crossings involving level k (for k = 0 this is the set I_0)."""
        return CrossingSet(tuple(e for e in self.entries if k in e.pair))

    def lookup(self, s: float, tol: float = ZERO_MATCH_TOL) -> CrossingRecord | None:
        for e in self.entries:
            if abs(e.s_cross - s) <= tol:
                return e
        return None

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def crossing_time(system: LadderSystem, chirp: ChirpProfile,
                  m: int, n: int) -> CrossingRecord | None:
    """Degeneracy of levels m < n: algebraic in omega, inverted by bisection.

    Returns None when the crossing frequency lies outside the sweep window.
    """
    if not 0 <= m < n <= system.n_levels - 1:
        raise ValidationError(f"need 0 <= m < n <= N-1, got ({m}, {n})")
    d = system.deltas
    omega_cross = (n * d[n] - m * d[m]) / (n - m)
    s_cross = chirp.invert(omega_cross)
    if s_cross is None:
        return None
    return CrossingRecord(m, n, s_cross, omega_cross)


def crossing_set(system: LadderSystem, chirp: ChirpProfile,
                 require_full: bool = True) -> CrossingSet:
    """All pairwise crossings, checked for single-degeneracy separation.

    Raises AssumptionViolationError if two distinct pairs become degenerate at
    crossing frequencies closer than 1e-10, and SweepWindowError when full
    coverage is requested but the window misses some pair.
    """
    n = system.n_levels
    records = []
    all_omegas = []
    for m in range(n):
        for p in range(m + 1, n):
            d = system.deltas
            all_omegas.append(((m, p), (p * d[p] - m * d[m]) / (p - m)))
            rec = crossing_time(system, chirp, m, p)
            if rec is not None:
                records.append(rec)
    for i in range(len(all_omegas)):
        for j in range(i + 1, len(all_omegas)):
            if abs(all_omegas[i][1] - all_omegas[j][1]) < A1_TOL:
                raise AssumptionViolationError(
                    f"(A1) violated: pairs {all_omegas[i][0]} and "
                    f"{all_omegas[j][0]} cross at omega = {all_omegas[i][1]:.12g}")
    expected = n * (n - 1) // 2
    if require_full and len(records) < expected:
        missing = expected - len(records)
        raise SweepWindowError(
            f"sweep window too narrow: {missing} of {expected} crossings "
            f"fall outside [omega(0), omega(1)]")
    records.sort(key=lambda r: r.s_cross)
    return CrossingSet(tuple(records))


def tridiag_char_poly(diag, offdiag, x):
    """Characteristic polynomial of a symmetric tridiagonal matrix at x.

    Three-term recurrence Q_0 = 1, Q_1 = x - a_0,
    Q_n = (x - a_{n-1}) Q_{n-1} - c_{n-2}^2 Q_{n-2}.
    """
    a = np.asarray(diag, dtype=float)
    c = np.asarray(offdiag, dtype=float)
    if a.size == 0:
        raise ValidationError("empty diagonal")
    if c.size != a.size - 1:
        raise ValidationError("off-diagonal must have len(diag) - 1 entries")
    x = np.asarray(x, dtype=float)
    q_prev = np.ones_like(x)
    q = x - a[0]
    for k in range(1, a.size):
        q, q_prev = (x - a[k]) * q - c[k - 1] ** 2 * q_prev, q
    return q if q.ndim else float(q)


def assert_nondegenerate(mat: np.ndarray) -> bool:
    """True iff every off-diagonal entry of the tridiagonal matrix is nonzero.

    Nonzero couplings force N simple eigenvalues (three-term recurrences with
    positive squared couplings generate orthogonal polynomials, whose roots
    are real and distinct).
    """
    n = mat.shape[0]
    off = np.array([mat[k, k + 1] for k in range(n - 1)])
    return bool(np.all(off != 0.0))


def min_eigengap(mat: np.ndarray) -> float:
    """Smallest spacing of the (sorted) spectrum; companion numerical check."""
    w = np.linalg.eigvalsh(mat)
    return float(np.min(np.diff(w))) if w.size > 1 else np.inf


def hamiltonian_batch(system: LadderSystem, control: ControlProfile,
                      s: np.ndarray) -> np.ndarray:
    """H(s) stacked over a grid of slow times, shape (len(s), N, N)."""
    s = np.asarray(s, dtype=float)
    n = system.n_levels
    k = np.arange(n)
    om = np.asarray(control.chirp.omega(s), dtype=float)
    amp = np.asarray(control.amplitude(s), dtype=float)
    h = np.zeros((s.size, n, n))
    h[:, k, k] = k[None, :] * (np.asarray(system.deltas)[None, :] - om[:, None])
    mus = np.asarray(system.mus)
    idx = np.arange(n - 1)
    h[:, idx, idx + 1] = amp[:, None] * mus[None, :]
    h[:, idx + 1, idx] = amp[:, None] * mus[None, :]
    return h


def _lambda_r(system: LadderSystem, omega_values) -> np.ndarray:
    k = np.arange(system.n_levels)
    om = np.atleast_1d(np.asarray(omega_values, dtype=float))
    return k[None, :] * (np.asarray(system.deltas)[None, :] - om[:, None])


def _rank_of_pair(system: LadderSystem, rec: CrossingRecord) -> int:
    """Sorted position occupied by the degenerate pair at its crossing."""
    lam = _lambda_r(system, rec.omega_cross)[0]
    value = lam[rec.m]
    below = sum(1 for j in range(system.n_levels)
                if j not in rec.pair and lam[j] < value)
    return below


@dataclass
class BranchDiagram:
    """Analytic eigenvalue branches of H(s) on a grid.

    ``branches[g, k]`` is branch k's value at ``grid[g]``; branch k is the one
    that starts on level k.  ``swap_events`` records (s_cross, rank) for every
    designed crossing, rank being the lower of the two sorted positions that
    exchange there.  ``lambda_r[g, j]`` are the diagonal levels for reference.
    """

    grid: np.ndarray
    branches: np.ndarray
    lambda_r: np.ndarray
    swap_events: list = field(default_factory=list)
    swap_pairs: list = field(default_factory=list)
    swap_branches: list = field(default_factory=list)
    branch_ranks: np.ndarray | None = None
    final_levels: tuple[int, ...] = ()

    def permutation(self) -> Permutation:
        """Level map induced by the control: branch k ends on level sigma(k)."""
        return Permutation(self.final_levels)

    def csv_rows(self):
        n = self.branches.shape[1]
        header = ["s"] + [f"lambda_{k}" for k in range(n)] \
            + [f"lambda_r_{k}" for k in range(n)]
        yield header
        for g in range(self.grid.size):
            yield ([f"{self.grid[g]:.12g}"]
                   + [f"{v:.12g}" for v in self.branches[g]]
                   + [f"{v:.12g}" for v in self.lambda_r[g]])


def _default_grid(crossings: CrossingSet, n_base: int = 2001) -> np.ndarray:
    pts = [np.linspace(0.0, 1.0, n_base)]
    for t in crossings.times():
        pts.append(np.array([t, max(0.0, t - 1e-4), min(1.0, t + 1e-4)]))
    grid = np.unique(np.concatenate(pts))
    return grid


def track_branches(system: LadderSystem, control: ControlProfile,
                   grid: np.ndarray | None = None,
                   min_gap_check: bool = True,
                   crossings: CrossingSet | None = None) -> BranchDiagram:
    """Follow the N analytic eigenvalue branches through the sweep.

    Between events branch k sits at a fixed sorted rank; at each crossing whose
    time belongs to the amplitude's designed zero set, the two involved ranks
    exchange.  Crossings where the amplitude stays nonzero leave the ranks
    unchanged (avoided crossing).  With ``min_gap_check`` the sorted spectrum
    is required to keep a gap of at least 1e-9 away from the designed
    crossings; tighter approaches mean the amplitude nearly vanishes somewhere
    it must not, and tracking would be ambiguous.
    """
    if crossings is None:
        crossings = crossing_set(system, control.chirp, require_full=False)
    if grid is None:
        grid = _default_grid(crossings)
    else:
        grid = np.unique(np.concatenate(
            [np.asarray(grid, dtype=float), np.asarray(crossings.times())]))
    n = system.n_levels

    zero_interior = control.amplitude.interior_zeros
    designed = []
    for rec in crossings:
        if any(abs(z - rec.s_cross) <= ZERO_MATCH_TOL for z in zero_interior):
            designed.append(rec)

    h = hamiltonian_batch(system, control, grid)
    eigs = np.linalg.eigvalsh(h)

    if min_gap_check:
        gaps = np.diff(eigs, axis=1).min(axis=1)
        shielded = np.zeros(grid.size, dtype=bool)
        for rec in designed:
            shielded |= np.abs(grid - rec.s_cross) <= 1e-7
        bad = (~shielded) & (gaps < GAP_FLOOR)
        if np.any(bad):
            s_bad = grid[np.argmax(bad)]
            raise TrackingAmbiguityError(
                f"eigenvalue gap below {GAP_FLOOR:g} at s = {s_bad:.6g} away "
                f"from every designed crossing; amplitude nearly vanishes "
                f"where it must not")

    # initial ranks: at s = 0 the amplitude vanishes, so branch k starts on the
    # diagonal level k whose rank is its sorted position among lambda^R(omega(0))
    lam0 = _lambda_r(system, float(control.chirp.omega(0.0)))[0]
    rank_of_branch = np.argsort(np.argsort(lam0)).astype(int)

    events = sorted(designed, key=lambda r: r.s_cross)
    swap_events, swap_pairs, swap_branches = [], [], []
    branch_ranks = np.empty((grid.size, n), dtype=int)
    ev_idx = 0
    for g, s in enumerate(grid):
        while ev_idx < len(events) and events[ev_idx].s_cross <= s + 1e-15:
            rec = events[ev_idx]
            r = _rank_of_pair(system, rec)
            swap_events.append((rec.s_cross, r))
            swap_pairs.append(rec.pair)
            lo = int(np.where(rank_of_branch == r)[0][0])
            hi = int(np.where(rank_of_branch == r + 1)[0][0])
            swap_branches.append((lo, hi))
            rank_of_branch[lo], rank_of_branch[hi] = r + 1, r
            ev_idx += 1
        branch_ranks[g] = rank_of_branch
    # apply any events sitting exactly at s = 1 (none in practice: A(1) = 0
    # already removes endpoint crossings from the admissible window)
    branches = np.take_along_axis(eigs, branch_ranks, axis=1)

    lam_end = _lambda_r(system, float(control.chirp.omega(1.0)))[0]
    level_of_rank = np.argsort(lam_end)
    final_levels = tuple(int(level_of_rank[r]) for r in rank_of_branch)

    lam_grid = _lambda_r(system, control.chirp.omega(grid))
    return BranchDiagram(grid=grid, branches=branches, lambda_r=lam_grid,
                         swap_events=swap_events, swap_pairs=swap_pairs,
                         swap_branches=swap_branches,
                         branch_ranks=branch_ranks, final_levels=final_levels)


def branch_slopes_at_crossing(system: LadderSystem, control: ControlProfile,
                              m: int, n: int, s_cross: float) -> tuple[float, float]:
    """The two branch slopes at a designed crossing of levels (m, n).

    They are the eigenvalues of the 2x2 restriction of H'(s_cross) to the
    degenerate subspace: [[-m w', A' mu_mn], [A' mu_mn, -n w']] with mu_mn the
    dipole element between m and n (zero unless adjacent).  Returned ascending.
    """
    wp = float(control.chirp.omega_prime(s_cross))
    ap = float(control.amplitude.derivative(s_cross))
    h1 = build_h1(system)
    mu_mn = float(h1[m, n])
    mat = np.array([[-m * wp, ap * mu_mn], [ap * mu_mn, -n * wp]])
    lo, hi = np.linalg.eigvalsh(mat)
    if abs(hi - lo) < 1e-12:
        raise ValidationError(
            f"branch slopes coincide at s = {s_cross}: crossing of ({m}, {n}) "
            f"needs a strictly sweeping chirp")
    return float(lo), float(hi)
