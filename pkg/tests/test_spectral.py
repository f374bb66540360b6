import numpy as np
import pytest

from conftest import KNOWN_CROSSINGS, sample_a1_deltas
from ladderctl import (AmplitudeProfile, AssumptionViolationError,
                       ChirpProfile, ControlProfile, LadderSystem,
                       SweepWindowError, TrackingAmbiguityError,
                       ValidationError, assert_nondegenerate,
                       branch_slopes_at_crossing, crossing_set, crossing_time,
                       min_eigengap, track_branches, tridiag_char_poly)


def _cofactor_det(mat):
    """Brute-force determinant by cofactor expansion (independent oracle)."""
    n = mat.shape[0]
    if n == 1:
        return mat[0, 0]
    total = 0.0
    for j in range(n):
        minor = np.delete(np.delete(mat, 0, axis=0), j, axis=1)
        total += (-1) ** j * mat[0, j] * _cofactor_det(minor)
    return total


def test_crossing_time_examples(demo_system, demo_chirp):
    rec = crossing_time(demo_system, demo_chirp, 0, 1)
    assert rec.omega_cross == pytest.approx(-1.0, abs=1e-14)
    assert rec.s_cross == pytest.approx(0.25, abs=1e-12)
    rec = crossing_time(demo_system, demo_chirp, 0, 3)
    assert rec.omega_cross == pytest.approx(0.0, abs=1e-14)
    assert rec.s_cross == pytest.approx(0.5, abs=1e-12)
    rec = crossing_time(demo_system, demo_chirp, 2, 3)
    assert rec.omega_cross == pytest.approx(-0.6, abs=1e-14)
    assert rec.s_cross == pytest.approx(0.35, abs=1e-12)


def test_crossing_time_outside_window():
    system = LadderSystem(2, (0.0, 5.0), (1.0,))
    assert crossing_time(system, ChirpProfile.linear(4.0), 0, 1) is None


def test_crossing_set_known_values(demo_system, demo_chirp):
    cs = crossing_set(demo_system, demo_chirp)
    assert len(cs) == 6
    for rec in cs:
        expected = KNOWN_CROSSINGS[rec.pair]
        assert rec.s_cross == pytest.approx(expected, abs=1e-10)
        # the two levels really are degenerate at the crossing frequency
        m, n = rec.pair
        d = demo_system.deltas
        assert m * (d[m] - rec.omega_cross) == pytest.approx(
            n * (d[n] - rec.omega_cross), abs=1e-12)
    times = cs.times()
    assert times == sorted(times)
    level0 = cs.of_level(0)
    assert sorted(t for t in level0.times()) == pytest.approx(
        [0.25, 0.5, 0.575], abs=1e-10)


def test_crossing_set_two_level():
    system = LadderSystem(2, (0.0, -1.0), (1.0,))
    cs = crossing_set(system, ChirpProfile.linear(4.0))
    assert len(cs) == 1


def test_crossing_set_a1_violation():
    # pairs (0,1) and (0,2) cross at the same frequency when d1 == d2
    system = LadderSystem(3, (0.0, 0.4, 0.4), (1.0, 1.0))
    with pytest.raises(AssumptionViolationError):
        crossing_set(system, ChirpProfile.linear(4.0))


def test_crossing_set_window_too_narrow(demo_system):
    narrow = ChirpProfile.linear(1.0)  # sweep [-0.5, 0.5] misses crossings
    with pytest.raises(SweepWindowError):
        crossing_set(demo_system, narrow)
    partial = crossing_set(demo_system, narrow, require_full=False)
    assert 0 < len(partial) < 6


def test_crossing_set_cardinality_random_systems():
    chirp = ChirpProfile.linear(8.0)
    for n in range(2, 7):
        for trial in range(3):
            deltas = sample_a1_deltas(n, seed=100 * n + trial,
                                      omega_window=3.5, min_sep=0.03)
            system = LadderSystem(n, deltas, (1.0,) * (n - 1))
            assert len(crossing_set(system, chirp)) == n * (n - 1) // 2


def test_tridiag_char_poly_small_cases():
    assert tridiag_char_poly([2.0], [], 5.0) == pytest.approx(3.0)
    assert tridiag_char_poly([0.0, 0.0], [1.0], 0.0) == pytest.approx(-1.0)


def test_tridiag_char_poly_matches_cofactor_determinant():
    rng = np.random.default_rng(11)
    for _ in range(10):
        n = int(rng.integers(2, 6))
        a = rng.normal(size=n)
        c = rng.normal(size=n - 1)
        x = float(rng.normal())
        mat = np.diag(a) + np.diag(c, 1) + np.diag(c, -1)
        oracle = _cofactor_det(x * np.eye(n) - mat)
        value = tridiag_char_poly(a, c, x)
        assert value == pytest.approx(oracle, rel=1e-10, abs=1e-12)


def test_char_poly_vanishes_on_spectrum():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(2, 9))
        a = rng.normal(size=n)
        c = rng.uniform(0.2, 2.0, size=n - 1)
        mat = np.diag(a) + np.diag(c, 1) + np.diag(c, -1)
        scale = np.prod(np.maximum(np.abs(np.linalg.eigvalsh(mat)), 1.0))
        for lam in np.linalg.eigvalsh(mat):
            assert abs(tridiag_char_poly(a, c, lam)) <= 1e-8 * max(scale, 1.0)


def test_assert_nondegenerate():
    good = np.diag([0.0, 1.0, 4.0]) + np.diag([0.5, 0.5], 1) + np.diag([0.5, 0.5], -1)
    assert assert_nondegenerate(good)
    assert min_eigengap(good) > 0
    # zero coupling decouples a block and allows a repeated eigenvalue
    bad = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    assert not assert_nondegenerate(bad)
    assert min_eigengap(bad) == pytest.approx(0.0, abs=1e-12)


def test_h_of_s_nondegenerate_whenever_amplitude_on(demo_system, transfer_control):
    from ladderctl import build_h
    for s in np.linspace(0.01, 0.99, 23):
        if abs(transfer_control.amplitude(s)) > 1e-6:
            h = build_h(demo_system, transfer_control, s)
            assert assert_nondegenerate(h)
            assert min_eigengap(h) > 0


# ---------------------------------------------------------------------------
# branch tracking
# ---------------------------------------------------------------------------

def test_track_branches_gap_case_no_swaps(demo_system, demo_chirp):
    control = ControlProfile(demo_chirp, AmplitudeProfile((0.0, 1.0)))
    diagram = track_branches(demo_system, control)
    assert diagram.swap_events == []
    # each branch ends on the mirror level
    assert diagram.final_levels == (3, 2, 1, 0)


def test_track_branches_single_designed_crossing(demo_system, transfer_control):
    diagram = track_branches(demo_system, transfer_control)
    assert len(diagram.swap_events) == 1
    s, rank = diagram.swap_events[0]
    assert s == pytest.approx(0.25, abs=1e-10)
    assert rank == 0
    assert diagram.final_levels[0] == 2  # the transfer target


def test_track_branches_three_designed_swaps(demo_system, demo_chirp):
    zeros = (0.0, 0.5, 0.575, 0.625, 1.0)
    control = ControlProfile(demo_chirp, AmplitudeProfile(zeros))
    diagram = track_branches(demo_system, control)
    assert len(diagram.swap_events) == 3
    assert diagram.final_levels == (2, 0, 3, 1)


def test_track_branches_multiset_invariant(demo_system, transfer_control):
    from ladderctl import build_h
    diagram = track_branches(demo_system, transfer_control)
    idx = np.linspace(0, diagram.grid.size - 1, 41).astype(int)
    for g in idx:
        s = diagram.grid[g]
        eigs = np.linalg.eigvalsh(build_h(demo_system, transfer_control, s))
        assert np.allclose(np.sort(diagram.branches[g]), eigs, atol=1e-9)


def test_track_branches_swap_count_matches_zero_set(demo_system, demo_chirp):
    from ladderctl import crossing_set as _cs
    cs = _cs(demo_system, demo_chirp)
    rng = np.random.default_rng(17)
    times = cs.times()
    for _ in range(5):
        chosen = [t for t in times if rng.random() < 0.5]
        control = ControlProfile(
            demo_chirp, AmplitudeProfile(sorted({0.0, 1.0} | set(chosen))))
        diagram = track_branches(demo_system, control)
        assert len(diagram.swap_events) == len(chosen)


def test_track_branches_ambiguity_guard(demo_system, demo_chirp):
    # roots squeezed around the (0,3) crossing make the amplitude nearly
    # vanish at a crossing that is not designed: the gap collapses
    control = ControlProfile(
        demo_chirp, AmplitudeProfile((0.0, 0.4995, 0.5005, 1.0)))
    with pytest.raises(TrackingAmbiguityError):
        track_branches(demo_system, control)


def test_branch_slopes_nonadjacent_pair(demo_system, transfer_control):
    lo, hi = branch_slopes_at_crossing(demo_system, transfer_control, 0, 3, 0.5)
    assert (lo, hi) == (pytest.approx(-12.0), pytest.approx(0.0))


def test_branch_slopes_adjacent_closed_form(demo_system, demo_chirp):
    control = ControlProfile(demo_chirp, AmplitudeProfile((0.0, 0.25, 1.0)))
    a_prime = control.amplitude.derivative(0.25)
    mu = demo_system.mus[0]
    lo, hi = branch_slopes_at_crossing(demo_system, control, 0, 1, 0.25)
    root = np.sqrt(4.0 + (a_prime * mu) ** 2)
    assert lo == pytest.approx(-2.0 - root, rel=1e-12)
    assert hi == pytest.approx(-2.0 + root, rel=1e-12)


def test_branch_slopes_match_tracked_branches(demo_system, transfer_control):
    # finite differences of the tracked branches across the designed crossing
    s_cross = 0.25
    delta = 1e-4
    grid = np.array([s_cross - delta, s_cross, s_cross + delta])
    diagram = track_branches(demo_system, transfer_control, grid=grid)
    i0 = int(np.argmin(np.abs(diagram.grid - (s_cross - delta))))
    i1 = int(np.argmin(np.abs(diagram.grid - (s_cross + delta))))
    fd = (diagram.branches[i1] - diagram.branches[i0]) / (
        diagram.grid[i1] - diagram.grid[i0])
    lo, hi = branch_slopes_at_crossing(demo_system, transfer_control, 0, 1, s_cross)
    fd_pair = sorted([fd[0], fd[1]])
    assert fd_pair[0] == pytest.approx(lo, rel=1e-4)
    assert fd_pair[1] == pytest.approx(hi, rel=1e-4)


def test_branch_slopes_distinct_for_swept_chirp(demo_system, demo_chirp):
    # slopes never coincide while the chirp keeps sweeping
    control = ControlProfile(demo_chirp, AmplitudeProfile((0.0, 0.25, 1.0)))
    for (m, n), s in KNOWN_CROSSINGS.items():
        lo, hi = branch_slopes_at_crossing(demo_system, control, m, n, s)
        assert hi - lo > 1e-6


def test_branch_slopes_coincide_error(demo_system):
    class _Frozen:
        def omega_prime(self, s):
            return 0.0

    class _Flat:
        def derivative(self, s):
            return 0.0

    from ladderctl.controls import ControlProfile as CP
    control = CP.__new__(CP)
    object.__setattr__(control, "chirp", _Frozen())
    object.__setattr__(control, "amplitude", _Flat())
    with pytest.raises(ValidationError):
        branch_slopes_at_crossing(demo_system, control, 0, 3, 0.5)
