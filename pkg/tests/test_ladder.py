import numpy as np
import pytest

from ladderctl import (AmplitudeProfile, ChirpProfile, ControlProfile,
                       LadderSystem, ValidationError, build_h, build_h1,
                       build_h_r, is_hermitian)


def test_system_validation():
    with pytest.raises(ValidationError):
        LadderSystem(1, (0.0,), ())
    with pytest.raises(ValidationError):
        LadderSystem(3, (0.0, 0.1), (1.0, 1.0))
    with pytest.raises(ValidationError):
        LadderSystem(3, (0.0, 0.1, 0.2), (1.0,))
    with pytest.raises(ValidationError):
        LadderSystem(3, (0.0, 0.1, 0.2), (1.0, -2.0))
    with pytest.raises(ValidationError):
        LadderSystem(3, (0.0, 0.1, 0.2), (1.0, 2.0), omega0=-1.0)


def test_build_h1_two_level():
    system = LadderSystem(2, (0.0, 0.0), (1.0,))
    assert np.array_equal(build_h1(system), [[0.0, 1.0], [1.0, 0.0]])


def test_build_h1_four_level():
    system = LadderSystem(4, (0.0,) * 4, (1.0, 2.0, 3.0))
    h1 = build_h1(system)
    expected = np.zeros((4, 4))
    for j, mu in enumerate((1.0, 2.0, 3.0)):
        expected[j, j + 1] = expected[j + 1, j] = mu
    assert np.array_equal(h1, expected)


def test_build_h1_zero_diagonal_and_trace():
    rng = np.random.default_rng(7)
    for _ in range(5):
        n = rng.integers(2, 9)
        system = LadderSystem(n, tuple(rng.normal(size=n)),
                              tuple(rng.uniform(0.5, 5.0, size=n - 1)))
        h1 = build_h1(system)
        assert np.all(np.diag(h1) == 0.0)
        assert np.trace(h1) == 0.0
        assert is_hermitian(h1)


def test_build_h_r_first_row_always_zero():
    system = LadderSystem(3, (0.5, -0.3, 0.8), (1.0, 1.0))
    for v in (-2.0, 0.0, 3.7):
        assert build_h_r(system, v)[0, 0] == 0.0


def test_build_h_r_crossing_at_delta1():
    # level 1 meets level 0 when the swept frequency equals its detuning
    system = LadderSystem(4, (0.0, -1.0, 0.3, 0.0), (1.0, 1.0, 1.0))
    hr = build_h_r(system, -1.0)
    assert hr[1, 1] == pytest.approx(0.0, abs=1e-15)
    assert hr[0, 0] == hr[1, 1]


def test_build_h_r_hand_evaluated():
    system = LadderSystem(4, (0.0, -1.0, 0.3, 0.0), (1.0, 1.0, 1.0))
    hr = build_h_r(system, 0.3)
    assert np.allclose(np.diag(hr), [0.0, -1.3, 0.0, -0.9], atol=1e-14)


def test_build_h_amplitude_off_is_diagonal():
    system = LadderSystem(4, (0.0, -1.0, 0.3, 0.0), (2.0, 3.0, 4.0))
    control = ControlProfile(ChirpProfile.linear(4.0),
                             AmplitudeProfile((0.0, 1.0)))
    for s in (0.0, 1.0):
        h = build_h(system, control, s)
        assert np.allclose(h, np.diag(np.diag(h)), atol=1e-15)
        assert np.allclose(h, build_h_r(system, float(4.0 * (s - 0.5))),
                           atol=1e-14)


def test_build_h_sweep_midpoint():
    deltas = (0.1, -0.2, 0.3, 0.05)
    mus = (1.5, 2.5, 3.5)
    system = LadderSystem(4, deltas, mus)
    control = ControlProfile(ChirpProfile.linear(8.0),
                             AmplitudeProfile((0.0, 1.0)))
    h = build_h(system, control, 0.5)  # omega = 0, A = 1/4
    assert np.allclose(np.diag(h), np.arange(4) * np.asarray(deltas), atol=1e-14)
    for j, mu in enumerate(mus):
        assert h[j, j + 1] == pytest.approx(0.25 * mu, abs=1e-15)


def test_build_h_domain_error():
    system = LadderSystem(2, (0.0, 0.0), (1.0,))
    control = ControlProfile(ChirpProfile.linear(4.0),
                             AmplitudeProfile((0.0, 1.0)))
    with pytest.raises(ValidationError):
        build_h(system, control, 1.2)
    with pytest.raises(ValidationError):
        build_h(system, control, -0.1)


def test_build_h_structure_properties():
    # diagonal independent of couplings, off-diagonal independent of detunings
    rng = np.random.default_rng(3)
    deltas = tuple(rng.uniform(-0.5, 0.5, 4))
    control = ControlProfile(ChirpProfile.linear(4.0),
                             AmplitudeProfile((0.0, 0.3, 1.0)))
    sys_a = LadderSystem(4, deltas, (1.0, 1.0, 1.0))
    sys_b = LadderSystem(4, deltas, (2.0, 5.0, 0.5))
    sys_c = LadderSystem(4, (0.4, -0.1, 0.2, 0.0), (1.0, 1.0, 1.0))
    for s in rng.uniform(0, 1, 5):
        ha, hb, hc = (build_h(sy, control, s) for sy in (sys_a, sys_b, sys_c))
        assert np.allclose(np.diag(ha), np.diag(hb))
        assert np.allclose(ha - np.diag(np.diag(ha)),
                           hc - np.diag(np.diag(hc)))
        assert is_hermitian(ha)


def test_build_h_continuity():
    system = LadderSystem(4, (0.0, -1.0, 0.3, 0.0), (2.0, 3.0, 4.0))
    control = ControlProfile(ChirpProfile.linear(4.0),
                             AmplitudeProfile((0.0, 0.25, 1.0)))
    diffs = []
    for step in (1e-3, 1e-5, 1e-7):
        h0 = build_h(system, control, 0.4)
        h1 = build_h(system, control, 0.4 + step)
        diffs.append(np.max(np.abs(h1 - h0)))
    assert diffs[0] > diffs[1] > diffs[2]
    assert diffs[2] < 1e-5
