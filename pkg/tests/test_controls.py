import numpy as np
import pytest

from ladderctl import (AmplitudeProfile, ChirpProfile, ControlProfile,
                       Permutation, ValidationError)


def test_linear_chirp_values():
    chirp = ChirpProfile.linear(8.0)
    assert chirp.omega(0.0) == pytest.approx(-4.0)
    assert chirp.omega(1.0) == pytest.approx(4.0)
    assert chirp.omega_prime(0.37) == pytest.approx(8.0)
    assert chirp.gamma == 8.0
    assert chirp.increasing


def test_linear_chirp_theta_is_integral():
    chirp = ChirpProfile.linear(4.0)
    s = np.linspace(0, 1, 11)
    # integral of alpha (s - 1/2) from 0 to s
    expected = 4.0 * (s ** 2 / 2 - s / 2)
    assert np.allclose(chirp.theta(s), expected, atol=1e-14)


def test_linear_chirp_invert():
    chirp = ChirpProfile.linear(4.0)
    for value, s_true in [(-1.0, 0.25), (0.0, 0.5), (1.6, 0.9)]:
        assert chirp.invert(value) == pytest.approx(s_true, abs=1e-12)
    assert chirp.invert(5.0) is None
    assert chirp.invert(-2.1) is None


def test_decreasing_chirp_invert():
    chirp = ChirpProfile.linear(-4.0)
    assert not chirp.increasing
    assert chirp.invert(1.0) == pytest.approx(0.25, abs=1e-12)


def test_tabulated_chirp():
    chirp = ChirpProfile.tabulated([0.0, 0.3, 1.0], [-2.0, -0.5, 2.0])
    assert chirp.gamma > 0
    s = np.linspace(0, 1, 101)
    w = chirp.omega(s)
    assert np.all(np.diff(w) > 0)
    assert chirp.invert(-0.5) == pytest.approx(0.3, abs=1e-10)
    # theta(1) equals the trapezoid integral of omega to quadrature accuracy
    fine = np.linspace(0, 1, 20001)
    assert chirp.theta(1.0) == pytest.approx(
        np.trapezoid(chirp.omega(fine), fine), abs=1e-8)


def test_tabulated_chirp_rejects_nonmonotone():
    with pytest.raises(ValidationError):
        ChirpProfile.tabulated([0.0, 0.5, 1.0], [-1.0, 1.0, 0.5])


def test_chirp_serialization_roundtrip():
    for chirp in (ChirpProfile.linear(4.0),
                  ChirpProfile.tabulated([0.0, 0.4, 1.0], [-2.0, 0.1, 2.0])):
        clone = ChirpProfile.from_dict(chirp.to_dict())
        s = np.linspace(0, 1, 57)
        assert np.allclose(clone.omega(s), chirp.omega(s), atol=1e-14)


def test_amplitude_zero_set_exact():
    amp = AmplitudeProfile((0.0, 0.25, 1.0))
    assert amp(0.0) == 0.0
    assert amp(1.0) == pytest.approx(0.0, abs=1e-15)
    assert amp(0.25) == pytest.approx(0.0, abs=1e-15)
    assert amp.interior_zeros == (0.25,)


def test_amplitude_matches_polynomial_products():
    s = np.linspace(0, 1, 301)
    amp0 = AmplitudeProfile((0.0, 1.0))
    assert np.allclose(amp0(s), s * (1 - s), atol=1e-13)
    amp1 = AmplitudeProfile((0.0, 0.25, 1.0))
    assert np.allclose(amp1(s), s * (1 - s) * (s - 0.25), atol=1e-13)
    zeros = (0.0, 0.5, 0.575, 0.625, 1.0)
    amp2 = AmplitudeProfile(zeros)
    expected = s * (1 - s) * (s - 0.5) * (s - 0.625) * (s - 0.575)
    assert np.allclose(amp2(s), expected, atol=1e-13)


def test_amplitude_vanishes_only_on_zero_set():
    amp = AmplitudeProfile((0.0, 0.3, 0.7, 1.0), (0.5,), 0.04, 10.0)
    s = np.linspace(1e-4, 1 - 1e-4, 5001)
    mask = np.ones_like(s, dtype=bool)
    for z in amp.zero_set:
        mask &= np.abs(s - z) > 1e-3
    assert np.all(np.abs(amp(s)[mask]) > 0)
    # counting sign changes isolates exactly the interior roots
    signs = np.sign(amp(s))
    flips = np.sum(signs[:-1] * signs[1:] < 0)
    assert flips == 2


def test_amplitude_bumps_lift_antizero_points():
    base = AmplitudeProfile((0.0, 0.25, 1.0))
    bumped = AmplitudeProfile((0.0, 0.25, 1.0), (0.5,), 0.05, 3.0)
    assert abs(bumped(0.5)) == pytest.approx(4.0 * abs(base(0.5)), rel=1e-12)
    assert bumped(0.25) == pytest.approx(0.0, abs=1e-14)


def test_amplitude_per_point_bumps():
    amp = AmplitudeProfile((0.0, 1.0), (0.3, 0.7), (0.02, 0.05), (10.0, 2.0))
    d = amp.to_dict()
    clone = AmplitudeProfile.from_dict(d)
    s = np.linspace(0, 1, 211)
    assert np.allclose(clone(s), amp(s), atol=1e-14)


def test_amplitude_derivative_matches_finite_difference():
    amp = AmplitudeProfile((0.0, 0.25, 1.0), (0.5, 0.9), 0.04, 5.0)
    h = 1e-6
    for s in (0.1, 0.25, 0.45, 0.52, 0.9):
        fd = (amp(s + h) - amp(s - h)) / (2 * h)
        assert amp.derivative(s) == pytest.approx(fd, rel=1e-6, abs=1e-9)


def test_amplitude_rejects_antizero_near_zero():
    with pytest.raises(ValidationError):
        AmplitudeProfile((0.0, 0.5, 1.0), (0.5 + 1e-7,))


def test_control_serialization_roundtrip():
    control = ControlProfile(ChirpProfile.linear(4.0),
                             AmplitudeProfile((0.0, 0.25, 1.0), (0.5,), 0.05, 3.0))
    clone = ControlProfile.from_dict(control.to_dict())
    s = np.linspace(0, 1, 100)
    assert np.allclose(clone.amplitude(s), control.amplitude(s), atol=1e-14)
    assert np.allclose(clone.chirp.omega(s), control.chirp.omega(s), atol=1e-14)


def test_permutation_validation_and_helpers():
    with pytest.raises(ValidationError):
        Permutation((0, 0, 1))
    with pytest.raises(ValidationError):
        Permutation((1, 2, 3))
    sigma = Permutation((2, 0, 3, 1))
    assert sigma(0) == 2
    assert sigma.inverse()(2) == 0
    assert Permutation.identity(3).images == (0, 1, 2)
    assert Permutation.reversal(4).images == (3, 2, 1, 0)
    m = sigma.matrix()
    assert m[2, 0] == 1.0 and m.sum() == 4.0
