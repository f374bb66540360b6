import numpy as np
import pytest

from ladderctl import (AmplitudeProfile, ChirpProfile, ControlProfile,
                       EnsembleBounds, LadderSystem)

ANHARMONIC_DELTAS = (0.0, -1.0, 0.3, 0.0)
KNOWN_CROSSINGS = {
    (0, 1): 0.25, (2, 3): 0.35, (0, 3): 0.5,
    (0, 2): 0.575, (1, 3): 0.625, (1, 2): 0.9,
}


@pytest.fixture(scope="session")
def demo_system():
    return LadderSystem(4, ANHARMONIC_DELTAS, (3.0, 3.0, 3.0))


@pytest.fixture(scope="session")
def demo_chirp():
    return ChirpProfile.linear(4.0)


@pytest.fixture(scope="session")
def fixed_delta_bounds():
    return EnsembleBounds(4, 1.0, 5.0, fixed_deltas=ANHARMONIC_DELTAS)


@pytest.fixture(scope="session")
def inversion_bounds():
    return EnsembleBounds(4, 1.0, 5.0, delta_bound=0.4)


@pytest.fixture(scope="session")
def inversion_chirp():
    return ChirpProfile.linear(8.0)


@pytest.fixture(scope="session")
def bare_amplitude():
    return AmplitudeProfile((0.0, 1.0))


@pytest.fixture(scope="session")
def transfer_control(demo_chirp):
    # the literal transfer control: A(s) = s (1 - s) (s - 0.25)
    return ControlProfile(demo_chirp, AmplitudeProfile((0.0, 0.25, 1.0)))


def sample_a1_deltas(n_levels: int, seed: int, omega_window: float = 1.8,
                     min_sep: float = 0.02) -> tuple:
    """Random detunings whose crossings all sit inside the sweep, separated."""
    rng = np.random.default_rng(seed)
    while True:
        deltas = rng.uniform(-0.8, 0.8, size=n_levels)
        omegas = []
        for m in range(n_levels):
            for n in range(m + 1, n_levels):
                omegas.append((n * deltas[n] - m * deltas[m]) / (n - m))
        omegas = sorted(omegas)
        if abs(omegas[0]) > omega_window or abs(omegas[-1]) > omega_window:
            continue
        if any(b - a < min_sep for a, b in zip(omegas, omegas[1:])):
            continue
        return tuple(deltas)
