"""N-level ladder systems and their Hamiltonian matrices.

The rotating/chirped-frame dynamics of a driven anharmonic ladder is governed
by ``H(s) = H_R(omega(s)) + A(s) H_1`` on slow time ``s in [0, 1]``, where
``H_R(v)`` is diagonal with entries ``k * (delta_k - v)`` and ``H_1`` is the
tridiagonal dipole-coupling matrix.  Everything here is a pure function of
immutable inputs; matrices are small dense float arrays.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

__all__ = [
    "LadderSystem",
    "EnsembleBounds",
    "build_h1",
    "build_h_r",
    "build_h",
    "is_hermitian",
]


@dataclass(frozen=True)
class LadderSystem:
    """An N-level ladder: anharmonicities ``deltas`` and couplings ``mus``.

    ``deltas[k]`` enters the diagonal as ``k * (deltas[k] - v)``; note that
    ``deltas[0]`` is stored for completeness but multiplied by ``k = 0`` it
    never affects the dynamics.  ``omega0`` is the carrier frequency, used only
    by the lab-frame validation.
    """

    n_levels: int
    deltas: tuple[float, ...]
    mus: tuple[float, ...]
    omega0: float = 200.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "deltas", tuple(float(d) for d in self.deltas))
        object.__setattr__(self, "mus", tuple(float(m) for m in self.mus))
        if self.n_levels < 2:
            raise ValidationError(f"n_levels must be >= 2, got {self.n_levels}")
        if len(self.deltas) != self.n_levels:
            raise ValidationError(
                f"expected {self.n_levels} deltas, got {len(self.deltas)}")
        if len(self.mus) != self.n_levels - 1:
            raise ValidationError(
                f"expected {self.n_levels - 1} couplings, got {len(self.mus)}")
        if any(m <= 0 for m in self.mus):
            raise ValidationError(f"couplings must be strictly positive: {self.mus}")
        if self.omega0 <= 0:
            raise ValidationError(f"omega0 must be positive, got {self.omega0}")

    def as_dict(self) -> dict:
        return {
            "n_levels": self.n_levels,
            "deltas": list(self.deltas),
            "mus": list(self.mus),
            "omega0": self.omega0,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LadderSystem":
        return cls(
            n_levels=int(d["n_levels"]),
            deltas=tuple(d["deltas"]),
            mus=tuple(d["mus"]),
            omega0=float(d.get("omega0", 200.0)),
        )


@dataclass(frozen=True)
class EnsembleBounds:
    """Parameter intervals defining an ensemble of ladder systems.

    Couplings are always drawn from ``[mu_min, mu_max]``.  Detunings are either
    drawn from ``[-delta_bound, delta_bound]`` (full-inversion ensembles) or
    held at ``fixed_deltas`` (transfer/permutation ensembles, where crossing
    times must be common to every member).  Exactly one of the two must be set.
    """

    n_levels: int
    mu_min: float
    mu_max: float
    delta_bound: float | None = None
    fixed_deltas: tuple[float, ...] | None = None
    omega0: float = 200.0

    def __post_init__(self) -> None:
        if self.mu_min <= 0:
            raise ValidationError(f"mu_min must be positive, got {self.mu_min}")
        if self.mu_max <= self.mu_min:
            raise ValidationError(
                f"need mu_min < mu_max, got [{self.mu_min}, {self.mu_max}]")
        if (self.delta_bound is None) == (self.fixed_deltas is None):
            raise ValidationError(
                "exactly one of delta_bound / fixed_deltas must be given")
        if self.delta_bound is not None and self.delta_bound < 0:
            raise ValidationError(f"delta_bound must be >= 0, got {self.delta_bound}")
        if self.fixed_deltas is not None:
            object.__setattr__(self, "fixed_deltas",
                               tuple(float(d) for d in self.fixed_deltas))
            if len(self.fixed_deltas) != self.n_levels:
                raise ValidationError(
                    f"expected {self.n_levels} fixed deltas, "
                    f"got {len(self.fixed_deltas)}")

    @property
    def varies_deltas(self) -> bool:
        return self.delta_bound is not None

    def nominal_system(self) -> LadderSystem:
        """Reference member: midpoint couplings, fixed (or zero) detunings."""
        mu_mid = 0.5 * (self.mu_min + self.mu_max)
        deltas = self.fixed_deltas if self.fixed_deltas is not None \
            else (0.0,) * self.n_levels
        return LadderSystem(self.n_levels, deltas,
                            (mu_mid,) * (self.n_levels - 1), self.omega0)


def build_h1(system: LadderSystem) -> np.ndarray:
    """Dipole coupling matrix: zero diagonal, ``mus[k]`` on the (k, k+1) rungs."""
    n = system.n_levels
    h1 = np.zeros((n, n))
    idx = np.arange(n - 1)
    h1[idx, idx + 1] = system.mus
    h1[idx + 1, idx] = system.mus
    return h1


def build_h_r(system: LadderSystem, v: float) -> np.ndarray:
    """Chirped-frame free Hamiltonian: diag(k * (deltas[k] - v))."""
    k = np.arange(system.n_levels)
    return np.diag(k * (np.asarray(system.deltas) - v))


def build_h(system: LadderSystem, control, s: float) -> np.ndarray:
    """Full slow-time Hamiltonian ``H_R(omega(s)) + A(s) H_1`` at one instant."""
    if not 0.0 <= s <= 1.0:
        raise ValidationError(f"s must lie in [0, 1], got {s}")
    return build_h_r(system, float(control.chirp.omega(s))) \
        + float(control.amplitude(s)) * build_h1(system)


def is_hermitian(mat: np.ndarray, tol: float = 1e-14) -> bool:
    return bool(np.max(np.abs(mat - mat.conj().T)) <= tol)
