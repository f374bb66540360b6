"""Control profiles: monotone chirps, shaped amplitudes, and permutations.

A control is a pair ``(omega(s), A(s))`` on slow time ``s in [0, 1]``.  The
chirp is strictly increasing (or strictly decreasing for inverted sweeps); the
amplitude is a polynomial with a prescribed zero set times Gaussian-bump
factors that lift it near the points where it must stay away from zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ValidationError

__all__ = ["ChirpProfile", "AmplitudeProfile", "ControlProfile", "Permutation"]

_BISECT_TOL = 1e-13


class ChirpProfile:
    """Monotone instantaneous-frequency profile ``omega(s)``.

    Two kinds: ``linear`` (``omega = alpha * (s - 1/2)``) and ``tabulated``
    (monotone cubic through given nodes).  ``gamma`` is a positive lower bound
    on ``d omega / ds``; it exists for any strictly monotone profile here.
    """

    def __init__(self, kind: str, *, alpha: float | None = None,
                 s_nodes=None, omega_nodes=None):
        self.kind = kind
        if kind == "linear":
            if alpha is None:
                raise ValidationError("linear chirp needs alpha")
            # alpha = 0 is constructible (it can never validate, but the
            # endpoint check must be able to say so rather than crash)
            self.alpha = float(alpha)
            self._interp = None
            self._deriv = None
            self.gamma = abs(self.alpha)
        elif kind == "tabulated":
            s_nodes = np.asarray(s_nodes, dtype=float)
            omega_nodes = np.asarray(omega_nodes, dtype=float)
            if s_nodes.ndim != 1 or s_nodes.shape != omega_nodes.shape:
                raise ValidationError("tabulated chirp needs matching 1-d node arrays")
            if s_nodes[0] != 0.0 or s_nodes[-1] != 1.0:
                raise ValidationError("tabulated chirp nodes must span [0, 1]")
            diffs = np.diff(omega_nodes)
            if not (np.all(diffs > 0) or np.all(diffs < 0)):
                raise ValidationError("tabulated chirp must be strictly monotone")
            self.alpha = None
            self.s_nodes = s_nodes
            self.omega_nodes = omega_nodes
            self._interp = PchipInterpolator(s_nodes, omega_nodes)
            self._deriv = self._interp.derivative()
            grid = np.linspace(0.0, 1.0, 4001)
            self.gamma = float(np.min(np.abs(self._deriv(grid))))
            if self.gamma <= 0:
                raise ValidationError("tabulated chirp has vanishing slope")
        else:
            raise ValidationError(f"unknown chirp kind {kind!r}")

    @classmethod
    def linear(cls, alpha: float) -> "ChirpProfile":
        return cls("linear", alpha=alpha)

    @classmethod
    def tabulated(cls, s_nodes, omega_nodes) -> "ChirpProfile":
        return cls("tabulated", s_nodes=s_nodes, omega_nodes=omega_nodes)

    def omega(self, s):
        if self.kind == "linear":
            return self.alpha * (np.asarray(s, dtype=float) - 0.5)
        return self._interp(np.asarray(s, dtype=float))

    def omega_prime(self, s):
        if self.kind == "linear":
            return np.broadcast_to(self.alpha, np.shape(np.asarray(s))).astype(float) \
                if np.ndim(s) else self.alpha
        return self._deriv(np.asarray(s, dtype=float))

    def theta(self, s):
        """Accumulated phase ``integral_0^s omega``."""
        if self.kind == "linear":
            s = np.asarray(s, dtype=float)
            return self.alpha * (0.5 * s * s - 0.5 * s)
        return self._interp.antiderivative()(np.asarray(s, dtype=float)) \
            - self._interp.antiderivative()(0.0)

    @property
    def increasing(self) -> bool:
        return float(self.omega(1.0)) > float(self.omega(0.0))

    def invert(self, omega_value: float) -> float | None:
        """Return s with omega(s) == omega_value, by bisection, or None.

        The profile is monotone, so bisection converges unconditionally; the
        interval is narrowed below 1e-13 which is the documented resolution of
        every crossing time in the package.
        """
        lo, hi = 0.0, 1.0
        w0, w1 = float(self.omega(0.0)), float(self.omega(1.0))
        sign = 1.0 if w1 > w0 else -1.0
        if not min(w0, w1) <= omega_value <= max(w0, w1):
            return None
        while hi - lo > _BISECT_TOL:
            mid = 0.5 * (lo + hi)
            if sign * (float(self.omega(mid)) - omega_value) < 0.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    def to_dict(self) -> dict:
        if self.kind == "linear":
            return {"kind": "linear", "alpha": self.alpha}
        return {"kind": "tabulated",
                "s_nodes": self.s_nodes.tolist(),
                "omega_nodes": self.omega_nodes.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "ChirpProfile":
        if d["kind"] == "linear":
            return cls.linear(d["alpha"])
        return cls.tabulated(d["s_nodes"], d["omega_nodes"])


class AmplitudeProfile:
    """Pulse envelope ``A(s)`` with an exact zero set and bump-lifted plateaus.

    ``A(s) = s (1 - s) * prod_z (s - z) * prod_a (1 + h_a exp(-(s-a)^2 / 2 w_a^2))``

    where ``z`` runs over the interior zeros and ``a`` over the anti-crossing
    points.  Bump heights/widths may be a single shared value or one per point.
    The polynomial roots are exactly ``zero_set``; bump factors are >= 1, so A
    vanishes on the zero set and nowhere else.
    """

    def __init__(self, zero_set, antizero_set=(), bump_width=0.05, bump_height=3.0):
        zs = sorted(float(z) for z in zero_set)
        if not zs or zs[0] != 0.0 or zs[-1] != 1.0:
            zs = sorted(set(zs) | {0.0, 1.0})
        if any(not 0.0 <= z <= 1.0 for z in zs):
            raise ValidationError(f"zero set must lie in [0, 1]: {zs}")
        if len(set(zs)) != len(zs):
            raise ValidationError(f"duplicate zero-set entries: {zs}")
        self.zero_set = tuple(zs)
        self.antizero_set = tuple(sorted(float(a) for a in antizero_set))
        for a in self.antizero_set:
            gap = min(abs(a - z) for z in self.zero_set)
            if gap < 1e-6:
                raise ValidationError(
                    f"anti-crossing point {a} lies within 1e-6 of a zero")
        k = len(self.antizero_set)
        self.bump_width = self._per_point(bump_width, k, "bump_width")
        self.bump_height = self._per_point(bump_height, k, "bump_height")
        if any(w <= 0 for w in self.bump_width):
            raise ValidationError("bump widths must be positive")
        if any(h < 0 for h in self.bump_height):
            raise ValidationError("bump heights must be >= 0")
        # s(1-s) * prod(s - z) == -(s - 0)(s - 1) prod(s - z)
        self._poly = -np.poly(self.zero_set)
        self._dpoly = np.polyder(self._poly)

    @staticmethod
    def _per_point(value, k: int, name: str) -> tuple[float, ...]:
        if np.ndim(value) == 0:
            return (float(value),) * k
        vals = tuple(float(v) for v in value)
        if len(vals) != k:
            raise ValidationError(
                f"{name} needs one value per anti-crossing point "
                f"({k}), got {len(vals)}")
        return vals

    @property
    def interior_zeros(self) -> tuple[float, ...]:
        return tuple(z for z in self.zero_set if 0.0 < z < 1.0)

    def _bump_factors(self, s):
        s = np.asarray(s, dtype=float)
        fac = np.ones_like(s)
        for a, h, w in zip(self.antizero_set, self.bump_height, self.bump_width):
            fac = fac * (1.0 + h * np.exp(-((s - a) ** 2) / (2.0 * w * w)))
        return fac

    def __call__(self, s):
        s_arr = np.asarray(s, dtype=float)
        out = np.polyval(self._poly, s_arr) * self._bump_factors(s_arr)
        return out if np.ndim(s) else float(out)

    def derivative(self, s):
        """Exact dA/ds (product rule over polynomial and bump factors)."""
        s_arr = np.asarray(s, dtype=float)
        p = np.polyval(self._poly, s_arr)
        dp = np.polyval(self._dpoly, s_arr)
        fac = self._bump_factors(s_arr)
        out = dp * fac
        for i, (a, h, w) in enumerate(zip(self.antizero_set, self.bump_height,
                                          self.bump_width)):
            g = h * np.exp(-((s_arr - a) ** 2) / (2.0 * w * w))
            dg = g * (-(s_arr - a) / (w * w))
            this = 1.0 + g
            out = out + p * fac / this * dg
        return out if np.ndim(s) else float(out)

    def to_dict(self) -> dict:
        def scalar_or_list(vals):
            return vals[0] if len(set(vals)) <= 1 and vals else list(vals)
        return {
            "zero_set": list(self.zero_set),
            "antizero_set": list(self.antizero_set),
            "bump_width": scalar_or_list(self.bump_width) if self.antizero_set else 0.05,
            "bump_height": scalar_or_list(self.bump_height) if self.antizero_set else 3.0,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AmplitudeProfile":
        return cls(d["zero_set"], d.get("antizero_set", ()),
                   d.get("bump_width", 0.05), d.get("bump_height", 3.0))


@dataclass(frozen=True)
class ControlProfile:
    """A chirp/amplitude pair; the complete single-pulse control."""

    chirp: ChirpProfile
    amplitude: AmplitudeProfile

    def to_dict(self) -> dict:
        return {"chirp": self.chirp.to_dict(), "amplitude": self.amplitude.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "ControlProfile":
        return cls(ChirpProfile.from_dict(d["chirp"]),
                   AmplitudeProfile.from_dict(d["amplitude"]))


class Permutation:
    """A bijection on level indices 0..N-1, stored as its image tuple."""

    def __init__(self, images):
        imgs = tuple(int(i) for i in images)
        if sorted(imgs) != list(range(len(imgs))):
            raise ValidationError(f"not a permutation of 0..{len(imgs) - 1}: {imgs}")
        self.images = imgs

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(n))

    @classmethod
    def reversal(cls, n: int) -> "Permutation":
        return cls(range(n - 1, -1, -1))

    def __call__(self, k: int) -> int:
        return self.images[k]

    def __len__(self) -> int:
        return len(self.images)

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self.images == other.images

    def __hash__(self) -> int:
        return hash(self.images)

    def __repr__(self) -> str:
        return f"Permutation{self.images}"

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.images)
        for k, v in enumerate(self.images):
            inv[v] = k
        return Permutation(inv)

    def matrix(self) -> np.ndarray:
        n = len(self.images)
        m = np.zeros((n, n))
        for k, v in enumerate(self.images):
            m[v, k] = 1.0
        return m
