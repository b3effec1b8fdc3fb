"""Special-relativistic kinematics in natural units (c = 1).

Metric signature is (+, -, -, -). Only pure boosts are provided.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

#: Largest admissible speed. Beyond this gamma loses too many digits.
SPEED_LIMIT = 1.0 - 1e-9


def _vec3(x, name="vector") -> np.ndarray:
    a = np.asarray(getattr(x, "components", x), dtype=float)
    if a.shape != (3,):
        raise DomainError(f"{name} must have exactly 3 components, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} has non-finite components")
    return a


def _velocity(u) -> np.ndarray:
    if np.ndim(u) == 0 and not isinstance(u, ThreeVelocity):
        u = (0.0, 0.0, float(u))  # a bare speed is taken along z
    a = _vec3(u, "velocity")
    if np.linalg.norm(a) >= SPEED_LIMIT:
        raise DomainError(f"superluminal velocity |u| = {np.linalg.norm(a)!r}")
    return a


@dataclass(frozen=True)
class ThreeVelocity:
    """Three-velocity with Euclidean norm below 1."""

    components: tuple

    def __post_init__(self):
        a = _velocity(self.components)
        object.__setattr__(self, "components", tuple(float(c) for c in a))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.components, dtype=dtype)

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.components))


@dataclass(frozen=True)
class FourVector:
    """Minkowski four-vector ``(t, x, y, z)``."""

    t_component: float
    space_components: tuple

    def __post_init__(self):
        object.__setattr__(self, "t_component", float(self.t_component))
        s = _vec3(self.space_components, "space_components")
        object.__setattr__(self, "space_components", tuple(float(c) for c in s))

    @classmethod
    def from_array(cls, a) -> "FourVector":
        a = np.asarray(a, dtype=float)
        return cls(a[0], tuple(a[1:]))

    def to_array(self) -> np.ndarray:
        return np.array((self.t_component,) + self.space_components)

    @property
    def space(self) -> np.ndarray:
        return np.asarray(self.space_components)


@dataclass(frozen=True)
class FourVelocity:
    """Future-pointing unit timelike vector labelling a hyperplane orientation."""

    vector: FourVector

    def __post_init__(self):
        v = self.vector
        if not isinstance(v, FourVector):
            v = FourVector.from_array(v)
            object.__setattr__(self, "vector", v)
        sq = minkowski_dot(v, v)
        if abs(sq - 1.0) > 1e-12 * max(1.0, v.t_component**2):
            raise DomainError(f"four-velocity must have unit Minkowski square, got {sq!r}")
        if v.t_component < 1.0 - 1e-12:
            raise DomainError("four-velocity must be future pointing with t-component >= 1")

    @classmethod
    def from_velocity(cls, u) -> "FourVelocity":
        u = _velocity(u)
        g = gamma(u)
        return cls(FourVector(g, tuple(g * u)))

    @property
    def velocity(self) -> np.ndarray:
        """Three-velocity of the frame, ``eta_vec / eta_0``."""
        return self.vector.space / self.vector.t_component


@dataclass(frozen=True)
class Hyperplane:
    """Space-like hyperplane ``eta . x = tau``."""

    orientation: FourVelocity
    offset: float = 0.0


def _as4(x) -> np.ndarray:
    if isinstance(x, FourVelocity):
        x = x.vector
    if isinstance(x, FourVector):
        return x.to_array()
    a = np.asarray(x, dtype=float)
    if a.shape != (4,):
        raise DomainError("four-vector must have 4 components")
    return a


def minkowski_dot(a, b) -> float:
    """Minkowski product ``a0 b0 - a.b``."""
    a, b = _as4(a), _as4(b)
    return float(a[0] * b[0] - a[1:] @ b[1:])


def gamma(u) -> float:
    """Lorentz factor ``1/sqrt(1 - u^2)``.

    Raises
    ------
    DomainError
        If ``|u| >= 1 - 1e-9``.
    """
    u = _velocity(u)
    return float(1.0 / np.sqrt((1.0 - u @ u)))


def compose_velocities(u, v) -> ThreeVelocity:
    """Velocity of a body moving at ``v`` in a frame that moves at ``u``.

    ``w = [v_perp sqrt(1-u^2) + v_par + u] / (1 + u.v)`` with parallel and
    perpendicular taken relative to ``u``. Not commutative unless the inputs
    are collinear.
    """
    u, v = _velocity(u), _velocity(v)
    uu = u @ u
    if uu == 0.0:
        return ThreeVelocity(tuple(v))
    v_par = (v @ u) / uu * u
    v_perp = v - v_par
    w = (v_perp * np.sqrt(1.0 - uu) + v_par + u) / (1.0 + u @ v)
    # near-luminal inputs can round past the speed limit; the constructor rejects them
    return ThreeVelocity(tuple(w))


def classical_lifetime_velocity(T0: float, v) -> float:
    """Time-dilated lifetime ``T0 * gamma(v)``."""
    if not T0 > 0:
        raise DomainError("rest lifetime T0 must be positive")
    return float(T0) * gamma(v)


def classical_lifetime_momentum(T0: float, m: float, k: float) -> float:
    """Lifetime at momentum ``k`` for a definite mass ``m``: ``T0 sqrt(m^2+k^2)/m``."""
    if not T0 > 0:
        raise DomainError("rest lifetime T0 must be positive")
    if not m > 0:
        raise DomainError("mass must be positive")
    if k < 0:
        raise DomainError("momentum magnitude must be non-negative")
    return float(T0 * np.hypot(m, k) / m)


def momentum_velocity(m: float, k_vec) -> np.ndarray:
    """Velocity ``k/sqrt(m^2 + k^2)`` of a mass-``m`` body at momentum ``k``."""
    k = _vec3(k_vec, "momentum")
    return k / np.sqrt(m * m + k @ k)


def classical_boosted_lifetime(Tk: float, m: float, k_vec, u) -> float:
    """Lifetime at momentum ``k`` after a boost ``u``.

    ``Tk [1 + u.k / sqrt(m^2 + k^2)] / sqrt(1 - u^2)``
    """
    if not Tk > 0:
        raise DomainError("lifetime Tk must be positive")
    if not m > 0:
        raise DomainError("mass must be positive")
    k = _vec3(k_vec, "momentum")
    u = _velocity(u)
    return float(Tk * (1.0 + u @ k / np.sqrt(m * m + k @ k)) * gamma(u))


def boost(u, x) -> FourVector:
    """Apply the pure boost ``B(u)`` to the four-vector ``x``.

    ``B(u)(1, 0) = gamma (1, u)`` and
    ``B(u)(0, k) = (gamma u.k, k_perp + gamma k_par)``.
    """
    u = _velocity(u)
    a = _as4(x)
    t, s = a[0], a[1:]
    uu = u @ u
    if uu == 0.0:
        return FourVector.from_array(a)
    g = 1.0 / np.sqrt(1.0 - uu)
    s_par = (s @ u) / uu
    t_new = g * (t + s @ u)
    s_new = s + ((g - 1.0) * s_par + g * t) * u
    return FourVector(t_new, tuple(s_new))
