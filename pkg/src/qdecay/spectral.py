"""Rest-mass spectral functions sigma(mu).

Two shapes are supported:

``truncated-breit-wigner``
    ``N (mu - mu_min)^alpha / [(mu - mu_min)^alpha + Gamma^alpha]`` times a
    unit Lorentzian of width ``Gamma`` at ``M``, supported on
    ``[mu_min, mu_max]``. The threshold factor behaves as
    ``(mu - mu_min)^alpha`` near threshold and tends to 1 above ``mu_min +
    Gamma``.
``analytic-breit-wigner``
    The plain Lorentzian on the whole real line. It has no threshold and is
    non-physical; it exists to validate the numerics against exactly
    exponential decay.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, NumericalError
from .quadrature import DEFAULT_QUAD_TOL, QuadResult, adaptive_integrate, integrate_pieces

TRUNCATED = "truncated-breit-wigner"
ANALYTIC = "analytic-breit-wigner"


def lorentzian(mu, M, Gamma):
    """Unit-normalised Lorentzian ``(Gamma/2pi) / ((mu-M)^2 + Gamma^2/4)``."""
    mu = np.asarray(mu, dtype=float)
    return (Gamma / (2 * np.pi)) / ((mu - M) ** 2 + 0.25 * Gamma * Gamma)


@dataclass(frozen=True)
class SpectralFunction:
    """Immutable rest-mass density.

    Attributes
    ----------
    shape : str
        ``"truncated-breit-wigner"`` or ``"analytic-breit-wigner"``.
    M, Gamma : float
        Peak mass and width.
    alpha : float
        Threshold exponent (``nan`` for the analytic shape).
    mu_min, mu_max : float
        Support; infinite for the analytic shape.
    norm_constant : float
        ``N`` with ``int sigma = 1`` over the support.
    """

    shape: str
    M: float
    Gamma: float
    alpha: float
    mu_min: float
    mu_max: float
    norm_constant: float = 1.0
    tail_mass_tol: float = 0.0

    @property
    def is_physical(self) -> bool:
        """False for the full-line Lorentzian."""
        return self.shape == TRUNCATED

    @property
    def label(self) -> str:
        if self.shape == ANALYTIC:
            return f"analytic-BW(M={self.M:g},Gamma={self.Gamma:g})"
        return (f"truncated-BW(M={self.M:g},Gamma={self.Gamma:g},"
                f"mu_min={self.mu_min:g},alpha={self.alpha:g})")

    def _shape(self, mu):
        mu = np.asarray(mu, dtype=float)
        if self.shape == ANALYTIC:
            return lorentzian(mu, self.M, self.Gamma)
        x = mu - self.mu_min
        inside = (x >= 0) & (mu <= self.mu_max)
        xs = np.where(inside, x, 1.0)
        if self.alpha == 0:
            thr = np.full_like(xs, 0.5)
        else:
            with np.errstate(divide="ignore", over="ignore"):
                thr = 1.0 / (1.0 + (self.Gamma / xs) ** self.alpha)
        return np.where(inside, thr * lorentzian(mu, self.M, self.Gamma), 0.0)

    def __call__(self, mu):
        out = self.norm_constant * self._shape(mu)
        return out if np.ndim(out) else float(out)

    def breakpoints(self) -> np.ndarray:
        """Graded breakpoints covering the support (finite part for the analytic shape).

        Pieces resolve the threshold crossover, the resonance and a
        geometric ladder of the Lorentzian tail.
        """
        M, G = self.M, self.Gamma
        if self.shape == ANALYTIC:
            ladder = G * 4.0 ** np.arange(0, 30)
            ladder = ladder[ladder < 1e9 * max(G, abs(M))]
            return np.unique(np.concatenate([M - ladder[::-1], [M], M + ladder]))
        lo, hi = self.mu_min, self.mu_max
        pts = [lo, lo + 1e-3 * G, lo + G, M - 10 * G, M - G, M, M + G, M + 10 * G]
        x = M + 10 * G
        while x < hi:
            x *= 4.0
            pts.append(x)
        pts.append(hi)
        pts = np.array(pts)
        return np.unique(np.clip(pts, lo, hi))


def make_truncated_breit_wigner(M: float, Gamma: float, mu_min: float, alpha: float,
                                tail_mass_tol: float = 1e-8) -> SpectralFunction:
    """Breit-Wigner with a power-law threshold at ``mu_min``.

    The upper cutoff ``mu_max = M + n Gamma`` doubles ``n`` until the
    Lorentzian mass above it, ``arctan(1/(2n))/pi``, is below
    ``tail_mass_tol``. The constant ``N`` normalises the function on
    ``[mu_min, mu_max]``.

    Raises
    ------
    DomainError
        Unless ``M > mu_min >= 0``, ``Gamma > 0``, ``alpha >= 0`` and
        ``0 < tail_mass_tol < 1``.
    NumericalError
        If the normalisation integral does not converge.
    """
    M, Gamma, mu_min, alpha = float(M), float(Gamma), float(mu_min), float(alpha)
    if not (M > mu_min >= 0):
        raise DomainError("need M > mu_min >= 0")
    if not Gamma > 0:
        raise DomainError("Gamma must be positive")
    if not alpha >= 0:
        raise DomainError("threshold exponent alpha must be >= 0")
    if not 0 < tail_mass_tol < 1:
        raise DomainError("tail_mass_tol must lie in (0, 1)")
    n = 1
    while np.arctan(1.0 / (2 * n)) / np.pi >= tail_mass_tol:
        n *= 2
    raw = SpectralFunction(TRUNCATED, M, Gamma, alpha, mu_min, M + n * Gamma, 1.0, tail_mass_tol)
    res = integrate_pieces(raw._shape, raw.breakpoints(), tol=1e-14, rtol=1e-14)
    if not (res.value > 0 and res.error_estimate < 1e-11 * res.value):
        raise NumericalError("normalisation integral failed", estimate=res.value,
                             error=res.error_estimate)
    return SpectralFunction(TRUNCATED, M, Gamma, alpha, mu_min, raw.mu_max,
                            1.0 / res.value, tail_mass_tol)


def make_analytic_breit_wigner(M: float, Gamma: float) -> SpectralFunction:
    """Lorentzian on the whole real line (validation mode, non-physical)."""
    if not Gamma > 0:
        raise DomainError("Gamma must be positive")
    return SpectralFunction(ANALYTIC, float(M), float(Gamma), float("nan"),
                            -np.inf, np.inf, 1.0, 0.0)


def evaluate(sf: SpectralFunction, mu):
    """``sigma(mu)``; zero outside the support."""
    return sf(mu)


def weighted_integral(sf: SpectralFunction, f: Callable | None = None, power: int = 1,
                      tol: float = DEFAULT_QUAD_TOL, *, full_output: bool = False):
    """``int sigma(mu)^power f(mu) dmu`` over the support.

    Parameters
    ----------
    sf : SpectralFunction
    f : callable, optional
        Scalar weight; ``None`` means ``f = 1``.
    power : {1, 2}
    tol : float
        Absolute tolerance.
    full_output : bool
        Return a :class:`~qdecay.quadrature.QuadResult` instead of a float.

    Raises
    ------
    NumericalError
        If the quadrature does not reach ``tol``; carries the best estimate.
    """
    if power not in (1, 2):
        raise DomainError("power must be 1 or 2")
    if f is None:
        integrand = (lambda m: sf(m) ** power)
    else:
        integrand = (lambda m: sf(m) ** power * f(m))
    edges = sf.breakpoints()
    res = integrate_pieces(integrand, edges, tol=tol / 2)
    if sf.shape == ANALYTIC:
        left = adaptive_integrate(integrand, -np.inf, edges[0], tol / 4)
        right = adaptive_integrate(integrand, edges[-1], np.inf, tol / 4)
        res = QuadResult(res.value + left.value + right.value,
                         res.error_estimate + left.error_estimate + right.error_estimate,
                         res.evaluations + left.evaluations + right.evaluations)
    if res.error_estimate > tol:
        raise NumericalError("weighted integral did not reach tolerance",
                             estimate=res.value, error=res.error_estimate)
    return res if full_output else res.value


__all__ = [
    "SpectralFunction", "make_truncated_breit_wigner", "make_analytic_breit_wigner",
    "evaluate", "weighted_integral", "lorentzian", "TRUNCATED", "ANALYTIC",
]
