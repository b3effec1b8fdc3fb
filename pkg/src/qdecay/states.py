"""Momentum-space wavepackets built from isotropic Gaussians.

Each spin component ``m`` carries an amplitude

    psi_m(k) = sqrt(weight_m) (2 pi w^2)^(-3/4) exp(-|k - k0|^2 / (4 w^2)),

so ``|psi_m|^2`` is a normal density with standard deviation ``w`` per axis
and the weights sum to one. Every kernel used downstream is spin
independent, so spin only enters through these weights.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numpy.polynomial import legendre as npleg

from .errors import DomainError

AXIAL = "axial-about-z"
EVEN = "even-in-k"
GENERAL = "general"


@dataclass(frozen=True)
class GaussianProfile:
    """Isotropic Gaussian momentum profile with centre ``k0`` and width ``w``."""

    center: tuple
    width: float

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float)
        if c.shape != (3,) or not np.all(np.isfinite(c)):
            raise DomainError("profile centre must be 3 finite reals")
        if not self.width > 0:
            raise DomainError("profile width must be positive")
        object.__setattr__(self, "center", tuple(float(x) for x in c))
        object.__setattr__(self, "width", float(self.width))

    def amplitude(self, k) -> np.ndarray:
        """Unit-norm amplitude at momenta ``k`` (last axis of length 3)."""
        d = np.asarray(k, dtype=float) - np.asarray(self.center)
        w = self.width
        return (2 * np.pi * w * w) ** -0.75 * np.exp(-np.sum(d * d, axis=-1) / (4 * w * w))

    @property
    def center_norm(self) -> float:
        return float(np.linalg.norm(self.center))


def _spin_count(spin_s) -> int:
    s = Fraction(spin_s).limit_denominator(2)
    if s < 0 or (2 * s).denominator != 1 or abs(float(s) - float(spin_s)) > 1e-12:
        raise DomainError("spin must be a non-negative half-integer")
    return int(2 * s + 1)


def _classify(components) -> str:
    centers = np.array([p.center for _, p in components])
    if np.all(centers == 0.0):
        return EVEN
    if np.all(centers[:, :2] == 0.0):
        return AXIAL
    return GENERAL


@dataclass(frozen=True)
class Wavepacket:
    """Normalised multi-component wavepacket.

    Attributes
    ----------
    spin_s : float
        Spin, giving ``2s + 1`` components.
    components : tuple of (weight, GaussianProfile)
        Weights are non-negative and sum to one.
    symmetry : str
        ``"even-in-k"``, ``"axial-about-z"`` or ``"general"``.
    """

    spin_s: float
    components: tuple
    symmetry: str = GENERAL

    def __post_init__(self):
        n = _spin_count(self.spin_s)
        comps = tuple((float(w), p) for w, p in self.components)
        if len(comps) != n:
            raise DomainError(f"spin {self.spin_s} needs {n} components, got {len(comps)}")
        weights = np.array([w for w, _ in comps])
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            raise DomainError("component weights must be finite and non-negative")
        if abs(weights.sum() - 1.0) > 1e-10:
            raise DomainError("component weights must sum to one")
        object.__setattr__(self, "components", comps)
        if self.symmetry not in (AXIAL, EVEN, GENERAL):
            raise DomainError(f"unknown symmetry flag {self.symmetry!r}")
        actual = _classify(comps)
        if self.symmetry == EVEN and actual != EVEN:
            raise DomainError("symmetry flag even-in-k requires zero centres")
        if self.symmetry == AXIAL and actual == GENERAL:
            raise DomainError("symmetry flag axial-about-z requires centres on the z axis")

    @property
    def label(self) -> str:
        parts = [f"{w:g}*G({p.center[0]:g},{p.center[1]:g},{p.center[2]:g};{p.width:g})"
                 for w, p in self.components]
        return "+".join(parts)

    def merged(self):
        """Components with identical profiles combined, as ``[(weight, profile)]``.

        Weights with zero value are dropped. Downstream kernels are spin
        independent, so results depend on the wavepacket only through this
        list.
        """
        acc = {}
        for w, p in self.components:
            if w > 0:
                acc[p] = acc.get(p, 0.0) + w
        return sorted(((w, p) for p, w in acc.items()), key=lambda wp: (wp[1].center, wp[1].width))


def make_gaussian_state(k0=(0.0, 0.0, 0.0), width: float = 0.1, spin_s=0,
                        weights=None) -> Wavepacket:
    """Wavepacket with the same Gaussian profile on every spin component.

    Parameters
    ----------
    k0 : 3 reals
        Centre momentum.
    width : float
        Standard deviation of ``|psi|^2`` per axis.
    spin_s : half-integer
    weights : sequence of float, optional
        ``2s+1`` non-negative numbers, normalised internally; equal by default.
    """
    n = _spin_count(spin_s)
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (n,):
        raise DomainError(f"need {n} weights for spin {spin_s}")
    if np.any(w < 0) or not np.all(np.isfinite(w)) or w.sum() <= 0:
        raise DomainError("weights must be non-negative and not all zero")
    w = w / w.sum()
    prof = GaussianProfile(tuple(np.asarray(k0, dtype=float)), width)
    comps = tuple((float(x), prof) for x in w)
    return Wavepacket(spin_s, comps, _classify(comps))


def momentum_density(wp: Wavepacket, k_vec) -> np.ndarray:
    """``sum_m |psi_m(k)|^2``."""
    k = np.asarray(k_vec, dtype=float)
    return sum(w * p.amplitude(k) ** 2 for w, p in wp.components)


def mean_momentum(wp: Wavepacket) -> np.ndarray:
    """Expectation of the momentum, the weighted average of the centres."""
    if wp.symmetry == EVEN:
        return np.zeros(3)
    return np.sum([w * np.asarray(p.center) for w, p in wp.components], axis=0)


def radial_density(profile: GaussianProfile, k):
    """Density of ``|k|`` for one Gaussian profile (non-central chi, 3 dof)."""
    k = np.asarray(k, dtype=float)
    w, k0 = profile.width, profile.center_norm
    if k0 == 0.0:
        return np.sqrt(2 / np.pi) * k * k * np.exp(-k * k / (2 * w * w)) / w**3
    # difference of exponentials written to avoid cancellation at small k
    a = np.exp(-(k - k0) ** 2 / (2 * w * w))
    return k / (k0 * w * np.sqrt(2 * np.pi)) * a * -np.expm1(-2 * k * k0 / (w * w))


def radial_quadrature(wp: Wavepacket, n_sigma: float = 10.0, panels_per_sigma: float = 0.5,
                      order: int = 12):
    """Nodes and weights for ``int d^3k rho(k) g(|k|)``.

    Composite Gauss-Legendre over ``|k0| +- n_sigma w`` for each profile;
    weights include the component weight and the radial density.
    """
    ks, ws = [], []
    x, wx = npleg.leggauss(order)
    for weight, p in wp.merged():
        lo = max(0.0, p.center_norm - n_sigma * p.width)
        hi = p.center_norm + n_sigma * p.width
        n = max(2, int(np.ceil((hi - lo) / p.width * panels_per_sigma)))
        e = np.linspace(lo, hi, n + 1)
        c, h = 0.5 * (e[1:] + e[:-1]), 0.5 * np.diff(e)
        kk = (c[:, None] + h[:, None] * x).ravel()
        ww = (h[:, None] * wx).ravel()
        ks.append(kk)
        ws.append(weight * ww * radial_density(p, kk))
    return np.concatenate(ks), np.concatenate(ws)


__all__ = [
    "GaussianProfile", "Wavepacket", "make_gaussian_state", "momentum_density",
    "mean_momentum", "radial_density", "radial_quadrature", "AXIAL", "EVEN", "GENERAL",
]
