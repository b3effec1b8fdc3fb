"""Survival amplitudes and probabilities.

For a momentum eigenstate the survival amplitude is

    I_k(t) = int dmu sigma(mu) exp(-i sqrt(mu^2 + k^2) t),

and ``P_k(t) = |I_k(t)|^2``. Two independent routes are implemented:

* :func:`survival_amplitude` works at one ``t`` with QUADPACK. The
  resonance region is cut into phase-resolved pieces in ``mu``; the far
  tail is done in the energy variable with the oscillatory-weight rules
  (QAWO on finite, QAWF on infinite ranges).
* :class:`MomentumTransform` changes variable to ``E`` and applies the
  panel Fourier transform of :mod:`qdecay.quadrature`, giving whole curves
  for the price of one set of samples. It drives curves, wavepacket
  mixtures and the time-domain lifetime.

The analytic (full-line) Breit-Wigner uses the energy branch
``E = sign(mu) sqrt(mu^2 + k^2)``, so ``k = 0`` gives ``E = mu`` and an exactly
exponential decay.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate as spint
from scipy.special import exp1

from . import kinematics
from .errors import DomainError, NumericalError
from .quadrature import (
    DEFAULT_QUAD_TOL, DEFAULT_TRANSFORM_TOL, FilonTransform, adaptive_integrate,
    fourier_kernel, graded_edges, legendre_coefficients, panel_nodes,
)
from .spectral import ANALYTIC, SpectralFunction
from .states import EVEN, Wavepacket, radial_quadrature

MOMENTUM = "momentum-eigenstate"
WAVEPACKET = "wavepacket"
BOOSTED = "boosted-wavepacket"
KINDS = (MOMENTUM, WAVEPACKET, BOOSTED)

#: half-width of the analytic Breit-Wigner core, in units of max(|M|, Gamma)
ANALYTIC_CUT = 1e9


@dataclass(frozen=True)
class SurvivalCurve:
    """Sampled survival probability.

    Attributes
    ----------
    times : ndarray
        Time (or ``xi`` for boosted curves) in natural units.
    values : ndarray
        Probabilities.
    kind : str
        One of ``momentum-eigenstate``, ``wavepacket``, ``boosted-wavepacket``.
    params : dict
        ``spectral`` plus ``k``, ``state`` and ``u`` as relevant.
    accuracy : float
        Bound on the absolute error of every value.
    """

    times: np.ndarray
    values: np.ndarray
    kind: str
    params: dict = field(default_factory=dict)
    accuracy: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown curve kind {self.kind!r}")
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape:
            raise DomainError("times and values differ in length")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)


# ---------------------------------------------------------------------------
# energy-domain representation of a momentum eigenstate


def resonance_energy(sf: SpectralFunction, k: float) -> complex:
    """Complex energy ``sqrt((M - i Gamma/2)^2 + k^2)`` of the resonance pole."""
    return complex(np.sqrt(complex(sf.M, -0.5 * sf.Gamma) ** 2 + k * k))


def energy_threshold(sf: SpectralFunction, k: float) -> float:
    """Lowest energy in the spectrum at momentum ``k`` (``k`` for the analytic shape)."""
    if sf.shape == ANALYTIC:
        return float(k)
    return float(np.hypot(sf.mu_min, k))


def _mu_singularities(sf: SpectralFunction, k: float) -> list:
    M, G = sf.M, sf.Gamma
    out = [complex(M, 0.5 * G), complex(M, -0.5 * G)]
    if sf.shape != ANALYTIC:
        a = sf.alpha
        if a > 1:
            z = G * np.exp(1j * np.pi / a)
            out += [sf.mu_min + z, sf.mu_min + np.conj(z)]
        elif a > 0:
            # the crossover scale; a true pole only for alpha = 1
            out.append(complex(sf.mu_min - G))
        if k > 0 and sf.mu_min > 0:
            out.append(0j)
    return out


def _energy_edges(mu_edges, k, sign):
    # mu increases along the edges, so both branches give increasing E
    e = sign * np.hypot(mu_edges, k)
    keep = np.concatenate([[True], np.diff(e) > 1e-14 * np.maximum(1.0, np.abs(e[1:]))])
    e = e[keep]
    return e


class MomentumTransform:
    """Panel Fourier transform of ``sigma`` in the energy variable at fixed ``k``.

    Calling the object with an array of times returns ``I_k(t)``.

    Parameters
    ----------
    sf : SpectralFunction
    k : float
        Momentum magnitude.
    kappa : float
        Panel half-width to singularity-distance ratio.
    """

    def __init__(self, sf: SpectralFunction, k: float, kappa: float = 0.2):
        if k < 0:
            raise DomainError("momentum magnitude must be non-negative")
        self.sf, self.k = sf, float(k)
        k = self.k
        sing = _mu_singularities(sf, k)
        self.parts = []
        if sf.shape == ANALYTIC:
            X = ANALYTIC_CUT * max(abs(sf.M), sf.Gamma)
            self.cut = X
            if k == 0:
                mu = graded_edges(sf.M - X, sf.M + X, sing, kappa=kappa)
                self.parts.append(FilonTransform(sf, mu))
            else:
                eps = 1e-6 * k
                neg = graded_edges(sf.M - X, 0.0, sing, kappa=kappa, singular_b=True, eps=eps / X)
                pos = graded_edges(0.0, sf.M + X, sing, kappa=kappa, singular_a=True, eps=eps / X)
                g = self._analytic_density
                self.parts.append(FilonTransform(g, _energy_edges(neg, k, -1), (None, -0.5)))
                self.parts.append(FilonTransform(g, _energy_edges(pos, k, 1), (-0.5, None)))
        else:
            lo, hi = sf.mu_min, sf.mu_max
            if lo == 0 and k > 0:
                eps, beta = 1e-6 * k, 0.5 * (sf.alpha - 1)
            else:
                eps, beta = 1e-10 * sf.Gamma, sf.alpha
            mu = graded_edges(lo, hi, sing, kappa=kappa, singular_a=True, eps=eps / (hi - lo))
            model = (beta, None) if beta < 0 else (None, None)
            self.parts.append(FilonTransform(self._density, _energy_edges(mu, k, 1), model))
        self.error_estimate = float(sum(p.error_estimate for p in self.parts))
        self.evaluations = int(sum(p.evaluations for p in self.parts))

    def _density(self, E):
        """``sigma(mu) dmu/dE`` on the positive branch."""
        k = self.k
        if k == 0:
            return self.sf(E)
        mu = np.sqrt(np.maximum((E - k) * (E + k), 0.0))
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(mu > 0, self.sf(mu) * E / np.where(mu > 0, mu, 1.0), 0.0)

    def _analytic_density(self, E):
        k = self.k
        a = np.abs(E)
        mu = np.sign(E) * np.sqrt(np.maximum((a - k) * (a + k), 0.0))
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(mu != 0, self.sf(mu) * a / np.where(mu != 0, np.abs(mu), 1.0), 0.0)

    def _analytic_tail(self, t):
        """Contribution of ``|mu - M| > X`` where ``sigma ~ (Gamma/2pi)/x^2``."""
        X, G, M = self.cut, self.sf.Gamma, self.sf.M
        out = np.full(t.shape, G / (np.pi * X), dtype=complex)
        nz = t != 0
        tn = t[nz]
        acc = np.zeros(tn.shape, dtype=complex)
        for s in (1.0, -1.0):
            acc += np.exp(-1j * s * X * tn) / X - 1j * s * tn * exp1(1j * s * X * tn)
        out[nz] = G / (2 * np.pi) * np.exp(-1j * M * tn) * acc
        return out

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t).ravel()
        out = sum(p(flat) for p in self.parts)
        if self.sf.shape == ANALYTIC:
            out = out + self._analytic_tail(flat)
        return out.reshape(t.shape) if t.ndim else complex(out[0])


@lru_cache(maxsize=512)
def momentum_transform(sf: SpectralFunction, k: float, kappa: float = 0.2) -> MomentumTransform:
    """Cached :class:`MomentumTransform`."""
    return MomentumTransform(sf, float(k), kappa)


# ---------------------------------------------------------------------------
# single-time quadrature route


def _phase_pieces(edges, energy, t, per_piece=4 * np.pi):
    """Split ``edges`` so that the phase ``E(mu) t`` advances at most ``per_piece``."""
    out = [edges[0]]
    for a, b in zip(edges[:-1], edges[1:]):
        dphi = abs(t) * abs(energy(b) - energy(a))
        n = max(1, int(np.ceil(dphi / per_piece)))
        out.extend(np.linspace(a, b, n + 1)[1:])
    return np.asarray(out)


def _qawo(g, a, b, t, tol, limit=400):
    """``int_a^b g(E) exp(-i E t) dE`` with QUADPACK's oscillatory weights."""
    kw = dict(epsabs=tol / 2, epsrel=1e-12, limit=limit, wvar=abs(t), full_output=1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", spint.IntegrationWarning)
        if np.isinf(b):
            kw.pop("epsrel")
            kw.pop("limit")
            kw["limlst"] = 200
        rc = spint.quad(g, a, b, weight="cos", **kw)
        rs = spint.quad(g, a, b, weight="sin", **kw)
    val = complex(rc[0], -np.sign(t) * rs[0])
    err = float(np.hypot(rc[1], rs[1]))
    return val, err


def survival_amplitude(sf: SpectralFunction, k: float, t: float,
                       tol: float = DEFAULT_QUAD_TOL) -> complex:
    """``I_k(t)`` by adaptive quadrature at a single time.

    The region within 50 widths of the resonance is split so that each
    Gauss-Kronrod piece spans at most two oscillations (at least ten nodes
    per period). The remaining tail, where ``sigma`` is smooth and
    decaying, is integrated over energy with the oscillatory-weight
    QUADPACK rules.

    Raises
    ------
    NumericalError
        If the pieces together miss ``tol``.
    """
    if k < 0:
        raise DomainError("momentum magnitude must be non-negative")
    if not tol > 0:
        raise DomainError("tol must be positive")
    t = float(t)
    k = float(k)
    M, G = sf.M, sf.Gamma
    analytic = sf.shape == ANALYTIC

    if analytic:
        def energy(mu):
            return np.sign(mu) * np.hypot(mu, k)
        R = 50 * G + abs(M)
        core = [M - R, M + R]
    else:
        def energy(mu):
            return np.hypot(mu, k)
        core = [sf.mu_min, min(sf.mu_max, M + 50 * G)]
    brk = [b for b in sf.breakpoints() if core[0] < b < core[1]]
    if analytic and k > 0:
        brk.append(0.0)  # the energy branch jumps from -k to +k
    edges = np.unique(np.concatenate([[core[0]], brk, [core[1]]]))
    if t != 0:
        edges = _phase_pieces(edges, energy, t)

    def integrand(mu):
        return sf(mu) * np.exp(-1j * energy(mu) * t)

    pieces = []
    n_tail = 2 if analytic else 1
    budget = tol / (len(edges) - 1 + 2 * n_tail)
    val, err = 0j, 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        r = adaptive_integrate(integrand, a, b, budget, rtol=1e-13, limit=200)
        val += r.value
        err += r.error_estimate
        pieces.append(r)

    def tail_density(E, sign):
        mu = sign * np.sqrt(max((E - k) * (E + k), 0.0))
        return sf(mu) * E / abs(mu)

    if analytic:
        tails = [(energy(core[1]), np.inf, 1.0), (-energy(core[0]), np.inf, -1.0)]
    else:
        tails = [(energy(core[1]), energy(sf.mu_max), 1.0)] if core[1] < sf.mu_max else []
    for a, b, sign in tails:
        g = (lambda E, s=sign: tail_density(E, s))
        if t == 0:
            # decades keep QUADPACK's error honest over the long tail
            e = [a]
            while e[-1] < (b if np.isfinite(b) else 1e3 * a):
                e.append(min(4 * e[-1], b) if np.isfinite(b) else 4 * e[-1])
            for x0, x1 in zip(e[:-1], e[1:]):
                r = adaptive_integrate(g, x0, x1, budget / len(e))
                val += r.value
                err += r.error_estimate
            if not np.isfinite(b):
                r = adaptive_integrate(g, e[-1], np.inf, budget / len(e))
                val += r.value
                err += r.error_estimate
            continue
        # the negative-energy branch carries exp(+i|E|t)
        tt = t * sign
        if np.isfinite(b):
            e = [a]
            while e[-1] < b:
                e.append(min(4 * e[-1], b))
            for x0, x1 in zip(e[:-1], e[1:]):
                v, er = _qawo(g, x0, x1, tt, budget / len(e))
                val += v
                err += er
        else:
            v, er = _qawo(g, a, b, tt, budget)
            val += v
            err += er
    if err > tol:
        raise NumericalError("survival amplitude missed its tolerance", estimate=val, error=err)
    return complex(val)


def survival_probability_momentum(sf: SpectralFunction, k: float, t: float,
                                  tol: float = DEFAULT_QUAD_TOL) -> float:
    """``P_k(t) = |I_k(t)|^2`` at a single time."""
    return float(abs(survival_amplitude(sf, k, t, tol)) ** 2)


def naive_boosted_amplitude_modulus(sf: SpectralFunction, k: float, u: float, t: float,
                                    tol: float = DEFAULT_QUAD_TOL) -> float:
    """Modulus of the amplitude obtained by blindly time-translating a boosted eigenstate.

    The boost only rescales time, ``|I_k(t / sqrt(1 - u^2))|``, because the
    extra phase ``u k t / sqrt(1-u^2)`` drops out of the modulus. The result
    decays faster than the unboosted amplitude.
    """
    if not 0 <= u < kinematics.SPEED_LIMIT:
        raise DomainError("need 0 <= u < 1")
    g = kinematics.gamma((u, 0.0, 0.0))
    return abs(survival_amplitude(sf, k, t * g, tol))


# ---------------------------------------------------------------------------
# wavepackets


def survival_probability_state(sf: SpectralFunction, wp: Wavepacket, t, tol: float = DEFAULT_TRANSFORM_TOL):
    """``P_psi(t) = int d^3k rho(k) P_|k|(t)`` for a wavepacket.

    Only ``|k|`` enters, so the momentum integral reduces to the radial
    distribution of each Gaussian profile. Each radial node uses the panel
    transform of its momentum eigenstate.
    """
    t_arr = np.asarray(t, dtype=float)
    flat = np.atleast_1d(t_arr).ravel()
    ks, ws = radial_quadrature(wp)
    out = np.zeros(flat.shape)
    for kk, w in zip(ks, ws):
        out += w * np.abs(momentum_transform(sf, float(kk))(flat)) ** 2
    return out.reshape(t_arr.shape) if t_arr.ndim else float(out[0])


def _state_accuracy(sf, wp):
    ks, ws = radial_quadrature(wp)
    return float(sum(w * 3 * momentum_transform(sf, float(kk)).error_estimate for kk, w in zip(ks, ws)))


# ---------------------------------------------------------------------------
# boosted wavepackets on intersecting hyperplanes


def _axis_of(wp: Wavepacket, u_vec: np.ndarray) -> tuple[np.ndarray, list]:
    """Boost axis and ``(weight, k0_parallel, width)`` for each merged component."""
    speed = np.linalg.norm(u_vec)
    comps = wp.merged()
    if speed > 0:
        axis = u_vec / speed
    else:
        nz = [np.asarray(p.center) for _, p in comps if p.center_norm > 0]
        axis = nz[0] / np.linalg.norm(nz[0]) if nz else np.array([0.0, 0.0, 1.0])
    out = []
    for w, p in comps:
        c = np.asarray(p.center)
        par = float(c @ axis)
        if np.linalg.norm(c - par * axis) > 1e-12 * max(1.0, np.linalg.norm(c)):
            raise DomainError("wavepacket must be axial about the boost axis")
        out.append((w, par, p.width))
    return axis, out


_OUTER_ORDER = 8
_OUTER_X, _OUTER_W = np.polynomial.legendre.leggauss(_OUTER_ORDER)
_OUTER_PROJ = (np.polynomial.legendre.legvander(_OUTER_X, _OUTER_ORDER - 1) * _OUTER_W[:, None]).T \
    * ((2 * np.arange(_OUTER_ORDER) + 1) / 2)[:, None]


class BoostedEngine:
    """Survival probability on a hyperplane tilted by a boost ``u``.

    With ``eta = B(u)(1,0)`` the no-decay orientation and ``eta' = (1, 0)`` the
    observation one, the probability at ``xi = tau' - (eta eta') tau`` is

        P(xi) = sum_m int d^3q |int dE sqrt((eta q) E) sigma(mu)/mu psi_m(k) e^{-iE xi}|^2

    with ``mu = sqrt(E^2 - q^2)``, ``eta q = gamma (E - u q_par)`` and ``k`` the
    rest-frame momentum, ``k_perp = q_perp`` and ``k_par = gamma (q_par - u E)``.
    Axial symmetry leaves a 2D outer integral over ``(q_perp, q_par)``.

    The inner integral is written in ``s = E - E_th(q)`` so that every outer
    node shares one panel grid in ``s``; the common phase ``exp(-i E_th xi)``
    drops from the modulus. All node transforms then reduce to one matrix
    product with a shared Bessel kernel.
    """

    def __init__(self, sf: SpectralFunction, wp: Wavepacket, u, tol: float = DEFAULT_TRANSFORM_TOL,
                 kappa: float | None = None):
        if not sf.is_physical:
            raise DomainError("boosted survival needs a spectrum with a finite threshold")
        if not sf.mu_min > 0:
            raise DomainError("boosted survival needs mu_min > 0")
        u_vec = np.asarray(u, dtype=float)
        if u_vec.shape == ():
            u_vec = np.array([0.0, 0.0, float(u_vec)])
        kinematics.gamma(u_vec)
        self.sf, self.wp, self.tol = sf, wp, tol
        self.speed = float(np.linalg.norm(u_vec))
        self.gamma = 1.0 / np.sqrt(1.0 - self.speed**2)
        self.kappa = kappa if kappa is not None else (0.2 if tol < 1e-8 else 0.3)
        _, comps = _axis_of(wp, u_vec)
        self.blocks = [self._build(w, k0, width) for w, k0, width in comps]
        self.error_estimate = float(sum(b["err"] for b in self.blocks))

    # -- grids -------------------------------------------------------------

    def _outer_nodes(self, k0, w):
        sf, u, g = self.sf, self.speed, self.gamma
        nsig = 9.0
        Qp = nsig * w
        xq, wq = _OUTER_X, _OUTER_W
        ep = np.linspace(0.0, Qp, 7)
        cp, hp = 0.5 * (ep[1:] + ep[:-1]), 0.5 * np.diff(ep)
        qp = (cp[:, None] + hp[:, None] * xq).ravel()
        wqp = (hp[:, None] * wq).ravel() * 2 * np.pi * qp
        if u == 0:
            lo, hi = k0 - nsig * w, k0 + nsig * w
            sing = [complex(k0, w), complex(k0, -w)]
            core = hi
        else:
            mu_hi = min(sf.mu_max, sf.M + 100 * sf.Gamma)
            c = (k0 + nsig * w) / g
            A = mu_hi**2 + Qp**2
            hi = (c + np.sqrt(c * c - (1 - u * u) * (c * c - u * u * A))) / (1 - u * u)
            lo = (k0 - nsig * w) / g + u * sf.mu_min
            centre = k0 / g + u * sf.M
            width = max(w / g, u * sf.Gamma)
            sing = [complex(centre, width), complex(centre, -width)]
            core = centre + nsig * w / g
        ez = graded_edges(lo, hi, sing, kappa=self.kappa)
        # the Gaussian flank below the peak is smooth but not polynomial on
        # panels much wider than its own scale
        cap = w / g
        split = [np.linspace(a, b, int(np.ceil((b - a) / cap)) + 1)[:-1] if a < core and b - a > cap
                 else [a] for a, b in zip(ez[:-1], ez[1:])]
        ez = np.append(np.concatenate(split), ez[-1])
        cz, hz = 0.5 * (ez[1:] + ez[:-1]), 0.5 * np.diff(ez)
        qz = (cz[:, None] + hz[:, None] * xq).ravel()
        wqz = (hz[:, None] * wq).ravel()
        QP, QZ = np.meshgrid(qp, qz, indexing="ij")
        outer = dict(wp=wqp, wz=wqz, jac=2 * np.pi * qp, hp=hp, hz=hz, shape=(qp.size, qz.size))
        return QP.ravel(), QZ.ravel(), np.outer(wqp, wqz).ravel(), outer

    def _inner_edges(self, QP, QZ, k0, w):
        sf, u, g = self.sf, self.speed, self.gamma
        q = np.hypot(QP, QZ)
        Eth = np.hypot(sf.mu_min, q)
        sing = []
        for z in (complex(sf.M, 0.5 * sf.Gamma), complex(sf.M, -0.5 * sf.Gamma)):
            sing.append(np.sqrt(z * z + q * q) - Eth)
        for z in _mu_singularities(sf, 0.0)[2:]:
            # threshold-factor scale mapped to s by the local slope dE/dmu
            sing.append((z - sf.mu_min) * sf.mu_min / Eth)
        sing.append(q - Eth)                 # mu = 0
        sing.append(u * QZ - Eth)            # eta q = 0
        if u > 0:
            Ec = (QZ - k0 / g) / u
            d = np.sqrt(2.0) * w / (g * u)
            sing += [Ec - Eth + 1j * d, Ec - Eth - 1j * d]
            top = (QZ - (k0 - 9.5 * w) / g) / u
            top = np.minimum(top, np.hypot(sf.mu_max, q))
        else:
            top = np.hypot(sf.mu_max, q)
        smax = float(np.max(top - Eth))
        sing = np.unique(np.round(np.concatenate([np.ravel(s) for s in sing]), 12))
        return graded_edges(0.0, smax, sing, kappa=self.kappa, singular_a=True,
                            eps=1e-10 * sf.Gamma / smax), Eth

    def _build(self, weight, k0, w):
        sf, u, g = self.sf, self.speed, self.gamma
        QP, QZ, WO, outer = self._outer_nodes(k0, w)
        edges, Eth = self._inner_edges(QP, QZ, k0, w)
        S, _ = panel_nodes(edges)              # (P, N)
        c = 0.5 * (edges[1:] + edges[:-1])
        h = 0.5 * np.diff(edges)
        coef = np.empty((QP.size, S.size))
        err = 0.0
        amp0 = (2 * np.pi * w * w) ** -0.75
        for i0 in range(0, QP.size, 64):
            sl = slice(i0, i0 + 64)
            qp, qz = QP[sl, None, None], QZ[sl, None, None]
            E = Eth[sl, None, None] + S[None]
            q = np.hypot(qp, qz)
            mu = np.sqrt(np.maximum((E - q) * (E + q), 0.0))
            eta_q = g * (E - u * qz)
            kz = g * (qz - u * E)
            psi = amp0 * np.exp(-(qp * qp + (kz - k0) ** 2) / (4 * w * w))
            with np.errstate(divide="ignore", invalid="ignore"):
                a = np.sqrt(np.maximum(eta_q * E, 0.0)) * sf(mu) / np.where(mu > 0, mu, 1.0) * psi
            cf = legendre_coefficients(a)          # (q, P, N)
            err_q = np.sum((np.abs(cf[..., -1]) + np.abs(cf[..., -2])) * h, axis=1)
            # amplitude error d gives |A|^2 error 2|A| d + d^2 <= 3 d * max(|A|, d)
            norm_q = np.sum(np.abs(cf[..., 0]) * 2 * h, axis=1)
            err += float(np.sum(WO[sl] * 3 * err_q * np.maximum(norm_q, err_q)))
            coef[sl] = cf.reshape(cf.shape[0], -1)
        return dict(weight=weight, W=WO * weight, coef=coef, center=c, half=h,
                    err=weight * err, nodes=QP.size, panels=len(c), outer=outer)

    # -- evaluation --------------------------------------------------------

    @staticmethod
    def _outer_error(F, b):
        """Legendre-tail estimate of the outer quadrature error, per time."""
        o = b["outer"]
        npp, nz = o["shape"]
        F3 = F.reshape(npp, nz, -1)
        gz = np.einsum("pzt,p->zt", F3, o["wp"])
        gp = np.einsum("pzt,z->pt", F3, o["wz"]) * o["jac"][:, None]
        err = 0.0
        for g_, h_ in ((gz, o["hz"]), (gp, o["hp"])):
            c = np.abs(np.einsum("nk,pkt->pnt", _OUTER_PROJ, g_.reshape(len(h_), _OUTER_ORDER, -1)))
            # Gauss with n nodes is exact to degree 2n-1; extrapolate the
            # observed decay of the top coefficients to degree 2n
            top, prev = c[:, -1] + c[:, -2], c[:, -3] + c[:, -4]
            with np.errstate(divide="ignore", invalid="ignore"):
                rho = np.where(prev > 0, np.minimum(top / prev, 1.0), 1.0)
            est = top * rho ** ((_OUTER_ORDER + 2) // 2)
            err = err + np.sum(est * h_[:, None], axis=0)
        return b["weight"] * err

    def evaluate(self, xi):
        """Probabilities and per-point error estimates at ``xi``."""
        xi = np.asarray(xi, dtype=float)
        flat = np.atleast_1d(xi).ravel()
        out = np.zeros(flat.shape)
        err = np.zeros(flat.shape)
        for b in self.blocks:
            for i0 in range(0, flat.size, 128):
                tt = flat[i0:i0 + 128]
                K = fourier_kernel(b["center"], b["half"], tt).reshape(tt.size, -1)
                re = b["coef"] @ np.ascontiguousarray(K.real.T)
                im = b["coef"] @ np.ascontiguousarray(K.imag.T)
                F = re * re + im * im
                out[i0:i0 + 128] += F.T @ b["W"]
                err[i0:i0 + 128] += self._outer_error(F, b) + b["err"]
        return out.reshape(xi.shape), err.reshape(xi.shape)

    def __call__(self, xi):
        p, _ = self.evaluate(xi)
        return p if p.ndim else float(p)


def _hashable_u(u):
    a = np.asarray(u, dtype=float)
    if a.shape == ():
        return (0.0, 0.0, float(a))
    return tuple(float(x) for x in a)


@lru_cache(maxsize=16)
def _boosted_engine(sf, wp, u, tol):
    return BoostedEngine(sf, wp, u, tol)


def boosted_engine(sf: SpectralFunction, wp: Wavepacket, u, tol: float = DEFAULT_TRANSFORM_TOL) -> BoostedEngine:
    """Cached :class:`BoostedEngine`; ``u`` may be a speed along ``z`` or a 3-vector."""
    return _boosted_engine(sf, wp, _hashable_u(u), float(tol))


def boosted_survival_probability(sf: SpectralFunction, wp: Wavepacket, u, xi,
                                 tol: float = DEFAULT_TRANSFORM_TOL):
    """Survival probability of a boosted wavepacket observed on ``t = tau'``.

    ``xi = tau' - (eta eta') tau`` is the only time argument. ``wp`` is given
    in its no-decay frame and must be axial about ``u``.

    Parameters
    ----------
    u : float or 3 reals
        Boost velocity; a float means a boost along ``z``.
    xi : float or array_like

    Raises
    ------
    DomainError
        For non-axial wavepackets, spectra without a positive threshold, or
        superluminal ``u``.
    """
    return boosted_engine(sf, wp, u, tol)(xi)


# ---------------------------------------------------------------------------
# batched curves


def survival_curve(kind: str, params: dict, t_grid, tol: float = DEFAULT_TRANSFORM_TOL) -> SurvivalCurve:
    """Survival probability on a monotone grid.

    ``params`` holds ``spectral`` and, depending on ``kind``, ``k``
    (momentum eigenstate), ``state`` (wavepacket) or ``state`` and ``u``
    (boosted wavepacket, grid values are ``xi``).
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1:
        raise DomainError("t_grid must be one-dimensional")
    if t.size > 1:
        d = np.diff(t)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise DomainError("t_grid must be strictly monotone")
    sf = params["spectral"]
    if kind == MOMENTUM:
        tr = momentum_transform(sf, float(params["k"]))
        amp = tr(t)
        vals = np.abs(amp) ** 2
        acc = 3 * tr.error_estimate
    elif kind == WAVEPACKET:
        vals = survival_probability_state(sf, params["state"], t, tol)
        acc = _state_accuracy(sf, params["state"])
    elif kind == BOOSTED:
        eng = boosted_engine(sf, params["state"], params.get("u", 0.0), tol)
        vals, errs = eng.evaluate(t)
        acc = float(np.max(errs)) if errs.size else eng.error_estimate
    else:
        raise DomainError(f"unknown curve kind {kind!r}")
    if acc > tol:
        raise NumericalError("curve accuracy above tolerance", estimate=vals, error=acc)
    return SurvivalCurve(t, np.asarray(vals, float), kind, dict(params), float(max(acc, 1e-15)))


__all__ = [
    "SurvivalCurve", "MomentumTransform", "momentum_transform", "survival_amplitude",
    "survival_probability_momentum", "survival_probability_state",
    "naive_boosted_amplitude_modulus", "boosted_survival_probability", "BoostedEngine",
    "boosted_engine", "survival_curve", "resonance_energy", "energy_threshold",
    "MOMENTUM", "WAVEPACKET", "BOOSTED",
]
