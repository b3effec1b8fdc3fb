"""Lifetimes as average decay times.

The lifetime of a momentum eigenstate is ``T_k = int_0^inf P_k(t) dt``.
Integrating by parts against the spectral representation gives the closed
form

    T_k = pi int dmu sigma(mu)^2 sqrt(mu^2 + k^2) / mu,

which is the production route; the time-domain integral is kept as an
independent check. Wavepacket and boosted lifetimes are averages of the same
kernel, and the half-integral of the boosted survival probability over the
observation hyperplane offers a second, fully numerical route.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kinematics
from .errors import DomainError, NumericalError
from .quadrature import DEFAULT_QUAD_TOL, DEFAULT_TRANSFORM_TOL, QuadResult, fit_power_law, improper_integrate
from .spectral import ANALYTIC, SpectralFunction, weighted_integral
from .states import EVEN, Wavepacket, mean_momentum, radial_quadrature
from .survival import (SurvivalCurve, boosted_engine, energy_threshold,
                       momentum_transform, resonance_energy)

CLOSED_FORM = "closed-form"
TIME_DOMAIN = "time-domain"
HALF_INTEGRAL = "half-integral"


@dataclass(frozen=True)
class LifetimeResult:
    """A lifetime in natural time units.

    Attributes
    ----------
    value : float
    method : str
        ``"closed-form"``, ``"time-domain"`` or ``"half-integral"``.
    error_estimate : float
        Absolute error bound reported by the quadrature.
    params : dict
        Labels of the inputs.
    """

    value: float
    method: str
    error_estimate: float
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (np.isfinite(self.value) and self.value > 0):
            raise NumericalError("lifetime must be finite and positive", estimate=self.value)
        if not self.error_estimate >= 0:
            raise NumericalError("negative error estimate", estimate=self.value, error=self.error_estimate)
        if self.method not in (CLOSED_FORM, TIME_DOMAIN, HALF_INTEGRAL):
            raise DomainError(f"unknown lifetime method {self.method!r}")

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class DeviationReport:
    """Quantum lifetime against the definite-mass classical prediction.

    ``ratio = spread_ratio * boost_ratio``: the first factor compares the
    unboosted lifetimes, the second compares the boost-induced dilation with
    the classical one.
    """

    quantum_lifetime: float
    classical_lifetime: float
    ratio: float
    inputs: dict
    spread_ratio: float = 1.0
    boost_ratio: float = 1.0
    error_estimate: float = 0.0


# ---------------------------------------------------------------------------
# kernels


def _kernel_singular(sf: SpectralFunction, k: float) -> bool:
    """Whether ``sigma^2 sqrt(mu^2+k^2)/mu`` is non-integrable at ``mu = 0``."""
    if k == 0:
        return False
    if sf.shape == ANALYTIC:
        return True
    return sf.mu_min == 0 and sf.alpha == 0


def _velocity3(u) -> np.ndarray:
    a = np.asarray(u, dtype=float)
    if a.shape == ():
        a = np.array([0.0, 0.0, float(a)])
    kinematics.gamma(a)
    return a


def lifetime_kernel(sf: SpectralFunction, k: float, mu):
    """``pi sigma(mu) sqrt(mu^2 + k^2) / mu``, zero outside the support.

    Integrating against ``sigma`` gives :func:`lifetime_momentum_closed`.
    """
    mu = np.asarray(mu, dtype=float)
    s = np.asarray(sf(mu), dtype=float)
    if np.any((mu <= 0) & (s != 0)):
        raise DomainError("lifetime kernel needs mu > 0 inside the support")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(s != 0, np.pi * s * np.hypot(mu, k) / np.where(mu > 0, mu, 1.0), 0.0)
    return out if out.ndim else float(out)


def _sigma2_moment(sf, f, tol):
    """``int sigma^2 f`` with ``f`` written in ``|mu|`` (so the analytic shape is even)."""
    return weighted_integral(sf, f, power=2, tol=tol, full_output=True)


def _inverse_mu_moment(sf, tol):
    """``int sigma^2 / mu`` over the support."""
    if sf.shape == ANALYTIC or sf.mu_min == 0:
        raise DomainError("kernel singular at mu = 0")
    return _sigma2_moment(sf, lambda m: 1.0 / m, tol)


# ---------------------------------------------------------------------------
# momentum eigenstates


def lifetime_momentum_closed(sf: SpectralFunction, k: float = 0.0, tol: float = DEFAULT_QUAD_TOL) -> LifetimeResult:
    """``T_k = pi int sigma^2 sqrt(mu^2 + k^2)/mu dmu``.

    For the analytic shape the energy branch ``E = sign(mu) sqrt(mu^2+k^2)``
    makes the kernel ``sqrt(mu^2+k^2)/|mu|``; at ``k = 0`` it is one and the
    lifetime is ``1/Gamma``.

    Parameters
    ----------
    sf : SpectralFunction
    k : float
        Momentum magnitude, ``k >= 0``.
    tol : float
        Relative tolerance.

    Raises
    ------
    DomainError
        ``kernel singular at mu = 0`` when ``k > 0`` and ``sigma(0) != 0``.
    """
    k = float(k)
    if k < 0:
        raise DomainError("momentum magnitude must be non-negative")
    if _kernel_singular(sf, k):
        raise DomainError("kernel singular at mu = 0")
    scale = 1.0 / sf.Gamma
    if k == 0:
        res = _sigma2_moment(sf, None, tol * scale / np.pi)
    else:
        res = _sigma2_moment(sf, lambda m: np.hypot(m, k) / np.abs(m), tol * scale / np.pi)
    return LifetimeResult(np.pi * res.value, CLOSED_FORM, np.pi * res.error_estimate,
                          dict(spectral=sf.label, k=k, u=0.0))


def _lifetime_edges(sf: SpectralFunction, k: float) -> tuple[np.ndarray, float]:
    """Time panels: graded toward 0, uniform through the exponential era, then geometric."""
    Ep = resonance_energy(sf, k)
    width_E = -2 * Ep.imag
    spread = abs(Ep) - energy_threshold(sf, k)
    if sf.shape == ANALYTIC and k > 0:
        spread = abs(Ep) + k
    h0 = 1.0 / width_E if spread <= 0 else min(1.0 / width_E, np.pi / spread)
    horizon = 40.0 / width_E
    graded = h0 * 0.6 ** np.arange(40, 0, -1)
    uniform = np.arange(1, int(np.ceil(horizon / h0)) + 1) * h0
    return np.concatenate([[0.0], graded, uniform]), 1.0 / width_E


def lifetime_momentum_timedomain(sf: SpectralFunction, k: float = 0.0,
                                 tol: float = DEFAULT_TRANSFORM_TOL) -> LifetimeResult:
    """``T_k = int_0^inf P_k(t) dt`` by direct quadrature of the survival curve.

    Panels cover the exponential era uniformly, then grow geometrically
    until the fitted power-law tail is below a tenth of the tolerance. The
    tail hint is ``2(1 + alpha)``.

    Parameters
    ----------
    tol : float
        Relative tolerance, applied against the width scale ``1/Gamma_E``.

    Raises
    ------
    DomainError
        Where the lifetime diverges (see :func:`lifetime_momentum_closed`).
    NumericalError
        ``tail model mismatch`` if the tail decays slower than expected.
    """
    k = float(k)
    if k < 0:
        raise DomainError("momentum magnitude must be non-negative")
    if _kernel_singular(sf, k):
        raise DomainError("kernel singular at mu = 0")
    tr = momentum_transform(sf, k)
    delta = tr.error_estimate
    edges, scale = _lifetime_edges(sf, k)
    hint = None if sf.shape == ANALYTIC else 2.0 * (1.0 + sf.alpha)

    def f(t):
        a = np.abs(tr(t))
        # amplitude error d bounds the |I|^2 error by d (2|I| + d)
        return np.stack([a * a, delta * (2 * a + delta)])

    res = improper_integrate(f, 0.0, tol * scale, hint, edges=edges, scale=scale,
                             vectorized=True, pointwise_error=True)
    return LifetimeResult(res.value, TIME_DOMAIN, res.error_estimate,
                          dict(spectral=sf.label, k=k, u=0.0))


# ---------------------------------------------------------------------------
# wavepackets


def _state_moment(sf, wp, tol):
    """``pi int sigma^2/mu <sqrt(mu^2 + |k|^2)>_rho dmu`` with ``<>`` over the radial rule."""
    ks, ws = radial_quadrature(wp)
    if _kernel_singular(sf, float(ks.max())):
        raise DomainError("kernel singular at mu = 0")
    norm = float(ws.sum())

    def f(m):
        return float(ws @ np.hypot(m, ks)) / abs(m)

    res = _sigma2_moment(sf, f, tol / (np.pi * sf.Gamma))
    value = np.pi * res.value
    return value, np.pi * res.error_estimate + abs(norm - 1.0) * value


def lifetime_state(sf: SpectralFunction, wp: Wavepacket, tol: float = DEFAULT_QUAD_TOL) -> LifetimeResult:
    """Wavepacket lifetime ``int d^3k rho(k) T_|k|``.

    The average over ``rho`` uses the distribution of ``|k|`` and sits inside
    a single ``mu`` integral.

    Parameters
    ----------
    tol : float
        Relative tolerance.
    """
    value, err = _state_moment(sf, wp, tol)
    return LifetimeResult(value, CLOSED_FORM, err, dict(spectral=sf.label, state=wp.label, u=0.0))


def lifetime_boosted(sf: SpectralFunction, wp: Wavepacket, u, tol: float = DEFAULT_QUAD_TOL) -> LifetimeResult:
    """Lifetime of a wavepacket whose no-decay hyperplane is boosted by ``u``.

    The boosted kernel is ``T_k(mu) gamma (1 + u.k / sqrt(mu^2+k^2))``. The
    second term is linear in ``k``, so its average needs only the mean
    momentum:

        T(u) = gamma [T_state + pi (u . <k>) int sigma^2/mu dmu].

    For even-in-k packets the second term is dropped before any quadrature and
    ``T(u) = gamma T_state`` holds to rounding.
    """
    u = _velocity3(u)
    g = kinematics.gamma(u)
    base, err = _state_moment(sf, wp, tol)
    value = g * base
    err = g * err
    kbar = mean_momentum(wp)
    proj = float(u @ kbar)
    if wp.symmetry != EVEN and proj != 0.0:
        inv = _inverse_mu_moment(sf, tol / (np.pi * sf.Gamma))
        value += g * np.pi * proj * inv.value
        err += g * np.pi * abs(proj) * inv.error_estimate
    return LifetimeResult(value, CLOSED_FORM, err, dict(spectral=sf.label, state=wp.label, u=tuple(u)))


def _as_four_velocity(x) -> kinematics.FourVelocity:
    if isinstance(x, kinematics.FourVelocity):
        return x
    a = np.asarray(x, dtype=float)
    if a.shape == (4,):
        return kinematics.FourVelocity(kinematics.FourVector.from_array(a))
    return kinematics.FourVelocity.from_velocity(a)


def lifetime_boosted_general(sf: SpectralFunction, wp: Wavepacket, eta, eta_prime,
                             tol: float = DEFAULT_QUAD_TOL) -> LifetimeResult:
    """Lifetime for no-decay orientation ``eta`` observed along ``eta_prime``.

    ``pi int rho int sigma^2 sqrt(mu^2+k^2)/mu [(eta eta') + (eta' p)/sqrt(mu^2+k^2)]``
    with ``p = B(eta)(0, k)``. The packet momenta are in the ``eta`` frame.
    ``eta' p`` is linear in ``k`` and averages to its value at ``<k>``.

    Parameters
    ----------
    eta, eta_prime : FourVelocity, 4-array or 3-velocity

    Raises
    ------
    DomainError
        If ``eta . eta' < 1``.
    """
    eta, eta_p = _as_four_velocity(eta), _as_four_velocity(eta_prime)
    dot = kinematics.minkowski_dot(eta.vector, eta_p.vector)
    if dot < 1.0 - 1e-12:
        raise DomainError("need eta . eta' >= 1")
    dot = max(dot, 1.0)
    base, err = _state_moment(sf, wp, tol)
    value, err = dot * base, dot * err
    if wp.symmetry != EVEN:
        kbar = mean_momentum(wp)
        p = kinematics.boost(eta.velocity, np.concatenate([[0.0], kbar]))
        proj = kinematics.minkowski_dot(eta_p.vector, p)
        if proj != 0.0:
            inv = _inverse_mu_moment(sf, tol / (np.pi * sf.Gamma))
            value += np.pi * proj * inv.value
            err += np.pi * abs(proj) * inv.error_estimate
    return LifetimeResult(value, CLOSED_FORM, err,
                          dict(spectral=sf.label, state=wp.label, eta_dot=dot))


def diagonal_overlap_density(sf: SpectralFunction, k: float, eta_dot: float, eta_prime_p: float,
                             tol: float = DEFAULT_QUAD_TOL) -> float:
    """Time-free diagonal overlap of a momentum eigenstate on intersecting hyperplanes.

    ``(eta_dot^2 - 1)^(-1/2) int_{w >= E_th} dw w (eta'p + eta_dot w) sigma^2(mu)/mu^2``
    with ``mu = sqrt(w^2 - k^2)``. In the ``mu`` variable this is
    ``(eta_dot^2 - 1)^(-1/2) int sigma^2/mu (eta'p + eta_dot sqrt(mu^2+k^2)) dmu``.

    Raises
    ------
    DomainError
        ``parallel hyperplanes need the ISP path`` for ``eta_dot <= 1``.
    """
    if not eta_dot > 1:
        raise DomainError("parallel hyperplanes need the ISP path")
    if k < 0:
        raise DomainError("momentum magnitude must be non-negative")
    if sf.shape == ANALYTIC or sf.mu_min <= 0:
        raise DomainError("kernel singular at mu = 0")
    k = float(k)
    res = _sigma2_moment(sf, lambda m: (eta_prime_p + eta_dot * np.hypot(m, k)) / m, tol)
    return float(res.value / np.sqrt(eta_dot * eta_dot - 1.0))


def lifetime_halfintegral_oracle(sf: SpectralFunction, wp: Wavepacket, u,
                                 tol: float = DEFAULT_TRANSFORM_TOL) -> LifetimeResult:
    """``(1/2) int_{-inf}^{inf} P(xi) dxi`` of the boosted survival probability.

    Both signs of ``xi`` are sampled on mirrored panels. The panels are graded
    toward ``xi = 0``, uniform on the scale of the spectral spread through the
    exponential era, and geometric beyond, with a power-law tail fitted at the
    horizon.

    Parameters
    ----------
    tol : float
        Relative tolerance for the tail cut; the engine runs at
        ``min(tol, 1e-6)``.
    """
    u3 = _velocity3(u)
    g = kinematics.gamma(u3)
    eng = boosted_engine(sf, wp, u3, min(tol, DEFAULT_TRANSFORM_TOL))
    width_E = sf.Gamma
    spread = sf.M - sf.mu_min + 10 * sf.Gamma
    h0 = min(1.0 / width_E, 4 * np.pi / spread)
    horizon = 40.0 * g / width_E
    edges = np.concatenate([[0.0], h0 * 0.6 ** np.arange(27, 0, -1),
                            np.arange(1, int(np.ceil(horizon / h0)) + 1) * h0])
    scale = g / width_E

    def f(x):
        p, e = eng.evaluate(np.concatenate([x, -x]))
        n = x.size
        # (1/2)(P(xi) + P(-xi)) integrated over xi > 0
        return np.stack([0.5 * (p[:n] + p[n:]), 0.5 * (e[:n] + e[n:])])

    res = improper_integrate(f, 0.0, tol * scale, 2.0 * (1.0 + sf.alpha), edges=edges,
                             scale=scale, vectorized=True, pointwise_error=True)
    return LifetimeResult(res.value, HALF_INTEGRAL, res.error_estimate,
                          dict(spectral=sf.label, state=wp.label, u=tuple(u3)))


# ---------------------------------------------------------------------------
# tails and classical comparison


def default_tail_window(sf: SpectralFunction, k: float = 0.0) -> tuple[float, float]:
    """Two decades starting a hundred widths past the resonance."""
    width_E = -2 * resonance_energy(sf, k).imag
    return 100.0 / width_E, 1e4 / width_E


def tail_exponent_fit(curve: SurvivalCurve, fit_window=None, *, max_drift: float = 0.2) -> float:
    """Slope of ``log P`` against ``log t`` inside ``fit_window``.

    Parameters
    ----------
    curve : SurvivalCurve
        Needs a truncated spectrum in ``curve.params["spectral"]``.
    fit_window : (t_lo, t_hi), optional
        Defaults to :func:`default_tail_window`.
    max_drift : float
        Largest allowed difference between the slopes of the two halves of
        the window (in log t).

    Raises
    ------
    DomainError
        For analytic spectra or windows with fewer than 8 samples.
    NumericalError
        ``asymptotic era not reached`` if the slope drifts across the window.
    """
    sf = curve.params.get("spectral")
    if sf is None or not sf.is_physical:
        raise DomainError("tail fit needs a truncated spectrum")
    if fit_window is None:
        fit_window = default_tail_window(sf, float(curve.params.get("k", 0.0)))
    lo, hi = map(float, fit_window)
    if not 0 < lo < hi:
        raise DomainError("fit window must satisfy 0 < t_lo < t_hi")
    t = np.abs(np.asarray(curve.times))
    y = np.asarray(curve.values)
    sel = (t >= lo) & (t <= hi) & (y > 0)
    if sel.sum() < 8:
        raise DomainError("fit window holds fewer than 8 positive samples")
    t, y = t[sel], y[sel]
    slope = -fit_power_law(t, y)
    mid = np.sqrt(lo * hi)
    first, second = t <= mid, t >= mid
    if first.sum() >= 4 and second.sum() >= 4:
        drift = abs(fit_power_law(t[first], y[first]) - fit_power_law(t[second], y[second]))
        if drift > max_drift:
            raise NumericalError("asymptotic era not reached", estimate=slope, error=drift)
    return float(slope)


def _boosted_momentum_lifetime(sf, k, u, tol):
    """Momentum eigenstate at ``k`` along ``u``: ``gamma [T_k + pi u k int sigma^2/mu]``."""
    g = kinematics.gamma(u)
    base = lifetime_momentum_closed(sf, k, tol)
    value, err = g * base.value, g * base.error_estimate
    speed = float(np.linalg.norm(u))
    if speed > 0 and k > 0:
        inv = _inverse_mu_moment(sf, tol / (np.pi * sf.Gamma))
        value += g * np.pi * speed * k * inv.value
        err += g * np.pi * speed * k * inv.error_estimate
    return value, err, base.value


def deviation_report(sf: SpectralFunction, state, u=0.0, tol: float = DEFAULT_QUAD_TOL) -> DeviationReport:
    """Quantum lifetime against classical time dilation with the peak mass ``M``.

    Parameters
    ----------
    state : float or Wavepacket
        A momentum magnitude (taken along ``u``) or a wavepacket.
    u : float or 3 reals
        Boost of the no-decay hyperplane.

    Notes
    -----
    The classical rest lifetime is the closed-form quantum lifetime at
    ``k = 0``, and a wavepacket is represented classically by its mean
    momentum.
    """
    u3 = _velocity3(u)
    M = sf.M
    T0 = lifetime_momentum_closed(sf, 0.0, tol)
    if isinstance(state, Wavepacket):
        q = lifetime_boosted(sf, state, u3, tol)
        q0 = lifetime_state(sf, state, tol).value if np.any(u3) else q.value
        quantum, err = q.value, q.error_estimate
        k_vec = mean_momentum(state)
        label = state.label
    else:
        k = float(state)
        quantum, err, q0 = _boosted_momentum_lifetime(sf, k, u3, tol)
        speed = np.linalg.norm(u3)
        axis = u3 / speed if speed > 0 else np.array([0.0, 0.0, 1.0])
        k_vec = k * axis
        label = f"k={k:g}"
    classical0 = kinematics.classical_lifetime_momentum(T0.value, M, float(np.linalg.norm(k_vec)))
    classical = kinematics.classical_boosted_lifetime(classical0, M, k_vec, u3)
    spread = q0 / classical0
    boost_ratio = (quantum / q0) / (classical / classical0)
    err = err + quantum / T0.value * T0.error_estimate
    return DeviationReport(quantum, classical, quantum / classical,
                           dict(spectral=sf.label, state=label, u=tuple(u3), classical_mass=M,
                                classical_momentum=tuple(k_vec), rest_lifetime=T0.value),
                           spread, boost_ratio, err)


__all__ = [
    "LifetimeResult", "DeviationReport", "lifetime_momentum_closed", "lifetime_momentum_timedomain",
    "lifetime_state", "lifetime_kernel", "lifetime_boosted", "lifetime_boosted_general",
    "lifetime_halfintegral_oracle", "diagonal_overlap_density", "tail_exponent_fit",
    "default_tail_window", "deviation_report", "CLOSED_FORM", "TIME_DOMAIN", "HALF_INTEGRAL",
]
