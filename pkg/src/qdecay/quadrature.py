"""Quadrature engines.

Three facilities are provided:

* :func:`adaptive_integrate` and :func:`integrate_pieces`, thin wrappers of
  QUADPACK (``scipy.integrate.quad``) that report failures as
  :class:`~qdecay.errors.NumericalError`.
* :func:`improper_integrate`, composite Gauss-Legendre on a growing horizon
  with a fitted power-law tail.
* A Filon-type transform for ``int g(E) exp(-i E t) dE`` at many ``t``.
  The support is cut into panels, ``g`` is projected onto Legendre
  polynomials on each panel and every term is transformed exactly with

      int_{-1}^{1} P_n(x) exp(-i w x) dx = 2 (-i)^n j_n(w).

  Panels are graded so that each one sits well inside the analyticity region
  of ``g``, which makes the per-panel expansion converge geometrically. The
  cost grows only with ``log t`` since no oscillation needs resolving.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy import integrate as spint
from scipy.special import spherical_jn

from .errors import DomainError, NumericalError

DEFAULT_QUAD_TOL = 1e-8
DEFAULT_TRANSFORM_TOL = 1e-6

ORDER = 16
_X, _W = npleg.leggauss(ORDER)
# c = g @ _PROJ.T maps samples at the nodes to Legendre coefficients
_PROJ = (npleg.legvander(_X, ORDER - 1) * _W[:, None]).T * (
    (2 * np.arange(ORDER) + 1) / 2
)[:, None]
_N = np.arange(ORDER)
_PHASE = 2.0 * (-1j) ** _N
_T_CHUNK = 256


@dataclass(frozen=True)
class QuadResult:
    """Value of an integral with its error estimate and evaluation count."""

    value: float | complex
    error_estimate: float
    evaluations: int

    def __post_init__(self):
        if not self.error_estimate >= 0:
            raise ValueError("error_estimate must be non-negative")


@dataclass(frozen=True)
class TransformGrid:
    """Uniform sampling grid for :func:`fourier_at_times`."""

    e_min: float
    e_max: float
    n_points: int
    t_values: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not self.e_max > self.e_min:
            raise DomainError("TransformGrid needs e_max > e_min")
        if self.n_points < 16:
            raise DomainError("TransformGrid needs n_points >= 16")
        object.__setattr__(self, "t_values", tuple(float(t) for t in np.atleast_1d(self.t_values)))

    @property
    def bandwidth(self) -> float:
        """Largest resolvable ``|t|``."""
        return np.pi * self.n_points / (self.e_max - self.e_min)


# ---------------------------------------------------------------------------
# adaptive quadrature


class _Counter:
    def __init__(self, f):
        self.f = f
        self.n = 0

    def __call__(self, x):
        self.n += 1
        return self.f(x)


def _quad_real(f, a, b, epsabs, epsrel, limit, points=None, **kw):
    """Run quad; return (value, error, ok)."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", spint.IntegrationWarning)
        out = spint.quad(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=limit,
                         points=points, full_output=1, **kw)
    # a fourth element (the warning message) signals ier > 0
    return out[0], out[1], len(out) == 3


def adaptive_integrate(f: Callable, a: float, b: float, tol: float = DEFAULT_QUAD_TOL,
                       *, rtol: float = 1e-13, points: Sequence[float] | None = None,
                       limit: int = 400) -> QuadResult:
    """Adaptive Gauss-Kronrod integral of a scalar function on ``[a, b]``.

    Integrable endpoint singularities are handled by QUADPACK's
    bisection with extrapolation. Complex-valued ``f`` is integrated as two
    real parts.

    Parameters
    ----------
    f : callable
        Scalar integrand; may return complex.
    a, b : float
        Limits, ``a < b``; ``b`` may be ``inf``.
    tol : float
        Absolute tolerance.
    rtol : float
        Relative tolerance passed alongside ``tol``.
    points : sequence of float, optional
        Interior breakpoints.

    Raises
    ------
    NumericalError
        When the subdivision budget is exhausted with error above ``tol``.
    """
    if not a < b:
        raise DomainError("adaptive_integrate needs a < b")
    if not tol > 0:
        raise DomainError("tol must be positive")
    g = _Counter(f)
    probe = f(a + 0.5 * (b - a)) if np.isfinite(b) and np.isfinite(a) else f(a + 1.0 if np.isfinite(a) else b - 1.0)
    pts = None if points is None else [p for p in points if a < p < b] or None
    if np.iscomplexobj(probe):
        vr, er, okr = _quad_real(lambda x: np.real(g(x)), a, b, tol / 2, rtol, limit, pts)
        vi, ei, oki = _quad_real(lambda x: np.imag(g(x)), a, b, tol / 2, rtol, limit, pts)
        value, err, ok = complex(vr, vi), float(np.hypot(er, ei)), okr and oki
    else:
        value, err, ok = _quad_real(g, a, b, tol, rtol, limit, pts)
    # QUADPACK also flags roundoff-limited results; those are not failures
    if not ok and err > max(tol, rtol * abs(value), 64 * np.finfo(float).eps * abs(value)):
        raise NumericalError(f"adaptive quadrature did not converge on [{a}, {b}]",
                             estimate=value, error=err)
    return QuadResult(value, float(err), g.n)


def integrate_pieces(f: Callable, edges: Sequence[float], tol: float = DEFAULT_QUAD_TOL,
                     *, rtol: float = 1e-13, limit: int = 200) -> QuadResult:
    """Sum of :func:`adaptive_integrate` over consecutive ``edges``.

    The absolute tolerance is shared evenly among the pieces.
    """
    edges = np.asarray(edges, dtype=float)
    n = len(edges) - 1
    total, err, nev = 0.0, 0.0, 0
    for a, b in zip(edges[:-1], edges[1:]):
        if not b > a:
            continue
        r = adaptive_integrate(f, a, b, tol / n, rtol=rtol, limit=limit)
        total = total + r.value
        err += r.error_estimate
        nev += r.evaluations
    return QuadResult(total, err, nev)


# ---------------------------------------------------------------------------
# composite Gauss-Legendre panels


def panel_nodes(edges) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights, shape ``(P, 16)``, of the composite rule on ``edges``."""
    edges = np.asarray(edges, dtype=float)
    c = 0.5 * (edges[1:] + edges[:-1])
    h = 0.5 * (edges[1:] - edges[:-1])
    return c[:, None] + h[:, None] * _X, h[:, None] * _W


def legendre_coefficients(samples: np.ndarray) -> np.ndarray:
    """Legendre coefficients of samples taken at the panel nodes (last axis)."""
    return samples @ _PROJ.T


def coefficient_error(coef: np.ndarray, half: np.ndarray) -> float:
    """Truncation error estimate ``sum_p h_p (|c_{N-2}| + |c_{N-1}|)``."""
    tail = np.abs(coef[..., -1]) + np.abs(coef[..., -2])
    return float(np.sum(tail * half))


def fourier_kernel(center: np.ndarray, half: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Kernel ``K[t, p, n]`` with ``int_panel P_n exp(-i E t) dE = K``.

    The transform of coefficients ``c[p, n]`` is ``sum_{p,n} K[t,p,n] c[p,n]``.
    """
    t = np.asarray(t, dtype=float)
    w = np.abs(np.multiply.outer(t, half))
    jn = spherical_jn(_N, w[..., None])
    sgn = np.where(t < 0, -1.0, 1.0)[:, None, None] ** _N
    return (np.exp(-1j * np.multiply.outer(t, center))[..., None]
            * (jn * sgn) * (_PHASE * half[:, None]))


def graded_edges(a: float, b: float, singularities=(), *, kappa: float = 0.2,
                 singular_a: bool = False, singular_b: bool = False,
                 eps: float = 1e-10, scale: float | None = None,
                 max_width: float | None = None) -> np.ndarray:
    """Panel edges on ``[a, b]`` graded by the distance to singular points.

    Each panel has half-width ``kappa * d(x)`` with ``d`` the distance from its
    left edge to the nearest complex singularity of the integrand (or to a
    singular endpoint). Near a singular endpoint the first panel has width
    ``eps * scale`` and is meant to be handled by a local power-law model.

    Parameters
    ----------
    singularities : array_like of complex
        Poles or branch points of the integrand's analytic continuation.
    kappa : float
        Half-width to distance ratio; 0.2 gives about 14 digits with 16 nodes.
    max_width : float, optional
        Upper bound on panel width.
    """
    if not b > a:
        raise DomainError("graded_edges needs b > a")
    sing = np.asarray(list(singularities), dtype=complex).ravel()
    scale = (b - a) if scale is None else scale
    tiny = eps * min(scale, b - a)
    cap = np.inf if max_width is None else max_width

    def dist(x):
        d = np.min(np.abs(x - sing)) if sing.size else np.inf
        if singular_a:
            d = min(d, x - a)
        if singular_b:
            d = min(d, b - x)
        return d

    out = [a]
    x = a
    if singular_a:
        x = a + tiny
        out.append(x)
    while True:
        d = dist(x)
        step = min(2.0 * kappa * d, cap)
        if not np.isfinite(step):
            step = b - x
        nx = x + step
        if singular_b and b - nx < 2 * tiny:
            # geometric approach handled by dist(); close out with a tiny panel
            if b - x > 2 * tiny:
                out.append(b - tiny)
            out.append(b)
            break
        if nx >= b:
            out.append(b)
            break
        out.append(nx)
        x = nx
        if len(out) > 200000:
            raise NumericalError("panel grading did not terminate")
    e = np.asarray(out)
    # a sliver at the end wastes a panel; merge it into its neighbour
    if len(e) > 2 and not singular_b and (e[-1] - e[-2]) < 0.1 * (e[-2] - e[-3]):
        e = np.delete(e, -2)
    return e


def _power_model_integral(beta: float, width: float, origin: float, direction: float,
                          amp: float, t: np.ndarray) -> np.ndarray:
    """``int_0^width amp x^beta exp(-i (origin + direction x) t) dx`` by series."""
    z = -1j * direction * width * t
    total = np.zeros_like(z)
    term = np.ones_like(z)
    for n in range(40):
        total = total + term / (n + beta + 1.0)
        term = term * z / (n + 1)
        if np.all(np.abs(term) < 1e-17):
            break
    return amp * width ** (beta + 1.0) * np.exp(-1j * origin * t) * total


class FilonTransform:
    """Fourier transform ``F(t) = int g(E) exp(-i E t) dE`` on fixed panels.

    Parameters
    ----------
    g : callable
        Vectorised integrand, evaluated once at all panel nodes.
    edges : array_like
        Increasing panel edges.
    endpoint_exponents : (float or None, float or None)
        Power-law exponents of ``g`` at the first/last edge. A first or last
        panel of negligible width is then integrated with the model
        ``A |E - edge|^beta`` instead of the polynomial expansion. Only needed
        for ``beta < 0``; for ``beta >= 0`` the sliver carries no weight.
    """

    def __init__(self, g: Callable, edges, endpoint_exponents=(None, None)):
        e = np.asarray(edges, dtype=float)
        if e.ndim != 1 or len(e) < 2 or np.any(np.diff(e) <= 0):
            raise DomainError("edges must be strictly increasing")
        self.edges = e
        nodes, _ = panel_nodes(e)
        samples = np.asarray(g(nodes), dtype=float)
        if not np.all(np.isfinite(samples)):
            raise NumericalError("integrand not finite at quadrature nodes")
        self.evaluations = samples.size
        self.center = 0.5 * (e[1:] + e[:-1])
        self.half = 0.5 * (e[1:] - e[:-1])
        self.models = []
        keep = np.ones(len(self.center), dtype=bool)
        for side, beta in zip((0, -1), endpoint_exponents):
            if beta is None:
                continue
            p = 0 if side == 0 else len(self.center) - 1
            edge = e[0] if side == 0 else e[-1]
            x = np.abs(nodes[p] - edge)
            amps = samples[p] / x ** beta
            amp = float(np.mean(amps))
            spread = float(np.ptp(amps)) if np.ptp(amps) > 0 else 0.0
            self.models.append((beta, 2 * self.half[p], edge, 1.0 if side == 0 else -1.0, amp, spread))
            keep[p] = False
        self.center, self.half = self.center[keep], self.half[keep]
        self.coef = legendre_coefficients(samples[keep])
        self._d = self.coef * self.half[:, None]
        err = coefficient_error(self.coef, self.half)
        for beta, width, _, _, amp, spread in self.models:
            err += spread * width ** (beta + 1) / (beta + 1)
        self.error_estimate = err

    def __call__(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.empty(t.shape, dtype=complex)
        flat = t.ravel()
        res = np.empty(flat.size, dtype=complex)
        for i in range(0, flat.size, _T_CHUNK):
            tt = flat[i:i + _T_CHUNK]
            w = np.abs(np.multiply.outer(tt, self.half))
            jn = spherical_jn(_N, w[..., None])
            jn *= np.where(tt < 0, -1.0, 1.0)[:, None, None] ** _N
            s = np.einsum("tpn,pn->tp", jn, self._d * _PHASE)
            res[i:i + _T_CHUNK] = np.sum(np.exp(-1j * np.multiply.outer(tt, self.center)) * s, axis=1)
        for beta, width, edge, direction, amp, _ in self.models:
            res += _power_model_integral(beta, width, edge, direction, amp, flat)
        out[...] = res.reshape(t.shape)
        return out

    def integral(self) -> float:
        """Zero-frequency value ``int g dE``."""
        return float(np.real(self(np.zeros(1))[0]))


def fourier_at_times(f: Callable, grid: TransformGrid, tol: float = DEFAULT_TRANSFORM_TOL) -> list:
    """``int f(E) exp(-i E t) dE`` over ``[e_min, e_max]`` at ``grid.t_values``.

    ``f`` is sampled at ``n_points`` nodes of a uniform composite
    Gauss-Legendre rule (rounded up to panels of 16) and each panel is
    transformed exactly for its Legendre interpolant. ``f`` should be
    vectorised; scalar functions are wrapped with :func:`numpy.vectorize`.

    Raises
    ------
    DomainError
        ``time exceeds grid bandwidth`` if any ``|t| > pi n / (e_max - e_min)``.
    NumericalError
        If the interpolation error estimate exceeds ``tol`` times the
        integral of ``|f|``.
    """
    t = np.asarray(grid.t_values, dtype=float)
    if t.size and np.max(np.abs(t)) > grid.bandwidth * (1 + 1e-12):
        raise DomainError("time exceeds grid bandwidth")
    npan = -(-grid.n_points // ORDER)
    edges = np.linspace(grid.e_min, grid.e_max, npan + 1)

    def g(x):
        try:
            y = np.asarray(f(x), dtype=float)
            if y.shape == x.shape:
                return y
        except (TypeError, ValueError):
            pass
        return np.vectorize(f, otypes=[float])(x)

    ft = FilonTransform(g, edges)
    scale = float(np.sum(np.abs(ft.coef[:, 0]) * 2 * ft.half)) or 1.0
    if ft.error_estimate > tol * scale:
        raise NumericalError("sampling too coarse for the requested transform tolerance",
                             error=ft.error_estimate)
    return list(ft(t))


# ---------------------------------------------------------------------------
# improper integrals


def fit_power_law(t: np.ndarray, y: np.ndarray) -> float:
    """Least-squares exponent ``beta`` of ``|y| ~ C t^(-beta)``."""
    t, y = np.asarray(t, float), np.abs(np.asarray(y, float))
    ok = y > 0
    if ok.sum() < 2:
        return np.inf
    slope = np.polyfit(np.log(t[ok]), np.log(y[ok]), 1)[0]
    return float(-slope)


def improper_integrate(f: Callable, a: float, tol: float = DEFAULT_QUAD_TOL,
                       tail_model: float | None = None, *, edges=None,
                       scale: float = 1.0, growth: float = 1.5,
                       max_horizon: float | None = None,
                       vectorized: bool = False,
                       pointwise_error: bool = False) -> QuadResult:
    """``int_a^inf f(t) dt`` for ``f`` with a power-law or faster tail.

    The integral is accumulated on composite Gauss-Legendre panels whose
    widths grow geometrically (ratio ``growth``) past the supplied ``edges``.
    At each horizon ``T`` the exponent ``beta`` of ``f ~ t^(-beta)`` is fitted
    on ``[T/10, T]`` and the tail ``T f(T)/(beta - 1)`` is estimated; the
    loop stops once it is below ``tol / 10`` and the tail is added.

    Parameters
    ----------
    f : callable
        Integrand.
    a : float
        Lower limit.
    tol : float
        Absolute tolerance.
    tail_model : float, optional
        Expected exponent ``beta > 1``. A fitted exponent ten times smaller
        is an error; faster decay is accepted.
    edges : array_like, optional
        Initial panel edges starting at ``a``. By default panels of width
        ``scale`` graded geometrically toward ``a``.
    max_horizon : float, optional
        Largest horizon; defaults to ``1e12 * scale``.
    vectorized : bool
        Whether ``f`` accepts arrays.
    pointwise_error : bool
        If true, vectorised ``f`` returns a ``(2, n)`` array of values and
        absolute error bounds; the bounds are integrated into the result's
        error estimate.

    Raises
    ------
    NumericalError
        ``tail model mismatch`` when the fitted exponent conflicts with the
        hint or is not integrable; also when the horizon is exhausted.
    """
    if tail_model is not None and not tail_model > 1:
        raise DomainError("tail_model exponent must exceed 1")
    if pointwise_error and not vectorized:
        raise DomainError("pointwise_error needs a vectorized integrand")
    F = f if vectorized else np.vectorize(f, otypes=[float])
    if pointwise_error:
        pair = F

        def F(x):
            return pair(x)[0]
    if edges is None:
        edges = a + scale * np.concatenate([[0.0], 0.6 ** np.arange(30, 0, -1), np.arange(1, 11)])
    edges = np.asarray(edges, dtype=float)
    if edges[0] != a or np.any(np.diff(edges) <= 0):
        raise DomainError("edges must start at a and increase")
    max_horizon = (1e12 * scale) if max_horizon is None else max_horizon

    def integrate(e):
        x, w = panel_nodes(e)
        if pointwise_error:
            ye = np.asarray(pair(x.ravel()), dtype=float)
            y, yerr = ye[0].reshape(x.shape), float(np.sum(ye[1] * w.ravel()))
        else:
            y, yerr = np.asarray(F(x.ravel()), dtype=float).reshape(x.shape), 0.0
        c = legendre_coefficients(y)
        return float(np.sum(y * w)), coefficient_error(c, 0.5 * np.diff(e)) + yerr, y.size

    total, err, nev = integrate(edges)
    T = edges[-1]
    lo = edges[0]
    while True:
        probe_t = np.geomspace(max(T / 10, lo + (T - lo) / 10), T, 9)
        probe = np.asarray(F(probe_t), dtype=float)
        nev += probe.size
        beta = fit_power_law(probe_t - a if a != 0 else probe_t, probe)
        fT = probe[-1]
        if fT == 0.0:
            tail, tail_err = 0.0, 0.0
        elif beta > 1:
            tail = (T - a) * fT / (beta - 1)
            alt = (T - a) * fT / (tail_model - 1) if tail_model is not None else tail
            tail_err = abs(tail - alt) + 0.1 * abs(tail)
        else:
            tail, tail_err = np.inf, np.inf
        mismatch = (tail_model is not None and beta * 10 < tail_model) or beta <= 1
        if abs(tail) < 0.1 * tol and not mismatch:
            break
        if T >= max_horizon:
            if mismatch:
                raise NumericalError("tail model mismatch", estimate=total, error=abs(tail))
            raise NumericalError("horizon exhausted before the tail converged",
                                 estimate=total + tail, error=err + tail_err)
        # extend the horizon by a factor ~2 with geometric panels
        new = [T]
        while new[-1] < 2 * T:
            new.append(new[-1] + (growth - 1) * new[-1] if new[-1] > 0 else scale)
        v, e_, n_ = integrate(np.asarray(new))
        total += v
        err += e_
        nev += n_
        T = new[-1]
    return QuadResult(total + tail, err + tail_err, nev)


__all__ = [
    "QuadResult", "TransformGrid", "adaptive_integrate", "integrate_pieces",
    "improper_integrate", "fourier_at_times", "FilonTransform", "graded_edges",
    "panel_nodes", "legendre_coefficients", "coefficient_error", "fourier_kernel",
    "fit_power_law", "DEFAULT_QUAD_TOL", "DEFAULT_TRANSFORM_TOL",
]
