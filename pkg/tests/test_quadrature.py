import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qdecay.errors import DomainError, NumericalError
from qdecay.quadrature import (FilonTransform, TransformGrid, adaptive_integrate, fit_power_law,
                               fourier_at_times, graded_edges, improper_integrate, integrate_pieces)
from qdecay.spectral import lorentzian


def test_adaptive_basic():
    r = adaptive_integrate(lambda x: 1.0, 0, 1, 1e-12)
    np.testing.assert_allclose(r.value, 1.0, atol=1e-12)
    assert r.error_estimate >= 0 and r.evaluations > 0


def test_adaptive_endpoint_singularity():
    r = adaptive_integrate(lambda x: x**-0.5, 0, 1, 1e-8)
    np.testing.assert_allclose(r.value, 2.0, atol=1e-8)


def test_adaptive_complex():
    r = adaptive_integrate(lambda x: np.exp(1j * x), 0, np.pi, 1e-12)
    np.testing.assert_allclose(r.value, 2j, atol=1e-12)


def test_adaptive_spectral(standard_bw):
    r = integrate_pieces(standard_bw, standard_bw.breakpoints(), 1e-10)
    np.testing.assert_allclose(r.value, 1.0, atol=1e-10)


def test_adaptive_failure_raises():
    with pytest.raises(NumericalError):
        adaptive_integrate(lambda x: np.sin(1 / x) / x**1.5, 1e-12, 1, 1e-14, limit=5)


def test_improper_examples():
    r = improper_integrate(np.exp, 0.0, 1e-8, vectorized=True) if False else \
        improper_integrate(lambda t: np.exp(-t), 0.0, 1e-8, vectorized=True)
    np.testing.assert_allclose(r.value, 1.0, atol=1e-8)
    r = improper_integrate(lambda t: (1 + t) ** -3.0, 0.0, 1e-8, 3.0, vectorized=True)
    np.testing.assert_allclose(r.value, 0.5, atol=1e-6)


def test_improper_mismatch():
    with pytest.raises(NumericalError, match="tail model mismatch"):
        improper_integrate(lambda t: (1 + t) ** -1.0, 0.0, 1e-6, 4.0, vectorized=True,
                           max_horizon=1e6)


def test_improper_pointwise_error():
    r = improper_integrate(lambda t: np.stack([np.exp(-t), np.full(t.shape, 1e-9) * np.exp(-t)]),
                           0.0, 1e-10, vectorized=True, pointwise_error=True)
    np.testing.assert_allclose(r.value, 1.0, atol=1e-9)
    assert r.error_estimate >= 1e-9 * 0.99


def test_fourier_zero_frequency_and_lorentzian():
    E0, G = 2.0, 0.2
    f = (lambda E: lorentzian(E, E0, G))
    grid = TransformGrid(E0 - 400, E0 + 400, 160000, (0.0, 1.0, 5.0, 10.0))
    out = np.array(fourier_at_times(f, grid, tol=1e-6))
    ref = adaptive_integrate(f, E0 - 400, E0 + 400, 1e-12, points=[E0]).value
    np.testing.assert_allclose(out[0].real, ref, rtol=1e-8)
    # truncating at +-400 widths leaves a ~1e-4 non-exponential remainder
    np.testing.assert_allclose(np.abs(out[1:]), np.exp(-G * np.array([1, 5, 10]) / 2), atol=2e-3)


def test_fourier_linearity_and_conjugation():
    f = (lambda E: np.exp(-E * E))
    g = (lambda E: 1 / (1 + E * E))
    t = (-3.0, -0.5, 0.5, 3.0)
    grid = TransformGrid(-20, 20, 2048, t)
    a, b = np.array(fourier_at_times(f, grid)), np.array(fourier_at_times(g, grid))
    c = np.array(fourier_at_times(lambda E: f(E) + g(E), grid))
    np.testing.assert_allclose(c, a + b, atol=1e-10)
    np.testing.assert_allclose(a[:2], np.conj(a[::-1][:2]), atol=1e-12)


def test_fourier_bandwidth():
    grid = TransformGrid(0, 10, 32, (100.0,))
    with pytest.raises(DomainError, match="bandwidth"):
        fourier_at_times(np.cos, grid)


def test_transform_grid_validation():
    with pytest.raises(DomainError):
        TransformGrid(1, 0, 32)
    with pytest.raises(DomainError):
        TransformGrid(0, 1, 8)


def test_filon_exact_gaussian():
    e = graded_edges(-12, 12, [1j, -1j], kappa=0.2)
    ft = FilonTransform(lambda E: np.exp(-E * E / 2), e)
    t = np.array([0.0, 1.0, 4.0, 30.0])
    np.testing.assert_allclose(ft(t), np.sqrt(2 * np.pi) * np.exp(-t * t / 2), atol=1e-13)
    assert ft.error_estimate < 1e-10


def test_filon_endpoint_model():
    # int_0^1 x^(-1/2) e^{-ixt} dx; the first panel carries the power law
    e = graded_edges(0, 1, [], singular_a=True, eps=1e-10)
    ft = FilonTransform(lambda x: x**-0.5, e, (-0.5, None))
    np.testing.assert_allclose(ft.integral(), 2.0, rtol=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.floats(1.5, 6.0), st.floats(0.5, 5.0))
def test_fit_power_law_property(beta, c):
    t = np.geomspace(10, 1000, 20)
    np.testing.assert_allclose(fit_power_law(t, c * t**-beta), beta, rtol=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3), st.floats(0.01, 1), st.floats(0.05, 0.3))
def test_graded_edges_property(x0, d, kappa):
    e = graded_edges(-5, 5, [complex(x0, d)], kappa=kappa)
    assert e[0] == -5 and e[-1] == 5 and np.all(np.diff(e) > 0)
    # no panel is wider than twice kappa times its distance to the pole
    dist = np.abs(e[:-1] - complex(x0, d))
    assert np.all(np.diff(e)[:-1] <= 2 * kappa * dist[:-1] * (1 + 1e-12))
