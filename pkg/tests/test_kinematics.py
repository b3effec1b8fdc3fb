import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qdecay.errors import DomainError
from qdecay.kinematics import (FourVector, FourVelocity, Hyperplane, ThreeVelocity, boost,
                               classical_boosted_lifetime, classical_lifetime_momentum,
                               classical_lifetime_velocity, compose_velocities, gamma, minkowski_dot,
                               momentum_velocity)

speeds = st.floats(-0.95, 0.95)
vel3 = st.tuples(speeds, speeds, speeds).filter(lambda v: np.linalg.norm(v) < 0.95)


def test_gamma_values():
    np.testing.assert_allclose(gamma(0.0), 1.0)
    np.testing.assert_allclose(gamma([0, 0, 0.6]), 1.25, rtol=1e-15)
    np.testing.assert_allclose(gamma(ThreeVelocity((0.8, 0, 0))), 5 / 3, rtol=1e-15)


@pytest.mark.parametrize("u", [1.0, 1 - 1e-10, [0.6, 0.6, 0.6]])
def test_superluminal_rejected(u):
    with pytest.raises(DomainError):
        gamma(u)


def test_classical_lifetimes():
    assert classical_lifetime_velocity(2.0, [0, 0, 0.6]) == pytest.approx(2.5)
    assert classical_lifetime_momentum(1.0, 1.0, 0.75) == pytest.approx(1.25)
    with pytest.raises(DomainError):
        classical_lifetime_momentum(-1.0, 1.0, 0.5)


def test_composition_collinear():
    w = compose_velocities([0, 0, 0.5], [0, 0, 0.5])
    np.testing.assert_allclose(np.asarray(w), [0, 0, 0.8], atol=1e-15)


def test_composition_not_commutative():
    u, v = [0.6, 0, 0], [0, 0.6, 0]
    a, b = np.asarray(compose_velocities(u, v)), np.asarray(compose_velocities(v, u))
    assert not np.allclose(a, b)
    np.testing.assert_allclose(np.linalg.norm(a), np.linalg.norm(b), rtol=1e-14)


@settings(max_examples=50, deadline=None)
@given(vel3, vel3)
def test_composition_gamma_law(u, v):
    # gamma(w) = gamma(u) gamma(v) (1 + u.v)
    w = compose_velocities(u, v)
    np.testing.assert_allclose(gamma(w), gamma(u) * gamma(v) * (1 + np.dot(u, v)), rtol=1e-9)


@settings(max_examples=50, deadline=None)
@given(vel3, st.tuples(*[st.floats(-5, 5)] * 4))
def test_boost_preserves_minkowski_norm(u, x):
    y = boost(u, x)
    np.testing.assert_allclose(minkowski_dot(y, y), minkowski_dot(x, x), atol=1e-9 * (1 + np.dot(x, x)))


def test_boost_rest_axis():
    u = np.array([0.3, 0.0, 0.4])
    eta = boost(u, [1, 0, 0, 0])
    np.testing.assert_allclose(eta.to_array(), gamma(u) * np.array([1, *u]), rtol=1e-15)
    fv = FourVelocity.from_velocity(u)
    np.testing.assert_allclose(fv.velocity, u, rtol=1e-14)


def test_boost_momentum():
    # B(u)(0, k) = (gamma u.k, k_perp + gamma k_par)
    u, k = np.array([0, 0, 0.6]), np.array([0.2, 0.0, 1.0])
    p = boost(u, np.concatenate([[0], k]))
    np.testing.assert_allclose(p.t_component, 1.25 * 0.6)
    np.testing.assert_allclose(p.space, [0.2, 0, 1.25], rtol=1e-15)


def test_four_velocity_validation():
    with pytest.raises(DomainError):
        FourVelocity(FourVector(1.0, (0.5, 0.0, 0.0)))
    with pytest.raises(DomainError):
        FourVelocity(FourVector(-1.0, (0.0, 0.0, 0.0)))


def test_hyperplane_and_helpers():
    h = Hyperplane(FourVelocity.from_velocity([0, 0, 0.6]), 2.0)
    assert h.offset == 2.0
    np.testing.assert_allclose(momentum_velocity(1.0, [0, 0, 0.75]), [0, 0, 0.6])
    np.testing.assert_allclose(classical_boosted_lifetime(1.25, 1.0, [0, 0, 0.75], [0, 0, 0.6]),
                               1.25 * 1.36 * 1.25, rtol=1e-15)
