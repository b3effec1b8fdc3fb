"""Survival probabilities and lifetimes of unstable relativistic states.

Natural units (hbar = c = 1) and the metric signature (+, -, -, -) are used
throughout.
"""
__version__ = "0.1.0"

from .errors import DomainError, NumericalError
from .kinematics import (FourVector, FourVelocity, Hyperplane, ThreeVelocity, boost,
                         classical_boosted_lifetime, classical_lifetime_momentum,
                         classical_lifetime_velocity, compose_velocities, gamma, minkowski_dot)
from .spectral import (SpectralFunction, make_analytic_breit_wigner, make_truncated_breit_wigner,
                       weighted_integral)
from .states import GaussianProfile, Wavepacket, make_gaussian_state, mean_momentum
from .survival import (SurvivalCurve, boosted_survival_probability, naive_boosted_amplitude_modulus,
                       survival_amplitude, survival_curve, survival_probability_momentum,
                       survival_probability_state)
from .lifetime import (DeviationReport, LifetimeResult, deviation_report, diagonal_overlap_density,
                       lifetime_boosted, lifetime_boosted_general, lifetime_halfintegral_oracle,
                       lifetime_kernel, lifetime_momentum_closed, lifetime_momentum_timedomain,
                       lifetime_state, tail_exponent_fit)

__all__ = [
    "DomainError", "NumericalError",
    "FourVector", "FourVelocity", "Hyperplane", "ThreeVelocity", "boost", "gamma", "minkowski_dot",
    "compose_velocities", "classical_lifetime_velocity", "classical_lifetime_momentum",
    "classical_boosted_lifetime",
    "SpectralFunction", "make_truncated_breit_wigner", "make_analytic_breit_wigner", "weighted_integral",
    "GaussianProfile", "Wavepacket", "make_gaussian_state", "mean_momentum",
    "SurvivalCurve", "survival_amplitude", "survival_probability_momentum", "survival_probability_state",
    "naive_boosted_amplitude_modulus", "boosted_survival_probability", "survival_curve",
    "LifetimeResult", "DeviationReport", "lifetime_momentum_closed", "lifetime_momentum_timedomain",
    "lifetime_state", "lifetime_kernel", "lifetime_boosted", "lifetime_boosted_general",
    "lifetime_halfintegral_oracle", "diagonal_overlap_density", "tail_exponent_fit", "deviation_report",
]
