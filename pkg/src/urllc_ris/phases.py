"""RIS phase update at fixed beamformers.

The weighted FBL objective is first minorized by a quadratic form in
``u = exp(1j*theta)``; the quadratic part is then replaced by its
``lambda_max`` majorizer so the bound separates over elements and every
phase has a closed-form maximizer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet, effective_channels, wrap_angles
from .minorant import expansion_terms
from .numerics import lambda_max_upper
from .rates import Design

__all__ = ["PhaseSurrogate", "build_pre_surrogate", "solve_phase", "pre_iteration"]


@dataclass(frozen=True, eq=False)
class PhaseSurrogate:
    const_term: float
    btilde: np.ndarray     # N, linear coefficients of the quadratic bound
    lin_coeff: np.ndarray  # N, linear coefficients after majorization
    lambda_max: float
    psi_hat: np.ndarray    # N x N Hermitian PSD
    theta0: np.ndarray
    offset: float = 0.0    # constant of an added proximal term

    def with_proximal(self, tau: float) -> "PhaseSurrogate":
        """Subtract ``tau * ||exp(1j*theta) - exp(1j*theta0)||^2``."""
        u0 = np.exp(1j * self.theta0)
        return PhaseSurrogate(self.const_term, self.btilde, self.lin_coeff + tau * np.conj(u0),
                              self.lambda_max, self.psi_hat, self.theta0,
                              self.offset - 2.0 * tau * u0.size)

    def quadratic_bound(self, theta) -> float:
        """Quadratic-in-``exp(1j*theta)`` minorant of the weighted objective."""
        u = np.exp(1j * np.asarray(theta, dtype=float))
        return float(self.const_term + 2.0 * np.real(np.dot(self.btilde, u))
                     - np.real(np.vdot(u, self.psi_hat @ u)))

    def value(self, theta) -> float:
        """Separable minorant maximized by :func:`solve_phase`."""
        u = np.exp(1j * np.asarray(theta, dtype=float))
        u0 = np.exp(1j * self.theta0)
        n = u0.size
        const = (self.const_term + self.offset + np.real(np.vdot(u0, self.psi_hat @ u0))
                 - 2.0 * self.lambda_max * n)
        return float(const + 2.0 * np.real(np.dot(self.lin_coeff, u)))


def build_pre_surrogate(cs: ChannelSet, design: Design, weights, a: float,
                        allow_inactive: bool = False) -> PhaseSurrogate:
    """Separable minorant of the weighted objective in the RIS phases.

    The intermediate :meth:`PhaseSurrogate.quadratic_bound` minorizes the
    weighted objective at fixed beamformers; :meth:`PhaseSurrogate.value`
    minorizes that bound in turn. Both are tight at ``design.theta``.
    """
    gamma = np.asarray(weights, dtype=float)
    theta0 = design.theta
    u0 = np.exp(1j * theta0)
    X = effective_channels(cs, theta0) @ design.w.T
    t = expansion_terms(X, cs.sigma, a, allow_inactive)

    h = cs.h_eff_base
    Y = design.w @ cs.H_BR.T  # Y[j, n]: element n's BS->RIS amplitude for stream j
    T = gamma[:, None] * t.coef * np.conj(X)
    btilde = np.sum(h * (T @ Y), axis=0)

    gram = np.conj(Y).T @ Y
    user_mix = (np.conj(h).T * (gamma * t.curv)) @ h
    psi_hat = gram * user_mix
    psi_hat = 0.5 * (psi_hat + psi_hat.conj().T)

    lam = lambda_max_upper(psi_hat)
    lin = btilde - np.conj(psi_hat @ u0) + lam * np.conj(u0)
    return PhaseSurrogate(float(np.dot(gamma, t.const)), btilde, lin, lam, psi_hat, theta0.copy())


def solve_phase(surr: PhaseSurrogate) -> np.ndarray:
    """Per-element maximizer: rotate each coefficient onto the positive real axis."""
    theta = wrap_angles(-np.angle(surr.lin_coeff))
    tie = surr.lin_coeff == 0
    theta[tie] = surr.theta0[tie]
    return theta


def pre_iteration(cs: ChannelSet, design: Design, weights, a: float,
                  allow_inactive: bool = False, damping: float = 0.0) -> Design:
    surr = build_pre_surrogate(cs, design, weights, a, allow_inactive)
    if damping > 0:
        surr = surr.with_proximal(damping * max(surr.lambda_max, np.finfo(float).tiny))
    return Design(design.w, solve_phase(surr))
