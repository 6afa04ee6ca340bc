"""Beamformer update at fixed RIS phases.

The weighted FBL objective is minorized by a concave quadratic in the
beamformers that shares one curvature matrix across users; maximizing it
under the sum-power budget has a closed form up to a scalar water level.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelSet, effective_channels
from .errors import ContractError
from .minorant import expansion_terms
from .numerics import bisect_root
from .rates import Design

__all__ = ["SurrogateQuadratic", "build_bf_surrogate", "solve_bf_qp", "bf_iteration", "qp_power"]

# Relative eigenvalue level below which the curvature matrix is treated as singular.
NULL_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class SurrogateQuadratic:
    """``const + 2 Re sum_k <linear_k, w_k> - sum_k w_k^H quad w_k``."""

    const_term: float
    linear: np.ndarray  # K x M
    quad: np.ndarray    # M x M Hermitian PSD
    active: np.ndarray | None = None

    def with_proximal(self, center, tau: float) -> "SurrogateQuadratic":
        """Subtract ``tau * ||w - center||^2``; still a minorant, tight at ``center``."""
        center = np.atleast_2d(center)
        M = self.quad.shape[0]
        return SurrogateQuadratic(
            self.const_term - tau * float(np.sum(np.abs(center) ** 2)),
            self.linear + tau * center,
            self.quad + tau * np.eye(M),
            self.active,
        )

    def value(self, w) -> float:
        w = np.atleast_2d(w)
        lin = np.real(np.sum(np.conj(self.linear) * w))
        quad = np.real(np.einsum("km,mn,kn->", np.conj(w), self.quad, w))
        return float(self.const_term + 2.0 * lin - quad)


def build_bf_surrogate(cs: ChannelSet, design: Design, weights, a: float,
                       allow_inactive: bool = False) -> SurrogateQuadratic:
    """Concave quadratic minorant of ``sum_k weights_k * rate_k(w, theta)`` in ``w``.

    Tight at ``design.w``. Raises :class:`DegenerateExpansionError` if some
    user has zero SINR there, unless ``allow_inactive`` (see
    :func:`~urllc_ris.minorant.expansion_terms`).
    """
    gamma = np.asarray(weights, dtype=float)
    Hc = effective_channels(cs, design.theta)
    X = Hc @ design.w.T
    t = expansion_terms(X, cs.sigma, a, allow_inactive)
    T = gamma[:, None] * t.coef * X
    linear = T.T @ np.conj(Hc)
    quad = (np.conj(Hc).T * (gamma * t.curv)) @ Hc
    quad = 0.5 * (quad + quad.conj().T)
    linear[~t.active] = 0.0
    return SurrogateQuadratic(float(np.dot(gamma, t.const)), linear, quad, t.active)


def _spectral(surr: SurrogateQuadratic):
    lam, U = np.linalg.eigh(surr.quad)
    top = max(float(lam[-1]), 0.0)
    keep = lam > NULL_RTOL * top if top > 0 else np.zeros(lam.shape, dtype=bool)
    C = U.conj().T @ surr.linear.T  # M x K coordinates of each linear term
    return lam[keep], U[:, keep], C[keep]


def qp_power(surr: SurrogateQuadratic, mu: float) -> float:
    """Total power of the ridge solution ``(quad + mu I)^{-1} linear_k``."""
    lam, _, C = _spectral(surr)
    return float(np.sum(np.abs(C) ** 2 / (lam + mu)[:, None] ** 2))


def solve_bf_qp(surr: SurrogateQuadratic, P: float, return_mu: bool = False):
    """Maximize the surrogate subject to ``sum_k ||w_k||^2 <= P``.

    Components of the linear terms along the numerical null space of the
    curvature matrix are dropped (they are rounding residue: every linear
    term lies in the range of the curvature). The unconstrained maximizer is
    used when it fits the budget, otherwise the water level ``mu`` is found
    by bisection so that the budget is met with equality.
    """
    if not P > 0:
        raise ContractError("power budget must be positive")
    K, M = surr.linear.shape
    lam, U, C = _spectral(surr)
    if lam.size == 0 or not np.any(C):
        w = np.zeros((K, M), dtype=complex)
        return (w, 0.0) if return_mu else w

    weight = np.sum(np.abs(C) ** 2, axis=1)

    def excess(mu):
        return float(np.sum(weight / (lam + mu) ** 2)) - P

    mu = 0.0
    if excess(0.0) > 0.0:
        # sum(weight) / mu^2 <= P at mu = sqrt(sum(weight) / P); doubled for rounding headroom
        mu_hi = 2.0 * np.sqrt(np.sum(weight) / P) + float(lam[-1])
        mu = bisect_root(excess, 0.0, mu_hi, tol=1e-14 * P, xtol=1e-16)
    w = (U @ (C / (lam + mu)[:, None])).T
    return (w, mu) if return_mu else w


def bf_iteration(cs: ChannelSet, design: Design, weights, a: float, P: float,
                 allow_inactive: bool = False, damping: float = 0.0) -> Design:
    """One beamformer ascent step; phases are left untouched.

    ``damping > 0`` adds a proximal term scaled by ``damping`` times the top
    curvature eigenvalue, which shortens the step.
    """
    surr = build_bf_surrogate(cs, design, weights, a, allow_inactive)
    if damping > 0:
        top = float(np.linalg.eigvalsh(surr.quad)[-1])
        surr = surr.with_proximal(design.w, damping * max(top, np.finfo(float).tiny))
    w = solve_bf_qp(surr, P)
    w[~surr.active] = 0.0
    return Design(w, design.theta)
