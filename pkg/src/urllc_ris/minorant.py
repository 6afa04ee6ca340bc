"""Per-user coefficients of the concave lower bound on the FBL rate.

Both descent steps linearize the same function of the link amplitudes
``X[k, j] = H_k w_j`` around the current point; they only differ in which
variable (beamformers or phases) the amplitudes are then expressed in.
Writing ``alpha``, ``beta`` for interference-plus-noise and total power at
the expansion point, the bound on user k reads

    rate_k >= const_k + 2 Re sum_j conj(coef[k, j] * X[k, j]) * x_kj
              - curv_k * sum_j |x_kj|^2

where ``x_kj`` is the new amplitude. ``coef[k, k] = 1/alpha_k`` comes from
the Shannon part; the off-diagonal ``a / (beta_k sqrt(v_k))`` comes from the
dispersion penalty (interference to user k lowers its dispersion).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateExpansionError

DISPERSION_FLOOR = 1e-12


@dataclass(frozen=True)
class ExpansionTerms:
    const: np.ndarray   # K, includes the noise contribution
    coef: np.ndarray    # K x K real
    curv: np.ndarray    # K, positive
    curv_shannon: np.ndarray
    curv_dispersion: np.ndarray
    active: np.ndarray  # K bool


def expansion_terms(X: np.ndarray, sigma: float, a: float, allow_inactive: bool = False) -> ExpansionTerms:
    """Bound coefficients around link amplitudes ``X`` (K x K).

    A user whose received signal power is exactly zero has no tangent to
    expand around. With ``allow_inactive`` such users are switched off:
    their rate is identically zero as long as their beamformer stays zero,
    so all their coefficients are zeroed. Otherwise
    :class:`DegenerateExpansionError` is raised.
    """
    p = np.abs(X) ** 2
    signal = np.diag(p).copy()
    active = signal > 0.0
    if not allow_inactive and not np.all(active):
        raise DegenerateExpansionError("zero SINR at the expansion point")
    beta = p.sum(axis=1) + sigma
    alpha = beta - signal
    g = signal / alpha
    rate = np.log1p(g)

    c1 = 1.0 / alpha - 1.0 / beta
    a1 = rate - g - sigma * c1

    s = np.sqrt(np.maximum(2.0 * (1.0 - alpha / beta), DISPERSION_FLOOR))
    c2 = a * alpha / (beta ** 2 * s)
    # The noise share of the (x, y) quadratic-over-linear bound carries the factor a.
    a2 = a * (0.5 * s + 1.0 / s) + a * sigma * (alpha / (beta * s)) * (-2.0 / alpha + 1.0 / beta)

    K = X.shape[0]
    coef = np.broadcast_to((a / (beta * s))[:, None], (K, K)).copy()
    np.fill_diagonal(coef, 1.0 / alpha)
    const = a1 - a2
    if not np.all(active):
        off = ~active
        coef[off] = 0.0
        for arr in (const, c1, c2):
            arr[off] = 0.0
    return ExpansionTerms(const=const, coef=coef, curv=c1 + c2, curv_shannon=c1,
                          curv_dispersion=c2, active=active)
