"""SINR, Shannon and finite-blocklength rates, plus the fairness metrics.

Rates are in nats/s/Hz unless a function says otherwise.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .channel import ChannelSet, SystemParams, effective_channels, wrap_angles
from .errors import ContractError
from .numerics import inverse_q

__all__ = [
    "Design",
    "RateReport",
    "cross_gains",
    "alpha_beta",
    "sinr",
    "sinrs",
    "dispersion",
    "a_coeff",
    "urllc_rate",
    "urllc_rates",
    "shannon_rates",
    "weighted_objective",
    "metrics",
    "to_bps",
    "rate_report",
]

LOG2E = math.log2(math.e)


@dataclass(frozen=True, eq=False)
class Design:
    """Beamformers (K x M, row k serves user k) and RIS phases (length N)."""

    w: np.ndarray
    theta: np.ndarray

    def __post_init__(self):
        w = np.atleast_2d(np.array(self.w, dtype=complex))
        w.setflags(write=False)
        theta = wrap_angles(np.atleast_1d(self.theta))
        theta.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "theta", theta)

    @property
    def power(self) -> float:
        return float(np.sum(np.abs(self.w) ** 2))

    def is_feasible(self, P: float, slack: float = 1e-9) -> bool:
        return self.power <= P * (1.0 + slack)


def cross_gains(cs: ChannelSet, design: Design) -> np.ndarray:
    """Matrix ``X[k, j] = H_k(theta) w_j`` of complex link amplitudes."""
    return effective_channels(cs, design.theta) @ design.w.T


def _alpha_beta_all(cs: ChannelSet, design: Design):
    p = np.abs(cross_gains(cs, design)) ** 2
    signal = np.diag(p).copy()
    beta = p.sum(axis=1) + cs.sigma
    alpha = beta - signal
    return alpha, beta, signal


def alpha_beta(cs: ChannelSet, k: int, design: Design) -> tuple[float, float]:
    """Interference-plus-noise ``alpha`` and total received power ``beta`` of user k."""
    if not 0 <= k < cs.K:
        raise IndexError(k)
    alpha, beta, _ = _alpha_beta_all(cs, design)
    return float(alpha[k]), float(beta[k])


def sinrs(cs: ChannelSet, design: Design) -> np.ndarray:
    alpha, _, signal = _alpha_beta_all(cs, design)
    return signal / alpha


def sinr(cs: ChannelSet, k: int, design: Design) -> float:
    if not 0 <= k < cs.K:
        raise IndexError(k)
    return float(sinrs(cs, design)[k])


def dispersion(g):
    """Channel dispersion ``2g / (1 + g)`` of an SINR ``g >= 0``."""
    g = np.asarray(g, dtype=float)
    out = 2.0 * g / (1.0 + g)
    return float(out) if out.ndim == 0 else out


def a_coeff(params: SystemParams) -> float:
    """Rate back-off coefficient ``Q^{-1}(eps_c) / sqrt(B * t_t)``."""
    n = params.B * params.t_t
    if not n > 0:
        raise ContractError("blocklength must be positive")
    return inverse_q(params.eps_c) / math.sqrt(n)


def _fbl(g: np.ndarray, a: float) -> np.ndarray:
    return np.log1p(g) - a * np.sqrt(2.0 * g / (1.0 + g))


def shannon_rates(cs: ChannelSet, design: Design) -> np.ndarray:
    return np.log1p(sinrs(cs, design))


def urllc_rates(cs: ChannelSet, design: Design, a: float) -> np.ndarray:
    """Finite-blocklength rates of all users; ``a = 0`` gives Shannon rates."""
    return _fbl(sinrs(cs, design), a)


def urllc_rate(cs: ChannelSet, k: int, design: Design, a: float) -> float:
    if not 0 <= k < cs.K:
        raise IndexError(k)
    return float(urllc_rates(cs, design, a)[k])


def weighted_objective(cs: ChannelSet, design: Design, weights, a: float) -> float:
    return float(np.dot(np.asarray(weights, dtype=float), urllc_rates(cs, design, a)))


def metrics(rates) -> tuple[float, float, float, float]:
    """Geometric mean, arithmetic mean, min/max ratio and population variance.

    Negative entries (users whose dispersion penalty exceeds their Shannon
    rate) count as zero rate for the geometric mean and the min/max ratio.
    """
    r = np.asarray(rates, dtype=float)
    if r.size == 0 or not np.all(np.isfinite(r)):
        raise ContractError("rates must be a non-empty finite vector")
    clipped = np.clip(r, 0.0, None)
    gm = 0.0 if np.any(clipped <= 0) else float(np.exp(np.mean(np.log(clipped))))
    am = float(np.mean(r))
    top = float(clipped.max())
    rr = 0.0 if top == 0.0 else float(clipped.min() / top)
    urv = float(np.var(r))
    return gm, am, rr, urv


def to_bps(nats):
    """nats/s/Hz -> bits/s/Hz."""
    if np.ndim(nats) == 0:
        return float(nats) * LOG2E
    return np.asarray(nats, dtype=float) * LOG2E


@dataclass
class RateReport:
    per_user_shannon: np.ndarray
    per_user_urllc: np.ndarray
    sinr: np.ndarray
    dispersion: np.ndarray
    gm: float
    am: float
    rr: float
    urv: float
    a_coeff: float

    def to_dict(self) -> dict:
        d = asdict(self)
        for key, val in d.items():
            if isinstance(val, np.ndarray):
                d[key] = val.tolist()
        return d

    def csv_row(self) -> dict:
        """Flat row in bps/Hz for tabular export."""
        row = {"gm_bps": to_bps(self.gm), "am_bps": to_bps(self.am), "rr": self.rr,
               "urv": self.urv * LOG2E ** 2, "a_coeff": self.a_coeff}
        for k, (rs, ru) in enumerate(zip(self.per_user_shannon, self.per_user_urllc)):
            row[f"shannon_bps_{k}"] = to_bps(rs)
            row[f"urllc_bps_{k}"] = to_bps(ru)
        return row


def rate_report(cs: ChannelSet, design: Design, a: float) -> RateReport:
    g = sinrs(cs, design)
    shannon = np.log1p(g)
    fbl = _fbl(g, a)
    gm, am, rr, urv = metrics(fbl)
    return RateReport(per_user_shannon=shannon, per_user_urllc=fbl, sinr=g,
                      dispersion=dispersion(g), gm=gm, am=am, rr=rr, urv=urv, a_coeff=a)
