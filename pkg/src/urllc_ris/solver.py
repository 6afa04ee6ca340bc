"""Alternating beamformer / phase ascent for GM-rate or sum-rate maximization.

Each round recomputes the user weights from the current rates, takes one
beamformer step and one phase step on the weighted sum of rates, and checks
the relative change of the tracked objective (GM of rates, or the plain sum
of rates in SR modes) against ``nu_t``.

A solve always starts with a long-blocklength run (``a = 0``) of the same
weighting rule from a cold start; the requested mode then continues from
that point with its own ``a``. If that point leaves some finite-blocklength
rate at or below zero, GM weights are undefined there and a continuation
stage (:func:`_lift`) first raises every rate above zero.
"""

from __future__ import annotations

import csv
import enum
import io
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .beamforming import bf_iteration
from .channel import ChannelSet, SystemParams, effective_channels
from .errors import (ContractError, DegenerateExpansionError, InitializationError,
                     NonPositiveRateError)
from .numerics import RngStream
from .phases import pre_iteration
from .rates import Design, RateReport, a_coeff, metrics, rate_report, sinrs, urllc_rates

__all__ = [
    "Mode",
    "SolverConfig",
    "IterRecord",
    "IterTrace",
    "SolveResult",
    "update_weights",
    "cold_start",
    "initialize",
    "solve",
]

log = logging.getLogger(__name__)


class Mode(str, enum.Enum):
    GM_URLLC = "GM-URLLC"
    GM_LBL = "GM-LBL"
    SR_URLLC = "SR-URLLC"
    SR_LBL = "SR-LBL"

    @property
    def fair(self) -> bool:
        return self.value.startswith("GM")

    @property
    def finite_blocklength(self) -> bool:
        return self.value.endswith("URLLC")

    @property
    def lbl_counterpart(self) -> "Mode":
        return Mode.GM_LBL if self.fair else Mode.SR_LBL


@dataclass(frozen=True)
class SolverConfig:
    mode: Mode = Mode.GM_URLLC
    nu_t: float = 1e-3
    max_iters: int = 500
    init: Design | None = None
    a_override: float | None = None
    safeguard: bool = True
    max_backtracks: int = 20

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not self.nu_t > 0:
            raise ContractError("nu_t must be positive")
        if self.max_iters < 1:
            raise ContractError("max_iters must be at least 1")


@dataclass
class IterRecord:
    phase: str
    iteration: int
    objective: float
    gm: float
    am: float
    weighted_start: float
    weighted_after_bf: float
    weighted_after_pre: float
    power: float
    wall_time: float
    rates: np.ndarray
    backtracks: int = 0


@dataclass
class IterTrace:
    """Per-round history of one solve.

    ``records`` holds the rounds of the requested mode only; the warm-start
    and lift rounds that precede them are kept in ``prelude``.
    """

    records: list[IterRecord] = field(default_factory=list)
    status: str = "running"
    anomalies: list[str] = field(default_factory=list)
    prelude: list[IterRecord] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def phase(self, name: str) -> list[IterRecord]:
        return [r for r in self.prelude + self.records if r.phase == name]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        rows = self.prelude + self.records
        K = len(rows[0].rates) if rows else 0
        writer.writerow(["phase", "iteration", "objective", "gm", "am", "weighted_start",
                         "weighted_after_bf", "weighted_after_pre", "power", "wall_time", "backtracks"]
                        + [f"rate_{k}" for k in range(K)])
        for r in rows:
            writer.writerow([r.phase, r.iteration, repr(r.objective), repr(r.gm), repr(r.am),
                             repr(r.weighted_start), repr(r.weighted_after_bf),
                             repr(r.weighted_after_pre), repr(r.power), f"{r.wall_time:.6f}",
                             r.backtracks]
                            + [repr(float(x)) for x in r.rates])
        return buf.getvalue()


@dataclass
class SolveResult:
    design: Design
    trace: IterTrace
    report: RateReport
    init_design: Design

    def __iter__(self):
        return iter((self.design, self.trace, self.report))


def update_weights(rates, fair: bool = True) -> np.ndarray:
    """GM weights ``max(rates) / rates``; all ones for sum-rate."""
    r = np.asarray(rates, dtype=float)
    if not fair:
        return np.ones_like(r)
    if np.any(r <= 0):
        raise NonPositiveRateError(f"GM weights need positive rates, got min {r.min():.3e}")
    return r.max() / r


def cold_start(cs: ChannelSet, P: float, rng: RngStream) -> Design:
    """Random phases plus equal-power matched filters filling the budget."""
    theta = rng.uniform(0.0, 2.0 * np.pi, cs.N)
    H = effective_channels(cs, theta)
    norms = np.linalg.norm(H, axis=1, keepdims=True)
    w = np.conj(H) / np.where(norms > 0, norms, 1.0)
    w *= np.sqrt(P / cs.K)
    return Design(w, theta)


def _objective(rates: np.ndarray, fair: bool, shift: float = 0.0) -> float:
    return metrics(rates + shift)[0] if fair else float(np.sum(rates))


def _round(cs, design, gamma, a, P, allow_inactive, damping):
    after_bf = bf_iteration(cs, design, gamma, a, P, allow_inactive, damping)
    nxt = pre_iteration(cs, after_bf, gamma, a, allow_inactive, damping)
    return after_bf, nxt


def _ascend(cs, design, a, fair, P, config, trace, phase, shift=0.0) -> Design:
    """Alternating ascent from ``design``.

    In GM modes a round that lowers the GM objective is retried with
    proximal damping (``4**i`` times the curvature scale) when
    ``config.safeguard`` is set. ``shift > 0`` replaces the GM of the rates
    by the GM of ``rates + shift`` (used to pull negative rates up).
    """
    allow_inactive = not fair
    rates = urllc_rates(cs, design, a)
    obj = _objective(rates, fair, shift)
    for it in range(config.max_iters):
        t0 = time.perf_counter()
        try:
            gamma = update_weights(rates + shift, fair)
        except NonPositiveRateError as exc:
            trace.status = "nonpositive-rate"
            trace.anomalies.append(f"{phase} round {it}: {exc}")
            break
        damping, tries = 0.0, 0
        try:
            while True:
                after_bf, nxt = _round(cs, design, gamma, a, P, allow_inactive, damping)
                new_rates = urllc_rates(cs, nxt, a)
                new_obj = _objective(new_rates, fair, shift)
                if (not fair or not config.safeguard or new_obj >= obj
                        or tries >= config.max_backtracks):
                    break
                tries += 1
                damping = 4.0 ** (tries - 1)
        except DegenerateExpansionError as exc:
            trace.status = "degenerate"
            trace.anomalies.append(f"{phase} round {it}: {exc}")
            break
        gm, am, _, _ = metrics(new_rates)
        sink = trace.records if phase == "main" else trace.prelude
        sink.append(IterRecord(
            phase=phase, iteration=it, objective=new_obj, gm=gm, am=am,
            weighted_start=float(np.dot(gamma, rates)),
            weighted_after_bf=float(np.dot(gamma, urllc_rates(cs, after_bf, a))),
            weighted_after_pre=float(np.dot(gamma, new_rates)), power=nxt.power,
            wall_time=time.perf_counter() - t0, rates=new_rates, backtracks=tries))
        if fair and np.any(new_rates + shift <= 0):
            # keep the last point at which GM weights are defined
            trace.status = "nonpositive-rate"
            trace.anomalies.append(f"{phase} round {it}: a user rate reached {new_rates.min():.3e}")
            break
        if new_obj < obj - 1e-6:
            trace.anomalies.append(f"{phase} round {it}: objective dipped {obj - new_obj:.3e}")
        design, rates = nxt, new_rates
        done = obj != 0 and abs(new_obj - obj) / abs(obj) <= config.nu_t
        obj = new_obj
        if done:
            trace.status = "converged"
            break
    else:
        trace.status = "max-iters"
    return design


def _positive_rate_limit(cs: ChannelSet, design: Design) -> np.ndarray:
    """Per-user largest ``a`` for which the FBL rate at ``design`` is positive."""
    g = sinrs(cs, design)
    with np.errstate(divide="ignore", invalid="ignore"):
        lim = np.log1p(g) / np.sqrt(2.0 * g / (1.0 + g))
    return np.where(g > 0, lim, 0.0)


def _lift(cs, design, a, P, config, trace, margin=0.9, stage_iters=40, max_stages=80,
          patience=3) -> Design:
    """Per-user continuation on the dispersion coefficient.

    The FBL rate dips below zero for small SINR before it rises again, so
    ascent on a negative rate can drive that user's SINR to zero. Instead,
    every user whose rate is not yet positive gets its own coefficient just
    below the level at which its rate vanishes; GM ascent on these relaxed
    rates keeps all of them positive, and the coefficients are raised
    towards ``a`` after every stage. Fails once no coefficient grows for
    ``patience`` stages.
    """
    stage_cfg = SolverConfig(mode=Mode.GM_URLLC, nu_t=config.nu_t, max_iters=stage_iters,
                             safeguard=config.safeguard, max_backtracks=config.max_backtracks)
    a_k = np.zeros(cs.K)
    stalled = 0
    for _ in range(max_stages):
        limit = _positive_rate_limit(cs, design)
        if np.all(limit > a):
            trace.status = "lifted"
            return design
        new_a = np.where(limit > a, a, np.maximum(a_k, margin * limit))
        stalled = stalled + 1 if np.all(new_a <= a_k * (1.0 + 1e-3)) else 0
        if stalled >= patience:
            break
        a_k = new_a
        design = _ascend(cs, design, a_k, True, P, stage_cfg, trace, "lift")
    trace.status = "lift-failed"
    raise InitializationError("finite-blocklength rates cannot all be made positive "
                              f"(weakest user reached a={a_k.min():.4g} of {a:.4g})")


def initialize(cs: ChannelSet, params: SystemParams, rng: RngStream,
               config: SolverConfig | None = None, trace: IterTrace | None = None) -> Design:
    """Long-blocklength warm start from :func:`cold_start`.

    For GM modes the returned point has strictly positive Shannon rates for
    every user; otherwise :class:`InitializationError` is raised.
    """
    config = config or SolverConfig()
    trace = trace if trace is not None else IterTrace()
    fair = config.mode.fair
    design = cold_start(cs, params.P, rng)
    design = _ascend(cs, design, 0.0, fair, params.P, config, trace, "init")
    if fair and np.any(urllc_rates(cs, design, 0.0) <= 0):
        raise InitializationError("warm start left a user with zero rate")
    return design


def solve(cs: ChannelSet, params: SystemParams, config: SolverConfig, rng: RngStream) -> SolveResult:
    """Run the full algorithm for one channel realization."""
    mode = config.mode
    if config.a_override is not None:
        a = float(config.a_override)
    else:
        a = a_coeff(params) if mode.finite_blocklength else 0.0
    trace = IterTrace()
    if config.init is not None:
        init = config.init
    else:
        init = initialize(cs, params, rng, config, trace)
    if mode.fair and np.any(urllc_rates(cs, init, a) <= 0):
        # The Shannon-rate optimum can leave a weak user below the dispersion
        # penalty.
        init = _lift(cs, init, a, params.P, config, trace)
    trace.status = "running"
    design = _ascend(cs, init, a, mode.fair, params.P, config, trace, "main")
    if trace.anomalies:
        log.debug("solve anomalies: %s", trace.anomalies)
    return SolveResult(design, trace, rate_report(cs, design, a), init)
