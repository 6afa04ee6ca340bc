"""Numeric building blocks shared by the optimizer.

Everything here is pure and side-effect free except :class:`RngStream`,
which owns its generator state and must not be shared between workers.

The pseudo-random generator is numpy's Philox 4x64 (a counter-based
generator). A stream is keyed by ``(seed, stream_id)`` through a
``SeedSequence`` so that every realization of an experiment can be
replayed in isolation.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy.special import ndtri

from .errors import BracketError, ContractError

__all__ = [
    "q_function",
    "inverse_q",
    "is_hermitian",
    "lambda_max",
    "lambda_max_upper",
    "bisect_root",
    "RngStream",
]

_SQRT2 = math.sqrt(2.0)


def q_function(x: float) -> float:
    """Gaussian tail probability Q(x) = P(Z > x) for standard normal Z."""
    return 0.5 * math.erfc(x / _SQRT2)


def inverse_q(p: float) -> float:
    """Inverse of the Gaussian Q-function.

    Returns ``x`` such that ``Q(x) = p``, computed as ``-ndtri(p)``, which
    keeps full precision deep in the tail (``p`` around ``1e-5`` and below).

    Raises
    ------
    ContractError
        If ``p`` is not strictly inside (0, 1).
    """
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ContractError(f"inverse_q needs 0 < p < 1, got {p!r}")
    return -float(ndtri(p))


def is_hermitian(a: np.ndarray, rtol: float = 1e-12) -> bool:
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    scale = max(float(np.max(np.abs(a), initial=0.0)), np.finfo(float).tiny)
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= rtol * scale)


def _power_iteration(a: np.ndarray, tol: float, max_iter: int) -> tuple[float, float]:
    if not is_hermitian(a):
        raise ContractError("lambda_max needs a Hermitian matrix")
    n = a.shape[0]
    x = np.full(n, 1.0 / math.sqrt(n), dtype=np.result_type(a.dtype, float))
    rho = 0.0
    resid = math.inf
    for _ in range(max_iter):
        y = a @ x
        rho = float(np.real(np.vdot(x, y)))
        resid = float(np.linalg.norm(y - rho * x))
        if resid <= tol * max(abs(rho), np.finfo(float).tiny):
            break
        ny = np.linalg.norm(y)
        if ny == 0.0:
            # x lies in the null space; A is PSD so the spectrum is {0} along x only
            # when A itself vanishes.
            return 0.0, 0.0
        x = y / ny
    return rho, resid


def lambda_max(a: np.ndarray, tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Largest eigenvalue of a Hermitian PSD matrix by power iteration.

    The iteration starts from the normalized all-ones vector and stops when
    the eigen-residual ``||A x - rho x||`` drops below ``tol * rho``.
    """
    return _power_iteration(np.asarray(a), tol, max_iter)[0]


def lambda_max_upper(a: np.ndarray, tol: float = 1e-10, max_iter: int = 10_000) -> float:
    """Like :func:`lambda_max` but padded by the final eigen-residual.

    For a Rayleigh quotient ``rho`` with residual ``r`` near the top
    eigenvector, ``rho + ||r||`` bounds the top eigenvalue from above, which
    is what a majorizer ``lambda * I - A >= 0`` needs.
    """
    rho, resid = _power_iteration(np.asarray(a), tol, max_iter)
    return rho + resid


def bisect_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float,
    xtol: float | None = None,
    max_iter: int = 400,
) -> float:
    """Root of a continuous monotone function by bisection.

    Stops once ``|f(mid)| <= tol`` or the bracket width falls below
    ``xtol * max(1, |mid|)`` (``xtol`` defaults to ``tol``).
    """
    if xtol is None:
        xtol = tol
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise BracketError(f"no sign change on [{lo}, {hi}]: f={flo}, {fhi}")
    mid = 0.5 * (lo + hi)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) <= tol:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= xtol * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)


class RngStream:
    """Replayable random stream keyed by ``(seed, stream_id)``.

    Backed by numpy's counter-based Philox generator. Two streams built
    from the same pair produce bit-identical draws.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if seed < 0 or stream_id < 0:
            raise ContractError("seed and stream_id must be non-negative")
        self.seed = int(seed) & 0xFFFF_FFFF_FFFF_FFFF
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence([self.seed, self.stream_id])
        self.generator = np.random.Generator(np.random.Philox(ss))

    def uniform(self, low=0.0, high=1.0, size=None):
        return self.generator.uniform(low, high, size)

    def complex_normal(self, size) -> np.ndarray:
        """Circularly-symmetric complex Gaussian draws with unit variance."""
        z = self.generator.standard_normal((2,) + tuple(np.atleast_1d(size)))
        return (z[0] + 1j * z[1]) / math.sqrt(2.0)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"
