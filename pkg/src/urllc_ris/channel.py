"""Scenario parameters, geometry and the RIS-assisted channel model.

Conventions
-----------
* ``H_BR`` is the N x M line-of-sight BS->RIS matrix with unit-modulus
  entries.
* ``h_eff_base`` stacks the K composite RIS->user rows
  ``sqrt(beta_BR * beta_Rk) * h_Rk @ R_Rk^{1/2}`` (shape K x N).
* A beamformer set ``w`` is stored as a K x M array whose row k is the
  vector sent to user k. The effective channel of user k at phases theta is
  the length-M row ``(h_eff_base[k] * exp(1j*theta)) @ H_BR`` and the
  received amplitude of stream j is ``H_k(theta) @ w[j]``.

Channels returned by :func:`gen_channels` are normalized so that the noise
power is one; the SINR is invariant under that rescaling.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ContractError
from .numerics import RngStream

__all__ = [
    "SystemParams",
    "Geometry",
    "ChannelSet",
    "DESK_PROFILE",
    "LARGE_PROFILE",
    "noise_power",
    "dbm_to_watt",
    "path_loss_ris_user",
    "path_loss_bs_ris",
    "wrap_angles",
    "random_geometry",
    "gen_channels",
    "effective_channel",
    "effective_channels",
    "per_pre_channel",
]

RICIAN_K = 3.0
BS_POS = (20.0, 0.0, 25.0)
RIS_POS = (0.0, 30.0, 40.0)
USER_AREA = ((20.0, 80.0), (0.0, 60.0))
USER_HEIGHT = 1.5


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def noise_power(bandwidth: float, density_dbm_hz: float = -174.0) -> float:
    """Thermal noise power in watts over ``bandwidth`` Hz."""
    return dbm_to_watt(density_dbm_hz + 10.0 * math.log10(bandwidth))


@dataclass(frozen=True)
class SystemParams:
    """All scalars of one scenario, in linear SI units."""

    M: int = 6
    K: int = 4
    N: int = 32
    P: float = 0.1
    sigma: float = field(default_factory=lambda: noise_power(1e6))
    B: float = 1e6
    t_t: float = 1e-4
    eps_c: float = 1e-5
    G_BS: float = 5.0
    G_RIS: float = 5.0
    nu_t: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if min(self.M, self.K, self.N) < 1:
            raise ContractError("M, K and N must be at least 1")
        if not self.P > 0 or not self.sigma > 0:
            raise ContractError("P and sigma must be positive")
        if not 0.0 < self.eps_c < 1.0:
            raise ContractError("eps_c must lie in (0, 1)")
        if not self.B * self.t_t > 0:
            raise ContractError("blocklength B*t_t must be positive")
        if not self.nu_t > 0:
            raise ContractError("nu_t must be positive")

    def with_(self, **changes) -> "SystemParams":
        if "B" in changes and "sigma" not in changes:
            changes["sigma"] = noise_power(changes["B"])
        return replace(self, **changes)


DESK_PROFILE = SystemParams(M=6, K=4, N=32)
LARGE_PROFILE = SystemParams(M=10, K=10, N=100)


@dataclass(frozen=True)
class Geometry:
    bs_pos: np.ndarray
    ris_pos: np.ndarray
    user_pos: np.ndarray  # K x 3

    def __post_init__(self):
        object.__setattr__(self, "bs_pos", np.asarray(self.bs_pos, dtype=float))
        object.__setattr__(self, "ris_pos", np.asarray(self.ris_pos, dtype=float))
        object.__setattr__(self, "user_pos", np.atleast_2d(np.asarray(self.user_pos, dtype=float)))
        if self.d_br <= 0 or np.any(self.d_rk <= 0):
            raise ContractError("all link distances must be positive")

    @property
    def d_br(self) -> float:
        return float(np.linalg.norm(self.ris_pos - self.bs_pos))

    @property
    def d_rk(self) -> np.ndarray:
        return np.linalg.norm(self.user_pos - self.ris_pos, axis=1)

    def user_angles(self) -> tuple[np.ndarray, np.ndarray]:
        """Azimuth and polar angle of each user as seen from the RIS."""
        d = self.user_pos - self.ris_pos
        azimuth = np.arctan2(d[:, 1], d[:, 0])
        polar = np.arccos(d[:, 2] / np.linalg.norm(d, axis=1))
        return azimuth, polar


def random_geometry(K: int, rng: RngStream, area=USER_AREA, height=USER_HEIGHT) -> Geometry:
    """Drop ``K`` users uniformly over a rectangle to the right of BS and RIS."""
    (x0, x1), (y0, y1) = area
    xy = rng.uniform(size=(K, 2))
    users = np.column_stack([x0 + (x1 - x0) * xy[:, 0], y0 + (y1 - y0) * xy[:, 1], np.full(K, height)])
    return Geometry(np.array(BS_POS), np.array(RIS_POS), users)


def path_loss_ris_user(d, G_RIS: float = 5.0):
    """Linear RIS->user gain for distance ``d`` in meters."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ContractError("distance must be positive")
    out = 10.0 ** ((G_RIS - 33.05 - 30.0 * np.log10(d)) / 10.0)
    return float(out) if out.ndim == 0 else out


def path_loss_bs_ris(d, G_BS: float = 5.0, G_RIS: float = 5.0):
    """Linear BS->RIS gain for distance ``d`` in meters."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ContractError("distance must be positive")
    out = 10.0 ** ((G_BS + G_RIS - 35.9 - 22.0 * np.log10(d)) / 10.0)
    return float(out) if out.ndim == 0 else out


def wrap_angles(theta) -> np.ndarray:
    theta = np.mod(np.asarray(theta, dtype=float), 2.0 * np.pi)
    # mod can round up to exactly 2*pi for tiny negative inputs
    theta[theta >= 2.0 * np.pi] = 0.0
    return theta


def _psd_sqrt(r: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(r)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


def correlation_matrix(N: int, azimuth: float, polar: float) -> np.ndarray:
    n = np.arange(N)
    return np.exp(1j * np.pi * np.subtract.outer(n, n) * np.sin(azimuth) * np.sin(polar))


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """One channel realization. Immutable once built."""

    H_BR: np.ndarray       # N x M
    h_Rk: np.ndarray       # K x N small-scale fading
    R_Rk: np.ndarray       # K x N x N spatial correlation
    beta_BR: float
    beta_Rk: np.ndarray    # K
    h_eff_base: np.ndarray  # K x N, already divided by sqrt(noise power)
    sigma: float = 1.0

    def __post_init__(self):
        for name in ("H_BR", "h_Rk", "R_Rk", "h_eff_base"):
            arr = np.array(getattr(self, name), dtype=complex)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        beta = np.array(self.beta_Rk, dtype=float)
        beta.setflags(write=False)
        object.__setattr__(self, "beta_Rk", beta)
        if self.h_eff_base.ndim != 2 or self.h_eff_base.shape[1] != self.H_BR.shape[0]:
            raise ContractError("h_eff_base must be K x N with N matching H_BR")

    @property
    def K(self) -> int:
        return self.h_eff_base.shape[0]

    @property
    def N(self) -> int:
        return self.H_BR.shape[0]

    @property
    def M(self) -> int:
        return self.H_BR.shape[1]

    def scaled(self, c: complex) -> "ChannelSet":
        """Same realization with ``h_eff_base`` scaled by ``c`` and noise by ``|c|^2``."""
        return replace(self, h_eff_base=self.h_eff_base * c, sigma=self.sigma * abs(c) ** 2)

    def to_json(self) -> str:
        def enc(a):
            a = np.asarray(a)
            return np.stack([a.real, a.imag], axis=-1).tolist()

        return json.dumps({
            "format": "urllc-ris-channelset/1",
            "H_BR": enc(self.H_BR),
            "h_Rk": enc(self.h_Rk),
            "R_Rk": enc(self.R_Rk),
            "beta_BR": self.beta_BR,
            "beta_Rk": self.beta_Rk.tolist(),
            "h_eff_base": enc(self.h_eff_base),
            "sigma": self.sigma,
        })

    @classmethod
    def from_json(cls, text: str) -> "ChannelSet":
        d = json.loads(text)

        def dec(x):
            a = np.asarray(x, dtype=float)
            return a[..., 0] + 1j * a[..., 1]

        return cls(
            H_BR=dec(d["H_BR"]),
            h_Rk=dec(d["h_Rk"]),
            R_Rk=dec(d["R_Rk"]),
            beta_BR=float(d["beta_BR"]),
            beta_Rk=np.asarray(d["beta_Rk"], dtype=float),
            h_eff_base=dec(d["h_eff_base"]),
            sigma=float(d["sigma"]),
        )


def gen_channels(params: SystemParams, geom: Geometry, rng: RngStream) -> ChannelSet:
    """Draw one channel realization.

    Draw order is fixed and does not depend on ``M``: the BS->RIS matrix is
    built from per-row angles, so realizations for different antenna counts
    share their first columns.
    """
    M, K, N = params.M, params.K, params.N
    if geom.user_pos.shape[0] != K:
        raise ContractError(f"geometry has {geom.user_pos.shape[0]} users, params say K={K}")

    theta = rng.uniform(0.0, np.pi, N)
    phi = rng.uniform(0.0, 2.0 * np.pi, N)
    theta_bar, phi_bar = np.pi - theta, np.pi + phi
    n = np.arange(N)[:, None]
    m = np.arange(M)[None, :]
    H_BR = np.exp(1j * np.pi * (n * (np.sin(theta_bar) * np.sin(phi_bar))[:, None]
                                + m * (np.sin(theta) * np.sin(phi))[:, None]))

    # Rician RIS->user fading: unit-modulus phase ramp with random offset and
    # slope per user, plus i.i.d. scatter.
    offset = rng.uniform(0.0, 2.0 * np.pi, K)
    slope = rng.uniform(-1.0, 1.0, K)
    h_los = np.exp(1j * (offset[:, None] + np.pi * slope[:, None] * np.arange(N)[None, :]))
    h_nlos = rng.complex_normal((K, N))
    h_Rk = math.sqrt(RICIAN_K / (1 + RICIAN_K)) * h_los + math.sqrt(1 / (1 + RICIAN_K)) * h_nlos

    azimuth, polar = geom.user_angles()
    R_Rk = np.stack([correlation_matrix(N, azimuth[k], polar[k]) for k in range(K)])

    beta_BR = path_loss_bs_ris(geom.d_br, params.G_BS, params.G_RIS)
    beta_Rk = np.atleast_1d(path_loss_ris_user(geom.d_rk, params.G_RIS))
    scale = np.sqrt(beta_BR * beta_Rk / params.sigma)
    h_eff = np.stack([scale[k] * (h_Rk[k] @ _psd_sqrt(R_Rk[k])) for k in range(K)])
    return ChannelSet(H_BR=H_BR, h_Rk=h_Rk, R_Rk=R_Rk, beta_BR=beta_BR, beta_Rk=beta_Rk,
                      h_eff_base=h_eff, sigma=1.0)


def _check_user(cs: ChannelSet, k: int):
    if not 0 <= k < cs.K:
        raise IndexError(f"user index {k} out of range for K={cs.K}")


def effective_channels(cs: ChannelSet, theta) -> np.ndarray:
    """All K effective BS->user rows at phases ``theta`` (K x M)."""
    u = np.exp(1j * np.asarray(theta, dtype=float))
    return (cs.h_eff_base * u) @ cs.H_BR


def effective_channel(cs: ChannelSet, k: int, theta) -> np.ndarray:
    _check_user(cs, k)
    u = np.exp(1j * np.asarray(theta, dtype=float))
    return (cs.h_eff_base[k] * u) @ cs.H_BR


def per_pre_channel(cs: ChannelSet, k: int, n: int) -> np.ndarray:
    """Contribution of reflecting element ``n`` to user ``k``'s channel at zero phase."""
    _check_user(cs, k)
    if not 0 <= n < cs.N:
        raise IndexError(f"element index {n} out of range for N={cs.N}")
    return cs.h_eff_base[k, n] * cs.H_BR[n]
