"""Monte-Carlo sweeps over one scenario parameter and a set of solver modes.

Realization ``r`` draws its geometry and channels from stream ``(seed, 2r)``
and its solver randomness (cold-start phases) from ``(seed, 2r + 1)``, so
every sweep value and every mode sees the same user drop and the same
starting point. Results depend only on the spec, never on worker count or
scheduling order.

Sweep values are given in the units used on the command line (dBm for
``P``, ms for ``t_t``) and converted to SI once, in :func:`sweep_params`.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .channel import DESK_PROFILE, LARGE_PROFILE, SystemParams, dbm_to_watt, gen_channels, random_geometry
from .errors import ContractError, UrllcRisError
from .numerics import RngStream
from .rates import LOG2E
from .solver import Mode, SolverConfig, solve

log = logging.getLogger(__name__)

SWEEPS = ("M", "P", "t_t", "N")
SWEEP_UNITS = {"M": "", "P": "dBm", "t_t": "ms", "N": ""}
PROFILES = {"desk": DESK_PROFILE, "large": LARGE_PROFILE}
CSV_COLUMNS = ["sweep_name", "sweep_value", "mode", "gm_bps", "am_bps", "rr", "urv",
               "stderr_gm", "n_ok", "n_fail"]
METRICS = ("gm_bps", "am_bps", "rr", "urv")


def sweep_params(base: SystemParams, name: str, value) -> SystemParams:
    """Scenario for one sweep point; converts dBm and ms to W and s."""
    if name == "M":
        return base.with_(M=int(value))
    if name == "N":
        return base.with_(N=int(value))
    if name == "P":
        return base.with_(P=dbm_to_watt(float(value)))
    if name == "t_t":
        return base.with_(t_t=float(value) * 1e-3)
    raise ContractError(f"unknown sweep {name!r}; expected one of {SWEEPS}")


@dataclass(frozen=True)
class ExperimentSpec:
    base: SystemParams = DESK_PROFILE
    sweep_name: str = "M"
    sweep_values: tuple = (4, 6, 8)
    modes: tuple = tuple(Mode)
    n_realizations: int = 20
    out_dir: str | None = None
    seed: int = 0
    workers: int = 1
    max_iters: int = 500

    def __post_init__(self):
        if self.sweep_name not in SWEEPS:
            raise ContractError(f"unknown sweep {self.sweep_name!r}; expected one of {SWEEPS}")
        values = tuple(self.sweep_values)
        if not values:
            raise ContractError("sweep values must be non-empty")
        if list(values) != sorted(values):
            raise ContractError("sweep values must be sorted")
        object.__setattr__(self, "sweep_values", values)
        modes = tuple(Mode(m) for m in self.modes)
        if not modes:
            raise ContractError("at least one solver mode is required")
        object.__setattr__(self, "modes", modes)
        if self.n_realizations < 1:
            raise ContractError("n_realizations must be at least 1")
        if self.workers < 1:
            raise ContractError("workers must be at least 1")
        for v in values:  # fail early on values the scenario rejects
            sweep_params(self.base, self.sweep_name, v)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["base"] = asdict(self.base)
        d["modes"] = [m.value for m in self.modes]
        d["sweep_values"] = list(self.sweep_values)
        return d


@dataclass
class ResultRow:
    sweep_value: float
    mode: Mode
    gm_bps: float
    am_bps: float
    rr: float
    urv: float
    stderr: dict
    n_ok: int
    n_fail: int

    @property
    def stderr_gm(self) -> float:
        return self.stderr["gm_bps"]


@dataclass
class ResultTable:
    sweep_name: str
    rows: list[ResultRow]
    records: list[dict] = field(default_factory=list)  # one entry per realization and mode
    spec: dict | None = None

    def __len__(self):
        return len(self.rows)

    @property
    def modes(self) -> list[Mode]:
        seen = []
        for r in self.rows:
            if r.mode not in seen:
                seen.append(r.mode)
        return seen

    @property
    def values(self) -> list:
        return sorted({r.sweep_value for r in self.rows})

    def rows_for(self, mode) -> list[ResultRow]:
        mode = Mode(mode)
        return sorted((r for r in self.rows if r.mode == mode), key=lambda r: r.sweep_value)

    def row(self, value, mode) -> ResultRow:
        mode = Mode(mode)
        for r in self.rows:
            if r.mode == mode and r.sweep_value == value:
                return r
        raise KeyError((value, mode))

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in self.rows:
            writer.writerow([self.sweep_name, _fmt(r.sweep_value), r.mode.value, _fmt(r.gm_bps),
                             _fmt(r.am_bps), _fmt(r.rr), _fmt(r.urv), _fmt(r.stderr_gm),
                             r.n_ok, r.n_fail])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = [{"sweep_value": r.sweep_value, "mode": r.mode.value, "gm_bps": r.gm_bps,
                 "am_bps": r.am_bps, "rr": r.rr, "urv": r.urv, "stderr": r.stderr,
                 "n_ok": r.n_ok, "n_fail": r.n_fail} for r in self.rows]
        doc = {"sweep_name": self.sweep_name, "spec": self.spec, "rows": rows,
               "realizations": self.records}
        return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"

    def write(self, out_dir) -> tuple[Path, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path, json_path = out / "results.csv", out / "results.json"
        csv_path.write_text(self.to_csv())
        json_path.write_text(self.to_json())
        return csv_path, json_path

    @classmethod
    def from_csv(cls, text: str) -> "ResultTable":
        rows, name = [], None
        for rec in csv.DictReader(io.StringIO(text)):
            name = rec["sweep_name"]
            rows.append(ResultRow(
                sweep_value=_num(rec["sweep_value"]), mode=Mode(rec["mode"]),
                gm_bps=float(rec["gm_bps"]), am_bps=float(rec["am_bps"]), rr=float(rec["rr"]),
                urv=float(rec["urv"]), stderr={"gm_bps": float(rec["stderr_gm"])},
                n_ok=int(rec["n_ok"]), n_fail=int(rec["n_fail"])))
        if name is None:
            raise ContractError("empty result table")
        return cls(name, rows)


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _num(text: str):
    v = float(text)
    return int(v) if v.is_integer() and "." not in text and "e" not in text else v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Mode):
        return obj.value
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _run_point(args) -> list[dict]:
    """All modes for one (sweep value, realization) pair."""
    spec, value, r = args
    params = sweep_params(spec.base, spec.sweep_name, value)
    crng = RngStream(spec.seed, 2 * r)
    geom = random_geometry(params.K, crng)
    cs = gen_channels(params, geom, crng)
    out = []
    for mode in spec.modes:
        rec = {"sweep_value": value, "realization": r, "mode": mode.value}
        config = SolverConfig(mode=mode, nu_t=params.nu_t, max_iters=spec.max_iters)
        try:
            res = solve(cs, params, config, RngStream(spec.seed, 2 * r + 1))
        except UrllcRisError as exc:
            rec.update(status="failed", error=f"{type(exc).__name__}: {exc}")
            out.append(rec)
            continue
        rep = res.report
        rec.update(status=res.trace.status, rounds=len(res.trace), gm_bps=rep.gm * LOG2E,
                   am_bps=rep.am * LOG2E, rr=rep.rr, urv=rep.urv * LOG2E ** 2,
                   rates_bps=(rep.per_user_urllc * LOG2E).tolist())
        out.append(rec)
    return out


def _aggregate(spec: ExperimentSpec, records: list[dict]) -> list[ResultRow]:
    rows = []
    for value in spec.sweep_values:
        for mode in spec.modes:
            recs = [x for x in records if x["sweep_value"] == value and x["mode"] == mode.value]
            ok = [x for x in recs if x["status"] != "failed"]
            means, errs = {}, {}
            for key in METRICS:
                vals = np.array([x[key] for x in ok], dtype=float)
                means[key] = float(vals.mean()) if vals.size else math.nan
                errs[key] = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else 0.0
            rows.append(ResultRow(sweep_value=value, mode=mode, stderr=errs, n_ok=len(ok),
                                  n_fail=len(recs) - len(ok), **means))
    return rows


def run_experiment(spec: ExperimentSpec, write: bool = True) -> ResultTable:
    """Solve every (sweep value, realization, mode) and aggregate per (value, mode).

    Realizations whose solve fails (for instance, no design with all
    finite-blocklength rates positive) are counted in ``n_fail`` and left
    out of the means. With ``write`` and ``spec.out_dir`` set, the CSV and
    JSON are written once all points are done.
    """
    jobs = [(spec, v, r) for v in spec.sweep_values for r in range(spec.n_realizations)]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            chunks = list(pool.map(_run_point, jobs))
    else:
        chunks = [_run_point(job) for job in jobs]
    records = [rec for chunk in chunks for rec in chunk]
    for rec in records:
        if rec["status"] == "failed":
            log.info("realization %s at %s=%s (%s) failed: %s", rec["realization"],
                     spec.sweep_name, rec["sweep_value"], rec["mode"], rec["error"])
    table = ResultTable(spec.sweep_name, _aggregate(spec, records), records, spec.to_dict())
    if write and spec.out_dir is not None:
        table.write(spec.out_dir)
    return table


# ---------------------------------------------------------------------------
# configuration files

#: keys accepted under ``params:`` and how they map onto SystemParams
PARAM_KEYS = {
    "M": ("M", int), "K": ("K", int), "N": ("N", int),
    "P_dBm": ("P", dbm_to_watt), "t_t_ms": ("t_t", lambda v: float(v) * 1e-3),
    "B_MHz": ("B", lambda v: float(v) * 1e6), "eps_c": ("eps_c", float),
    "G_BS_dBi": ("G_BS", float), "G_RIS_dBi": ("G_RIS", float), "nu_t": ("nu_t", float),
}
CONFIG_KEYS = {"profile", "params", "sweep", "modes", "realizations", "seed", "out", "workers",
               "max_iters"}


def params_from_mapping(profile: str = "desk", overrides: dict | None = None) -> SystemParams:
    if profile not in PROFILES:
        raise ContractError(f"unknown profile {profile!r}; expected one of {sorted(PROFILES)}")
    changes = {}
    for key, val in (overrides or {}).items():
        if key not in PARAM_KEYS:
            raise ContractError(f"unknown parameter {key!r}; expected one of {sorted(PARAM_KEYS)}")
        name, conv = PARAM_KEYS[key]
        changes[name] = conv(val)
    return PROFILES[profile].with_(**changes)


def load_config(path) -> dict:
    """Read a YAML experiment file and check its top-level keys."""
    with open(path) as fh:
        cfg = yaml.safe_load(fh) or {}
    if not isinstance(cfg, dict):
        raise ContractError("config file must hold a mapping")
    unknown = set(cfg) - CONFIG_KEYS
    if unknown:
        raise ContractError(f"unknown config keys: {sorted(unknown)}")
    return cfg


def parse_sweep(text: str) -> tuple[str, tuple]:
    """``"M=4,6,8"`` -> ``("M", (4, 6, 8))``."""
    name, sep, rest = text.partition("=")
    name = name.strip()
    if not sep or not rest.strip():
        raise ContractError(f"sweep must look like NAME=v1,v2,...; got {text!r}")
    return name, tuple(_num(v.strip()) for v in rest.split(","))


def spec_from_config(cfg: dict) -> ExperimentSpec:
    base = params_from_mapping(cfg.get("profile", "desk"), cfg.get("params"))
    sweep = cfg.get("sweep", {"name": "M", "values": [4, 6, 8]})
    if isinstance(sweep, str):
        name, values = parse_sweep(sweep)
    else:
        name, values = sweep.get("name"), tuple(sweep.get("values", ()))
    modes = cfg.get("modes", [m.value for m in Mode])
    if isinstance(modes, str):
        modes = [m.strip() for m in modes.split(",") if m.strip()]
    return ExperimentSpec(base=base, sweep_name=name, sweep_values=tuple(values),
                          modes=tuple(modes), n_realizations=int(cfg.get("realizations", 20)),
                          out_dir=cfg.get("out"), seed=int(cfg.get("seed", 0)),
                          workers=int(cfg.get("workers", 1) or os.cpu_count() or 1),
                          max_iters=int(cfg.get("max_iters", 500)))
