"""Command-line interface.

    urllc-ris run --sweep M=4,6,8 --modes GM-URLLC,SR-URLLC --realizations 20 --out results/
    urllc-ris run --config experiment.yaml --workers 4
    urllc-ris solve --mode GM-URLLC --seed 3 --out one/
    urllc-ris channels --seed 3 --out channels.json
    urllc-ris plot results/results.csv

Powers are given in dBm and durations in ms. On failure the exit code is
nonzero and a one-line JSON error is printed to stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .channel import ChannelSet, gen_channels, random_geometry
from .errors import ContractError, UrllcRisError
from .experiment import (PROFILES, ExperimentSpec, ResultTable, load_config, params_from_mapping,
                         parse_sweep, run_experiment, spec_from_config)
from .numerics import RngStream
from .rates import LOG2E
from .solver import Mode, SolverConfig, solve

log = logging.getLogger("urllc_ris")


def _add_scenario_args(p: argparse.ArgumentParser):
    p.add_argument("--profile", choices=sorted(PROFILES), default=None,
                   help="parameter profile (default: desk)")
    p.add_argument("--M", type=int, help="BS antennas")
    p.add_argument("--K", type=int, help="users")
    p.add_argument("--N", type=int, help="RIS elements")
    p.add_argument("--P-dbm", type=float, dest="P_dBm", help="transmit power budget in dBm")
    p.add_argument("--tt-ms", type=float, dest="t_t_ms", help="transmission duration in ms")
    p.add_argument("--eps", type=float, dest="eps_c", help="decoding error probability")


def _overrides(args) -> dict:
    return {k: getattr(args, k) for k in ("M", "K", "N", "P_dBm", "t_t_ms", "eps_c")
            if getattr(args, k, None) is not None}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="urllc-ris",
                                     description="GM-rate beamforming and RIS phase design")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Monte-Carlo sweep; writes CSV, JSON and figures")
    run.add_argument("--config", help="YAML experiment file; flags override its entries")
    run.add_argument("--sweep", help="NAME=v1,v2,... with NAME in M, P (dBm), t_t (ms), N")
    run.add_argument("--modes", help="comma-separated subset of " + ",".join(m.value for m in Mode))
    run.add_argument("--realizations", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--out", help="output directory")
    run.add_argument("--workers", type=int, help="worker processes (0: one per CPU)")
    run.add_argument("--no-plots", action="store_true", help="skip figure scripts and PNGs")
    _add_scenario_args(run)

    one = sub.add_parser("solve", help="solve one channel realization")
    one.add_argument("--mode", default=Mode.GM_URLLC.value, choices=[m.value for m in Mode])
    one.add_argument("--seed", type=int, default=0)
    one.add_argument("--realization", type=int, default=0)
    one.add_argument("--channels", help="channel JSON written by the 'channels' command")
    one.add_argument("--max-iters", type=int, default=500)
    one.add_argument("--out", help="directory for report.json and trace.csv")
    _add_scenario_args(one)

    ch = sub.add_parser("channels", help="draw one channel realization and save it as JSON")
    ch.add_argument("--seed", type=int, default=0)
    ch.add_argument("--realization", type=int, default=0)
    ch.add_argument("--out", required=True)
    _add_scenario_args(ch)

    plot = sub.add_parser("plot", help="redraw figures from a results CSV")
    plot.add_argument("csv")
    plot.add_argument("--out", help="output directory (default: next to the CSV)")
    plot.add_argument("--modes")
    return parser


def _cmd_run(args) -> dict:
    cfg = load_config(args.config) if args.config else {}
    if args.profile:
        cfg["profile"] = args.profile
    params = dict(cfg.get("params") or {})
    params.update(_overrides(args))
    cfg["params"] = params
    if args.sweep:
        name, values = parse_sweep(args.sweep)
        cfg["sweep"] = {"name": name, "values": list(values)}
    for key in ("modes", "realizations", "seed", "out", "workers"):
        if getattr(args, key) is not None:
            cfg[key] = getattr(args, key)
    cfg.setdefault("out", "results")
    spec = spec_from_config(cfg)
    table = run_experiment(spec)
    files = [str(Path(spec.out_dir) / "results.csv"), str(Path(spec.out_dir) / "results.json")]
    if not args.no_plots:
        from .plotting import emit_plots
        for script in emit_plots(table, spec.out_dir):
            files += [str(script), str(script.with_suffix(".png"))]
    failed = sum(r.n_fail for r in table.rows)
    return {"status": "ok", "rows": len(table), "failed_solves": failed, "files": files}


def _draw(args):
    params = params_from_mapping(args.profile or "desk", _overrides(args))
    rng = RngStream(args.seed, 2 * args.realization)
    geom = random_geometry(params.K, rng)
    return params, gen_channels(params, geom, rng)


def _cmd_solve(args) -> dict:
    if args.channels:
        params = params_from_mapping(args.profile or "desk", _overrides(args))
        cs = ChannelSet.from_json(Path(args.channels).read_text())
        if (cs.M, cs.K, cs.N) != (params.M, params.K, params.N):
            params = params.with_(M=cs.M, K=cs.K, N=cs.N)
    else:
        params, cs = _draw(args)
    config = SolverConfig(mode=args.mode, nu_t=params.nu_t, max_iters=args.max_iters)
    res = solve(cs, params, config, RngStream(args.seed, 2 * args.realization + 1))
    rep = res.report
    out = {"status": res.trace.status, "mode": args.mode, "rounds": len(res.trace),
           "gm_bps": rep.gm * LOG2E, "am_bps": rep.am * LOG2E, "rr": rep.rr,
           "urv": rep.urv * LOG2E ** 2,
           "rates_bps": [float(r) * LOG2E for r in rep.per_user_urllc]}
    if args.out:
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        report = dict(out, report=rep.to_dict(),
                      design={"w": [[[z.real, z.imag] for z in row] for row in res.design.w],
                              "theta": res.design.theta.tolist()})
        (d / "report.json").write_text(json.dumps(report, indent=2) + "\n")
        (d / "trace.csv").write_text(res.trace.to_csv())
        out["files"] = [str(d / "report.json"), str(d / "trace.csv")]
    return out


def _cmd_channels(args) -> dict:
    params, cs = _draw(args)
    path = Path(args.out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(cs.to_json())
    return {"status": "ok", "M": cs.M, "K": cs.K, "N": cs.N, "files": [str(path)]}


def _cmd_plot(args) -> dict:
    from .plotting import emit_plots
    src = Path(args.csv)
    table = ResultTable.from_csv(src.read_text())
    modes = None if args.modes is None else [m.strip() for m in args.modes.split(",") if m.strip()]
    scripts = emit_plots(table, args.out or src.parent, modes=modes)
    return {"status": "ok", "files": [str(s) for s in scripts]}


COMMANDS = {"run": _cmd_run, "solve": _cmd_solve, "channels": _cmd_channels, "plot": _cmd_plot}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        result = COMMANDS[args.command](args)
    except (UrllcRisError, OSError, ValueError) as exc:
        kind = "contract" if isinstance(exc, (ContractError, ValueError)) else "runtime"
        print(json.dumps({"status": "error", "kind": kind, "type": type(exc).__name__,
                          "message": str(exc)}), file=sys.stderr)
        return 2 if kind == "contract" else 1
    print(json.dumps(result))
    return 0


if __name__ == "__main__":
    sys.exit(main())
