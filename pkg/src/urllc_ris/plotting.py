"""Figure scripts for experiment tables.

:func:`emit_plots` writes the table CSV plus one standalone matplotlib
script per figure. Each script only needs the CSV next to it, so figures
can be restyled and regenerated without rerunning the experiment. With
``render=True`` the scripts are also executed to produce PNGs.
"""

from __future__ import annotations

import runpy
from pathlib import Path

from .errors import ContractError
from .experiment import ResultTable
from .solver import Mode

# figures drawn for each sweep
FIGURES = {
    "M": ("am", "rr", "urv", "gm"),
    "t_t": ("gm", "rr"),
    "P": ("gm",),
    "N": ("gm", "rr"),
}

XLABELS = {
    "M": "Number of BS antennas $M$",
    "P": "Transmit power $P$ (dBm)",
    "t_t": "Transmission duration $t_t$ (ms)",
    "N": "Number of RIS elements $N$",
}

YLABELS = {
    "gm": ("gm_bps", "GM rate (bps/Hz)"),
    "am": ("am_bps", "AM rate (bps/Hz)"),
    "rr": ("rr", "Rate ratio (min/max)"),
    "urv": ("urv", "User rate variance ((bps/Hz)$^2$)"),
}

_SCRIPT = '''\
"""{title}

Reads {csv_name} from this directory and writes {png_name} next to it.
"""
import csv
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent
MODES = {modes!r}
COLUMN = {column!r}
ERRORBARS = {errorbars!r}

series = {{m: [] for m in MODES}}
with open(HERE / {csv_name!r}, newline="") as fh:
    for row in csv.DictReader(fh):
        if row["mode"] in series and int(row["n_ok"]) > 0:
            err = float(row["stderr_gm"]) if ERRORBARS else 0.0
            series[row["mode"]].append((float(row["sweep_value"]), float(row[COLUMN]), err))

fig, ax = plt.subplots(figsize=(5.0, 3.6))
for mode, pts in series.items():
    pts.sort()
    if not pts:
        continue
    x, y, e = zip(*pts)
    style = "-" if mode.startswith("GM") else "--"
    marker = "o" if mode.endswith("URLLC") else "s"
    if ERRORBARS:
        ax.errorbar(x, y, yerr=e, fmt=style + marker, capsize=3, label=mode)
    else:
        ax.plot(x, y, style + marker, label=mode)
ax.set_xlabel({xlabel!r})
ax.set_ylabel({ylabel!r})
ax.grid(True, alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig(HERE / {png_name!r}, dpi=150)
plt.close(fig)
'''


def _safe_name(sweep: str) -> str:
    return sweep.replace("_", "")


def plot_manifest(sweep_name: str) -> list[str]:
    """Base names of the figures drawn for a sweep, e.g. ``gm_vs_M``."""
    if sweep_name not in FIGURES:
        raise ContractError(f"no figures defined for sweep {sweep_name!r}")
    return [f"{metric}_vs_{_safe_name(sweep_name)}" for metric in FIGURES[sweep_name]]


def emit_plots(table: ResultTable, out_dir, modes=None, render: bool = True) -> list[Path]:
    """Write ``results.csv`` and one plot script per figure into ``out_dir``.

    ``modes`` restricts the plotted curves (default: every mode in the
    table). Returns the script paths; with ``render`` the PNGs are produced
    too. Nothing is written if there is nothing to plot.
    """
    modes = table.modes if modes is None else [Mode(m) for m in modes]
    if not modes:
        raise ContractError("no solver modes to plot")
    if len(table) == 0:
        raise ContractError("result table is empty")
    missing = [m.value for m in modes if not table.rows_for(m)]
    if missing:
        raise ContractError(f"modes not present in the table: {missing}")
    names = plot_manifest(table.sweep_name)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_name = "results.csv"
    (out / csv_name).write_text(table.to_csv())
    scripts = []
    for name, metric in zip(names, FIGURES[table.sweep_name]):
        column, ylabel = YLABELS[metric]
        path = out / f"{name}.py"
        path.write_text(_SCRIPT.format(
            title=f"{ylabel} versus {table.sweep_name}.", csv_name=csv_name,
            png_name=f"{name}.png", modes=[m.value for m in modes], column=column,
            errorbars=metric == "gm", xlabel=XLABELS[table.sweep_name], ylabel=ylabel))
        scripts.append(path)
    if render:
        for path in scripts:
            runpy.run_path(str(path), run_name="__main__")
    return scripts
