"""Figure-reproduction presets: canned sweeps matching the reference setups.

All presets use unit link variances, a common Doppler-delay product across
links, BPSK, and source 1; transmit powers are ``p_s = p_r = P0`` for single
selection and ``p_s = P0, p_r = P0/K`` (split inside the engine) for
multiple selection.  Each preset emits a CSV dataset, a matplotlib plot
stub, and a run manifest.

Presets
-------
2   SER vs SNR, perfect CSI, N = 1, 2, 4 (simulation + closed form + asymptote)
3   SER vs SNR, N = 4, fd_td = 0, 0.1, 0.2, 0.3
4   SER vs fd_td at 15 dB, N = 1..4
5   finite-SNR diversity of the closed-form curves, N = 2, 4, fd_td = 0, 0.05, 0.1
6   SER vs SNR for best-K selection, N = 4, K = 1..4, fd_td = 0.1
"""

from __future__ import annotations

import os

from .config import DEFAULT_SEED, DEFAULT_TRIALS, LoadedConfig, NetworkTemplate, SweepSpec
from .montecarlo import estimate_diversity
from .sweep import SerCurve, consistency_report, emit_csv, emit_manifest, run_sweep

__all__ = ["FIGURE_IDS", "figure_config", "reproduce_figure"]

FIGURE_IDS = (2, 3, 4, 5, 6)


def figure_config(fig_id: int, trials: int | None = None, seed: int | None = None,
                  methods: tuple[str, ...] | None = None) -> LoadedConfig:
    """The LoadedConfig behind one figure preset."""
    trials = DEFAULT_TRIALS if trials is None else trials
    seed = DEFAULT_SEED if seed is None else seed
    common = dict(trials=trials, seed=seed, sources=(1,))
    if fig_id == 2:
        sweep = SweepSpec(snr_db=(0.0, 30.0, 2.0), n_values=(1, 2, 4),
                          fd_td_values=(0.0,),
                          methods=methods or ("montecarlo", "analytic", "asymptotic"),
                          **common)
    elif fig_id == 3:
        sweep = SweepSpec(snr_db=(0.0, 40.0, 2.0), n_values=(4,),
                          fd_td_values=(0.0, 0.1, 0.2, 0.3),
                          methods=methods or ("montecarlo", "analytic", "asymptotic"),
                          **common)
    elif fig_id == 4:
        fd_grid = tuple(round(0.025 * i, 3) for i in range(15))  # 0 .. 0.35
        sweep = SweepSpec(snr_db=(15.0, 15.0, 1.0), n_values=(1, 2, 3, 4),
                          fd_td_values=fd_grid,
                          methods=methods or ("montecarlo", "analytic"),
                          **common)
    elif fig_id == 5:
        sweep = SweepSpec(snr_db=(0.0, 40.0, 1.0), n_values=(2, 4),
                          fd_td_values=(0.0, 0.05, 0.1),
                          methods=("analytic",), **common)
    elif fig_id == 6:
        sweep = SweepSpec(snr_db=(0.0, 30.0, 2.5), n_values=(4,),
                          fd_td_values=(0.1,), k_values=(1, 2, 3, 4),
                          methods=("montecarlo",), **common)
    else:
        raise ValueError(f"fig_id must be one of {FIGURE_IDS}, got {fig_id}")
    return LoadedConfig(sweep=sweep, network=NetworkTemplate(n_relays=max(sweep.n_values)))


def _fmt12(x) -> str:
    return format(float(x), ".12g")


def _diversity_csv(curves: list[SerCurve], path: str) -> None:
    rows = ["snr_db,diversity,method,source,n,fd_td,k,seed"]
    for curve in sorted(curves, key=SerCurve.sort_key):
        prof = estimate_diversity(curve.snr_db, curve.ser)
        for snr_db, d in zip(prof.snr_grid_db, prof.d_of_snr):
            rows.append(",".join([
                _fmt12(snr_db), _fmt12(d), curve.method, str(curve.source),
                str(curve.n), _fmt12(curve.fd_td), str(curve.k), str(curve.seed)]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")


_PLOT_SER = '''\
#!/usr/bin/env python3
"""Plot stub for {name}: SER curves from the emitted dataset."""
import csv
from collections import defaultdict

import matplotlib.pyplot as plt

curves = defaultdict(lambda: ([], []))
with open("{csv_name}", newline="") as fh:
    for row in csv.DictReader(fh):
        key = {key_expr}
        xs, ys = curves[key]
        xs.append(float(row["{x_col}"]))
        ys.append(float(row["ser"]))

styles = {{"montecarlo": "o", "analytic": "-", "asymptotic": "--"}}
for key, (xs, ys) in sorted(curves.items()):
    label = " ".join(f"{{name}}={{val}}" for name, val in zip({key_names}, key) if val)
    plt.semilogy(xs, ys, styles.get(key[0], "-"), label=label, markerfacecolor="none")
plt.xlabel("{x_label}")
plt.ylabel("average SER")
plt.grid(True, which="both", alpha=0.3)
plt.legend(fontsize=7)
plt.tight_layout()
plt.savefig("{name}.png", dpi=150)
print("wrote {name}.png")
'''

_PLOT_DIVERSITY = '''\
#!/usr/bin/env python3
"""Plot stub for {name}: finite-SNR diversity profiles."""
import csv
from collections import defaultdict

import matplotlib.pyplot as plt

curves = defaultdict(lambda: ([], []))
with open("{csv_name}", newline="") as fh:
    for row in csv.DictReader(fh):
        key = (row["n"], row["fd_td"])
        xs, ys = curves[key]
        xs.append(float(row["snr_db"]))
        ys.append(float(row["diversity"]))

for (n, fd), (xs, ys) in sorted(curves.items()):
    plt.plot(xs, ys, label=f"N={{n}} fd_td={{fd}}")
plt.xlabel("SNR (dB)")
plt.ylabel("finite-SNR diversity order")
plt.grid(True, alpha=0.3)
plt.legend(fontsize=8)
plt.tight_layout()
plt.savefig("{name}.png", dpi=150)
print("wrote {name}.png")
'''


def reproduce_figure(fig_id: int, out_dir: str, *, trials: int | None = None,
                     seed: int | None = None, workers: int | None = None) -> dict:
    """Run one preset and write dataset, plot stub and manifest into out_dir.

    Returns the written paths plus the consistency report.
    """
    if fig_id not in FIGURE_IDS:
        raise ValueError(f"fig_id must be one of {FIGURE_IDS}, got {fig_id}")
    loaded = figure_config(fig_id, trials=trials, seed=seed)
    os.makedirs(out_dir, exist_ok=True)
    name = f"fig{fig_id}"
    curves = run_sweep(loaded, workers=workers)

    csv_path = os.path.join(out_dir, f"{name}.csv")
    if fig_id == 5:
        _diversity_csv(curves, csv_path)
        stub = _PLOT_DIVERSITY.format(name=name, csv_name=f"{name}.csv")
    else:
        emit_csv(curves, csv_path)
        if fig_id == 4:
            x_col, x_label = "fd_td", "fd_td"
            key_expr = '(row["method"], row["n"], row["k"])'
            key_names = '("method", "N", "K")'
        else:
            x_col, x_label = "snr_db", "SNR (dB)"
            key_expr = '(row["method"], row["n"], row["fd_td"], row["k"])'
            key_names = '("method", "N", "fd_td", "K")'
        stub = _PLOT_SER.format(name=name, csv_name=f"{name}.csv", x_col=x_col,
                                x_label=x_label, key_expr=key_expr, key_names=key_names)
    plot_path = os.path.join(out_dir, f"{name}_plot.py")
    with open(plot_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(stub)

    report = consistency_report(curves)
    manifest_path = os.path.join(out_dir, f"{name}_manifest.json")
    emit_manifest(loaded, curves, report, manifest_path)
    return {"csv": csv_path, "plot": plot_path, "manifest": manifest_path,
            "consistency": report, "curves": len(curves)}
