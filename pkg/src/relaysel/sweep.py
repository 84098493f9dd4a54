"""Parameter sweeps over (method, N, fd_td, K, source, SNR) and CSV output.

Determinism: every Monte-Carlo point derives its randomness from the config
seed and its (n, fd) slot, channel draws are shared across SNR/K/source
within a slot (common random numbers), chunk merges are ordered, and output
rows are sorted, so a (config, seed) pair fixes every output byte regardless
of worker count.
"""

from __future__ import annotations

import json
import os
import subprocess
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import __version__
from . import analytic
from .backend import backend_name, resolve_workers
from .config import LoadedConfig, config_digest
from .montecarlo import RngStream, simulate_ser

__all__ = ["SerCurve", "SweepError", "run_sweep", "emit_csv", "emit_manifest",
           "consistency_report", "git_describe"]

CSV_HEADER = "snr_db,ser,half_width,method,source,n,fd_td,k,seed"


class SweepError(RuntimeError):
    """A module error annotated with its (method, grid-point) context."""


@dataclass(frozen=True)
class SerCurve:
    """One SER-versus-SNR curve plus the sweep coordinates that produced it.

    ``half_width`` entries are None for closed-form methods; ``fd_td`` is
    None when the config pins per-link correlations directly.
    """

    method: str
    n: int
    fd_td: float | None
    k: int
    source: int  # 1-based, as reported
    seed: int
    snr_db: tuple[float, ...]
    ser: tuple[float, ...]
    half_width: tuple[float | None, ...]
    metadata: dict

    def sort_key(self):
        fd = -1.0 if self.fd_td is None else self.fd_td
        return (self.method, self.n, fd, self.k, self.source)


def git_describe() -> str:
    """Best-effort source version for run manifests."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True, text=True, timeout=5,
            cwd=os.path.dirname(os.path.abspath(__file__)),
        )
        if out.returncode == 0:
            return out.stdout.strip()
    except (OSError, subprocess.SubprocessError):
        pass
    return "unknown"


def _analytic_point(method, cfg, mod, source0):
    if method == "analytic":
        return analytic.average_ser(cfg, mod, source0)
    csi = "perfect" if all(r == 1.0 for row in cfg.rho for r in row) else "outdated"
    return analytic.asymptotic_ser(cfg, mod, source0, csi)


def run_sweep(loaded: LoadedConfig, workers: int | None = None) -> list[SerCurve]:
    """All curves requested by the config, sorted canonically.

    Closed-form methods apply to single selection only; grid combinations
    with K > 1 produce Monte-Carlo curves alone.
    """
    sw = loaded.sweep
    net = loaded.network
    fd_list = sw.fd_td_values if sw.fd_td_values is not None else (None,)
    grid_db = sw.snr_grid_db
    meta = {
        "config_digest": config_digest(loaded),
        "seed": sw.seed,
        "git_describe": git_describe(),
        "version": __version__,
        "backend": backend_name,
    }
    n_workers = resolve_workers(workers if workers is not None else sw.workers)

    # Monte-Carlo jobs: one per (n, fd, k, snr); a slot-level stream id keeps
    # channel draws shared across k and snr.
    slots = {(n, fd): idx for idx, (n, fd) in enumerate(
        (n, fd) for n in sw.n_values for fd in fd_list)}
    mc_jobs = []
    if "montecarlo" in sw.methods:
        for (n, fd), slot in slots.items():
            for k in sw.k_values:
                if k > n:
                    continue
                for snr_db in grid_db:
                    mc_jobs.append((n, fd, k, snr_db, slot))

    def run_mc(job):
        n, fd, k, snr_db, slot = job
        psi = 10.0 ** (snr_db / 10.0)
        cfg = net.config(n, fd, psi, psi)
        try:
            est = simulate_ser(
                cfg, sw.modulation, sw.trials, RngStream(sw.seed, slot),
                n_selected=k, snr_mode=sw.snr_mode, snr_policy=sw.snr_policy,
                chunk_size=sw.chunk_size, workers=1)
        except Exception as exc:
            raise SweepError(
                f"montecarlo failed at n={n} fd_td={fd} k={k} snr_db={snr_db}: {exc}") from exc
        return job, est

    mc_results = {}
    if mc_jobs:
        if n_workers > 1:
            with ThreadPoolExecutor(max_workers=n_workers) as pool:
                for job, est in pool.map(run_mc, mc_jobs):
                    mc_results[job[:4]] = est
        else:
            for job in mc_jobs:
                _, est = run_mc(job)
                mc_results[job[:4]] = est

    curves = []
    for method in sw.methods:
        for n in sw.n_values:
            for fd in fd_list:
                for k in sw.k_values:
                    if k > n:
                        continue
                    if method != "montecarlo" and k != 1:
                        continue  # closed forms cover single selection only
                    for source in sw.sources:
                        ser, hw = [], []
                        for snr_db in grid_db:
                            if method == "montecarlo":
                                est = mc_results[(n, fd, k, snr_db)][source - 1]
                                ser.append(est.value)
                                hw.append(est.half_width)
                            else:
                                psi = 10.0 ** (snr_db / 10.0)
                                cfg = net.config(n, fd, psi, psi)
                                try:
                                    ser.append(_analytic_point(method, cfg, sw.modulation,
                                                               source - 1))
                                except Exception as exc:
                                    raise SweepError(
                                        f"{method} failed at n={n} fd_td={fd} k={k} "
                                        f"snr_db={snr_db}: {exc}") from exc
                                hw.append(None)
                        curves.append(SerCurve(
                            method=method, n=n, fd_td=fd, k=k, source=source,
                            seed=sw.seed, snr_db=tuple(grid_db), ser=tuple(ser),
                            half_width=tuple(hw), metadata=meta))
    curves.sort(key=SerCurve.sort_key)
    return curves


def _fmt12(x) -> str:
    return format(float(x), ".12g")


def emit_csv(curves, path) -> None:
    """Write curves as one deterministic CSV (12 significant digits)."""
    rows = [CSV_HEADER]
    for curve in sorted(curves, key=SerCurve.sort_key):
        fd_txt = "" if curve.fd_td is None else _fmt12(curve.fd_td)
        for snr_db, ser, hw in zip(curve.snr_db, curve.ser, curve.half_width):
            rows.append(",".join([
                _fmt12(snr_db), _fmt12(ser),
                "" if hw is None else _fmt12(hw),
                curve.method, str(curve.source), str(curve.n),
                fd_txt, str(curve.k), str(curve.seed),
            ]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")


def consistency_report(curves) -> dict:
    """Largest |montecarlo - analytic| in half-widths per matched curve pair.

    Points with zero or missing half-width are skipped.  The overall maximum
    drives the consistency gate.
    """
    by_key = {}
    for c in curves:
        by_key.setdefault((c.method, c.n, c.fd_td, c.k, c.source), c)
    pairs = {}
    worst = 0.0
    for (method, n, fd, k, source), mc in by_key.items():
        if method != "montecarlo":
            continue
        an = by_key.get(("analytic", n, fd, k, source))
        if an is None:
            continue
        ratios = [
            abs(v_mc - v_an) / hw
            for v_mc, v_an, hw in zip(mc.ser, an.ser, mc.half_width)
            if hw is not None and hw > 0
        ]
        if not ratios:
            continue
        key = f"n={n} fd_td={fd} k={k} source={source}"
        pairs[key] = max(ratios)
        worst = max(worst, pairs[key])
    return {"pairs": pairs, "max_sigma": worst}


def emit_manifest(loaded: LoadedConfig, curves, report, path) -> None:
    """Machine-readable run manifest (no timestamps: outputs stay replayable)."""
    doc = {
        "config_digest": config_digest(loaded),
        "seed": loaded.sweep.seed,
        "git_describe": git_describe(),
        "version": __version__,
        "backend": backend_name,
        "trials": loaded.sweep.trials,
        "curves": len(curves),
        "consistency": report,
        "consistency_gate": loaded.sweep.consistency_gate,
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
