"""Sweep harness and CLI: determinism, CSV layout, exit codes, presets."""

import json
import subprocess
import sys

import pytest

from relaysel.cli import main
from relaysel.config import loads_config
from relaysel.figures import figure_config, reproduce_figure
from relaysel.sweep import SerCurve, consistency_report, emit_csv, run_sweep

FAST_SWEEP = """
[network]
n_relays = 2

[sweep]
snr_db = { start = 0.0, stop = 10.0, step = 5.0 }
fd_td_values = [0.0, 0.1]
n_values = [1, 2]
trials = 4000
seed = 99
methods = ["montecarlo", "analytic", "asymptotic"]
"""


def write(tmp_path, text, name="cfg.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestRunSweep:
    def test_curve_counts_and_order(self):
        curves = run_sweep(loads_config(FAST_SWEEP), workers=1)
        # 3 methods x 2 n x 2 fd x k=1 x source 1
        assert len(curves) == 12
        keys = [c.sort_key() for c in curves]
        assert keys == sorted(keys)
        for c in curves:
            assert len(c.ser) == 3
            if c.method == "montecarlo":
                assert all(h is not None for h in c.half_width)
            else:
                assert all(h is None for h in c.half_width)

    def test_analytic_only_no_half_widths(self):
        text = ("[network]\nn_relays = 1\n[sweep]\n"
                "snr_db = { start = 0.0, stop = 18.0, step = 2.0 }\n"
                'methods = ["analytic"]\n')
        curves = run_sweep(loads_config(text))
        assert len(curves) == 1
        assert len(curves[0].ser) == 10
        assert all(h is None for h in curves[0].half_width)

    def test_multiple_selection_montecarlo_only(self):
        text = ("[network]\nn_relays = 2\n[sweep]\n"
                "snr_db = { start = 0.0, stop = 5.0, step = 5.0 }\n"
                "k_values = [1, 2]\ntrials = 2000\n")
        curves = run_sweep(loads_config(text))
        k2 = [c for c in curves if c.k == 2]
        assert k2 and all(c.method == "montecarlo" for c in k2)

    def test_deterministic_with_workers(self):
        loaded = loads_config(FAST_SWEEP)
        a = run_sweep(loaded, workers=1)
        b = run_sweep(loaded, workers=4)
        assert a == b

    def test_consistency_report_like_for_like(self):
        text = ("[network]\nn_relays = 1\n[sweep]\n"
                "snr_db = { start = 0.0, stop = 10.0, step = 5.0 }\n"
                'methods = ["montecarlo", "analytic"]\nsnr_policy = "upper_bound"\n'
                "trials = 200000\nseed = 5\n")
        report = consistency_report(run_sweep(loads_config(text)))
        assert report["pairs"]
        assert report["max_sigma"] < 4.0  # single relay: closed form is exact


class TestEmitCsv:
    def test_empty_is_header_only(self, tmp_path):
        path = tmp_path / "out.csv"
        emit_csv([], path)
        assert path.read_text() == "snr_db,ser,half_width,method,source,n,fd_td,k,seed\n"

    def test_single_point_two_lines(self, tmp_path):
        curve = SerCurve(method="analytic", n=1, fd_td=0.0, k=1, source=1, seed=7,
                         snr_db=(0.0,), ser=(0.123456789012345,), half_width=(None,),
                         metadata={})
        path = tmp_path / "out.csv"
        emit_csv([curve], path)
        lines = path.read_text().splitlines()
        assert len(lines) == 2
        assert lines[1] == "0,0.123456789012,,analytic,1,1,0,1,7"

    def test_reemission_byte_identical(self, tmp_path):
        curves = run_sweep(loads_config(FAST_SWEEP))
        p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
        emit_csv(curves, p1)
        emit_csv(curves, p2)
        assert p1.read_bytes() == p2.read_bytes()


class TestCli:
    def test_sweep_end_to_end_deterministic(self, tmp_path):
        cfg = write(tmp_path, FAST_SWEEP)
        out1, out2 = tmp_path / "o1", tmp_path / "o2"
        assert main(["sweep", "--config", str(cfg), "--out", str(out1),
                     "--trials", "2000"]) == 0
        assert main(["sweep", "--config", str(cfg), "--out", str(out2),
                     "--trials", "2000", "--workers", "3"]) == 0
        assert (out1 / "sweep.csv").read_bytes() == (out2 / "sweep.csv").read_bytes()
        manifest = json.loads((out1 / "sweep_manifest.json").read_text())
        assert manifest["trials"] == 2000
        assert (out1 / "sweep_config.toml").exists()

    def test_bad_config_exits_2(self, tmp_path):
        cfg = write(tmp_path, "[network]\nn_relays = 0\n")
        assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
        assert main(["sweep", "--config", str(tmp_path / "absent.toml"),
                     "--out", str(tmp_path / "o")]) == 2

    def test_methods_override_letters(self, tmp_path):
        cfg = write(tmp_path, FAST_SWEEP)
        out = tmp_path / "o"
        assert main(["sweep", "--config", str(cfg), "--out", str(out),
                     "--trials", "1000", "--methods", "a,s"]) == 0
        body = (out / "sweep.csv").read_text()
        assert "montecarlo" not in body and "analytic" in body and "asymptotic" in body

    def test_gate_failure_exits_3(self, tmp_path):
        # exact-policy simulation against the bound-based closed form at low
        # SNR with many trials: a deliberately tight gate must trip
        text = ("[network]\nn_relays = 2\n[sweep]\n"
                "snr_db = { start = 0.0, stop = 0.0, step = 1.0 }\n"
                'methods = ["montecarlo", "analytic"]\nsnr_policy = "exact"\n'
                "trials = 400000\nseed = 11\n[output]\nconsistency_gate = 3.0\n")
        cfg = write(tmp_path, text)
        assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 3

    def test_selftest_passes(self, capsys):
        assert main(["selftest"]) == 0
        out = capsys.readouterr().out
        assert "[FAIL]" not in out
        assert "MGF at K=1" in out  # the documented constant-factor report

    def test_console_script_installed(self):
        proc = subprocess.run([sys.executable, "-m", "relaysel.cli", "--version"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert "relaysel" in proc.stdout


class TestFigurePresets:
    def test_fig2_structure(self):
        loaded = figure_config(2, trials=1000)
        assert loaded.sweep.n_values == (1, 2, 4)
        assert loaded.sweep.fd_td_values == (0.0,)
        assert set(loaded.sweep.methods) == {"montecarlo", "analytic", "asymptotic"}

    def test_fig3_curve_counts(self):
        # four Doppler values, three methods, one n: 4 curves per method
        curves = run_sweep(figure_config(3, trials=500), workers=2)
        by_method = {}
        for c in curves:
            by_method.setdefault(c.method, []).append(c)
        assert {m: len(cs) for m, cs in by_method.items()} == {
            "montecarlo": 4, "analytic": 4, "asymptotic": 4}

    def test_fig4_files(self, tmp_path):
        result = reproduce_figure(4, str(tmp_path), trials=500)
        body = open(result["csv"]).read().splitlines()
        assert body[0].startswith("snr_db,ser")
        # x-axis is the Doppler product: single SNR, many fd values
        assert len({line.split(",")[0] for line in body[1:]}) == 1
        assert len({line.split(",")[6] for line in body[1:]}) == 15
        assert "fd_td" in open(result["plot"]).read()

    def test_fig5_diversity_dataset(self, tmp_path):
        result = reproduce_figure(5, str(tmp_path))
        lines = open(result["csv"]).read().splitlines()
        assert lines[0] == "snr_db,diversity,method,source,n,fd_td,k,seed"
        assert len(lines) > 100
        vals = [float(line.split(",")[1]) for line in lines[1:]]
        assert all(-0.5 < v < 5.0 for v in vals)

    def test_fig6_k_curves(self, tmp_path):
        result = reproduce_figure(6, str(tmp_path), trials=500)
        lines = open(result["csv"]).read().splitlines()
        ks = {line.split(",")[7] for line in lines[1:]}
        assert ks == {"1", "2", "3", "4"}
        manifest = json.loads(open(result["manifest"]).read())
        assert manifest["seed"] == 12345

    def test_figure_reruns_byte_identical(self, tmp_path):
        r1 = reproduce_figure(6, str(tmp_path / "a"), trials=400)
        r2 = reproduce_figure(6, str(tmp_path / "b"), trials=400)
        assert open(r1["csv"], "rb").read() == open(r2["csv"], "rb").read()

    def test_bad_id(self, tmp_path):
        with pytest.raises(ValueError):
            reproduce_figure(7, str(tmp_path))
