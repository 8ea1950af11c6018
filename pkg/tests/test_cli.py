"""Command-line verbs, config validation, trace persistence, plotting."""

import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from amoo import cli, driver, traceio
from amoo.driver import GDConfig, RunConfig, WeightingChoice
from amoo.plotting import trace_svg
from amoo.problems import ProblemSpec


VALID_CONFIG = {
    "problem": {"kind": "specification", "delta": 0.1},
    "weighting": {"kind": "ew"},
    "inner": {"kind": "gd", "step": 0.25},
    "run": {"steps": 50, "x0": [1.0, 1.0]},
    "output": {"plot": True},
}


def write_config(tmp_path, doc):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return str(path)


def make_trace(steps=30, step=0.25, weighting=None, problem=None):
    return driver.run(
        RunConfig(
            problem=problem or ProblemSpec(kind="specification", delta=0.1),
            weighting=weighting or WeightingChoice(kind="ew"),
            inner=GDConfig(step=step),
            steps=steps,
            x0=(1.0, 1.0),
        )
    )


class TestRunCommand:
    def test_valid_config(self, tmp_path, capsys):
        cfg = write_config(tmp_path, VALID_CONFIG)
        out = tmp_path / "out"
        assert cli.cmd_run(cfg, str(out)) == 0
        lines = (out / "trace.csv").read_text().splitlines()
        assert lines[0] == "step,f_1,f_2,w_1,w_2,grad_norm,residual,msq,lambda_min_est,pu_gap"
        assert len(lines) == 52  # header + steps 0..50
        summary = json.loads((out / "summary.json").read_text())
        assert summary["final"]["residual"] <= 1e-5
        assert summary["error"] is None
        assert "verdicts" in summary and summary["verdicts"]["finite"]
        assert (out / "plot.svg").exists()

    def test_unknown_key_names_it(self, tmp_path, capsys):
        doc = dict(VALID_CONFIG)
        doc["run"] = {"steps": 5, "lr_sched": "cosine"}
        code = cli.cmd_run(write_config(tmp_path, doc), str(tmp_path / "o"))
        assert code == 2
        assert "lr_sched" in capsys.readouterr().out

    def test_missing_required_field(self, tmp_path, capsys):
        doc = {"problem": {"kind": "specification"}, "inner": {"kind": "gd"}}
        code = cli.cmd_run(write_config(tmp_path, doc), str(tmp_path / "o"))
        assert code == 2
        assert "inner.step" in capsys.readouterr().out

    @pytest.mark.filterwarnings("ignore:overflow")
    def test_divergent_run_persists_partial_trace(self, tmp_path, capsys):
        doc = {
            "problem": {"kind": "specification", "delta": 0.1},
            "inner": {"kind": "gd", "step": 10.0},
            "run": {"steps": 3000, "x0": [1.0, 1.0]},
        }
        out = tmp_path / "out"
        code = cli.cmd_run(write_config(tmp_path, doc), str(out))
        assert code == 3
        assert (out / "trace.csv").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["error"] is not None

    def test_unreadable_config(self, tmp_path, capsys):
        assert cli.cmd_run(str(tmp_path / "missing.json"), str(tmp_path)) == 2

    def test_env_var_out_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("AMOO_OUT_DIR", str(tmp_path / "envout"))
        doc = dict(VALID_CONFIG)
        doc["output"] = {"plot": False}
        assert cli.cmd_run(write_config(tmp_path, doc), None) == 0
        assert (tmp_path / "envout" / "trace.csv").exists()

    def test_preset_config(self, tmp_path):
        doc = {
            "problem": {"kind": "specification", "delta": 0.1},
            "preset": "camoo-theory",
            "run": {"steps": 30, "x0": [1.0, 1.0]},
        }
        out = tmp_path / "out"
        assert cli.cmd_run(write_config(tmp_path, doc), str(out)) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["verdicts"]["theorem_bound"] is True

    def test_preset_conflicts_with_sections(self, tmp_path, capsys):
        doc = dict(VALID_CONFIG)
        doc["preset"] = "pamoo-theory"
        assert cli.cmd_run(write_config(tmp_path, doc), str(tmp_path)) == 2


class TestTraceRoundTrip:
    def test_lossless(self, tmp_path):
        trace = make_trace(steps=20)
        path = tmp_path / "t.csv"
        traceio.write_trace_csv(trace, path)
        loaded = traceio.read_trace_csv(path)
        assert loaded.steps == [r.step for r in trace.records]
        for i, rec in enumerate(trace.records):
            np.testing.assert_array_equal(loaded.f[i], rec.f)
            np.testing.assert_array_equal(loaded.w[i], rec.w)
            assert loaded.residual[i] == rec.residual
            assert loaded.grad_norm[i] == rec.grad_norm
            assert loaded.msq[i] is None

    def test_optional_columns_roundtrip(self, tmp_path):
        trace = make_trace(
            steps=5,
            weighting=WeightingChoice(kind="camoo"),
        )
        path = tmp_path / "t.csv"
        traceio.write_trace_csv(trace, path)
        loaded = traceio.read_trace_csv(path)
        for i, rec in enumerate(trace.records):
            assert loaded.lambda_min_est[i] == rec.lambda_min_est

    def test_rejects_non_trace(self, tmp_path):
        path = tmp_path / "junk.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError):
            traceio.read_trace_csv(path)


class TestAnalyzeCommand:
    def test_fit_rate_on_geometric_trace(self, tmp_path, capsys):
        trace = make_trace(steps=60)
        path = tmp_path / "t.csv"
        traceio.write_trace_csv(trace, path)
        assert cli.cmd_analyze(str(path), fit=True) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["fitted_rate"] == pytest.approx(0.75, abs=0.01)

    def test_theorem_check_flags(self, tmp_path, capsys):
        trace = make_trace(steps=60, step=1.0 / 3.6)
        path = tmp_path / "t.csv"
        traceio.write_trace_csv(trace, path)
        code = cli.cmd_analyze(
            str(path),
            theorem={"beta": 1.8, "mu": 1.0, "m_self": 0.0, "which": "CAMOO"},
        )
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["theorem_bound"] is True

    def test_unreadable_trace(self, tmp_path, capsys):
        assert cli.cmd_analyze(str(tmp_path / "nope.csv"), fit=True) == 2


class TestPlotCommand:
    def test_two_record_trace_has_polylines(self, tmp_path):
        trace = make_trace(steps=1)
        assert len(trace.records) == 2
        svg = trace_svg(trace)
        root = ET.fromstring(svg)  # valid XML
        polylines = root.findall(".//{http://www.w3.org/2000/svg}polyline")
        assert len(polylines) >= 2

    def test_plot_command_writes_file(self, tmp_path):
        trace = make_trace(steps=10)
        csv_path = tmp_path / "t.csv"
        traceio.write_trace_csv(trace, csv_path)
        out = tmp_path / "p.svg"
        assert cli.cmd_plot(str(csv_path), str(out)) == 0
        ET.parse(out)

    def test_weights_panel_has_m_polylines(self, tmp_path):
        trace = make_trace(
            steps=4, problem=ProblemSpec(kind="selection", m=3, n=2)
        )
        svg = trace_svg(trace)
        root = ET.fromstring(svg)
        polylines = root.findall(".//{http://www.w3.org/2000/svg}polyline")
        # residual + 3 weights
        assert len(polylines) == 4


class TestListAndVerify:
    def test_list_problems(self, capsys):
        assert cli.cmd_list_problems() == 0
        out = capsys.readouterr().out
        for kind in (
            "specification",
            "selection",
            "local_curvature",
            "quad_family",
            "mlp_matching",
            "misaligned",
        ):
            assert kind in out

    def test_verify_passes_default_seed(self, capsys):
        assert cli.cmd_verify(seed=0) == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 4 and "FAIL" not in out

    def test_main_dispatch(self, tmp_path, capsys):
        assert cli.main(["list-problems"]) == 0
        cfg = write_config(tmp_path, VALID_CONFIG)
        assert cli.main(["run", cfg, "--out-dir", str(tmp_path / "o")]) == 0
