"""End-to-end CLI tests, all in process through main(argv).

Exit code contract: 0 success, 1 usage errors, 2 data or validation
errors. Identical invocations must produce byte-identical outputs.
"""

import json

import pytest

from edgeroute import SessionTrace, SystemParams, TraceRecord, load_trace, run, write_trace
from edgeroute.cli import PARAMS_ENV_VAR, main
from edgeroute.routing import TraceScoreProvider

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


@pytest.fixture(autouse=True)
def _no_ambient_params(monkeypatch):
    monkeypatch.delenv(PARAMS_ENV_VAR, raising=False)


@pytest.fixture()
def trace_path(tmp_path):
    def rec(sid, turn, score, slm_q=0.0, edge_q=1.0):
        return TraceRecord(sid, turn, 100.0, 136.3, 460.1, slm_q, edge_q, score)

    sessions = [
        SessionTrace("a", (rec("a", 0, 0.9), rec("a", 1, 0.2, slm_q=1.0), rec("a", 2, 0.7))),
        SessionTrace("b", (rec("b", 0, 0.1, slm_q=1.0, edge_q=1.0), rec("b", 1, 0.8))),
        SessionTrace("c", (rec("c", 0, 0.6),)),
    ]
    path = tmp_path / "trace.jsonl"
    write_trace(sessions, path)
    return path


class TestSynth:
    def test_writes_the_requested_records(self, tmp_path, capsys):
        out = tmp_path / "t.jsonl"
        code = main(["synth", "--n", "90", "--turns-per-session", "4", "--out", str(out)])
        assert code == 0
        assert "wrote 90 records in 23 sessions" in capsys.readouterr().err
        sessions = load_trace(out)
        assert sum(len(s) for s in sessions) == 90

    def test_preset_targets_survive_an_n_override(self, tmp_path):
        out = tmp_path / "t.jsonl"
        assert main(["synth", "--preset", "mmlu", "--n", "200", "--out", str(out)]) == 0
        records = [r for s in load_trace(out) for r in s]
        assert len(records) == 200
        passes = sum(1 for r in records if r.slm_quality == 1.0)
        assert passes == 132  # round(200 * 0.6579)
        assert all(r.slm_resp_len == 1254.4 for r in records)

    def test_spec_file(self, tmp_path):
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps({"n_records": 12, "slm_acc": 0.25, "seed": 9}))
        out = tmp_path / "t.jsonl"
        assert main(["synth", "--spec", str(spec), "--out", str(out)]) == 0
        records = [r for s in load_trace(out) for r in s]
        assert len(records) == 12
        assert sum(1 for r in records if r.slm_quality == 1.0) == 3

    def test_spec_file_rejects_unknown_fields(self, tmp_path, capsys):
        spec = tmp_path / "spec.json"
        spec.write_text(json.dumps({"records": 12}))
        out = tmp_path / "t.jsonl"
        assert main(["synth", "--spec", str(spec), "--out", str(out)]) == 2
        assert "unknown fields" in capsys.readouterr().err

    def test_same_invocation_same_bytes(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        argv = ["synth", "--preset", "gsm8k", "--n", "300"]
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestRun:
    def test_csv_to_stdout(self, trace_path, capsys):
        assert main(["run", "--trace", str(trace_path)]) == 0
        out = capsys.readouterr().out
        lines = out.strip().split("\n")
        assert lines[0] == "avg_latency_ms,avg_quality,llm_usage,switch_count,turn_count"
        assert len(lines) == 2
        metrics = run(load_trace(trace_path), SystemParams(), TraceScoreProvider())
        cells = lines[1].split(",")
        assert cells[0] == f"{metrics.avg_latency * 1000.0:.3f}"
        assert cells[1] == str(metrics.avg_quality)
        assert cells[2] == str(metrics.llm_usage)
        assert cells[3:] == [str(metrics.switch_count), str(metrics.turn_count)]

    def test_out_file_matches_stdout(self, trace_path, tmp_path, capsys):
        assert main(["run", "--trace", str(trace_path)]) == 0
        stdout_text = capsys.readouterr().out
        out = tmp_path / "m.csv"
        assert main(["run", "--trace", str(trace_path), "--out", str(out)]) == 0
        assert out.read_text() == stdout_text

    def test_json_echoes_the_resolved_config(self, trace_path, capsys):
        assert main(["run", "--trace", str(trace_path), "--format", "json", "--alpha", "0"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["config"]["command"] == "run"
        assert payload["config"]["params"]["alpha"] == 0.0
        assert payload["config"]["params"]["bandwidth"] == 2.0e7
        assert payload["config"]["provider"] == {"kind": "trace"}
        assert payload["config"]["context_aware"] is True
        assert payload["config"]["theta"] == 0.5
        assert payload["metrics"]["turn_count"] == 6

    def test_theta_override_can_leave_the_unit_interval(self, trace_path, capsys):
        assert main(["run", "--trace", str(trace_path), "--theta", "-10", "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["config"]["theta"] == -10.0
        assert payload["metrics"]["llm_usage"] == 1.0

    def test_context_flag_is_plumbed_through(self, trace_path, capsys):
        assert main(
            ["run", "--trace", str(trace_path), "--no-context-aware", "--format", "json"]
        ) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["config"]["context_aware"] is False

    def test_random_provider_echo(self, trace_path, capsys):
        assert main(
            ["run", "--trace", str(trace_path), "--provider", "random", "--seed", "9", "--format", "json"]
        ) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["config"]["provider"] == {"kind": "random", "seed": 9}

    def test_empty_trace_yields_blank_means(self, tmp_path, capsys):
        empty = tmp_path / "empty.jsonl"
        empty.write_text("\n")
        assert main(["run", "--trace", str(empty)]) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[1] == ",,,0,0"

    def test_repeat_runs_are_byte_identical(self, trace_path, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["run", "--trace", str(trace_path), "--provider", "random", "--seed", "4"]
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestParamPrecedence:
    def test_params_file_overrides_preset_alpha(self, trace_path, tmp_path, capsys):
        params = tmp_path / "p.json"
        params.write_text(json.dumps({"alpha": 0.07}))
        assert main(
            [
                "run", "--trace", str(trace_path), "--preset", "gsm8k",
                "--params", str(params), "--format", "json",
            ]
        ) == 0
        assert json.loads(capsys.readouterr().out)["config"]["params"]["alpha"] == 0.07

    def test_flags_override_the_params_file(self, trace_path, tmp_path, capsys):
        params = tmp_path / "p.json"
        params.write_text(json.dumps({"alpha": 0.07, "overhead": 0.5}))
        assert main(
            [
                "run", "--trace", str(trace_path), "--params", str(params),
                "--alpha", "0.01", "--format", "json",
            ]
        ) == 0
        echoed = json.loads(capsys.readouterr().out)["config"]["params"]
        assert echoed["alpha"] == 0.01
        assert echoed["overhead"] == 0.5

    def test_env_var_names_the_default_params_file(self, trace_path, tmp_path, capsys, monkeypatch):
        params = tmp_path / "p.json"
        params.write_text(json.dumps({"theta": 0.0, "alpha": 0.0}))
        monkeypatch.setenv(PARAMS_ENV_VAR, str(params))
        assert main(["run", "--trace", str(trace_path), "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["config"]["params"]["theta"] == 0.0
        # Every recorded score is positive, so threshold zero sends all turns out.
        assert payload["metrics"]["llm_usage"] == 1.0

    def test_unknown_params_field_is_a_data_error(self, trace_path, tmp_path, capsys):
        params = tmp_path / "p.json"
        params.write_text(json.dumps({"alpha": 0.07, "latency": 1}))
        code = main(["run", "--trace", str(trace_path), "--params", str(params)])
        assert code == 2
        assert "unknown fields" in capsys.readouterr().err


class TestSweep:
    def test_header_and_grid(self, trace_path, capsys):
        assert main(["sweep", "--trace", str(trace_path), "--thetas", "0:1:5"]) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0] == "theta,avg_latency_ms,avg_quality,llm_usage,switch_count"
        assert [row.split(",")[0] for row in lines[1:]] == ["0.0", "0.25", "0.5", "0.75", "1.0"]

    def test_default_grid_has_101_points(self, trace_path, capsys):
        assert main(["sweep", "--trace", str(trace_path)]) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert len(lines) == 102
        assert lines[1].split(",")[0] == "0.0"
        assert lines[-1].split(",")[0] == "1.0"

    def test_grid_endpoints_are_exact_even_off_the_unit_interval(self, trace_path, capsys):
        assert main(["sweep", "--trace", str(trace_path), "--thetas=-3:1:3"]) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert [row.split(",")[0] for row in lines[1:]] == ["-3.0", "-1.0", "1.0"]

    def test_single_point_grid(self, trace_path, capsys):
        assert main(["sweep", "--trace", str(trace_path), "--thetas", "0.7:0.9:1"]) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert [row.split(",")[0] for row in lines[1:]] == ["0.7"]

    def test_malformed_grid_is_a_usage_error(self, trace_path, capsys):
        assert main(["sweep", "--trace", str(trace_path), "--thetas", "nope"]) == 1
        assert main(["sweep", "--trace", str(trace_path), "--thetas", "0:1:0"]) == 1

    def test_usage_is_monotone_on_the_default_grid(self, trace_path, capsys):
        assert main(["sweep", "--trace", str(trace_path)]) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        usages = [float(row.split(",")[3]) for row in lines[1:]]
        assert all(a >= b for a, b in zip(usages, usages[1:]))

    def test_json_lists_the_sorted_grid(self, trace_path, capsys):
        assert main(
            ["sweep", "--trace", str(trace_path), "--thetas", "1:0:3", "--format", "json"]
        ) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["config"]["thetas"] == [0.0, 0.5, 1.0]
        assert [p["theta"] for p in payload["points"]] == [0.0, 0.5, 1.0]

    def test_plot_file_is_rendered(self, trace_path, tmp_path, capsys):
        plot = tmp_path / "curve.png"
        assert main(
            ["sweep", "--trace", str(trace_path), "--thetas", "0:1:5", "--plot", str(plot)]
        ) == 0
        assert plot.read_bytes()[:8] == PNG_MAGIC

    def test_repeat_sweeps_are_byte_identical(self, trace_path, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        argv = ["sweep", "--trace", str(trace_path), "--provider", "random", "--seed", "1"]
        assert main(argv + ["--out", str(a)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestCompare:
    CURVES = [
        "--curve", "label=informed,provider=trace",
        "--curve", "label=blind,provider=trace,context=false",
        "--curve", "label=coin,provider=random,seed=5",
    ]

    def test_csv_has_one_block_per_curve(self, trace_path, capsys):
        assert main(
            ["compare", "--trace", str(trace_path), "--thetas", "0:1:3"] + self.CURVES
        ) == 0
        lines = capsys.readouterr().out.strip().split("\n")
        assert lines[0] == "label,theta,avg_latency_ms,avg_quality,llm_usage,switch_count"
        labels = [row.split(",")[0] for row in lines[1:]]
        assert labels == ["informed"] * 3 + ["blind"] * 3 + ["coin"] * 3

    def test_json_payload(self, trace_path, capsys):
        assert main(
            ["compare", "--trace", str(trace_path), "--thetas", "0:1:3", "--format", "json"]
            + self.CURVES
        ) == 0
        payload = json.loads(capsys.readouterr().out)
        assert [c["label"] for c in payload["config"]["curves"]] == ["informed", "blind", "coin"]
        assert payload["config"]["curves"][1]["context_aware"] is False
        assert payload["config"]["curves"][2]["seed"] == 5
        assert set(payload["curves"]) == {"informed", "blind", "coin"}

    def test_duplicate_labels_are_a_data_error(self, trace_path, capsys):
        assert main(
            [
                "compare", "--trace", str(trace_path),
                "--curve", "label=x,provider=trace",
                "--curve", "label=x,provider=random",
            ]
        ) == 2
        assert "duplicate compare labels" in capsys.readouterr().err

    def test_bad_curve_spec_is_a_usage_error(self, trace_path):
        assert main(
            ["compare", "--trace", str(trace_path), "--curve", "provider=trace"]
        ) == 1
        assert main(
            ["compare", "--trace", str(trace_path), "--curve", "label=x,provider=oracle"]
        ) == 1

    def test_plot_and_determinism(self, trace_path, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        plot = tmp_path / "cmp.png"
        argv = ["compare", "--trace", str(trace_path), "--thetas", "0:1:5"] + self.CURVES
        assert main(argv + ["--out", str(a), "--plot", str(plot)]) == 0
        assert main(argv + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert plot.read_bytes()[:8] == PNG_MAGIC


class TestExitCodes:
    def test_unknown_flag(self, trace_path):
        assert main(["run", "--trace", str(trace_path), "--bogus"]) == 1

    def test_missing_required_argument(self):
        assert main(["run"]) == 1

    def test_unknown_subcommand(self):
        assert main(["explode"]) == 1

    def test_missing_trace_file(self, tmp_path, capsys):
        assert main(["run", "--trace", str(tmp_path / "nope.jsonl")]) == 2
        assert "error:" in capsys.readouterr().err

    def test_malformed_trace_reports_file_and_line(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"session_id": "a"}\n')
        assert main(["run", "--trace", str(bad)]) == 2
        assert "bad.jsonl:1" in capsys.readouterr().err

    def test_trace_provider_on_a_score_free_trace(self, tmp_path, capsys):
        path = tmp_path / "t.jsonl"
        write_trace(
            [SessionTrace("a", (TraceRecord("a", 0, 10.0, 20.0, 30.0, 0.0, 1.0, None),))], path
        )
        assert main(["run", "--trace", str(path)]) == 2
        assert "no semantic_score" in capsys.readouterr().err

    def test_invalid_constant_score(self, trace_path):
        assert main(
            ["run", "--trace", str(trace_path), "--provider", "constant", "--score", "1.5"]
        ) == 2

    def test_invalid_synth_spec_values(self, tmp_path):
        assert main(["synth", "--n", "0", "--out", str(tmp_path / "t.jsonl")]) == 2
