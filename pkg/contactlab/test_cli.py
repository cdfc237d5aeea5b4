#!/usr/bin/env python3
"""
contactlab - command-line surface tests
"""

import json

import pytest

import main
from models.report_models import RunReport, Verdict


def run_main(argv, capsys):
    code = main.main(argv + ["--log-level", "WARNING"])
    return code, capsys.readouterr().out


class TestInformational:

    def test_list_catalog(self, capsys):
        code, out = run_main(["--list-catalog"], capsys)
        assert code == main.EXIT_PASS
        names = [item["name"] for item in json.loads(out)]
        assert names[0] == "example1"
        assert "cr_warped_r7" in names

    def test_list_catalog_filter(self, capsys):
        _, out = run_main(["--list-catalog", "trivial"], capsys)
        assert [item["name"] for item in json.loads(out)] == ["cr_product_r7"]

    @pytest.mark.parametrize("which,field", [("config", "catalog"), ("report", "verdict")])
    def test_schema(self, which, field, capsys):
        code, out = run_main(["--schema", which], capsys)
        assert code == main.EXIT_PASS
        assert field in json.loads(out)["properties"]


class TestConfigErrors:

    def test_no_source(self, capsys):
        code, out = run_main([], capsys)
        assert code == main.EXIT_CONFIG_ERROR
        assert json.loads(out)["error"]["code"] == "config_error"

    def test_both_sources(self, tmp_path, capsys):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"catalog": "example1"}))
        code, _ = run_main(["--config", str(path), "--catalog", "example1"], capsys)
        assert code == main.EXIT_CONFIG_ERROR

    def test_unguarded_degeneracy_has_suggestion(self, tmp_path, capsys):
        document = {
            "ambient": {"name": "euclidean_acm", "n": 3},
            "immersion": {
                "variables": ["u", "v", "w", "t", "z"],
                "components": ["u+v", "-u+v", "t*cos(w)", "t*sin(w)", "w*cos(t)", "w*sin(t)", "z"],
                "domain": [[-1, 1], [-1, 1], [0.2, 2], [0.2, 2], [-1, 1]],
                "degeneracies": ["w-t"],
            },
        }
        path = tmp_path / "run.json"
        path.write_text(json.dumps(document))
        code, out = run_main(["--config", str(path)], capsys)
        response = json.loads(out)
        assert code == main.EXIT_CONFIG_ERROR
        assert response["error"]["pointer"] == "/immersion/exclusions"
        assert response["suggestion"]

    def test_malformed_tolerance(self, capsys):
        code, out = run_main(["--catalog", "example1", "--tol", "angle"], capsys)
        assert code == main.EXIT_CONFIG_ERROR
        assert json.loads(out)["error"]["pointer"] == "/tolerances"

    def test_bad_log_level(self, capsys):
        assert main.main(["--catalog", "example1", "--log-level", "chatty"]) == main.EXIT_CONFIG_ERROR


class TestConfigMerge:

    def test_flags_override_file(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"catalog": "example1", "samples": 50, "tolerances": {"angle": 1e-6}}))
        args = main.build_parser().parse_args([
            "--config", str(path), "--samples", "3", "--seed", "8",
            "--tol", "structural=1e-7", "--suite", "structure", "--suite", "tangency",
        ])
        config = main.build_config(args)
        assert config.samples == 3
        assert config.seed == 8
        assert config.tolerances == {"angle": 1e-6, "structural": 1e-7}
        assert [s.value for s in config.suites] == ["structure", "tangency"]


class TestRun:

    def test_run_writes_report_and_jsonl(self, tmp_path, capsys):
        output = tmp_path / "report.json"
        jsonl = tmp_path / "rows.jsonl"
        code, _ = run_main([
            "--catalog", "invariant_r5", "--samples", "2", "--suite", "structure",
            "--output", str(output), "--jsonl", str(jsonl),
        ], capsys)
        report = RunReport.from_json(output.read_text())
        assert code == report.exit_code == 0
        assert report.verdict == Verdict.PASS
        rows = [json.loads(line) for line in jsonl.read_text().splitlines()]
        assert len(rows) == 2
        assert rows[0]["suite"] == "structure"

    def test_exit_code_follows_report(self, capsys, mocker):
        report = RunReport(
            success=False, engine_version="x", entry="example1", sample_count=0,
            verdict=Verdict.FAIL, exit_code=1,
        )
        mocker.patch.object(main.RunOrchestrator, "run", mocker.AsyncMock(return_value=report))
        code, out = run_main(["--catalog", "example1"], capsys)
        assert code == main.EXIT_VIOLATIONS
        assert json.loads(out)["verdict"] == "fail"
