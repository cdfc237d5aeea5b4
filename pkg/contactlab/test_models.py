#!/usr/bin/env python3
"""
contactlab - config and report model tests
"""

import json

import pytest
from pydantic import ValidationError

from config.settings import settings
from models.config_models import (
    ConfigError,
    RunConfig,
    load_run_config,
    parse_tolerance_overrides,
    read_run_config,
)
from models.report_models import (
    ErrorDetail,
    ErrorResponse,
    PointRecord,
    ResidualStats,
    RunReport,
    SuiteName,
    SuiteReport,
    Verdict,
)


def inline_document(**overrides):
    document = {
        "ambient": {"name": "euclidean_acm", "n": 1},
        "immersion": {
            "variables": ["s", "z"],
            "components": ["cos(s)", "sin(s)", "z"],
            "domain": [[0.0, 3.0], [-1.0, 1.0]],
        },
    }
    document.update(overrides)
    return document


def small_report() -> RunReport:
    record = PointRecord(
        index=0,
        point=[0.1, 0.2],
        residuals={"metricity": 1e-14, "T4": "refused: degenerate θ"},
        observables={"theta": 1.2},
    )
    suite = SuiteReport(
        suite=SuiteName.STRUCTURE,
        verdict=Verdict.PASS,
        stats={"metricity": ResidualStats(max=1e-14, mean=1e-14, count=1, tolerance=1e-8, passed=True)},
        points=[record],
    )
    return RunReport(
        success=True,
        engine_version="contactlab test",
        entry="inline",
        sample_count=1,
        suites=[suite],
        verdict=Verdict.PASS,
        exit_code=0,
    )


class TestRunConfig:

    def test_catalog_defaults(self):
        config = load_run_config({"catalog": "example1"})
        assert config.samples == settings.SAMPLE_COUNT
        assert config.seed == settings.RANDOM_SEED
        assert config.effective_tolerances() == settings.get_tolerances()

    def test_tolerance_override(self):
        config = load_run_config({"catalog": "example1", "tolerances": {"structural": 1e-6}})
        assert config.effective_tolerances()["structural"] == 1e-6
        assert config.effective_tolerances()["angle"] == settings.ANGLE_TOLERANCE

    def test_inline_entry(self):
        entry = load_run_config(inline_document()).inline_entry()
        assert entry["name"] == "inline"
        assert entry["immersion"]["domain"] == [[0.0, 3.0], [-1.0, 1.0]]
        assert "split" not in entry

    def test_suites_parsed(self):
        config = load_run_config({"catalog": "cr_warped_r7", "suites": ["warped", "lemmas"]})
        assert config.suites == [SuiteName.WARPED, SuiteName.LEMMAS]


class TestConfigErrors:

    @pytest.mark.parametrize("document,pointer", [
        ({"catalog": "example1", "samples": 0}, "/samples"),
        ({"catalog": "example1", "tolerances": {"bogus": 1.0}}, "/tolerances"),
        ({"catalog": "example1", "suites": ["structure", "structure"]}, "/suites"),
        ({"catalog": "example1", "suites": ["nope"]}, "/suites/0"),
        ({"catalog": "example1", "unknown_key": 1}, "/unknown_key"),
        (inline_document(ambient={"name": "euclidean_acm", "n": 0}), "/ambient/n"),
    ])
    def test_pointer(self, document, pointer):
        with pytest.raises(ConfigError) as info:
            load_run_config(document)
        assert info.value.pointer == pointer

    def test_immersion_schema_checked_first(self):
        document = inline_document()
        document["immersion"]["components"] = ["cos(s)", 2, "z"]
        with pytest.raises(ConfigError) as info:
            load_run_config(document)
        assert info.value.pointer == "/immersion/components/1"

    def test_missing_source(self):
        with pytest.raises(ConfigError, match="either 'catalog' or 'immersion'"):
            load_run_config({"samples": 3})

    def test_catalog_and_inline_exclusive(self):
        with pytest.raises(ConfigError, match="cannot be combined"):
            load_run_config(inline_document(catalog="example1"))

    def test_inline_needs_ambient(self):
        document = inline_document()
        del document["ambient"]
        with pytest.raises(ConfigError, match="needs an 'ambient'"):
            load_run_config(document)

    def test_negative_tolerance(self):
        with pytest.raises(ConfigError, match="positive"):
            load_run_config({"catalog": "example1", "tolerances": {"angle": -1.0}})

    def test_not_an_object(self):
        with pytest.raises(ConfigError):
            load_run_config([1, 2])

    def test_message_includes_pointer(self):
        error = ConfigError("bad value", "/samples")
        assert str(error) == "/samples: bad value"
        assert error.detail == "bad value"


class TestConfigFiles:

    def test_read_file(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"catalog": "example1"}))
        assert read_run_config(str(path)) == {"catalog": "example1"}

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("{\"catalog\": }")
        with pytest.raises(ConfigError, match="invalid JSON at line 1"):
            read_run_config(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            read_run_config(str(tmp_path / "absent.json"))

    def test_tolerance_overrides(self):
        assert parse_tolerance_overrides(["angle=1e-5", " structural = 2e-8"]) == {"angle": 1e-5, "structural": 2e-8}

    @pytest.mark.parametrize("item,pointer", [("angle", "/tolerances"), ("angle=abc", "/tolerances/angle")])
    def test_malformed_overrides(self, item, pointer):
        with pytest.raises(ConfigError) as info:
            parse_tolerance_overrides([item])
        assert info.value.pointer == pointer


class TestReportModels:

    def test_json_round_trip(self):
        report = small_report()
        again = RunReport.from_json(report.to_json())
        assert again.canonical_json() == report.canonical_json()
        assert again.suite("structure").points[0].residuals["T4"].startswith("refused")

    def test_canonical_json_omits_timestamp(self):
        assert "timestamp" not in json.loads(small_report().canonical_json())
        assert "timestamp" in json.loads(small_report().to_json())

    def test_residual_records(self):
        records = small_report().residual_records()
        assert len(records) == 1
        assert records[0]["suite"] == "structure"
        assert records[0]["observables"] == {"theta": 1.2}

    def test_missing_suite(self):
        with pytest.raises(KeyError):
            small_report().suite(SuiteName.LEMMAS)

    def test_unmarked_string_residual_rejected(self):
        with pytest.raises(ValidationError):
            PointRecord(index=0, point=[0.0], residuals={"metricity": "large"})

    def test_negative_aggregate_rejected(self):
        with pytest.raises(ValidationError):
            ResidualStats(max=-1.0, tolerance=1e-8, passed=True)

    def test_error_response_defaults(self):
        response = ErrorResponse(error=ErrorDetail(code="config_error", message="bad", pointer="/samples"))
        assert not response.success
        assert response.exit_code == 2

    def test_run_config_schema_lists_suites(self):
        schema = RunConfig.model_json_schema()
        assert "suites" in schema["properties"]
