#!/usr/bin/env python3
"""
contactlab - run orchestration tests
"""

import pytest

from models.config_models import ConfigError, load_run_config
from models.report_models import Classification, SuiteName, Verdict
from orchestrator.run_orchestrator import RunOrchestrator
from suites import SUITE_REGISTRY, create_suite_instance, get_suite_by_name

UNGUARDED_EXAMPLE = {
    "ambient": {"name": "euclidean_acm", "n": 3},
    "immersion": {
        "variables": ["u", "v", "w", "t", "z"],
        "components": ["u+v", "-u+v", "t*cos(w)", "t*sin(w)", "w*cos(t)", "w*sin(t)", "z"],
        "domain": [[-1.0, 1.0], [-1.0, 1.0], [0.2, 2.0], [0.2, 2.0], [-1.0, 1.0]],
        "degeneracies": ["w-t"],
    },
}


@pytest.fixture
def orchestrator():
    return RunOrchestrator(max_concurrency=2)


def resolve_error(orchestrator, document) -> ConfigError:
    with pytest.raises(ConfigError) as info:
        orchestrator.resolve(load_run_config(document))
    return info.value


class TestSuiteRegistry:

    def test_all_suites_registered(self):
        assert set(SUITE_REGISTRY) == {s.value for s in SuiteName}

    def test_lookup_by_enum(self):
        assert get_suite_by_name(SuiteName.LEMMAS).requires == ('split', 'warp', 'sasakian')

    def test_unknown_suite(self):
        with pytest.raises(ValueError):
            create_suite_instance("curvature")


class TestResolution:

    def test_default_suites_come_from_entry(self, orchestrator):
        run, suites = orchestrator.resolve(load_run_config({"catalog": "example1", "samples": 3}))
        assert [s.name for s in suites] == [SuiteName.STRUCTURE, SuiteName.TANGENCY, SuiteName.SEMISLANT]
        assert run.points.shape == (3, 5)
        assert run.candidate is None

    def test_inline_defaults_to_structure(self, orchestrator):
        document = {
            "ambient": {"name": "euclidean_acm", "n": 1},
            "immersion": {"variables": ["s", "z"], "components": ["cos(s)", "sin(s)", "z"], "domain": [[0, 3], [-1, 1]]},
            "samples": 2,
        }
        _, suites = orchestrator.resolve(load_run_config(document))
        assert [s.name for s in suites] == [SuiteName.STRUCTURE]

    def test_unguarded_degeneracy(self, orchestrator):
        error = resolve_error(orchestrator, UNGUARDED_EXAMPLE)
        assert error.pointer == "/immersion/exclusions"
        assert error.detail.startswith("excluded-point predicate required")

    def test_missing_prerequisites(self, orchestrator):
        error = resolve_error(orchestrator, {"catalog": "example1", "suites": ["lemmas"]})
        assert error.pointer == "/suites/0"
        assert "warp declaration" in error.detail
        assert "Sasakian ambient" in error.detail

    def test_unknown_catalog_entry(self, orchestrator):
        assert resolve_error(orchestrator, {"catalog": "torus"}).pointer == "/catalog"

    def test_unknown_ambient(self, orchestrator):
        document = {**UNGUARDED_EXAMPLE, "ambient": {"name": "cosymplectic", "n": 3}}
        assert resolve_error(orchestrator, document).pointer == "/ambient"

    def test_codomain_mismatch(self, orchestrator):
        document = {**UNGUARDED_EXAMPLE, "ambient": {"name": "euclidean_acm", "n": 2}}
        assert resolve_error(orchestrator, document).pointer == "/immersion/components"

    def test_bad_expression(self, orchestrator):
        document = {
            "ambient": {"name": "euclidean_acm", "n": 1},
            "immersion": {"variables": ["s", "z"], "components": ["cos(s", "sin(s)", "z"], "domain": [[0, 3], [-1, 1]]},
        }
        error = resolve_error(orchestrator, document)
        assert error.pointer == "/immersion"
        assert "unbalanced parentheses" in error.detail

    def test_split_override_checked(self, orchestrator):
        error = resolve_error(orchestrator, {"catalog": "example1", "split": {"D": [[1, 0]], "Dtheta": []}})
        assert error.pointer == "/split"


class TestRuns:

    @pytest.mark.asyncio
    async def test_example1_classification(self, orchestrator):
        report = await orchestrator.run(load_run_config({"catalog": "example1", "samples": 4, "seed": 3}))
        assert report.verdict == Verdict.PASS
        assert report.exit_code == 0
        assert report.classification == Classification.PROPER_POINTWISE_SEMI_SLANT
        assert not report.theta_statistics['constant']
        assert report.sample_count == 4
        assert report.suite("structure").findings['xi_position'] == ["tangent"]

    @pytest.mark.asyncio
    async def test_reports_are_deterministic(self):
        config = load_run_config({"catalog": "invariant_r5", "samples": 3, "seed": 9})
        first = await RunOrchestrator(max_concurrency=1).run(config)
        second = await RunOrchestrator(max_concurrency=3).run(config)
        assert first.canonical_json() == second.canonical_json()

    @pytest.mark.asyncio
    async def test_contact_cr_warped_product(self, orchestrator):
        report = await orchestrator.run(load_run_config({"catalog": "cr_warped_r7", "samples": 2, "seed": 1}))
        assert report.verdict == Verdict.PASS, [s.failures for s in report.suites]
        assert report.classification == Classification.CONTACT_CR

        warped = report.suite("warped").findings
        assert warped['warp_detected'] and not warped['trivial']
        assert warped['corollary_contrapositive']

        lemmas = report.suite("lemmas")
        assert set(lemmas.findings['refused']) == {'L2', 'L7', 'L8', 'T4'}
        assert lemmas.findings['identity_labels']['T4'] == 'warp_slant_gradient'
        assert lemmas.stats['T4'].refused == 2
        assert lemmas.stats['T4'].count == 0
        assert lemmas.findings['anti_invariant_shape_printed_max'] > 1e-3

    @pytest.mark.asyncio
    async def test_degenerate_tolerance_reaches_the_lemma_refusals(self, orchestrator):
        config = load_run_config({
            "catalog": "cr_warped_r7", "samples": 2, "seed": 1, "suites": ["lemmas"],
            "tolerances": {"degenerate": 2.0},
        })
        report = await orchestrator.run(config)
        lemmas = report.suite("lemmas")
        assert set(lemmas.findings['refused']) == {'L2', 'L7', 'L8', 'T4', 'T5'}
        assert lemmas.stats['T5'].refused == 2

    @pytest.mark.asyncio
    async def test_arithmetic_chains_use_their_own_tolerance(self, orchestrator):
        config = load_run_config({"catalog": "cr_warped_r7", "samples": 1, "seed": 1, "suites": ["lemmas"]})
        report = await orchestrator.run(config)
        stats = report.suite("lemmas").stats
        for key in ('chain_sin', 'chain_cos', 'xi_lnf'):
            assert stats[key].tolerance == 1e-10

    @pytest.mark.asyncio
    async def test_trivial_product(self, orchestrator):
        config = load_run_config({"catalog": "cr_product_r7", "samples": 2, "suites": ["warped"]})
        report = await orchestrator.run(config)
        assert report.verdict == Verdict.PASS
        assert report.suite("warped").findings['trivial']

    @pytest.mark.asyncio
    async def test_tight_tolerance_fails(self, orchestrator):
        config = load_run_config({
            "catalog": "cr_warped_r7",
            "samples": 2,
            "suites": ["structure"],
            "tolerances": {"structural": 1e-300},
        })
        report = await orchestrator.run(config)
        assert report.verdict == Verdict.FAIL
        assert report.exit_code == 1
        assert report.config['tolerances']['structural'] == 1e-300

    @pytest.mark.asyncio
    async def test_point_failure_becomes_error_row(self, orchestrator, mocker):
        mocker.patch.object(RunOrchestrator, '_evaluate_point', side_effect=RuntimeError("boom"))
        report = await orchestrator.run(load_run_config({"catalog": "invariant_r5", "samples": 2}))
        assert report.verdict == Verdict.FAIL
        structure = report.suite("structure")
        assert structure.error_count == 2
        assert structure.points[0].errors == ["boom"]
