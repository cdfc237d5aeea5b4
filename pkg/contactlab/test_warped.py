#!/usr/bin/env python3
"""
contactlab - warp recovery and warped-product identity tests
"""

import math

import numpy as np
import pytest

from config.settings import settings
from geometry.ambient import make_euclidean_acm
from geometry.immersion import Immersion, WarpDeclaration, catalog, frame_at, sample_points
from geometry.secondform import second_form
from geometry.warped import (
    LEMMA_KEYS,
    LEMMA_LABELS,
    REFUSED_DEGENERATE,
    DegenerateAngleError,
    WarpedCandidate,
    WarpStructureError,
    XiLocation,
    bishop_oneill_check,
    detect_warp,
    lemma_suite,
    prepare_lemma_inputs,
    slant_gradient,
    theorem4_check,
    theta_at,
    theta_jet_gradient,
    warp_data_at,
)
from numjet.jet import central_difference
from orchestrator.context import PointContext, RunContext


def run_context(name: str, count: int = 3, seed: int = 5) -> RunContext:
    entry = catalog(name)
    return RunContext(
        entry=entry,
        suites=[],
        points=sample_points(entry.immersion, count, seed),
        seed=seed,
        tolerances=settings.get_tolerances(),
        candidate=WarpedCandidate(entry.immersion, entry.warp),
    )


class TestWarpRecovery:

    def test_planted_exponential_warp(self):
        run = run_context("warp_surface_r5")
        for p in run.points:
            data = warp_data_at(run.candidate, run.ambient, p)
            assert data.f == pytest.approx(math.exp(p[0]), rel=1e-12)
            assert data.dlnf[0] == pytest.approx(1.0, abs=1e-10)
            assert abs(data.dlnf[2]) < 1e-10
            assert data.fiber_lnf_derivative < 1e-10
            assert data.xi_location == XiLocation.BASE

    def test_detect_nontrivial_warp(self):
        run = run_context("warp_surface_r5", count=5)
        report = detect_warp(run.candidate, run.ambient, run.points)
        assert not report.trivial
        assert report.max_lnf_gradient > 0.1
        assert report.xi_locations == ["base"]
        assert not report.xi_in_fiber
        assert len(run.candidate.f_samples) == 5

    def test_cr_product_is_trivial(self):
        run = run_context("cr_product_r7")
        report = detect_warp(run.candidate, run.ambient, run.points)
        assert report.trivial
        assert report.to_dict()['max_lnf_gradient'] < 1e-12

    def test_cr_warped_radial_warp(self):
        run = run_context("cr_warped_r7")
        for p in run.points:
            data = warp_data_at(run.candidate, run.ambient, p)
            radius2 = p[0] ** 2 + p[1] ** 2
            assert data.f == pytest.approx(math.sqrt(radius2 / 2.0), rel=1e-10)
            assert data.dlnf[0] == pytest.approx(p[0] / radius2, abs=1e-10)
            assert data.dlnf[1] == pytest.approx(p[1] / radius2, abs=1e-10)

    def test_off_block_metric_rejected(self):
        im = Immersion.from_spec({
            "variables": ["u", "v"],
            "components": ["u", "u+v", "0"],
            "domain": [[-1.0, 1.0], [-1.0, 1.0]],
        })
        declaration = WarpDeclaration.from_spec({"base_vars": ["u"], "fiber_vars": ["v"], "reference_point": [0.0]}, im)
        with pytest.raises(WarpStructureError, match="off-block"):
            detect_warp(WarpedCandidate(im, declaration), make_euclidean_acm(1), [[0.2, 0.3]])

    def test_detect_needs_points(self):
        run = run_context("cr_product_r7")
        with pytest.raises(ValueError):
            detect_warp(run.candidate, run.ambient, [])

    @pytest.mark.parametrize("name", ["warp_surface_r5", "cr_warped_r7", "cr_product_r7"])
    def test_bishop_oneill_structure(self, name):
        run = run_context(name)
        for p in run.points:
            fp = frame_at(run.immersion, run.ambient, p)
            data = warp_data_at(run.candidate, run.ambient, p)
            residuals = bishop_oneill_check(run.candidate, run.ambient, second_form(fp, run.ambient), data)
            assert max(residuals.values()) < 1e-8


class TestSlantFunctionDerivative:

    def test_theta_at_matches_anti_invariant_fiber(self):
        run = run_context("cr_warped_r7")
        assert theta_at(run.immersion, run.ambient, run.split, run.points[0]) == pytest.approx(math.pi / 2, abs=1e-10)

    def test_constant_theta_has_zero_gradient(self):
        run = run_context("cr_warped_r7")
        gradient = PointContext(run, 0, run.points[0]).slant_gradient
        assert np.max(np.abs(gradient.gradient)) < 1e-6
        assert not gradient.unstable

    def test_jet_gradient_matches_closed_form_on_example1(self):
        entry = catalog("example1")

        def closed_form(q):
            w, t = q[2], q[3]
            return math.acos(abs(t - w) / math.sqrt((t * t + 1.0) * (w * w + 1.0)))

        for p in sample_points(entry.immersion, 5, seed=3):
            fp = frame_at(entry.immersion, entry.ambient, p)
            jet = theta_jet_gradient(fp, entry.ambient, entry.split.Dtheta[0])
            expected = central_difference(closed_form, p, 1e-6)
            assert np.max(np.abs(jet - expected)) < 1e-6

    @pytest.mark.parametrize("name", ["warp_surface_r5", "cr_warped_r7", "example1"])
    def test_jet_and_finite_difference_routes_agree(self, name):
        entry = catalog(name)
        for p in sample_points(entry.immersion, 3, seed=5):
            gradient = slant_gradient(entry.immersion, entry.ambient, entry.split, p)
            assert not gradient.unstable
            assert np.max(np.abs(gradient.gradient - gradient.crosscheck)) < 1e-6


class TestLemmaSuite:

    @pytest.fixture
    def cr_warped_points(self):
        run = run_context("cr_warped_r7", count=3)
        return [PointContext(run, i, p) for i, p in enumerate(run.points)]

    def test_identities_hold_on_contact_cr_warped_product(self, cr_warped_points):
        for ctx in cr_warped_points:
            report = lemma_suite(ctx.lemma_inputs)
            assert set(report.residuals) == set(LEMMA_KEYS)
            numeric = report.numeric()
            assert numeric
            assert max(numeric.values()) < 1e-6

    def test_degenerate_angle_refusals(self, cr_warped_points):
        report = lemma_suite(cr_warped_points[0].lemma_inputs)
        assert set(report.refused) == {'L2', 'L7', 'L8', 'T4'}
        assert all(report.residuals[key] == REFUSED_DEGENERATE for key in report.refused)
        assert isinstance(report.residuals['C2'], float)
        assert isinstance(report.residuals['T5'], float)

    def test_report_keys_and_labels(self, cr_warped_points):
        report = lemma_suite(cr_warped_points[0].lemma_inputs)
        assert list(report.residuals) == [
            'L2', 'L3i', 'L3ii', 'L3iii', 'L4', 'L5', 'L6', 'L7', 'L8', 'T4', 'T5', 'C2',
        ]
        assert report.to_dict()['labels'] == LEMMA_LABELS
        assert report.observables['fiber_warp_gradient'] < 1e-6
        assert 'L6_swapped' in report.observables

    def test_degenerate_tolerance_override_changes_refusals(self, cr_warped_points):
        ctx = cr_warped_points[0]
        tolerances = dict(ctx.run.tolerances, degenerate=2.0)
        inputs = prepare_lemma_inputs(
            ctx.run.candidate, ctx.amb, ctx.fp, ctx.sf, ctx.split, ctx.warp_data,
            ctx.theta, ctx.slant_gradient, ctx.pf, tolerances=tolerances,
        )
        report = lemma_suite(inputs)
        assert set(report.refused) == {'L2', 'L7', 'L8', 'T4', 'T5'}
        assert report.metadata['degenerate_tolerance'] == 2.0
        assert isinstance(report.residuals['C2'], float)

    def test_derivation_chains_close(self, cr_warped_points):
        for ctx in cr_warped_points:
            report = lemma_suite(ctx.lemma_inputs)
            assert report.observables['chain_sin'] < 1e-10
            assert report.observables['chain_cos'] < 1e-10
            assert report.observables['xi_lnf'] < 1e-10

    def test_printed_sign_is_reported_separately(self, cr_warped_points):
        report = lemma_suite(cr_warped_points[0].lemma_inputs)
        assert 'anti_invariant_shape_printed' in report.observables
        assert report.observables['anti_invariant_shape_printed'] > 1e-3

    def test_metadata(self, cr_warped_points):
        ctx = cr_warped_points[0]
        report = lemma_suite(ctx.lemma_inputs)
        assert report.metadata['theta'] == pytest.approx(math.pi / 2, abs=1e-10)
        assert len(report.metadata['X_lnf']) == 3
        assert report.metadata['point'] == ctx.p.tolist()

    def test_selector(self, cr_warped_points):
        report = lemma_suite(cr_warped_points[0].lemma_inputs, ['L3i', 'L3iii'])
        assert set(report.residuals) == {'L3i', 'L3iii'}

    def test_unknown_identity(self, cr_warped_points):
        with pytest.raises(ValueError, match="unknown identities"):
            lemma_suite(cr_warped_points[0].lemma_inputs, ['no_such_identity'])

    def test_warp_slant_gradient_refuses_at_right_angle(self, cr_warped_points):
        inputs = cr_warped_points[0].lemma_inputs
        with pytest.raises(DegenerateAngleError):
            theorem4_check(inputs, inputs.split.base_basis[0])

    def test_trivial_product_has_vanishing_mixed_terms(self):
        run = run_context("cr_product_r7")
        report = lemma_suite(PointContext(run, 0, run.points[0]).lemma_inputs)
        assert max(report.numeric().values()) < 1e-6
        assert report.metadata['X_lnf'] == pytest.approx([0.0, 0.0, 0.0], abs=1e-12)

    def test_flat_ambient_refused(self):
        run = run_context("warp_surface_r5")
        with pytest.raises(ValueError):
            PointContext(run, 0, run.points[0]).lemma_inputs
