#!/usr/bin/env python3
"""
contactlab - immersion, frame and sampling tests
"""

import numpy as np
import pytest

from geometry.ambient import make_euclidean_acm, make_standard_sasakian
from geometry.immersion import (
    DeclaredSplit,
    ExcludedPointError,
    Immersion,
    ImmersionSpecError,
    OutsideDomainError,
    RankDeficientJacobianError,
    SamplingError,
    WarpDeclaration,
    XiPosition,
    catalog,
    frame_at,
    gram_and_derivative,
    induced_metric_derivative,
    sample_points,
    unguarded_degeneracies,
    xi_tangency,
)
from numjet.jet import central_difference
from numjet.linalg import gram_matrix


def circle_spec(**overrides):
    spec = {
        "variables": ["s", "z"],
        "components": ["cos(s)", "sin(s)", "z"],
        "domain": [[0.0, 3.0], [-1.0, 1.0]],
    }
    spec.update(overrides)
    return spec


class TestImmersionSpec:

    def test_from_spec(self):
        im = Immersion.from_spec(circle_spec(), name="cylinder")
        assert im.k == 2
        assert im.codomain_dim == 3
        assert im.variable_index("z") == 1

    def test_domain_mismatch(self):
        with pytest.raises(ImmersionSpecError):
            Immersion.from_spec(circle_spec(domain=[[0.0, 1.0]]))

    def test_empty_interval(self):
        with pytest.raises(ImmersionSpecError, match="empty interval"):
            Immersion.from_spec(circle_spec(domain=[[1.0, 1.0], [-1.0, 1.0]]))

    def test_unknown_variable(self):
        im = Immersion.from_spec(circle_spec())
        with pytest.raises(ImmersionSpecError, match="unknown variable"):
            im.variable_index("w")


class TestFrames:

    def test_frames_are_orthonormal_and_complementary(self):
        entry = catalog("example1")
        fp = frame_at(entry.immersion, entry.ambient, [0.1, -0.3, 0.7, 1.4, 0.2])
        assert fp.k == 5 and fp.codim == 2
        frame = list(fp.tan_frame) + list(fp.nor_frame)
        assert np.allclose(gram_matrix(frame, fp.metric), np.eye(7), atol=1e-12)

    def test_tangential_and_normal_parts(self):
        entry = catalog("invariant_r5")
        fp = frame_at(entry.immersion, entry.ambient, [0.2, -0.4, 0.1])
        v = np.array([0.3, -1.0, 2.0, 0.5, 0.7])
        assert np.allclose(fp.tangential(v) + fp.normal(v), v)
        assert abs(fp.tangential(v) @ fp.metric @ fp.normal(v)) < 1e-12

    def test_excluded_point(self):
        entry = catalog("example1")
        with pytest.raises(ExcludedPointError):
            frame_at(entry.immersion, entry.ambient, [0.0, 0.0, 1.0, 1.0, 0.0])

    def test_rank_deficient_jacobian(self):
        im = Immersion.from_spec(circle_spec(components=["s*z", "s^2*z", "0"]))
        with pytest.raises(RankDeficientJacobianError):
            frame_at(im, make_euclidean_acm(1), [0.0, 0.0])

    def test_point_outside_domain_box(self):
        im = Immersion.from_spec(circle_spec())
        with pytest.raises(OutsideDomainError):
            frame_at(im, make_euclidean_acm(1), [3.5, 0.0])

    def test_boundary_slack_admits_stencil_points(self):
        im = Immersion.from_spec(circle_spec())
        fp = frame_at(im, make_euclidean_acm(1), [3.0 + 1e-5, 0.0])
        assert fp.k == 2
        with pytest.raises(OutsideDomainError):
            frame_at(im, make_euclidean_acm(1), [3.0 + 1e-5, 0.0], domain_slack=0.0)

    def test_codomain_mismatch(self):
        im = Immersion.from_spec(circle_spec())
        with pytest.raises(ImmersionSpecError):
            frame_at(im, make_euclidean_acm(2), [0.5, 0.0])

    def test_induced_metric_derivative_matches_finite_differences(self):
        entry = catalog("cr_warped_r7")
        p = np.array([1.1, 0.8, 0.3, 0.2, -0.4])
        fp = frame_at(entry.immersion, entry.ambient, p)
        dG = induced_metric_derivative(fp, entry.ambient)
        fd = central_difference(lambda q: gram_and_derivative(entry.immersion, entry.ambient, q)[0], p, 1e-5)
        assert np.max(np.abs(dG - fd.transpose(1, 2, 0))) < 1e-7


class TestXiTangency:

    def test_reeb_tangent(self):
        entry = catalog("invariant_r5")
        fp = frame_at(entry.immersion, entry.ambient, [0.3, 0.1, -0.2])
        assert xi_tangency(fp, entry.ambient).verdict == XiPosition.TANGENT

    def test_reeb_normal(self):
        im = Immersion.from_spec({
            "variables": ["u", "v"],
            "components": ["u", "v", "0"],
            "domain": [[-1.0, 1.0], [-1.0, 1.0]],
        })
        fp = frame_at(im, make_euclidean_acm(1), [0.0, 0.5])
        assert xi_tangency(fp, make_euclidean_acm(1)).verdict == XiPosition.NORMAL

    def test_reeb_mixed(self):
        im = Immersion.from_spec({
            "variables": ["u", "v"],
            "components": ["u", "v", "v"],
            "domain": [[-1.0, 1.0], [-1.0, 1.0]],
        })
        fp = frame_at(im, make_euclidean_acm(1), [0.0, 0.5])
        assert xi_tangency(fp, make_euclidean_acm(1)).verdict == XiPosition.MIXED


class TestSampling:

    def test_deterministic_for_seed(self):
        im = catalog("example1").immersion
        first = sample_points(im, 20, seed=11)
        again = sample_points(im, 20, seed=11)
        other = sample_points(im, 20, seed=12)
        assert np.array_equal(first, again)
        assert not np.array_equal(first, other)

    def test_points_respect_domain_and_exclusions(self):
        im = catalog("example1").immersion
        points = sample_points(im, 50, seed=3, margin=1e-2)
        assert points.shape == (50, 5)
        assert all(im.in_domain(p) for p in points)
        assert all(abs(p[2] - p[3]) > 1e-2 for p in points)

    def test_unsampleable_domain(self):
        im = Immersion.from_spec(circle_spec(exclusions=["z - z"]))
        with pytest.raises(SamplingError):
            sample_points(im, 1, seed=0, max_attempts=10)


class TestDegeneracies:

    def test_guarded_degeneracy_passes(self):
        assert unguarded_degeneracies(catalog("example1").immersion) == []

    def test_unguarded_degeneracy_reported(self):
        im = Immersion.from_spec({
            "variables": ["u", "v", "w", "t", "z"],
            "components": ["u+v", "-u+v", "t*cos(w)", "t*sin(w)", "w*cos(t)", "w*sin(t)", "z"],
            "domain": [[-1.0, 1.0], [-1.0, 1.0], [0.2, 2.0], [0.2, 2.0], [-1.0, 1.0]],
            "degeneracies": ["w-t"],
        })
        assert unguarded_degeneracies(im) == ["w-t"]

    def test_degeneracy_outside_domain_ignored(self):
        im = Immersion.from_spec(circle_spec(degeneracies=["s + 10"]))
        assert unguarded_degeneracies(im) == []


class TestDeclarations:

    def test_split_dimensions(self):
        split = DeclaredSplit.from_spec({"D": [[1, 0]], "Dtheta": []}, 2)
        assert (split.m1, split.m2) == (1, 0)

    def test_split_vector_length(self):
        with pytest.raises(ImmersionSpecError, match="needs 3 entries"):
            DeclaredSplit.from_spec({"D": [[1, 0]]}, 3)

    def test_warp_overlap(self):
        im = catalog("cr_product_r7").immersion
        spec = {"base_vars": ["a", "b", "s"], "fiber_vars": ["s", "t"], "reference_point": [0, 0, 0]}
        with pytest.raises(ImmersionSpecError, match="overlap"):
            WarpDeclaration.from_spec(spec, im)

    def test_warp_must_cover_variables(self):
        im = catalog("cr_product_r7").immersion
        spec = {"base_vars": ["a", "b"], "fiber_vars": ["t"], "reference_point": [0, 0]}
        with pytest.raises(ImmersionSpecError, match="cover"):
            WarpDeclaration.from_spec(spec, im)

    def test_warp_reference_point_length(self):
        im = catalog("cr_product_r7").immersion
        spec = {"base_vars": ["a", "b", "s"], "fiber_vars": ["t"], "reference_point": [0, 0]}
        with pytest.raises(ImmersionSpecError, match="reference_point"):
            WarpDeclaration.from_spec(spec, im)

    def test_catalog_entry_iterates_as_tuple(self):
        ambient, immersion, split, warp = catalog("cr_warped_r7")
        assert ambient is make_standard_sasakian(3)
        assert immersion.k == 5
        assert (split.m1, split.m2) == (2, 2)
        assert warp.fiber_vars == (3, 4)
