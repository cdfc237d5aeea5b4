#!/usr/bin/env python3
"""
contactlab - second fundamental form and shape operator tests
"""

import dataclasses

import numpy as np
import pytest

from geometry.ambient import make_euclidean_acm
from geometry.immersion import Immersion, catalog, frame_at
from geometry.secondform import (
    NonNormalVectorError,
    NonOrthogonalSplitError,
    duality_residual,
    mixed_tg_test,
    normal_connection,
    projected_normal_field,
    second_form,
    shape_operator,
    weingarten_reconstruction_residual,
)
from numjet.linalg import norm


@pytest.fixture
def cylinder():
    """Cylinder of radius 2 around the Reeb axis of flat ℝ^3"""
    im = Immersion.from_spec({
        "variables": ["s", "z"],
        "components": ["2*cos(s)", "2*sin(s)", "z"],
        "domain": [[0.0, 6.0], [-1.0, 1.0]],
    })
    return im, make_euclidean_acm(1)


@pytest.fixture
def warped_point():
    entry = catalog("cr_warped_r7")
    fp = frame_at(entry.immersion, entry.ambient, [1.1, 0.8, 0.3, 0.2, -0.4])
    return entry, fp, second_form(fp, entry.ambient)


class TestCylinder:

    def test_curvature_of_circle_direction(self, cylinder):
        im, amb = cylinder
        fp = frame_at(im, amb, [0.7, 0.1])
        sf = second_form(fp, amb)
        e_s = fp.coordinate_field(0) / 2.0
        assert norm(fp.metric, sf.h_of(e_s, e_s)) == pytest.approx(0.5, abs=1e-12)

    def test_ruling_is_asymptotic(self, cylinder):
        im, amb = cylinder
        fp = frame_at(im, amb, [0.7, 0.1])
        sf = second_form(fp, amb)
        assert mixed_tg_test(sf, [fp.coordinate_field(0)], [fp.coordinate_field(1)]) < 1e-12

    def test_shape_operator_of_inward_normal(self, cylinder):
        im, amb = cylinder
        fp = frame_at(im, amb, [0.7, 0.1])
        sf = second_form(fp, amb)
        inward = -np.array([np.cos(0.7), np.sin(0.7), 0.0])
        shape = shape_operator(sf, fp, amb, inward)
        e_s = fp.coordinate_field(0) / 2.0
        assert np.allclose(shape.A_of(e_s), 0.5 * e_s, atol=1e-12)
        assert np.allclose(shape.A_of(fp.coordinate_field(1)), 0.0, atol=1e-12)
        assert shape.weingarten_defect < 1e-10

    def test_tangential_vector_rejected(self, cylinder):
        im, amb = cylinder
        fp = frame_at(im, amb, [0.7, 0.1])
        with pytest.raises(NonNormalVectorError):
            shape_operator(second_form(fp, amb), fp, amb, fp.coordinate_field(1))

    def test_overlapping_split_rejected(self, cylinder):
        im, amb = cylinder
        fp = frame_at(im, amb, [0.7, 0.1])
        sf = second_form(fp, amb)
        with pytest.raises(NonOrthogonalSplitError):
            mixed_tg_test(sf, [fp.coordinate_field(0)], [fp.coordinate_field(0) + fp.coordinate_field(1)])


class TestSasakianSubmanifold:

    def test_gauss_formula(self, warped_point):
        _, _, sf = warped_point
        assert sf.gauss_reconstruction_error() < 1e-10
        assert sf.symmetry_defect < 1e-10

    def test_shape_operator_duality(self, warped_point):
        entry, fp, sf = warped_point
        for N in fp.nor_frame:
            shape = shape_operator(sf, fp, entry.ambient, N)
            assert duality_residual(sf, shape) < 1e-8
            assert shape.self_adjoint_defect < 1e-10
            assert shape.weingarten_defect < 1e-7

    def test_duality_detects_a_wrong_second_fundamental_form(self, warped_point):
        entry, fp, sf = warped_point
        shape = shape_operator(sf, fp, entry.ambient, fp.nor_frame[0])
        skewed = dataclasses.replace(sf, h=sf.h + 1e-3)
        assert duality_residual(skewed, shape) > 5e-4

    def test_weingarten_formula(self, warped_point):
        entry, fp, sf = warped_point
        field = projected_normal_field(entry.immersion, entry.ambient, fp.nor_frame[0])
        for i in range(fp.k):
            X = fp.coordinate_field(i)
            assert weingarten_reconstruction_residual(sf, fp, entry.ambient, X, field) < 1e-6
            assert norm(fp.metric, fp.tangential(normal_connection(fp, entry.ambient, X, field))) < 1e-12
