#!/usr/bin/env python3
"""
contactlab - numerical kernel tests

Expression parsing, jets against finite differences, metric linear algebra.
"""

import math

import numpy as np
import pytest

from numjet.expr import ExpressionSyntaxError, parse_expr, render
from numjet.jet import JetDomainError, central_difference, eval_jet2, eval_jets, eval_value
from numjet.linalg import (
    MetricNotPositiveDefiniteError,
    NonOrthonormalBasisError,
    check_spd,
    complete_basis,
    gram_matrix,
    metric_project,
    orthonormalize,
)
from utils.catalog_registry import catalog_registry


class TestParser:

    def test_evaluates_simple_sum(self):
        node = parse_expr("u+v", ["u", "v"])
        assert eval_value(node, [1.0, 2.0]) == 3.0

    def test_precedence_and_unary_minus(self):
        node = parse_expr("-u+v*w^2", ["u", "v", "w"])
        assert eval_value(node, [1.0, 2.0, 3.0]) == pytest.approx(17.0)

    def test_functions_and_constants(self):
        node = parse_expr("t*cos(w) + exp(0) + pi - pi", ["w", "t"])
        assert eval_value(node, [0.5, 2.0]) == pytest.approx(2.0 * math.cos(0.5) + 1.0)

    def test_render_reparses_to_same_value(self):
        node = parse_expr("w*sin(t) - (u+v)/2", ["u", "v", "w", "t"])
        again = parse_expr(render(node), ["u", "v", "w", "t"])
        point = [0.3, -0.2, 1.1, 0.7]
        assert eval_value(again, point) == pytest.approx(eval_value(node, point))

    @pytest.mark.parametrize("text,offset", [
        ("u+", 2),
        ("(u", 2),
        ("u)", 1),
        ("q*u", 0),
    ])
    def test_syntax_errors_carry_offsets(self, text, offset):
        with pytest.raises(ExpressionSyntaxError) as info:
            parse_expr(text, ["u"])
        assert info.value.offset == offset

    def test_offsets_count_bytes_of_non_ascii_text(self):
        with pytest.raises(ExpressionSyntaxError) as info:
            parse_expr("sin(θ", ["u"])
        assert info.value.offset == 6

    def test_e_is_not_a_named_constant(self):
        with pytest.raises(ExpressionSyntaxError, match="unknown identifier 'e'"):
            parse_expr("e*u", ["u"])

    def test_empty_expression(self):
        with pytest.raises(ExpressionSyntaxError, match="empty expression"):
            parse_expr("   ", ["u"])

    def test_unknown_identifier_message(self):
        with pytest.raises(ExpressionSyntaxError, match="unknown identifier 'q'"):
            parse_expr("q*u", ["u"])

    def test_variable_exponent_rejected(self):
        with pytest.raises(ExpressionSyntaxError, match="exponent"):
            parse_expr("u^v", ["u", "v"])


class TestJets:

    def test_cubic_derivatives(self):
        jet = eval_jet2(parse_expr("u^3", ["u"]), [2.0])
        assert jet.value == pytest.approx(8.0)
        assert jet.grad[0] == pytest.approx(12.0)
        assert jet.hess[0, 0] == pytest.approx(12.0)

    def test_mixed_partial(self):
        jet = eval_jet2(parse_expr("u*v + sin(u)", ["u", "v"]), [0.5, 2.0])
        assert jet.hess[0, 1] == pytest.approx(1.0)
        assert jet.hess[1, 0] == pytest.approx(1.0)
        assert jet.hess[0, 0] == pytest.approx(-math.sin(0.5))

    def test_log_domain_error(self):
        with pytest.raises(JetDomainError):
            eval_jet2(parse_expr("log(u)", ["u"]), [0.0])

    def test_sqrt_at_zero_has_a_value_but_no_jet(self):
        node = parse_expr("sqrt(u)", ["u"])
        assert eval_value(node, [0.0]) == 0.0
        with pytest.raises(JetDomainError, match="not differentiable at zero"):
            eval_jet2(node, [0.0])

    @pytest.mark.parametrize("evaluate", [eval_value, eval_jet2])
    def test_sqrt_of_negative_rejected_on_both_paths(self, evaluate):
        with pytest.raises(JetDomainError, match="sqrt of negative value"):
            evaluate(parse_expr("sqrt(u)", ["u"]), [-1.0])

    @pytest.mark.parametrize("evaluate", [eval_value, eval_jet2])
    @pytest.mark.parametrize("text", ["exp(u)", "(u*1000)^200"])
    def test_overflow_is_a_domain_error(self, evaluate, text):
        with pytest.raises(JetDomainError, match="overflow"):
            evaluate(parse_expr(text, ["u"]), [1000.0])

    def test_division_by_zero(self):
        with pytest.raises(JetDomainError):
            eval_jet2(parse_expr("1/(u-v)", ["u", "v"]), [1.0, 1.0])

    def test_constant_expressions_have_zero_derivatives(self):
        values, grads, hess = eval_jets([parse_expr("0.5", ["u", "v"])], [1.0, 2.0])
        assert values[0] == 0.5
        assert not grads.any() and not hess.any()

    @pytest.mark.parametrize("entry", [e["name"] for e in catalog_registry.entries])
    def test_catalog_expressions_match_finite_differences(self, entry):
        raw = catalog_registry.get_entry(entry)["immersion"]
        variables = raw["variables"]
        nodes = [parse_expr(text, variables) for text in raw["components"]]
        point = np.array([0.5 * (lo + hi) + 0.01 * i for i, (lo, hi) in enumerate(raw["domain"])])

        _, grads, hess = eval_jets(nodes, point)
        fd_grads = central_difference(lambda q: np.array([eval_value(n, q) for n in nodes]), point, 1e-5).T
        fd_hess = central_difference(lambda q: eval_jets(nodes, q)[1], point, 1e-5).transpose(1, 2, 0)

        scale = max(1.0, float(np.max(np.abs(grads))))
        assert np.max(np.abs(grads - fd_grads)) / scale < 1e-5
        scale = max(1.0, float(np.max(np.abs(hess))))
        assert np.max(np.abs(hess - fd_hess)) / scale < 1e-5


class TestLinalg:

    def test_orthonormalize_under_weighted_metric(self):
        g = np.diag([1.0, 4.0])
        basis, rank = orthonormalize([np.array([1.0, 0.0]), np.array([1.0, 1.0])], g)
        assert rank == 2
        assert np.allclose(gram_matrix(basis, g), np.eye(2), atol=1e-12)

    def test_dependent_vectors_are_dropped(self):
        g = np.eye(3)
        basis, rank = orthonormalize([np.array([1.0, 0.0, 0.0]), np.array([2.0, 0.0, 0.0])], g)
        assert rank == 1
        assert len(basis) == 1

    def test_metric_project_splits_vector(self):
        g = np.eye(3)
        component, rest = metric_project(np.array([1.0, 2.0, 3.0]), [np.array([1.0, 0.0, 0.0])], g)
        assert np.allclose(component, [1.0, 0.0, 0.0])
        assert np.allclose(rest, [0.0, 2.0, 3.0])

    def test_metric_project_rejects_non_orthonormal_basis(self):
        with pytest.raises(NonOrthonormalBasisError):
            metric_project(np.ones(2), [np.array([2.0, 0.0])], np.eye(2))

    def test_indefinite_metric_rejected(self):
        with pytest.raises(MetricNotPositiveDefiniteError):
            check_spd(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_complete_basis_spans_complement(self):
        g = np.diag([1.0, 2.0, 3.0])
        first, _ = orthonormalize([np.array([1.0, 1.0, 0.0])], g)
        rest = complete_basis(first, g)
        assert len(rest) == 2
        assert np.allclose(gram_matrix(first + rest, g), np.eye(3), atol=1e-12)
