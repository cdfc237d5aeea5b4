"""
Warped-product recovery and the run-level findings that hinge on it:
ξ in the fiber, constant slant angle, and the mixed totally geodesic
contrapositives.
"""

import logging
import math
from typing import Any, Dict, List, Tuple

import numpy as np

from geometry.secondform import mixed_tg_test
from geometry.tangency import theta_statistics
from geometry.warped import WarpStructureError, bishop_oneill_check, detect_warp
from models.report_models import ResidualValue, SuiteName
from orchestrator.context import PointContext, RunContext

from .base_suite import BaseSuite, SuiteResult, SuiteSummary, register_suite

logger = logging.getLogger(__name__)


@register_suite
class WarpedSuite(BaseSuite):
    name = SuiteName.WARPED
    description = "Warping function recovery, Bishop-O'Neill checks and mixed totally geodesic findings"
    requires = ('warp',)
    RESIDUAL_CLASSES = {
        'off_block': 'structural',
        'base_dependence': 'structural',
        'factorization': 'structural',
    }

    def evaluate_point(self, ctx: PointContext) -> Tuple[Dict[str, ResidualValue], Dict[str, float]]:
        data = ctx.warp_data
        candidate = ctx.run.candidate
        residuals: Dict[str, ResidualValue] = {
            'off_block': data.off_block,
            'base_dependence': data.base_dependence,
            'factorization': data.factorization,
            'fiber_lnf_derivative': data.fiber_lnf_derivative,
        }
        residuals.update(bishop_oneill_check(candidate, ctx.amb, ctx.sf, data))

        fp = ctx.fp
        rank = ctx.run.tolerance('rank')
        observables: Dict[str, float] = {
            'f': data.f,
            'lnf_norm': data.lnf_norm,
            'mixed_geodesic_defect_base': mixed_tg_test(
                ctx.sf,
                list(fp.jac[:, list(candidate.base_vars)].T),
                list(fp.jac[:, list(candidate.fiber_vars)].T),
                rank,
            ),
        }
        split = ctx.run.split
        if split is not None and split.m2:
            observables['theta'] = ctx.verification.theta
            if split.m1:
                observables['mixed_geodesic_defect'] = mixed_tg_test(ctx.sf, ctx.split.D_basis, ctx.split.Dtheta_basis, rank)
        return residuals, observables

    def summarize(self, run: RunContext, results: List[SuiteResult]) -> SuiteSummary:
        structural = run.tolerance('structural')
        second_order = run.tolerance('second_order')
        findings: Dict[str, Any] = {}
        failures: List[str] = []

        try:
            report = detect_warp(run.candidate, run.ambient, run.points, tol=structural)
        except WarpStructureError as e:
            return SuiteSummary(findings={'warp_detected': False}, failures=[str(e)])

        findings['warp_detected'] = True
        findings['warp'] = report.to_dict()
        trivial = report.trivial
        findings['trivial'] = trivial

        if report.xi_in_fiber:
            findings['xi_in_fiber_forces_trivial'] = trivial
            if not trivial:
                failures.append("xi is tangent to the fiber but the warping function is not constant")

        thetas = [r.observables['theta'] for r in results if 'theta' in r.observables]
        proper = False
        if thetas:
            stats = theta_statistics(thetas, run.tolerance('constancy'))
            degenerate = run.tolerance('degenerate')
            proper = all(math.sin(t) >= degenerate and abs(math.cos(t)) >= degenerate for t in thetas)
            if stats.constant and proper:
                constant_theta_ok = trivial and report.fiber_lnf_derivative < second_order
                findings['constant_theta_forces_trivial'] = constant_theta_ok
                if not constant_theta_ok:
                    failures.append("slant angle is constant and proper but the warping function is not constant")

        defects = [r.observables['mixed_geodesic_defect'] for r in results if 'mixed_geodesic_defect' in r.observables]
        if defects:
            defect = float(np.max(defects))
            findings['mixed_geodesic_defect'] = defect
            if not trivial and run.split.m1 and run.split.m2:
                holds = defect > 10 * second_order
                findings['corollary_contrapositive'] = holds
                if not holds:
                    failures.append(f"non-trivial warped product is mixed totally geodesic (defect {defect:.3e})")
            if defect < second_order:
                anti_or_invariant = not proper
                holds = trivial or anti_or_invariant
                findings['mixed_geodesic_disjunction'] = holds
                if not holds:
                    failures.append("mixed totally geodesic with proper slant angle and non-constant warping function")

        base_defects = [r.observables['mixed_geodesic_defect_base'] for r in results if 'mixed_geodesic_defect_base' in r.observables]
        if base_defects:
            findings['mixed_geodesic_defect_base'] = float(np.max(base_defects))

        self.log_suite_activity("📊 warp findings", {k: v for k, v in findings.items() if k != 'warp'})
        return SuiteSummary(findings=findings, failures=failures)
