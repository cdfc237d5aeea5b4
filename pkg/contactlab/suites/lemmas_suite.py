import logging
from typing import Dict, List, Tuple

from geometry.warped import LEMMA_LABELS, lemma_suite
from models.report_models import ResidualValue, SuiteName
from orchestrator.context import PointContext, RunContext

from .base_suite import BaseSuite, SuiteResult, SuiteSummary, register_suite

logger = logging.getLogger(__name__)


@register_suite
class LemmasSuite(BaseSuite):
    """
    Mixed identities of a warped product M_T ×_f M_θ in a Sasakian
    ambient, evaluated on frame bases at every point. Identities whose
    hypotheses fail at the point's slant angle are reported as refusals.
    """
    name = SuiteName.LEMMAS
    description = "Warped-product identities relating h, P, F and grad ln f"
    requires = ('split', 'warp', 'sasakian')
    RESIDUAL_CLASSES = {
        'chain_sin': 'arithmetic',
        'chain_cos': 'arithmetic',
        'xi_lnf': 'arithmetic',
    }

    def evaluate_point(self, ctx: PointContext) -> Tuple[Dict[str, ResidualValue], Dict[str, float]]:
        report = lemma_suite(ctx.lemma_inputs)
        residuals: Dict[str, ResidualValue] = dict(report.residuals)
        observables: Dict[str, float] = {'theta': report.metadata['theta']}
        for key in ('chain_sin', 'chain_cos', 'xi_lnf'):
            residuals[key] = report.observables[key]
        for key in ('L6_swapped', 'shape_warp_characterization', 'fiber_warp_gradient', 'anti_invariant_shape_printed'):
            if key in report.observables:
                observables[key] = report.observables[key]
        observables['theta_derivative_unstable'] = float(report.metadata['theta_derivative_unstable'])
        return residuals, observables

    def summarize(self, run: RunContext, results: List[SuiteResult]) -> SuiteSummary:
        refused = sorted({key for r in results for key, value in r.residuals.items() if isinstance(value, str)})
        unstable = sum(1 for r in results if r.observables.get('theta_derivative_unstable'))
        printed = [r.observables['anti_invariant_shape_printed'] for r in results if 'anti_invariant_shape_printed' in r.observables]
        findings = {
            'refused': refused,
            'identity_labels': dict(LEMMA_LABELS),
            'theta_derivative_unstable_points': unstable,
        }
        if printed:
            findings['anti_invariant_shape_printed_max'] = max(printed)
        self.log_suite_activity("📊 lemma refusals", {"refused": refused, "unstable": unstable})
        return SuiteSummary(findings=findings)
