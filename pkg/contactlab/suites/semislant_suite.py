import logging
from typing import Dict, List, Tuple

from geometry.semislant import classify, lemma1_residuals, normal_split
from geometry.tangency import theta_statistics
from models.report_models import ResidualValue, SuiteName
from orchestrator.context import PointContext, RunContext

from .base_suite import BaseSuite, SuiteResult, SuiteSummary, register_suite

logger = logging.getLogger(__name__)


@register_suite
class SemiSlantSuite(BaseSuite):
    """
    Verifies the declared split point by point, then classifies it from the
    slant function collected over the whole run.
    """
    name = SuiteName.SEMISLANT
    description = "D ⊕ D^θ ⊕ ⟨ξ⟩ verification, normal bundle split, classification and connection identities"
    requires = ('split',)
    RESIDUAL_CLASSES = {
        'orthogonality': 'structural',
        'completeness': 'structural',
        'D_invariance': 'structural',
        'F_on_D': 'structural',
        'F_on_xi': 'structural',
        'xi_alignment': 'structural',
        'slant_deviation': 'angle',
        'slant_P_squared': 'structural',
        'nu_invariance': 'structural',
        'normal_orthogonality': 'structural',
    }

    def evaluate_point(self, ctx: PointContext) -> Tuple[Dict[str, ResidualValue], Dict[str, float]]:
        fp, amb, split = ctx.fp, ctx.amb, ctx.split
        verification = ctx.verification

        residuals: Dict[str, ResidualValue] = dict(verification.residuals)
        normals = normal_split(
            fp, amb, split, ctx.pf,
            degenerate_tol=ctx.run.tolerance('degenerate'),
            rank_tol=ctx.run.tolerance('rank'),
        ).to_dict()
        residuals['nu_invariance'] = normals['nu_invariance']
        residuals['normal_orthogonality'] = normals['normal_orthogonality']
        observables: Dict[str, float] = {
            'FDtheta_dim': normals['FDtheta_dim'],
            'nu_dim': normals['nu_dim'],
        }

        if verification.theta is not None:
            observables['theta'] = verification.theta
            if amb.sasakian:
                structural = ctx.run.tolerance('structural')
                for X in split.base_basis:
                    for Y in split.base_basis:
                        for Z in split.Dtheta_basis:
                            for W in split.Dtheta_basis:
                                values = lemma1_residuals(
                                    fp, amb, split, ctx.sf, X, Y, Z, W, verification.theta, ctx.pf, structural
                                )
                                for key, value in values.items():
                                    residuals[key] = max(residuals.get(key, 0.0), value)
        return residuals, observables

    def summarize(self, run: RunContext, results: List[SuiteResult]) -> SuiteSummary:
        if not any(r.success for r in results):
            return SuiteSummary(failures=["no point could be verified"])
        thetas = [r.observables['theta'] for r in results if 'theta' in r.observables]
        label = classify(
            run.split.m1,
            run.split.m2,
            thetas,
            angle_tol=run.tolerance('angle'),
            constancy_tol=run.tolerance('constancy'),
        )
        findings = {'classification': label.value}
        if thetas:
            findings['theta_statistics'] = theta_statistics(thetas, run.tolerance('constancy')).to_dict()
        self.log_suite_activity("📊 classification", {"label": label.value, "m1": run.split.m1, "m2": run.split.m2})
        return SuiteSummary(findings=findings)
