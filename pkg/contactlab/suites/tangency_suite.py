import logging
from typing import Dict, List, Sequence, Tuple

import numpy as np

from config.settings import settings
from geometry.tangency import adjointness_residual, identity_residuals, theta_statistics
from models.report_models import ResidualValue, SuiteName
from orchestrator.context import PointContext, RunContext

from .base_suite import BaseSuite, SuiteResult, SuiteSummary, register_suite

logger = logging.getLogger(__name__)


def _random_combination(rng: np.random.Generator, basis: Sequence[np.ndarray]) -> np.ndarray:
    c = rng.standard_normal(len(basis))
    return np.column_stack(basis) @ (c / np.linalg.norm(c))


@register_suite
class TangencySuite(BaseSuite):
    name = SuiteName.TANGENCY
    description = "P/F and t/f decompositions, slant function and the slant identities"
    RESIDUAL_CLASSES = {
        'PF_reconstruction': 'structural',
        'tf_reconstruction': 'structural',
        'adjointness': 'structural',
        'skew_P': 'structural',
        'slant_deviation': 'angle',
        'slant_P_squared': 'structural',
        'slant_P_gram': 'structural',
        'slant_F_gram': 'structural',
        'slant_tF': 'structural',
        'slant_fF': 'structural',
    }

    def evaluate_point(self, ctx: PointContext) -> Tuple[Dict[str, ResidualValue], Dict[str, float]]:
        fp, amb, pf, tf = ctx.fp, ctx.amb, ctx.pf, ctx.tf
        rng = ctx.rng()

        residuals: Dict[str, ResidualValue] = {
            'PF_reconstruction': pf.reconstruction_error(),
            'tf_reconstruction': tf.reconstruction_error(),
            'adjointness': adjointness_residual(pf, tf),
        }
        observables: Dict[str, float] = {}

        picks = settings.IDENTITY_PICKS
        skew = 0.0
        for _ in range(picks):
            X = _random_combination(rng, fp.tan_frame)
            Y = _random_combination(rng, fp.tan_frame)
            skew = max(skew, identity_residuals(fp, amb, pf, X, Y)['skew_P'])
        residuals['skew_P'] = skew

        if ctx.run.split is not None and ctx.run.split.m2:
            slant = ctx.verification.slant
            residuals['slant_deviation'] = slant.max_deviation
            basis = ctx.split.Dtheta_basis
            for _ in range(picks):
                X = _random_combination(rng, basis)
                Y = _random_combination(rng, basis)
                for key, value in identity_residuals(fp, amb, pf, X, Y, theta=slant.theta, tf=tf).items():
                    if key != 'skew_P':
                        residuals[key] = max(residuals.get(key, 0.0), value)
            observables['theta'] = slant.theta
        return residuals, observables

    def summarize(self, run: RunContext, results: List[SuiteResult]) -> SuiteSummary:
        thetas = [r.observables['theta'] for r in results if 'theta' in r.observables]
        if not thetas:
            return SuiteSummary()
        stats = theta_statistics(thetas, run.tolerance('constancy'))
        self.log_suite_activity("slant function", stats.to_dict())
        return SuiteSummary(findings={'theta_statistics': stats.to_dict()})
