"""Ambient axioms, connection, frames and the Gauss/Weingarten formulas at each point"""

import logging
from typing import Dict, List, Tuple

import numpy as np

from geometry.ambient import check_almost_contact, metricity_defect, sasakian_defect
from geometry.immersion import XiPosition, xi_tangency
from geometry.secondform import (
    duality_residual,
    projected_normal_field,
    shape_operator,
    weingarten_reconstruction_residual,
)
from models.report_models import ResidualValue, SuiteName
from orchestrator.context import PointContext, RunContext

from .base_suite import BaseSuite, SuiteResult, SuiteSummary, register_suite, worst

logger = logging.getLogger(__name__)


@register_suite
class StructureSuite(BaseSuite):
    name = SuiteName.STRUCTURE
    description = "Almost contact axioms, Levi-Civita connection, frames, Gauss and Weingarten formulas"
    RESIDUAL_CLASSES = {
        'phi_squared': 'structural',
        'eta_xi': 'structural',
        'eta_phi': 'structural',
        'phi_xi': 'structural',
        'compatibility': 'structural',
        'skew': 'structural',
        'eta_metric': 'structural',
        'sasakian': 'structural',
        'christoffel_symmetry': 'structural',
        'metricity': 'structural',
        'frame_orthonormality': 'structural',
        'frame_completeness': 'structural',
        'xi_normal_component': 'structural',
    }

    def evaluate_point(self, ctx: PointContext) -> Tuple[Dict[str, ResidualValue], Dict[str, float]]:
        fp, amb, sf = ctx.fp, ctx.amb, ctx.sf
        g = fp.metric

        residuals: Dict[str, ResidualValue] = dict(check_almost_contact(amb, fp.pos).to_dict())
        if amb.sasakian:
            residuals['sasakian'] = sasakian_defect(amb, fp.pos)
        residuals['christoffel_symmetry'] = ctx.connection.symmetry_defect
        residuals['metricity'] = metricity_defect(amb, fp.pos)

        frame = np.column_stack(fp.tan_frame + fp.nor_frame)
        residuals['frame_orthonormality'] = float(np.max(np.abs(frame.T @ g @ frame - np.eye(frame.shape[1]))))
        residuals['frame_completeness'] = float(abs(frame.shape[1] - amb.dim))

        tangency = xi_tangency(fp, amb)
        residuals['xi_normal_component'] = tangency.normal_norm

        residuals['h_symmetry'] = sf.symmetry_defect
        residuals['gauss_reconstruction'] = sf.gauss_reconstruction_error()

        duality, self_adjoint, weingarten = [], [], []
        for N in fp.nor_frame:
            shape = shape_operator(sf, fp, amb, N)
            duality.append(duality_residual(sf, shape))
            self_adjoint.append(shape.self_adjoint_defect)
            weingarten.append(shape.weingarten_defect)
        residuals['shape_duality'] = worst(duality)
        residuals['shape_self_adjoint'] = worst(self_adjoint)
        residuals['weingarten_extension'] = worst(weingarten)

        if fp.nor_frame:
            field = projected_normal_field(ctx.run.immersion, amb, fp.nor_frame[0])
            residuals['weingarten_reconstruction'] = weingarten_reconstruction_residual(
                sf, fp, amb, fp.tan_frame[0], field
            )

        observables = {
            'xi_tangent_norm': tangency.tangent_norm,
            'h_norm': float(np.linalg.norm(sf.h)) if sf.h.size else 0.0,
        }
        return residuals, observables

    def summarize(self, run: RunContext, results: List[SuiteResult]) -> SuiteSummary:
        verdicts = sorted({
            XiPosition.TANGENT.value if r.residuals.get('xi_normal_component', 1.0) < run.tolerance('structural')
            else XiPosition.NORMAL.value if r.observables.get('xi_tangent_norm', 1.0) < run.tolerance('structural')
            else XiPosition.MIXED.value
            for r in results if r.success
        })
        self.log_suite_activity("xi position", {"verdicts": verdicts})
        return SuiteSummary(findings={'xi_position': verdicts})
