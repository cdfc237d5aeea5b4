"""
Pointwise semi-slant structure TM = D ⊕ D^θ ⊕ ⟨ξ⟩.

Declared directions are domain-coordinate vectors; at a point they are
pushed forward and taken modulo ξ, so D and D^θ are ξ-orthogonal by
construction and everything else is verified.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import settings
from models.report_models import Classification
from numjet.linalg import inner, metric_project, norm, orthonormalize

from .ambient import AmbientStructure, sasakian_defect
from .immersion import DeclaredSplit, FramedPoint, xi_tangency
from .secondform import SecondFormData
from .tangency import PFSplit, SlantReport, pf_decompose, slant_function

logger = logging.getLogger(__name__)


class SplitDimensionError(ValueError):
    """Declared split does not match the tangent space dimension"""


class DegenerateFError(ValueError):
    """F fails to be injective on a proper slant distribution"""


class NonSasakianAmbientError(ValueError):
    """Identity requires a Sasakian ambient"""


@dataclass(frozen=True, eq=False)
class DistributionSplit:
    """
    g-orthonormal bases of D and D^θ plus the unit Reeb direction.
    D_push / Dtheta_push are the ξ-removed pushes of the declared directions.
    """
    D_basis: Tuple[np.ndarray, ...]
    Dtheta_basis: Tuple[np.ndarray, ...]
    xi_dir: np.ndarray
    D_push: Tuple[np.ndarray, ...] = ()
    Dtheta_push: Tuple[np.ndarray, ...] = ()
    declared: Optional[DeclaredSplit] = None

    @property
    def m1(self) -> int:
        return len(self.D_basis)

    @property
    def m2(self) -> int:
        return len(self.Dtheta_basis)

    @property
    def base_basis(self) -> Tuple[np.ndarray, ...]:
        """Orthonormal basis of D ⊕ ⟨ξ⟩"""
        return self.D_basis + (self.xi_dir,)


def remove_xi(v: np.ndarray, xi_hat: np.ndarray, metric: np.ndarray) -> np.ndarray:
    return v - inner(metric, v, xi_hat) * xi_hat


def build_split(fp: FramedPoint, amb: AmbientStructure, declared: DeclaredSplit, rank_tol: float = None) -> DistributionSplit:
    """
    Raises:
        SplitDimensionError: m1 + m2 + 1 ≠ k or a declared set is rank deficient modulo ξ
    """
    if declared.m1 + declared.m2 + 1 != fp.k:
        raise SplitDimensionError(f"m1 + m2 + 1 = {declared.m1 + declared.m2 + 1} but the submanifold has dimension {fp.k}")
    rank_tol = settings.RANK_TOLERANCE if rank_tol is None else rank_tol
    g = fp.metric
    xi = amb.xi_field(fp.pos)
    xi_hat = xi / norm(g, xi)

    D_push = tuple(remove_xi(fp.push(d), xi_hat, g) for d in declared.D)
    Dtheta_push = tuple(remove_xi(fp.push(z), xi_hat, g) for z in declared.Dtheta)
    D_basis, r1 = orthonormalize(D_push, g, rank_tol)
    Dtheta_basis, r2 = orthonormalize(Dtheta_push, g, rank_tol)
    if r1 != declared.m1 or r2 != declared.m2:
        raise SplitDimensionError(f"declared directions have rank ({r1}, {r2}) modulo xi, expected ({declared.m1}, {declared.m2})")
    return DistributionSplit(
        D_basis=tuple(D_basis),
        Dtheta_basis=tuple(Dtheta_basis),
        xi_dir=xi_hat,
        D_push=D_push,
        Dtheta_push=Dtheta_push,
        declared=declared,
    )


def _first_set(*values: Optional[float]) -> float:
    return next(v for v in values if v is not None)


@dataclass
class SplitVerification:
    residuals: Dict[str, float]
    slant: Optional[SlantReport] = None
    structural_tol: Optional[float] = None
    angle_tol: Optional[float] = None

    @property
    def theta(self) -> Optional[float]:
        if self.slant is None:
            return None
        return self.slant.theta

    def passed(self, structural_tol: float = None, angle_tol: float = None) -> bool:
        structural_tol = _first_set(structural_tol, self.structural_tol, settings.STRUCTURAL_TOLERANCE)
        angle_tol = _first_set(angle_tol, self.angle_tol, settings.ANGLE_TOLERANCE)
        checks = [value < structural_tol for name, value in self.residuals.items() if name != 'slant_deviation']
        if 'slant_deviation' in self.residuals:
            checks.append(self.residuals['slant_deviation'] < angle_tol)
        return all(checks)


def verify_split(
    fp: FramedPoint,
    amb: AmbientStructure,
    split: DistributionSplit,
    pf: PFSplit = None,
    seed: int = 0,
    structural_tol: float = None,
    angle_tol: float = None,
    rank_tol: float = None,
) -> SplitVerification:
    """
    Residuals for orthogonality, completeness, φ-invariance of D, pointwise
    slantness of D^θ and ξ alignment. The tolerances are kept on the result
    and used by its passed() verdict.
    """
    g = fp.metric
    pf = pf or pf_decompose(fp, amb)
    phi = pf.phi

    orthogonality = max(
        (abs(inner(g, d, z)) for d in split.D_basis for z in split.Dtheta_basis),
        default=0.0,
    )
    span = list(split.D_basis) + list(split.Dtheta_basis) + [split.xi_dir]
    completeness = 0.0
    for e in fp.tan_frame:
        _, rest = metric_project(e, span, g)
        completeness = max(completeness, norm(g, rest))

    invariance = 0.0
    F_on_D = 0.0
    for d in split.D_basis:
        _, leak = metric_project(phi @ d, list(split.D_basis), g)
        invariance = max(invariance, norm(g, leak))
        F_on_D = max(F_on_D, norm(g, pf.F_of(d)))

    residuals = {
        'orthogonality': orthogonality,
        'completeness': completeness,
        'D_invariance': invariance,
        'F_on_D': F_on_D,
        'F_on_xi': norm(g, pf.F_of(split.xi_dir)),
        'xi_alignment': xi_tangency(fp, amb).normal_norm,
    }

    slant = None
    if split.m2:
        slant = slant_function(fp, amb, split.Dtheta_basis, seed=seed, angle_tol=angle_tol, pf=pf, rank_tol=rank_tol)
        residuals['slant_deviation'] = slant.max_deviation
        residuals['slant_P_squared'] = slant.theorem1_residual
    return SplitVerification(residuals=residuals, slant=slant, structural_tol=structural_tol, angle_tol=angle_tol)


# ========= Classification =========

def classify(
    m1: int,
    m2: int,
    thetas: Sequence[float],
    angle_tol: float = None,
    constancy_tol: float = None,
) -> Classification:
    """
    Case classification of a verified split from the slant function values
    collected over all sample points.
    """
    angle_tol = settings.ANGLE_TOLERANCE if angle_tol is None else angle_tol
    constancy_tol = settings.CONSTANCY_TOLERANCE if constancy_tol is None else constancy_tol
    if m2 == 0:
        return Classification.INVARIANT

    values = np.asarray(thetas, dtype=float)
    if values.size == 0:
        raise ValueError("classification needs slant values when D^theta is non-trivial")
    invariant = bool(np.max(np.abs(values)) < angle_tol)
    anti_invariant = bool(np.max(np.abs(values - math.pi / 2)) < angle_tol)

    if invariant:
        return Classification.INVARIANT
    if m1 == 0:
        return Classification.ANTI_INVARIANT if anti_invariant else Classification.POINTWISE_SLANT
    if anti_invariant:
        return Classification.CONTACT_CR
    if float(np.std(values)) < constancy_tol:
        return Classification.SEMI_SLANT
    return Classification.PROPER_POINTWISE_SEMI_SLANT


# ========= Normal split =========

@dataclass(frozen=True, eq=False)
class NormalSplit:
    FDtheta_basis: Tuple[np.ndarray, ...]
    nu_basis: Tuple[np.ndarray, ...]
    nu_invariance: float
    orthogonality: float

    def to_dict(self) -> Dict[str, float]:
        return {
            'FDtheta_dim': len(self.FDtheta_basis),
            'nu_dim': len(self.nu_basis),
            'nu_invariance': self.nu_invariance,
            'normal_orthogonality': self.orthogonality,
        }


def normal_split(
    fp: FramedPoint,
    amb: AmbientStructure,
    split: DistributionSplit,
    pf: PFSplit = None,
    degenerate_tol: float = None,
    rank_tol: float = None,
) -> NormalSplit:
    """
    T⊥M = FD^θ ⊕ ν with ν the orthocomplement of FD^θ in the normal space.

    Raises:
        DegenerateFError: F is not injective on D^θ although sin θ > degenerate_tol
            for every basis vector
    """
    degenerate_tol = settings.DEGENERATE_ANGLE_TOLERANCE if degenerate_tol is None else degenerate_tol
    rank_tol = settings.RANK_TOLERANCE if rank_tol is None else rank_tol
    g = fp.metric
    pf = pf or pf_decompose(fp, amb)
    images = [pf.F_of(z) for z in split.Dtheta_basis]
    proper = [v for v in images if norm(g, v) > degenerate_tol]
    FD, rank = orthonormalize(proper, g, rank_tol)
    if len(proper) == split.m2 and rank != split.m2:
        raise DegenerateFError(f"dim F(D^theta) = {rank}, expected {split.m2}")

    candidates = [metric_project(n, FD, g)[1] for n in fp.nor_frame]
    nu, _ = orthonormalize(candidates, g, rank_tol)

    invariance = 0.0
    for n in nu:
        _, leak = metric_project(pf.phi @ n, nu, g)
        invariance = max(invariance, norm(g, leak))
    orthogonality = max((abs(inner(g, a, b)) for a in FD for b in nu), default=0.0)
    return NormalSplit(tuple(FD), tuple(nu), invariance, orthogonality)


# ========= Invariant-slant covariant identities =========

@dataclass(frozen=True, eq=False)
class LocalSection:
    """
    V(q) = J(q)d − r·η(J(q)d)ξ(q) + β·ξ(q) near p, with value and
    coordinate derivatives ∂_c V (columns).
    """
    value: np.ndarray
    derivative: np.ndarray


def local_section(fp: FramedPoint, amb: AmbientStructure, d: np.ndarray, beta: float, strip_xi: bool) -> LocalSection:
    J, H = fp.jac, fp.hess
    xi, dxi = amb.xi_jet(fp.pos)
    eta, deta = amb.eta_jet(fp.pos)
    Jd = J @ d
    Hd = np.einsum('cia,i->ac', H, d)
    dxi_c = dxi @ J
    value = Jd + beta * xi
    derivative = Hd + beta * dxi_c
    if strip_xi:
        eta_jd = eta @ Jd
        d_eta_jd = (deta @ J).T @ Jd + eta @ Hd
        value = value - eta_jd * xi
        derivative = derivative - np.outer(xi, d_eta_jd) - eta_jd * dxi_c
    return LocalSection(value, derivative)


def _directions(pushes: Sequence[np.ndarray], declared: Sequence[Sequence[float]], v: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Domain direction Σ α_i d_i whose ξ-removed push equals v"""
    if not pushes:
        return np.zeros(0)
    B = np.column_stack(pushes)
    alpha = np.linalg.lstsq(B.T @ g @ B, B.T @ (g @ v), rcond=None)[0]
    return np.asarray(declared, dtype=float).T @ alpha


def _induced_derivative(fp: FramedPoint, sf: SecondFormData, X: np.ndarray, section: LocalSection) -> np.ndarray:
    """∇_X V: tangential part of ∂_X V + Γ̃(X, V)"""
    c = sf.coords(X)
    full = section.derivative @ c + sf.connection.contract(X, section.value)
    return fp.tangential(full)


def base_section(fp: FramedPoint, amb: AmbientStructure, split: DistributionSplit, Y: np.ndarray) -> LocalSection:
    """Section of D ⊕ ⟨ξ⟩ through Y built from the declared D directions"""
    g = fp.metric
    beta = inner(g, Y, split.xi_dir) / norm(g, amb.xi_field(fp.pos))
    Y_D = remove_xi(Y, split.xi_dir, g)
    d = _directions(split.D_push, split.declared.D, Y_D, g) if split.m1 else np.zeros(fp.k)
    return local_section(fp, amb, d, beta, strip_xi=True)


def fiber_section(fp: FramedPoint, amb: AmbientStructure, split: DistributionSplit, W: np.ndarray) -> LocalSection:
    """Section of D^θ through W built from the declared D^θ directions"""
    d = _directions(split.Dtheta_push, split.declared.Dtheta, W, fp.metric)
    return local_section(fp, amb, d, 0.0, strip_xi=True)


def require_sasakian(fp: FramedPoint, amb: AmbientStructure, tol: float = None):
    tol = settings.STRUCTURAL_TOLERANCE if tol is None else tol
    if not amb.sasakian:
        raise NonSasakianAmbientError(f"{amb.name} is not a Sasakian structure")
    defect = sasakian_defect(amb, fp.pos)
    if defect > tol:
        raise NonSasakianAmbientError(f"Sasakian condition fails at this point (defect {defect:.3e})")


def lemma1_residuals(
    fp: FramedPoint,
    amb: AmbientStructure,
    split: DistributionSplit,
    sf: SecondFormData,
    X: np.ndarray,
    Y: np.ndarray,
    Z: np.ndarray,
    W: np.ndarray,
    theta: float,
    pf: PFSplit = None,
    structural_tol: float = None,
) -> Dict[str, float]:
    """
    |LHS − RHS| of
        sin²θ g(∇_X Y, Z) = g(h(X, φY), FZ) − g(h(X, Y), FPZ)
        sin²θ g(∇_Z W, X) = g(h(X, Z), FPW) − g(h(φX, Z), FW)
    for X, Y ∈ D ⊕ ⟨ξ⟩ and Z, W ∈ D^θ. Y and W are extended to local
    sections of their distributions; both sides are tensorial in the rest.

    Raises:
        NonSasakianAmbientError: ambient is not Sasakian at the point
    """
    require_sasakian(fp, amb, structural_tol)
    pf = pf or pf_decompose(fp, amb)
    g = fp.metric
    s2 = math.sin(theta) ** 2

    nabla_XY = _induced_derivative(fp, sf, X, base_section(fp, amb, split, Y))
    lhs_i = s2 * inner(g, nabla_XY, Z)
    rhs_i = inner(g, sf.h_of(X, pf.P_of(Y)), pf.F_of(Z)) - inner(g, sf.h_of(X, Y), pf.F_of(pf.P_of(Z)))

    nabla_ZW = _induced_derivative(fp, sf, Z, fiber_section(fp, amb, split, W))
    lhs_ii = s2 * inner(g, nabla_ZW, X)
    rhs_ii = inner(g, sf.h_of(X, Z), pf.F_of(pf.P_of(W))) - inner(g, sf.h_of(pf.P_of(X), Z), pf.F_of(W))

    return {
        'base_connection_slant': abs(lhs_i - rhs_i),
        'fiber_connection_slant': abs(lhs_ii - rhs_ii),
    }


__all__ = [
    'DistributionSplit',
    'SplitVerification',
    'NormalSplit',
    'Classification',
    'LocalSection',
    'SplitDimensionError',
    'DegenerateFError',
    'NonSasakianAmbientError',
    'build_split',
    'verify_split',
    'classify',
    'normal_split',
    'local_section',
    'base_section',
    'fiber_section',
    'require_sasakian',
    'lemma1_residuals',
]
