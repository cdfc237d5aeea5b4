"""
Second fundamental form, shape operators and the normal connection.

Everything is computed on coordinate fields ∂_iχ first:
    ∇̃_{∂i}∂_jχ = ∂_i∂_jχ + Γ̃(∂_iχ, ∂_jχ)
whose tangential part gives the induced connection and normal part h.
Orthonormal-frame matrices are obtained afterwards by change of basis.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from config.settings import settings
from numjet.jet import central_difference
from numjet.linalg import inner, norm, orthonormalize

from .ambient import AmbientStructure, ChristoffelData, christoffel
from .immersion import FramedPoint, Immersion, frame_at

logger = logging.getLogger(__name__)

# domain point → ambient vector normal to the immersion there
NormalField = Callable[[np.ndarray], np.ndarray]

NORMAL_CHECK = 1e-8


class NonNormalVectorError(ValueError):
    """Vector handed to a shape operator has a tangential component"""


class NonOrthogonalSplitError(ValueError):
    """Sub-bases handed to mixed_tg_test are not g-orthogonal"""


@dataclass(frozen=True, eq=False)
class SecondFormData:
    """
    h and the induced connection at a point.

    nabla_tilde[i, j]: ∇̃_{∂i}∂_jχ (ambient vector)
    induced_gamma[m, i, j]: ∇_{∂i}∂_j = Γ^m_ij ∂_m
    h_coord[i, j]: h(∂_i, ∂_j) (ambient vector)
    h[a, b]: normal-frame coordinates of h(e_a, e_b)
    """
    fp: FramedPoint
    connection: ChristoffelData
    nabla_tilde: np.ndarray
    induced_gamma: np.ndarray
    h_coord: np.ndarray
    h: np.ndarray
    frame_coeffs: np.ndarray

    def coords(self, X: np.ndarray) -> np.ndarray:
        """Domain coefficients c of a tangent vector X = J c"""
        fp = self.fp
        return np.linalg.solve(fp.induced_metric, fp.jac.T @ (fp.metric @ np.asarray(X, dtype=float)))

    def h_of(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """h(X, Y) as an ambient normal vector"""
        return np.einsum('i,j,ija->a', self.coords(X), self.coords(Y), self.h_coord)

    def nabla_of(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """∇_X Y for Y extended with constant coordinate coefficients"""
        c = np.einsum('i,j,mij->m', self.coords(X), self.coords(Y), self.induced_gamma)
        return self.fp.jac @ c

    def nabla_tilde_of(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        return np.einsum('i,j,ija->a', self.coords(X), self.coords(Y), self.nabla_tilde)

    @property
    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.h - self.h.transpose(1, 0, 2)))) if self.h.size else 0.0

    def gauss_reconstruction_error(self) -> float:
        """max ‖∇̃_{∂i}∂_j − (tangential + normal part)‖_g against the frame projection"""
        fp = self.fp
        worst = 0.0
        for i in range(fp.k):
            for j in range(fp.k):
                V = self.nabla_tilde[i, j]
                rebuilt = fp.jac @ self.induced_gamma[:, i, j] + self.h_coord[i, j]
                worst = max(worst, norm(fp.metric, V - rebuilt), norm(fp.metric, fp.tangential(V) - fp.jac @ self.induced_gamma[:, i, j]))
        return worst


def second_form(fp: FramedPoint, amb: AmbientStructure, connection: ChristoffelData = None) -> SecondFormData:
    connection = connection or christoffel(amb, fp.pos)
    J, g, G = fp.jac, fp.metric, fp.induced_metric
    nabla_tilde = fp.hess + np.einsum('kab,ai,bj->ijk', connection.gamma, J, J)

    projected = np.einsum('ak,ab,ijb->kij', J, g, nabla_tilde)
    induced_gamma = np.linalg.solve(G, projected.reshape(fp.k, -1)).reshape(fp.k, fp.k, fp.k)
    h_coord = nabla_tilde - np.einsum('am,mij->ija', J, induced_gamma)

    # tangent frame vectors in coordinate-field coefficients: e_a = J E[:, a]
    E = np.linalg.solve(G, J.T @ g @ fp.tangent_basis())
    N = fp.normal_basis()
    h = np.einsum('ia,jb,ijc,cd,dn->abn', E, E, h_coord, g, N)

    return SecondFormData(
        fp=fp,
        connection=connection,
        nabla_tilde=nabla_tilde,
        induced_gamma=induced_gamma,
        h_coord=h_coord,
        h=h,
        frame_coeffs=E,
    )


# ========= Shape operator =========

@dataclass(frozen=True, eq=False)
class ShapeOperator:
    """
    A_N in orthonormal tangent-frame coordinates.

    extension[:, a] is ∇̃_{e_a}Ñ for the normal extension of N, obtained
    from the immersion jets without going through h.
    """
    N: np.ndarray
    A: np.ndarray
    tangent: np.ndarray
    metric: np.ndarray
    weingarten_defect: float
    extension: np.ndarray

    def A_of(self, X: np.ndarray) -> np.ndarray:
        return self.tangent @ (self.A @ (self.tangent.T @ (self.metric @ X)))

    @property
    def self_adjoint_defect(self) -> float:
        return float(np.max(np.abs(self.A - self.A.T))) if self.A.size else 0.0


def extension_derivative(fp: FramedPoint, amb: AmbientStructure, N: np.ndarray) -> np.ndarray:
    """
    ∂_c Ñ for the normal extension Ñ(q) = N − P_T(q) N, where P_T(q) is the
    g-orthogonal projection onto the tangent space at χ(q). Column c.
    """
    J, g, G, H = fp.jac, fp.metric, fp.induced_metric, fp.hess
    _, dg = amb.metric_jet(fp.pos)
    dg_along = np.einsum('abm,mc->abc', dg, J)
    # ∂_c(Jᵀ g) N, the terms multiplying Jᵀ g N vanish since N is normal
    inner_terms = np.einsum('cia,ab,b->ic', H, g, N) + np.einsum('ai,abc,b->ic', J, dg_along, N)
    return -J @ np.linalg.solve(G, inner_terms)


def _weingarten_direct(fp: FramedPoint, amb: AmbientStructure, connection: ChristoffelData, N: np.ndarray) -> np.ndarray:
    """∇̃_{∂c}Ñ for every coordinate direction, shape (N_dim, k)"""
    dN = extension_derivative(fp, amb, N)
    correction = np.einsum('kij,ic,j->kc', connection.gamma, fp.jac, N)
    return dN + correction


def shape_operator(sf: SecondFormData, fp: FramedPoint, amb: AmbientStructure, N: Sequence[float]) -> ShapeOperator:
    """
    A_N from g(A_N X, Y) = g(h(X, Y), N), cross-checked against the
    tangential part of −∇̃_X N.

    Raises:
        NonNormalVectorError: N has a tangential component above 1e-8
    """
    N = np.asarray(N, dtype=float)
    g = fp.metric
    leak = norm(g, fp.tangential(N))
    if leak > NORMAL_CHECK:
        raise NonNormalVectorError(f"vector has tangential component of norm {leak:.3e}")

    n_coords = fp.normal_basis().T @ (g @ N)
    A = np.einsum('abn,n->ab', sf.h, n_coords) if sf.h.size else np.zeros((fp.k, fp.k))

    direct = _weingarten_direct(fp, amb, sf.connection, N) @ sf.frame_coeffs
    T = fp.tangent_basis()
    defect = 0.0
    for a in range(fp.k):
        from_h = T @ A[:, a]
        defect = max(defect, norm(g, -fp.tangential(direct[:, a]) - from_h))
    if defect > 1e-7:
        logger.warning(f"⚠️ Weingarten cross-check disagrees by {defect:.3e}")
    return ShapeOperator(N=N, A=A, tangent=T, metric=g, weingarten_defect=defect, extension=direct)


def duality_residual(sf: SecondFormData, shape: ShapeOperator) -> float:
    """max |g(h(e_a, e_b), N) + g(∇̃_{e_a}Ñ, e_b)| with h and ∇̃Ñ from independent jet routes"""
    fp = sf.fp
    g = fp.metric
    T = fp.tangent_basis()
    worst = 0.0
    for a in range(fp.k):
        for b in range(fp.k):
            h_ab = fp.normal_basis() @ sf.h[a, b] if sf.h.size else np.zeros(fp.dim)
            worst = max(worst, abs(inner(g, h_ab, shape.N) + inner(g, shape.extension[:, a], T[:, b])))
    return worst


# ========= Normal connection =========

def ambient_derivative_of_field(
    fp: FramedPoint,
    amb: AmbientStructure,
    direction: Sequence[float],
    field: NormalField,
    connection: ChristoffelData = None,
    step: float = None,
) -> np.ndarray:
    """∇̃_X N for a field given on the domain, differentiated along the coordinate line of X"""
    step = settings.FD_STEP if step is None else step
    connection = connection or christoffel(amb, fp.pos)
    X = np.asarray(direction, dtype=float)
    c = np.linalg.solve(fp.induced_metric, fp.jac.T @ (fp.metric @ X))
    derivative = central_difference(lambda s: field(fp.p + s[0] * c), [0.0], step)[0]
    return derivative + connection.contract(X, field(fp.p))


def normal_connection(
    fp: FramedPoint,
    amb: AmbientStructure,
    direction: Sequence[float],
    field: NormalField,
    connection: ChristoffelData = None,
) -> np.ndarray:
    """∇⊥_X N: the normal projection of ∇̃_X N"""
    return fp.normal(ambient_derivative_of_field(fp, amb, direction, field, connection))


def weingarten_reconstruction_residual(
    sf: SecondFormData,
    fp: FramedPoint,
    amb: AmbientStructure,
    direction: Sequence[float],
    field: NormalField,
) -> float:
    """‖∇̃_X N + A_N X − ∇⊥_X N‖_g"""
    X = np.asarray(direction, dtype=float)
    full = ambient_derivative_of_field(fp, amb, X, field, sf.connection)
    shape = shape_operator(sf, fp, amb, field(fp.p))
    return norm(fp.metric, full + shape.A_of(X) - fp.normal(full))


def projected_normal_field(im: Immersion, amb: AmbientStructure, vector: Sequence[float]) -> NormalField:
    """q ↦ normal part at χ(q) of a fixed ambient vector"""
    V = np.asarray(vector, dtype=float)

    def evaluate(q: np.ndarray) -> np.ndarray:
        return frame_at(im, amb, q).normal(V)
    return evaluate


def mixed_tg_test(sf: SecondFormData, D1: Sequence[np.ndarray], D2: Sequence[np.ndarray], rank_tol: float = None) -> float:
    """
    max ‖h(X, Z)‖_g over orthonormal bases of D1 and D2 (exact on bases by bilinearity).

    Raises:
        NonOrthogonalSplitError: the two sub-bases are not g-orthogonal
    """
    rank_tol = settings.RANK_TOLERANCE if rank_tol is None else rank_tol
    g = sf.fp.metric
    first, _ = orthonormalize(list(D1), g, rank_tol)
    second, _ = orthonormalize(list(D2), g, rank_tol)
    coupling = max((abs(inner(g, x, z)) for x in first for z in second), default=0.0)
    if coupling > NORMAL_CHECK:
        raise NonOrthogonalSplitError(f"sub-bases are not orthogonal (|g(X, Z)| = {coupling:.3e})")
    return max((norm(g, sf.h_of(x, z)) for x in first for z in second), default=0.0)


__all__ = [
    'SecondFormData',
    'ShapeOperator',
    'NormalField',
    'NonNormalVectorError',
    'NonOrthogonalSplitError',
    'second_form',
    'shape_operator',
    'extension_derivative',
    'duality_residual',
    'ambient_derivative_of_field',
    'normal_connection',
    'weingarten_reconstruction_residual',
    'projected_normal_field',
    'mixed_tg_test',
]
