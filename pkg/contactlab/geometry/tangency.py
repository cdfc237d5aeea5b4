"""
Tangential/normal decompositions of φ along a submanifold and slant angles.

φX = PX + FX for tangent X and φN = tN + fN for normal N. Matrices are
stored in the orthonormal tangent/normal frame coordinates of a FramedPoint.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence

import numpy as np

from config.settings import settings
from numjet.linalg import inner, norm, orthonormalize

from .ambient import AmbientStructure
from .immersion import FramedPoint

logger = logging.getLogger(__name__)

XI_PROPORTIONAL_TOLERANCE = 1e-8
CLAMP_SLACK = 1e-9


class XiProportionalError(ValueError):
    """Slant angle requested for a vector proportional to ξ"""


class DegenerateStructureError(ValueError):
    """φX vanishes for X not proportional to ξ"""


class SlantRangeError(ValueError):
    """‖PX‖/‖φX‖ exceeds 1 beyond round-off"""


class EmptySubspaceError(ValueError):
    """Slant function requested on an empty subspace"""


# ========= Decompositions =========

@dataclass(frozen=True, eq=False)
class PFSplit:
    """P (k×k) and F ((2n+1−k)×k) in frame coordinates"""
    P: np.ndarray
    F: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    metric: np.ndarray
    phi: np.ndarray

    def tangent_coords(self, X: np.ndarray) -> np.ndarray:
        return self.tangent.T @ (self.metric @ X)

    def P_of(self, X: np.ndarray) -> np.ndarray:
        return self.tangent @ (self.P @ self.tangent_coords(X))

    def F_of(self, X: np.ndarray) -> np.ndarray:
        return self.normal @ (self.F @ self.tangent_coords(X))

    def reconstruction_error(self) -> float:
        """max over tangent frame vectors of ‖φe − (Pe + Fe)‖_g"""
        worst = 0.0
        for j in range(self.tangent.shape[1]):
            e = self.tangent[:, j]
            worst = max(worst, norm(self.metric, self.phi @ e - self.P_of(e) - self.F_of(e)))
        return worst


@dataclass(frozen=True, eq=False)
class TFSplit:
    """t (k×(2n+1−k)) and the normal operator f ((2n+1−k)×(2n+1−k))"""
    t: np.ndarray
    f_op: np.ndarray
    tangent: np.ndarray
    normal: np.ndarray
    metric: np.ndarray
    phi: np.ndarray

    def normal_coords(self, V: np.ndarray) -> np.ndarray:
        return self.normal.T @ (self.metric @ V)

    def t_of(self, V: np.ndarray) -> np.ndarray:
        return self.tangent @ (self.t @ self.normal_coords(V))

    def f_of(self, V: np.ndarray) -> np.ndarray:
        return self.normal @ (self.f_op @ self.normal_coords(V))

    def reconstruction_error(self) -> float:
        worst = 0.0
        for a in range(self.normal.shape[1]):
            N = self.normal[:, a]
            worst = max(worst, norm(self.metric, self.phi @ N - self.t_of(N) - self.f_of(N)))
        return worst


def pf_decompose(fp: FramedPoint, amb: AmbientStructure) -> PFSplit:
    phi = amb.phi_field(fp.pos)
    T, N, g = fp.tangent_basis(), fp.normal_basis(), fp.metric
    image = phi @ T
    return PFSplit(P=T.T @ g @ image, F=N.T @ g @ image, tangent=T, normal=N, metric=g, phi=phi)


def tf_decompose(fp: FramedPoint, amb: AmbientStructure) -> TFSplit:
    phi = amb.phi_field(fp.pos)
    T, N, g = fp.tangent_basis(), fp.normal_basis(), fp.metric
    image = phi @ N
    return TFSplit(t=T.T @ g @ image, f_op=N.T @ g @ image, tangent=T, normal=N, metric=g, phi=phi)


def adjointness_residual(pf: PFSplit, tf: TFSplit) -> float:
    """max |g(F e_j, N_a) + g(e_j, t N_a)| over frame vectors"""
    if pf.F.size == 0:
        return 0.0
    return float(np.max(np.abs(pf.F + tf.t.T)))


# ========= Slant angles =========

def _unit_xi(fp: FramedPoint, amb: AmbientStructure) -> np.ndarray:
    xi = amb.xi_field(fp.pos)
    return xi / norm(fp.metric, xi)


def slant_angle(fp: FramedPoint, amb: AmbientStructure, X: Sequence[float], pf: PFSplit = None) -> float:
    """
    Angle between φX and T_pM, in [0, π/2].

    Computed as atan2(‖FX‖, ‖PX‖), which equals arccos(‖PX‖/‖φX‖) and stays
    well conditioned near 0 and π/2.

    Raises:
        XiProportionalError: X is (numerically) a multiple of ξ
        DegenerateStructureError: φX = 0 although X is not along ξ
        SlantRangeError: ‖PX‖/‖φX‖ > 1 + 1e-9
    """
    g = fp.metric
    X = np.asarray(X, dtype=float)
    length = norm(g, X)
    if length == 0.0:
        raise XiProportionalError("zero vector has no slant angle")
    unit = X / length
    xi_hat = _unit_xi(fp, amb)
    if norm(g, unit - inner(g, unit, xi_hat) * xi_hat) <= XI_PROPORTIONAL_TOLERANCE:
        raise XiProportionalError("vector is proportional to xi")

    pf = pf or pf_decompose(fp, amb)
    phi_x = pf.phi @ unit
    phi_norm = norm(g, phi_x)
    if phi_norm < XI_PROPORTIONAL_TOLERANCE:
        raise DegenerateStructureError("phi X vanishes for X not along xi")
    tangential = pf.P_of(unit)
    normal_part = phi_x - tangential
    tangential_norm = norm(g, tangential)
    if tangential_norm / phi_norm > 1.0 + CLAMP_SLACK:
        raise SlantRangeError(f"|PX|/|phi X| = {tangential_norm / phi_norm:.12f} exceeds 1")
    return math.atan2(norm(g, normal_part), tangential_norm)


class SlantVerdict(str, Enum):
    INVARIANT = "invariant"
    ANTI_INVARIANT = "anti-invariant"
    POINTWISE_SLANT = "pointwise-slant"
    NOT_SLANT = "not-slant"


@dataclass
class SlantReport:
    theta: float
    max_deviation: float
    per_vector: List[float]
    verdict: SlantVerdict
    theorem1_residual: float
    dimension: int

    @property
    def is_slant(self) -> bool:
        return self.verdict != SlantVerdict.NOT_SLANT

    def to_dict(self) -> Dict[str, object]:
        return {
            'theta': self.theta,
            'max_deviation': self.max_deviation,
            'verdict': self.verdict.value,
            'theorem1_residual': self.theorem1_residual,
            'dimension': self.dimension,
        }


def p_squared_residual(pf: PFSplit, xi: np.ndarray, eta: np.ndarray, basis: Sequence[np.ndarray], theta: float) -> float:
    """max over basis vectors of ‖P²X + cos²θ(X − η(X)ξ)‖_g"""
    c2 = math.cos(theta) ** 2
    worst = 0.0
    for X in basis:
        worst = max(worst, norm(pf.metric, pf.P_of(pf.P_of(X)) + c2 * (X - (eta @ X) * xi)))
    return worst


def slant_function(
    fp: FramedPoint,
    amb: AmbientStructure,
    basis: Sequence[np.ndarray],
    seed: int = 0,
    samples: int = None,
    angle_tol: float = None,
    pf: PFSplit = None,
    rank_tol: float = None,
) -> SlantReport:
    """
    Slant function of a ξ-orthogonal tangent subspace at a point.

    θ is the mean slant angle over seeded random unit vectors of the
    subspace, max_deviation their spread. The P² certificate is evaluated
    with that θ on an orthonormal basis of the subspace.

    Raises:
        EmptySubspaceError: basis spans nothing
        ValueError: subspace not g-orthogonal to ξ
    """
    samples = settings.SLANT_SAMPLE_VECTORS if samples is None else samples
    angle_tol = settings.ANGLE_TOLERANCE if angle_tol is None else angle_tol
    rank_tol = settings.RANK_TOLERANCE if rank_tol is None else rank_tol
    g = fp.metric
    onb, rank = orthonormalize(list(basis), g, rank_tol)
    if rank == 0:
        raise EmptySubspaceError("slant function of an empty subspace")

    xi_hat = _unit_xi(fp, amb)
    leak = max(abs(inner(g, b, xi_hat)) for b in onb)
    if leak > XI_PROPORTIONAL_TOLERANCE:
        raise ValueError(f"subspace is not orthogonal to xi (|g(b, xi)| = {leak:.3e})")

    pf = pf or pf_decompose(fp, amb)
    rng = np.random.default_rng(seed)
    B = np.column_stack(onb)
    angles = []
    for _ in range(samples):
        c = rng.standard_normal(rank)
        angles.append(slant_angle(fp, amb, B @ (c / np.linalg.norm(c)), pf))

    theta = float(np.mean(angles))
    spread = float(np.max(angles) - np.min(angles))
    if spread >= angle_tol:
        verdict = SlantVerdict.NOT_SLANT
    elif theta < angle_tol:
        verdict = SlantVerdict.INVARIANT
    elif abs(theta - math.pi / 2) < angle_tol:
        verdict = SlantVerdict.ANTI_INVARIANT
    else:
        verdict = SlantVerdict.POINTWISE_SLANT

    xi, eta = amb.xi_field(fp.pos), amb.eta_field(fp.pos)
    return SlantReport(
        theta=theta,
        max_deviation=spread,
        per_vector=[float(a) for a in angles],
        verdict=verdict,
        theorem1_residual=p_squared_residual(pf, xi, eta, onb, theta),
        dimension=rank,
    )


# ========= Identities =========

def identity_residuals(
    fp: FramedPoint,
    amb: AmbientStructure,
    split: PFSplit,
    X: Sequence[float],
    Y: Sequence[float],
    theta: Optional[float] = None,
    tf: TFSplit = None,
) -> Dict[str, float]:
    """
    Residuals of the P/F identities for tangent X, Y.

    Only antisymmetry of P is unconditional; the slant identities need the
    slant function θ of a verified pointwise slant subspace containing X, Y.
    """
    g = fp.metric
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    residuals = {'skew_P': abs(inner(g, split.P_of(X), Y) + inner(g, X, split.P_of(Y)))}
    if theta is None:
        return residuals

    tf = tf or tf_decompose(fp, amb)
    xi, eta = amb.xi_field(fp.pos), amb.eta_field(fp.pos)
    c2, s2 = math.cos(theta) ** 2, math.sin(theta) ** 2
    reduced = inner(g, X, Y) - (eta @ X) * (eta @ Y)
    FX = split.F_of(X)
    residuals.update({
        'slant_P_squared': norm(g, split.P_of(split.P_of(X)) + c2 * (X - (eta @ X) * xi)),
        'slant_P_gram': abs(inner(g, split.P_of(X), split.P_of(Y)) - c2 * reduced),
        'slant_F_gram': abs(inner(g, FX, split.F_of(Y)) - s2 * reduced),
        'slant_tF': norm(g, tf.t_of(FX) - s2 * (-X + (eta @ X) * xi)),
        'slant_fF': norm(g, tf.f_of(FX) + split.F_of(split.P_of(X))),
    })
    return residuals


@dataclass
class ThetaStatistics:
    mean: float
    stddev: float
    minimum: float
    maximum: float
    constant: bool
    values: List[float] = field(default_factory=list, repr=False)

    def to_dict(self) -> Dict[str, object]:
        return {
            'mean': self.mean,
            'stddev': self.stddev,
            'min': self.minimum,
            'max': self.maximum,
            'constant': self.constant,
        }


def theta_statistics(values: Sequence[float], constancy_tol: float = None) -> ThetaStatistics:
    """Across-point statistics of the slant function; constant iff stddev < tol"""
    constancy_tol = settings.CONSTANCY_TOLERANCE if constancy_tol is None else constancy_tol
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise EmptySubspaceError("no slant values to summarize")
    stddev = float(np.std(arr))
    return ThetaStatistics(
        mean=float(np.mean(arr)),
        stddev=stddev,
        minimum=float(np.min(arr)),
        maximum=float(np.max(arr)),
        constant=stddev < constancy_tol,
        values=[float(v) for v in arr],
    )


__all__ = [
    'PFSplit',
    'TFSplit',
    'SlantReport',
    'SlantVerdict',
    'ThetaStatistics',
    'XiProportionalError',
    'DegenerateStructureError',
    'SlantRangeError',
    'EmptySubspaceError',
    'pf_decompose',
    'tf_decompose',
    'adjointness_residual',
    'slant_angle',
    'slant_function',
    'p_squared_residual',
    'identity_residuals',
    'theta_statistics',
]
