"""
Warped products M_T ×_f M_θ: recovery of f from the induced metric and the
identity suite relating h, P, F and ∇ ln f.

The warping function is recovered up to a constant (f := 1 at the declared
reference base point); every identity only uses ∇ ln f.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from config.settings import settings
from numjet.linalg import inner, metric_project, norm, orthonormalize

from .ambient import AmbientStructure
from .immersion import (
    DeclaredSplit,
    FramedPoint,
    Immersion,
    WarpDeclaration,
    frame_at,
    gram_and_derivative,
)
from .secondform import SecondFormData, ShapeOperator, shape_operator
from .semislant import DistributionSplit, SplitDimensionError, remove_xi, require_sasakian
from .tangency import PFSplit, pf_decompose, slant_angle

logger = logging.getLogger(__name__)

REFUSED_DEGENERATE = "refused: degenerate θ"
REFUSED_NOT_ANTI_INVARIANT = "refused: θ ≠ π/2"

Residual = Union[float, str]


class WarpStructureError(ValueError):
    """Induced metric is not a warped product for the declared split"""


class DegenerateAngleError(ValueError):
    """Identity needs a slant angle away from 0 and π/2"""


# ========= Warp recovery =========

class XiLocation(str, Enum):
    BASE = "base"
    FIBER = "fiber"
    MIXED = "mixed"
    NOT_TANGENT = "not-tangent"


@dataclass
class WarpPointData:
    """Warp quantities at one domain point; dlnf is the coordinate differential of ln f"""
    p: np.ndarray
    f: float
    dlnf: np.ndarray
    grad_lnf: np.ndarray
    lnf_norm: float
    off_block: float
    base_dependence: float
    factorization: float
    fiber_lnf_derivative: float
    xi_location: XiLocation

    def to_dict(self) -> Dict[str, Any]:
        return {
            'f': self.f,
            'dlnf': self.dlnf.tolist(),
            'lnf_norm': self.lnf_norm,
            'off_block': self.off_block,
            'base_dependence': self.base_dependence,
            'factorization': self.factorization,
            'fiber_lnf_derivative': self.fiber_lnf_derivative,
            'xi_location': self.xi_location.value,
        }


@dataclass
class WarpedCandidate:
    """An immersion with a declared base/fiber split and the recovered warping data"""
    im: Immersion
    declaration: WarpDeclaration
    f_samples: Dict[Tuple[float, ...], float] = field(default_factory=dict)
    lnf_grad: Dict[Tuple[float, ...], np.ndarray] = field(default_factory=dict)

    @property
    def base_vars(self) -> Tuple[int, ...]:
        return self.declaration.base_vars

    @property
    def fiber_vars(self) -> Tuple[int, ...]:
        return self.declaration.fiber_vars

    def record(self, data: WarpPointData):
        key = tuple(float(x) for x in data.p)
        self.f_samples[key] = data.f
        self.lnf_grad[key] = data.dlnf


def _xi_location(J: np.ndarray, g: np.ndarray, G: np.ndarray, xi: np.ndarray, base: List[int], fiber: List[int], tol: float) -> XiLocation:
    c = np.linalg.solve(G, J.T @ (g @ xi))
    if norm(g, xi - J @ c) > tol:
        return XiLocation.NOT_TANGENT
    base_part = norm(g, J[:, base] @ c[base])
    fiber_part = norm(g, J[:, fiber] @ c[fiber])
    if fiber_part < tol:
        return XiLocation.BASE
    if base_part < tol:
        return XiLocation.FIBER
    return XiLocation.MIXED


def warp_data_at(c: WarpedCandidate, amb: AmbientStructure, p: Sequence[float]) -> WarpPointData:
    """
    Block structure, factorization G_F(u, v) = f(u)²·G_F(u₀, v) and ∂ ln f at p.

    ∂_c ln f = ½ ∂_c tr G_F / tr G_F along base directions; along fiber
    directions the same quantity at (u₀, v) is subtracted, so a true warped
    metric gives exactly zero there.
    """
    p = np.asarray(p, dtype=float)
    base, fiber = list(c.base_vars), list(c.fiber_vars)
    pos, J, _ = c.im.jets(p)
    g = amb.metric_field(pos)
    G, dG = gram_and_derivative(c.im, amb, p)

    q0 = p.copy()
    q0[base] = c.declaration.reference_point
    G0, dG0 = gram_and_derivative(c.im, amb, q0)

    GF, GF0 = G[np.ix_(fiber, fiber)], G0[np.ix_(fiber, fiber)]
    trace, trace0 = float(np.trace(GF)), float(np.trace(GF0))
    ratio = trace / trace0

    dlnf = 0.5 * np.einsum('aac->c', dG[np.ix_(fiber, fiber, range(c.im.k))]) / trace
    dlnf[fiber] -= 0.5 * np.einsum('aac->c', dG0[np.ix_(fiber, fiber, fiber)]) / trace0

    grad_coords = np.linalg.solve(G, dlnf)
    return WarpPointData(
        p=p,
        f=math.sqrt(ratio),
        dlnf=dlnf,
        grad_lnf=J @ grad_coords,
        lnf_norm=float(math.sqrt(max(dlnf @ grad_coords, 0.0))),
        off_block=float(np.max(np.abs(G[np.ix_(base, fiber)]))),
        base_dependence=float(np.max(np.abs(dG[np.ix_(base, base, fiber)]))),
        factorization=float(np.max(np.abs(GF - ratio * GF0))),
        fiber_lnf_derivative=float(np.max(np.abs(dlnf[fiber]))),
        xi_location=_xi_location(J, g, G, amb.xi_field(pos), base, fiber, settings.XI_ALIGNMENT_TOLERANCE),
    )


@dataclass
class WarpReport:
    points: List[WarpPointData]
    off_block: float
    base_dependence: float
    factorization: float
    fiber_lnf_derivative: float
    max_lnf_gradient: float
    trivial: bool
    xi_locations: List[str]

    @property
    def xi_in_fiber(self) -> bool:
        return XiLocation.FIBER.value in self.xi_locations

    def to_dict(self) -> Dict[str, Any]:
        return {
            'off_block': self.off_block,
            'base_dependence': self.base_dependence,
            'factorization': self.factorization,
            'fiber_lnf_derivative': self.fiber_lnf_derivative,
            'max_lnf_gradient': self.max_lnf_gradient,
            'trivial': self.trivial,
            'xi_locations': self.xi_locations,
        }


def detect_warp(
    c: WarpedCandidate,
    amb: AmbientStructure,
    points: Iterable[Sequence[float]],
    tol: float = None,
) -> WarpReport:
    """
    Raises:
        WarpStructureError: off-block entries, fiber-dependent base block or
            inconsistent fiber factorization beyond tol
    """
    tol = settings.STRUCTURAL_TOLERANCE if tol is None else tol
    data = [warp_data_at(c, amb, p) for p in points]
    if not data:
        raise ValueError("detect_warp needs at least one point")

    report = WarpReport(
        points=data,
        off_block=max(d.off_block for d in data),
        base_dependence=max(d.base_dependence for d in data),
        factorization=max(d.factorization for d in data),
        fiber_lnf_derivative=max(d.fiber_lnf_derivative for d in data),
        max_lnf_gradient=max(d.lnf_norm for d in data),
        trivial=max(d.lnf_norm for d in data) < tol,
        xi_locations=sorted({d.xi_location.value for d in data}),
    )
    if report.off_block > tol:
        raise WarpStructureError(f"block structure violated: off-block metric entry {report.off_block:.3e}")
    if report.base_dependence > tol:
        raise WarpStructureError(f"base block depends on fiber coordinates ({report.base_dependence:.3e})")
    if report.factorization > tol:
        raise WarpStructureError(f"inconsistent fiber factorization, not a warped metric ({report.factorization:.3e})")

    for d in data:
        c.record(d)
    logger.info(
        f"🔍 Warp detected on {len(data)} point(s): max |grad ln f| = {report.max_lnf_gradient:.3e}"
        f"{' (trivial)' if report.trivial else ''}"
    )
    return report


def bishop_oneill_check(c: WarpedCandidate, amb: AmbientStructure, sf: SecondFormData, data: WarpPointData) -> Dict[str, float]:
    """
    On coordinate lifts: ∇_X Z − X(ln f)Z, the fiber part of ∇_X Y for base
    X, Y, and the fiber umbilicity h^θ(Z, W) + g(Z, W)∇ ln f.
    """
    fp = sf.fp
    J, g, G = fp.jac, fp.metric, fp.induced_metric
    gamma = sf.induced_gamma
    base, fiber = list(c.base_vars), list(c.fiber_vars)

    warp_connection = max(
        norm(g, J @ gamma[:, i, a] - data.dlnf[i] * J[:, a]) for i in base for a in fiber
    )
    base_geodesic = max(
        norm(g, J[:, fiber] @ gamma[fiber, i, j]) for i in base for j in base
    )
    umbilicity = max(
        norm(g, J[:, base] @ gamma[base, a, b] + G[a, b] * data.grad_lnf) for a in fiber for b in fiber
    )
    return {
        'warp_connection': warp_connection,
        'base_totally_geodesic': base_geodesic,
        'fiber_umbilicity': umbilicity,
    }


# ========= Slant-function derivative =========

@dataclass
class SlantGradient:
    """Coordinate gradient of θ from the jets, with its finite-difference cross-check"""
    gradient: np.ndarray
    crosscheck: np.ndarray
    unstable: bool

    def along(self, coords: np.ndarray) -> float:
        return float(self.gradient @ coords)


def theta_at(
    im: Immersion,
    amb: AmbientStructure,
    declared: DeclaredSplit,
    q: Sequence[float],
    rank_tol: float = None,
) -> float:
    """Slant angle of the first ξ-removed declared D^θ direction at q"""
    fp = frame_at(im, amb, q, rank_tol=rank_tol)
    xi = amb.xi_field(fp.pos)
    xi_hat = xi / norm(fp.metric, xi)
    return slant_angle(fp, amb, remove_xi(fp.push(declared.Dtheta[0]), xi_hat, fp.metric))


def _norm_derivative(v: np.ndarray, dv: np.ndarray, g: np.ndarray, dg: np.ndarray, floor: float) -> Tuple[float, float]:
    value = norm(g, v)
    if value < floor:
        # one-sided derivative of a norm at its zero
        return value, norm(g, dv)
    return value, float((2.0 * v @ g @ dv + v @ dg @ v) / (2.0 * value))


def theta_jet_gradient(fp: FramedPoint, amb: AmbientStructure, d: Sequence[float], rank_tol: float = None) -> np.ndarray:
    """
    ∂_c θ of X = Jd − g(Jd, ξ̂)ξ̂ along every domain coordinate c.

    θ = atan2(‖FX‖, ‖PX‖) with PX = J G⁻¹ Jᵀ g φX; the derivative is pushed
    forward through the immersion Hessian and the ambient field jets.
    """
    rank_tol = settings.RANK_TOLERANCE if rank_tol is None else rank_tol
    d = np.asarray(d, dtype=float)
    J, g, G = fp.jac, fp.metric, fp.induced_metric
    _, dg_amb = amb.metric_jet(fp.pos)
    phi, dphi_amb = amb.phi_jet(fp.pos)
    xi, dxi_amb = amb.xi_jet(fp.pos)
    G_inv = np.linalg.inv(G)

    V = J @ d
    alpha, beta = V @ g @ xi, xi @ g @ xi
    X = V - (alpha / beta) * xi
    Y = phi @ X
    proj = J @ G_inv @ J.T @ g
    PX = proj @ Y
    FX = Y - PX

    gradient = np.zeros(fp.k)
    for c in range(fp.k):
        u = J[:, c]
        dJ = fp.hess[c].T
        dg = dg_amb @ u
        dphi = dphi_amb @ u
        dxi = dxi_amb @ u

        dV = dJ @ d
        d_alpha = dV @ g @ xi + V @ dg @ xi + V @ g @ dxi
        d_beta = 2.0 * xi @ g @ dxi + xi @ dg @ xi
        dX = dV - (d_alpha / beta - alpha * d_beta / beta ** 2) * xi - (alpha / beta) * dxi
        dY = dphi @ X + phi @ dX

        dG = dJ.T @ g @ J + J.T @ dg @ J + J.T @ g @ dJ
        d_proj = (
            dJ @ G_inv @ J.T @ g
            - J @ G_inv @ dG @ G_inv @ J.T @ g
            + J @ G_inv @ dJ.T @ g
            + J @ G_inv @ J.T @ dg
        )
        dPX = d_proj @ Y + proj @ dY
        dFX = dY - dPX

        a, da = _norm_derivative(FX, dFX, g, dg, rank_tol)
        b, db = _norm_derivative(PX, dPX, g, dg, rank_tol)
        gradient[c] = (b * da - a * db) / (a * a + b * b)
    return gradient


def slant_gradient(
    im: Immersion,
    amb: AmbientStructure,
    declared: DeclaredSplit,
    p: Sequence[float],
    rank_tol: float = None,
    fp: FramedPoint = None,
) -> SlantGradient:
    """
    X(θ) coefficients from the jets at p, cross-checked by central
    differences of theta_at at FD_STEP. A disagreement above
    FD_DISAGREEMENT marks θ as non-smooth at p.
    """
    p = np.asarray(p, dtype=float)
    fp = fp or frame_at(im, amb, p, rank_tol=rank_tol)
    d = np.asarray(declared.Dtheta[0], dtype=float)
    jet = theta_jet_gradient(fp, amb, d, rank_tol)

    step = settings.FD_STEP
    fd = np.zeros(im.k)
    for c in range(im.k):
        offset = np.zeros(im.k)
        offset[c] = step
        fd[c] = (theta_at(im, amb, declared, p + offset, rank_tol) - theta_at(im, amb, declared, p - offset, rank_tol)) / (2 * step)

    unstable = bool(np.max(np.abs(jet - fd)) > settings.FD_DISAGREEMENT)
    if unstable:
        logger.warning(f"⚠️ Slant-function derivative unstable at {p.tolist()} (jet vs finite difference {np.max(np.abs(jet - fd)):.3e})")
    return SlantGradient(jet, fd, unstable)


# ========= Warped-product identity suite =========

@dataclass(eq=False)
class LemmaInputs:
    """Everything the identity suite needs at one point, with the run's tolerances"""
    fp: FramedPoint
    amb: AmbientStructure
    sf: SecondFormData
    pf: PFSplit
    split: DistributionSplit
    warp: WarpPointData
    theta: float
    theta_gradient: SlantGradient
    degenerate_tol: float = field(default_factory=lambda: settings.DEGENERATE_ANGLE_TOLERANCE)
    _shapes: Dict[bytes, ShapeOperator] = field(default_factory=dict, repr=False)

    @property
    def metric(self) -> np.ndarray:
        return self.fp.metric

    @property
    def proper(self) -> bool:
        return math.sin(self.theta) >= self.degenerate_tol and abs(math.cos(self.theta)) >= self.degenerate_tol

    @property
    def sine_vanishes(self) -> bool:
        return math.sin(self.theta) < self.degenerate_tol

    @property
    def anti_invariant(self) -> bool:
        return abs(math.cos(self.theta)) < self.degenerate_tol

    def d_lnf(self, X: np.ndarray) -> float:
        return float(self.warp.dlnf @ self.sf.coords(X))

    def d_theta(self, X: np.ndarray) -> float:
        return self.theta_gradient.along(self.sf.coords(X))

    def eta(self, X: np.ndarray) -> float:
        return float(self.amb.eta_field(self.fp.pos) @ X)

    def shape(self, N: np.ndarray) -> ShapeOperator:
        key = np.round(N, 14).tobytes()
        if key not in self._shapes:
            self._shapes[key] = shape_operator(self.sf, self.fp, self.amb, N)
        return self._shapes[key]


def _span_residual(vectors: Sequence[np.ndarray], columns: np.ndarray, g: np.ndarray, rank_tol: float) -> float:
    basis, _ = orthonormalize(list(columns.T), g, rank_tol)
    return max((norm(g, metric_project(v, basis, g)[1]) for v in vectors), default=0.0)


def prepare_lemma_inputs(
    c: WarpedCandidate,
    amb: AmbientStructure,
    fp: FramedPoint,
    sf: SecondFormData,
    split: DistributionSplit,
    data: WarpPointData,
    theta: float,
    theta_gradient: SlantGradient,
    pf: PFSplit = None,
    tolerances: Dict[str, float] = None,
) -> LemmaInputs:
    """
    Args:
        tolerances: Tolerance classes of the run; missing classes fall back to settings

    Raises:
        NonSasakianAmbientError: ambient not Sasakian at the point
        WarpStructureError: ξ not tangent to the base, or D ⊕ ⟨ξ⟩ / D^θ do
            not span the base / fiber tangent spaces
        SplitDimensionError: split dimensions disagree with the warp declaration
    """
    tol = {**settings.get_tolerances(), **(tolerances or {})}
    require_sasakian(fp, amb, tol['structural'])
    if data.xi_location != XiLocation.BASE:
        raise WarpStructureError(f"xi must be tangent to the base (found {data.xi_location.value})")
    if split.m2 != len(c.fiber_vars) or split.m1 + 1 != len(c.base_vars):
        raise SplitDimensionError("split dimensions do not match the base/fiber declaration")

    g = fp.metric
    fiber_leak = _span_residual(split.Dtheta_basis, fp.jac[:, list(c.fiber_vars)], g, tol['rank'])
    base_leak = _span_residual(split.base_basis, fp.jac[:, list(c.base_vars)], g, tol['rank'])
    if max(fiber_leak, base_leak) > tol['structural']:
        raise WarpStructureError(
            f"D + xi and D^theta must span the base and fiber tangent spaces (leaks {base_leak:.3e}, {fiber_leak:.3e})"
        )
    return LemmaInputs(
        fp=fp, amb=amb, sf=sf, pf=pf or pf_decompose(fp, amb), split=split,
        warp=data, theta=theta, theta_gradient=theta_gradient,
        degenerate_tol=tol['degenerate'],
    )


def lemma_identity_sides(inputs: LemmaInputs, X: np.ndarray, Z: np.ndarray, W: np.ndarray) -> Dict[str, float]:
    """
    Signed LHS − RHS of every mixed identity for base X and fiber Z, W.
    The shape-operator forms are evaluated through A_N, the others through h.
    L6_swapped is the Z↔W form of L6 that closes the L8 chain.
    """
    g = inputs.metric
    h, P, F = inputs.sf.h_of, inputs.pf.P_of, inputs.pf.F_of
    cos2 = math.cos(inputs.theta) ** 2
    sin2 = math.sin(inputs.theta) ** 2
    PX, PZ, PW = P(X), P(Z), P(W)
    FW, FPW, FPZ = F(W), F(PW), F(PZ)
    x_lnf = inputs.d_lnf(X)
    px_lnf = inputs.d_lnf(PX)
    eta_x = inputs.eta(X)
    gZW, gZPW, gPZW = inner(g, Z, W), inner(g, Z, PW), inner(g, PZ, W)

    A_FW = inputs.shape(FW)
    A_FPW = inputs.shape(FPW)
    A_FPZ = inputs.shape(FPZ)

    return {
        'L2':
            inner(g, h(X, W), FPZ) - inner(g, h(X, PZ), FW)
            - math.sin(2 * inputs.theta) * inputs.d_theta(X) * gZW,
        'L3i': gPZW + inputs.d_lnf(inputs.split.xi_dir) * gZW,
        'L3iii': inner(g, h(X, Z), FW) - (x_lnf * gPZW - px_lnf * gZW - eta_x * gZW),
        'L4': inner(g, h(PX, Z), FW) - (x_lnf * gZW - eta_x * gZPW - px_lnf * gZPW),
        'L5': inner(g, h(X, PZ), FW) - (px_lnf * gZPW - eta_x * gPZW - cos2 * x_lnf * gZW),
        'L6': inner(g, h(X, Z), FPW) - (cos2 * x_lnf * gZW - px_lnf * gZPW - eta_x * gZPW),
        'L6_swapped': inner(g, h(X, W), FPZ) - (cos2 * x_lnf * gZW + px_lnf * gZPW + eta_x * gZPW),
        'L7': inner(g, A_FW.A_of(PX), Z) - inner(g, A_FPW.A_of(X), Z) - sin2 * x_lnf * gZW,
        'L8': inner(g, A_FPZ.A_of(X), W) - inner(g, A_FW.A_of(X), PZ) - 2 * cos2 * x_lnf * gZW,
    }


def theorem4_check(inputs: LemmaInputs, X: np.ndarray) -> float:
    """
    |X(ln f) − tan θ · X(θ)|

    Raises:
        DegenerateAngleError: θ within tolerance of 0 or π/2
    """
    if not inputs.proper:
        raise DegenerateAngleError(f"theta = {inputs.theta:.9f} is not proper")
    return abs(inputs.d_lnf(X) - math.tan(inputs.theta) * inputs.d_theta(X))


def theorem5_forward(inputs: LemmaInputs, X: np.ndarray, W: np.ndarray) -> Dict[str, float]:
    """
    ‖A_{FW}φX − A_{FPW}X − sin²θ X(ln f) W‖ and max |Z(ln f)| over the fiber basis.

    Raises:
        DegenerateAngleError: sin θ below tolerance
    """
    if inputs.sine_vanishes:
        raise DegenerateAngleError("shape-warp characterization needs sin(theta) > 0")
    g = inputs.metric
    P, F = inputs.pf.P_of, inputs.pf.F_of
    vector = (
        inputs.shape(F(W)).A_of(P(X))
        - inputs.shape(F(P(W))).A_of(X)
        - math.sin(inputs.theta) ** 2 * inputs.d_lnf(X) * W
    )
    return {
        'shape_warp_characterization': norm(g, vector),
        'fiber_warp_gradient': max(abs(inputs.d_lnf(Z)) for Z in inputs.split.Dtheta_basis),
    }


def corollary2_check(inputs: LemmaInputs, X: np.ndarray, Z: np.ndarray) -> Tuple[float, float]:
    """
    Residuals of A_{φZ}X = −(η(X) + φX(ln f))Z, the form forced by
    ∇̃_X ξ = −φX, and of the sign-flipped form A_{φZ}X = (η(X) − φX(ln f))Z.

    Raises:
        DegenerateAngleError: θ ≠ π/2 at the point
    """
    if not inputs.anti_invariant:
        raise DegenerateAngleError("anti-invariant shape identity needs theta = pi/2")
    g = inputs.metric
    phi_z = inputs.pf.phi @ Z
    A_X = inputs.shape(inputs.fp.normal(phi_z)).A_of(X)
    eta_x = inputs.eta(X)
    px_lnf = inputs.d_lnf(inputs.pf.P_of(X))
    pinned = norm(g, A_X + (eta_x + px_lnf) * Z)
    printed = norm(g, A_X - (eta_x - px_lnf) * Z)
    return pinned, printed


LEMMA_LABELS = {
    'L2': 'slant_gradient_coupling',
    'L3i': 'fiber_skew_warp',
    'L3ii': 'base_normal_orthogonality',
    'L3iii': 'mixed_normal_warp',
    'L4': 'phi_base_mixed_warp',
    'L5': 'P_fiber_mixed_warp',
    'L6': 'FP_fiber_mixed_warp',
    'L7': 'shape_difference_sin',
    'L8': 'shape_difference_cos',
    'T4': 'warp_slant_gradient',
    'T5': 'shape_warp_characterization',
    'C2': 'anti_invariant_shape',
}
LEMMA_KEYS = tuple(LEMMA_LABELS)

PROPER_ONLY = frozenset({'L2', 'L7', 'L8', 'T4'})
NONZERO_SINE_ONLY = frozenset({'T5'})
ANTI_INVARIANT_ONLY = frozenset({'C2'})


@dataclass
class LemmaReport:
    """Per-identity residuals (or refusal markers) at one point plus metadata"""
    residuals: Dict[str, Residual]
    observables: Dict[str, float]
    metadata: Dict[str, Any]

    @property
    def refused(self) -> List[str]:
        return [key for key, value in self.residuals.items() if isinstance(value, str)]

    @property
    def labels(self) -> Dict[str, str]:
        return {key: LEMMA_LABELS[key] for key in self.residuals}

    def numeric(self) -> Dict[str, float]:
        return {key: value for key, value in self.residuals.items() if not isinstance(value, str)}

    def to_dict(self) -> Dict[str, Any]:
        return {
            'residuals': self.residuals,
            'labels': self.labels,
            'observables': self.observables,
            'metadata': self.metadata,
        }


def lemma_suite(inputs: LemmaInputs, selector: Optional[Iterable[str]] = None) -> LemmaReport:
    """
    Every selected identity evaluated on the orthonormal bases of D ⊕ ⟨ξ⟩
    and D^θ; reported value is the max |LHS − RHS| over basis combinations.
    Identities whose hypotheses fail at θ (judged with inputs.degenerate_tol)
    are reported as refusal markers.
    """
    selected = set(LEMMA_KEYS if selector is None else selector)
    unknown = selected - set(LEMMA_KEYS)
    if unknown:
        raise ValueError(f"unknown identities: {sorted(unknown)} (known: {', '.join(LEMMA_KEYS)})")

    theta = inputs.theta
    g = inputs.metric
    base = inputs.split.base_basis
    fiber = inputs.split.Dtheta_basis

    worst: Dict[str, float] = {}
    chain_sin = chain_cos = 0.0
    for X in base:
        for Z in fiber:
            for W in fiber:
                sides = lemma_identity_sides(inputs, X, Z, W)
                for key, value in sides.items():
                    worst[key] = max(worst.get(key, 0.0), abs(value))
                chain_sin = max(chain_sin, abs(sides['L7'] - (sides['L4'] - sides['L6'])))
                chain_cos = max(chain_cos, abs(sides['L8'] - (sides['L6_swapped'] - sides['L5'])))

    worst['L3ii'] = max(
        abs(inner(g, inputs.sf.h_of(X, Y), inputs.pf.F_of(Z))) for X in base for Y in base for Z in fiber
    )

    observables: Dict[str, float] = {
        'chain_sin': chain_sin,
        'chain_cos': chain_cos,
        'xi_lnf': abs(inputs.d_lnf(inputs.split.xi_dir)),
        'L6_swapped': worst.pop('L6_swapped'),
    }

    if 'T4' in selected and inputs.proper:
        worst['T4'] = max(theorem4_check(inputs, X) for X in base)
    if 'T5' in selected and not inputs.sine_vanishes:
        results = [theorem5_forward(inputs, X, W) for X in base for W in fiber]
        for part in ('shape_warp_characterization', 'fiber_warp_gradient'):
            observables[part] = max(r[part] for r in results)
        worst['T5'] = max(observables['shape_warp_characterization'], observables['fiber_warp_gradient'])
    if 'C2' in selected and inputs.anti_invariant:
        pairs = [corollary2_check(inputs, X, Z) for X in base for Z in fiber]
        worst['C2'] = max(pinned for pinned, _ in pairs)
        observables['anti_invariant_shape_printed'] = max(printed for _, printed in pairs)

    residuals: Dict[str, Residual] = {}
    for key in LEMMA_KEYS:
        if key not in selected:
            continue
        if key in PROPER_ONLY and not inputs.proper:
            residuals[key] = REFUSED_DEGENERATE
        elif key in NONZERO_SINE_ONLY and inputs.sine_vanishes:
            residuals[key] = REFUSED_DEGENERATE
        elif key in ANTI_INVARIANT_ONLY and not inputs.anti_invariant:
            residuals[key] = REFUSED_NOT_ANTI_INVARIANT
        else:
            residuals[key] = worst[key]

    metadata = {
        'point': inputs.fp.p.tolist(),
        'theta': theta,
        'degenerate_tolerance': inputs.degenerate_tol,
        'X_lnf': [inputs.d_lnf(X) for X in base],
        'X_theta': [inputs.d_theta(X) for X in base],
        'theta_derivative_unstable': inputs.theta_gradient.unstable,
    }
    return LemmaReport(residuals=residuals, observables=observables, metadata=metadata)


__all__ = [
    'WarpedCandidate',
    'WarpPointData',
    'WarpReport',
    'XiLocation',
    'LemmaInputs',
    'LemmaReport',
    'SlantGradient',
    'WarpStructureError',
    'DegenerateAngleError',
    'REFUSED_DEGENERATE',
    'REFUSED_NOT_ANTI_INVARIANT',
    'LEMMA_KEYS',
    'LEMMA_LABELS',
    'warp_data_at',
    'detect_warp',
    'bishop_oneill_check',
    'theta_at',
    'theta_jet_gradient',
    'slant_gradient',
    'prepare_lemma_inputs',
    'lemma_identity_sides',
    'lemma_suite',
    'theorem4_check',
    'theorem5_forward',
    'corollary2_check',
]
