"""
Parametrized immersions χ: U ⊂ R^k → R^(2n+1), their frames and the
built-in example catalog.
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import settings
from numjet.expr import ExprNode, parse_expr, render
from numjet.jet import JetDomainError, eval_jets, eval_value
from numjet.linalg import check_spd, complete_basis, norm, orthonormalize
from utils.catalog_registry import catalog_registry

from .ambient import AmbientStructure, get_ambient

logger = logging.getLogger(__name__)


class ImmersionSpecError(ValueError):
    """Inline or catalog immersion spec is inconsistent"""


class ExcludedPointError(ValueError):
    """Point lies on the zero set of an exclusion predicate"""


class OutsideDomainError(ValueError):
    """Point lies outside the domain box"""


class RankDeficientJacobianError(ValueError):
    """Jacobian rank below the domain dimension"""


class SamplingError(RuntimeError):
    """Rejection sampling could not find enough admissible points"""


# ========= Immersion =========

@dataclass(frozen=True)
class Immersion:
    """Component expressions over k named variables, with domain box and exclusion predicates"""
    name: str
    variables: Tuple[str, ...]
    component_texts: Tuple[str, ...]
    components: Tuple[ExprNode, ...]
    domain_box: Tuple[Tuple[float, float], ...]
    exclusion_texts: Tuple[str, ...] = ()
    exclusions: Tuple[ExprNode, ...] = ()
    degeneracy_texts: Tuple[str, ...] = ()
    degeneracies: Tuple[ExprNode, ...] = ()

    @property
    def k(self) -> int:
        return len(self.variables)

    @property
    def codomain_dim(self) -> int:
        return len(self.components)

    @classmethod
    def from_spec(cls, spec: Dict[str, Any], name: str = "inline") -> "Immersion":
        """
        Build from the JSON immersion schema
        {"variables", "components", "domain", "exclusions", "degeneracies"}.

        Raises:
            ImmersionSpecError: domain box does not match the variables
            ExpressionSyntaxError: a component or predicate fails to parse
        """
        variables = tuple(spec["variables"])
        domain = tuple((float(lo), float(hi)) for lo, hi in spec["domain"])
        if len(domain) != len(variables):
            raise ImmersionSpecError(f"domain has {len(domain)} intervals for {len(variables)} variables")
        for (lo, hi), var in zip(domain, variables):
            if not lo < hi:
                raise ImmersionSpecError(f"empty interval [{lo}, {hi}] for '{var}'")

        parse = lambda text: parse_expr(text, variables)
        exclusions = tuple(spec.get("exclusions", []))
        degeneracies = tuple(spec.get("degeneracies", []))
        return cls(
            name=name,
            variables=variables,
            component_texts=tuple(spec["components"]),
            components=tuple(parse(text) for text in spec["components"]),
            domain_box=domain,
            exclusion_texts=exclusions,
            exclusions=tuple(parse(text) for text in exclusions),
            degeneracy_texts=degeneracies,
            degeneracies=tuple(parse(text) for text in degeneracies),
        )

    def variable_index(self, name: str) -> int:
        try:
            return self.variables.index(name)
        except ValueError:
            raise ImmersionSpecError(f"unknown variable '{name}'; variables are {list(self.variables)}") from None

    def jets(self, p: Sequence[float]) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """position (N,), Jacobian (N, k) and second derivatives (N, k, k)"""
        return eval_jets(list(self.components), p)

    def position(self, p: Sequence[float]) -> np.ndarray:
        return np.array([eval_value(c, p) for c in self.components])

    def exclusion_values(self, p: Sequence[float]) -> List[float]:
        return [eval_value(e, p) for e in self.exclusions]

    def is_excluded(self, p: Sequence[float], margin: float = 0.0) -> bool:
        threshold = max(margin, settings.EXCLUSION_ZERO)
        try:
            return any(abs(value) <= threshold for value in self.exclusion_values(p))
        except JetDomainError:
            return True

    def in_domain(self, p: Sequence[float], slack: float = 0.0) -> bool:
        return all(lo - slack <= x <= hi + slack for x, (lo, hi) in zip(p, self.domain_box))


# ========= Frames =========

@dataclass(frozen=True, eq=False)
class FramedPoint:
    """An immersion point with its Jacobian, orthonormal frames and induced metric"""
    p: np.ndarray
    pos: np.ndarray
    jac: np.ndarray
    hess: np.ndarray
    tan_frame: Tuple[np.ndarray, ...]
    nor_frame: Tuple[np.ndarray, ...]
    metric: np.ndarray
    induced_metric: np.ndarray

    @property
    def k(self) -> int:
        return self.jac.shape[1]

    @property
    def dim(self) -> int:
        return self.jac.shape[0]

    @property
    def codim(self) -> int:
        return len(self.nor_frame)

    def push(self, coefficients: Sequence[float]) -> np.ndarray:
        """Ambient vector of a domain-coordinate direction"""
        return self.jac @ np.asarray(coefficients, dtype=float)

    def coordinate_field(self, i: int) -> np.ndarray:
        return self.jac[:, i]

    def tangent_basis(self) -> np.ndarray:
        return np.column_stack(self.tan_frame)

    def normal_basis(self) -> np.ndarray:
        if not self.nor_frame:
            return np.zeros((self.dim, 0))
        return np.column_stack(self.nor_frame)

    def tangential(self, v: np.ndarray) -> np.ndarray:
        T = self.tangent_basis()
        return T @ (T.T @ (self.metric @ v))

    def normal(self, v: np.ndarray) -> np.ndarray:
        return v - self.tangential(v)


def frame_at(
    im: Immersion,
    amb: AmbientStructure,
    p: Sequence[float],
    rank_tol: float = None,
    domain_slack: float = None,
) -> FramedPoint:
    """
    Frames of the immersion at a domain point.

    Points up to domain_slack outside the box are accepted so that
    finite-difference stencils around boundary samples can be framed.

    Raises:
        OutsideDomainError: p lies outside the domain box by more than domain_slack
        ExcludedPointError: p sits on an exclusion predicate's zero set
        RankDeficientJacobianError: rank of the Jacobian is below k
    """
    p = np.asarray(p, dtype=float)
    if p.shape[0] != im.k:
        raise ValueError(f"point has {p.shape[0]} coordinates, immersion has {im.k} variables")
    if im.codomain_dim != amb.dim:
        raise ImmersionSpecError(f"immersion has {im.codomain_dim} components, ambient dimension is {amb.dim}")
    slack = settings.DOMAIN_SLACK if domain_slack is None else domain_slack
    if not im.in_domain(p, slack):
        raise OutsideDomainError(f"point {p.tolist()} is outside the domain box {[list(b) for b in im.domain_box]}")
    if im.is_excluded(p):
        raise ExcludedPointError(f"point {p.tolist()} is excluded by {list(im.exclusion_texts)}")

    pos, jac, second = im.jets(p)
    g = amb.metric_field(pos)
    check_spd(g)

    rank_tol = settings.RANK_TOLERANCE if rank_tol is None else rank_tol
    tangent, rank = orthonormalize(list(jac.T), g, rank_tol)
    if rank < im.k:
        raise RankDeficientJacobianError(f"Jacobian rank {rank} < {im.k} at {p.tolist()}")
    normal = complete_basis(tangent, g, rank_tol)

    return FramedPoint(
        p=p,
        pos=pos,
        jac=jac,
        hess=second.transpose(1, 2, 0),
        tan_frame=tuple(tangent),
        nor_frame=tuple(normal),
        metric=g,
        induced_metric=jac.T @ g @ jac,
    )


def induced_metric(fp: FramedPoint) -> np.ndarray:
    """Gram matrix Jᵀ g J of the coordinate fields"""
    return fp.induced_metric


def _gram_derivative(J: np.ndarray, H: np.ndarray, g: np.ndarray, dg: np.ndarray) -> np.ndarray:
    # H[c, i] is ∂_c ∂_i χ
    first = np.einsum('cia,ab,bj->ijc', H, g, J)
    # metric derivative along ∂_c χ
    dg_along = np.einsum('abm,mc->abc', dg, J)
    third = np.einsum('ai,abc,bj->ijc', J, dg_along, J)
    return first + first.transpose(1, 0, 2) + third


def induced_metric_derivative(fp: FramedPoint, amb: AmbientStructure) -> np.ndarray:
    """dG[i, j, c] = ∂_c G_ij along domain coordinate c"""
    _, dg = amb.metric_jet(fp.pos)
    return _gram_derivative(fp.jac, fp.hess, fp.metric, dg)


def gram_and_derivative(im: Immersion, amb: AmbientStructure, p: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """Induced metric and its coordinate derivatives without building frames"""
    pos, J, second = im.jets(p)
    g, dg = amb.metric_jet(pos)
    return J.T @ g @ J, _gram_derivative(J, second.transpose(1, 2, 0), g, dg)


# ========= ξ position =========

class XiPosition(str, Enum):
    TANGENT = "tangent"
    NORMAL = "normal"
    MIXED = "mixed"


@dataclass
class XiTangency:
    tangent_norm: float
    normal_norm: float
    verdict: XiPosition

    def to_dict(self) -> Dict[str, Any]:
        return {
            'tangent_norm': self.tangent_norm,
            'normal_norm': self.normal_norm,
            'verdict': self.verdict.value,
        }


def xi_tangency(fp: FramedPoint, amb: AmbientStructure, tol: float = None) -> XiTangency:
    tol = settings.XI_ALIGNMENT_TOLERANCE if tol is None else tol
    xi = amb.xi_field(fp.pos)
    tangent_part = fp.tangential(xi)
    tangent_norm = norm(fp.metric, tangent_part)
    normal_norm = norm(fp.metric, xi - tangent_part)
    if normal_norm < tol:
        verdict = XiPosition.TANGENT
    elif tangent_norm < tol:
        verdict = XiPosition.NORMAL
    else:
        verdict = XiPosition.MIXED
    return XiTangency(tangent_norm, normal_norm, verdict)


# ========= Sampling =========

def sample_points(
    im: Immersion,
    count: int,
    seed: int,
    margin: float = None,
    max_attempts: int = None,
) -> np.ndarray:
    """
    Uniform points in the domain box, rejected within `margin` of any
    exclusion predicate's zero set. Deterministic for a given seed.
    """
    margin = settings.EXCLUSION_MARGIN if margin is None else margin
    max_attempts = settings.MAX_SAMPLING_ATTEMPTS if max_attempts is None else max_attempts
    rng = np.random.default_rng(seed)
    lows = np.array([lo for lo, _ in im.domain_box])
    highs = np.array([hi for _, hi in im.domain_box])

    points = []
    for index in range(count):
        for _ in range(max_attempts):
            candidate = rng.uniform(lows, highs)
            if not im.is_excluded(candidate, margin):
                points.append(candidate)
                break
        else:
            raise SamplingError(f"no admissible point found for sample {index} after {max_attempts} attempts")
    return np.array(points).reshape(count, im.k)


def _grid(domain_box: Tuple[Tuple[float, float], ...]) -> Iterator[Tuple[float, ...]]:
    axes = [(lo, 0.5 * (lo + hi), hi) for lo, hi in domain_box]
    return itertools.product(*axes)


def unguarded_degeneracies(im: Immersion, margin: float = None) -> List[str]:
    """
    Degeneracy predicates whose zero set meets the domain box but which are
    not listed among the exclusions. The zero set is detected by a sign change
    or a small value on a three-point-per-axis grid.
    """
    margin = settings.EXCLUSION_MARGIN if margin is None else margin
    guarded = {render(node) for node in im.exclusions}
    unguarded = []
    for text, node in zip(im.degeneracy_texts, im.degeneracies):
        if render(node) in guarded:
            continue
        values = []
        for point in _grid(im.domain_box):
            try:
                values.append(eval_value(node, point))
            except JetDomainError:
                continue
        if not values:
            continue
        values = np.array(values)
        if np.min(np.abs(values)) < margin or (values.min() < 0.0 < values.max()):
            logger.warning(f"⚠️ Degeneracy '{text}' vanishes inside the domain box of {im.name}")
            unguarded.append(text)
    return unguarded


# ========= Declarations and catalog =========

@dataclass(frozen=True)
class DeclaredSplit:
    """D and D^θ as domain-coordinate direction vectors"""
    D: Tuple[Tuple[float, ...], ...]
    Dtheta: Tuple[Tuple[float, ...], ...]

    @classmethod
    def from_spec(cls, spec: Dict[str, Any], k: int) -> "DeclaredSplit":
        D = tuple(tuple(float(x) for x in v) for v in spec.get("D", []))
        Dtheta = tuple(tuple(float(x) for x in v) for v in spec.get("Dtheta", []))
        for v in D + Dtheta:
            if len(v) != k:
                raise ImmersionSpecError(f"split vector {list(v)} needs {k} entries")
        return cls(D, Dtheta)

    @property
    def m1(self) -> int:
        return len(self.D)

    @property
    def m2(self) -> int:
        return len(self.Dtheta)


@dataclass(frozen=True)
class WarpDeclaration:
    """Base/fiber variable indices and the base point where f := 1"""
    base_vars: Tuple[int, ...]
    fiber_vars: Tuple[int, ...]
    reference_point: Tuple[float, ...]

    @classmethod
    def from_spec(cls, spec: Dict[str, Any], im: Immersion) -> "WarpDeclaration":
        base = tuple(im.variable_index(v) for v in spec["base_vars"])
        fiber = tuple(im.variable_index(v) for v in spec["fiber_vars"])
        if set(base) & set(fiber):
            raise ImmersionSpecError("base and fiber variables overlap")
        if set(base) | set(fiber) != set(range(im.k)):
            raise ImmersionSpecError("base and fiber variables must cover every variable")
        reference = tuple(float(x) for x in spec["reference_point"])
        if len(reference) != len(base):
            raise ImmersionSpecError(f"reference_point needs {len(base)} entries, one per base variable")
        return cls(base, fiber, reference)


@dataclass
class CatalogEntry:
    name: str
    description: str
    ambient: AmbientStructure
    immersion: Immersion
    split: Optional[DeclaredSplit] = None
    warp: Optional[WarpDeclaration] = None
    suites: List[str] = field(default_factory=list)

    @property
    def components(self) -> Tuple[str, ...]:
        return self.immersion.component_texts

    @property
    def exclusions(self) -> Tuple[str, ...]:
        return self.immersion.exclusion_texts

    def __iter__(self):
        return iter((self.ambient, self.immersion, self.split, self.warp))


def build_entry(raw: Dict[str, Any]) -> CatalogEntry:
    """Assemble structures from a schema-valid entry dictionary"""
    ambient = get_ambient(raw["ambient"]["name"], raw["ambient"]["n"])
    immersion = Immersion.from_spec(raw["immersion"], name=raw.get("name", "inline"))
    split = DeclaredSplit.from_spec(raw["split"], immersion.k) if raw.get("split") else None
    warp = WarpDeclaration.from_spec(raw["warp"], immersion) if raw.get("warp") else None
    return CatalogEntry(
        name=raw.get("name", "inline"),
        description=raw.get("description", ""),
        ambient=ambient,
        immersion=immersion,
        split=split,
        warp=warp,
        suites=list(raw.get("suites", [])),
    )


def catalog(name: str) -> CatalogEntry:
    """
    Named built-in instance.

    Raises:
        UnknownCatalogEntryError: no entry under that name (with suggestions)
    """
    return build_entry(catalog_registry.get_entry(name))


def catalog_list(name_filter: str = "") -> List[Tuple[str, str]]:
    return catalog_registry.list_entries(name_filter)


__all__ = [
    'Immersion',
    'FramedPoint',
    'XiPosition',
    'XiTangency',
    'DeclaredSplit',
    'WarpDeclaration',
    'CatalogEntry',
    'ImmersionSpecError',
    'ExcludedPointError',
    'OutsideDomainError',
    'RankDeficientJacobianError',
    'SamplingError',
    'frame_at',
    'induced_metric',
    'induced_metric_derivative',
    'gram_and_derivative',
    'xi_tangency',
    'sample_points',
    'unguarded_degeneracies',
    'build_entry',
    'catalog',
    'catalog_list',
]
