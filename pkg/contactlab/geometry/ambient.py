"""
Almost contact metric structures (φ, ξ, η, g) on R^(2n+1).

Coordinates are ordered (x1, y1, ..., xn, yn, z). Every tensor entry is an
ExprNode over those coordinates, so values and first derivatives come from
jets. φ acts on column vectors: (φX)^k = φ[k, j] X^j.
"""

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from config.settings import settings
from numjet.expr import ExprNode, parse_expr
from numjet.jet import eval_jets
from numjet.linalg import MetricNotPositiveDefiniteError, check_spd, norm

logger = logging.getLogger(__name__)

# value and Jacobian (jac[k, c] = ∂_c V^k) of a vector field at an ambient point
VectorField = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]


class AmbientConstructionError(RuntimeError):
    """A built-in structure failed its own axiom self-check"""


class UnknownAmbientError(LookupError):
    """No ambient structure registered under the requested name"""


def coordinate_names(n: int) -> Tuple[str, ...]:
    names: List[str] = []
    for i in range(1, n + 1):
        names.extend([f"x{i}", f"y{i}"])
    names.append("z")
    return tuple(names)


@dataclass(frozen=True)
class AmbientStructure:
    """The quadruple (φ, ξ, η, g) as jet-evaluable tensor fields"""
    name: str
    n: int
    coordinates: Tuple[str, ...]
    phi_nodes: Tuple[Tuple[ExprNode, ...], ...]
    xi_nodes: Tuple[ExprNode, ...]
    eta_nodes: Tuple[ExprNode, ...]
    metric_nodes: Tuple[Tuple[ExprNode, ...], ...]
    sasakian: bool = field(default=False, compare=False)

    @property
    def dim(self) -> int:
        return 2 * self.n + 1

    def _matrix_jet(self, rows: Tuple[Tuple[ExprNode, ...], ...], p: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        N = self.dim
        flat = [node for row in rows for node in row]
        values, grads, _ = eval_jets(flat, p)
        return values.reshape(N, N), grads.reshape(N, N, N)

    def _vector_jet(self, nodes: Tuple[ExprNode, ...], p: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        values, grads, _ = eval_jets(list(nodes), p)
        return values, grads

    # ========= Pointwise values =========

    def phi_field(self, p: Sequence[float]) -> np.ndarray:
        return self.phi_jet(p)[0]

    def xi_field(self, p: Sequence[float]) -> np.ndarray:
        return self.xi_jet(p)[0]

    def eta_field(self, p: Sequence[float]) -> np.ndarray:
        return self.eta_jet(p)[0]

    def metric_field(self, p: Sequence[float]) -> np.ndarray:
        return self.metric_jet(p)[0]

    # ========= Values with first derivatives =========

    def phi_jet(self, p: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
        """φ and dφ with dφ[k, j, c] = ∂_c φ^k_j"""
        return self._matrix_jet(self.phi_nodes, np.asarray(p, dtype=float))

    def xi_jet(self, p: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
        return self._vector_jet(self.xi_nodes, np.asarray(p, dtype=float))

    def eta_jet(self, p: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
        return self._vector_jet(self.eta_nodes, np.asarray(p, dtype=float))

    def metric_jet(self, p: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
        """g and dg with dg[a, b, c] = ∂_c g_ab"""
        return self._matrix_jet(self.metric_nodes, np.asarray(p, dtype=float))


def structure_from_text(
    name: str,
    n: int,
    phi: Sequence[Sequence[str]],
    xi: Sequence[str],
    eta: Sequence[str],
    metric: Sequence[Sequence[str]],
    sasakian: bool = False,
) -> AmbientStructure:
    """Parse tensor entries written over the coordinates (x1, y1, ..., z)"""
    names = coordinate_names(n)
    N = len(names)
    if len(phi) != N or any(len(row) != N for row in phi):
        raise ValueError(f"phi must be {N}x{N}")
    if len(metric) != N or any(len(row) != N for row in metric):
        raise ValueError(f"metric must be {N}x{N}")
    if len(xi) != N or len(eta) != N:
        raise ValueError(f"xi and eta need {N} entries")
    parse = lambda text: parse_expr(text, names)
    return AmbientStructure(
        name=name,
        n=n,
        coordinates=names,
        phi_nodes=tuple(tuple(parse(t) for t in row) for row in phi),
        xi_nodes=tuple(parse(t) for t in xi),
        eta_nodes=tuple(parse(t) for t in eta),
        metric_nodes=tuple(tuple(parse(t) for t in row) for row in metric),
        sasakian=sasakian,
    )


# ========= Registry =========

AMBIENT_REGISTRY: Dict[str, Callable[[int], AmbientStructure]] = {}


def register_ambient(name: str):
    """Decorator to register structure constructors by config name"""
    def decorator(constructor):
        AMBIENT_REGISTRY[name] = constructor
        return constructor
    return decorator


def get_ambient(name: str, n: int) -> AmbientStructure:
    if name not in AMBIENT_REGISTRY:
        raise UnknownAmbientError(f"Unknown ambient '{name}'; known: {sorted(AMBIENT_REGISTRY)}")
    return AMBIENT_REGISTRY[name](n)


# ========= Constructors =========

@register_ambient("euclidean_acm")
@lru_cache(maxsize=None)
def make_euclidean_acm(n: int) -> AmbientStructure:
    """φ(∂x_i) = −∂y_i, φ(∂y_i) = ∂x_i, φ(∂z) = 0, ξ = ∂z, η = dz, flat metric"""
    if n < 1:
        raise ValueError("n must be at least 1")
    N = 2 * n + 1
    phi = [["0"] * N for _ in range(N)]
    for i in range(n):
        x, y = 2 * i, 2 * i + 1
        phi[y][x] = "-1"
        phi[x][y] = "1"
    unit_z = ["0"] * (N - 1) + ["1"]
    metric = [["1" if a == b else "0" for b in range(N)] for a in range(N)]
    return structure_from_text("euclidean_acm", n, phi, unit_z, unit_z, metric)


@register_ambient("standard_sasakian")
@lru_cache(maxsize=None)
def make_standard_sasakian(n: int) -> AmbientStructure:
    """
    Standard Sasakian structure on R^(2n+1).

    η = ½(dz − Σ y_i dx_i), ξ = 2∂z, g = η⊗η + ¼Σ(dx_i² + dy_i²),
    φ(∂x_i) = −∂y_i, φ(∂y_i) = ∂x_i + y_i ∂z, φ(∂z) = 0.
    With this sign of φ the structure satisfies ∇̃_X ξ = −φX; the self-check
    below fails loudly if that ever stops being true.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    N = 2 * n + 1
    phi = [["0"] * N for _ in range(N)]
    eta = ["0"] * N
    for i in range(n):
        x, y = 2 * i, 2 * i + 1
        phi[y][x] = "-1"
        phi[x][y] = "1"
        phi[N - 1][y] = f"y{i + 1}"
        eta[x] = f"(-0.5*y{i + 1})"
    eta[N - 1] = "0.5"
    xi = ["0"] * (N - 1) + ["2"]

    metric = [["0"] * N for _ in range(N)]
    for a in range(N):
        for b in range(N):
            terms = []
            if eta[a] != "0" and eta[b] != "0":
                terms.append(f"{eta[a]}*{eta[b]}")
            if a == b and a != N - 1:
                terms.append("0.25")
            metric[a][b] = " + ".join(terms) if terms else "0"

    structure = structure_from_text("standard_sasakian", n, phi, xi, eta, metric, sasakian=True)
    _self_check(structure)
    return structure


def _self_check(structure: AmbientStructure, samples: int = 5, seed: int = 2024):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        p = rng.uniform(-1.0, 1.0, structure.dim)
        worst = max(worst, check_almost_contact(structure, p).max_residual(), sasakian_defect(structure, p))
    if worst >= settings.SELF_CHECK_TOLERANCE:
        raise AmbientConstructionError(
            f"{structure.name}({structure.n}) fails its axioms with residual {worst:.3e}"
        )
    logger.info(f"✅ {structure.name}({structure.n}) self-check passed (max residual {worst:.2e})")


# ========= Axiom checks =========

@dataclass
class AlmostContactResiduals:
    """Max-norm residuals of the almost contact metric axioms at a point"""
    phi_squared: float
    eta_xi: float
    eta_phi: float
    phi_xi: float
    compatibility: float
    skew: float
    eta_metric: float

    def max_residual(self) -> float:
        return max(self.to_dict().values())

    def to_dict(self) -> Dict[str, float]:
        return {
            'phi_squared': self.phi_squared,
            'eta_xi': self.eta_xi,
            'eta_phi': self.eta_phi,
            'phi_xi': self.phi_xi,
            'compatibility': self.compatibility,
            'skew': self.skew,
            'eta_metric': self.eta_metric,
        }


def check_almost_contact(s: AmbientStructure, p: Sequence[float]) -> AlmostContactResiduals:
    """
    Residuals of φ² = −I + η⊗ξ, η(ξ) = 1, η∘φ = 0, φξ = 0 and
    g(φX, φY) = g(X, Y) − η(X)η(Y) on the coordinate basis.

    Raises:
        MetricNotPositiveDefiniteError: g is not SPD at p
    """
    phi, xi, eta, g = s.phi_field(p), s.xi_field(p), s.eta_field(p), s.metric_field(p)
    check_spd(g)
    N = s.dim
    return AlmostContactResiduals(
        phi_squared=float(np.max(np.abs(phi @ phi + np.eye(N) - np.outer(xi, eta)))),
        eta_xi=float(abs(eta @ xi - 1.0)),
        eta_phi=float(np.max(np.abs(eta @ phi))),
        phi_xi=float(np.max(np.abs(phi @ xi))),
        compatibility=float(np.max(np.abs(phi.T @ g @ phi - g + np.outer(eta, eta)))),
        skew=float(np.max(np.abs(g @ phi + (g @ phi).T))),
        eta_metric=float(np.max(np.abs(eta - g @ xi))),
    )


# ========= Connection =========

@dataclass
class ChristoffelData:
    """Γ^k_ij at a point, stored as gamma[k, i, j]"""
    gamma: np.ndarray

    @property
    def symmetry_defect(self) -> float:
        return float(np.max(np.abs(self.gamma - self.gamma.transpose(0, 2, 1))))

    def contract(self, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Γ^k_ij X^i Y^j"""
        return np.einsum('kij,i,j->k', self.gamma, X, Y)


def christoffel_from_metric(g: np.ndarray, dg: np.ndarray) -> ChristoffelData:
    try:
        ginv = np.linalg.inv(g)
    except np.linalg.LinAlgError:
        raise MetricNotPositiveDefiniteError("singular metric") from None
    lowered = (
        np.einsum('jli->lij', dg)
        + np.einsum('ilj->lij', dg)
        - np.einsum('ijl->lij', dg)
    )
    return ChristoffelData(0.5 * np.einsum('kl,lij->kij', ginv, lowered))


def christoffel(s: AmbientStructure, p: Sequence[float]) -> ChristoffelData:
    """Levi-Civita symbols Γ^k_ij = ½ g^kl (∂_i g_jl + ∂_j g_il − ∂_l g_ij)"""
    g, dg = s.metric_jet(p)
    return christoffel_from_metric(g, dg)


def metricity_defect(s: AmbientStructure, p: Sequence[float]) -> float:
    """max |∂_c g_ab − Γ^l_ca g_lb − Γ^l_cb g_al|"""
    g, dg = s.metric_jet(p)
    gamma = christoffel_from_metric(g, dg).gamma
    covariant = (
        dg.transpose(2, 0, 1)
        - np.einsum('lca,lb->cab', gamma, g)
        - np.einsum('lcb,al->cab', gamma, g)
    )
    return float(np.max(np.abs(covariant)))


# ========= Vector fields =========

def constant_field(v: Sequence[float]) -> VectorField:
    v = np.asarray(v, dtype=float)
    return lambda q: (v, np.zeros((v.shape[0], v.shape[0])))


def expression_field(nodes: Sequence[ExprNode]) -> VectorField:
    """Vector field whose components are expressions over the ambient coordinates"""
    def evaluate(q: np.ndarray):
        values, grads, _ = eval_jets(list(nodes), q)
        return values, grads
    return evaluate


def xi_vector_field(s: AmbientStructure) -> VectorField:
    return lambda q: s.xi_jet(q)


def phi_applied(s: AmbientStructure, V: VectorField) -> VectorField:
    """q ↦ φ(q)·V(q)"""
    def evaluate(q: np.ndarray):
        phi, dphi = s.phi_jet(q)
        value, jac = V(q)
        return phi @ value, np.einsum('kjc,j->kc', dphi, value) + phi @ jac
    return evaluate


def scaled_field(f: ExprNode, V: VectorField) -> VectorField:
    """q ↦ f(q)·V(q) for a scalar expression f"""
    def evaluate(q: np.ndarray):
        values, grads, _ = eval_jets([f], q)
        value, jac = V(q)
        return values[0] * value, np.outer(value, grads[0]) + values[0] * jac
    return evaluate


def ambient_cov_deriv(
    s: AmbientStructure,
    V: VectorField,
    direction: Sequence[float],
    p: Sequence[float],
    connection: ChristoffelData = None,
) -> np.ndarray:
    """(∇̃_X V)(p) = dV·X + Γ(X, V)"""
    X = np.asarray(direction, dtype=float)
    p = np.asarray(p, dtype=float)
    connection = connection or christoffel(s, p)
    value, jac = V(p)
    return jac @ X + connection.contract(X, value)


@dataclass
class SasakianResiduals:
    """‖(∇̃_X φ)Y − g(X,Y)ξ + η(Y)X‖_g and ‖∇̃_X ξ + φX‖_g"""
    structure_derivative: float
    reeb_derivative: float

    def to_dict(self) -> Dict[str, float]:
        return {
            'structure_derivative': self.structure_derivative,
            'reeb_derivative': self.reeb_derivative,
        }


def check_sasakian(s: AmbientStructure, p: Sequence[float], X: Sequence[float], Y: Sequence[float]) -> SasakianResiduals:
    p = np.asarray(p, dtype=float)
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    connection = christoffel(s, p)
    phi, xi, eta, g = s.phi_field(p), s.xi_field(p), s.eta_field(p), s.metric_field(p)

    nabla_phi_y = ambient_cov_deriv(s, phi_applied(s, constant_field(Y)), X, p, connection)
    phi_nabla_y = phi @ connection.contract(X, Y)
    first = nabla_phi_y - phi_nabla_y - (X @ g @ Y) * xi + (eta @ Y) * X

    nabla_xi = ambient_cov_deriv(s, xi_vector_field(s), X, p, connection)
    second = nabla_xi + phi @ X
    return SasakianResiduals(norm(g, first), norm(g, second))


def sasakian_defect(s: AmbientStructure, p: Sequence[float]) -> float:
    """
    Componentwise max of (∇̃_i φ)^k_j − (g_ij ξ^k − η_j δ^k_i) and
    (∇̃_i ξ)^k + φ^k_i over all coordinate directions.
    """
    p = np.asarray(p, dtype=float)
    g, dg = s.metric_jet(p)
    gamma = christoffel_from_metric(g, dg).gamma
    phi, dphi = s.phi_jet(p)
    xi, dxi = s.xi_jet(p)
    eta = s.eta_field(p)
    N = s.dim

    nabla_phi = (
        dphi.transpose(2, 0, 1)
        + np.einsum('kim,mj->ikj', gamma, phi)
        - np.einsum('km,mij->ikj', phi, gamma)
    )
    expected = np.einsum('ij,k->ikj', g, xi) - np.einsum('j,ki->ikj', eta, np.eye(N))
    nabla_xi = dxi.T + np.einsum('kim,m->ik', gamma, xi)
    return float(max(np.max(np.abs(nabla_phi - expected)), np.max(np.abs(nabla_xi + phi.T))))


__all__ = [
    'AmbientStructure',
    'AmbientConstructionError',
    'UnknownAmbientError',
    'AlmostContactResiduals',
    'ChristoffelData',
    'SasakianResiduals',
    'VectorField',
    'AMBIENT_REGISTRY',
    'register_ambient',
    'get_ambient',
    'coordinate_names',
    'structure_from_text',
    'make_euclidean_acm',
    'make_standard_sasakian',
    'check_almost_contact',
    'christoffel',
    'christoffel_from_metric',
    'metricity_defect',
    'constant_field',
    'expression_field',
    'xi_vector_field',
    'phi_applied',
    'scaled_field',
    'ambient_cov_deriv',
    'check_sasakian',
    'sasakian_defect',
]
