"""
Small dense linear algebra under a metric g: inner products, modified
Gram-Schmidt with re-orthogonalization, projections and basis completion.
"""

from typing import List, Sequence, Tuple

import numpy as np

RANK_TOLERANCE = 1e-10
ORTHONORMAL_CHECK = 1e-8


class NonOrthonormalBasisError(ValueError):
    """A basis handed to metric_project is not g-orthonormal"""


class MetricNotPositiveDefiniteError(ValueError):
    """Metric matrix is not symmetric positive definite"""


def inner(metric: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    return float(a @ metric @ b)


def norm(metric: np.ndarray, v: np.ndarray) -> float:
    return float(np.sqrt(max(v @ metric @ v, 0.0)))


def check_spd(metric: np.ndarray, symmetry_tol: float = 1e-10):
    """Raise MetricNotPositiveDefiniteError unless the metric is SPD"""
    if not np.allclose(metric, metric.T, atol=symmetry_tol, rtol=0.0):
        raise MetricNotPositiveDefiniteError("metric is not symmetric")
    try:
        np.linalg.cholesky(metric)
    except np.linalg.LinAlgError:
        raise MetricNotPositiveDefiniteError("metric is not positive definite") from None


def as_columns(vectors: Sequence[np.ndarray], dim: int) -> np.ndarray:
    if len(vectors) == 0:
        return np.zeros((dim, 0))
    return np.column_stack([np.asarray(v, dtype=float) for v in vectors])


def orthonormalize(
    vectors: Sequence[np.ndarray],
    metric: np.ndarray,
    tol: float = RANK_TOLERANCE,
) -> Tuple[List[np.ndarray], int]:
    """
    Modified Gram-Schmidt with one re-orthogonalization pass.

    Args:
        vectors: Input vectors, processed in order
        metric: SPD matrix defining the inner product
        tol: Post-projection g-norm under which a vector is dropped

    Returns:
        (basis, rank) with basis g-orthonormal and spanning the input
    """
    basis: List[np.ndarray] = []
    for v in vectors:
        w = np.array(v, dtype=float)
        for _ in range(2):
            for q in basis:
                w = w - inner(metric, q, w) * q
        length = norm(metric, w)
        if length < tol:
            continue
        basis.append(w / length)
    return basis, len(basis)


def gram_matrix(vectors: Sequence[np.ndarray], metric: np.ndarray) -> np.ndarray:
    B = as_columns(vectors, metric.shape[0])
    return B.T @ metric @ B


def metric_project(
    v: np.ndarray,
    basis: Sequence[np.ndarray],
    metric: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Split v into its component in span(basis) and the g-orthogonal residual.

    Raises:
        NonOrthonormalBasisError: basis fails Bᵀ g B = I to 1e-8
    """
    v = np.asarray(v, dtype=float)
    if len(basis) == 0:
        return np.zeros_like(v), v.copy()
    B = as_columns(basis, metric.shape[0])
    defect = np.max(np.abs(B.T @ metric @ B - np.eye(B.shape[1])))
    if defect > ORTHONORMAL_CHECK:
        raise NonOrthonormalBasisError(f"basis deviates from g-orthonormal by {defect:.3e}")
    component = B @ (B.T @ (metric @ v))
    return component, v - component


def coordinates(v: np.ndarray, basis: Sequence[np.ndarray], metric: np.ndarray) -> np.ndarray:
    """Coefficients of v against a g-orthonormal basis"""
    if len(basis) == 0:
        return np.zeros(0)
    B = as_columns(basis, metric.shape[0])
    return B.T @ (metric @ np.asarray(v, dtype=float))


def complete_basis(
    basis: Sequence[np.ndarray],
    metric: np.ndarray,
    tol: float = RANK_TOLERANCE,
) -> List[np.ndarray]:
    """
    Orthonormal basis of the g-orthocomplement of span(basis).

    Candidates are the coordinate vectors, taken greedily by largest residual
    norm so the completion stays well conditioned.
    """
    dim = metric.shape[0]
    current = [np.asarray(b, dtype=float) for b in basis]
    complement: List[np.ndarray] = []
    candidates = [np.eye(dim)[i] for i in range(dim)]
    while len(current) < dim:
        best, best_norm = None, tol
        for candidate in candidates:
            w = candidate.copy()
            for _ in range(2):
                for q in current:
                    w = w - inner(metric, q, w) * q
            length = norm(metric, w)
            if length > best_norm:
                best, best_norm = w, length
        if best is None:
            break
        unit = best / best_norm
        current.append(unit)
        complement.append(unit)
    return complement


__all__ = [
    'RANK_TOLERANCE',
    'NonOrthonormalBasisError',
    'MetricNotPositiveDefiniteError',
    'inner',
    'norm',
    'check_spd',
    'as_columns',
    'orthonormalize',
    'gram_matrix',
    'metric_project',
    'coordinates',
    'complete_basis',
]
