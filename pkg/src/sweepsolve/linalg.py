"""Small dense linear-algebra helpers shared by the metric and projection machinery."""

from __future__ import annotations

from itertools import combinations

import numpy as np

from .errors import NotPositiveDefinite

# Subset enumeration for the Hoffman constant is exponential in the row count;
# above this we fall back to the smallest positive singular value of C.
HOFFMAN_ENUMERATION_LIMIT = 12


def matrix_sqrt_pd(P: np.ndarray) -> np.ndarray:
    """Symmetric PD square root R of P via spectral decomposition, R @ R = P.

    Raises NotPositiveDefinite when P is not symmetric positive definite.
    """
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise NotPositiveDefinite("P must be a square matrix")
    if not np.allclose(P, P.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(P).max()))):
        raise NotPositiveDefinite("P is not symmetric")
    w, V = np.linalg.eigh(0.5 * (P + P.T))
    if w[0] <= 0.0:
        raise NotPositiveDefinite(f"P has a non-positive eigenvalue: {w[0]:.3e}")
    R = (V * np.sqrt(w)) @ V.T
    R = 0.5 * (R + R.T)
    err = np.linalg.norm(R @ R - P, 2)
    if err > 1e-10 * np.linalg.norm(P, 2):
        raise NotPositiveDefinite(f"square-root residual too large: {err:.3e}")
    return R


def inverse_spd(P: np.ndarray) -> np.ndarray:
    """Inverse of a symmetric PD matrix through its eigendecomposition."""
    w, V = np.linalg.eigh(np.asarray(P, dtype=float))
    if w[0] <= 0.0:
        raise NotPositiveDefinite(f"matrix has a non-positive eigenvalue: {w[0]:.3e}")
    inv = (V / w) @ V.T
    return 0.5 * (inv + inv.T)


def smallest_positive_singular_value(C: np.ndarray, rel_tol: float = 1e-10) -> float:
    """Smallest singular value of C above rel_tol * sigma_max."""
    sv = np.linalg.svd(np.asarray(C, dtype=float), compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        raise ValueError("matrix is zero")
    positive = sv[sv > rel_tol * sv[0]]
    return float(positive[-1])


def hoffman_constant(C: np.ndarray, rel_tol: float = 1e-10) -> float:
    """Upper bound H on d_K(y) / ||[-(C y + b)]_+||_2 for K = {y : C y + b >= 0}.

    For any y, the projection witness lies in the cone of an independent subset
    J of active rows, which gives d_K(y) <= ||v||_2 / sigma_min(C_J).  Taking the
    max of 1/sigma_min over all independent row subsets therefore yields a sound
    constant.  Row subsets are enumerated exhaustively for small m; beyond the
    enumeration limit the smallest positive singular value of the full matrix is
    used, which is exact for a single active face but not guaranteed otherwise.
    """
    C = np.atleast_2d(np.asarray(C, dtype=float))
    m, n = C.shape
    sigma_max = np.linalg.norm(C, 2)
    if sigma_max == 0.0:
        raise ValueError("constraint matrix is zero")
    if m > HOFFMAN_ENUMERATION_LIMIT:
        return 1.0 / smallest_positive_singular_value(C, rel_tol)
    smallest = np.inf
    max_size = min(m, n)
    for size in range(1, max_size + 1):
        for rows in combinations(range(m), size):
            sv = np.linalg.svd(C[list(rows)], compute_uv=False)
            if sv[-1] > rel_tol * sigma_max:  # keep only independent subsets
                smallest = min(smallest, float(sv[-1]))
    if not np.isfinite(smallest):
        raise ValueError("no independent row subset found (all rows near zero?)")
    return 1.0 / smallest


def require_symmetric(M: np.ndarray, name: str, rel_tol: float = 1e-12) -> np.ndarray:
    """Validate symmetry within rel_tol (relative to ||M||) and return the symmetrized matrix."""
    M = np.asarray(M, dtype=float)
    scale = max(1.0, float(np.linalg.norm(M, 2)))
    if np.linalg.norm(M - M.T, 2) > rel_tol * scale:
        raise ValueError(f"{name} is not symmetric within tolerance")
    return 0.5 * (M + M.T)
