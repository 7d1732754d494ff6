"""Linear complementarity dynamical systems (D = 0) as perturbed sweeping processes.

Given  x' = A x + B zeta + E u,  0 <= zeta  perp  C x + G u + F >= 0,
a symmetric PD metric P with P B = C' turns the system, through z = R x with
R = sqrt(P), into  z' in -N(S(t); z) + R A R^{-1} z + R E u(t)  on the moving
polyhedron S(t) = R K(t), K(t) = {x : C x + G u(t) + F >= 0}.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dualqp import MetricPolyhedron
from .errors import InfeasibleInitial, NoMetricExists
from .integrator import Perturbation, Trajectory
from .linalg import hoffman_constant, inverse_spd, matrix_sqrt_pd
from .sets import MetricPolyhedronRef, as_point
from .signals import signal_bound, signal_lipschitz

__all__ = [
    "LCSystem",
    "SweepingReformulation",
    "solve_metric_P",
    "matrix_sqrt_pd",
    "lcs_to_sweeping",
    "recover_original",
    "complementarity_residual",
]

METRIC_RESIDUAL_TOL = 1e-9
FEASIBILITY_TOL = 1e-9


@dataclass
class LCSystem:
    """Complementarity system data; D is implicitly zero."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    u: object
    x0: np.ndarray
    u_continuous: bool = True

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.B = np.atleast_2d(np.asarray(self.B, dtype=float))
        self.C = np.atleast_2d(np.asarray(self.C, dtype=float))
        self.E = np.atleast_2d(np.asarray(self.E, dtype=float))
        self.F = np.atleast_1d(np.asarray(self.F, dtype=float))
        self.G = np.atleast_2d(np.asarray(self.G, dtype=float))
        self.x0 = as_point(self.x0)
        n = self.A.shape[0]
        m = self.C.shape[0]
        if self.A.shape != (n, n):
            raise ValueError("A must be square")
        if self.B.shape != (n, m):
            raise ValueError(f"B must be {n}x{m}")
        if self.C.shape[1] != n:
            raise ValueError(f"C must have {n} columns")
        if self.E.shape[0] != n:
            raise ValueError(f"E must have {n} rows")
        if self.F.shape != (m,):
            raise ValueError(f"F must have length {m}")
        if self.G.shape[0] != m:
            raise ValueError(f"G must have {m} rows")
        if self.x0.shape != (n,):
            raise ValueError(f"x0 must have length {n}")

    @property
    def state_dim(self) -> int:
        return self.A.shape[0]

    @property
    def num_constraints(self) -> int:
        return self.C.shape[0]

    def w(self, x, t: float) -> np.ndarray:
        """Complementarity output w = C x + G u(t) + F."""
        u_val = np.atleast_1d(np.asarray(self.u(t), dtype=float))
        return self.C @ as_point(x) + self.G @ u_val + self.F


@dataclass
class SweepingReformulation:
    P: np.ndarray
    R: np.ndarray
    R_inv: np.ndarray
    poly: MetricPolyhedron
    set_descriptor: MetricPolyhedronRef
    perturbation: Perturbation
    z0: np.ndarray
    drift_matrix: np.ndarray        # R A R^{-1}
    input_matrix: np.ndarray        # R E
    theory_out_of_scope: bool


def solve_metric_P(B: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Symmetric PD solution of P B = C^T, closest to the identity in Frobenius norm.

    The constraint P B = C^T generally leaves degrees of freedom open (any
    direction orthogonal to range(B)); pulling the free part toward the
    identity keeps the solution deterministic and away from singularity.
    Raises NoMetricExists when no symmetric solution fits within tolerance or
    the fitted P is not positive definite.
    """
    B = np.atleast_2d(np.asarray(B, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    n, m = B.shape
    if C.shape != (m, n):
        raise ValueError("B must be n x m and C must be m x n")

    # unknown Delta = P - I, symmetric, svec-parameterized so that the
    # least-squares minimum-norm solution minimizes ||P - I||_F
    pairs = [(i, j) for i in range(n) for j in range(i, n)]
    sqrt2 = np.sqrt(2.0)
    rows = np.zeros((n * m, len(pairs)))
    target = (C.T - B).reshape(n * m)  # residual of P = I, row-major over (row i, col k)
    for col, (i, j) in enumerate(pairs):
        contrib = np.zeros((n, m))
        if i == j:
            contrib[i, :] = B[i, :]
        else:
            # off-diagonal parameter p_ij scaled by sqrt(2): Delta_ij = Delta_ji = p/sqrt(2)
            contrib[i, :] = B[j, :] / sqrt2
            contrib[j, :] = B[i, :] / sqrt2
        rows[:, col] = contrib.reshape(n * m)
    params, *_ = np.linalg.lstsq(rows, target, rcond=None)

    delta = np.zeros((n, n))
    for col, (i, j) in enumerate(pairs):
        if i == j:
            delta[i, i] = params[col]
        else:
            delta[i, j] = delta[j, i] = params[col] / sqrt2
    P = np.eye(n) + delta
    return verify_metric_P(P, B, C)


def verify_metric_P(P: np.ndarray, B: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Check P B = C^T (relative tolerance) and positive definiteness via Cholesky."""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    P = 0.5 * (P + P.T)
    residual = float(np.linalg.norm(P @ B - C.T, 2))
    tol = METRIC_RESIDUAL_TOL * max(1.0, float(np.linalg.norm(C.T, 2)))
    min_eig = float(np.linalg.eigvalsh(P)[0])
    if residual > tol:
        raise NoMetricExists(
            f"||P B - C^T|| = {residual:.3e} exceeds tolerance {tol:.3e}",
            residual=residual, min_eigenvalue=min_eig,
        )
    try:
        np.linalg.cholesky(P)
    except np.linalg.LinAlgError:
        raise NoMetricExists(
            f"fitted P is not positive definite (min eigenvalue {min_eig:.3e})",
            residual=residual, min_eigenvalue=min_eig,
        ) from None
    return P


def lcs_to_sweeping(sys: LCSystem, *, P: np.ndarray | None = None,
                    gamma: float = 1e-6, horizon: float = 1.0,
                    feasibility_tol: float = FEASIBILITY_TOL) -> SweepingReformulation:
    """Build the perturbed sweeping process equivalent to the LCS.

    The drift is f(t, z) = R A R^{-1} z + R E u(t) with growth certificate
    h(z) = ||R A R^{-1}|| ||z|| + ||R E|| sup|u|; `horizon` is only used to
    bound sup|u| and Lip(u) by sampling when the signal has no analytic bound.
    """
    if P is None:
        P = solve_metric_P(sys.B, sys.C)
    else:
        P = verify_metric_P(P, sys.B, sys.C)
    R = matrix_sqrt_pd(P)
    R_inv = inverse_spd(R)

    w0 = sys.w(sys.x0, 0.0)
    if np.min(w0) < -feasibility_tol:
        raise InfeasibleInitial(
            f"C x0 + G u(0) + F has a negative component: {np.min(w0):.3e}"
        )

    drift_matrix = R @ sys.A @ R_inv
    input_matrix = R @ sys.E
    drift_norm = float(np.linalg.norm(drift_matrix, 2))
    input_norm = float(np.linalg.norm(input_matrix, 2))
    u_sup = signal_bound(sys.u, horizon)

    def f(t, z):
        u_val = np.atleast_1d(np.asarray(sys.u(t), dtype=float))
        return drift_matrix @ z + input_matrix @ u_val

    def h(z):
        return drift_norm * float(np.linalg.norm(z)) + input_norm * u_sup

    perturbation = Perturbation(f=f, h=h, lipschitz_h=drift_norm, gamma=gamma)

    theory_out_of_scope = not sys.u_continuous
    if np.linalg.norm(sys.G, 2) == 0.0:
        lipschitz = 0.0
    else:
        u_lip = signal_lipschitz(sys.u, horizon)
        if u_lip is None:
            lipschitz = float("inf")
            theory_out_of_scope = True
        else:
            # Haus(S(t), S(s)) <= ||R|| H(C) ||G|| Lip(u) |t - s|: a right-hand-side
            # perturbation of K(t) scaled into the R metric through Hoffman's bound
            lipschitz = (
                float(np.linalg.norm(R, 2))
                * hoffman_constant(sys.C)
                * float(np.linalg.norm(sys.G, 2))
                * u_lip
            )

    poly = MetricPolyhedron(
        P=P, R=R, R_inv=R_inv, C=sys.C, F=sys.F, G=sys.G, u=sys.u,
        lipschitz_const=lipschitz, theory_out_of_scope=theory_out_of_scope,
    )
    return SweepingReformulation(
        P=P, R=R, R_inv=R_inv, poly=poly,
        set_descriptor=MetricPolyhedronRef(provider=poly),
        perturbation=perturbation,
        z0=R @ sys.x0,
        drift_matrix=drift_matrix,
        input_matrix=input_matrix,
        theory_out_of_scope=theory_out_of_scope,
    )


def recover_original(reform: SweepingReformulation, traj: Trajectory):
    """Map a z-trajectory back to x = R^{-1} z and report multiplier estimates.

    zeta_k = lambda_k / mu is only a discrete estimate of the complementarity
    multiplier (validated through the complementarity residual, not through
    any convergence claim); node 0 has no projection, so zeta_0 = 0.
    """
    mu = traj.schedule.mu
    x_nodes = traj.nodes @ reform.R_inv.T
    m = reform.poly.num_constraints
    zeta = np.zeros((traj.nodes.shape[0], m))
    for k, cert in enumerate(traj.certificates):
        if cert.multiplier is not None:
            zeta[k + 1] = cert.multiplier / mu
    return x_nodes, zeta


def complementarity_residual(sys: LCSystem, x, zeta, t: float) -> float:
    """max_i ( |min(zeta_i, w_i)| + [w_i]_- ) with w = C x + G u(t) + F.

    Zero iff zeta and w are complementary and w is feasible.
    """
    w = sys.w(x, t)
    zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
    per_component = np.abs(np.minimum(zeta, w)) + np.maximum(0.0, -w)
    return float(np.max(per_component))
