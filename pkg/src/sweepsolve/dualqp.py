"""Certified projections onto S(t) = R K(t) via the dual quadratic program.

For K(t) = {y : C y + G u(t) + F >= 0} under the metric R = sqrt(P), the
squared distance d_{S(t)}(x)^2 = min_{y in K(t)} ||x - R y||^2 is a convex QP
whose dual over lambda >= 0 is

    maximize  -lambda' H lambda - 2 q' lambda,
    H = C P^{-1} C',  q = B' R x + G u(t) + F,  B = P^{-1} C'.

The dual objective is a lower bound on d^2, so after recovering the primal
point y = B lambda + R^{-1} x two computable quantities certify the result:

* value gap  ||x - R y||^2 - dual(lambda) = 2 lambda' (H lambda + q), and
* constraint slack of the recovered point  C y + G u(t) + F = H lambda + q,

whose negative part feeds a Hoffman-type bound on d_{S(t)}(R y).  Both follow
from P B = C', which makes ||x - R y||^2 = lambda' H lambda exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExhausted, SingularMetric, ZeroMatrix
from .linalg import hoffman_constant, require_symmetric
from .sets import ProjectionCertificate, as_point

DEFAULT_MAX_ITERS = 100_000

# power-iteration settings for the step size 1/lambda_max(H)
POWER_REL_TOL = 1e-9
POWER_ITER_FACTOR = 10


def max_eigenvalue(H: np.ndarray) -> float:
    """Largest eigenvalue of a symmetric PSD matrix by power iteration.

    Converges to relative tolerance 1e-9 on the Rayleigh quotient; if the
    residual check has not passed after 10*m iterations the Frobenius norm is
    returned instead (a valid upper bound, so a step 1/L stays convergent).
    Raises ZeroMatrix for the zero matrix.
    """
    H = np.asarray(H, dtype=float)
    m = H.shape[0]
    norm_f = float(np.linalg.norm(H, "fro"))
    if norm_f == 0.0:
        raise ZeroMatrix("cannot take the largest eigenvalue of the zero matrix")
    # graded start vector: a plain ones vector can sit exactly inside a
    # non-dominant invariant subspace (symmetric H), stalling on a wrong pair
    v = 1.0 + np.arange(1.0, m + 1.0) / (10.0 * m)
    v = v / np.linalg.norm(v)
    theta = 0.0
    for _ in range(POWER_ITER_FACTOR * m):
        w = H @ v
        norm_w = float(np.linalg.norm(w))
        if norm_w == 0.0:
            # start vector in the kernel; perturb deterministically
            v = v + np.arange(1.0, m + 1.0) / (m * m)
            v = v / np.linalg.norm(v)
            continue
        v = w / norm_w
        theta = float(v @ (H @ v))
        residual = float(np.linalg.norm(H @ v - theta * v))
        if residual <= POWER_REL_TOL * max(theta, norm_f * 1e-300):
            return theta
    return norm_f


@dataclass
class MetricPolyhedron:
    """Time-varying polyhedron K(t) = {y : C y + G u(t) + F >= 0} seen through R = sqrt(P).

    P, R, R_inv must be consistent: R symmetric PD with ||R R - P|| <= 1e-10 ||P||.
    ``u`` is a scalar-signal callable; G has one column per signal channel.
    """

    P: np.ndarray
    R: np.ndarray
    R_inv: np.ndarray
    C: np.ndarray
    F: np.ndarray
    G: np.ndarray
    u: object
    lipschitz_const: float = 0.0
    theory_out_of_scope: bool = False

    # derived, filled in __post_init__
    B: np.ndarray = field(init=False, repr=False)
    H: np.ndarray = field(init=False, repr=False)
    lambda_max: float = field(init=False, repr=False)
    hoffman: float = field(init=False, repr=False)
    r_norm: float = field(init=False, repr=False)

    def __post_init__(self):
        self.P = require_symmetric(self.P, "P")
        self.R = require_symmetric(self.R, "R")
        self.C = np.atleast_2d(np.asarray(self.C, dtype=float))
        self.F = np.atleast_1d(np.asarray(self.F, dtype=float))
        self.G = np.atleast_2d(np.asarray(self.G, dtype=float))
        m, n = self.C.shape
        if self.P.shape != (n, n):
            raise ValueError("P and C have inconsistent shapes")
        if self.F.shape != (m,):
            raise ValueError("F must be an m-vector")
        if self.G.shape[0] != m:
            raise ValueError("G must have m rows")
        eigs = np.linalg.eigvalsh(self.P)
        if eigs[0] <= 1e-14 * max(1.0, eigs[-1]):
            raise SingularMetric(f"P is numerically singular (min eigenvalue {eigs[0]:.3e})")
        if np.linalg.norm(self.R @ self.R - self.P, 2) > 1e-10 * np.linalg.norm(self.P, 2):
            raise ValueError("R is not a square root of P within tolerance")
        if np.any(np.linalg.norm(self.C, axis=1) == 0.0):
            raise ValueError("C must have nonzero rows")
        self.B = np.linalg.solve(self.P, self.C.T)
        self.H = 0.5 * ((self.C @ self.B) + (self.C @ self.B).T)
        self.lambda_max = max_eigenvalue(self.H)
        self.hoffman = hoffman_constant(self.C)
        self.r_norm = float(np.linalg.norm(self.R, 2))

    @property
    def num_constraints(self) -> int:
        return self.C.shape[0]

    @property
    def dimension(self) -> int:
        return self.C.shape[1]

    def offset(self, t: float) -> np.ndarray:
        """b(t) = G u(t) + F."""
        u_val = np.atleast_1d(np.asarray(self.u(t), dtype=float))
        return self.G @ u_val + self.F

    def eps_eta_project(self, t, x, eps, eta, *, max_iters=DEFAULT_MAX_ITERS,
                        check_every=1, lam0=None):
        """Certified eps-eta projection of x onto S(t); see module docstring."""
        x = as_point(x)
        dp = assemble_dual(self, t, x)
        stop = StoppingRule(eps, eta, max_iters=max_iters, check_every=check_every)
        lam, iterations, gap = projected_gradient_solve(dp, stop, lam0=lam0)
        y = primal_recover(self, lam, x)
        cert = certify_projection(self, t, x, lam, epsilon=eps, eta=eta,
                                  iterations=iterations)
        return self.R @ y, cert

    def distance_bounds(self, t, x, tol: float = 1e-8, max_iters=DEFAULT_MAX_ITERS):
        """Bracket (lower, upper) of d_{S(t)}(x), width <= tol when the budget allows.

        The lower bound is sqrt of the dual value; the upper bound adds the
        Hoffman residual of the recovered point to ||x - R y||, which covers
        the case where R y sits outside S(t).  Both bounds are sound at every
        iterate, so hitting the budget only loosens the bracket.
        """
        x = as_point(x)
        dp = assemble_dual(self, t, x)
        lam = np.zeros(self.num_constraints)
        step = 1.0 / dp.lambda_max
        lo, hi = 0.0, np.inf
        for _ in range(max_iters):
            s = dp.H @ lam + dp.q
            dual_val = float(-lam @ (dp.H @ lam) - 2.0 * (dp.q @ lam))
            primal_dist = float(np.sqrt(max(float(lam @ (dp.H @ lam)), 0.0)))
            _, residual = _certificate_parts(dp, lam, s)
            lo = max(lo, float(np.sqrt(max(dual_val, 0.0))))
            hi = min(hi, primal_dist + residual)
            if hi - lo <= tol:
                break
            lam = np.maximum(lam - step * s, 0.0)
        return lo, max(lo, hi)


@dataclass
class DualProblem:
    """Dual QP data for one projection instance: max -l'Hl - 2q'l over l >= 0."""

    H: np.ndarray
    q: np.ndarray
    lambda_max: float
    r_norm: float
    hoffman: float


@dataclass
class StoppingRule:
    epsilon: float
    eta: float
    max_iters: int = DEFAULT_MAX_ITERS
    check_every: int = 1

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.check_every < 1:
            raise ValueError("check_every must be at least 1")


def assemble_dual(poly: MetricPolyhedron, t: float, x) -> DualProblem:
    """Build the dual QP for projecting x onto S(t): H = C P^{-1} C', q = B' R x + G u(t) + F."""
    x = as_point(x)
    if x.shape[0] != poly.dimension:
        raise ValueError(f"point has dimension {x.shape[0]}, polyhedron expects {poly.dimension}")
    q = poly.B.T @ (poly.R @ x) + poly.offset(t)
    return DualProblem(poly.H, q, poly.lambda_max, poly.r_norm, poly.hoffman)


def dual_objective(dp: DualProblem, lam: np.ndarray) -> float:
    """Dual value -l'Hl - 2q'l; a lower bound on d_{S(t)}(x)^2 for every l >= 0."""
    return float(-lam @ (dp.H @ lam) - 2.0 * (dp.q @ lam))


def _certificate_parts(dp: DualProblem, lam: np.ndarray, s: np.ndarray):
    """(value_gap, enlargement_residual) from the slack vector s = H lam + q."""
    gap = 2.0 * float(lam @ s)
    violation = float(np.linalg.norm(np.minimum(s, 0.0)))
    residual = dp.r_norm * dp.hoffman * violation
    return gap, residual


def projected_gradient_solve(dp: DualProblem, stop: StoppingRule, lam0=None):
    """Fixed-step projected gradient on the dual from lam_0 = 0 (or a warm start).

    Iterates lam <- [lam - (H lam + q)/lambda_max]_+, which keeps the dual
    objective nondecreasing, and stops once the certified duality gap and the
    Hoffman residual meet the rule.  Raises BudgetExhausted with the best
    iterate when max_iters is reached first.
    """
    m = dp.q.shape[0]
    if lam0 is None:
        lam = np.zeros(m)
    else:
        lam = np.maximum(np.asarray(lam0, dtype=float).copy(), 0.0)
        if lam.shape != (m,):
            raise ValueError("warm-start multiplier has wrong shape")

    norm_h = float(np.linalg.norm(dp.H, "fro"))
    if norm_h == 0.0:
        # no curvature: the dual is linear, so K is either everything or empty
        if np.all(dp.q >= 0.0):
            return np.zeros(m), 0, 0.0
        raise BudgetExhausted(
            "dual problem has zero curvature and an ascent direction; K(t) is empty",
            lam=lam, gap=np.inf,
        )

    step = 1.0 / dp.lambda_max
    s = dp.H @ lam + dp.q
    best_lam, best_gap, best_residual = lam.copy(), np.inf, np.inf
    best_violation = np.inf
    for iteration in range(1, stop.max_iters + 1):
        lam = np.maximum(lam - step * s, 0.0)
        s = dp.H @ lam + dp.q
        if iteration % stop.check_every == 0 or iteration == stop.max_iters:
            gap, residual = _certificate_parts(dp, lam, s)
            violation = max(gap - stop.epsilon, 0.0) + max(residual - stop.eta, 0.0)
            if violation < best_violation:
                best_violation, best_gap, best_residual = violation, gap, residual
                best_lam = lam.copy()
            if violation == 0.0:
                return lam, iteration, gap
    raise BudgetExhausted(
        f"no valid certificate within {stop.max_iters} iterations "
        f"(best gap {best_gap:.3e} vs eps {stop.epsilon:.3e}, "
        f"best residual {best_residual:.3e} vs eta {stop.eta:.3e})",
        lam=best_lam, gap=best_gap,
    )


def primal_recover(poly: MetricPolyhedron, lam: np.ndarray, x) -> np.ndarray:
    """KKT recovery y = B lam + R^{-1} x; exact stationarity for any lam >= 0."""
    lam = np.asarray(lam, dtype=float)
    return poly.B @ lam + poly.R_inv @ as_point(x)


def certify_projection(poly: MetricPolyhedron, t: float, x, lam,
                       *, epsilon: float, eta: float,
                       iterations: int = 0) -> ProjectionCertificate:
    """Certificate for the candidate z = R y, y = B lam + R^{-1} x.

    value_gap is the duality gap ||x - R y||^2 - dual(lam) (dual value is a
    lower bound on d^2, so the gap over-approximates the true excess);
    enlargement_residual is ||R|| * H(C) * ||[-(C y + G u(t) + F)]_+||, a
    Hoffman-type upper bound on d_{S(t)}(z).
    """
    x = as_point(x)
    lam = np.asarray(lam, dtype=float)
    if np.any(lam < 0.0):
        raise ValueError("multiplier must be componentwise nonnegative")
    dp = assemble_dual(poly, t, x)
    y = primal_recover(poly, lam, x)
    value_gap = float(np.linalg.norm(x - poly.R @ y) ** 2) - dual_objective(dp, lam)
    slack = poly.C @ y + poly.offset(t)
    violation = float(np.linalg.norm(np.minimum(slack, 0.0)))
    residual = poly.r_norm * poly.hoffman * violation
    return ProjectionCertificate(
        epsilon=epsilon,
        eta=eta,
        value_gap=value_gap,
        enlargement_residual=residual,
        iterations=iterations,
        method="dual-pg",
        multiplier=lam.copy(),
    )
