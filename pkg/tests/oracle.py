"""Independent brute-force oracles used only by the tests.

The projection oracle enumerates every active subset of the polyhedron's
constraints (feasible only for small m) and solves the equality-constrained
KKT system per subset; the feasible candidate with the smallest objective is
the exact optimum.  Nothing here shares code with the dual engine under test.
"""

from itertools import combinations

import numpy as np


def project_metric_polyhedron(P, R, C, b, x, feas_tol=1e-9):
    """Exact min_{C y + b >= 0} ||x - R y||^2 by active-set enumeration.

    Returns (d2, y_star, lam_star); lam_star has the subset multipliers padded
    with zeros.  Requires a nonempty polyhedron and small m.
    """
    P = np.asarray(P, float)
    R = np.asarray(R, float)
    C = np.atleast_2d(np.asarray(C, float))
    b = np.atleast_1d(np.asarray(b, float))
    x = np.atleast_1d(np.asarray(x, float))
    m, n = C.shape
    scale = 1.0 + float(np.abs(b).max(initial=0.0)) + float(np.linalg.norm(C @ x))

    best = (np.inf, None, None)
    rx = R @ x
    for size in range(0, m + 1):
        for subset in combinations(range(m), size):
            J = list(subset)
            k = len(J)
            kkt = np.zeros((n + k, n + k))
            kkt[:n, :n] = P
            if k:
                kkt[:n, n:] = -C[J].T
                kkt[n:, :n] = C[J]
            rhs = np.concatenate([rx, -b[J]]) if k else rx
            sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
            y = sol[:n]
            if k and np.max(np.abs(C[J] @ y + b[J])) > feas_tol * scale:
                continue  # inconsistent equality system
            if np.min(C @ y + b) < -feas_tol * scale:
                continue
            objective = float(np.linalg.norm(x - R @ y) ** 2)
            if objective < best[0]:
                lam = np.zeros(m)
                if k:
                    lam[J] = sol[n:]
                best = (objective, y, lam)
    if best[1] is None:
        raise ValueError("polyhedron appears to be empty")
    return best


def distance_to_metric_polyhedron(P, R, C, b, z):
    """Exact d_{S}(z) for S = R K, K = {y : C y + b >= 0}."""
    d2, _, _ = project_metric_polyhedron(P, R, C, b, z)
    return float(np.sqrt(max(d2, 0.0)))


def distance_to_polyhedron(C, b, y):
    """Exact Euclidean d_K(y) for K = {y : C y + b >= 0}."""
    n = C.shape[1]
    eye = np.eye(n)
    d2, _, _ = project_metric_polyhedron(eye, eye, C, b, y)
    return float(np.sqrt(max(d2, 0.0)))


def sampled_hausdorff_metric_polyhedra(P, R, C, b_t, b_s, rng, samples=40):
    """Lower bound on Haus(S(t), S(s)) for S = R K with offsets b_t, b_s.

    Points of each set are generated by projecting random points onto it; the
    sampled sup of distances to the other set underestimates the true value.
    """
    n = C.shape[1]
    eye = np.eye(n)
    worst = 0.0
    for _ in range(samples):
        y = rng.normal(size=n) * 2.0
        for b_from, b_to in ((b_t, b_s), (b_s, b_t)):
            _, y_proj, _ = project_metric_polyhedron(eye, eye, C, b_from, y)
            z = R @ y_proj
            worst = max(worst, distance_to_metric_polyhedron(P, R, C, b_to, z))
    return worst


def random_projection_instance(rng, max_dim=5, max_constraints=8):
    """Random well-posed instance: PD metric, nonzero rows, nonempty K."""
    n = int(rng.integers(1, max_dim + 1))
    m = int(rng.integers(1, max_constraints + 1))
    base = rng.normal(size=(n, n))
    P = base @ base.T + 0.3 * np.eye(n)
    while True:
        C = rng.normal(size=(m, n))
        if np.min(np.linalg.norm(C, axis=1)) > 0.3:
            break
    y_feasible = rng.normal(size=n)
    margins = rng.uniform(0.0, 1.0, size=m)
    b = margins - C @ y_feasible
    x = rng.normal(size=n) * 2.0
    return P, C, b, x
