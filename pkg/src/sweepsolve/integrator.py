"""Inexact catching-up time stepping on a uniform grid.

One run advances x_{k+1} = eps-eta-projection of x_k + integral of the drift
over the cell, onto the constraint set at the right cell endpoint.  Between
nodes the trajectory is the exact piecewise interpolant

    x_n(t) = x_k + (t - t_k)/mu * (x_{k+1} - x_k - I_k) + integral_{t_k}^t f(s, x_k) ds,

where I_k is the full-cell drift integral, so x_n matches the nodes at both
cell endpoints up to quadrature round-off.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    CertificateFailure,
    DriftBoundViolation,
    InadmissibleExponents,
    NonFiniteDrift,
    OutOfRange,
    ProjectionFailure,
    UnsupportedKind,
)
from .sets import (
    ProjectionCertificate,
    SlackPolicy,
    as_point,
    distance_bounds,
    eps_eta_project,
)

DEFAULT_QUADRATURE_SUBINTERVALS = 8


@dataclass(frozen=True)
class Schedule:
    """Grid size and projection tolerances for one run.

    Admissibility of the tolerance family is structural: eps_n = mu^a with
    a > 2 makes eps_n/mu_n^2 -> 0, and eta_n = mu^b with b > 1 makes
    eta_n/mu_n -> 0 along any refinement n -> infinity.
    """

    n: int
    T: float
    mu: float
    epsilon: float
    eta: float
    eps_exponent: float
    eta_exponent: float


def make_schedule(n: int, T: float, eps_exponent: float = 2.1,
                  eta_exponent: float = 1.05) -> Schedule:
    """Exponent-generated schedule: mu = T/n, eps = mu^eps_exponent, eta = mu^eta_exponent."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if T <= 0.0:
        raise ValueError("horizon T must be positive")
    if eps_exponent <= 2.0:
        raise InadmissibleExponents(
            f"eps_exponent must exceed 2 (got {eps_exponent}); "
            "otherwise eps_n/mu_n^2 does not vanish"
        )
    if eta_exponent <= 1.0:
        raise InadmissibleExponents(
            f"eta_exponent must exceed 1 (got {eta_exponent}); "
            "otherwise eta_n/mu_n does not vanish"
        )
    mu = T / n
    return Schedule(n=n, T=T, mu=mu, epsilon=mu**eps_exponent,
                    eta=mu**eta_exponent, eps_exponent=eps_exponent,
                    eta_exponent=eta_exponent)


@dataclass
class Perturbation:
    """Single-valued drift selection f with its growth certificate (h, gamma).

    Every evaluation is checked against ||f(t, x)|| <= h(x) + sqrt(gamma);
    lipschitz_h is the Lipschitz constant of h used by the a-priori constants.
    """

    f: object
    h: object
    lipschitz_h: float
    gamma: float

    def __post_init__(self):
        if self.gamma <= 0.0:
            raise ValueError("gamma must be positive")
        if self.lipschitz_h < 0.0:
            raise ValueError("lipschitz_h must be nonnegative")

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        value = np.atleast_1d(np.asarray(self.f(t, x), dtype=float))
        if not np.all(np.isfinite(value)):
            raise NonFiniteDrift(f"drift returned a non-finite value at t={t}")
        bound = float(self.h(x)) + math.sqrt(self.gamma)
        norm = float(np.linalg.norm(value))
        if norm > bound * (1.0 + 1e-12) + 1e-300:
            raise DriftBoundViolation(
                f"||f(t,x)|| = {norm:.6e} exceeds h(x) + sqrt(gamma) = {bound:.6e} at t={t}"
            )
        return value


def zero_perturbation(dimension: int) -> Perturbation:
    return Perturbation(
        f=lambda t, x: np.zeros(dimension),
        h=lambda x: 0.0,
        lipschitz_h=0.0,
        gamma=1e-12,
    )


def constant_perturbation(value) -> Perturbation:
    value = as_point(value)
    norm = float(np.linalg.norm(value))
    return Perturbation(
        f=lambda t, x: value.copy(),
        h=lambda x: norm,
        lipschitz_h=0.0,
        gamma=1e-12,
    )


@dataclass
class PartialTrajectory:
    """Prefix of a run that aborted; attached to ProjectionFailure."""

    grid: np.ndarray
    nodes: np.ndarray
    drift_integrals: np.ndarray
    certificates: list


@dataclass
class Trajectory:
    """Grid nodes plus the evidence that produced them."""

    grid: np.ndarray                     # n+1 times
    nodes: np.ndarray                    # (n+1, d) states
    drift_integrals: np.ndarray          # (n, d) full-cell integrals I_k
    certificates: list                   # n certificates, one per projection
    schedule: Schedule
    quadrature_subintervals: int = DEFAULT_QUADRATURE_SUBINTERVALS

    def __post_init__(self):
        n = self.schedule.n
        if len(self.grid) != n + 1 or self.nodes.shape[0] != n + 1:
            raise ValueError("trajectory arrays inconsistent with schedule")
        if self.drift_integrals.shape[0] != n or len(self.certificates) != n:
            raise ValueError("need one drift integral and certificate per step")
        if not all(cert.is_valid for cert in self.certificates):
            raise ValueError("trajectory carries an invalid projection certificate")

    @property
    def dimension(self) -> int:
        return self.nodes.shape[1]


def grid_delta_theta(schedule: Schedule, t: float):
    """(delta, theta) = cell endpoints (t_k, t_{k+1}) for t in [t_k, t_{k+1}); (t_{n-1}, T) at t = T."""
    if t < 0.0 or t > schedule.T:
        raise OutOfRange(f"t={t} outside [0, {schedule.T}]")
    n, mu, T = schedule.n, schedule.mu, schedule.T
    if t >= T:
        return (n - 1) * mu, T
    k = int(math.floor(t / mu))
    # float-guard the half-open convention at cell boundaries
    if k > 0 and t < k * mu:
        k -= 1
    elif k + 1 < n and t >= (k + 1) * mu:
        k += 1
    k = min(max(k, 0), n - 1)
    return k * mu, (k + 1) * mu if k + 1 < n else T


def _simpson(f, a: float, b: float, subintervals: int) -> np.ndarray:
    h = (b - a) / subintervals
    total = None
    for i in range(subintervals):
        left = a + i * h
        mid = left + 0.5 * h
        right = left + h
        panel = f(left) + 4.0 * f(mid) + f(right)
        total = panel if total is None else total + panel
    return (h / 6.0) * total


def drift_integral(p: Perturbation, x_k, t_k: float, t_next: float,
                   subintervals: int = DEFAULT_QUADRATURE_SUBINTERVALS) -> np.ndarray:
    """Composite-Simpson integral of s -> f(s, x_k) over [t_k, t_next].

    Exact for drifts polynomial in s of degree <= 3 on each subinterval.
    """
    if not t_k < t_next:
        raise ValueError("drift integral requires t_k < t_next")
    x_k = as_point(x_k)
    return _simpson(lambda s: p(s, x_k), t_k, t_next, subintervals)


def catching_up_run(set_, p: Perturbation, x0, schedule: Schedule, *,
                    quadrature_subintervals: int = DEFAULT_QUADRATURE_SUBINTERVALS,
                    max_proj_iters: int | None = None,
                    warm_start: bool = True,
                    slack: SlackPolicy | None = None) -> Trajectory:
    """Run the inexact catching-up scheme and return the certified trajectory.

    Raises ProjectionFailure (partial trajectory attached) when a step cannot
    reach a VALID certificate.  Deterministic: identical inputs give bitwise
    identical trajectories.
    """
    x0 = as_point(x0)
    n, mu, T = schedule.n, schedule.mu, schedule.T

    try:
        d0_hi = distance_bounds(set_, 0.0, x0)[1]
    except UnsupportedKind:
        d0_hi = None
    if d0_hi is not None and d0_hi > 1e-12:
        if d0_hi <= schedule.eta:
            warnings.warn(
                f"initial state is infeasible by {d0_hi:.3e} <= eta_n; "
                "the first projection step repairs it",
                RuntimeWarning,
            )
        else:
            raise ValueError(
                f"initial state violates C(0) by {d0_hi:.3e} > eta_n = {schedule.eta:.3e}"
            )

    grid = np.array([k * mu for k in range(n)] + [T])
    nodes = np.empty((n + 1, x0.shape[0]))
    nodes[0] = x0
    integrals = np.empty((n, x0.shape[0]))
    certificates: list[ProjectionCertificate] = []
    lam_prev = None

    for k in range(n):
        integral = drift_integral(p, nodes[k], grid[k], grid[k + 1],
                                  subintervals=quadrature_subintervals)
        integrals[k] = integral
        w = nodes[k] + integral
        try:
            z, cert = eps_eta_project(
                set_, grid[k + 1], w, schedule.epsilon, schedule.eta,
                max_iters=max_proj_iters,
                lam0=lam_prev if warm_start else None,
                slack=slack,
            )
        except CertificateFailure as exc:
            partial = PartialTrajectory(
                grid=grid[: k + 1],
                nodes=nodes[: k + 1].copy(),
                drift_integrals=integrals[:k].copy(),
                certificates=certificates,
            )
            raise ProjectionFailure(
                f"projection failed at step {k}: {exc}",
                step=k, certificate=exc.certificate, trajectory=partial,
            ) from exc
        nodes[k + 1] = z
        certificates.append(cert)
        if warm_start and cert.multiplier is not None:
            lam_prev = cert.multiplier

    return Trajectory(grid=grid, nodes=nodes, drift_integrals=integrals,
                      certificates=certificates, schedule=schedule,
                      quadrature_subintervals=quadrature_subintervals)


def interpolate(traj: Trajectory, p: Perturbation, t: float) -> np.ndarray:
    """Evaluate the piecewise interpolant at t, using the run's quadrature rule
    for the partial drift integral."""
    schedule = traj.schedule
    if t < 0.0 or t > schedule.T:
        raise OutOfRange(f"t={t} outside [0, {schedule.T}]")
    delta, _ = grid_delta_theta(schedule, t)
    k = int(round(delta / schedule.mu))
    x_k = traj.nodes[k]
    if t == traj.grid[k]:
        return x_k.copy()
    partial = _simpson(lambda s: p(s, x_k), traj.grid[k], t,
                       traj.quadrature_subintervals)
    slope = (t - traj.grid[k]) / schedule.mu
    return x_k + slope * (traj.nodes[k + 1] - x_k - traj.drift_integrals[k]) + partial


def interpolant_derivative(traj: Trajectory, p: Perturbation, t: float) -> np.ndarray:
    """d/dt of the interpolant: (x_{k+1} - x_k - I_k)/mu + f(t, x_k)."""
    schedule = traj.schedule
    if t < 0.0 or t > schedule.T:
        raise OutOfRange(f"t={t} outside [0, {schedule.T}]")
    delta, _ = grid_delta_theta(schedule, t)
    k = int(round(delta / schedule.mu))
    x_k = traj.nodes[k]
    return (traj.nodes[k + 1] - x_k - traj.drift_integrals[k]) / schedule.mu + p(t, x_k)
