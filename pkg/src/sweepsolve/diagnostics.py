"""A-priori constants of the time-stepping scheme, bound verification, rate studies.

The constants K1..K7 depend only on problem data (horizon, set and drift
Lipschitz constants, the drift bound at the initial state) and on the worst
tolerance-to-step ratio of the schedule family,

    c_frak = max over the family of (sqrt(eps_n) + eta_n) / mu_n.

``verify_bounds`` evaluates every bound on a computed trajectory; failures are
data, not errors.  ``convergence_study`` measures self-convergence against a
fine reference and compares the squared error with the theoretical envelope

    env_n = sqrt(eps) + eta + mu + sqrt(eps)/mu + eta/mu + sqrt(eta mu).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import UnsupportedKind
from .integrator import (
    Perturbation,
    Schedule,
    Trajectory,
    catching_up_run,
    interpolate,
    interpolant_derivative,
    make_schedule,
)
from .sets import SlackPolicy, as_point, distance_bounds

INTERIOR_SAMPLES_PER_CELL = 10


@dataclass(frozen=True)
class SchemeConstants:
    """Explicit constants of the scheme's a-priori bounds."""

    c_frak: float
    K1: float
    K2: float
    K3: float
    K4: float
    K5: float
    K6: float
    K7: float
    sigma_n: float
    # echoed inputs
    T: float
    L_C: float
    L_h: float
    h0: float
    gamma: float
    x0_norm: float
    schedule: Schedule


def theorem_constants(T: float, L_C: float, L_h: float, h0: float, gamma: float,
                      schedule: Schedule, *, x0_norm: float = 0.0,
                      family: list[Schedule] | None = None) -> SchemeConstants:
    """Evaluate the scheme constants for a schedule (or the worst of a family).

    c_frak is a supremum over the whole refinement family; for exponent-
    generated schedules it is attained at the smallest n, so passing the
    study's schedule list through ``family`` is enough to make it conservative
    for the study.
    """
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    if min(T, L_C, L_h, h0, x0_norm) < 0.0:
        raise ValueError("inputs must be nonnegative")
    schedules = list(family) if family else [schedule]
    if schedule not in schedules:
        schedules.append(schedule)
    c_frak = max((math.sqrt(s.epsilon) + s.eta) / s.mu for s in schedules)

    sqrt_gamma = math.sqrt(gamma)
    K1 = T * (L_C + 2.0 * h0 + 2.0 * sqrt_gamma + c_frak) * math.exp(2.0 * L_h * T)
    K2 = K1 + x0_norm + T * (L_C + 2.0 * (h0 + L_h * K1 + sqrt_gamma) + c_frak)
    K3 = L_C + h0 + L_h * (K2 + x0_norm) + sqrt_gamma
    K4 = L_C + 2.0 * h0 + 2.0 * L_h * K1 + 2.0 * sqrt_gamma
    K5 = K4 + L_C + 2.0 * (h0 + L_h * K1) + 2.0 * sqrt_gamma
    K6 = K5 + L_C
    K7 = c_frak + L_C + 2.0 * (h0 + L_h * K1 + sqrt_gamma)
    sigma_n = 2.0 * schedule.epsilon + 2.0 * K3 * schedule.eta * schedule.mu \
        + 4.0 * schedule.eta ** 2
    return SchemeConstants(
        c_frak=c_frak, K1=K1, K2=K2, K3=K3, K4=K4, K5=K5, K6=K6, K7=K7,
        sigma_n=sigma_n, T=T, L_C=L_C, L_h=L_h, h0=h0, gamma=gamma,
        x0_norm=x0_norm, schedule=schedule,
    )


@dataclass
class BoundCheck:
    name: str
    description: str
    passed: bool
    worst_margin: float     # bound minus observed value; negative means violated
    worst_location: float   # time at which the worst margin occurred


@dataclass
class BoundReport:
    checks: dict = field(default_factory=dict)

    def add(self, check: BoundCheck):
        self.checks[check.name] = check

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def __iter__(self):
        return iter(self.checks.values())


def _worst(bound_minus_value):
    """(worst margin, its location) from a list of (margin, t) pairs."""
    margin, location = min(bound_minus_value, key=lambda pair: pair[0])
    return margin, location


def _interior_times(grid, k):
    return np.linspace(grid[k], grid[k + 1], INTERIOR_SAMPLES_PER_CELL + 2)[1:-1]


def verify_bounds(traj: Trajectory, consts: SchemeConstants, set_,
                  p: Perturbation) -> BoundReport:
    """Evaluate the scheme's a-priori bounds on a computed trajectory.

    Distances are taken as certified upper bounds, so a pass is conservative.
    Interior quantities use the interpolant and its derivative formula.
    """
    sched = traj.schedule
    mu, eps, eta = sched.mu, sched.epsilon, sched.eta
    sqrt_eps = math.sqrt(eps)
    sqrt_gamma = math.sqrt(consts.gamma)
    grid, nodes = traj.grid, traj.nodes
    n = sched.n
    x0 = nodes[0]
    report = BoundReport()

    # distance of the drifted state to the next set, sharp and uniform forms
    pairs_i, pairs_iv = [], []
    for k in range(n):
        w = nodes[k] + traj.drift_integrals[k]
        d_hi = distance_bounds(set_, grid[k + 1], w)[1]
        h_k = float(p.h(nodes[k]))
        bound_i = (consts.L_C + h_k + sqrt_gamma) * mu + eta
        pairs_i.append((bound_i - d_hi, grid[k + 1]))
        pairs_iv.append((consts.K3 * mu + eta - d_hi, grid[k + 1]))
    for name, pairs, desc in (
        ("drift_feasibility_sharp", pairs_i, "d(w_k) <= (L_C + h(x_k) + sqrt(gamma)) mu + eta"),
        ("drift_feasibility_uniform", pairs_iv, "d(w_k) <= K3 mu + eta"),
    ):
        margin, loc = _worst(pairs)
        report.add(BoundCheck(name, desc, margin >= 0.0, margin, loc))

    # node distance to the initial state
    pairs = [(consts.K1 - float(np.linalg.norm(nodes[k] - x0)), grid[k])
             for k in range(1, n + 1)]
    margin, loc = _worst(pairs)
    report.add(BoundCheck("node_excursion", "||x_k - x0|| <= K1", margin >= 0.0, margin, loc))

    # interpolant norm at nodes and interior samples
    pairs = [(consts.K2 - float(np.linalg.norm(nodes[k])), grid[k]) for k in range(n + 1)]
    for k in range(n):
        for t in _interior_times(grid, k):
            pairs.append((consts.K2 - float(np.linalg.norm(interpolate(traj, p, t))), t))
    margin, loc = _worst(pairs)
    report.add(BoundCheck("state_norm", "||x_n(t)|| <= K2", margin >= 0.0, margin, loc))

    # node increments
    bound_v = consts.K4 * mu + sqrt_eps + eta
    pairs = [(bound_v - float(np.linalg.norm(nodes[k + 1] - nodes[k])), grid[k + 1])
             for k in range(n)]
    margin, loc = _worst(pairs)
    report.add(BoundCheck("node_increment", "||x_{k+1} - x_k|| <= K4 mu + sqrt(eps) + eta",
                          margin >= 0.0, margin, loc))

    # interpolant deviation from the right node
    bound_vi = consts.K5 * mu + 2.0 * sqrt_eps + 2.0 * eta
    pairs = []
    for k in range(n):
        for t in _interior_times(grid, k):
            gap = float(np.linalg.norm(interpolate(traj, p, t) - nodes[k + 1]))
            pairs.append((bound_vi - gap, t))
    margin, loc = _worst(pairs)
    report.add(BoundCheck("cell_deviation", "||x_n(t) - x_{k+1}|| <= K5 mu + 2 sqrt(eps) + 2 eta",
                          margin >= 0.0, margin, loc))

    # node feasibility profile
    bound_b = consts.K6 * mu + consts.L_C * mu + 2.0 * sqrt_eps + 3.0 * eta
    profile = feasibility_profile(traj, set_)
    pairs = [(bound_b - profile[k], grid[k]) for k in range(n + 1)]
    margin, loc = _worst(pairs)
    report.add(BoundCheck("node_feasibility", "d_{C(t_k)}(x_k) <= K6 mu + L_C mu + 2 sqrt(eps) + 3 eta",
                          margin >= 0.0, margin, loc))

    # interpolant derivative
    pairs = []
    for k in range(n):
        for t in _interior_times(grid, k):
            speed = float(np.linalg.norm(interpolant_derivative(traj, p, t)))
            pairs.append((consts.K7 - speed, t))
    margin, loc = _worst(pairs)
    report.add(BoundCheck("velocity_bound", "||dx_n/dt|| <= K7", margin >= 0.0, margin, loc))

    return report


def feasibility_profile(traj: Trajectory, set_) -> np.ndarray:
    """Certified upper bound on d_{C(t_k)}(x_k) at every node."""
    try:
        return np.array([
            distance_bounds(set_, t, x)[1]
            for t, x in zip(traj.grid, traj.nodes)
        ])
    except UnsupportedKind:
        raise UnsupportedKind(
            "set provides no distance evaluation; feasibility profile unavailable"
        ) from None


# --------------------------------------------------------------------------
# convergence studies
# --------------------------------------------------------------------------


@dataclass
class SweepingProblem:
    """Everything needed to rerun one sweeping problem at any grid size."""

    set_: object
    perturbation: Perturbation
    x0: np.ndarray
    T: float
    eps_exponent: float = 2.1
    eta_exponent: float = 1.05
    quadrature_subintervals: int = 8
    max_proj_iters: int | None = None
    warm_start: bool = True
    slack_fraction: float | None = None
    slack_seed: int = 0

    def schedule(self, n: int) -> Schedule:
        return make_schedule(n, self.T, self.eps_exponent, self.eta_exponent)

    def run(self, n: int) -> Trajectory:
        slack = None
        if self.slack_fraction is not None:
            slack = SlackPolicy(fraction=self.slack_fraction, seed=self.slack_seed)
        return catching_up_run(
            self.set_, self.perturbation, as_point(self.x0), self.schedule(n),
            quadrature_subintervals=self.quadrature_subintervals,
            max_proj_iters=self.max_proj_iters,
            warm_start=self.warm_start,
            slack=slack,
        )


def rate_envelope(schedule: Schedule) -> float:
    """sqrt(eps) + eta + mu + sqrt(eps)/mu + eta/mu + sqrt(eta mu)."""
    mu, eps, eta = schedule.mu, schedule.epsilon, schedule.eta
    return math.sqrt(eps) + eta + mu + math.sqrt(eps) / mu + eta / mu \
        + math.sqrt(eta * mu)


@dataclass
class StudyRow:
    n: int
    mu: float
    eps: float
    eta: float
    e_n: float
    env_n: float
    ratio: float
    empirical_order: float


@dataclass
class StudyTable:
    rows: list

    COLUMNS = ("n", "mu", "eps", "eta", "e_n", "env_n", "ratio", "empirical_order")

    def errors_nonincreasing(self) -> bool:
        errs = [row.e_n for row in self.rows]
        return all(e1 >= e2 for e1, e2 in zip(errs, errs[1:]))

    def errors_strictly_decreasing(self) -> bool:
        errs = [row.e_n for row in self.rows]
        return all(e1 > e2 for e1, e2 in zip(errs, errs[1:]))

    def ratio_span(self) -> float:
        ratios = [row.ratio for row in self.rows if row.ratio > 0.0]
        if not ratios:
            return float("inf")
        return max(ratios) / min(ratios)

    def to_csv_text(self) -> str:
        lines = [",".join(self.COLUMNS)]
        for row in self.rows:
            lines.append(",".join([
                str(row.n),
                *(f"{value:.17g}" for value in (
                    row.mu, row.eps, row.eta, row.e_n, row.env_n,
                    row.ratio, row.empirical_order,
                )),
            ]))
        return "\n".join(lines) + "\n"


def convergence_study(problem: SweepingProblem, n_list: list[int],
                      reference_n: int) -> StudyTable:
    """Self-convergence table: errors against a fine run of the same scheme.

    e_n is the max over the coarse grid of the distance to the reference
    interpolant; the reference must be strictly finer than every study grid.
    """
    n_list = list(n_list)
    if any(n2 <= n1 for n1, n2 in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly ascending")
    if reference_n <= max(n_list):
        raise ValueError("reference_n must exceed every study n")

    reference = problem.run(reference_n)
    errors = []
    for n in n_list:
        traj = problem.run(n)
        err = 0.0
        for t, x in zip(traj.grid, traj.nodes):
            ref_x = interpolate(reference, problem.perturbation, t)
            err = max(err, float(np.linalg.norm(x - ref_x)))
        errors.append(err)

    rows = []
    for i, n in enumerate(n_list):
        sched = problem.schedule(n)
        env = rate_envelope(sched)
        if i + 1 < len(n_list) and errors[i + 1] > 0.0 and errors[i] > 0.0:
            order = math.log(errors[i] / errors[i + 1]) / math.log(n_list[i + 1] / n)
        else:
            order = float("nan")
        rows.append(StudyRow(
            n=n, mu=sched.mu, eps=sched.epsilon, eta=sched.eta,
            e_n=errors[i], env_n=env,
            ratio=errors[i] ** 2 / env,
            empirical_order=order,
        ))
    return StudyTable(rows=rows)
