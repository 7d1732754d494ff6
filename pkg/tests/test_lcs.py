import math

import numpy as np
import pytest

from sweepsolve.circuits import build_circuit
from sweepsolve.errors import InfeasibleInitial, NoMetricExists, NotPositiveDefinite
from sweepsolve.integrator import catching_up_run, make_schedule
from sweepsolve.lcs import (
    LCSystem,
    complementarity_residual,
    lcs_to_sweeping,
    matrix_sqrt_pd,
    recover_original,
    solve_metric_P,
)
from sweepsolve.signals import Constant, Sine

from oracle import sampled_hausdorff_metric_polyhedra

CIRCUIT_A = np.array([[0.0, 1.0, 0.0], [-0.5, -1.0, 0.5], [0.0, 1.0, -3.0]])
CIRCUIT_B = np.array([[0.0, 0.0], [0.5, 0.5], [-1.0, 0.0]])
CIRCUIT_C = np.array([[0.0, 1.0, -1.0], [0.0, 1.0, 0.0]])
CIRCUIT_E = np.array([[0.0], [0.5], [1.0]])


class TestCircuitRegression:
    def test_matrices_entry_for_entry(self, circuit_system):
        assert np.array_equal(circuit_system.A, CIRCUIT_A)
        assert np.array_equal(circuit_system.B, CIRCUIT_B)
        assert np.array_equal(circuit_system.C, CIRCUIT_C)
        assert np.array_equal(circuit_system.E, CIRCUIT_E)
        assert np.array_equal(circuit_system.F, np.zeros(2))
        assert np.array_equal(circuit_system.G, np.zeros((2, 1)))

    def test_smooth_signal(self, circuit_system):
        u = circuit_system.u
        assert u(0.0) == pytest.approx(-0.5)
        assert u(1.0 / 12.0) == pytest.approx(16.0 * math.sin(math.pi / 2.0) - 0.5)

    def test_discontinuous_variant(self):
        system = build_circuit(variant="discontinuous")
        assert not system.u_continuous
        assert np.array_equal(system.G, np.array([[0.0], [1.0]]))
        assert system.u(0.13) == 1.0 and system.u(0.30) == -1.0


class TestSolveMetricP:
    def test_circuit_metric(self):
        P = solve_metric_P(CIRCUIT_B, CIRCUIT_C)
        assert np.allclose(P, np.diag([1.0, 2.0, 1.0]), atol=1e-9)

    def test_self_dual_case(self, rng):
        C = rng.normal(size=(2, 4))
        P = solve_metric_P(C.T, C)
        assert np.allclose(P, np.eye(4), atol=1e-9)

    def test_inconsistent_system(self):
        B = np.array([[0.0], [0.0]])         # zero column
        C = np.array([[1.0, 2.0]])           # matching row nonzero
        with pytest.raises(NoMetricExists) as info:
            solve_metric_P(B, C)
        assert info.value.residual is not None

    def test_user_supplied_metric_verified(self, circuit_system):
        good = lcs_to_sweeping(circuit_system, P=np.diag([1.0, 2.0, 1.0]))
        assert np.allclose(good.P, np.diag([1.0, 2.0, 1.0]))
        with pytest.raises(NoMetricExists):
            lcs_to_sweeping(circuit_system, P=np.eye(3))


class TestMatrixSqrt:
    def test_circuit_metric_root(self):
        R = matrix_sqrt_pd(np.diag([1.0, 2.0, 1.0]))
        assert np.allclose(R, np.diag([1.0, math.sqrt(2.0), 1.0]), atol=1e-10)

    def test_identity(self):
        assert np.allclose(matrix_sqrt_pd(np.eye(3)), np.eye(3), atol=1e-14)

    def test_dense_spd(self):
        P = np.array([[2.0, 1.0], [1.0, 2.0]])
        R = matrix_sqrt_pd(P)
        expected = np.array([
            [(math.sqrt(3.0) + 1.0) / 2.0, (math.sqrt(3.0) - 1.0) / 2.0],
            [(math.sqrt(3.0) - 1.0) / 2.0, (math.sqrt(3.0) + 1.0) / 2.0],
        ])
        assert np.allclose(R, expected, atol=1e-12)
        assert np.linalg.norm(R @ R - P, 2) <= 1e-12

    def test_not_positive_definite(self):
        with pytest.raises(NotPositiveDefinite):
            matrix_sqrt_pd(np.array([[1.0, 2.0], [2.0, 1.0]]))
        with pytest.raises(NotPositiveDefinite):
            matrix_sqrt_pd(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestReformulation:
    def test_circuit_assembly(self, circuit_reform):
        assert np.allclose(circuit_reform.z0, np.zeros(3))
        assert np.allclose(circuit_reform.R, np.diag([1.0, math.sqrt(2.0), 1.0]),
                           atol=1e-12)
        assert circuit_reform.poly.lipschitz_const == 0.0  # G = 0: fixed set
        assert not circuit_reform.theory_out_of_scope

    def test_round_trip_metric_identities(self, circuit_reform, rng):
        R, R_inv, P = circuit_reform.R, circuit_reform.R_inv, circuit_reform.P
        assert np.linalg.norm(R @ R - P, 2) <= 1e-10 * np.linalg.norm(P, 2)
        assert np.linalg.norm(P @ CIRCUIT_B - CIRCUIT_C.T, 2) <= 1e-9
        for _ in range(20):
            x = rng.normal(size=3) * 5.0
            assert np.allclose(R_inv @ (R @ x), x, atol=1e-12)

    def test_drift_evaluation(self, circuit_reform):
        z = np.array([0.1, -0.2, 0.3])
        t = 0.21
        u = 16.0 * math.sin(6.0 * math.pi * t) - 0.5
        expected = circuit_reform.drift_matrix @ z \
            + circuit_reform.input_matrix @ np.array([u])
        assert np.allclose(circuit_reform.perturbation(t, z), expected, atol=1e-12)

    def test_pure_sweeping_when_autonomous_terms_vanish(self):
        system = LCSystem(A=np.zeros((2, 2)), B=np.eye(2), C=np.eye(2),
                          E=np.zeros((2, 1)), F=np.ones(2), G=np.zeros((2, 1)),
                          u=Constant(0.0), x0=np.zeros(2))
        reform = lcs_to_sweeping(system)
        for t in (0.0, 0.4, 0.9):
            assert np.allclose(reform.perturbation(t, np.array([0.3, -0.1])), 0.0)

    def test_infeasible_initial_state(self):
        system = LCSystem(A=np.zeros((1, 1)), B=np.eye(1), C=np.eye(1),
                          E=np.zeros((1, 1)), F=np.zeros(1), G=np.zeros((1, 1)),
                          u=Constant(0.0), x0=np.array([-0.5]))
        with pytest.raises(InfeasibleInitial):
            lcs_to_sweeping(system)

    def test_moving_set_lipschitz_bound_vs_sampled_hausdorff(self, rng):
        # K(t) = {y : C y + G u(t) >= 0} with Lipschitz u; the recorded constant
        # must dominate sampled Hausdorff quotients of S(t) = R K(t)
        C = np.array([[1.0, 0.4], [-0.3, 1.0]])
        B = C.T
        u = Sine(amplitude=0.8, frequency=1.0, offset=2.0)  # keeps K(0) around x0
        system = LCSystem(A=np.zeros((2, 2)), B=B, C=C, E=np.zeros((2, 1)),
                          F=np.zeros(2), G=np.array([[1.0], [0.5]]), u=u,
                          x0=np.array([1.0, 1.0]))
        reform = lcs_to_sweeping(system)
        assert np.isfinite(reform.poly.lipschitz_const)
        for _ in range(10):
            t, s = sorted(rng.uniform(0.0, 1.0, 2))
            if s - t < 1e-3:
                continue
            b_t = system.G @ np.atleast_1d(u(t)) + system.F
            b_s = system.G @ np.atleast_1d(u(s)) + system.F
            sampled = sampled_hausdorff_metric_polyhedra(
                reform.P, reform.R, C, b_t, b_s, rng, samples=15)
            assert sampled <= reform.poly.lipschitz_const * (s - t) + 1e-9

    def test_discontinuous_input_flagged(self):
        system = build_circuit(variant="discontinuous")
        reform = lcs_to_sweeping(system)
        assert reform.theory_out_of_scope
        assert not np.isfinite(reform.poly.lipschitz_const)

    def test_moving_polyhedron_run_certificates_match_oracle(self, rng):
        # G != 0: the constraint set genuinely moves; re-audit a full run's
        # projection steps against the enumeration oracle at their own times
        from oracle import (
            distance_to_metric_polyhedron,
            project_metric_polyhedron,
        )
        C = np.array([[1.0, 0.4], [-0.3, 1.0]])
        u = Sine(amplitude=0.8, frequency=1.0, offset=2.0)
        system = LCSystem(A=np.array([[0.0, 0.4], [-0.4, 0.0]]), B=C.T, C=C,
                          E=np.zeros((2, 1)), F=np.zeros(2),
                          G=np.array([[1.0], [0.5]]), u=u,
                          x0=np.array([1.0, 1.0]))
        reform = lcs_to_sweeping(system)
        sched = make_schedule(25, 1.0, 2.1, 1.05)
        traj = catching_up_run(reform.set_descriptor, reform.perturbation,
                               reform.z0, sched)
        for k in range(sched.n):
            t_next = float(traj.grid[k + 1])
            w = traj.nodes[k] + traj.drift_integrals[k]
            z = traj.nodes[k + 1]
            b = system.G @ np.atleast_1d(u(t_next)) + system.F
            d2, _, _ = project_metric_polyhedron(reform.P, reform.R,
                                                 system.C, b, w)
            assert float(np.sum((w - z) ** 2)) \
                <= d2 + sched.epsilon * (1.0 + 1e-9) + 1e-12
            assert distance_to_metric_polyhedron(reform.P, reform.R,
                                                 system.C, b, z) \
                <= sched.eta * (1.0 + 1e-9) + 1e-12


class TestRecoverOriginal:
    def test_change_of_variables_round_trip(self, circuit_reform, rng):
        for _ in range(10):
            x = rng.normal(size=3) * 3.0
            z = circuit_reform.R @ x
            assert np.allclose(circuit_reform.R_inv @ z, x, atol=1e-12)

    def test_stationary_interior_run_has_zero_multipliers(self):
        system = LCSystem(A=np.zeros((2, 2)), B=np.eye(2), C=np.eye(2),
                          E=np.zeros((2, 1)), F=np.ones(2), G=np.zeros((2, 1)),
                          u=Constant(0.0), x0=np.array([0.5, 0.5]))
        reform = lcs_to_sweeping(system)
        sched = make_schedule(20, 1.0)
        traj = catching_up_run(reform.set_descriptor, reform.perturbation,
                               reform.z0, sched)
        x_nodes, zeta = recover_original(reform, traj)
        assert np.allclose(x_nodes, np.array([0.5, 0.5]), atol=1e-12)
        assert np.all(zeta == 0.0)

    def test_circuit_run_complementarity(self, circuit_system, circuit_reform):
        sched = make_schedule(100, 1.0, 2.1, 1.05)
        traj = catching_up_run(circuit_reform.set_descriptor,
                               circuit_reform.perturbation,
                               circuit_reform.z0, sched)
        x_nodes, zeta = recover_original(circuit_reform, traj)
        worst = max(
            complementarity_residual(circuit_system, x_nodes[k], zeta[k],
                                     float(traj.grid[k]))
            for k in range(sched.n + 1)
        )
        assert worst <= 1e-2


class TestComplementarityResidual:
    def test_zero_multiplier_feasible(self, circuit_system):
        x = np.array([0.0, 2.0, 1.0])  # w = (1, 2) + Gu = (1, 2)
        assert complementarity_residual(circuit_system, x, np.zeros(2), 0.25) \
            == pytest.approx(0.0, abs=1e-12)

    def test_complementary_pair(self):
        system = LCSystem(A=np.zeros((2, 2)), B=np.eye(2), C=np.eye(2),
                          E=np.zeros((2, 1)), F=np.array([0.0, 2.0]),
                          G=np.zeros((2, 1)), u=Constant(0.0),
                          x0=np.zeros(2))
        # w = x + F = (0, 2); zeta = (1, 0) is exactly complementary
        assert complementarity_residual(system, np.zeros(2), [1.0, 0.0], 0.0) == 0.0

    def test_violation_measured(self):
        system = LCSystem(A=np.zeros((2, 2)), B=np.eye(2), C=np.eye(2),
                          E=np.zeros((2, 1)), F=np.array([0.3, 2.0]),
                          G=np.zeros((2, 1)), u=Constant(0.0),
                          x0=np.zeros(2))
        # w = (0.3, 2), zeta = (1, 0): min(1, 0.3) = 0.3 violates complementarity
        assert complementarity_residual(system, np.zeros(2), [1.0, 0.0], 0.0) \
            == pytest.approx(0.3)
