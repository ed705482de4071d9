#!/usr/bin/env python3
"""
Tests for the masked projected-gradient solver.
Covers the objective and its gradient, single fixed and Armijo steps,
monotone error traces for every constraint kind, and the closed-form fixed
points reached under full and partial observation.
"""

import numpy as np
import pytest

from spectralfit.core import ObservationSet, apply_mask, norm, svd
from spectralfit.projections import is_feasible, project
from spectralfit.schema import (
    ArmijoRule,
    FixedStep,
    FrobeniusBall,
    KyFanBall,
    NuclearBall,
    Orthonormal,
    RankAtMost,
    ScaledOrthonormal,
    SolverConfig,
    SpectralBall,
)
from spectralfit.solver import (
    armijo_step,
    fixed_step_iterate,
    masked_error,
    masked_frobenius_solution,
    objective_gradient,
    objective_value,
    solve_approximation,
)

from .matrices import low_rank, random_mask


def test_masked_error_examples():
    m = np.array([[1.0, 2.0], [3.0, 4.0]])
    assert masked_error(m, m, ObservationSet.full(2, 2)) == 0.0
    assert masked_error(np.ones((2, 2)), m, ObservationSet.empty(2, 2)) == 0.0
    x = np.array([[1.0, 0.0], [0.0, 0.0]])
    assert masked_error(x, np.zeros((2, 2)), ObservationSet.from_indices(2, 2, [(0, 0)])) == 1.0
    with pytest.raises(ValueError, match="Shape mismatch"):
        masked_error(np.zeros((2, 3)), np.zeros((2, 2)), ObservationSet.full(2, 2))


def test_objective_gradient_examples(rng):
    m = rng.standard_normal((3, 4))
    x = rng.standard_normal((3, 4))
    np.testing.assert_array_equal(objective_gradient(m, m, random_mask(rng, 3, 4, 0.5)), np.zeros((3, 4)))
    np.testing.assert_allclose(objective_gradient(x, m, ObservationSet.full(3, 4)), x - m)


def test_objective_gradient_matches_central_differences(rng):
    h = 1e-5
    for _ in range(20):
        m = rng.standard_normal((4, 5))
        x = rng.standard_normal((4, 5))
        omega = random_mask(rng, 4, 5, 0.6)
        grad = objective_gradient(x, m, omega)
        for _ in range(20):
            d = rng.standard_normal((4, 5))
            fd = (objective_value(x + h * d, m, omega) - objective_value(x - h * d, m, omega)) / (2 * h)
            exact = float(np.sum(grad * d))
            assert abs(fd - exact) <= 1e-6 * max(1.0, abs(exact))


def test_fixed_step_iterate_examples(rng):
    m = rng.standard_normal((4, 4))
    c = NuclearBall(2.0)
    x = project(rng.standard_normal((4, 4)), c).x
    np.testing.assert_allclose(fixed_step_iterate(x, m, ObservationSet.full(4, 4), c), project(m, c).x, atol=1e-12)
    np.testing.assert_array_equal(fixed_step_iterate(x, m, ObservationSet.empty(4, 4), c), project(x, c).x)
    inside = project(m, c).x
    np.testing.assert_allclose(fixed_step_iterate(inside, inside, random_mask(rng, 4, 4, 0.5), c), inside,
                               atol=1e-12)


def test_armijo_step_at_stationary_point_accepts_first_step(rng):
    m = project(rng.standard_normal((4, 4)), SpectralBall(1.0)).x
    step = armijo_step(m, m, random_mask(rng, 4, 4, 0.5), SpectralBall(1.0))
    assert step.accepted
    assert step.halvings == 0
    assert step.mu == 1.0
    np.testing.assert_array_equal(step.x, m)


def test_armijo_full_step_accepted_for_convex_balls(rng):
    rule = ArmijoRule()
    for _ in range(30):
        m = 2.0 * rng.standard_normal((4, 5))
        for c in [FrobeniusBall(1.0), SpectralBall(1.0), NuclearBall(2.0), KyFanBall(2, 1.5)]:
            x = project(rng.standard_normal((4, 5)), c).x
            omega = ObservationSet.full(4, 5)
            step = armijo_step(x, m, omega, c, rule)
            assert step.accepted and step.halvings == 0
            grad = objective_gradient(x, m, omega)
            assert objective_value(step.x, m, omega) <= (objective_value(x, m, omega)
                                                         - rule.sigma * np.sum(grad * (x - step.x)) + 1e-12)


def test_armijo_step_never_increases_objective(rng):
    rules = [ArmijoRule(), ArmijoRule(mu_tilde=50.0, max_halvings=2), ArmijoRule(sigma=0.9, max_halvings=0)]
    for _ in range(40):
        m = 2.0 * rng.standard_normal((5, 4))
        omega = random_mask(rng, 5, 4, 0.5)
        for c in [NuclearBall(1.5), RankAtMost(1), Orthonormal()]:
            x = project(apply_mask(m, omega), c).x
            for rule in rules:
                step = armijo_step(x, m, omega, c, rule)
                assert objective_value(step.x, m, omega) <= objective_value(x, m, omega) + 1e-12
                if not step.accepted:
                    assert step.halvings <= rule.max_halvings


def test_armijo_step_without_improvement_stays_put_with_positive_step():
    # Only (1, 1) is observed; a step of 20 swaps the rank-one factor and overshoots badly.
    x = np.diag([10.0, 0.0])
    m = np.diag([0.0, 1.0])
    omega = ObservationSet.from_indices(2, 2, [(1, 1)])
    step = armijo_step(x, m, omega, RankAtMost(1), ArmijoRule(mu_tilde=20.0, max_halvings=0))
    assert not step.accepted
    assert step.mu == 20.0
    np.testing.assert_array_equal(step.x, x)


def test_full_observation_rank_constraint_is_truncated_svd(rng):
    m = rng.standard_normal((6, 4))
    solution = solve_approximation(m, ObservationSet.full(6, 4), RankAtMost(2))
    factors = svd(m)
    expected = (factors.u[:, :2] * factors.sigma[:2]) @ factors.vt[:2]
    np.testing.assert_allclose(solution.x, expected, atol=1e-10)
    assert solution.trace.converged
    assert solution.trace.iterations == 1


def test_full_observation_closed_forms(rng):
    m = 3.0 * rng.standard_normal((5, 3))
    full = ObservationSet.full(5, 3)

    frob = solve_approximation(m, full, FrobeniusBall(1.0)).x
    np.testing.assert_allclose(frob, m / np.linalg.norm(m), atol=1e-8)

    factors = svd(m)
    capped = solve_approximation(m, full, SpectralBall(1.0)).x
    np.testing.assert_allclose(capped, factors.reconstruct(np.minimum(factors.sigma, 1.0)), atol=1e-8)

    procrustes = solve_approximation(m, full, Orthonormal()).x
    np.testing.assert_allclose(procrustes, factors.u @ factors.vt, atol=1e-8)


def test_masked_frobenius_fixed_point(rng):
    for _ in range(10):
        m = rng.standard_normal((5, 5))
        omega = random_mask(rng, 5, 5, 0.6)
        lam = 0.5 * np.linalg.norm(apply_mask(m, omega))
        solution = solve_approximation(m, omega, FrobeniusBall(lam))
        expected = apply_mask(m, omega) / np.linalg.norm(apply_mask(m, omega)) * lam
        np.testing.assert_allclose(solution.x, expected, atol=1e-6)
        np.testing.assert_allclose(masked_frobenius_solution(m, omega, lam), expected, atol=1e-12)


def test_masked_frobenius_solution_inside_ball():
    m = np.array([[1.0, 2.0], [3.0, 4.0]])
    omega = ObservationSet.from_indices(2, 2, [(0, 0)])
    np.testing.assert_array_equal(masked_frobenius_solution(m, omega, 5.0), [[1.0, 0.0], [0.0, 0.0]])


def test_nuclear_completion_radius_reaches_zero_error(rng):
    m = low_rank(rng, 8, 8, 1)
    omega = random_mask(rng, 8, 8, 0.6)
    solution = solve_approximation(m, omega, NuclearBall(1.5 * norm(m, "nuclear")))
    assert solution.trace.is_monotone()
    assert solution.trace.converged
    assert solution.trace.final_error <= 1e-5
    assert solution.trace.final_error <= solution.trace.errors[0]


def constraint_kinds(cols):
    return [
        FrobeniusBall(1.5),
        SpectralBall(1.0),
        NuclearBall(2.0),
        KyFanBall(2, 1.5),
        RankAtMost(1),
        Orthonormal(),
        ScaledOrthonormal(tuple(np.linspace(0.5, 1.5, cols))),
    ]


@pytest.mark.parametrize("c", constraint_kinds(4), ids=lambda c: c.kind)
def test_error_trace_is_monotone(rng, c):
    cfg = SolverConfig(max_iters=50)
    for _ in range(100):
        m = 2.0 * rng.standard_normal((5, 4))
        omega = random_mask(rng, 5, 4, 0.5)
        solution = solve_approximation(m, omega, c, cfg)
        trace = solution.trace
        assert trace.is_monotone(), trace.errors
        assert len(trace.errors) == trace.iterations + 1
        assert is_feasible(solution.x, c)


def test_armijo_trace_is_monotone(rng):
    cfg = SolverConfig(step_mode=ArmijoRule(), max_iters=50)
    for _ in range(30):
        m = 2.0 * rng.standard_normal((5, 4))
        omega = random_mask(rng, 5, 4, 0.5)
        for c in [NuclearBall(2.0), RankAtMost(1)]:
            assert solve_approximation(m, omega, c, cfg).trace.is_monotone()


def test_feasible_zero_error_point_is_fixed(rng):
    for c in [NuclearBall(3.0), RankAtMost(2), Orthonormal()]:
        x_star = project(rng.standard_normal((5, 3)), c).x
        omega = random_mask(rng, 5, 3, 0.5)
        np.testing.assert_allclose(fixed_step_iterate(x_star, x_star, omega, c), x_star, atol=1e-10)


def test_unit_step_is_no_worse_than_armijo(rng):
    budget = dict(tol=1e-300, rel_tol=1e-300, max_iters=200)
    fixed_cfg = SolverConfig(step_mode=FixedStep(1.0), **budget)
    armijo_cfg = SolverConfig(step_mode=ArmijoRule(), **budget)
    for i in range(50):
        m = 2.0 * rng.standard_normal((5, 5))
        omega = random_mask(rng, 5, 5, 0.6)
        observed = apply_mask(m, omega)
        c = [NuclearBall(0.5 * norm(observed, "nuclear")),
             SpectralBall(0.5 * norm(observed, "spectral")),
             KyFanBall(2, 0.5 * norm(observed, "kyfan", 2)),
             FrobeniusBall(0.5 * norm(observed, "frobenius"))][i % 4]
        fixed = solve_approximation(m, omega, c, fixed_cfg).trace.final_error
        armijo = solve_approximation(m, omega, c, armijo_cfg).trace.final_error
        assert fixed <= armijo + 1e-8


def test_max_iters_exhaustion_is_reported(rng):
    m = rng.standard_normal((6, 6))
    omega = random_mask(rng, 6, 6, 0.5)
    c = NuclearBall(0.5 * norm(apply_mask(m, omega), "nuclear"))
    solution = solve_approximation(m, omega, c, SolverConfig(max_iters=1))
    assert not solution.trace.converged
    assert solution.trace.iterations == 1
    assert solution.trace.steps == [1.0]


def test_warm_start_is_projected(rng):
    m = rng.standard_normal((4, 4))
    omega = random_mask(rng, 4, 4, 0.5)
    c = SpectralBall(0.5)
    x0 = 10.0 * rng.standard_normal((4, 4))
    solution = solve_approximation(m, omega, c, SolverConfig(max_iters=1), x0=x0)
    assert solution.trace.errors[0] == pytest.approx(masked_error(project(x0, c).x, m, omega))
    with pytest.raises(ValueError, match="Shape mismatch"):
        solve_approximation(m, omega, c, x0=np.zeros((3, 4)))


def test_empty_observation_converges_immediately():
    solution = solve_approximation(np.ones((3, 3)), ObservationSet.empty(3, 3), NuclearBall(1.0))
    assert solution.trace.converged
    assert solution.trace.iterations == 0
    np.testing.assert_array_equal(solution.x, np.zeros((3, 3)))


def test_solver_config_validation():
    with pytest.raises(ValueError, match="tol"):
        SolverConfig(tol=0.0)
    with pytest.raises(ValueError, match="max_iters"):
        SolverConfig(max_iters=0)
    with pytest.raises(ValueError, match="sigma"):
        ArmijoRule(sigma=1.0)
    with pytest.raises(ValueError, match="mu"):
        FixedStep(mu=-1.0)
    with pytest.raises(ValueError, match="step mode"):
        SolverConfig(step_mode="fixed")
