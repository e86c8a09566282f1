import numpy as np
import pytest

from pcac.bocf import model_step, realize
from pcac.mpc import (
    MpcWeights,
    QpProblem,
    QpSolveError,
    assemble_qp,
    build_prediction,
    difference_map,
    first_control,
    solve_qp,
)
from pcac.saturation import SaturationLimits
from test_bocf import stable_theta


def iterate_prediction(realization, x1, u_sequence, horizon):
    """Oracle: step the realization over the horizon and stack the outputs."""
    m = realization.n_inputs
    x = np.asarray(x1, dtype=float)
    outputs = []
    for i in range(horizon):
        u = u_sequence[i * m:(i + 1) * m]
        x_next, y = model_step(realization, x, u)
        outputs.append(y)
        x = x_next
    return np.concatenate(outputs)


def grid_refine(objective, lower, upper, rounds=4, points=41):
    """Oracle: shrinking grid search over a box."""
    lower = np.asarray(lower, dtype=float).copy()
    upper = np.asarray(upper, dtype=float).copy()
    best = None
    for _ in range(rounds):
        axes = [np.linspace(lower[i], upper[i], points) for i in range(lower.size)]
        mesh = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
        vals = np.array([objective(p) for p in pts])
        best = pts[int(np.argmin(vals))]
        span = (upper - lower) / (points - 1)
        lower = np.maximum(lower, best - 2 * span)
        upper = np.minimum(upper, best + 2 * span)
    return best


def projected_gradient(hess, lin, lower, upper, iters=40000):
    """Oracle: box-constrained projected gradient with fixed step."""
    step = 1.0 / np.linalg.eigvalsh(hess).max()
    x = np.clip(np.zeros(lin.size), lower, upper)
    for _ in range(iters):
        x = np.clip(x - step * (hess @ x + lin), lower, upper)
    return x


def scalar_fixture(u_max=None):
    """Two-step scalar problem with a known stationary point at 1/1.01."""
    ell, m, p = 2, 1, 1
    gamma = np.array([[1.0], [0.0]])  # c, c a with c a x1 = 0 by construction
    toeplitz = np.array([[0.0, 0.0], [1.0, 0.0]])  # first row zero, c b = 1
    weights = MpcWeights.from_scalars(
        horizon=ell, n_inputs=m, selector=np.eye(p),
        cost_to_go=1.0, terminal=1.0, move=0.01,
    )
    bound = 5.0 if u_max is None else u_max
    limits = SaturationLimits([-5.0], [bound], [-10.0], [10.0])
    from pcac.mpc import PredictionMatrices

    prediction = PredictionMatrices(
        gamma=gamma, toeplitz=toeplitz, horizon=ell, n_outputs=p, n_inputs=m
    )
    commands = np.array([0.0, 1.0])  # first command multiplies the zero row
    x1 = np.zeros(1)
    u_prev = np.zeros(1)
    return assemble_qp(prediction, x1, commands, weights, limits, u_prev)


class TestBuildPrediction:
    def test_horizon_one(self):
        real = realize(np.array([0.4, 1.7]), 1, 1, 1)
        pred = build_prediction(real, 1)
        assert np.array_equal(pred.gamma, real.c)
        assert np.array_equal(pred.toeplitz, np.zeros((1, 1)))

    def test_horizon_two(self):
        real = realize(np.array([0.4, 1.7]), 1, 1, 1)
        pred = build_prediction(real, 2)
        assert pred.gamma == pytest.approx(np.vstack([real.c, real.c @ real.a]))
        cb = float((real.c @ real.b)[0, 0])
        assert pred.toeplitz == pytest.approx(np.array([[0.0, 0.0], [cb, 0.0]]))

    def test_first_block_row_exactly_zero(self):
        rng = np.random.default_rng(31)
        theta = stable_theta(rng, 3, 2, 2)
        real = realize(theta, 3, 2, 2)
        pred = build_prediction(real, 7)
        assert np.array_equal(pred.toeplitz[:2, :], np.zeros((2, 14)))

    def test_constant_along_block_diagonals(self):
        rng = np.random.default_rng(32)
        theta = stable_theta(rng, 2, 2, 1)
        real = realize(theta, 2, 2, 1)
        ell, p, m = 6, 2, 1
        pred = build_prediction(real, ell)
        for i in range(1, ell):
            ref = pred.toeplitz[i * p:(i + 1) * p, 0:m]
            for j in range(1, ell - i):
                block = pred.toeplitz[(i + j) * p:(i + j + 1) * p, j * m:(j + 1) * m]
                assert np.array_equal(block, ref)

    def test_matches_iterated_simulation(self):
        rng = np.random.default_rng(33)
        for order, p, m in [(2, 1, 1), (3, 2, 1), (2, 2, 2)]:
            theta = stable_theta(rng, order, p, m)
            real = realize(theta, order, p, m)
            ell = 10
            pred = build_prediction(real, ell)
            x1 = rng.normal(size=order * p)
            u_seq = rng.normal(size=ell * m)
            stacked = pred.gamma @ x1 + pred.toeplitz @ u_seq
            oracle = iterate_prediction(real, x1, u_seq, ell)
            assert np.abs(stacked - oracle).max() <= 1e-10


class TestAssemble:
    def test_zero_cost_candidate_is_optimal(self):
        # commands equal to the free tracked response and u_prev already
        # stationary: the zero-move sequence has zero objective
        rng = np.random.default_rng(34)
        theta = stable_theta(rng, 2, 1, 1)
        real = realize(theta, 2, 1, 1)
        pred = build_prediction(real, 5)
        weights = MpcWeights.from_scalars(5, 1, np.eye(1), 1.0, 1.0, 0.5)
        limits = SaturationLimits([-2.0], [2.0], [-1.0], [1.0])
        x1 = rng.normal(size=2)
        u_prev = np.zeros(1)
        commands = (pred.gamma @ x1).reshape(-1)
        problem = assemble_qp(pred, x1, commands, weights, limits, u_prev)
        assert problem.objective(problem.zero_move) == pytest.approx(0.0, abs=1e-12)
        solution = solve_qp(problem)
        assert solution.u_sequence == pytest.approx(np.zeros(5), abs=1e-9)

    def test_horizon_one_returns_previous_control(self):
        real = realize(np.array([0.4, 1.7]), 1, 1, 1)
        pred = build_prediction(real, 1)
        weights = MpcWeights.from_scalars(1, 1, np.eye(1), 1.0, 1.0, 0.5)
        limits = SaturationLimits([-2.0], [2.0], [-1.0], [1.0])
        u_prev = np.array([0.7])
        problem = assemble_qp(pred, np.array([3.0]), np.array([5.0]),
                              weights, limits, u_prev)
        solution = solve_qp(problem)
        assert first_control(solution) == pytest.approx(u_prev, abs=1e-10)

    def test_two_step_scalar_closed_form(self):
        problem = scalar_fixture()
        solution = solve_qp(problem)
        assert solution.u_sequence[0] == pytest.approx(1.0 / 1.01, abs=1e-9)
        assert solution.u_sequence[1] == pytest.approx(1.0 / 1.01, abs=1e-9)
        assert first_control(solution)[0] == pytest.approx(1.0 / 1.01, abs=1e-9)

    def test_hessian_symmetric(self):
        rng = np.random.default_rng(35)
        theta = stable_theta(rng, 3, 2, 2)
        real = realize(theta, 3, 2, 2)
        pred = build_prediction(real, 8)
        weights = MpcWeights.from_scalars(8, 2, np.array([[1.0, 0.0]]),
                                          0.3, 0.7, [0.2, 0.4])
        limits = SaturationLimits([-1.0, -1.0], [1.0, 1.0],
                                  [-0.2, -0.2], [0.2, 0.2])
        x1 = rng.normal(size=6)
        problem = assemble_qp(pred, x1, rng.normal(size=8), weights, limits,
                              np.zeros(2))
        assert np.abs(problem.hessian - problem.hessian.T).max() <= 1e-12

    def test_rejects_non_pd_weights(self):
        real = realize(np.array([0.4, 1.7]), 1, 1, 1)
        pred = build_prediction(real, 3)
        weights = MpcWeights(
            cost_to_go=np.zeros((2, 2)), terminal=np.eye(1),
            move=np.eye(3), selector=np.eye(1),
        )
        limits = SaturationLimits([-1.0], [1.0], [-1.0], [1.0])
        with pytest.raises(ValueError):
            assemble_qp(pred, np.zeros(1), np.zeros(3), weights, limits, np.zeros(1))

    def test_rejects_wrong_command_count(self):
        real = realize(np.array([0.4, 1.7]), 1, 1, 1)
        pred = build_prediction(real, 3)
        weights = MpcWeights.from_scalars(3, 1, np.eye(1), 1.0, 1.0, 1.0)
        limits = SaturationLimits([-1.0], [1.0], [-1.0], [1.0])
        with pytest.raises(ValueError):
            assemble_qp(pred, np.zeros(1), np.zeros(2), weights, limits, np.zeros(1))


class TestSolve:
    def test_unconstrained_matches_direct_solve(self):
        rng = np.random.default_rng(36)
        n = 6
        mat = rng.normal(size=(n, n))
        hess = mat @ mat.T + n * np.eye(n)
        lin = rng.normal(size=n)
        big = 1e6 * np.ones(n)
        problem = QpProblem(
            hessian=hess, linear=lin, constant=0.0,
            ineq_matrix=np.vstack([np.eye(n), -np.eye(n)]),
            ineq_bound=np.concatenate([big, big]),
            zero_move=np.zeros(n), u_prev=np.zeros(1), horizon=n, n_inputs=1,
        )
        solution = solve_qp(problem)
        direct = np.linalg.solve(hess, -lin)
        assert solution.u_sequence == pytest.approx(direct, abs=1e-9)
        assert solution.active_set == ()

    def test_bounded_scalar_fixture_matches_grid_oracle(self):
        problem = scalar_fixture(u_max=0.5)
        solution = solve_qp(problem)
        oracle = grid_refine(problem.objective,
                             [-5.0, -5.0], [0.5, 0.5], rounds=6)
        assert np.abs(first_control(solution)[0] - oracle[0]) <= 1e-4
        assert solution.u_sequence[0] <= 0.5

    def test_random_box_instances_match_projected_gradient(self):
        rng = np.random.default_rng(37)
        for _ in range(20):
            n = int(rng.integers(2, 13))
            mat = rng.normal(size=(n, n))
            hess = mat @ mat.T + n * np.eye(n)
            lin = rng.normal(size=n)
            lower = -rng.uniform(0.1, 1.0, size=n)
            upper = rng.uniform(0.1, 1.0, size=n)
            problem = QpProblem(
                hessian=hess, linear=lin, constant=0.0,
                ineq_matrix=np.vstack([np.eye(n), -np.eye(n)]),
                ineq_bound=np.concatenate([upper, -lower]),
                zero_move=np.zeros(n), u_prev=np.zeros(1),
                horizon=n, n_inputs=1,
            )
            solution = solve_qp(problem)
            oracle = projected_gradient(hess, lin, lower, upper)
            assert np.abs(solution.u_sequence - oracle).max() <= 1e-6

    def test_kkt_residuals_certified(self):
        rng = np.random.default_rng(38)
        for _ in range(20):
            theta = stable_theta(rng, 2, 1, 1)
            real = realize(theta, 2, 1, 1)
            pred = build_prediction(real, 6)
            weights = MpcWeights.from_scalars(6, 1, np.eye(1), 1.0, 1.0, 0.05)
            limits = SaturationLimits([-0.8], [0.8], [-0.3], [0.3])
            x1 = rng.normal(size=2)
            commands = rng.normal(size=6)
            u_prev = rng.uniform(-0.8, 0.8, size=1)
            problem = assemble_qp(pred, x1, commands, weights, limits, u_prev)
            solution = solve_qp(problem)
            assert solution.stationarity <= 1e-8
            assert solution.primal <= 1e-8
            assert solution.complementarity <= 1e-8
            assert solution.cost <= problem.objective(problem.zero_move) + 1e-12

    def test_zero_move_candidate_always_feasible(self):
        rng = np.random.default_rng(39)
        limits = SaturationLimits([-0.8], [0.8], [-0.3], [0.3])
        for _ in range(200):
            theta = stable_theta(rng, 2, 1, 1)
            real = realize(theta, 2, 1, 1)
            pred = build_prediction(real, 4)
            weights = MpcWeights.from_scalars(4, 1, np.eye(1), 1.0, 1.0, 0.05)
            u_prev = rng.uniform(-0.8, 0.8, size=1)
            problem = assemble_qp(pred, rng.normal(size=2), rng.normal(size=4),
                                  weights, limits, u_prev)
            violation = problem.ineq_matrix @ problem.zero_move - problem.ineq_bound
            assert np.all(violation <= 0.0)

    def test_infeasible_start_raises(self):
        problem = scalar_fixture()
        bad = QpProblem(
            hessian=problem.hessian, linear=problem.linear, constant=0.0,
            ineq_matrix=problem.ineq_matrix, ineq_bound=problem.ineq_bound,
            zero_move=np.array([100.0, 100.0]), u_prev=problem.u_prev,
            horizon=2, n_inputs=1,
        )
        with pytest.raises(QpSolveError):
            solve_qp(bad)

    def test_prediction_consistency_open_loop(self):
        # unconstrained exact-model case: applying the optimized sequence
        # open loop reproduces the predicted tracked outputs
        rng = np.random.default_rng(40)
        theta = stable_theta(rng, 2, 1, 1)
        real = realize(theta, 2, 1, 1)
        ell = 8
        pred = build_prediction(real, ell)
        weights = MpcWeights.from_scalars(ell, 1, np.eye(1), 1.0, 1.0, 0.01)
        limits = SaturationLimits([-100.0], [100.0], [-100.0], [100.0])
        x1 = rng.normal(size=2)
        commands = rng.normal(size=ell)
        problem = assemble_qp(pred, x1, commands, weights, limits, np.zeros(1))
        solution = solve_qp(problem)
        predicted = pred.gamma @ x1 + pred.toeplitz @ solution.u_sequence
        replayed = iterate_prediction(real, x1, solution.u_sequence, ell)
        assert np.abs(predicted - replayed).max() <= 1e-8


class TestDifferenceMap:
    def test_structure(self):
        d = difference_map(3, 2)
        u = np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
        assert d @ u == pytest.approx([1.0, 2.0, 2.0, 2.0, 2.0, 2.0])

    def test_warm_start_reused(self):
        problem = scalar_fixture()
        cold = solve_qp(problem)
        warm = solve_qp(problem, start=cold.u_sequence)
        assert warm.u_sequence == pytest.approx(cold.u_sequence, abs=1e-10)
        assert warm.iterations <= cold.iterations
