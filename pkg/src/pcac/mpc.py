"""Receding-horizon quadratic program over the identified model.

The horizon-stacked output prediction is affine in the stacked control
sequence U; tracking and move-size costs give a strictly convex dense
QP with box constraints on U and on its per-step differences.  The
solver is a primal active-set method certified by KKT residuals.
"""

from dataclasses import dataclass

import numpy as np


class QpSolveError(RuntimeError):
    """Raised when the QP iteration cannot certify a solution."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


@dataclass
class PredictionMatrices:
    """Stacked prediction Y = gamma @ x1 + toeplitz @ U over the horizon."""

    gamma: np.ndarray
    toeplitz: np.ndarray
    horizon: int
    n_outputs: int
    n_inputs: int


@dataclass
class MpcWeights:
    """Tracking and move-size weights plus the command-output selector.

    cost_to_go weights the first horizon-1 tracked outputs, terminal the
    last one; move weights the stacked control differences.  selector
    maps the model output to the tracked (command-following) output.
    """

    cost_to_go: np.ndarray
    terminal: np.ndarray
    move: np.ndarray
    selector: np.ndarray

    def __post_init__(self):
        self.cost_to_go = np.atleast_2d(np.asarray(self.cost_to_go, dtype=float))
        self.terminal = np.atleast_2d(np.asarray(self.terminal, dtype=float))
        self.move = np.atleast_2d(np.asarray(self.move, dtype=float))
        self.selector = np.atleast_2d(np.asarray(self.selector, dtype=float))

    @property
    def n_tracked(self):
        return self.selector.shape[0]

    @classmethod
    def from_scalars(cls, horizon, n_inputs, selector, cost_to_go, terminal, move):
        """Diagonal weights from scalars (or a per-channel move vector)."""
        selector = np.atleast_2d(np.asarray(selector, dtype=float))
        p_t = selector.shape[0]
        move_vec = np.atleast_1d(np.asarray(move, dtype=float))
        if move_vec.size == 1:
            move_vec = np.full(n_inputs, move_vec[0])
        if move_vec.size != n_inputs:
            raise ValueError(
                f"move weight must be scalar or length {n_inputs}, got {move_vec.size}"
            )
        return cls(
            cost_to_go=float(cost_to_go) * np.eye((horizon - 1) * p_t),
            terminal=float(terminal) * np.eye(p_t),
            move=np.diag(np.tile(move_vec, horizon)),
            selector=selector,
        )


@dataclass
class QpProblem:
    """Dense strictly convex QP: min 0.5 U'H U + g'U + const, G U <= h."""

    hessian: np.ndarray
    linear: np.ndarray
    constant: float
    ineq_matrix: np.ndarray
    ineq_bound: np.ndarray
    zero_move: np.ndarray
    u_prev: np.ndarray
    horizon: int
    n_inputs: int

    def objective(self, u):
        return float(0.5 * u @ self.hessian @ u + self.linear @ u + self.constant)


@dataclass
class QpSolution:
    """Certified optimizer with its active set and KKT residuals."""

    u_sequence: np.ndarray
    active_set: tuple
    iterations: int
    stationarity: float
    primal: float
    complementarity: float
    cost: float
    n_inputs: int


def build_prediction(realization, horizon):
    """Observability-style stack gamma and block-Toeplitz input map.

    gamma's block row i is c a^(i-1); the Toeplitz matrix carries the
    Markov blocks c a^(i-1) b strictly below its zero first block row.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    ell = int(horizon)
    p = realization.n_outputs
    m = realization.n_inputs
    rows = [realization.c]
    for _ in range(ell - 1):
        rows.append(rows[-1] @ realization.a)
    gamma = np.vstack(rows)
    markov = np.zeros((ell, p, m))
    for i in range(1, ell):
        markov[i] = rows[i - 1] @ realization.b
    shift = np.arange(ell)[:, None] - np.arange(ell)[None, :]
    blocks = markov[np.clip(shift, 0, ell - 1)]
    blocks[shift <= 0] = 0.0
    toeplitz = blocks.transpose(0, 2, 1, 3).reshape(ell * p, ell * m)
    return PredictionMatrices(
        gamma=gamma, toeplitz=toeplitz, horizon=ell, n_outputs=p, n_inputs=m
    )


def difference_map(horizon, n_inputs):
    """Lower-bidiagonal map D with (D U)_i = u_i - u_{i-1} (u_0 external)."""
    n = horizon * n_inputs
    return np.eye(n) - np.eye(n, k=-n_inputs)


def _check_positive_definite(mat, name):
    try:
        np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        raise ValueError(f"{name} weight must be positive definite") from None


def assemble_qp(prediction, x1, commands, weights, limits, u_prev):
    """Expand the tracking and move-size costs into a dense QP over U.

    The tracked prediction selector @ (gamma x1 + toeplitz U) is matched
    to the stacked future commands under block-diag(cost_to_go, terminal);
    the difference map D and offset d (carrying u_prev in its first block)
    turn the move-size cost and rate constraints into functions of U.
    """
    ell = prediction.horizon
    p = prediction.n_outputs
    m = prediction.n_inputs
    p_t = weights.n_tracked
    if weights.selector.shape[1] != p:
        raise ValueError(
            f"selector must have {p} columns, got {weights.selector.shape[1]}"
        )
    if limits.size != m:
        raise ValueError(f"limits cover {limits.size} channels, model has {m}")
    u_prev = np.asarray(u_prev, dtype=float)
    if u_prev.shape != (m,):
        raise ValueError(f"u_prev must have shape ({m},), got {u_prev.shape}")
    commands = np.asarray(commands, dtype=float).reshape(-1)
    if commands.size != ell * p_t:
        raise ValueError(
            f"need {ell * p_t} stacked commands ({ell} x {p_t}), got {commands.size}"
        )
    x1 = np.asarray(x1, dtype=float)
    if x1.shape != (prediction.gamma.shape[1],):
        raise ValueError(
            f"state must have shape ({prediction.gamma.shape[1]},), got {x1.shape}"
        )
    if weights.cost_to_go.shape != ((ell - 1) * p_t, (ell - 1) * p_t):
        raise ValueError("cost_to_go weight has the wrong shape for this horizon")
    if weights.terminal.shape != (p_t, p_t):
        raise ValueError("terminal weight has the wrong shape")
    if weights.move.shape != (ell * m, ell * m):
        raise ValueError("move weight has the wrong shape for this horizon")
    if ell > 1:
        _check_positive_definite(weights.cost_to_go, "cost_to_go")
    _check_positive_definite(weights.terminal, "terminal")
    _check_positive_definite(weights.move, "move")

    # tracked free response and tracked input map
    free = (prediction.gamma @ x1).reshape(ell, p) @ weights.selector.T
    free_t = free.reshape(ell * p_t)
    t3 = prediction.toeplitz.reshape(ell, p, ell * m)
    toeplitz_t = np.einsum("qp,lpj->lqj", weights.selector, t3).reshape(
        ell * p_t, ell * m
    )

    q_full = np.zeros((ell * p_t, ell * p_t))
    if ell > 1:
        q_full[: (ell - 1) * p_t, : (ell - 1) * p_t] = weights.cost_to_go
    q_full[(ell - 1) * p_t:, (ell - 1) * p_t:] = weights.terminal

    diff = difference_map(ell, m)
    offset = np.zeros(ell * m)
    offset[:m] = u_prev
    track_err = free_t - commands

    qt = q_full @ toeplitz_t
    rd = weights.move @ diff
    hessian = 2.0 * (toeplitz_t.T @ qt + diff.T @ rd)
    hessian = 0.5 * (hessian + hessian.T)
    linear = 2.0 * (qt.T @ track_err - rd.T @ offset)
    constant = float(track_err @ q_full @ track_err + offset @ weights.move @ offset)

    n = ell * m
    u_min = np.tile(limits.u_min, ell)
    u_max = np.tile(limits.u_max, ell)
    du_min = np.tile(limits.du_min, ell)
    du_max = np.tile(limits.du_max, ell)
    eye = np.eye(n)
    ineq_matrix = np.vstack([eye, -eye, diff, -diff])
    ineq_bound = np.concatenate(
        [u_max, -u_min, du_max + offset, -(du_min + offset)]
    )
    return QpProblem(
        hessian=hessian,
        linear=linear,
        constant=constant,
        ineq_matrix=ineq_matrix,
        ineq_bound=ineq_bound,
        zero_move=np.tile(u_prev, ell),
        u_prev=u_prev.copy(),
        horizon=ell,
        n_inputs=m,
    )


def _kkt_residuals(problem, x, multipliers):
    grad = problem.hessian @ x + problem.linear + problem.ineq_matrix.T @ multipliers
    violation = problem.ineq_matrix @ x - problem.ineq_bound
    stationarity = float(np.abs(grad).max()) if grad.size else 0.0
    primal = float(max(0.0, violation.max())) if violation.size else 0.0
    complementarity = (
        float(np.abs(multipliers * violation).max()) if violation.size else 0.0
    )
    return stationarity, primal, complementarity


def solve_qp(problem, start=None, max_iterations=None, tolerance=1e-8):
    """Primal active-set solution of a strictly convex inequality QP.

    Starts from a feasible point (the always-feasible zero-move
    candidate unless a feasible warm start is supplied), moves along
    equality-constrained Newton steps, adds the first blocking
    constraint (smallest index on ties), and drops the smallest-index
    constraint with a negative multiplier.  The returned solution is
    certified by its KKT residuals; failure to certify raises.
    """
    hess = problem.hessian
    lin = problem.linear
    gmat = problem.ineq_matrix
    hvec = problem.ineq_bound
    n = hess.shape[0]
    n_rows = gmat.shape[0]
    if max_iterations is None:
        max_iterations = 20 * n + 200

    x = problem.zero_move.copy()
    if np.any(gmat @ x - hvec > 0.0):
        raise QpSolveError("zero-move candidate is infeasible; check bounds and u_prev")
    if start is not None:
        cand = np.asarray(start, dtype=float)
        if cand.shape == (n,) and np.all(gmat @ cand - hvec <= 1e-12):
            x = cand.copy()

    working = []
    iterations = 0
    lam = np.zeros(0)
    for iterations in range(1, max_iterations + 1):
        k = len(working)
        if k:
            gw = gmat[working]
            kkt = np.zeros((n + k, n + k))
            kkt[:n, :n] = hess
            kkt[:n, n:] = gw.T
            kkt[n:, :n] = gw
            rhs = np.concatenate([-(hess @ x + lin), np.zeros(k)])
            try:
                sol = np.linalg.solve(kkt, rhs)
            except np.linalg.LinAlgError:
                raise QpSolveError(
                    "singular KKT system (degenerate active constraints)"
                ) from None
            step = sol[:n]
            lam = sol[n:]
        else:
            step = np.linalg.solve(hess, -(hess @ x + lin))
            lam = np.zeros(0)

        if np.abs(step).max() <= 1e-12 * (1.0 + np.abs(x).max()):
            negative = [working[i] for i in range(k) if lam[i] < -1e-10]
            if not negative:
                break
            drop = min(negative)  # smallest-index rule keeps runs deterministic
            lam = np.delete(lam, working.index(drop))
            working.remove(drop)
            continue

        g_step = gmat @ step
        slack = hvec - gmat @ x
        movable = g_step > 1e-13
        if working:
            movable[working] = False
        ratios = np.full(n_rows, np.inf)
        ratios[movable] = np.maximum(slack[movable], 0.0) / g_step[movable]
        blocking = int(np.argmin(ratios)) if movable.any() else -1
        alpha = 1.0
        if blocking >= 0 and ratios[blocking] < 1.0 - 1e-14:
            alpha = ratios[blocking]
        else:
            blocking = -1
        x = x + alpha * step
        if blocking >= 0:
            working.append(blocking)
            working.sort()
    else:
        mu = np.zeros(n_rows)
        mu[working] = lam
        residuals = _kkt_residuals(problem, x, mu)
        raise QpSolveError(
            f"active-set iteration cap {max_iterations} exceeded; "
            f"residuals (stationarity, primal, complementarity) = {residuals}",
            residuals=residuals,
        )

    mu = np.zeros(n_rows)
    if len(working):
        mu[working] = np.maximum(lam, 0.0)
    stationarity, primal, complementarity = _kkt_residuals(problem, x, mu)
    if max(stationarity, primal, complementarity) > tolerance:
        raise QpSolveError(
            "KKT residuals exceed tolerance: "
            f"stationarity={stationarity:.3e}, primal={primal:.3e}, "
            f"complementarity={complementarity:.3e}",
            residuals=(stationarity, primal, complementarity),
        )
    cost = problem.objective(x)
    if cost > problem.objective(problem.zero_move) + 1e-9 * (1.0 + abs(cost)):
        raise QpSolveError("solution worse than the zero-move candidate")
    return QpSolution(
        u_sequence=x,
        active_set=tuple(working),
        iterations=iterations,
        stationarity=stationarity,
        primal=primal,
        complementarity=complementarity,
        cost=cost,
        n_inputs=problem.n_inputs,
    )


def first_control(solution):
    """First control of the optimized sequence; the rest is discarded."""
    return solution.u_sequence[: solution.n_inputs].copy()
