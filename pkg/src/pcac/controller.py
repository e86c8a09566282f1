"""Per-loop adaptive controller: identify, realize, predict, optimize.

Each sample the controller refits the ARX coefficients from the new
measurement, realizes them in observable canonical form, reconstructs
the model state from the IO history, and solves the receding-horizon
QP; the first optimized control is returned as the request.  The loop
runner reports back the implemented (post-saturation) control, which
is what the history absorbs.
"""

from dataclasses import dataclass

import numpy as np

from .bocf import realize, reconstruct_state
from .mpc import MpcWeights, assemble_qp, build_prediction, first_control, solve_qp
from .rls import (
    CoefficientEstimate,
    ForgettingConfig,
    ForgettingState,
    IoHistory,
    build_regressor,
    forgetting_factor,
    identification_error,
    rls_update,
)
from .saturation import SaturationLimits, saturate_magnitude


class ControllerError(RuntimeError):
    """Raised when a step produces a non-finite value or a sub-solver fails."""


@dataclass
class DitherSpec:
    """Optional seeded binary excitation added to the request while warming up."""

    amplitude: float = 0.0
    steps: int = 0
    seed: int = 0


@dataclass
class PcacConfig:
    """Everything one control loop needs.

    output_map and input_map index into the plant's measured output and
    input vectors; weights.selector picks the command-following rows of
    the loop's own output.
    """

    model_order: int
    horizon: int
    weights: MpcWeights
    limits: SaturationLimits
    output_map: tuple
    input_map: tuple
    theta0_scale: float = 0.01
    covariance0_scale: float = 1e5
    forgetting: ForgettingConfig = ForgettingConfig(enabled=False)
    dither: DitherSpec = None
    name: str = "loop"

    def __post_init__(self):
        self.output_map = tuple(int(i) for i in self.output_map)
        self.input_map = tuple(int(i) for i in self.input_map)
        if len(set(self.output_map)) != len(self.output_map):
            raise ValueError("output_map indices must be distinct")
        if len(set(self.input_map)) != len(self.input_map):
            raise ValueError("input_map indices must be distinct")
        if self.model_order < 1:
            raise ValueError("model order must be >= 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.covariance0_scale <= 0.0:
            raise ValueError("initial covariance scale must be positive")
        p = len(self.output_map)
        m = len(self.input_map)
        if self.weights.selector.shape[1] != p:
            raise ValueError(
                f"weights.selector must have {p} columns for this output map"
            )
        if self.limits.size != m:
            raise ValueError(f"limits must cover {m} input channels")
        # the controller starts from u = 0, which must be a legal control
        if np.any(self.limits.u_min > 0.0) or np.any(self.limits.u_max < 0.0):
            raise ValueError("magnitude bounds must contain zero (cold-start control)")
        self.forgetting.validate_dims(p)

    @property
    def n_outputs(self):
        return len(self.output_map)

    @property
    def n_inputs(self):
        return len(self.input_map)

    @property
    def n_tracked(self):
        return self.weights.n_tracked

    @property
    def coefficient_count(self):
        p, m = self.n_outputs, self.n_inputs
        return self.model_order * p * (m + p)


class PcacController:
    """One adaptive loop; step() must be followed by absorb() each sample."""

    def __init__(self, config):
        self.config = config
        n = config.coefficient_count
        self.estimate = CoefficientEstimate(
            theta=config.theta0_scale * np.ones(n),
            psi=config.covariance0_scale * np.eye(n),
        )
        self.history = IoHistory(config.model_order, config.n_outputs, config.n_inputs)
        self.forgetting_state = ForgettingState(config.forgetting.window_total)
        self.u_prev = np.zeros(config.n_inputs)
        self.step_count = 0
        self.last_beta = 1.0
        self.last_qp_iterations = 0
        self.last_qp_cost = 0.0
        self._warm = None
        self._rng = None
        if config.dither is not None and config.dither.steps > 0:
            self._rng = np.random.default_rng(config.dither.seed)

    @property
    def theta_norm(self):
        return float(np.linalg.norm(self.estimate.theta))

    def _shifted_start(self):
        """Previous solution shifted one step and projected into the new box."""
        if self._warm is None:
            return None
        m = self.config.n_inputs
        lim = self.config.limits
        guess = np.concatenate([self._warm[m:], self._warm[-m:]])
        prev = self.u_prev
        blocks = guess.reshape(self.config.horizon, m)
        for i in range(self.config.horizon):
            row = np.clip(blocks[i], lim.u_min, lim.u_max)
            row = np.clip(row, prev + lim.du_min, prev + lim.du_max)
            blocks[i] = row
            prev = row
        return blocks.reshape(-1)

    def step(self, y, commands):
        """Compute the requested control for the current measurement.

        commands stacks the next horizon command vectors (the preview).
        The estimate and forgetting state advance here; the IO history
        advances in absorb() once the implemented control is known.
        """
        cfg = self.config
        y = np.asarray(y, dtype=float)
        if y.shape != (cfg.n_outputs,):
            raise ValueError(f"measurement must have shape ({cfg.n_outputs},)")
        if not np.isfinite(y).all():
            raise ControllerError(
                f"{cfg.name}: non-finite measurement at step {self.step_count}"
            )
        phi = build_regressor(self.history)
        error = identification_error(phi, self.estimate, y)
        self.forgetting_state.push(error)
        beta = forgetting_factor(self.forgetting_state, cfg.forgetting, self.step_count)
        self.estimate = rls_update(self.estimate, phi, y, beta)
        self.last_beta = beta

        realization = realize(
            self.estimate.theta, cfg.model_order, cfg.n_outputs, cfg.n_inputs
        )
        x_now = reconstruct_state(self.history, y, self.estimate.theta)
        x_next = realization.a @ x_now + realization.b @ self.u_prev
        prediction = build_prediction(realization, cfg.horizon)
        try:
            problem = assemble_qp(
                prediction, x_next, commands, cfg.weights, cfg.limits, self.u_prev
            )
            solution = solve_qp(problem, start=self._shifted_start())
        except (np.linalg.LinAlgError, RuntimeError) as exc:
            raise ControllerError(
                f"{cfg.name}: receding-horizon solve failed at step "
                f"{self.step_count}: {exc}"
            ) from exc
        self._warm = solution.u_sequence
        self.last_qp_iterations = solution.iterations
        self.last_qp_cost = solution.cost
        u_req = first_control(solution)
        if self._rng is not None and self.step_count < cfg.dither.steps:
            flips = self._rng.integers(0, 2, size=cfg.n_inputs) * 2 - 1
            u_req = saturate_magnitude(
                u_req + cfg.dither.amplitude * flips, cfg.limits
            )
        if not np.isfinite(u_req).all():
            raise ControllerError(
                f"{cfg.name}: non-finite control request at step {self.step_count}"
            )
        return u_req

    def absorb(self, y, u_implemented):
        """Record the measurement and the control the plant actually received."""
        u_implemented = np.asarray(u_implemented, dtype=float)
        lim = self.config.limits
        if np.any(u_implemented > lim.u_max) or np.any(u_implemented < lim.u_min):
            raise ValueError(
                f"{self.config.name}: implemented control violates magnitude bounds"
            )
        self.history.push(np.asarray(y, dtype=float), u_implemented)
        self.u_prev = u_implemented.copy()
        self.step_count += 1
