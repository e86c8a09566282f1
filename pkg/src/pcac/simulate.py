"""Closed-loop sampled-data simulation of one plant under PCAC loops.

Per step: sample the plant output, let each loop compute its request
from its mapped measurements and command preview, saturate, hold the
implemented control over one sample period of fixed-step integration,
and record everything.
"""

from dataclasses import dataclass, field

import numpy as np

from .plants import PlantError, rk4_step
from .saturation import apply_actuation


class SimulationError(RuntimeError):
    """Raised when the plant diverges or a controller fails mid-run."""


@dataclass
class LoopRecord:
    """Per-loop telemetry accumulated over the run."""

    name: str
    n_tracked: int
    n_inputs: int
    commands: list = field(default_factory=list)
    tracked: list = field(default_factory=list)
    u_requested: list = field(default_factory=list)
    u_implemented: list = field(default_factory=list)
    beta: list = field(default_factory=list)
    qp_iterations: list = field(default_factory=list)
    qp_cost: list = field(default_factory=list)
    theta_norm: list = field(default_factory=list)
    u_min: np.ndarray = None
    u_max: np.ndarray = None
    du_min: np.ndarray = None
    du_max: np.ndarray = None


@dataclass
class SimulationTrace:
    """Full per-step record of a closed-loop run."""

    scenario_name: str
    sample_time: float
    time: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    loops: list = field(default_factory=list)

    @property
    def n_steps(self):
        return len(self.time)

    def loop(self, name):
        for rec in self.loops:
            if rec.name == name:
                return rec
        raise KeyError(f"no loop named {name!r} in trace")


def _preview(command_fn, t, sample_time, horizon):
    rows = [np.atleast_1d(command_fn(t + (i + 1) * sample_time)) for i in range(horizon)]
    return np.concatenate(rows)


def run_closed_loop(plant, controllers, command_fns, sample_time, steps,
                    substeps=10, held_inputs=None, scenario_name=""):
    """Run the sampled-data loop and return the trace.

    controllers and command_fns are parallel lists; each command_fn maps
    a time to that loop's command vector.  held_inputs maps plant input
    indices not driven by any loop to constant values.
    """
    if sample_time <= 0.0:
        raise ValueError("sample_time must be positive")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if len(controllers) != len(command_fns):
        raise ValueError("need one command function per controller")
    n_inputs = plant.n_inputs
    claimed = []
    for ctrl in controllers:
        claimed.extend(ctrl.config.input_map)
    if len(set(claimed)) != len(claimed):
        raise ValueError("controllers claim overlapping plant inputs")
    if any(i < 0 or i >= n_inputs for i in claimed):
        raise ValueError("controller input_map exceeds plant input dimension")
    held_inputs = dict(held_inputs or {})
    for idx in held_inputs:
        if idx in claimed:
            raise ValueError(f"held input {idx} is also driven by a controller")

    trace = SimulationTrace(scenario_name=scenario_name, sample_time=float(sample_time))
    for ctrl in controllers:
        lim = ctrl.config.limits
        trace.loops.append(LoopRecord(
            name=ctrl.config.name,
            n_tracked=ctrl.config.n_tracked,
            n_inputs=ctrl.config.n_inputs,
            u_min=lim.u_min.copy(),
            u_max=lim.u_max.copy(),
            du_min=lim.du_min.copy(),
            du_max=lim.du_max.copy(),
        ))

    x = plant.x0.copy()
    sub_dt = sample_time / substeps
    u_full = np.zeros(n_inputs)
    for idx, value in held_inputs.items():
        u_full[int(idx)] = float(value)

    for k in range(steps):
        t = k * sample_time
        y_full = plant.output(x)
        if not np.isfinite(y_full).all():
            raise SimulationError(f"non-finite plant output at step {k} (t={t:.3f}s)")
        for ctrl, command_fn, rec in zip(controllers, command_fns, trace.loops):
            cfg = ctrl.config
            y_loop = y_full[list(cfg.output_map)]
            preview = _preview(command_fn, t, sample_time, cfg.horizon)
            u_req = ctrl.step(y_loop, preview)
            u_impl = apply_actuation(u_req, ctrl.u_prev, cfg.limits)
            ctrl.absorb(y_loop, u_impl)
            u_full[list(cfg.input_map)] = u_impl
            rec.commands.append(np.atleast_1d(command_fn(t)).astype(float))
            rec.tracked.append(cfg.weights.selector @ y_loop)
            rec.u_requested.append(u_req.copy())
            rec.u_implemented.append(u_impl.copy())
            rec.beta.append(ctrl.last_beta)
            rec.qp_iterations.append(ctrl.last_qp_iterations)
            rec.qp_cost.append(ctrl.last_qp_cost)
            rec.theta_norm.append(ctrl.theta_norm)
        trace.time.append(t)
        trace.outputs.append(np.asarray(y_full, dtype=float).copy())
        try:
            x = rk4_step(plant.derivative, x, u_full.copy(), sub_dt, substeps)
        except PlantError as exc:
            raise SimulationError(f"plant failure at step {k} (t={t:.3f}s): {exc}") from exc
    return trace
