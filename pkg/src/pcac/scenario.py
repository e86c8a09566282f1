"""Scenario files, trace CSV output, and run metrics.

A scenario is a YAML document describing the plant, the control loops,
and piecewise-linear command trajectories.  Parsing validates every
field and reports all problems at once; printing is canonical so that
parse(print(s)) == s.
"""

import io
from dataclasses import dataclass, field

import numpy as np
import yaml

from .controller import DitherSpec, PcacConfig, PcacController
from .mpc import MpcWeights
from .plants import LtiPlant, ThreeDofLongitudinalPlant
from .rls import ForgettingConfig
from .saturation import SaturationLimits


class ScenarioError(ValueError):
    """Validation failure; .errors lists every problem found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


_SCENARIO_KEYS = {"name", "seed", "sample_time", "steps", "integrator_substeps",
                  "plant", "loops"}
_PLANT_KEYS_LTI = {"kind", "a", "b", "c", "x0", "held_inputs"}
_PLANT_KEYS_3DOF = {"kind", "parameters", "x0", "held_inputs"}
_3DOF_PARAMS = {"mass", "wing_area", "chord", "air_density", "gravity",
                "pitch_inertia", "cl0", "cl_alpha", "cl_elevator", "cd0",
                "induced_drag", "cm0", "cm_alpha", "cm_q", "cm_elevator",
                "max_thrust"}
_LOOP_KEYS = {"name", "outputs", "inputs", "tracked", "model_order", "horizon",
              "theta0", "covariance0", "cost_to_go", "terminal", "move_weight",
              "u_min", "u_max", "du_min", "du_max", "forgetting", "dither",
              "commands"}
_FORGET_KEYS = {"gain", "window_recent", "window_total", "significance"}
_DITHER_KEYS = {"amplitude", "steps", "seed"}


@dataclass
class PlantSpec:
    kind: str
    lti_a: list = None
    lti_b: list = None
    lti_c: list = None
    parameters: dict = None
    x0: list = None
    held_inputs: dict = field(default_factory=dict)


@dataclass
class LoopSpec:
    name: str
    outputs: list
    inputs: list
    tracked: list
    model_order: int
    horizon: int
    theta0: float
    covariance0: float
    cost_to_go: float
    terminal: float
    move_weight: list
    u_min: list
    u_max: list
    du_min: list
    du_max: list
    forgetting: dict = None
    dither: dict = None
    commands: list = field(default_factory=list)


@dataclass
class Scenario:
    name: str
    seed: int
    sample_time: float
    steps: int
    integrator_substeps: int
    plant: PlantSpec
    loops: list

    def build_plant(self):
        spec = self.plant
        if spec.kind == "lti":
            return LtiPlant(a=spec.lti_a, b=spec.lti_b, c=spec.lti_c, x0=spec.x0)
        return ThreeDofLongitudinalPlant(x0=np.asarray(spec.x0, dtype=float),
                                         **spec.parameters)

    def build_controllers(self):
        controllers = []
        for i, loop in enumerate(self.loops):
            selector = np.zeros((len(loop.tracked), len(loop.outputs)))
            for row, idx in enumerate(loop.tracked):
                selector[row, idx] = 1.0
            weights = MpcWeights.from_scalars(
                horizon=loop.horizon,
                n_inputs=len(loop.inputs),
                selector=selector,
                cost_to_go=loop.cost_to_go,
                terminal=loop.terminal,
                move=loop.move_weight,
            )
            limits = SaturationLimits(loop.u_min, loop.u_max, loop.du_min, loop.du_max)
            forgetting = ForgettingConfig(enabled=False)
            if loop.forgetting is not None:
                forgetting = ForgettingConfig(
                    enabled=True,
                    gain=loop.forgetting["gain"],
                    window_recent=loop.forgetting["window_recent"],
                    window_total=loop.forgetting["window_total"],
                    significance=loop.forgetting["significance"],
                )
            dither = None
            if loop.dither is not None:
                dither = DitherSpec(
                    amplitude=loop.dither["amplitude"],
                    steps=loop.dither["steps"],
                    seed=self.seed + loop.dither.get("seed", i),
                )
            config = PcacConfig(
                model_order=loop.model_order,
                horizon=loop.horizon,
                weights=weights,
                limits=limits,
                output_map=tuple(loop.outputs),
                input_map=tuple(loop.inputs),
                theta0_scale=loop.theta0,
                covariance0_scale=loop.covariance0,
                forgetting=forgetting,
                dither=dither,
                name=loop.name,
            )
            controllers.append(PcacController(config))
        return controllers

    def build_command_fns(self):
        return [_piecewise_linear(loop.commands) for loop in self.loops]


def _piecewise_linear(channel_knots):
    """Command function from one knot list [[t, v], ...] per tracked channel."""
    tables = []
    for knots in channel_knots:
        ts = np.array([k[0] for k in knots], dtype=float)
        vs = np.array([k[1] for k in knots], dtype=float)
        tables.append((ts, vs))

    def evaluate(t):
        # np.interp holds the end values outside the knot range
        return np.array([np.interp(t, ts, vs) for ts, vs in tables])

    return evaluate


def _want(mapping, key, kind, errors, context, default=None, required=True):
    if key not in mapping:
        if required:
            errors.append(f"{context}: missing required key '{key}'")
        return default
    value = mapping[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append(f"{context}: '{key}' must be a number")
            return default
        return float(value)
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            errors.append(f"{context}: '{key}' must be an integer")
            return default
        return value
    if kind is str:
        if not isinstance(value, str):
            errors.append(f"{context}: '{key}' must be a string")
            return default
        return value
    if kind is list:
        if not isinstance(value, list):
            errors.append(f"{context}: '{key}' must be a list")
            return default
        return value
    if kind is dict:
        if not isinstance(value, dict):
            errors.append(f"{context}: '{key}' must be a mapping")
            return default
        return value
    raise AssertionError(kind)


def _number_list(value, context, key, errors):
    if not isinstance(value, list) or not all(
        isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
    ):
        errors.append(f"{context}: '{key}' must be a list of numbers")
        return None
    return [float(v) for v in value]


def _check_unknown(mapping, allowed, context, errors):
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        errors.append(f"{context}: unknown keys {unknown}")


def _parse_plant(raw, errors):
    if not isinstance(raw, dict):
        errors.append("plant: must be a mapping")
        return None
    kind = _want(raw, "kind", str, errors, "plant")
    if kind not in ("lti", "threedof"):
        errors.append(f"plant: kind must be 'lti' or 'threedof', got {kind!r}")
        return None
    held = raw.get("held_inputs", {})
    if not isinstance(held, dict):
        errors.append("plant: 'held_inputs' must be a mapping")
        held = {}
    held_inputs = {}
    for key, value in held.items():
        try:
            held_inputs[int(key)] = float(value)
        except (TypeError, ValueError):
            errors.append(f"plant: held_inputs entry {key!r} must map int -> number")
    if kind == "lti":
        _check_unknown(raw, _PLANT_KEYS_LTI, "plant", errors)
        spec = PlantSpec(kind="lti", held_inputs=held_inputs)
        for key in ("a", "b", "c"):
            mat = _want(raw, key, list, errors, "plant")
            if mat is not None:
                setattr(spec, f"lti_{key}", mat)
        spec.x0 = _want(raw, "x0", list, errors, "plant")
        return spec
    _check_unknown(raw, _PLANT_KEYS_3DOF, "plant", errors)
    params = _want(raw, "parameters", dict, errors, "plant")
    if params is not None:
        missing = sorted(_3DOF_PARAMS - set(params))
        extra = sorted(set(params) - _3DOF_PARAMS)
        if missing:
            errors.append(f"plant: parameters missing {missing}")
        if extra:
            errors.append(f"plant: unknown parameters {extra}")
    x0 = _want(raw, "x0", list, errors, "plant")
    if params is None or x0 is None:
        return None
    return PlantSpec(kind="threedof",
                     parameters={k: float(params[k]) for k in _3DOF_PARAMS
                                 if k in params},
                     x0=x0, held_inputs=held_inputs)


def _parse_loop(raw, index, errors):
    context = f"loops[{index}]"
    if not isinstance(raw, dict):
        errors.append(f"{context}: must be a mapping")
        return None
    _check_unknown(raw, _LOOP_KEYS, context, errors)
    name = _want(raw, "name", str, errors, context, default=f"loop{index}")
    outputs = _want(raw, "outputs", list, errors, context)
    inputs = _want(raw, "inputs", list, errors, context)
    tracked = _want(raw, "tracked", list, errors, context)
    model_order = _want(raw, "model_order", int, errors, context)
    horizon = _want(raw, "horizon", int, errors, context)
    theta0 = _want(raw, "theta0", float, errors, context)
    covariance0 = _want(raw, "covariance0", float, errors, context)
    cost_to_go = _want(raw, "cost_to_go", float, errors, context)
    terminal = _want(raw, "terminal", float, errors, context)
    move_raw = raw.get("move_weight")
    move_weight = None
    if move_raw is None:
        errors.append(f"{context}: missing required key 'move_weight'")
    elif isinstance(move_raw, (int, float)) and not isinstance(move_raw, bool):
        move_weight = [float(move_raw)]
    else:
        move_weight = _number_list(move_raw, context, "move_weight", errors)
    bounds = {}
    for key in ("u_min", "u_max", "du_min", "du_max"):
        value = _want(raw, key, list, errors, context)
        bounds[key] = _number_list(value, context, key, errors) if value is not None else None
    forgetting = None
    if "forgetting" in raw:
        forgetting = _want(raw, "forgetting", dict, errors, context)
        if forgetting is not None:
            _check_unknown(forgetting, _FORGET_KEYS, f"{context}.forgetting", errors)
            parsed = {
                "gain": _want(forgetting, "gain", float, errors, f"{context}.forgetting"),
                "window_recent": _want(forgetting, "window_recent", int, errors,
                                       f"{context}.forgetting"),
                "window_total": _want(forgetting, "window_total", int, errors,
                                      f"{context}.forgetting"),
                "significance": _want(forgetting, "significance", float, errors,
                                      f"{context}.forgetting"),
            }
            forgetting = parsed if all(v is not None for v in parsed.values()) else None
    dither = None
    if "dither" in raw:
        dither = _want(raw, "dither", dict, errors, context)
        if dither is not None:
            _check_unknown(dither, _DITHER_KEYS, f"{context}.dither", errors)
            parsed = {
                "amplitude": _want(dither, "amplitude", float, errors, f"{context}.dither"),
                "steps": _want(dither, "steps", int, errors, f"{context}.dither"),
            }
            if "seed" in dither:
                parsed["seed"] = _want(dither, "seed", int, errors, f"{context}.dither")
            dither = parsed if all(v is not None for v in parsed.values()) else None
    commands = _want(raw, "commands", list, errors, context)

    if None in (outputs, inputs, tracked, model_order, horizon, theta0, covariance0,
                cost_to_go, terminal, move_weight, commands) or None in bounds.values():
        return None

    for key, idx_list in (("outputs", outputs), ("inputs", inputs), ("tracked", tracked)):
        if not all(isinstance(i, int) and not isinstance(i, bool) for i in idx_list):
            errors.append(f"{context}: '{key}' must be integer indices")
            return None
    if not all(0 <= i < len(outputs) for i in tracked):
        errors.append(f"{context}: 'tracked' indices must point into 'outputs'")
    if model_order < 1:
        errors.append(f"{context}: model_order must be >= 1")
    if horizon < 1:
        errors.append(f"{context}: horizon must be >= 1")
    m = len(inputs)
    for key in ("u_min", "u_max", "du_min", "du_max"):
        if bounds[key] is not None and len(bounds[key]) != m:
            errors.append(f"{context}: '{key}' must have one entry per input ({m})")
    if len(move_weight) not in (1, m):
        errors.append(f"{context}: 'move_weight' must be scalar or length {m}")
    if len(commands) != len(tracked):
        errors.append(
            f"{context}: need one command knot list per tracked output "
            f"({len(tracked)}), got {len(commands)}"
        )
    for ch, knots in enumerate(commands):
        if not isinstance(knots, list) or not knots:
            errors.append(f"{context}: commands[{ch}] must be a non-empty knot list")
            continue
        ok = all(isinstance(k, list) and len(k) == 2
                 and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                         for v in k) for k in knots)
        if not ok:
            errors.append(f"{context}: commands[{ch}] knots must be [time, value] pairs")
            continue
        times = [float(k[0]) for k in knots]
        if times[0] != 0.0:
            errors.append(f"{context}: commands[{ch}] must start at t=0")
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            errors.append(f"{context}: commands[{ch}] knot times must strictly increase")
    return LoopSpec(
        name=name, outputs=outputs, inputs=inputs, tracked=tracked,
        model_order=model_order, horizon=horizon, theta0=theta0,
        covariance0=covariance0, cost_to_go=cost_to_go, terminal=terminal,
        move_weight=move_weight, u_min=bounds["u_min"], u_max=bounds["u_max"],
        du_min=bounds["du_min"], du_max=bounds["du_max"],
        forgetting=forgetting, dither=dither,
        commands=[[[float(k[0]), float(k[1])] for k in knots] for knots in commands],
    )


def parse_scenario(text):
    """Parse and validate a scenario document; raises ScenarioError."""
    errors = []
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError([f"not valid YAML: {exc}"]) from exc
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ScenarioError(["top level must be a mapping"])
    _check_unknown(raw, _SCENARIO_KEYS, "scenario", errors)
    name = _want(raw, "name", str, errors, "scenario")
    seed = _want(raw, "seed", int, errors, "scenario", default=0, required=False)
    sample_time = _want(raw, "sample_time", float, errors, "scenario")
    steps = _want(raw, "steps", int, errors, "scenario")
    substeps = _want(raw, "integrator_substeps", int, errors, "scenario",
                     default=10, required=False)
    if sample_time is not None and sample_time <= 0.0:
        errors.append("scenario: sample_time must be positive")
    if steps is not None and steps < 1:
        errors.append("scenario: steps must be >= 1")
    if substeps is not None and substeps < 1:
        errors.append("scenario: integrator_substeps must be >= 1")
    plant = None
    if "plant" not in raw:
        errors.append("scenario: missing required key 'plant'")
    else:
        plant = _parse_plant(raw["plant"], errors)
    loops = []
    raw_loops = raw.get("loops")
    if raw_loops is None:
        errors.append("scenario: missing required key 'loops'")
    elif not isinstance(raw_loops, list) or not raw_loops:
        errors.append("scenario: 'loops' must be a non-empty list")
    else:
        for i, raw_loop in enumerate(raw_loops):
            loop = _parse_loop(raw_loop, i, errors)
            if loop is not None:
                loops.append(loop)
    if errors:
        raise ScenarioError(errors)
    scenario = Scenario(name=name, seed=seed, sample_time=sample_time, steps=steps,
                        integrator_substeps=substeps, plant=plant, loops=loops)
    _cross_validate(scenario)
    return scenario


def _cross_validate(scenario):
    """Checks that need the assembled objects (dimensions, invariants)."""
    errors = []
    try:
        plant = scenario.build_plant()
    except (ValueError, TypeError) as exc:
        raise ScenarioError([f"plant: {exc}"]) from exc
    for loop in scenario.loops:
        for i in loop.outputs:
            if not 0 <= i < plant.n_outputs:
                errors.append(f"loop '{loop.name}': output index {i} out of range")
        for i in loop.inputs:
            if not 0 <= i < plant.n_inputs:
                errors.append(f"loop '{loop.name}': input index {i} out of range")
    for idx in scenario.plant.held_inputs:
        if not 0 <= idx < plant.n_inputs:
            errors.append(f"plant: held input index {idx} out of range")
    if errors:
        raise ScenarioError(errors)
    try:
        scenario.build_controllers()
    except ValueError as exc:
        raise ScenarioError([str(exc)]) from exc


def _plant_to_dict(spec):
    out = {"kind": spec.kind}
    if spec.kind == "lti":
        out["a"] = spec.lti_a
        out["b"] = spec.lti_b
        out["c"] = spec.lti_c
    else:
        out["parameters"] = dict(sorted(spec.parameters.items()))
    out["x0"] = spec.x0
    if spec.held_inputs:
        out["held_inputs"] = dict(sorted(spec.held_inputs.items()))
    return out


def _loop_to_dict(loop):
    out = {
        "name": loop.name,
        "outputs": loop.outputs,
        "inputs": loop.inputs,
        "tracked": loop.tracked,
        "model_order": loop.model_order,
        "horizon": loop.horizon,
        "theta0": loop.theta0,
        "covariance0": loop.covariance0,
        "cost_to_go": loop.cost_to_go,
        "terminal": loop.terminal,
        "move_weight": loop.move_weight,
        "u_min": loop.u_min,
        "u_max": loop.u_max,
        "du_min": loop.du_min,
        "du_max": loop.du_max,
    }
    if loop.forgetting is not None:
        out["forgetting"] = dict(sorted(loop.forgetting.items()))
    if loop.dither is not None:
        out["dither"] = dict(sorted(loop.dither.items()))
    out["commands"] = loop.commands
    return out


def format_scenario(scenario):
    """Canonical YAML text; parse(format(s)) == s."""
    doc = {
        "name": scenario.name,
        "seed": scenario.seed,
        "sample_time": scenario.sample_time,
        "steps": scenario.steps,
        "integrator_substeps": scenario.integrator_substeps,
        "plant": _plant_to_dict(scenario.plant),
        "loops": [_loop_to_dict(loop) for loop in scenario.loops],
    }
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None, width=100)


def load_scenario(path):
    with open(path, "r", encoding="utf-8") as handle:
        return parse_scenario(handle.read())


def trace_column_names(trace):
    names = ["k", "t"]
    for rec in trace.loops:
        names += [f"r_{rec.name}_{i}" for i in range(rec.n_tracked)]
    names += [f"y_{i}" for i in range(len(trace.outputs[0]))]
    for rec in trace.loops:
        names += [f"yt_{rec.name}_{i}" for i in range(rec.n_tracked)]
    for rec in trace.loops:
        names += [f"u_req_{rec.name}_{i}" for i in range(rec.n_inputs)]
    for rec in trace.loops:
        names += [f"u_{rec.name}_{i}" for i in range(rec.n_inputs)]
    names += [f"beta_{rec.name}" for rec in trace.loops]
    names += [f"qp_iter_{rec.name}" for rec in trace.loops]
    names += [f"qp_cost_{rec.name}" for rec in trace.loops]
    return names


def _fmt(value):
    # 17 significant digits round-trips doubles exactly
    return format(float(value), ".17g")


def write_trace_csv(trace):
    """Render the trace as deterministic CSV text."""
    if trace.n_steps == 0:
        raise ValueError("cannot write an empty trace")
    out = io.StringIO()
    out.write(",".join(trace_column_names(trace)) + "\n")
    for k in range(trace.n_steps):
        row = [str(k), _fmt(trace.time[k])]
        for rec in trace.loops:
            row += [_fmt(v) for v in rec.commands[k]]
        row += [_fmt(v) for v in trace.outputs[k]]
        for rec in trace.loops:
            row += [_fmt(v) for v in rec.tracked[k]]
        for rec in trace.loops:
            row += [_fmt(v) for v in rec.u_requested[k]]
        for rec in trace.loops:
            row += [_fmt(v) for v in rec.u_implemented[k]]
        row += [_fmt(rec.beta[k]) for rec in trace.loops]
        row += [str(int(rec.qp_iterations[k])) for rec in trace.loops]
        row += [_fmt(rec.qp_cost[k]) for rec in trace.loops]
        out.write(",".join(row) + "\n")
    return out.getvalue()


def read_trace_csv(text):
    """Parse trace CSV back into a column table {name: ndarray}."""
    lines = [line for line in text.strip().splitlines() if line]
    if len(lines) < 2:
        raise ValueError("trace CSV must have a header and at least one row")
    header = lines[0].split(",")
    columns = {name: [] for name in header}
    for line in lines[1:]:
        parts = line.split(",")
        if len(parts) != len(header):
            raise ValueError("trace CSV row width does not match the header")
        for name, part in zip(header, parts):
            columns[name].append(float(part))
    return {name: np.array(vals) for name, vals in columns.items()}


@dataclass
class Metrics:
    """Tracking and constraint summary of one run."""

    cumulative_cost: float
    rms_error: dict
    constraint_margin: float
    transient_steps: int
    threshold: float

    def __post_init__(self):
        if self.cumulative_cost < 0.0 or any(v < 0.0 for v in self.rms_error.values()):
            raise ValueError("metrics must be nonnegative")


def compute_metrics(trace, threshold=None):
    """Metrics over a SimulationTrace.

    The transient threshold defaults to 2% of the largest command
    excursion from its initial value (absolute floor 1e-9); the
    constraint margin is the smallest slack to any magnitude or
    move-size bound over the whole run.
    """
    if trace.n_steps == 0:
        raise ValueError("cannot compute metrics for an empty trace")
    n = trace.n_steps
    err_stack = []
    rms = {}
    for rec in trace.loops:
        cmd = np.asarray(rec.commands)
        got = np.asarray(rec.tracked)
        err = got - cmd
        err_stack.append(err)
        rms[rec.name] = float(np.sqrt(np.mean(np.sum(err ** 2, axis=1))))
    all_err = np.hstack(err_stack)
    cumulative = float(np.sum(np.linalg.norm(all_err, axis=1)))

    if threshold is None:
        excursion = 0.0
        for rec in trace.loops:
            cmd = np.asarray(rec.commands)
            excursion = max(excursion, float(np.abs(cmd - cmd[0]).max()))
        threshold = max(0.02 * excursion, 1e-9)
    worst = np.abs(all_err).max(axis=1)
    above = np.nonzero(worst > threshold)[0]
    transient = int(above[-1]) + 1 if above.size else 0

    margin = np.inf
    for rec in trace.loops:
        u = np.asarray(rec.u_implemented)
        margin = min(margin, float((rec.u_max - u).min()), float((u - rec.u_min).min()))
        prev = np.vstack([np.zeros((1, rec.n_inputs)), u[:-1]])
        du = u - prev
        margin = min(margin, float((rec.du_max - du).min()), float((du - rec.du_min).min()))
    return Metrics(
        cumulative_cost=cumulative,
        rms_error=rms,
        constraint_margin=margin,
        transient_steps=transient,
        threshold=float(threshold),
    )


def metrics_from_table(columns, threshold=None):
    """Metrics recomputed from a parsed trace CSV table.

    Bounds are not stored in the CSV, so the constraint margin is
    reported as inf unless the caller post-processes it.
    """
    loop_names = sorted({name[len("beta_"):] for name in columns if name.startswith("beta_")})
    if not loop_names:
        raise ValueError("trace table has no loop columns")
    err_parts = []
    rms = {}
    for name in loop_names:
        r_cols = sorted(c for c in columns if c.startswith(f"r_{name}_"))
        yt_cols = sorted(c for c in columns if c.startswith(f"yt_{name}_"))
        err = np.column_stack([columns[yc] - columns[rc]
                               for rc, yc in zip(r_cols, yt_cols)])
        err_parts.append(err)
        rms[name] = float(np.sqrt(np.mean(np.sum(err ** 2, axis=1))))
    all_err = np.hstack(err_parts)
    cumulative = float(np.sum(np.linalg.norm(all_err, axis=1)))
    if threshold is None:
        excursion = 0.0
        for name in loop_names:
            for col in (c for c in columns if c.startswith(f"r_{name}_")):
                r = columns[col]
                excursion = max(excursion, float(np.abs(r - r[0]).max()))
        threshold = max(0.02 * excursion, 1e-9)
    worst = np.abs(all_err).max(axis=1)
    above = np.nonzero(worst > threshold)[0]
    transient = int(above[-1]) + 1 if above.size else 0
    return Metrics(
        cumulative_cost=cumulative,
        rms_error=rms,
        constraint_margin=np.inf,
        transient_steps=transient,
        threshold=float(threshold),
    )


def format_metrics(metrics):
    lines = [
        f"cumulative_tracking_cost: {metrics.cumulative_cost:.6f}",
        f"transient_steps: {metrics.transient_steps}",
        f"transient_threshold: {metrics.threshold:.6g}",
        f"constraint_margin: {metrics.constraint_margin:.6g}",
    ]
    for name in sorted(metrics.rms_error):
        lines.append(f"rms_error[{name}]: {metrics.rms_error[name]:.6g}")
    return "\n".join(lines) + "\n"
