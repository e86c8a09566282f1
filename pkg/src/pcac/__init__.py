"""Cold-start adaptive autopilot library.

Online closed-loop ARX identification (recursive least squares with
variable-rate forgetting), observable canonical realization, and
constrained receding-horizon control, plus a sampled-data simulator
for aircraft-like plants.
"""

from .bocf import BocfRealization, model_step, realize, reconstruct_state
from .controller import ControllerError, DitherSpec, PcacConfig, PcacController
from .fstats import f_cdf, f_quantile, regularized_incomplete_beta
from .mpc import (
    MpcWeights,
    PredictionMatrices,
    QpProblem,
    QpSolution,
    QpSolveError,
    assemble_qp,
    build_prediction,
    first_control,
    solve_qp,
)
from .plants import LtiPlant, PlantError, ThreeDofLongitudinalPlant, rk4_step
from .rls import (
    CoefficientEstimate,
    ForgettingConfig,
    ForgettingState,
    IoHistory,
    build_regressor,
    forgetting_factor,
    identification_error,
    predict_output,
    rls_update,
)
from .saturation import (
    SaturationLimits,
    apply_actuation,
    saturate_magnitude,
    saturate_rate,
)
from .scenario import (
    Metrics,
    Scenario,
    ScenarioError,
    compute_metrics,
    format_metrics,
    format_scenario,
    load_scenario,
    parse_scenario,
    read_trace_csv,
    write_trace_csv,
)
from .simulate import SimulationError, SimulationTrace, run_closed_loop

__all__ = [
    "BocfRealization",
    "CoefficientEstimate",
    "ControllerError",
    "DitherSpec",
    "ForgettingConfig",
    "ForgettingState",
    "IoHistory",
    "LtiPlant",
    "Metrics",
    "MpcWeights",
    "PcacConfig",
    "PcacController",
    "PlantError",
    "PredictionMatrices",
    "QpProblem",
    "QpSolution",
    "QpSolveError",
    "SaturationLimits",
    "Scenario",
    "ScenarioError",
    "SimulationError",
    "SimulationTrace",
    "ThreeDofLongitudinalPlant",
    "apply_actuation",
    "assemble_qp",
    "build_prediction",
    "build_regressor",
    "compute_metrics",
    "f_cdf",
    "f_quantile",
    "first_control",
    "forgetting_factor",
    "format_metrics",
    "format_scenario",
    "identification_error",
    "load_scenario",
    "model_step",
    "parse_scenario",
    "predict_output",
    "read_trace_csv",
    "realize",
    "reconstruct_state",
    "regularized_incomplete_beta",
    "rk4_step",
    "rls_update",
    "run_closed_loop",
    "saturate_magnitude",
    "saturate_rate",
    "solve_qp",
    "write_trace_csv",
]
