"""Continuous-time plants for the sampled-data loop.

Two desk-scale substitutes for flight-test models: a generic LTI
state-space plant, and a nonlinear point-mass longitudinal aircraft
with quadratic-polar aerodynamics and a linear pitching-moment model.
Both expose derivative(x, u) and output(x) and are integrated with a
fixed-step classical Runge-Kutta scheme under zero-order hold.
"""

import math
from dataclasses import dataclass, field

import numpy as np


class PlantError(RuntimeError):
    """Raised when the plant state leaves the model's domain of validity."""


def rk4_step(derivative, x, u, dt, substeps=1):
    """Classical fourth-order Runge-Kutta with the input held constant.

    dt is the sub-step size; the state advances substeps times, i.e.
    over a total interval dt * substeps.
    """
    if dt <= 0.0:
        raise ValueError(f"sub-step must be positive, got {dt}")
    if substeps < 1:
        raise ValueError(f"substeps must be >= 1, got {substeps}")
    x = np.asarray(x, dtype=float)
    for _ in range(substeps):
        k1 = derivative(x, u)
        k2 = derivative(x + 0.5 * dt * k1, u)
        k3 = derivative(x + 0.5 * dt * k2, u)
        k4 = derivative(x + dt * k3, u)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.isfinite(x).all():
        raise PlantError("integration produced a non-finite state")
    return x


@dataclass
class LtiPlant:
    """Strictly proper continuous-time LTI plant: dx = a x + b u, y = c x."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    x0: np.ndarray

    def __post_init__(self):
        self.a = np.atleast_2d(np.asarray(self.a, dtype=float))
        self.b = np.atleast_2d(np.asarray(self.b, dtype=float))
        self.c = np.atleast_2d(np.asarray(self.c, dtype=float))
        self.x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        n = self.a.shape[0]
        if self.a.shape != (n, n):
            raise ValueError("state matrix must be square")
        if self.b.shape[0] != n:
            raise ValueError("input matrix row count must match the state dimension")
        if self.c.shape[1] != n:
            raise ValueError("output matrix column count must match the state dimension")
        if self.x0.shape != (n,):
            raise ValueError("initial state length must match the state dimension")

    @property
    def n_inputs(self):
        return self.b.shape[1]

    @property
    def n_outputs(self):
        return self.c.shape[0]

    @property
    def output_names(self):
        return tuple(f"y{i}" for i in range(self.n_outputs))

    def derivative(self, x, u):
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        if x.shape != (self.a.shape[0],) or u.shape != (self.b.shape[1],):
            raise ValueError("state or input dimension mismatch")
        return self.a @ x + self.b @ u

    def output(self, x):
        return self.c @ np.asarray(x, dtype=float)


@dataclass
class ThreeDofLongitudinalPlant:
    """Nonlinear point-mass longitudinal aircraft with pitch dynamics.

    State: [airspeed (m/s), flight-path angle (rad), altitude (m),
    pitch angle (rad), pitch rate (rad/s)].
    Input: [elevator deflection (deg), throttle (0..1)].
    Lift and moment are linear in angle of attack and elevator, drag is
    a quadratic polar, thrust is max_thrust * throttle.  This is a
    documented desk-scale substitute, not a flight-certified model.
    """

    mass: float
    wing_area: float
    chord: float
    air_density: float
    gravity: float
    pitch_inertia: float
    cl0: float
    cl_alpha: float
    cl_elevator: float
    cd0: float
    induced_drag: float
    cm0: float
    cm_alpha: float
    cm_q: float
    cm_elevator: float
    max_thrust: float
    x0: np.ndarray = field(default_factory=lambda: np.zeros(5))

    def __post_init__(self):
        if min(self.mass, self.wing_area, self.chord, self.pitch_inertia) <= 0.0:
            raise ValueError("mass, areas, and inertia must be positive")
        if self.air_density <= 0.0:
            raise ValueError("air density must be positive")
        self.x0 = np.atleast_1d(np.asarray(self.x0, dtype=float))
        if self.x0.shape != (5,):
            raise ValueError("initial state must have 5 components")

    n_inputs = 2

    @property
    def n_outputs(self):
        return 6

    @property
    def output_names(self):
        return ("altitude_m", "alpha_deg", "airspeed_mps", "gamma_deg",
                "theta_deg", "pitch_rate_dps")

    def derivative(self, x, u):
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        if x.shape != (5,) or u.shape != (2,):
            raise ValueError("state must be length 5 and input length 2")
        airspeed, gamma, _, theta, pitch_rate = x
        if airspeed <= 0.0:
            raise PlantError(
                f"airspeed {airspeed:.3f} m/s <= 0: outside the model's validity"
            )
        alpha = theta - gamma
        elevator = math.radians(u[0])
        thrust = self.max_thrust * u[1]
        q_dyn = 0.5 * self.air_density * airspeed * airspeed
        cl = self.cl0 + self.cl_alpha * alpha + self.cl_elevator * elevator
        cd = self.cd0 + self.induced_drag * cl * cl
        cm = (
            self.cm0
            + self.cm_alpha * alpha
            + self.cm_q * pitch_rate * self.chord / (2.0 * airspeed)
            + self.cm_elevator * elevator
        )
        lift = q_dyn * self.wing_area * cl
        drag = q_dyn * self.wing_area * cd
        moment = q_dyn * self.wing_area * self.chord * cm
        v_dot = (thrust * math.cos(alpha) - drag) / self.mass - self.gravity * math.sin(gamma)
        gamma_dot = (lift + thrust * math.sin(alpha)) / (self.mass * airspeed) \
            - self.gravity * math.cos(gamma) / airspeed
        return np.array([
            v_dot,
            gamma_dot,
            airspeed * math.sin(gamma),
            pitch_rate,
            moment / self.pitch_inertia,
        ])

    def output(self, x):
        airspeed, gamma, altitude, theta, pitch_rate = np.asarray(x, dtype=float)
        alpha = theta - gamma
        return np.array([
            altitude,
            math.degrees(alpha),
            airspeed,
            math.degrees(gamma),
            math.degrees(theta),
            math.degrees(pitch_rate),
        ])
