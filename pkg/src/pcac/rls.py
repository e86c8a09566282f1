"""Recursive least squares identification of a MIMO ARX model.

The model order n is fixed; at each step the coefficient vector theta
(output blocks first, input blocks second, both column-stacked) is
refit by a rank-p recursive update.  A variable-rate forgetting factor
discounts old data only when an F-test flags the recent identification
errors as statistically inflated relative to the preceding window.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from .fstats import f_quantile


class IoHistory:
    """Ring buffer of the last n output and input samples.

    Pre-start samples are zero, so a freshly created history is valid
    and produces an all-zero regressor.
    """

    def __init__(self, order, n_outputs, n_inputs):
        if order < 1:
            raise ValueError(f"model order must be >= 1, got {order}")
        self.order = int(order)
        self.n_outputs = int(n_outputs)
        self.n_inputs = int(n_inputs)
        self._y = deque(
            [np.zeros(self.n_outputs) for _ in range(self.order)], maxlen=self.order
        )
        self._u = deque(
            [np.zeros(self.n_inputs) for _ in range(self.order)], maxlen=self.order
        )

    @property
    def coefficient_count(self):
        """Length of theta: order * p * (m + p)."""
        p, m = self.n_outputs, self.n_inputs
        return self.order * p * (m + p)

    def push(self, y, u):
        y = np.asarray(y, dtype=float)
        u = np.asarray(u, dtype=float)
        if y.shape != (self.n_outputs,):
            raise ValueError(f"output must have shape ({self.n_outputs},), got {y.shape}")
        if u.shape != (self.n_inputs,):
            raise ValueError(f"input must have shape ({self.n_inputs},), got {u.shape}")
        self._y.append(y.copy())
        self._u.append(u.copy())

    def outputs_newest_first(self):
        return list(reversed(self._y))

    def inputs_newest_first(self):
        return list(reversed(self._u))


@dataclass
class CoefficientEstimate:
    """RLS state: coefficient vector theta and covariance-like matrix psi."""

    theta: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.psi = np.asarray(self.psi, dtype=float)
        n = self.theta.size
        if self.theta.ndim != 1:
            raise ValueError("theta must be a vector")
        if self.psi.shape != (n, n):
            raise ValueError(f"psi must be {n}x{n}, got {self.psi.shape}")


@dataclass(frozen=True)
class ForgettingConfig:
    """Variable-rate forgetting parameters.

    gain scales the statistic into the forgetting rate, window_recent
    and window_total set the short/long error windows, significance is
    the F-test level.  Disabled configs always yield beta = 1.
    """

    enabled: bool = False
    gain: float = 0.025
    window_recent: int = 40
    window_total: int = 200
    significance: float = 0.001

    def __post_init__(self):
        if not self.enabled:
            return
        if self.gain <= 0.0:
            raise ValueError("forgetting gain must be positive")
        if not (1 <= self.window_recent < self.window_total):
            raise ValueError("windows must satisfy 1 <= window_recent < window_total")
        # significance of exactly 1 would put the F threshold at zero and
        # make the statistic singular, so require a proper test level
        if not (0.0 < self.significance < 1.0):
            raise ValueError("significance must lie in (0, 1)")

    def validate_dims(self, n_outputs):
        if self.enabled and self.window_recent < n_outputs:
            raise ValueError(
                f"window_recent must be >= output dimension {n_outputs}"
            )


class ForgettingState:
    """Trailing buffer of identification-error vectors."""

    def __init__(self, window_total):
        self._errors = deque(maxlen=int(window_total) + 1)

    def push(self, error):
        self._errors.append(np.asarray(error, dtype=float).copy())

    def errors_oldest_first(self):
        return list(self._errors)

    def __len__(self):
        return len(self._errors)


def build_regressor(history):
    """Regressor matrix phi (p x order*p*(m+p)) from the IO history.

    The row [-y_{k-1}' ... -y_{k-n}'  u_{k-1}' ... u_{k-n}'] is expanded
    with a Kronecker identity so that phi @ theta evaluates the ARX
    predictor for the column-stacked coefficient layout.
    """
    ys = history.outputs_newest_first()
    us = history.inputs_newest_first()
    row = np.concatenate([-y for y in ys] + us)
    return np.kron(row[np.newaxis, :], np.eye(history.n_outputs))


def predict_output(phi, estimate):
    """One-step model output phi @ theta."""
    theta = estimate.theta
    if phi.shape[1] != theta.size:
        raise ValueError(
            f"regressor width {phi.shape[1]} does not match theta length {theta.size}"
        )
    return phi @ theta


def identification_error(phi, estimate, y):
    """A-priori identification error y - phi @ theta."""
    return np.asarray(y, dtype=float) - predict_output(phi, estimate)


def forgetting_statistic(state, config):
    """Nonnegative forgetting statistic from the error windows.

    The test ratio is the mean squared error norm over the last
    window_recent steps divided by the mean over the preceding
    window_total - window_recent steps.  The statistic is
    max(0, sqrt(ratio / F_crit) - 1) with F_crit the F quantile at
    1 - significance and pooled degrees of freedom p*window_recent and
    p*(window_total - window_recent).  Monotone in the recent errors.
    """
    errors = state.errors_oldest_first()
    if len(errors) < config.window_total:
        return 0.0
    window = errors[-config.window_total:]
    sq = np.array([e @ e for e in window])
    n_recent = config.window_recent
    n_old = config.window_total - config.window_recent
    recent = sq[n_old:].mean()
    older = sq[:n_old].mean()
    p = window[-1].size
    crit = f_quantile(
        1.0 - config.significance, p * n_recent, p * n_old
    )
    ratio = recent / max(older, np.finfo(float).tiny)
    g = np.sqrt(ratio / crit) - 1.0
    return float(g) if g > 0.0 else 0.0


def forgetting_factor(state, config, step):
    """beta_k >= 1; unity before window_total steps or when disabled."""
    if not config.enabled or step < config.window_total:
        return 1.0
    return 1.0 + config.gain * forgetting_statistic(state, config)


def rls_update(estimate, phi, y, beta):
    """One recursive least-squares step.

    psi' = beta*psi - beta*psi phi' ((1/beta) I + phi psi phi')^-1 phi psi,
    theta' = theta + psi' phi' (y - phi theta).  beta >= 1 inflates psi,
    which is the forgetting mechanism.
    """
    if beta < 1.0:
        raise ValueError(f"forgetting input beta must be >= 1, got {beta}")
    y = np.asarray(y, dtype=float)
    p = phi.shape[0]
    if y.shape != (p,):
        raise ValueError(f"output must have shape ({p},), got {y.shape}")
    psi = estimate.psi
    theta = estimate.theta
    psi_phi_t = psi @ phi.T
    innovation = np.eye(p) / beta + phi @ psi_phi_t
    correction = psi_phi_t @ np.linalg.solve(innovation, psi_phi_t.T)
    psi_new = beta * (psi - correction)
    psi_new = 0.5 * (psi_new + psi_new.T)  # suppress asymmetry drift
    theta_new = theta + psi_new @ (phi.T @ (y - phi @ theta))
    return CoefficientEstimate(theta_new, psi_new)
