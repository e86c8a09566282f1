"""Actuator magnitude and move-size saturation.

The requested control passes through magnitude clipping first and
move-size (rate) clipping second; the composed map is what the loop
runner applies before the zero-order hold.
"""

from dataclasses import dataclass

import numpy as np


def _as_vector(x, size, name):
    v = np.asarray(x, dtype=float)
    if v.ndim == 0:
        v = v.reshape(1)
    if v.ndim != 1 or v.size != size:
        raise ValueError(f"{name} must be a vector of length {size}, got shape {v.shape}")
    return v


@dataclass(frozen=True)
class SaturationLimits:
    """Per-channel magnitude and per-step move-size bounds."""

    u_min: np.ndarray
    u_max: np.ndarray
    du_min: np.ndarray
    du_max: np.ndarray

    def __post_init__(self):
        u_min = np.atleast_1d(np.asarray(self.u_min, dtype=float))
        u_max = _as_vector(self.u_max, u_min.size, "u_max")
        du_min = _as_vector(self.du_min, u_min.size, "du_min")
        du_max = _as_vector(self.du_max, u_min.size, "du_max")
        if np.any(u_min > u_max):
            raise ValueError("u_min must not exceed u_max")
        # zero move must stay feasible, otherwise a hold command could violate the
        # rate box and the receding-horizon problem would lose its feasible point
        if np.any(du_min > 0.0) or np.any(du_max < 0.0):
            raise ValueError("move-size bounds must satisfy du_min <= 0 <= du_max")
        object.__setattr__(self, "u_min", u_min)
        object.__setattr__(self, "u_max", u_max)
        object.__setattr__(self, "du_min", du_min)
        object.__setattr__(self, "du_max", du_max)

    @property
    def size(self):
        return self.u_min.size

    @classmethod
    def symmetric(cls, u_max, du_max):
        """Bounds of the form |u| <= u_max, |du| <= du_max."""
        u_max = np.atleast_1d(np.asarray(u_max, dtype=float))
        du_max = np.atleast_1d(np.asarray(du_max, dtype=float))
        return cls(-u_max, u_max, -du_max, du_max)


def saturate_magnitude(u, limits):
    """Clip each channel to its magnitude interval."""
    u = _as_vector(u, limits.size, "u")
    return np.clip(u, limits.u_min, limits.u_max)


def saturate_rate(u, u_prev, limits):
    """Clip the move u - u_prev to the per-step move-size interval."""
    u = _as_vector(u, limits.size, "u")
    u_prev = _as_vector(u_prev, limits.size, "u_prev")
    out = np.clip(u, u_prev + limits.du_min, u_prev + limits.du_max)
    # u_prev + du_max can land an ulp past the bound after the subtraction
    # out - u_prev; nudge toward u_prev until the realized move is inside,
    # so downstream exact-comparison checks on traces hold.
    while True:
        move = out - u_prev
        high = move > limits.du_max
        low = move < limits.du_min
        if not (high.any() or low.any()):
            return out
        out = np.where(high, np.nextafter(out, -np.inf), out)
        out = np.where(low, np.nextafter(out, np.inf), out)


def apply_actuation(u_req, u_prev, limits):
    """Magnitude clip then rate clip: the control the actuator implements."""
    return saturate_rate(saturate_magnitude(u_req, limits), u_prev, limits)
