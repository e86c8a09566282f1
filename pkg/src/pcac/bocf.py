"""Block observable canonical form built from ARX coefficients.

The identified difference model is realized as a state-space triple
whose state is an explicit function of past inputs, outputs, and the
coefficient blocks, so simulating the triple reproduces the ARX
recursion exactly.
"""

from dataclasses import dataclass

import numpy as np


def split_coefficients(theta, order, n_outputs, n_inputs):
    """Unstack theta into output blocks F_i (p x p) and input blocks G_i (p x m)."""
    theta = np.asarray(theta, dtype=float)
    p, m = n_outputs, n_inputs
    expected = order * p * (m + p)
    if theta.shape != (expected,):
        raise ValueError(
            f"theta must have length {expected} for order {order}, p={p}, m={m}; "
            f"got shape {theta.shape}"
        )
    n_f = order * p * p
    f_stack = theta[:n_f].reshape((p, order * p), order="F")
    g_stack = theta[n_f:].reshape((p, order * m), order="F")
    f_blocks = np.stack([f_stack[:, i * p:(i + 1) * p] for i in range(order)])
    g_blocks = np.stack([g_stack[:, i * m:(i + 1) * m] for i in range(order)])
    return f_blocks, g_blocks


def join_coefficients(f_blocks, g_blocks):
    """Inverse of split_coefficients: column-stack the blocks back into theta."""
    f_stack = np.hstack(list(f_blocks))
    g_stack = np.hstack(list(g_blocks))
    return np.concatenate([f_stack.ravel(order="F"), g_stack.ravel(order="F")])


@dataclass
class BocfRealization:
    """State-space triple (a, b, c) in block observable canonical form."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    order: int
    n_outputs: int
    n_inputs: int

    @property
    def state_dim(self):
        return self.order * self.n_outputs


def realize(theta, order, n_outputs, n_inputs):
    """Build the canonical realization from the coefficient vector.

    a carries -F_i down its first block column with identity blocks on
    the block superdiagonal, b stacks the G_i, and c selects the first
    p state components.
    """
    p, m = n_outputs, n_inputs
    f_blocks, g_blocks = split_coefficients(theta, order, p, m)
    n = order * p
    a = np.zeros((n, n))
    for i in range(order):
        a[i * p:(i + 1) * p, :p] = -f_blocks[i]
        if i + 1 < order:
            a[i * p:(i + 1) * p, (i + 1) * p:(i + 2) * p] = np.eye(p)
    b = g_blocks.reshape(n, m)
    c = np.zeros((p, n))
    c[:, :p] = np.eye(p)
    return BocfRealization(a=a, b=b, c=c, order=order, n_outputs=p, n_inputs=m)


def reconstruct_state(history, y_now, theta):
    """Model state at the current step from the IO history.

    The first block is the current output; block j sums the truncated
    convolution of the later coefficient blocks with the past IO pairs.
    """
    order = history.order
    p, m = history.n_outputs, history.n_inputs
    y_now = np.asarray(y_now, dtype=float)
    if y_now.shape != (p,):
        raise ValueError(f"current output must have shape ({p},), got {y_now.shape}")
    f_blocks, g_blocks = split_coefficients(theta, order, p, m)
    ys = history.outputs_newest_first()
    us = history.inputs_newest_first()
    x = np.zeros(order * p)
    x[:p] = y_now
    for j in range(2, order + 1):
        block = np.zeros(p)
        for i in range(1, order - j + 2):
            block -= f_blocks[i + j - 2] @ ys[i - 1]
            block += g_blocks[i + j - 2] @ us[i - 1]
        x[(j - 1) * p:j * p] = block
    return x


def model_step(realization, x, u):
    """Advance the realization one step: returns (a x + b u, c x)."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.shape != (realization.state_dim,):
        raise ValueError(
            f"state must have shape ({realization.state_dim},), got {x.shape}"
        )
    if u.shape != (realization.n_inputs,):
        raise ValueError(
            f"input must have shape ({realization.n_inputs},), got {u.shape}"
        )
    return realization.a @ x + realization.b @ u, realization.c @ x
