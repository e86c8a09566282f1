import numpy as np
import pytest

from pcac.bocf import (
    join_coefficients,
    model_step,
    realize,
    reconstruct_state,
    split_coefficients,
)
from pcac.rls import IoHistory


def arx_recursion(theta, order, p, m, inputs, steps):
    """Oracle: run the ARX difference equation directly from zero prehistory."""
    f_blocks, g_blocks = split_coefficients(theta, order, p, m)
    ys = [np.zeros(p) for _ in range(order)]
    us = [np.zeros(m) for _ in range(order)]
    outputs = []
    for k in range(steps):
        y = np.zeros(p)
        for i in range(order):
            y += -f_blocks[i] @ ys[-1 - i] + g_blocks[i] @ us[-1 - i]
        outputs.append(y)
        ys.append(y)
        us.append(np.asarray(inputs[k], dtype=float))
    return outputs


def stable_theta(rng, order, p, m):
    """Random coefficients redrawn until the realization is comfortably stable."""
    while True:
        f_blocks = rng.normal(scale=0.3 / order, size=(order, p, p))
        g_blocks = rng.normal(size=(order, p, m))
        theta = join_coefficients(f_blocks, g_blocks)
        real = realize(theta, order, p, m)
        if np.abs(np.linalg.eigvals(real.a)).max() < 0.95:
            return theta


class TestRealize:
    def test_first_order_siso(self):
        a_coef, b_coef = 0.4, 1.7
        real = realize(np.array([a_coef, b_coef]), 1, 1, 1)
        assert np.array_equal(real.a, [[-a_coef]])
        assert np.array_equal(real.b, [[b_coef]])
        assert np.array_equal(real.c, [[1.0]])

    def test_second_order_block_pattern(self):
        f1, f2, g1, g2 = 0.5, -0.2, 1.0, 0.3
        real = realize(np.array([f1, f2, g1, g2]), 2, 1, 1)
        assert np.array_equal(real.a, [[-f1, 1.0], [-f2, 0.0]])
        assert np.array_equal(real.b, [[g1], [g2]])
        assert np.array_equal(real.c, [[1.0, 0.0]])

    def test_superdiagonal_identity_blocks(self):
        rng = np.random.default_rng(3)
        order, p, m = 4, 2, 1
        theta = rng.normal(size=order * p * (p + m))
        real = realize(theta, order, p, m)
        for i in range(order):
            for j in range(1, order):
                block = real.a[i * p:(i + 1) * p, j * p:(j + 1) * p]
                expected = np.eye(p) if j == i + 1 else np.zeros((p, p))
                assert np.array_equal(block, expected)

    def test_round_trip_recovers_theta(self):
        rng = np.random.default_rng(4)
        for order, p, m in [(1, 1, 1), (3, 2, 2), (5, 1, 2), (2, 3, 1)]:
            theta = rng.normal(size=order * p * (p + m))
            real = realize(theta, order, p, m)
            f_blocks = np.stack(
                [-real.a[i * p:(i + 1) * p, :p] for i in range(order)]
            )
            g_blocks = np.stack(
                [real.b[i * p:(i + 1) * p, :] for i in range(order)]
            )
            assert np.array_equal(join_coefficients(f_blocks, g_blocks), theta)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            realize(np.zeros(5), 2, 1, 1)


class TestReconstruct:
    def test_zero_history_any_theta(self):
        rng = np.random.default_rng(5)
        h = IoHistory(3, 2, 1)
        theta = rng.normal(size=h.coefficient_count)
        y_now = np.array([1.5, -2.5])
        x = reconstruct_state(h, y_now, theta)
        assert x[:2] == pytest.approx(y_now)
        assert np.array_equal(x[2:], np.zeros(4))

    def test_first_order_state_is_output(self):
        h = IoHistory(1, 1, 1)
        h.push(np.array([3.0]), np.array([1.0]))
        x = reconstruct_state(h, np.array([9.0]), np.array([0.5, 0.5]))
        assert x == pytest.approx([9.0])

    def test_one_step_chain_matches_arx(self):
        # c (a x + b u) must equal the ARX prediction built from the new history
        rng = np.random.default_rng(6)
        for order, p, m in [(2, 1, 1), (3, 2, 1), (4, 1, 2)]:
            h = IoHistory(order, p, m)
            for _ in range(order + 3):
                h.push(rng.normal(size=p), rng.normal(size=m))
            theta = rng.normal(size=h.coefficient_count)
            y_now = rng.normal(size=p)
            u_now = rng.normal(size=m)
            real = realize(theta, order, p, m)
            x = reconstruct_state(h, y_now, theta)
            x_next, _ = model_step(real, x, u_now)
            y_next_pred = real.c @ x_next
            h.push(y_now, u_now)
            from pcac.rls import build_regressor

            assert y_next_pred == pytest.approx(
                build_regressor(h) @ theta, abs=1e-10
            )


class TestModelStep:
    def test_zero_state_zero_input(self):
        real = realize(np.array([0.4, 1.0]), 1, 1, 1)
        x_next, y = model_step(real, np.zeros(1), np.zeros(1))
        assert x_next == pytest.approx([0.0])
        assert y == pytest.approx([0.0])

    def test_first_order_siso(self):
        a_coef, b_coef = 0.4, 1.7
        real = realize(np.array([a_coef, b_coef]), 1, 1, 1)
        x_next, y = model_step(real, np.ones(1), np.ones(1))
        assert x_next == pytest.approx([-a_coef + b_coef])
        assert y == pytest.approx([1.0])

    def test_shape_mismatch(self):
        real = realize(np.array([0.4, 1.7]), 1, 1, 1)
        with pytest.raises(ValueError):
            model_step(real, np.zeros(2), np.zeros(1))

    def test_hundred_steps_match_arx_recursion(self):
        rng = np.random.default_rng(7)
        for order, p, m in [(1, 1, 1), (2, 2, 1), (3, 1, 2)]:
            theta = stable_theta(rng, order, p, m)
            real = realize(theta, order, p, m)
            inputs = [rng.normal(size=m) for _ in range(100)]
            oracle = arx_recursion(theta, order, p, m, inputs, 100)
            h = IoHistory(order, p, m)
            x = reconstruct_state(h, np.zeros(p), theta)
            worst = 0.0
            for k in range(100):
                y = real.c @ x
                worst = max(worst, np.abs(y - oracle[k]).max())
                x, _ = model_step(real, x, inputs[k])
            assert worst <= 1e-10


class TestStructuralProperties:
    def test_observability_generic(self):
        rng = np.random.default_rng(8)
        for _ in range(20):
            order, p, m = 3, 2, 1
            theta = rng.normal(size=order * p * (p + m))
            real = realize(theta, order, p, m)
            rows = [real.c]
            for _ in range(order - 1):
                rows.append(rows[-1] @ real.a)
            obs = np.vstack(rows)
            assert np.linalg.matrix_rank(obs) == order * p

    def test_spectral_radius_matches_char_poly(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            order = 4
            theta = rng.normal(size=2 * order)
            real = realize(theta, order, 1, 1)
            roots = np.roots(np.concatenate([[1.0], theta[:order]]))
            sprad = np.abs(np.linalg.eigvals(real.a)).max()
            assert sprad == pytest.approx(np.abs(roots).max(), rel=1e-8)
