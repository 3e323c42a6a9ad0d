import numpy as np
import pytest

from storyrank.optim import SGD, Adam


class TestSgd:
    def test_single_step(self):
        p = np.array([1.0, 2.0])
        SGD([p]).step([p], [np.array([0.5, -1.0])], lr=0.1)
        assert p.tolist() == [0.95, 2.1]

    def test_updates_in_place(self):
        p = np.zeros(2)
        alias = p
        SGD([p]).step([p], [np.ones(2)], lr=1.0)
        assert alias.tolist() == [-1.0, -1.0]


class TestAdam:
    def test_first_step_hand_computed(self):
        # bias-corrected first step: m_hat = g, v_hat = g*g, so the update
        # is lr * g / (|g| + eps) = lr * sign(g) up to eps
        g = np.array([0.3, -2.0])
        p = np.zeros(2)
        opt = Adam([p], epsilon=1e-8)
        opt.step([p], [g], lr=0.01)
        expected = -0.01 * g / (np.abs(g) + 1e-8)
        assert np.allclose(p, expected, atol=1e-15)

    def test_two_steps_match_reference_formula(self):
        rng = np.random.default_rng(0)
        grads = [rng.standard_normal(3), rng.standard_normal(3)]
        p = np.zeros(3)
        opt = Adam([p])
        opt.step([p], [grads[0]], lr=0.1)
        opt.step([p], [grads[1]], lr=0.05)

        # independent scalar re-implementation
        beta1, beta2, eps = 0.9, 0.999, 1e-8
        q = np.zeros(3)
        m = np.zeros(3)
        v = np.zeros(3)
        for t, (g, lr) in enumerate(zip(grads, [0.1, 0.05]), start=1):
            m = beta1 * m + (1 - beta1) * g
            v = beta2 * v + (1 - beta2) * g * g
            m_hat = m / (1 - beta1**t)
            v_hat = v / (1 - beta2**t)
            q = q - lr * m_hat / (np.sqrt(v_hat) + eps)
        assert np.allclose(p, q, atol=1e-15)

    def test_zero_gradient_never_moves_parameter(self):
        p = np.array([0.0])
        w = np.array([1.0, 1.0])
        opt = Adam([w, p])
        before = p.copy()
        for _ in range(50):
            opt.step([w, p], [np.array([0.2, -0.1]), np.zeros(1)], lr=0.01)
        # exact: m and v stay 0, update is exactly 0.0
        assert p[0] == before[0]
        assert p[0].hex() == before[0].hex()

    def test_step_size_bounded_by_lr(self):
        p = np.zeros(4)
        opt = Adam([p])
        opt.step([p], [np.full(4, 1e9)], lr=0.001)
        assert np.all(np.abs(p) <= 0.001 + 1e-12)

    def test_handles_multiple_param_groups(self):
        w = np.zeros(2)
        b = np.zeros(1)
        opt = Adam([w, b])
        opt.step([w, b], [np.ones(2), -np.ones(1)], lr=0.1)
        assert w[0] < 0 < b[0]
