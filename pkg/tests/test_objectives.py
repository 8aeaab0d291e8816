import numpy as np
import pytest

from nudgeopt import ObjectiveKind, evaluate, gradient


FOUR = np.array([0.90, 0.92, 0.94, 0.96])


class TestEvaluate:
    def test_mean(self):
        assert evaluate(ObjectiveKind.MAX_MEAN, FOUR) == pytest.approx(0.93)

    def test_sample_variance(self):
        assert evaluate(ObjectiveKind.MAX_VAR, FOUR) == pytest.approx(0.002 / 3)

    def test_min_variance_constant_vector(self):
        assert evaluate(ObjectiveKind.MIN_VAR, np.full(5, 0.3)) == 0.0

    def test_min_is_negated_max(self):
        rng = np.random.default_rng(0)
        theta = rng.uniform(0, 1, 9)
        assert evaluate(ObjectiveKind.MIN_VAR, theta) == -evaluate(ObjectiveKind.MAX_VAR, theta)

    def test_variance_needs_two(self):
        with pytest.raises(ValueError):
            evaluate(ObjectiveKind.MAX_VAR, [0.5])
        # the mean of a single opinion is fine
        assert evaluate(ObjectiveKind.MAX_MEAN, [0.5]) == 0.5


class TestGradient:
    def test_mean_gradient_constant(self):
        g = gradient(ObjectiveKind.MAX_MEAN, np.zeros(10))
        assert np.array_equal(g, np.full(10, 0.1))
        # independent of theta
        g2 = gradient(ObjectiveKind.MAX_MEAN, np.linspace(0, 1, 10))
        assert np.array_equal(g, g2)

    def test_max_var_two_points(self):
        assert gradient(ObjectiveKind.MAX_VAR, [0.0, 1.0]) == pytest.approx([-1.0, 1.0])

    def test_min_var_sign_flip(self):
        assert gradient(ObjectiveKind.MIN_VAR, [0.0, 1.0]) == pytest.approx([1.0, -1.0])

    def test_min_equals_negative_max_exactly(self):
        rng = np.random.default_rng(1)
        theta = rng.uniform(0, 1, 12)
        assert np.array_equal(gradient(ObjectiveKind.MIN_VAR, theta),
                              -gradient(ObjectiveKind.MAX_VAR, theta))

    @pytest.mark.parametrize("kind", list(ObjectiveKind))
    def test_matches_central_differences(self, kind):
        rng = np.random.default_rng(2)
        step = 1e-6
        for _ in range(10):
            theta = rng.uniform(0.05, 0.95, int(rng.integers(2, 12)))
            grad = gradient(kind, theta)
            for i in range(theta.size):
                hi, lo = theta.copy(), theta.copy()
                hi[i] += step
                lo[i] -= step
                fd = (evaluate(kind, hi) - evaluate(kind, lo)) / (2 * step)
                denom = max(abs(fd), 1e-9)
                assert abs(grad[i] - fd) / denom < 1e-6


def test_from_name_round_trip():
    for kind in ObjectiveKind:
        assert ObjectiveKind.from_name(kind.value) is kind
    with pytest.raises(ValueError, match="unknown objective"):
        ObjectiveKind.from_name("median")
