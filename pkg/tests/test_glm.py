import math

import numpy as np
import pytest

from tensorbandits.glm import (
    LinkFamily,
    Observation,
    glm_loss,
    glm_loss_gradient,
    link_eval,
    sample_reward,
    stack_observations,
)

FAMILIES = ["linear", "logistic", "poisson"]


def central_difference(f, W, h=1e-6):
    G = np.zeros_like(W)
    for idx in np.ndindex(W.shape):
        E = np.zeros_like(W)
        E[idx] = h
        G[idx] = (f(W + E) - f(W - E)) / (2 * h)
    return G


def random_problem(kind, rng, n=30, dims=(4, 3, 2)):
    fam = LinkFamily(kind)
    W = 0.3 * rng.standard_normal(dims)
    X = rng.standard_normal((n,) + dims) / math.sqrt(np.prod(dims))
    eta = np.tensordot(X, W, axes=3)
    y = np.array([sample_reward(fam, e, rng) for e in eta])
    return fam, W, X, y


class TestLinkFamily:
    def test_linear_values(self):
        mu, b, b1, b2 = link_eval(LinkFamily("linear"), 0.5)
        assert mu == 0.5 and b == 0.125 and b1 == 0.5 and b2 == 1.0

    def test_logistic_at_zero(self):
        mu, b, _, b2 = link_eval(LinkFamily("logistic"), 0.0)
        assert mu == 0.5 and b2 == 0.25
        assert abs(b - math.log(2)) <= 1e-15

    def test_poisson_at_zero(self):
        mu, b, _, _ = link_eval(LinkFamily("poisson"), 0.0)
        assert mu == 1.0 and b == 1.0

    def test_logistic_is_stable_far_out(self):
        fam = LinkFamily("logistic")
        assert np.isfinite(fam.b(800.0)) and abs(fam.b(800.0) - 800.0) <= 1e-12
        assert fam.b(-800.0) == 0.0
        assert fam.mu(-800.0) == 0.0 and fam.mu(800.0) == 1.0

    def test_bounds(self):
        lin, log, poi = (LinkFamily(k) for k in FAMILIES)
        assert lin.m_lower == lin.M_upper == 1.0
        assert log.M_upper == 0.25
        assert abs(poi.M_upper - math.exp(3.0)) <= 1e-12
        assert abs(poi.m_lower - math.exp(-3.0)) <= 1e-15

    @pytest.mark.parametrize("kind", FAMILIES)
    def test_derivative_bounds_on_grid(self, kind):
        fam = LinkFamily(kind, eta_clip=2.5)
        x = np.linspace(-2.5, 2.5, 501)
        d = fam.dmu(x)
        assert 0 < fam.m_lower <= fam.M_upper
        assert np.all(d >= fam.m_lower * (1 - 1e-12))
        assert np.all(d <= fam.M_upper * (1 + 1e-12))

    @pytest.mark.parametrize("kind", FAMILIES)
    def test_derivatives_by_finite_differences(self, kind):
        fam = LinkFamily(kind)
        x = np.linspace(-2.0, 2.0, 17)
        h = 1e-5
        db = (fam.b(x + h) - fam.b(x - h)) / (2 * h)
        dmu = (fam.mu(x + h) - fam.mu(x - h)) / (2 * h)
        np.testing.assert_allclose(db, fam.mu(x), rtol=1e-6)
        np.testing.assert_allclose(dmu, fam.dmu(x), rtol=1e-6)

    def test_config_forms(self):
        assert LinkFamily.from_config("Logistic").kind == "logistic"
        fam = LinkFamily.from_config({"family": "poisson", "eta_clip": 2})
        assert fam.eta_clip == 2.0

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            LinkFamily("probit")
        with pytest.raises(ValueError):
            LinkFamily("linear", noise_sigma=-1.0)
        with pytest.raises(ValueError):
            LinkFamily("poisson", eta_clip=0.0)


class TestSampling:
    def test_noiseless_linear(self, rng):
        assert sample_reward(LinkFamily("linear", noise_sigma=0.0), 0.3, rng) == 0.3

    def test_saturated_logistic(self, rng):
        fam = LinkFamily("logistic")
        assert all(sample_reward(fam, 30.0, rng) == 1.0 for _ in range(100))

    def test_poisson_mean(self):
        draws = sample_reward(LinkFamily("poisson"), np.zeros(100_000), np.random.default_rng(3))
        assert 0.98 <= draws.mean() <= 1.02

    def test_support(self, rng):
        y = sample_reward(LinkFamily("logistic"), np.linspace(-2, 2, 200), rng)
        assert set(np.unique(y)) <= {0.0, 1.0}
        c = sample_reward(LinkFamily("poisson"), np.linspace(-2, 2, 200), rng)
        assert np.all(c >= 0) and np.all(c == np.round(c))

    def test_scalar_poisson_is_float(self, rng):
        assert isinstance(sample_reward(LinkFamily("poisson"), 0.5, rng), float)

    def test_poisson_clip(self, rng):
        with pytest.raises(ValueError):
            sample_reward(LinkFamily("poisson", eta_clip=3.0), 3.5, rng)

    def test_non_finite(self, rng):
        with pytest.raises(ValueError):
            sample_reward(LinkFamily("linear"), float("nan"), rng)

    @pytest.mark.parametrize("kind", FAMILIES)
    def test_determinism(self, kind):
        eta = np.linspace(-1, 1, 50)
        a = sample_reward(LinkFamily(kind), eta, np.random.default_rng(9))
        b = sample_reward(LinkFamily(kind), eta, np.random.default_rng(9))
        np.testing.assert_array_equal(a, b)


class TestLoss:
    def test_linear_zero(self, rng):
        X = rng.standard_normal((5, 2, 2, 2))
        assert glm_loss(LinkFamily("linear"), np.zeros((2, 2, 2)), X, rng.standard_normal(5)) == 0.0

    def test_logistic_zero(self, rng):
        X = rng.standard_normal((5, 2, 2, 2))
        y = rng.integers(0, 2, 5).astype(float)
        assert abs(glm_loss(LinkFamily("logistic"), np.zeros((2, 2, 2)), X, y) - math.log(2)) <= 1e-15

    def test_single_linear_observation(self, rng):
        W = rng.standard_normal((2, 3, 2))
        X = rng.standard_normal((2, 3, 2))
        ip = float(np.sum(X * W))
        expected = 0.5 * ip**2 - 0.7 * ip
        got = glm_loss(LinkFamily("linear"), W, [Observation(X, 0.7)])
        assert abs(got - expected) <= 1e-12

    def test_observation_list_matches_arrays(self, rng):
        fam, W, X, y = random_problem("poisson", rng)
        data = [Observation(x, r, t) for t, (x, r) in enumerate(zip(X, y))]
        Xs, ys = stack_observations(data)
        np.testing.assert_array_equal(Xs, X)
        assert glm_loss(fam, W, data) == glm_loss(fam, W, X, y)
        np.testing.assert_array_equal(glm_loss_gradient(fam, W, data), glm_loss_gradient(fam, W, X, y))

    def test_empty_data(self):
        with pytest.raises(ValueError):
            glm_loss(LinkFamily("linear"), np.zeros((2, 2, 2)), [])
        with pytest.raises(ValueError):
            glm_loss_gradient(LinkFamily("linear"), np.zeros((2, 2, 2)), np.zeros((0, 2, 2, 2)), np.zeros(0))

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError):
            glm_loss(LinkFamily("linear"), np.zeros((2, 2, 2)), rng.standard_normal((3, 2, 2, 3)), np.zeros(3))

    @pytest.mark.parametrize("kind", FAMILIES)
    def test_convexity_probe(self, kind, rng):
        fam, _, X, y = random_problem(kind, rng)
        for _ in range(20):
            W1, W2 = 0.5 * rng.standard_normal((2, 4, 3, 2))
            a = rng.uniform(0.01, 0.99)
            lhs = glm_loss(fam, a * W1 + (1 - a) * W2, X, y)
            assert lhs <= a * glm_loss(fam, W1, X, y) + (1 - a) * glm_loss(fam, W2, X, y) + 1e-10


class TestGradient:
    def test_noiseless_linear_stationary(self, rng):
        W = rng.standard_normal((3, 3, 2))
        X = rng.standard_normal((20, 3, 3, 2))
        y = np.tensordot(X, W, axes=3)
        assert np.linalg.norm(glm_loss_gradient(LinkFamily("linear"), W, X, y)) <= 1e-10

    def test_logistic_at_zero_oracle(self, rng):
        X = rng.standard_normal((6, 2, 3, 2))
        y = np.array([0, 1, 0, 1, 1, 0], dtype=float)
        expected = sum((0.5 - yt) * Xt for Xt, yt in zip(X, y)) / len(y)
        got = glm_loss_gradient(LinkFamily("logistic"), np.zeros((2, 3, 2)), X, y)
        np.testing.assert_allclose(got, expected, atol=1e-15)

    @pytest.mark.parametrize("kind", FAMILIES)
    def test_matches_finite_differences(self, kind, rng):
        for _ in range(3):
            fam, W, X, y = random_problem(kind, rng)
            g = glm_loss_gradient(fam, W, X, y)
            fd = central_difference(lambda V: glm_loss(fam, V, X, y), W)
            assert np.linalg.norm(g - fd) <= 1e-5 * max(np.linalg.norm(g), 1e-12)
