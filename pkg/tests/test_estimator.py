import math

import numpy as np
import pytest

from tensorbandits.environment import generate_synthetic_instance
from tensorbandits.estimator import (
    SolverOptions,
    default_lambda,
    estimate_rank,
    extract_subspaces,
    fit_nuclear_norm_glm,
    subspace_distance,
)
from tensorbandits.glm import LinkFamily, glm_loss, glm_loss_gradient, sample_reward
from tensorbandits.tensor_algebra import (
    TransformSpec,
    conj_transpose,
    identity_tensor,
    nuclear_norm,
    spectral_norm,
    svt_prox,
    t_product,
    t_svd,
    tubal_rank,
)

SPEC = TransformSpec.dct(3)
LINEAR = LinkFamily("linear", noise_sigma=0.01)


def sphere_design(n, dims, rng):
    p = int(np.prod(dims))
    G = rng.standard_normal((n, p))
    G /= np.linalg.norm(G, axis=1, keepdims=True)
    return G.reshape((n,) + tuple(dims), order="F")


def synthetic_regression(n, seed, family=LINEAR):
    inst = generate_synthetic_instance(10, 10, 3, 1, 100, family, SPEC, seed)
    rng = np.random.default_rng(1000 + seed)
    X = sphere_design(n, (10, 10, 3), rng)
    y = sample_reward(family, np.tensordot(X, inst.W_star, axes=3), rng)
    return inst, X, y


class TestSolverOptions:
    def test_defaults(self):
        o = SolverOptions()
        assert (o.max_iters, o.grad_tol, o.step_init, o.backtrack_beta) == (2000, 1e-7, 1.0, 0.5)
        assert o.use_acceleration

    @pytest.mark.parametrize("kw", [{"grad_tol": 0.0}, {"backtrack_beta": 1.0}, {"backtrack_beta": 0.0}, {"max_iters": 0}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            SolverOptions(**kw)


class TestFit:
    def test_large_lambda_gives_zero(self, rng):
        fam = LinkFamily("logistic")
        X = rng.standard_normal((40, 3, 3, 2))
        y = rng.integers(0, 2, 40).astype(float)
        spec = TransformSpec.dct(2)
        g0 = glm_loss_gradient(fam, np.zeros((3, 3, 2)), X, y)
        lam = 1.01 * spectral_norm(g0, spec)
        res = fit_nuclear_norm_glm(fam, X, y, lam, spec)
        assert res.converged
        assert np.abs(res.W).max() == 0.0
        # subgradient condition at zero: -grad lies in the lam-ball of the dual norm
        assert spectral_norm(g0, spec) <= lam

    def test_tiny_lambda_matches_least_squares(self, rng):
        W = rng.standard_normal((2, 2, 3))
        X = rng.standard_normal((500, 2, 2, 3))
        y = np.tensordot(X, W, axes=3)
        res = fit_nuclear_norm_glm(LinkFamily("linear", 0.0), X, y, 1e-8, TransformSpec.dct(3))
        A = X.reshape(500, -1, order="F")
        ls = np.linalg.lstsq(A, y, rcond=None)[0].reshape((2, 2, 3), order="F")
        assert res.converged
        assert np.abs(res.W - ls).max() <= 1e-4

    def test_paper_scale_linear_recovery(self):
        inst, X, y = synthetic_regression(1500, seed=0)
        lam = default_lambda(10, 10, 3, 1500, 1, c=0.05)
        res = fit_nuclear_norm_glm(LINEAR, X, y, lam, SPEC)
        assert res.converged
        err = np.linalg.norm(res.W - inst.W_star) / np.linalg.norm(inst.W_star)
        assert err <= 0.2

    @pytest.mark.parametrize("kind", ["linear", "logistic", "poisson"])
    @pytest.mark.parametrize("accel", [True, False])
    def test_descent_and_fixed_point(self, kind, accel, rng):
        fam = LinkFamily(kind)
        dims = (4, 4, 3)
        W0 = t_product(rng.standard_normal((4, 1, 3)), rng.standard_normal((1, 4, 3)), SPEC)
        W0 /= np.linalg.norm(W0)
        X = sphere_design(200, dims, rng) * 3
        y = sample_reward(fam, np.tensordot(X, W0, axes=3), rng)
        lam = 0.01
        res = fit_nuclear_norm_glm(fam, X, y, lam, SPEC, SolverOptions(use_acceleration=accel))
        assert res.converged
        objs = [h[1] for h in res.history]
        assert np.all(np.diff(objs) <= 1e-12)
        F0 = glm_loss(fam, np.zeros(dims), X, y)
        assert res.objective <= F0
        step = svt_prox(res.W - res.step * glm_loss_gradient(fam, res.W, X, y), res.step * lam, SPEC)
        assert np.linalg.norm(res.W - step) / max(1.0, np.linalg.norm(res.W)) <= SolverOptions().grad_tol
        expected = glm_loss(fam, res.W, X, y) + lam * nuclear_norm(res.W, SPEC)
        assert abs(res.objective - expected) <= 1e-12

    def test_nonconvergence_flagged(self, rng):
        inst, X, y = synthetic_regression(300, seed=1)
        res = fit_nuclear_norm_glm(LINEAR, X, y, 1e-4, SPEC, SolverOptions(max_iters=3))
        assert not res.converged
        assert res.n_iter == 3
        assert res.residual > SolverOptions().grad_tol

    def test_iteration_log(self, tmp_path, rng):
        inst, X, y = synthetic_regression(200, seed=2)
        path = tmp_path / "fit.csv"
        res = fit_nuclear_norm_glm(LINEAR, X, y, 0.01, SPEC, log_path=path)
        lines = path.read_text().splitlines()
        assert lines[0] == "iter,objective,residual,step"
        assert len(lines) == len(res.history) + 1
        assert float(lines[-1].split(",")[1]) == res.history[-1][1]

    def test_input_checks(self, rng):
        X = rng.standard_normal((5, 2, 2, 3))
        with pytest.raises(ValueError):
            fit_nuclear_norm_glm(LINEAR, X, np.zeros(5), 0.0, SPEC)
        with pytest.raises(ValueError):
            fit_nuclear_norm_glm(LINEAR, X, np.zeros(4), 0.1, SPEC)

    def test_rank_recovery(self):
        hits = 0
        for seed in range(5):
            inst, X, y = synthetic_regression(2000, seed)
            lam = default_lambda(10, 10, 3, 2000, 1, c=0.05)
            W = fit_nuclear_norm_glm(LINEAR, X, y, lam, SPEC).W
            hits += tubal_rank(t_svd(W, SPEC), tol=1e-3) == 1
            assert estimate_rank(W, SPEC) >= 1
        assert hits >= 4


class TestDefaultLambda:
    def test_reference_value(self):
        assert abs(default_lambda(10, 10, 3, 1000, 1) - math.sqrt(math.log(3) / 90000)) <= 1e-15
        assert abs(default_lambda(10, 10, 3, 1000, 1) - 3.494e-3) <= 1e-6

    def test_scaling_in_n(self):
        ratio = default_lambda(8, 6, 4, 100, 2) / default_lambda(8, 6, 4, 200, 2)
        assert abs(ratio - math.sqrt(2)) <= 1e-12

    def test_gap_divergence(self):
        vals = [default_lambda(10, 10, 3, 100, 1, gamma=g) for g in (0.0, 0.5, 0.9, 0.99, 0.999)]
        assert np.all(np.diff(vals) > 0)
        assert vals[-1] > 100 * vals[0]

    @pytest.mark.parametrize("kw", [{"gamma": 1.0}, {"gamma": -0.1}, {"d3": 1}, {"a": 0.0}, {"a": 1.5}, {"n": 0}])
    def test_invalid(self, kw):
        args = dict(d1=5, d2=5, d3=3, n=10, r=1)
        args.update(kw)
        with pytest.raises(ValueError):
            default_lambda(**args)


def leading_factors(W, r, spec):
    f = t_svd(W, spec)
    return f.U[:, :r], f.V[:, :r]


class TestSubspaces:
    def test_orthogonal_factors(self, kind, rng):
        spec = TransformSpec.from_name(kind, 3, seed=4)
        est = extract_subspaces(rng.standard_normal((6, 5, 3)), 2, spec)
        assert est.U_hat.shape == (6, 2, 3) and est.U_perp.shape == (6, 4, 3)
        assert est.V_hat.shape == (5, 2, 3) and est.V_perp.shape == (5, 3, 3)
        for F, m in ((est.U_full, 6), (est.V_full, 5)):
            np.testing.assert_allclose(t_product(conj_transpose(F), F, spec), identity_tensor(m, 3, spec), atol=1e-8)

    def test_leading_slices_match_t_svd(self, rng):
        W = rng.standard_normal((6, 5, 3))
        est = extract_subspaces(W, 2, SPEC)
        U, V = leading_factors(W, 2, SPEC)
        np.testing.assert_allclose(est.U_hat, U, atol=1e-12)
        np.testing.assert_allclose(est.V_hat, V, atol=1e-12)

    def test_exact_recovery(self):
        inst = generate_synthetic_instance(10, 10, 3, 2, 10, LINEAR, SPEC, seed=3)
        est = extract_subspaces(inst.W_star, 2, SPEC)
        U, V = leading_factors(inst.W_star, 2, SPEC)
        assert np.linalg.norm(t_product(conj_transpose(est.U_perp), U, SPEC)) <= 1e-8
        assert subspace_distance(est, U, V, SPEC) <= 1e-8

    def test_full_rank_split(self, rng):
        est = extract_subspaces(rng.standard_normal((4, 4, 3)), 4, SPEC)
        assert est.U_perp.shape[1] == 0 and est.V_perp.shape[1] == 0
        assert subspace_distance(est, est.U_hat, est.V_hat, SPEC) == 0.0

    def test_rank_out_of_range(self, rng):
        with pytest.raises(ValueError):
            extract_subspaces(rng.standard_normal((4, 3, 3)), 4, SPEC)
        with pytest.raises(ValueError):
            extract_subspaces(rng.standard_normal((4, 3, 3)), 0, SPEC)

    def test_orthogonal_construction(self, rng):
        est = extract_subspaces(rng.standard_normal((6, 6, 3)), 2, SPEC)
        U_star = est.U_perp[:, :1]
        V_star = rng.standard_normal((6, 1, 3))
        expected = np.linalg.norm(U_star) * np.linalg.norm(t_product(conj_transpose(est.V_perp), V_star, SPEC))
        assert abs(subspace_distance(est, U_star, V_star, SPEC) - expected) <= 1e-10

    def test_dimension_mismatch(self, rng):
        est = extract_subspaces(rng.standard_normal((6, 5, 3)), 2, SPEC)
        with pytest.raises(ValueError):
            subspace_distance(est, rng.standard_normal((5, 1, 3)), rng.standard_normal((5, 1, 3)), SPEC)

    @pytest.mark.parametrize("seed", range(4))
    def test_error_bound(self, seed):
        inst, X, y = synthetic_regression(600, seed)
        W = fit_nuclear_norm_glm(LINEAR, X, y, default_lambda(10, 10, 3, 600, 1, c=0.05), SPEC).W
        est = extract_subspaces(W, 1, SPEC)
        U, V = leading_factors(inst.W_star, 1, SPEC)
        bound = np.linalg.norm(inst.W_star - W) ** 2 / inst.omega_min**2
        assert subspace_distance(est, U, V, SPEC) <= bound + 1e-6
