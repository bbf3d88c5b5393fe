"""Subspace rotation, LowGLM-UCB, G-LowTESTR and the GLM-UCB baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Union

import numpy as np
import scipy.linalg

from .environment import BanditInstance, RegretTrace, oracle_arm, play, regret_update, reward_rng
from .estimator import (
    FitResult,
    SolverOptions,
    SubspaceEstimate,
    default_lambda,
    estimate_rank,
    extract_subspaces,
    fit_nuclear_norm_glm,
    subspace_distance,
)
from .glm import LinkFamily
from .tensor_algebra import (
    TransformSpec,
    apply_transform,
    conj_transpose,
    inverse_transform,
    singular_value_gap,
    t_product,
    t_svd,
    vec,
)

__all__ = [
    "RotationContext",
    "LowGlmUcbState",
    "ScoreSolveError",
    "EstimatorDidNotConverge",
    "GLowTestrParams",
    "GlmUcbParams",
    "rotate_arm",
    "rotate_arms",
    "unrotate_arm",
    "vectorize_rotated",
    "rotation_context",
    "solve_glm_score",
    "alpha_bonus",
    "glm_ucb_radius",
    "lambda_perp_schedule",
    "b_perp_schedule",
    "default_T1",
    "estimate_gamma",
    "lowglm_ucb_select",
    "lowglm_ucb_update",
    "run_g_lowtestr",
    "run_glm_ucb_baseline",
    "run_uniform_random",
]


class ScoreSolveError(RuntimeError):
    def __init__(self, residual: float, n_iter: int):
        super().__init__(f"Newton did not solve the score equation in {n_iter} iterations (residual {residual:.3e})")
        self.residual = residual
        self.n_iter = n_iter


class EstimatorDidNotConverge(RuntimeError):
    def __init__(self, fit: FitResult, trace: RegretTrace):
        super().__init__(
            f"nuclear-norm fit stopped after {fit.n_iter} iterations with residual {fit.residual:.3e}"
        )
        self.fit = fit
        self.trace = trace


# ---------------------------------------------------------------------------
# rotation and block vectorization


@dataclass(frozen=True, eq=False)
class RotationContext:
    """Rotation by estimated subspaces plus the four-block coordinate layout.

    ``perm[q]`` is the canonical-vec index of the ``q``-th rotated
    coordinate. Blocks come in the order ``(1:r, 1:r)``, ``(r+1:d1, 1:r)``,
    ``(1:r, r+1:d2)``, ``(r+1:d1, r+1:d2)``, each over all of mode 3 and each
    vectorized canonically, so the first ``k`` coordinates are the three
    blocks touching the estimated subspaces.
    """

    est: SubspaceEstimate
    r: int
    k: int
    p: int
    dims: tuple
    perm: np.ndarray = field(repr=False)

    @property
    def U_full(self):
        return self.est.U_full

    @property
    def V_full(self):
        return self.est.V_full


def _block_permutation(d1: int, d2: int, d3: int, r: int) -> np.ndarray:
    idx = np.arange(d1 * d2 * d3).reshape((d1, d2, d3), order="F")
    blocks = [
        idx[:r, :r, :],
        idx[r:, :r, :],
        idx[:r, r:, :],
        idx[r:, r:, :],
    ]
    return np.concatenate([b.ravel(order="F") for b in blocks])


def rotation_context(est: SubspaceEstimate) -> RotationContext:
    d1, d2, d3 = est.W_hat.shape
    r = est.r
    return RotationContext(
        est=est,
        r=r,
        k=(d1 + d2) * d3 * r - d3 * r * r,
        p=d1 * d2 * d3,
        dims=(d1, d2, d3),
        perm=_block_permutation(d1, d2, d3, r),
    )


def rotate_arm(X, ctx: RotationContext, spec: TransformSpec) -> np.ndarray:
    """``[U U_perp]^T *_L X *_L [V V_perp]``."""
    X = np.asarray(X, dtype=float)
    if X.shape != ctx.dims:
        raise ValueError(f"arm dims {X.shape} do not match the subspace estimate {ctx.dims}")
    left = t_product(conj_transpose(ctx.U_full), X, spec)
    return t_product(left, ctx.V_full, spec)


def unrotate_arm(X_prime, ctx: RotationContext, spec: TransformSpec) -> np.ndarray:
    left = t_product(ctx.U_full, np.asarray(X_prime, dtype=float), spec)
    return t_product(left, conj_transpose(ctx.V_full), spec)


def rotate_arms(arms, ctx: RotationContext, spec: TransformSpec) -> np.ndarray:
    """Batched :func:`rotate_arm` for arms stacked as ``(n, d1, d2, d3)``."""
    arms = np.asarray(arms, dtype=float)
    if arms.shape[1:] != ctx.dims:
        raise ValueError("arm dims do not match the subspace estimate")
    Ub = np.moveaxis(apply_transform(ctx.U_full, spec), 2, 0)
    Vb = np.moveaxis(apply_transform(ctx.V_full, spec), 2, 0)
    Xb = arms @ spec.matrix.T
    Yb = np.einsum("kia,nijk,kjb->nabk", Ub, Xb, Vb, optimize=True)
    return Yb @ spec.inverse_matrix.T


def vectorize_rotated(X_prime, ctx: RotationContext) -> np.ndarray:
    X_prime = np.asarray(X_prime, dtype=float)
    if X_prime.shape[-3:] != ctx.dims:
        raise ValueError(f"tensor dims {X_prime.shape[-3:]} do not match {ctx.dims}")
    if X_prime.ndim == 3:
        return vec(X_prime)[ctx.perm]
    flat = X_prime.reshape(X_prime.shape[0], -1, order="F")
    return flat[:, ctx.perm]


# ---------------------------------------------------------------------------
# regularized score equation


def solve_glm_score(
    family: LinkFamily,
    X,
    y,
    lam_diag,
    theta0=None,
    weights=None,
    tol: float = 1e-8,
    max_iter: int = 100,
) -> np.ndarray:
    """Solve ``sum_i w_i mu(x_i^T theta) x_i + Lambda theta = sum_i w_i y_i x_i``.

    Damped Newton on the strictly convex objective
    ``sum_i w_i (b(x_i^T theta) - y_i x_i^T theta) + theta^T Lambda theta / 2``,
    whose gradient is the score residual. Rows with weight ``w_i`` stand for
    ``w_i`` repeated observations with mean reward ``y_i``.

    Stops once ``||residual||_2 <= tol * max(1, ||sum_i w_i y_i x_i||_2)``.

    Raises
    ------
    ScoreSolveError
        If that tolerance is not met within ``max_iter`` Newton steps.
    """
    lam = np.asarray(lam_diag, dtype=float)
    p = lam.size
    if np.any(lam <= 0):
        raise ValueError("Lambda entries must be positive")
    X = np.asarray(X, dtype=float).reshape(-1, p)
    y = np.asarray(y, dtype=float).reshape(-1)
    w = np.ones(len(y)) if weights is None else np.asarray(weights, dtype=float)
    keep = w > 0
    X, y, w = X[keep], y[keep], w[keep]
    theta = np.zeros(p) if theta0 is None else np.array(theta0, dtype=float)
    if X.shape[0] == 0:
        return np.zeros(p)
    target = X.T @ (w * y)
    scale = tol * max(1.0, float(np.linalg.norm(target)))

    def objective(th):
        eta = X @ th
        return float(np.sum(w * (family.b(eta) - y * eta)) + 0.5 * np.dot(lam * th, th))

    eta = X @ theta
    resid = X.T @ (w * family.mu(eta)) + lam * theta - target
    obj = objective(theta)
    for it in range(max_iter + 1):
        rnorm = float(np.linalg.norm(resid))
        if rnorm <= scale:
            return theta
        if it == max_iter:
            break
        curv = w * family.dmu(eta)
        step = -_solve_newton(X, curv, lam, resid)
        slope = float(np.dot(resid, step))
        # below float resolution of the objective Armijo cannot tell steps apart;
        # this close in, the undamped step is the right one
        flat = -slope <= 1e-12 * max(1.0, abs(obj))
        t = 1.0
        cand = theta + step
        cand_obj = objective(cand)
        while not flat and not (np.isfinite(cand_obj) and cand_obj <= obj + 1e-4 * t * slope):
            t *= 0.5
            if t < 1e-12:
                cand, cand_obj = theta + step, objective(theta + step)
                break
            cand = theta + t * step
            cand_obj = objective(cand)
        theta, obj = cand, cand_obj
        eta = X @ theta
        resid = X.T @ (w * family.mu(eta)) + lam * theta - target
    raise ScoreSolveError(rnorm, max_iter)


def _solve_newton(X, curv, lam, rhs):
    """Solve ``(X^T diag(curv) X + diag(lam)) z = rhs``."""
    n, p = X.shape
    if n < p:
        # Woodbury in the n-dimensional row space
        S = X * np.sqrt(curv)[:, None]
        SL = S / lam
        inner = np.eye(n) + SL @ S.T
        z0 = rhs / lam
        c = scipy.linalg.cho_solve(scipy.linalg.cho_factor(inner), S @ z0)
        return z0 - SL.T @ c
    H = X.T @ (X * curv[:, None])
    H[np.diag_indices(p)] += lam
    return scipy.linalg.cho_solve(scipy.linalg.cho_factor(H), rhs)


# ---------------------------------------------------------------------------
# confidence radius and schedules


def alpha_bonus(t, delta, M, m, k, lam, lam_perp, B_perp, T1=0, p=None) -> float:
    """Confidence radius of LowGLM-UCB at round ``t`` and failure rate ``delta``.

    ``(M/m) * (sqrt(k log(1 + m(t+T1)/(k lam)) + m(t+T1)/lam_perp - log(delta^2))
    + sqrt(m) (sqrt(lam) + sqrt(lam_perp) B_perp))``.

    The ``m(t+T1)/lam_perp`` term bounds the log-determinant of the ``p - k``
    complement coordinates; when ``p`` is given and equals ``k`` there are
    none and the term is dropped.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    n = m * (t + T1)
    inside = k * math.log1p(n / (k * lam)) - 2.0 * math.log(delta)
    if p is None or p > k:
        inside += n / lam_perp
    return (M / m) * (math.sqrt(inside) + math.sqrt(m) * (math.sqrt(lam) + math.sqrt(lam_perp) * B_perp))


def glm_ucb_radius(t, delta, M, m, p, lam) -> float:
    """Standard GLM-UCB radius ``(M/m)(sqrt(p log(1 + m t/(p lam)) - log(delta^2)) + sqrt(m lam))``."""
    return (M / m) * (math.sqrt(p * math.log1p(m * t / (p * lam)) - 2.0 * math.log(delta)) + math.sqrt(m * lam))


def lambda_perp_schedule(m, T, k, lam) -> float:
    """``m T / (k log(1 + m T / (k lam)))``."""
    x = m * T / k
    return x / math.log1p(x / lam)


def b_perp_schedule(d1, d2, d3, T1, omega_min, a=1.0, gamma=0.0, ell=1.0, c=1.0) -> float:
    """``c * ell * (d1+d2)^3 d3 log d3 / (a T1 (1-gamma)^2 omega_min^2)``."""
    return c * ell * (d1 + d2) ** 3 * d3 * math.log(d3) / (a * T1 * (1 - gamma) ** 2 * omega_min**2)


def default_T1(d1, d2, d3, T, omega_min, a=1.0, gamma=0.0, ell=1.0, c=1.0) -> int:
    """Exploration length ``c (d1+d2)^1.5 sqrt(d3 ell log(d3) T) / (omega_min sqrt(a) (1-gamma))``.

    The rounded value is clamped to ``[d3 (d1+d2), T // 2]``; at realistic
    sizes the raw formula exceeds ``T``.
    """
    if not omega_min > 0:
        raise ValueError("omega_min must be positive")
    if not 0 <= gamma < 1:
        raise ValueError("gamma must lie in [0, 1)")
    if not 0 < a <= 1:
        raise ValueError("a must lie in (0, 1]")
    raw = c * (d1 + d2) ** 1.5 * math.sqrt(d3 * ell * math.log(d3) * T) / (omega_min * math.sqrt(a) * (1 - gamma))
    hi = T // 2
    lo = min(d3 * (d1 + d2), hi)
    return int(min(max(round(raw), lo), hi))


def estimate_gamma(arms, a: float, r: int, spec: TransformSpec) -> float:
    """Median singular-value gap over an arm pool."""
    return float(np.median([singular_value_gap(X, a, r, spec) for X in np.asarray(arms)]))


# ---------------------------------------------------------------------------
# LowGLM-UCB state


class LowGlmUcbState:
    """Design matrix, regularizer and estimate of LowGLM-UCB.

    ``V`` starts at ``sum_i x_i x_i^T + Lambda / m`` over the warm-start
    rows and grows by ``x x^T`` per update. Observations are stored
    aggregated by ``key`` (the arm index in the runners) so the score
    equation costs ``O(#distinct arms)`` per Newton step. The inverse of
    ``V`` is kept by Sherman-Morrison updates and refreshed from a Cholesky
    factorization every ``refresh_every`` updates.

    Parameters
    ----------
    family : LinkFamily
    p, k : int
        Ambient and low dimension; ``Lambda`` is ``lam`` on the first ``k``
        coordinates and ``lam_perp`` on the rest.
    lam, lam_perp, B_perp : float
    T1 : int
        Rounds spent before this state (shifts ``t`` inside the radius).
    alpha_scale : float
        Multiplier on the radius; 1 is the theoretical value.
    """

    def __init__(
        self,
        family: LinkFamily,
        p: int,
        k: int,
        lam: float = 1.0,
        lam_perp: float | None = None,
        B_perp: float = 0.0,
        T1: int = 0,
        alpha_scale: float = 1.0,
        warm_X=None,
        warm_y=None,
        warm_keys=None,
        refresh_every: int = 500,
    ):
        if not 0 < k <= p:
            raise ValueError("need 0 < k <= p")
        lam_perp = lam if lam_perp is None else lam_perp
        if lam <= 0 or lam_perp <= 0 or B_perp < 0:
            raise ValueError("lam, lam_perp must be positive and B_perp non-negative")
        self.family = family
        self.p, self.k = p, k
        self.lam, self.lam_perp, self.B_perp = float(lam), float(lam_perp), float(B_perp)
        self.T1 = int(T1)
        self.alpha_scale = float(alpha_scale)
        self.M, self.m = family.M_upper, family.m_lower
        self.Lambda = np.full(p, self.lam)
        self.Lambda[k:] = self.lam_perp
        self.refresh_every = refresh_every
        self.V = np.diag(self.Lambda / self.m)
        self.round = 0
        self._rows: list[np.ndarray] = []
        self._w: list[float] = []
        self._ysum: list[float] = []
        self._keys: dict = {}
        self._since_refresh = 0
        self._arms = None
        self.theta_hat = np.zeros(p)
        if warm_X is not None:
            warm_X = np.asarray(warm_X, dtype=float).reshape(-1, p)
            warm_y = np.asarray(warm_y, dtype=float)
            keys = [None] * len(warm_y) if warm_keys is None else list(warm_keys)
            for x, yv, key in zip(warm_X, warm_y, keys):
                self._record(x, yv, key)
            self.V += warm_X.T @ warm_X
        self.V_inv = _spd_inverse(self.V)
        self._resolve()

    # bookkeeping --------------------------------------------------------

    def _record(self, x, reward, key):
        if key is not None and key in self._keys:
            i = self._keys[key]
            self._w[i] += 1.0
            self._ysum[i] += float(reward)
            return
        if key is not None:
            self._keys[key] = len(self._rows)
        self._rows.append(np.array(x, dtype=float))
        self._w.append(1.0)
        self._ysum.append(float(reward))

    def history_arrays(self):
        """Distinct rows, their counts and reward sums."""
        if not self._rows:
            return np.zeros((0, self.p)), np.zeros(0), np.zeros(0)
        return np.array(self._rows), np.array(self._w), np.array(self._ysum)

    @property
    def n_obs(self) -> int:
        return int(sum(self._w))

    def _resolve(self):
        X, w, s = self.history_arrays()
        if len(w) == 0:
            self.theta_hat = np.zeros(self.p)
            return
        self.theta_hat = solve_glm_score(self.family, X, s / w, self.Lambda, theta0=self.theta_hat, weights=w)

    # radius and widths ----------------------------------------------------

    def alpha(self, t: int, delta: float) -> float:
        return self.alpha_scale * alpha_bonus(
            t, delta, self.M, self.m, self.k, self.lam, self.lam_perp, self.B_perp, self.T1, p=self.p
        )

    def register_arms(self, arms_vec):
        """Cache ``||x||^2_{V^-1}`` for a fixed arm matrix, maintained by rank-one updates."""
        self._arms = np.asarray(arms_vec, dtype=float)
        self._width_sq = np.einsum("ij,jk,ik->i", self._arms, self.V_inv, self._arms)

    def widths(self, arms_vec) -> np.ndarray:
        """``||x||_{V^-1}`` for each row via a Cholesky solve."""
        A = np.asarray(arms_vec, dtype=float).reshape(-1, self.p)
        if self._arms is not None and A is self._arms:
            return np.sqrt(np.maximum(self._width_sq, 0.0))
        try:
            cf = scipy.linalg.cho_factor(self.V)
        except np.linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError("design matrix V is not positive definite") from exc
        Z = scipy.linalg.cho_solve(cf, A.T)
        return np.sqrt(np.maximum(np.einsum("ij,ji->i", A, Z), 0.0))

    def update(self, x, reward: float, key=None):
        x = np.asarray(x, dtype=float).reshape(self.p)
        g = self.V_inv @ x
        denom = 1.0 + float(x @ g)
        self.V += np.outer(x, x)
        self._since_refresh += 1
        if self._since_refresh >= self.refresh_every:
            self.V_inv = _spd_inverse(self.V)
            self._since_refresh = 0
            if self._arms is not None:
                self.register_arms(self._arms)
        else:
            self.V_inv -= np.outer(g, g) / denom
            if self._arms is not None:
                self._width_sq -= (self._arms @ g) ** 2 / denom
        self._record(x, reward, key)
        self.round += 1
        self._resolve()
        return self


def _spd_inverse(V):
    c, low = scipy.linalg.cho_factor(V)
    return scipy.linalg.cho_solve((c, low), np.eye(V.shape[0]))


def lowglm_ucb_select(state: LowGlmUcbState, arms_vec, delta: float, return_details: bool = False):
    """Index maximizing ``mu(x^T theta) + alpha_t(delta/2) ||x||_{V^-1}``; ties go to the lowest index."""
    A = arms_vec if isinstance(arms_vec, np.ndarray) else np.asarray(arms_vec, dtype=float)
    if A.shape[0] == 0:
        raise ValueError("no arms to choose from")
    alpha = state.alpha(state.round + 1, delta / 2)
    mean = state.family.mu(A @ state.theta_hat)
    bonus = alpha * state.widths(A)
    i = int(np.argmax(mean + bonus))
    if return_details:
        return i, float(bonus[i]), float(mean[i])
    return i


def lowglm_ucb_update(state: LowGlmUcbState, chosen, reward: float, key=None) -> LowGlmUcbState:
    return state.update(chosen, reward, key)


# ---------------------------------------------------------------------------
# runners

BPerp = Union[float, str]


@dataclass(frozen=True)
class GLowTestrParams:
    """Knobs of G-LowTESTR; ``"auto"`` entries follow the built-in schedules.

    ``B_perp`` is a number, ``"schedule"`` (the ``T1``-dependent bound scaled
    by ``c_B``) or ``"oracle"`` (the exact complement-block norm of the
    rotated ``W*``, only for synthetic runs). ``subspace="oracle"`` injects
    the subspaces of ``W*`` itself instead of estimating them.
    """

    T1: Union[int, str] = "auto"
    r: Union[int, str, None] = None
    lambda_T1: Union[float, str] = "auto"
    lam: float = 1.0
    delta: float = 0.01
    a: float = 1.0
    c_lambda: float = 0.05
    c_T1: float = 1.0
    gamma: Union[float, None] = None
    B_perp: BPerp = "schedule"
    c_B: float = 1.0
    alpha_scale: float = 1.0
    subspace: str = "estimate"
    solver: SolverOptions = field(default_factory=SolverOptions)
    strict: bool = False


@dataclass(frozen=True)
class GlmUcbParams:
    lam: float = 1.0
    delta: float = 0.01
    alpha_scale: float = 1.0


def _explore(instance, T1, seed, trace, best, decisions):
    rng = np.random.default_rng(seed)
    idx = np.empty(T1, dtype=int)
    y = np.empty(T1)
    for t in range(1, T1 + 1):
        i = int(rng.integers(instance.n_arms))
        obs = play(instance, i, reward_rng(seed, t, i), t)
        idx[t - 1], y[t - 1] = i, obs.reward
        regret_update(trace, instance, i, best)
        if decisions is not None:
            decisions.append((t, i, 0.0, float("nan")))
    return idx, y


def _ucb_rounds(instance, state, A, t0, T, seed, delta, trace, best, decisions):
    state.register_arms(A)
    for t in range(t0 + 1, T + 1):
        i, bonus, mean = lowglm_ucb_select(state, A, delta, return_details=True)
        obs = play(instance, i, reward_rng(seed, t, i), t)
        state.update(A[i], obs.reward, key=i)
        regret_update(trace, instance, i, best)
        if decisions is not None:
            decisions.append((t, i, bonus, mean))


def run_g_lowtestr(
    instance: BanditInstance,
    T: int,
    params: GLowTestrParams | None = None,
    seed: int = 0,
    decisions: list | None = None,
) -> RegretTrace:
    """Explore uniformly, estimate subspaces, then run LowGLM-UCB in rotated coordinates.

    Exploration observations are rotated into the same coordinates as the
    refine stage and seed both the design matrix and the score equation.
    Rewards for arm ``i`` at round ``t`` come from ``reward_rng(seed, t, i)``.
    If ``decisions`` is a list, ``(round, arm, bonus, predicted_mean)``
    tuples are appended to it.
    """
    params = params or GLowTestrParams()
    spec = instance.spec
    d1, d2, d3 = instance.dims
    fam = instance.family
    if T < 2:
        raise ValueError("T must be at least 2")
    if params.r in (None, "auto"):
        r = instance.r_true if params.r is None else None
    else:
        r = int(params.r)
    if r is not None and not 1 <= r <= min(d1, d2):
        raise ValueError(f"r={r} outside [1, {min(d1, d2)}]")
    r_sched = r or 1
    gamma = params.gamma
    if gamma is None:
        gamma = estimate_gamma(instance.arms, params.a, r_sched, spec)
    if params.T1 == "auto":
        T1 = default_T1(d1, d2, d3, T, instance.omega_min, params.a, gamma, spec.ell, params.c_T1)
    else:
        T1 = int(params.T1)
    if not 1 <= T1 < T:
        raise ValueError(f"T1={T1} must satisfy 1 <= T1 < T={T}")

    trace = RegretTrace("g-lowtestr", seed, T1_used=T1)
    _, best = oracle_arm(instance)
    idx, y = _explore(instance, T1, seed, trace, best, decisions)

    if params.subspace == "oracle":
        W_hat = instance.W_star
    else:
        if params.lambda_T1 == "auto":
            lam_T1 = default_lambda(d1, d2, d3, T1, r_sched, params.a, gamma, spec.ell, params.c_lambda)
        else:
            lam_T1 = float(params.lambda_T1)
        fit = fit_nuclear_norm_glm(fam, instance.arms[idx], y, lam_T1, spec, params.solver)
        if params.strict and not fit.converged:
            raise EstimatorDidNotConverge(fit, trace)
        W_hat = fit.W
        trace.info.update({"lambda_T1": lam_T1, "converged": fit.converged, "residual": fit.residual})
    if r is None:
        r = estimate_rank(W_hat, spec)
    est = extract_subspaces(W_hat, r, spec)
    ctx = rotation_context(est)
    A = vectorize_rotated(rotate_arms(instance.arms, ctx, spec), ctx)

    m = fam.m_lower
    lam_perp = lambda_perp_schedule(m, T, ctx.k, params.lam) if ctx.k < ctx.p else params.lam
    if isinstance(params.B_perp, str):
        if params.B_perp == "schedule":
            B_perp = b_perp_schedule(
                d1, d2, d3, T1, instance.omega_min, params.a, gamma, spec.ell, params.c_B
            )
        elif params.B_perp == "oracle":
            theta_star = vectorize_rotated(rotate_arm(instance.W_star, ctx, spec), ctx)
            B_perp = float(np.linalg.norm(theta_star[ctx.k :]))
        else:
            raise ValueError(f"unknown B_perp mode {params.B_perp!r}")
    else:
        B_perp = float(params.B_perp)
    if ctx.k == ctx.p:
        B_perp = 0.0

    state = LowGlmUcbState(
        fam,
        ctx.p,
        ctx.k,
        lam=params.lam,
        lam_perp=lam_perp,
        B_perp=B_perp,
        T1=T1,
        alpha_scale=params.alpha_scale,
        warm_X=A[idx],
        warm_y=y,
        warm_keys=idx.tolist(),
    )
    trace.info.update({"T1": T1, "r": r, "k": ctx.k, "gamma": gamma, "lam_perp": lam_perp, "B_perp": B_perp})
    _ucb_rounds(instance, state, A, T1, T, seed, params.delta, trace, best, decisions)
    return trace


def run_glm_ucb_baseline(
    instance: BanditInstance,
    T: int,
    params: GlmUcbParams | None = None,
    seed: int = 0,
    decisions: list | None = None,
) -> RegretTrace:
    """GLM-UCB on canonically vectorized arms: LowGLM-UCB with ``k = p`` and no exploration stage."""
    params = params or GlmUcbParams()
    if T < 1:
        raise ValueError("T must be positive")
    A = instance.arm_matrix
    p = A.shape[1]
    state = LowGlmUcbState(instance.family, p, p, lam=params.lam, alpha_scale=params.alpha_scale)
    trace = RegretTrace("glm-ucb", seed, T1_used=0)
    _, best = oracle_arm(instance)
    _ucb_rounds(instance, state, A, 0, T, seed, params.delta, trace, best, decisions)
    return trace


def run_uniform_random(instance: BanditInstance, T: int, params=None, seed: int = 0, decisions=None) -> RegretTrace:
    trace = RegretTrace("uniform-random", seed, T1_used=T)
    _, best = oracle_arm(instance)
    _explore(instance, T, seed, trace, best, decisions)
    return trace
