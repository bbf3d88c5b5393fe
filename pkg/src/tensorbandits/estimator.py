"""Tensor-nuclear-norm penalized GLM estimation and subspace extraction."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .glm import LinkFamily
from .tensor_algebra import (
    TransformSpec,
    conj_transpose,
    nuclear_norm,
    svt_prox,
    t_product,
    t_svd,
    tubal_rank,
    vec,
    unvec,
)

__all__ = [
    "SolverOptions",
    "FitResult",
    "SubspaceEstimate",
    "fit_nuclear_norm_glm",
    "default_lambda",
    "extract_subspaces",
    "estimate_rank",
    "subspace_distance",
]


@dataclass(frozen=True)
class SolverOptions:
    max_iters: int = 2000
    grad_tol: float = 1e-7
    step_init: float = 1.0
    backtrack_beta: float = 0.5
    use_acceleration: bool = True
    # step is multiplied by this before every line search; 1.0 disables growth
    step_growth: float = 1.25

    def __post_init__(self):
        if not self.grad_tol > 0:
            raise ValueError("grad_tol must be positive")
        if not 0 < self.backtrack_beta < 1:
            raise ValueError("backtrack_beta must lie in (0, 1)")
        if self.max_iters < 1 or not self.step_init > 0:
            raise ValueError("max_iters and step_init must be positive")


@dataclass(eq=False)
class FitResult:
    W: np.ndarray
    converged: bool
    n_iter: int
    residual: float
    step: float
    objective: float
    history: list = field(default_factory=list, repr=False)


class _Problem:
    """Smooth GLM loss on a flattened design ``X`` of shape ``(n, p)``."""

    def __init__(self, family: LinkFamily, X: np.ndarray, y: np.ndarray, dims):
        self.family = family
        self.X = X
        self.y = y
        self.dims = dims
        self.n = X.shape[0]

    def loss(self, W):
        eta = self.X @ vec(W)
        return float(np.mean(self.family.b(eta) - self.y * eta))

    def loss_grad(self, W):
        eta = self.X @ vec(W)
        f = float(np.mean(self.family.b(eta) - self.y * eta))
        g = self.X.T @ (self.family.mu(eta) - self.y) / self.n
        return f, unvec(g, self.dims)


def fit_nuclear_norm_glm(
    family: LinkFamily,
    X,
    y,
    lam: float,
    spec: TransformSpec,
    opts: SolverOptions | None = None,
    W0=None,
    log_path=None,
) -> FitResult:
    """Minimize ``L(W) + lam * ||W||_*`` by accelerated proximal gradient.

    ``L`` is the empirical GLM loss of :func:`tensorbandits.glm.glm_loss`.
    Steps are chosen by backtracking (with mild growth between iterations);
    momentum is reset whenever the objective would increase, so accepted
    iterates have a non-increasing objective.

    Parameters
    ----------
    family : LinkFamily
    X : ndarray, shape (n, d1, d2, d3)
        Arms of the observations.
    y : ndarray, shape (n,)
        Rewards.
    lam : float
        Nuclear-norm weight, must be positive.
    spec : TransformSpec
    opts : SolverOptions, optional
    W0 : ndarray, optional
        Starting point; zero by default.
    log_path : path-like, optional
        If given, write ``iter,objective,residual,step`` rows as CSV.

    Returns
    -------
    FitResult
        ``converged`` is False when ``max_iters`` ran out before the
        stationarity residual
        ``||W - prox(W - s grad L(W), s lam)||_F / max(1, ||W||_F)``
        reached ``opts.grad_tol``.
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    opts = opts or SolverOptions()
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 4 or X.shape[0] == 0 or y.shape != (X.shape[0],):
        raise ValueError("X must have shape (n, d1, d2, d3) with n >= 1 and y shape (n,)")
    dims = X.shape[1:]
    Xm = X.reshape(X.shape[0], -1, order="F")
    prob = _Problem(family, Xm, y, dims)

    def objective(W, f=None):
        if f is None:
            f = prob.loss(W)
        return f + lam * nuclear_norm(W, spec)

    W = np.zeros(dims) if W0 is None else np.array(W0, dtype=float)
    fW, gW = prob.loss_grad(W)
    F = objective(W, fW)
    Z, fZ, gZ = W, fW, gW
    t = 1.0
    s = opts.step_init
    history = [(0, F, math.inf, s)]
    residual = math.inf
    converged = False
    it = 0
    while it < opts.max_iters:
        it += 1
        s = s * opts.step_growth
        while True:
            W_new = svt_prox(Z - s * gZ, s * lam, spec)
            D = W_new - Z
            f_new = prob.loss(W_new)
            if f_new <= fZ + np.vdot(gZ, D) + np.vdot(D, D) / (2 * s) + 1e-15 * abs(fZ):
                break
            s *= opts.backtrack_beta
        F_new = objective(W_new, f_new)
        if F_new > F and Z is not W:
            # restart: drop momentum and take a plain step from W
            Z, fZ, gZ, t = W, fW, gW, 1.0
            it -= 1
            continue
        f_new, g_new = prob.loss_grad(W_new)
        W_prev = W
        W, fW, gW, F = W_new, f_new, g_new, F_new
        res_step = W - svt_prox(W - s * gW, s * lam, spec)
        residual = float(np.linalg.norm(res_step) / max(1.0, np.linalg.norm(W)))
        history.append((it, F_new, residual, s))
        if residual <= opts.grad_tol:
            converged = True
            break
        if opts.use_acceleration:
            t_next = 0.5 * (1 + math.sqrt(1 + 4 * t * t))
            Z = W + ((t - 1) / t_next) * (W - W_prev)
            t = t_next
            fZ, gZ = prob.loss_grad(Z)
        else:
            Z, fZ, gZ = W, fW, gW
    if log_path is not None:
        with open(log_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iter", "objective", "residual", "step"])
            for row in history:
                w.writerow([row[0], repr(row[1]), repr(row[2]), repr(row[3])])
    return FitResult(W, converged, it, residual, s, objective(W), history)


def default_lambda(d1, d2, d3, n, r, a=1.0, gamma=0.0, ell=1.0, c=1.0) -> float:
    """Regularization schedule ``c * sqrt(ell log d3 / (a r n d3^2 min(d1,d2) (1-gamma)^2))``."""
    if not 0 <= gamma < 1:
        raise ValueError("gamma must lie in [0, 1)")
    if not 0 < a <= 1:
        raise ValueError("a must lie in (0, 1]")
    if d3 < 2:
        raise ValueError("d3 must be at least 2 so that log(d3) > 0")
    if n < 1 or r < 1:
        raise ValueError("n and r must be positive")
    denom = a * r * n * d3**2 * min(d1, d2) * (1 - gamma) ** 2
    return c * math.sqrt(ell * math.log(d3) / denom)


@dataclass(frozen=True, eq=False)
class SubspaceEstimate:
    """Leading ``r`` lateral slices of the t-SVD factors and their complements."""

    U_hat: np.ndarray
    U_perp: np.ndarray
    V_hat: np.ndarray
    V_perp: np.ndarray
    W_hat: np.ndarray
    r: int

    @property
    def U_full(self) -> np.ndarray:
        return np.concatenate([self.U_hat, self.U_perp], axis=1)

    @property
    def V_full(self) -> np.ndarray:
        return np.concatenate([self.V_hat, self.V_perp], axis=1)


def extract_subspaces(W_hat, r: int, spec: TransformSpec) -> SubspaceEstimate:
    W_hat = np.asarray(W_hat, dtype=float)
    d1, d2, _ = W_hat.shape
    if not 1 <= r <= min(d1, d2):
        raise ValueError(f"r={r} outside [1, {min(d1, d2)}]")
    f = t_svd(W_hat, spec, full_matrices=True)
    return SubspaceEstimate(
        U_hat=f.U[:, :r], U_perp=f.U[:, r:], V_hat=f.V[:, :r], V_perp=f.V[:, r:], W_hat=W_hat, r=r
    )


def estimate_rank(W_hat, spec: TransformSpec, rel_tol: float = 1e-3) -> int:
    """Tubal rank with singular values below ``rel_tol * sigma_1`` treated as zero."""
    return max(1, tubal_rank(t_svd(W_hat, spec), tol=rel_tol))


def subspace_distance(est: SubspaceEstimate, U_star, V_star, spec: TransformSpec) -> float:
    """``||U_perp^T *_L U*||_F * ||V_perp^T *_L V*||_F``; zero when a complement is empty."""
    U_star = np.asarray(U_star, dtype=float)
    V_star = np.asarray(V_star, dtype=float)
    if U_star.shape[0] != est.U_hat.shape[0] or V_star.shape[0] != est.V_hat.shape[0]:
        raise ValueError("subspace dimensions do not match the estimate")
    if est.U_perp.shape[1] == 0 or est.V_perp.shape[1] == 0:
        return 0.0
    du = np.linalg.norm(t_product(conj_transpose(est.U_perp), U_star, spec))
    dv = np.linalg.norm(t_product(conj_transpose(est.V_perp), V_star, spec))
    return float(du * dv)
