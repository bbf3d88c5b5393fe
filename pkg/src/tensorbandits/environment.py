"""Bandit instances, the oracle arm, reward draws and regret bookkeeping."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .glm import LinkFamily, Observation, sample_reward
from .tensor_algebra import (
    TransformSpec,
    conj_transpose,
    from_record,
    from_transform_slices,
    t_product,
    t_svd,
    to_record,
    transform_slices,
    vec,
)

__all__ = [
    "BanditInstance",
    "RegretTrace",
    "DegenerateTensorError",
    "generate_synthetic_instance",
    "instance_from_reward_tensor",
    "oracle_arm",
    "expected_rewards",
    "play",
    "reward_rng",
    "regret_update",
    "save_instance",
    "load_instance",
    "instance_to_dict",
    "instance_from_dict",
]


class DegenerateTensorError(ValueError):
    def __init__(self, message: str, slice_index: int | None = None):
        super().__init__(message)
        self.slice_index = slice_index


@dataclass(eq=False)
class BanditInstance:
    """A finite-armed generalized tensor bandit.

    ``arms`` is stacked as ``(n_arms, d1, d2, d3)``. ``omega_min`` is the
    smallest of the leading ``r_true`` transform-domain singular values of
    ``W_star``, i.e. the smallest nonzero singular value of its block lift.
    """

    W_star: np.ndarray
    arms: np.ndarray
    family: LinkFamily
    spec: TransformSpec
    r_true: int
    omega_min: float
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.W_star = np.asarray(self.W_star, dtype=float)
        self.arms = np.asarray(self.arms, dtype=float)
        if self.arms.ndim != 4 or self.arms.shape[0] == 0:
            raise ValueError("arms must be a non-empty stack of third-order tensors")
        if self.arms.shape[1:] != self.W_star.shape:
            raise ValueError("arm dims do not match W_star")

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.W_star.shape

    @property
    def n_arms(self) -> int:
        return self.arms.shape[0]

    @property
    def arm_matrix(self) -> np.ndarray:
        """Canonically vectorized arms, one per row."""
        return self.arms.reshape(self.n_arms, -1, order="F")

    def linear_predictors(self) -> np.ndarray:
        return self.arm_matrix @ vec(self.W_star)

    def mean_rewards(self) -> np.ndarray:
        """``mu(<X, W*>)`` per arm, cached per family so every caller sees the same floats."""
        cache = self.__dict__.setdefault("_mu_cache", {})
        key = (self.family, id(self.W_star), id(self.arms))
        if key not in cache:
            cache.clear()
            cache[key] = self.family.mu(self.linear_predictors())
        return cache[key]


def _omega_min(W: np.ndarray, r: int, spec: TransformSpec) -> float:
    s = t_svd(W, spec).slice_singular_values
    return float(s[:, r - 1].min())


def generate_synthetic_instance(
    d1: int,
    d2: int,
    d3: int,
    r: int,
    n_arms: int,
    family: LinkFamily,
    spec: TransformSpec,
    seed: int,
    normalize: bool = True,
) -> BanditInstance:
    """Low-tubal-rank synthetic instance.

    ``W* = P *_L Q`` with standard Gaussian ``P`` (``d1 x r x d3``) and ``Q``
    (``r x d2 x d3``). Arms are standard Gaussian vectors of length
    ``d1*d2*d3`` scaled to unit length and folded in the canonical layout.
    With ``normalize`` the parameter is rescaled to unit Frobenius norm.
    """
    if not 1 <= r <= min(d1, d2):
        raise ValueError(f"r={r} outside [1, {min(d1, d2)}]")
    if n_arms < 2:
        raise ValueError("need at least two arms")
    if spec.d3 != d3:
        raise ValueError("transform size does not match d3")
    rng = np.random.default_rng(seed)
    P = rng.standard_normal((d1, r, d3))
    Q = rng.standard_normal((r, d2, d3))
    W = t_product(P, Q, spec)
    if normalize:
        W = W / np.linalg.norm(W)
    G = rng.standard_normal((n_arms, d1 * d2 * d3))
    G /= np.linalg.norm(G, axis=1, keepdims=True)
    arms = G.reshape(n_arms, d1, d2, d3, order="F")
    return BanditInstance(
        W_star=W,
        arms=arms,
        family=family,
        spec=spec,
        r_true=r,
        omega_min=_omega_min(W, r, spec),
        meta={"seed": seed, "normalize": normalize, "source": "synthetic"},
    )


def _slice_pinv(T: np.ndarray, spec: TransformSpec, max_cond: float = 1e12) -> np.ndarray:
    slices = transform_slices(T, spec)
    s = np.linalg.svd(slices, compute_uv=False)
    for k, sk in enumerate(s):
        if sk[-1] == 0 or sk[0] / sk[-1] > max_cond:
            raise DegenerateTensorError(f"pseudo-inverse is degenerate on transform slice {k}", k)
    return from_transform_slices(np.linalg.pinv(slices), spec)


def instance_from_reward_tensor(
    M,
    d1: int = 8,
    d2: int = 8,
    family: LinkFamily | None = None,
    spec: TransformSpec | None = None,
    seed: int = 0,
    normalize: bool = True,
) -> BanditInstance:
    """Build a feature-tensor bandit whose expected rewards follow a reward tensor.

    ``M`` (``n1 x n2 x n3``) indexes rewards by (row entity, column entity).
    Its t-SVD is truncated to ``q = min(d1, d2)`` components,
    ``M_q = U *_L S *_L V^T``. With Gaussian ``P`` (``d1 x q x n3``) and
    ``Q`` (``d2 x q x n3``) the parameter is ``W* = P *_L Q^T``, the row
    features are ``B = U *_L S *_L P^+`` and the column features
    ``D = V *_L Q^+`` (pseudo-inverses slice-wise in the transform
    domain). Arm ``(i, j)`` is ``B_i^T *_L D_j`` for horizontal slices
    ``B_i`` and ``D_j``; its linear predictor equals the transform-domain sum
    of tube ``M_q(i, j, :)``, so arm order follows the low-rank part of ``M``.

    Arms are enumerated row-major in ``(i, j)``, giving ``n1 * n2`` arms. With
    ``normalize`` all arms share one scale factor so the largest has unit
    Frobenius norm, and ``W*`` is scaled to unit norm; both preserve the
    arm ranking.
    """
    M = np.asarray(M, dtype=float)
    n1, n2, n3 = M.shape
    family = family or LinkFamily("linear")
    spec = spec or TransformSpec.dct(n3)
    q = min(d1, d2)
    if q > min(n1, n2):
        raise ValueError(f"min(d1, d2)={q} exceeds the reward tensor's min(n1, n2)={min(n1, n2)}")
    f = t_svd(M, spec)
    s = f.slice_singular_values
    top = s.max(initial=0.0)
    for k in range(n3):
        if top == 0.0 or s[k, q - 1] <= 1e-12 * top:
            raise DegenerateTensorError(
                f"reward tensor has fewer than {q} nonzero singular values on transform slice {k}", k
            )
    U, S, V = f.U[:, :q], f.S[:q, :q], f.V[:, :q]
    rng = np.random.default_rng(seed)
    P = rng.standard_normal((d1, q, n3))
    Q = rng.standard_normal((d2, q, n3))
    W = t_product(P, conj_transpose(Q), spec)
    B = t_product(t_product(U, S, spec), _slice_pinv(P, spec), spec)
    D = t_product(V, _slice_pinv(Q, spec), spec)
    arms = np.empty((n1 * n2, d1, d2, n3))
    for i in range(n1):
        Bi = conj_transpose(B[i : i + 1])
        for j in range(n2):
            arms[i * n2 + j] = t_product(Bi, D[j : j + 1], spec)
    if normalize:
        arms /= np.linalg.norm(arms.reshape(len(arms), -1), axis=1).max()
        W = W / np.linalg.norm(W)
    return BanditInstance(
        W_star=W,
        arms=arms,
        family=family,
        spec=spec,
        r_true=q,
        omega_min=_omega_min(W, q, spec),
        meta={"seed": seed, "normalize": normalize, "source": "reward_tensor", "shape": [n1, n2, n3]},
    )


def expected_rewards(instance: BanditInstance) -> np.ndarray:
    return instance.mean_rewards().copy()


def oracle_arm(instance: BanditInstance) -> tuple[int, float]:
    """Best arm by expected reward; ``np.argmax`` breaks ties by lowest index."""
    mu = instance.mean_rewards()
    i = int(np.argmax(mu))
    return i, float(mu[i])


def reward_rng(seed: int, round_: int, arm_index: int) -> np.random.Generator:
    """Reward stream keyed by ``(seed, round, arm)`` for common random numbers."""
    return np.random.default_rng([seed, round_, arm_index])


def play(instance: BanditInstance, arm_index: int, rng: np.random.Generator, round_: int = 0) -> Observation:
    if not 0 <= arm_index < instance.n_arms:
        raise IndexError(f"arm index {arm_index} out of range")
    X = instance.arms[arm_index]
    eta = float(np.vdot(X, instance.W_star))
    return Observation(arm=X, reward=sample_reward(instance.family, eta, rng), round=round_)


@dataclass
class RegretTrace:
    policy_name: str
    seed: int
    instantaneous: list = field(default_factory=list)
    cumulative: list = field(default_factory=list)
    T1_used: int = 0
    arms: list = field(default_factory=list)
    info: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.instantaneous)


def regret_update(trace: RegretTrace, instance: BanditInstance, arm_index: int, _best=None) -> RegretTrace:
    """Append the expected regret of pulling ``arm_index`` (mutates and returns ``trace``)."""
    if _best is None:
        _, _best = oracle_arm(instance)
    gap = _best - float(instance.mean_rewards()[arm_index])
    trace.instantaneous.append(gap)
    prev = trace.cumulative[-1] if trace.cumulative else 0.0
    trace.cumulative.append(prev + gap)
    trace.arms.append(int(arm_index))
    return trace


# ---------------------------------------------------------------------------
# JSON import / export


def instance_to_dict(instance: BanditInstance, include_w_star: bool = True) -> dict:
    fam = instance.family
    out = {
        "dims": list(instance.dims),
        "transform": instance.spec.to_record(),
        "family": {"family": fam.kind, "noise_sigma": fam.noise_sigma, "eta_clip": fam.eta_clip},
        "r_true": instance.r_true,
        "omega_min": instance.omega_min,
        "meta": instance.meta,
        "arms": [to_record(X) for X in instance.arms],
    }
    if include_w_star:
        out["W_star"] = to_record(instance.W_star)
    return out


def instance_from_dict(d: dict) -> BanditInstance:
    if "W_star" not in d:
        raise ValueError("instance record carries no W_star; oracle runs need it")
    return BanditInstance(
        W_star=from_record(d["W_star"]),
        arms=np.stack([from_record(a) for a in d["arms"]]),
        family=LinkFamily.from_config(d["family"]),
        spec=TransformSpec.from_record(d["transform"]),
        r_true=int(d["r_true"]),
        omega_min=float(d["omega_min"]),
        meta=d.get("meta", {}),
    )


def save_instance(instance: BanditInstance, path, include_w_star: bool = True):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance_to_dict(instance, include_w_star), fh)


def load_instance(path) -> BanditInstance:
    with open(path, encoding="utf-8") as fh:
        return instance_from_dict(json.load(fh))
