"""Transformed t-product algebra for real third-order tensors.

Tensors are plain ``numpy`` arrays of shape ``(d1, d2, d3)``. A
:class:`TransformSpec` fixes the invertible mode-3 transform ``L``; every
product, factorization and norm in this module is computed slice-wise in the
transform domain ``A_breve = A x_3 L``.

The canonical vectorization is column-major within a frontal slice with
slices stacked along the third mode, i.e. entry ``(i, j, k)`` sits at
``i + j*d1 + k*d1*d2``. This is exactly ``A.ravel(order="F")``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.fft

__all__ = [
    "TransformSpec",
    "TSvdFactors",
    "TSvdError",
    "vec",
    "unvec",
    "to_record",
    "from_record",
    "dumps_tensor",
    "loads_tensor",
    "apply_transform",
    "inverse_transform",
    "transform_slices",
    "from_transform_slices",
    "block_diagonal",
    "inner",
    "t_product",
    "conj_transpose",
    "identity_tensor",
    "t_svd",
    "t_svd_reconstruct",
    "tubal_rank",
    "spectral_norm",
    "nuclear_norm",
    "svt_prox",
    "singular_value_gap",
]

TRANSFORM_KINDS = ("identity", "dct", "random_orthogonal")


class TSvdError(np.linalg.LinAlgError):
    """SVD of a transform-domain slice failed to converge."""

    def __init__(self, slice_index: int):
        super().__init__(f"SVD did not converge on transform slice {slice_index}")
        self.slice_index = slice_index


@dataclass(frozen=True, eq=False)
class TransformSpec:
    """Invertible mode-3 transform ``L`` with ``L @ L.T == ell * I``.

    Use the constructors :meth:`identity`, :meth:`dct` and
    :meth:`random_orthogonal` (or :meth:`from_name`) rather than building the
    matrix by hand. All three kinds are real orthogonal, so ``ell == 1``.
    """

    kind: str
    d3: int
    matrix: np.ndarray = field(repr=False)
    ell: float = 1.0
    seed: int | None = None

    def __post_init__(self):
        L = np.asarray(self.matrix, dtype=float)
        if L.shape != (self.d3, self.d3):
            raise ValueError(f"transform matrix must be {self.d3}x{self.d3}, got {L.shape}")
        L.setflags(write=False)
        object.__setattr__(self, "matrix", L)

    @classmethod
    def identity(cls, d3: int) -> "TransformSpec":
        return cls("identity", d3, np.eye(d3))

    @classmethod
    def dct(cls, d3: int) -> "TransformSpec":
        # orthonormal DCT-II: row k holds the k-th cosine basis vector
        L = scipy.fft.dct(np.eye(d3), type=2, norm="ortho", axis=0)
        return cls("dct", d3, L)

    @classmethod
    def random_orthogonal(cls, d3: int, seed: int = 0) -> "TransformSpec":
        rng = np.random.default_rng(seed)
        Q, R = np.linalg.qr(rng.standard_normal((d3, d3)))
        # sign fix makes the draw unique for a given Gaussian matrix
        Q = Q * np.where(np.diag(R) < 0, -1.0, 1.0)
        return cls("random_orthogonal", d3, Q, seed=seed)

    @classmethod
    def from_name(cls, kind: str, d3: int, seed: int | None = None) -> "TransformSpec":
        kind = kind.lower().replace("-", "_")
        if kind == "identity":
            return cls.identity(d3)
        if kind == "dct":
            return cls.dct(d3)
        if kind in ("random_orthogonal", "rom"):
            return cls.random_orthogonal(d3, 0 if seed is None else seed)
        raise ValueError(f"unknown transform kind {kind!r}; expected one of {TRANSFORM_KINDS}")

    def to_record(self) -> dict:
        rec = {"kind": self.kind, "d3": self.d3}
        if self.seed is not None:
            rec["seed"] = self.seed
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "TransformSpec":
        return cls.from_name(rec["kind"], int(rec["d3"]), rec.get("seed"))

    @property
    def inverse_matrix(self) -> np.ndarray:
        return self.matrix.T / self.ell


@dataclass(frozen=True, eq=False)
class TSvdFactors:
    """Factors of ``A = U *_L S *_L V^T``.

    ``slice_singular_values[k]`` holds the non-increasing singular values of
    the ``k``-th transform-domain slice.
    """

    U: np.ndarray
    S: np.ndarray
    V: np.ndarray
    slice_singular_values: np.ndarray
    spec: TransformSpec

    @property
    def rank_dim(self) -> int:
        return self.S.shape[0]


# ---------------------------------------------------------------------------
# layout and serialization


def vec(A: np.ndarray) -> np.ndarray:
    """Canonical vectorization, ``(i, j, k) -> i + j*d1 + k*d1*d2``."""
    return np.asarray(A).ravel(order="F")


def unvec(v: np.ndarray, dims: Sequence[int]) -> np.ndarray:
    return np.asarray(v, dtype=float).reshape(tuple(dims), order="F")


def _check3(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 3 or min(A.shape) < 1:
        raise ValueError(f"expected a non-empty third-order tensor, got shape {A.shape}")
    return A


def to_record(A: np.ndarray) -> dict:
    A = _check3(A)
    return {"dims": list(A.shape), "data": vec(A).tolist()}


def from_record(rec: dict) -> np.ndarray:
    dims = tuple(int(d) for d in rec["dims"])
    data = np.asarray(rec["data"], dtype=float)
    if len(dims) != 3 or data.size != math.prod(dims):
        raise ValueError(f"record with dims {dims} carries {data.size} values")
    return unvec(data, dims)


def dumps_tensor(A: np.ndarray) -> str:
    return json.dumps(to_record(A))


def loads_tensor(s: str) -> np.ndarray:
    return from_record(json.loads(s))


# ---------------------------------------------------------------------------
# transforms


def _check_spec(A: np.ndarray, spec: TransformSpec):
    if A.shape[2] != spec.d3:
        raise ValueError(f"tensor has d3={A.shape[2]} but transform has d3={spec.d3}")


def apply_transform(A: np.ndarray, spec: TransformSpec) -> np.ndarray:
    """Mode-3 product ``A x_3 L``: ``out[:, :, k] = sum_j L[k, j] A[:, :, j]``."""
    A = _check3(A)
    _check_spec(A, spec)
    return A @ spec.matrix.T


def inverse_transform(A_breve: np.ndarray, spec: TransformSpec) -> np.ndarray:
    A_breve = _check3(A_breve)
    _check_spec(A_breve, spec)
    return A_breve @ spec.inverse_matrix.T


def transform_slices(A: np.ndarray, spec: TransformSpec) -> np.ndarray:
    """Transform-domain frontal slices stacked as a ``(d3, d1, d2)`` array."""
    return np.moveaxis(apply_transform(A, spec), 2, 0)


def from_transform_slices(slices: np.ndarray, spec: TransformSpec) -> np.ndarray:
    return inverse_transform(np.moveaxis(np.asarray(slices, dtype=float), 0, 2), spec)


def block_diagonal(A: np.ndarray, spec: TransformSpec) -> np.ndarray:
    """The block-diagonal lift ``A_bar`` of size ``(d1*d3, d2*d3)``."""
    import scipy.linalg

    return scipy.linalg.block_diag(*transform_slices(A, spec))


def inner(A: np.ndarray, B: np.ndarray) -> float:
    return float(np.vdot(A, B))


# ---------------------------------------------------------------------------
# products


def t_product(A: np.ndarray, B: np.ndarray, spec: TransformSpec) -> np.ndarray:
    """Transformed t-product ``A *_L B``.

    ``A`` is ``d1 x d2 x d3`` and ``B`` is ``d2 x a x d3``; the result is
    ``d1 x a x d3`` with transform-domain slices ``A_k @ B_k``.
    """
    A, B = _check3(A), _check3(B)
    if A.shape[1] != B.shape[0] or A.shape[2] != B.shape[2]:
        raise ValueError(f"incompatible shapes for t-product: {A.shape} and {B.shape}")
    return from_transform_slices(transform_slices(A, spec) @ transform_slices(B, spec), spec)


def conj_transpose(A: np.ndarray, spec: TransformSpec | None = None) -> np.ndarray:
    """Tensor transpose with respect to ``L``.

    The transform acts on mode 3 only, so transposing every transform-domain
    slice is the same as transposing every original frontal slice; ``spec``
    is accepted for interface symmetry.
    """
    A = _check3(A)
    if spec is not None:
        _check_spec(A, spec)
    return np.ascontiguousarray(A.transpose(1, 0, 2))


def identity_tensor(m: int, d3: int, spec: TransformSpec) -> np.ndarray:
    if spec.d3 != d3:
        raise ValueError(f"transform has d3={spec.d3}, requested d3={d3}")
    return from_transform_slices(np.broadcast_to(np.eye(m), (d3, m, m)), spec)


# ---------------------------------------------------------------------------
# t-SVD and norms


def _slice_svd(slices: np.ndarray, full_matrices: bool, compute_uv: bool = True):
    try:
        return np.linalg.svd(slices, full_matrices=full_matrices, compute_uv=compute_uv)
    except np.linalg.LinAlgError:
        for k, S in enumerate(slices):
            try:
                np.linalg.svd(S, compute_uv=False)
            except np.linalg.LinAlgError:
                raise TSvdError(k) from None
        raise


def _slice_singular_values(A: np.ndarray, spec: TransformSpec) -> np.ndarray:
    return _slice_svd(transform_slices(A, spec), False, compute_uv=False)


def t_svd(A: np.ndarray, spec: TransformSpec, full_matrices: bool = False) -> TSvdFactors:
    """Transformed t-SVD ``A = U *_L S *_L V^T``.

    Parameters
    ----------
    A : ndarray, shape (d1, d2, d3)
    spec : TransformSpec
    full_matrices : bool
        If False (default) the factors are skinny with ``rho = min(d1, d2)``
        lateral slices: ``U`` is ``d1 x rho``, ``S`` is ``rho x rho`` and
        ``V`` is ``d2 x rho``. If True, ``U`` is ``d1 x d1``, ``S`` is
        ``d1 x d2`` and ``V`` is ``d2 x d2`` so that both factors are
        orthogonal tensors.

    Raises
    ------
    TSvdError
        If the SVD of some transform slice fails; carries ``slice_index``.
    """
    A = _check3(A)
    _check_spec(A, spec)
    d1, d2, d3 = A.shape
    Uk, sk, Vhk = _slice_svd(transform_slices(A, spec), full_matrices)
    rho = min(d1, d2)
    if full_matrices:
        Sk = np.zeros((d3, d1, d2))
    else:
        Sk = np.zeros((d3, rho, rho))
    idx = np.arange(rho)
    Sk[:, idx, idx] = sk
    return TSvdFactors(
        U=from_transform_slices(Uk, spec),
        S=from_transform_slices(Sk, spec),
        V=from_transform_slices(np.swapaxes(Vhk, 1, 2), spec),
        slice_singular_values=sk,
        spec=spec,
    )


def t_svd_reconstruct(factors: TSvdFactors) -> np.ndarray:
    spec = factors.spec
    US = t_product(factors.U, factors.S, spec)
    return t_product(US, conj_transpose(factors.V), spec)


def tubal_rank(factors: TSvdFactors, tol: float = 1e-8) -> int:
    """Number of tubes ``S(i, i, :)`` that are nonzero in the transform domain.

    A tube counts when its largest transform-domain magnitude exceeds
    ``tol`` times the largest singular value overall.
    """
    s = np.abs(factors.slice_singular_values)
    top = s.max(initial=0.0)
    if top == 0.0:
        return 0
    return int(np.count_nonzero(s.max(axis=0) > tol * top))


def spectral_norm(A: np.ndarray, spec: TransformSpec) -> float:
    return float(_slice_singular_values(A, spec).max(initial=0.0))


def nuclear_norm(A: np.ndarray, spec: TransformSpec) -> float:
    return float(_slice_singular_values(A, spec).sum() / spec.ell)


def svt_prox(A: np.ndarray, tau: float, spec: TransformSpec) -> np.ndarray:
    """Proximal map of ``tau * ||.||_*``.

    Minimizes ``0.5 * ||W - A||_F**2 + tau * ||W||_*`` by soft-thresholding
    the transform-domain singular values of every slice at ``tau``.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    A = _check3(A)
    _check_spec(A, spec)
    Uk, sk, Vhk = _slice_svd(transform_slices(A, spec), False)
    shrunk = np.maximum(sk - tau, 0.0)
    return from_transform_slices((Uk * shrunk[:, None, :]) @ Vhk, spec)


def singular_value_gap(A: np.ndarray, a: float, r: int, spec: TransformSpec) -> float:
    """Relative gap ``(s_1 - s_q) / s_1`` with ``q = ceil(a * r * d3)``.

    Singular values of all transform-domain slices are pooled, i.e. these are
    the singular values of the block-diagonal lift.
    """
    A = _check3(A)
    if not 0.0 <= a <= 1.0:
        raise ValueError("a must lie in [0, 1]")
    pooled = np.sort(_slice_singular_values(A, spec).ravel())[::-1]
    q = max(1, math.ceil(a * r * A.shape[2] - 1e-12))
    if q > pooled.size:
        raise ValueError(f"index {q} exceeds the {pooled.size} pooled singular values")
    if pooled[0] <= 0.0:
        raise ValueError("singular value gap is undefined for a zero tensor")
    return float((pooled[0] - pooled[q - 1]) / pooled[0])
