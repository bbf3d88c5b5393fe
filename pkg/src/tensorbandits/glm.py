"""Canonical exponential-family links and the empirical GLM loss.

Dispersion is fixed to one throughout; it rescales the loss without moving
its minimizers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit

__all__ = [
    "LinkFamily",
    "Observation",
    "link_eval",
    "sample_reward",
    "stack_observations",
    "glm_loss",
    "glm_loss_gradient",
]

FAMILIES = ("linear", "logistic", "poisson")


@dataclass(frozen=True)
class LinkFamily:
    """Inverse link ``mu``, log-partition ``b`` and derivative bounds.

    ``m_lower`` and ``M_upper`` bound ``mu'`` on ``|x| <= eta_clip``. For the
    linear link both are one; the logistic derivative peaks at 1/4 and its
    floor is attained at the clip; the Poisson derivative is ``exp(x)``.
    """

    kind: str
    noise_sigma: float = 0.01
    eta_clip: float = 3.0

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in FAMILIES:
            raise ValueError(f"unknown family {self.kind!r}; expected one of {FAMILIES}")
        object.__setattr__(self, "kind", kind)
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if not self.eta_clip > 0:
            raise ValueError("eta_clip must be positive")

    @classmethod
    def from_config(cls, cfg) -> "LinkFamily":
        """Build from ``"logistic"`` or ``{"family": ..., "noise_sigma": ..., "eta_clip": ...}``."""
        if isinstance(cfg, str):
            return cls(cfg)
        kw = {k: float(cfg[k]) for k in ("noise_sigma", "eta_clip") if cfg.get(k) is not None}
        return cls(cfg.get("family", cfg.get("kind")), **kw)

    # vectorized link pieces -------------------------------------------------

    def mu(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "linear":
            return x
        if self.kind == "logistic":
            return expit(x)
        return np.exp(x)

    def dmu(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "linear":
            return np.ones_like(x)
        if self.kind == "logistic":
            return expit(x) * expit(-x)
        return np.exp(x)

    def b(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "linear":
            return 0.5 * x * x
        if self.kind == "logistic":
            return np.logaddexp(0.0, x)
        return np.exp(x)

    @property
    def M_upper(self) -> float:
        if self.kind == "linear":
            return 1.0
        if self.kind == "logistic":
            return 0.25
        return float(np.exp(self.eta_clip))

    @property
    def m_lower(self) -> float:
        if self.kind == "linear":
            return 1.0
        if self.kind == "logistic":
            return float(self.dmu(self.eta_clip))
        return float(np.exp(-self.eta_clip))

    def sample(self, eta, rng: np.random.Generator):
        return sample_reward(self, eta, rng)


@dataclass(frozen=True, eq=False)
class Observation:
    arm: np.ndarray
    reward: float
    round: int = 0


def link_eval(family: LinkFamily, x: float) -> tuple[float, float, float, float]:
    """Return ``(mu(x), b(x), b'(x), b''(x))``."""
    mu = float(family.mu(x))
    return mu, float(family.b(x)), mu, float(family.dmu(x))


def sample_reward(family: LinkFamily, eta, rng: np.random.Generator):
    """Draw a reward with mean ``mu(eta)``.

    Linear adds ``N(0, noise_sigma**2)``, logistic draws Bernoulli and Poisson
    draws a count with rate ``exp(eta)``. Poisson rejects ``|eta| > eta_clip``.
    """
    eta = np.asarray(eta, dtype=float)
    if not np.all(np.isfinite(eta)):
        raise ValueError("eta must be finite")
    if family.kind == "linear":
        out = eta + family.noise_sigma * rng.standard_normal(eta.shape)
    elif family.kind == "logistic":
        out = (rng.random(eta.shape) < expit(eta)).astype(float)
    else:
        if np.any(np.abs(eta) > family.eta_clip):
            raise ValueError(f"|eta| exceeds eta_clip={family.eta_clip}")
        out = np.asarray(rng.poisson(np.exp(eta)), dtype=float)
    return float(out) if out.ndim == 0 else out


def stack_observations(data: Sequence[Observation]) -> tuple[np.ndarray, np.ndarray]:
    """Stack observations into ``X`` of shape ``(n, d1, d2, d3)`` and ``y``."""
    if len(data) == 0:
        raise ValueError("no observations")
    X = np.stack([np.asarray(o.arm, dtype=float) for o in data])
    y = np.array([o.reward for o in data], dtype=float)
    return X, y


def _as_design(W, X, y):
    if y is None:
        X, y = stack_observations(X)
    W = np.asarray(W, dtype=float)
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim == W.ndim:
        X = X[None]
    if X.shape[0] == 0:
        raise ValueError("no observations")
    if X.shape[1:] != W.shape or y.shape != (X.shape[0],):
        raise ValueError(f"arms {X.shape[1:]} / rewards {y.shape} do not match W {W.shape}")
    return W, X, y


def glm_loss(family: LinkFamily, W, X, y=None) -> float:
    """Empirical negative log-likelihood ``mean(b(<X_t, W>) - y_t <X_t, W>)``.

    ``X`` is either a stack of arms with rewards ``y`` or, when ``y`` is
    omitted, a sequence of :class:`Observation`.
    """
    W, X, y = _as_design(W, X, y)
    eta = np.tensordot(X, W, axes=W.ndim)
    return float(np.mean(family.b(eta) - y * eta))


def glm_loss_gradient(family: LinkFamily, W, X, y=None) -> np.ndarray:
    """Gradient ``mean((mu(<X_t, W>) - y_t) X_t)`` with the shape of ``W``."""
    W, X, y = _as_design(W, X, y)
    eta = np.tensordot(X, W, axes=W.ndim)
    resid = family.mu(eta) - y
    return np.tensordot(resid, X, axes=1) / X.shape[0]
