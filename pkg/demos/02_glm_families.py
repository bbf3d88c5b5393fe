"""Link functions, their curvature bounds, and the empirical loss."""

import numpy as np

from tensorbandits import LinkFamily, glm_loss, glm_loss_gradient, sample_reward

rng = np.random.default_rng(1)
eta = np.linspace(-3, 3, 7)

for kind in ("linear", "logistic", "poisson"):
    fam = LinkFamily(kind)
    print(f"{kind:>8}: mu = {np.round(fam.mu(eta), 3)}")
    print(f"{'':>8}  m = {fam.m_lower:.4f}, M = {fam.M_upper:.4f}")

# loss and gradient on a small tensor regression problem
fam = LinkFamily("logistic")
W_true = rng.standard_normal((4, 3, 2))
X = rng.standard_normal((200, 4, 3, 2)) / np.sqrt(24)
y = sample_reward(fam, np.tensordot(X, W_true, axes=3), rng)
for W in (np.zeros_like(W_true), W_true):
    g = glm_loss_gradient(fam, W, X, y)
    print(f"loss {glm_loss(fam, W, X, y):.4f}, gradient norm {np.linalg.norm(g):.4f}")
