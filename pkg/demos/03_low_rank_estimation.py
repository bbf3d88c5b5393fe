"""Nuclear-norm regularized estimation and subspace extraction.

The error of the estimate falls as the sample grows; the leading
subspaces recovered from it approach the true ones.
"""

import numpy as np

from tensorbandits import (
    LinkFamily,
    TransformSpec,
    default_lambda,
    extract_subspaces,
    fit_nuclear_norm_glm,
    generate_synthetic_instance,
    sample_reward,
    subspace_distance,
)

spec = TransformSpec.dct(3)
fam = LinkFamily("linear", noise_sigma=0.01)
inst = generate_synthetic_instance(10, 10, 3, 1, 100, fam, spec, seed=0)
truth = extract_subspaces(inst.W_star, 1, spec)
rng = np.random.default_rng(1000)

for n in (250, 500, 1000, 2000):
    X = rng.standard_normal((n, 300))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    X = X.reshape((n, 10, 10, 3), order="F")
    y = sample_reward(fam, np.tensordot(X, inst.W_star, axes=3), rng)
    lam = default_lambda(10, 10, 3, n, 1, c=0.05)
    fit = fit_nuclear_norm_glm(fam, X, y, lam, spec)
    est = extract_subspaces(fit.W, 1, spec)
    err = np.linalg.norm(fit.W - inst.W_star) / np.linalg.norm(inst.W_star)
    dist = subspace_distance(est, truth.U_hat, truth.V_hat, spec)
    print(f"n={n:5d}  lambda={lam:.2e}  iters={fit.n_iter:4d}  rel. error={err:.3f}  subspace distance={dist:.3f}")
