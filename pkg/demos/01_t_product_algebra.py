"""Tensor algebra under an invertible transform.

Builds a low tubal-rank tensor, decomposes it with the t-SVD, and shows that
the nuclear norm proximal operator shrinks each transform-domain slice.
"""

import numpy as np

from tensorbandits import (
    TransformSpec,
    conj_transpose,
    identity_tensor,
    nuclear_norm,
    spectral_norm,
    svt_prox,
    t_product,
    t_svd,
    t_svd_reconstruct,
    tubal_rank,
)

rng = np.random.default_rng(0)
spec = TransformSpec.dct(3)

# P * Q has tubal rank 2 by construction
P = rng.standard_normal((8, 2, 3))
Q = rng.standard_normal((2, 6, 3))
A = t_product(P, Q, spec)

f = t_svd(A, spec)
print("tubal rank:", tubal_rank(f))
print("reconstruction error:", np.linalg.norm(t_svd_reconstruct(f) - A))

# U is orthogonal under the same product
I = identity_tensor(f.U.shape[1], 3, spec)
print("||U^T * U - I||:", np.linalg.norm(t_product(conj_transpose(f.U), f.U, spec) - I))

print(f"spectral norm {spectral_norm(A, spec):.4f}, nuclear norm {nuclear_norm(A, spec):.4f}")

for tau in (0.5, 2.0, 8.0, 50.0):
    Z = svt_prox(A, tau, spec)
    print(f"tau={tau:5.1f}  nuclear norm {nuclear_norm(Z, spec):8.4f}  tubal rank {tubal_rank(t_svd(Z, spec))}")
