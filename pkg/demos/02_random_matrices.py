"""
Seeded random matrices
======================

Every draw comes from a (master seed, stream) pair, so results never depend on
the order in which work is done.
"""
import numpy as np

from stqpcc.sampling import SeededRng, sample_goe, sample_uniform_symmetric, sample_wishart, stream_id

rng = SeededRng(master_seed=7, stream=stream_id(3, 1))
print("three normals:", rng.standard_normal(3))
print("same stream again:", SeededRng(7, stream_id(3, 1)).standard_normal(3))

# GOE: N(0, 2) diagonal, N(0, 1) off the diagonal.
G = sample_goe(200, SeededRng(7, 0), size=50)
off = G[:, np.triu_indices(200, 1)[0], np.triu_indices(200, 1)[1]]
print("GOE variances, diagonal / off-diagonal: %.3f / %.3f"
      % (np.var(np.diagonal(G, axis1=1, axis2=2)), np.var(off)))

# Wishart: W = YY' with p Gaussian columns of covariance Sigma, so E[W] = p Sigma.
Sigma = np.array([[1.0, 0.3], [0.3, 0.5]])
W = sample_wishart(Sigma, p=6, rng=SeededRng(7, 1), size=20_000)
print("Wishart mean / p:\n", W.mean(axis=0) / 6)

U = sample_uniform_symmetric(30, SeededRng(0, 0))
print("uniform symmetric 30x30, smallest and largest eigenvalue: %.2f, %.2f"
      % tuple(np.linalg.eigvalsh(U)[[0, -1]]))
