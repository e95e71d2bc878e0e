"""
Solving standard quadratic problems
===================================

The dispatcher picks a closed form for concave inputs, exact support
enumeration for small n, and replicator multistart beyond that.
"""
import numpy as np

from stqpcc.sampling import SeededRng
from stqpcc.solver import SolverConfig, solve, solve_exact_enumeration, solve_multistart

# Motzkin-Straus: min x'(-A)x over the simplex is -(1 - 1/omega) for a graph of clique number omega.
A = np.zeros((5, 5))
for k in range(5):
    A[k, (k + 1) % 5] = A[(k + 1) % 5, k] = 1.0
sol = solve(-A)
print("5-cycle:", sol.value, sol.status.value, "support", sol.support)

print("negative identity:", solve(-np.eye(4)).status.value)

# Heuristic and exact answers agree on a random indefinite instance.
B = np.random.default_rng(1).standard_normal((12, 12))
Q = (B + B.T) / 2
exact = solve_exact_enumeration(Q, SolverConfig(exact_max_n=12))
heur = solve_multistart(Q, SolverConfig(), SeededRng(0, 0))
print("n=12 exact %.12f  multistart %.12f  (%d starts)" % (exact.value, heur.value, heur.starts))

# Past exact_max_n the multistart heuristic takes over.
B = np.random.default_rng(2).standard_normal((40, 40))
big = solve((B + B.T) / 2, SolverConfig(), SeededRng(0, 1))
print("n=40:", round(big.value, 6), big.status.value, "support size", len(big.support))
