"""
Robust counterparts
===================

Frobenius-ball uncertainty shifts the diagonal; box uncertainty is worst at
its upper corner. Both reduce to a plain StQP.
"""
import math

import numpy as np

from stqpcc.cce import cce_matrix
from stqpcc.robust import BoxUncertainty, box_counterpart, box_from_realizations, frobenius_counterpart, solve_robust
from stqpcc.sampling import SeededRng, sample_goe, sample_uniform_symmetric
from stqpcc.special import std_normal_quantile

Q_nom = sample_uniform_symmetric(8, SeededRng(0, 0))

# The GOE chance constraint at level alpha is the Frobenius ball of radius sqrt(2) beta Phi^-1(alpha).
beta, alpha = 3.0, 0.8
rho = math.sqrt(2) * beta * std_normal_quantile(alpha)
print("ball counterpart equals cce matrix:", np.array_equal(frobenius_counterpart(Q_nom, rho),
                                                            cce_matrix(Q_nom, beta, alpha)))

# A box spanned by sampled realizations, shrunk by rho = 0.8.
reals = Q_nom + beta * sample_goe(8, SeededRng(0, 1), size=100)
lower, upper = box_from_realizations(reals)
box = BoxUncertainty(lower, upper, Q_nom, rho=0.8)
sol = solve_robust(box_counterpart(box))
realized = np.einsum("k,jkl,l->j", sol.x, reals, sol.x)
print("robust value %.4f, realized values at x_rob range %.4f .. %.4f"
      % (sol.value, realized.min(), realized.max()))
