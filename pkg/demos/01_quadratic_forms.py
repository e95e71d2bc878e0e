"""
Quadratic forms on the simplex
==============================

Matrices, simplex points and the definiteness checks that drive the solver.
"""
import numpy as np

from stqpcc.linalg import (barycenter, classify_definiteness, eig_extremes, homogenize,
                           is_concave_on_simplex, quadratic_form, sym_matrix)

# A symmetric matrix is validated once and then frozen.
Q = sym_matrix([[2.0, -1.0, 0.0],
                [-1.0, 2.0, -1.0],
                [0.0, -1.0, 2.0]])
x = barycenter(3)
print("x'Qx at the barycenter:", quadratic_form(Q, x))
print("eigenvalue range:", eig_extremes(Q))
print("definiteness:", classify_definiteness(Q).value)

# A linear term c'x becomes quadratic on the simplex because e'x = 1.
c = np.array([0.5, -0.25, 0.0])
H = homogenize(Q, c)
print("x'Hx == x'Qx + 2c'x:", np.isclose(quadratic_form(H, x), quadratic_form(Q, x) + 2 * c @ x))

# Concavity only matters along the simplex: -I + 5ee' is indefinite but concave there.
M = -np.eye(4) + 5.0 * np.ones((4, 4))
print("indefinite?", classify_definiteness(M).value, "| concave on simplex?", is_concave_on_simplex(M))
