"""
Chance-constrained StQPs
========================

Under a location/scale model the level-alpha value-at-risk of x'Qx is again a
quadratic form, so the chance-constrained problem is an ordinary StQP.
"""
import numpy as np

from stqpcc.cce import convexity_threshold, goe_model, solve_cce, value_at_risk, wishart_model
from stqpcc.sampling import SeededRng, sample_uniform_symmetric

Q_nom = sample_uniform_symmetric(10, SeededRng(0, 0))
model = goe_model(Q_nom, beta=3.0)

for alpha in (0.6, 0.8, 0.95):
    sol, t = solve_cce(model, alpha)
    draws = model.sample(SeededRng(1, 0), size=50_000)
    hit = np.mean(np.einsum("k,jkl,l->j", sol.x, draws, sol.x) <= t)
    print(f"alpha {alpha}: t = {t:.4f}, empirical P[x'Qx <= t] = {hit:.4f}")

# Beyond this level the deterministic equivalent is positive semidefinite.
print("convexity threshold:", round(convexity_threshold(Q_nom, 3.0), 4))

# The shifted Wishart model uses a gamma law instead of the normal.
A = np.random.default_rng(3).standard_normal((5, 5))
w = wishart_model(A @ A.T / 5 + 0.5 * np.eye(5), p=8, eta=4.0)
x = np.full(5, 0.2)
print("Wishart VaR at the barycenter, alpha 0.9:", round(value_at_risk(w, x, 0.9), 4))
