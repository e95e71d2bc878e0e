import math

import numpy as np
import pytest

from stqpcc.cce import deterministic_equivalent, goe_model
from stqpcc.linalg import frobenius_norm
from stqpcc.robust import BoxUncertainty, box_counterpart, box_from_realizations, frobenius_counterpart, solve_robust
from stqpcc.sampling import SeededRng, sample_goe, sample_uniform_symmetric
from stqpcc.solver import solve
from stqpcc.special import std_normal_quantile

from conftest import random_simplex_points, random_symmetric


def random_sphere_symmetric(n, rho, count, seed):
    U = np.random.default_rng(seed).standard_normal((count, n, n))
    U = (U + np.swapaxes(U, 1, 2)) / 2
    return rho * U / np.sqrt(np.sum(U**2, axis=(1, 2)))[:, None, None]


class TestFrobenius:
    def test_zero_radius(self):
        Q = random_symmetric(4)
        np.testing.assert_array_equal(frobenius_counterpart(Q, 0.0), (Q + Q.T) / 2)

    def test_negative_radius(self):
        with pytest.raises(ValueError):
            frobenius_counterpart(np.eye(2), -0.1)

    @pytest.mark.parametrize("beta, alpha", [(3.0, 0.55), (3.0, 0.8), (0.5, 0.99), (2.0, 0.51)])
    def test_equals_goe_equivalent(self, beta, alpha):
        Q = random_symmetric(6, seed=int(100 * alpha))
        rho = math.sqrt(2) * beta * std_normal_quantile(alpha)
        np.testing.assert_allclose(frobenius_counterpart(Q, rho),
                                   deterministic_equivalent(goe_model(Q, beta), alpha), atol=1e-14, rtol=0)

    def test_inner_max(self):
        rho = 1.7
        for x in random_simplex_points(5, 5, seed=1):
            U = random_sphere_symmetric(5, rho, 10_000, seed=2)
            vals = np.einsum("k,jkl,l->j", x, U, x)
            bound = rho * (x @ x)
            assert vals.max() <= bound + 1e-12
            U_star = rho * np.outer(x, x) / (x @ x)
            assert frobenius_norm(U_star) == pytest.approx(rho, abs=1e-12)
            assert x @ U_star @ x == pytest.approx(bound, abs=1e-12)


class TestBox:
    def test_single_realization(self):
        Q = random_symmetric(3)
        lo, up = box_from_realizations([Q])
        np.testing.assert_array_equal(lo, up)

    def test_two_realizations(self):
        lo, up = box_from_realizations([[[0, 1], [1, 0]], [[2, -1], [-1, 2]]])
        np.testing.assert_array_equal(lo, [[0, -1], [-1, 0]])
        np.testing.assert_array_equal(up, [[2, 1], [1, 2]])

    def test_contains_realizations(self):
        R = sample_goe(4, SeededRng(0, 0), size=30)
        lo, up = box_from_realizations(R)
        assert np.all(R >= lo) and np.all(R <= up)

    @pytest.mark.parametrize("bad", [[], [np.eye(2), np.eye(3)]])
    def test_errors(self, bad):
        with pytest.raises(ValueError):
            box_from_realizations(bad)

    def _box(self, rho, seed=0):
        nom = sample_uniform_symmetric(5, SeededRng(seed, 0))
        R = nom + 3 * sample_goe(5, SeededRng(seed, 1), size=40)
        lo, up = box_from_realizations(R)
        return BoxUncertainty(np.minimum(lo, nom), np.maximum(up, nom), nom, rho), R

    def test_rho_one_is_upper(self):
        box, _ = self._box(1.0)
        np.testing.assert_allclose(box_counterpart(box), box.Q_upper, atol=1e-14)

    def test_formula(self):
        box, _ = self._box(0.8)
        np.testing.assert_allclose(box_counterpart(box), 0.2 * box.Q_nom + 0.8 * box.Q_upper, atol=1e-14)

    def test_inner_max_at_upper_corner(self):
        box, _ = self._box(0.8, seed=3)
        C = box_counterpart(box)
        rng = np.random.default_rng(4)
        for x in random_simplex_points(5, 10, seed=5):
            W = rng.uniform(size=(1000, 5, 5))
            W = (W + np.swapaxes(W, 1, 2)) / 2
            U = box.U_lower + W * (box.U_upper - box.U_lower)
            vals = np.einsum("k,jkl,l->j", x, box.Q_nom + U, x)
            assert vals.max() <= x @ C @ x + 1e-12
            assert x @ (box.Q_nom + box.U_upper) @ x == pytest.approx(x @ C @ x, abs=1e-12)

    def test_invariants(self):
        with pytest.raises(ValueError):
            BoxUncertainty(np.eye(2), np.eye(2), 2 * np.eye(2), 0.5)
        with pytest.raises(ValueError):
            BoxUncertainty(np.eye(2), np.eye(2), np.eye(2), 0.0)
        with pytest.raises(ValueError):
            BoxUncertainty(np.eye(2), np.eye(2), np.eye(2), 1.5)


class TestSolveRobust:
    def test_frobenius_matches_cce(self):
        Q = sample_uniform_symmetric(8, SeededRng(2, 0))
        for alpha in (0.6, 0.75, 0.9):
            rho = math.sqrt(2) * 3 * std_normal_quantile(alpha)
            a = solve_robust(frobenius_counterpart(Q, rho))
            b = solve(deterministic_equivalent(goe_model(Q, 3.0), alpha))
            assert a.value == b.value

    def test_identical_realizations_give_nominal(self):
        Q = sample_uniform_symmetric(6, SeededRng(2, 1))
        lo, up = box_from_realizations([Q, Q, Q])
        s = solve_robust(box_counterpart(BoxUncertainty(lo, up, Q, 0.8)))
        assert s.value == pytest.approx(solve(Q).value, abs=1e-12)

    def test_robust_value_dominates_nominal(self):
        box, _ = TestBox()._box(0.8, seed=7)
        assert solve_robust(box_counterpart(box)).value >= solve(box.Q_nom).value - 1e-12
