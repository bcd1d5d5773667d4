import itertools
import math

import numpy as np
import pytest

from conftest import random_pair_supports, random_probability
from signedot.measures import DiscreteMeasure, SignedGridMeasure, to_support
from signedot.metric import TORUS_DIAMETER, cost_matrix, toroidal_distance
from signedot.oracle import lp_oracle, min_cost_flow
from signedot.solver import (
    check_w1_duality,
    grid_wasserstein,
    signed_wasserstein,
    solve_transport,
)


def brute_force_permutation(src, dst, p):
    """Uniform equal-size measures: an optimal plan is a permutation."""
    C = cost_matrix(src, dst, p).entries
    k = len(src)
    best = min(sum(C[i, s[i]] for i in range(k)) for s in itertools.permutations(range(k)))
    return best * src.weights[0]


class TestSolveTransport:
    def test_two_points(self):
        a = DiscreteMeasure([[0.1, 0.1]], [1.0])
        b = DiscreteMeasure([[0.4, 0.5]], [1.0])
        plan = solve_transport(a, b, 2)
        assert plan.total_cost_p == pytest.approx(0.3**2 + 0.4**2)
        assert plan.wasserstein_p == pytest.approx(0.5)

    @pytest.mark.parametrize("p", [1, 2, 3])
    def test_matches_permutation_search(self, rng, p):
        for _ in range(5):
            src = DiscreteMeasure(rng.random((5, 2)), np.full(5, 0.2))
            dst = DiscreteMeasure(rng.random((5, 2)), np.full(5, 0.2))
            plan = solve_transport(src, dst, p)
            assert plan.total_cost_p == pytest.approx(brute_force_permutation(src, dst, p), rel=1e-12)

    def test_plan_marginals(self, rng):
        src, dst = random_pair_supports(6, rng, density=0.5)
        G = solve_transport(src, dst, 2).dense()
        np.testing.assert_allclose(G.sum(axis=1), src.weights, atol=1e-14)
        np.testing.assert_allclose(G.sum(axis=0), dst.weights, atol=1e-14)
        assert np.all(G >= 0)

    def test_identical_measures_cost_zero(self, rng):
        src, _ = random_pair_supports(4, rng)
        assert solve_transport(src, src, 1).total_cost_p == pytest.approx(0.0, abs=1e-15)

    def test_unbalanced_rejected(self):
        a = DiscreteMeasure([[0.1, 0.1]], [1.0])
        b = DiscreteMeasure([[0.4, 0.5]], [1.1])
        with pytest.raises(ValueError, match="mass mismatch"):
            solve_transport(a, b, 1)

    def test_empty_rejected(self):
        a = DiscreteMeasure([[0.1, 0.1]], [1.0])
        with pytest.raises(ValueError):
            solve_transport(a, None, 1)

    def test_wp_monotone_in_p(self, rng):
        # Jensen on a probability coupling: W_1 <= W_2 <= W_3
        src, dst = random_pair_supports(4, rng)
        w = [solve_transport(src, dst, p).wasserstein_p for p in (1, 2, 3)]
        assert w[0] <= w[1] + 1e-12 <= w[2] + 2e-12


class TestOracle:
    def test_min_cost_flow_assignment(self):
        cost = np.array([[4, 1], [2, 3]])
        F = min_cost_flow(np.array([1, 1]), np.array([1, 1]), cost)
        np.testing.assert_array_equal(F, [[0, 1], [1, 0]])

    def test_min_cost_flow_split_supply(self):
        cost = np.array([[1, 5, 9]])
        F = min_cost_flow(np.array([6]), np.array([1, 2, 3]), cost)
        np.testing.assert_array_equal(F, [[1, 2, 3]])

    @pytest.mark.parametrize("p", [1, 2])
    def test_agrees_with_solver(self, rng, p):
        for _ in range(10):
            src, dst = random_pair_supports(4, rng)
            exact = solve_transport(src, dst, p).total_cost_p
            orc = lp_oracle(src, dst, p)
            assert abs(exact - orc.cost_p) <= orc.error_bound + 1e-9 * exact

    def test_bound_scales_with_resolution(self, rng):
        src, dst = random_pair_supports(4, rng)
        coarse = lp_oracle(src, dst, 1, scale=100)
        assert coarse.error_bound == pytest.approx(TORUS_DIAMETER * 32 / 100)
        exact = solve_transport(src, dst, 1).total_cost_p
        assert abs(exact - coarse.cost_p) <= coarse.error_bound

    def test_size_limit(self, rng):
        src, dst = random_pair_supports(9, rng)
        with pytest.raises(ValueError):
            lp_oracle(src, dst, 1)


class TestDuality:
    def test_certificate_passes(self, rng):
        for _ in range(5):
            src, dst = random_pair_supports(6, rng, density=0.6)
            # rescale dst to the mass of src
            dst = DiscreteMeasure(dst.points, dst.weights * src.total_mass / dst.total_mass)
            rep = check_w1_duality(solve_transport(src, dst, 1))
            assert rep.passed, rep
            assert rep.primal == pytest.approx(rep.dual, rel=1e-9)

    def test_detects_corrupted_potentials(self, rng):
        src, dst = random_pair_supports(4, rng)
        plan = solve_transport(src, dst, 1)
        bad = type(plan)(**{**plan.__dict__, "dual_src": plan.dual_src + 0.1})
        assert not check_w1_duality(bad).passed

    def test_requires_p1(self, rng):
        src, dst = random_pair_supports(4, rng)
        with pytest.raises(ValueError):
            check_w1_duality(solve_transport(src, dst, 2))


class TestSignedWasserstein:
    def test_point_masses(self):
        a = SignedGridMeasure.point_mass(32, (8, 8))
        b = SignedGridMeasure.point_mass(32, (24, 24))
        for p in (1, 2, 3):
            res = signed_wasserstein(a, b, p)
            assert res.value == pytest.approx(TORUS_DIAMETER, rel=1e-12)
            assert not res.normalized

    def test_reduces_to_wasserstein_for_probabilities(self, rng):
        mu, nu = random_probability(4, rng), random_probability(4, rng)
        for p in (1, 2):
            assert signed_wasserstein(mu, nu, p).value == pytest.approx(grid_wasserstein(mu, nu, p), rel=1e-12)

    def test_negative_mass_is_moved(self):
        # mu = delta_x - delta_y, nu = 0: S = delta_x, T = delta_y
        mu = SignedGridMeasure.point_mass(8, (0, 0)) - SignedGridMeasure.point_mass(8, (0, 2))
        res = signed_wasserstein(mu, SignedGridMeasure.zeros(8), 1)
        assert res.value == pytest.approx(0.25)

    def test_symmetry_and_self_distance(self, rng):
        mu = SignedGridMeasure(4, rng.normal(size=(4, 4)))
        nu = SignedGridMeasure(4, rng.normal(size=(4, 4)))
        assert signed_wasserstein(mu, nu, 2).value == pytest.approx(signed_wasserstein(nu, mu, 2).value, rel=1e-10)
        assert signed_wasserstein(mu, mu, 1).value == pytest.approx(0.0, abs=1e-14)

    def test_unequal_masses(self):
        a = SignedGridMeasure.point_mass(8, (0, 0))
        b = SignedGridMeasure.point_mass(8, (0, 4), mass=2.0)
        res = signed_wasserstein(a, b, 1)
        assert res.normalized
        assert res.value == pytest.approx(0.5)
        with pytest.raises(ValueError):
            signed_wasserstein(a, b, 1, normalize=False)

    def test_zero_pair_is_degenerate(self):
        z = SignedGridMeasure.zeros(4)
        res = signed_wasserstein(z, z, 2)
        assert res.degenerate and res.value == 0.0 and res.plan is None

    def test_one_sided_split_rejected(self):
        a = SignedGridMeasure.point_mass(4, (0, 0))
        with pytest.raises(ValueError):
            signed_wasserstein(a, SignedGridMeasure.zeros(4), 1)

    def test_triangle_inequality_p1(self, rng):
        ms = [SignedGridMeasure(4, rng.normal(size=(4, 4)) * 0.1 + 1 / 16) for _ in range(3)]
        ms = [m.scaled(1 / m.total_mass) for m in ms]
        d = lambda x, y: signed_wasserstein(x, y, 1).value
        assert d(ms[0], ms[1]) <= d(ms[0], ms[2]) + d(ms[2], ms[1]) + 1e-12


class TestLpDuality:
    @pytest.mark.parametrize("p", [2, 3])
    def test_certificate_for_higher_p(self, rng, p):
        from signedot.solver import check_lp_duality

        src, dst = random_pair_supports(5, rng, density=0.7)
        rep = check_lp_duality(solve_transport(src, dst, p))
        assert rep.passed, rep
