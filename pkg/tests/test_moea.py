import math

import numpy as np
import pytest

from duct_planner.moea import (EliteFront, MoeaConfig, crowding, evolve,
                               init_population, mutate, nondominated_sort, sbx)

PI = math.pi


def brute_force_ranks(points):
    pts = [tuple(p) for p in points]

    def dominates(a, b):
        return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))

    ranks = [None] * len(pts)
    remaining = set(range(len(pts)))
    level = 0
    while remaining:
        front = [i for i in remaining
                 if not any(dominates(pts[j], pts[i]) for j in remaining if j != i)]
        for i in front:
            ranks[i] = level
        remaining -= set(front)
        level += 1
    return ranks


class TestNondominatedSort:
    def test_three_point_oracle(self):
        assert nondominated_sort([(1, 2), (2, 1), (2, 2)]) == [0, 0, 1]

    def test_chain(self):
        assert nondominated_sort([(3, 3), (2, 2), (1, 1)]) == [2, 1, 0]

    def test_all_nondominated(self):
        assert nondominated_sort([(1, 4), (2, 3), (3, 2), (4, 1)]) == [0, 0, 0, 0]

    def test_duplicates_share_rank(self):
        assert nondominated_sort([(1, 1), (1, 1), (2, 2)]) == [0, 0, 1]

    def test_empty(self):
        assert nondominated_sort([]) == []

    def test_matches_brute_force(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            pts = rng.integers(0, 10, size=(rng.integers(1, 40), 2))
            assert nondominated_sort(pts) == brute_force_ranks(pts)


class TestCrowding:
    def test_three_evenly_spaced(self):
        d = crowding([(0, 4), (1, 2), (2, 0)])
        assert d[0] == math.inf and d[2] == math.inf
        assert d[1] == pytest.approx(2.0)

    def test_boundaries_infinite(self):
        d = crowding([(0, 10), (3, 7), (6, 1), (9, 0)])
        assert d[0] == math.inf and d[-1] == math.inf
        assert all(np.isfinite(d[1:-1]))

    def test_uneven_spacing_prefers_isolated(self):
        # middle points: one in a dense cluster, one isolated
        d = crowding([(0, 30), (1, 29), (2, 28), (20, 0)])
        assert d[2] > d[1]

    def test_degenerate_objective(self):
        d = crowding([(0, 5), (1, 5), (2, 5)])
        assert d[1] == pytest.approx(1.0)  # only f1 contributes

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            crowding([])


class TestSbx:
    def test_nu_half_is_identity(self):
        # nu = 0.5 everywhere -> beta = 1 -> children equal parents
        class HalfRng:
            def random(self, shape):
                return np.full(shape, 0.5)

        a = np.array([0.1, -0.7, 1.2])
        b = np.array([0.4, 0.3, -0.9])
        ca, cb = sbx(a, b, 20.0, HalfRng())
        assert np.allclose(ca, a)
        assert np.allclose(cb, b)

    def test_children_sum_preserved(self):
        rng = np.random.default_rng(1)
        a = rng.uniform(-1, 1, 50)
        b = rng.uniform(-1, 1, 50)
        ca, cb = sbx(a, b, 20.0, rng)
        assert np.allclose(ca + cb, a + b)

    def test_clamped_to_bounds(self):
        rng = np.random.default_rng(2)
        a = np.full(200, PI - 1e-6)
        b = np.full(200, -PI + 1e-6)
        for _ in range(5):
            ca, cb = sbx(a, b, 2.0, rng)
            assert np.all(ca <= PI) and np.all(ca >= -PI)
            assert np.all(cb <= PI) and np.all(cb >= -PI)

    def test_high_eta_keeps_children_near_parents(self):
        rng = np.random.default_rng(3)
        a = np.zeros(500)
        b = np.full(500, 0.1)
        ca_lo, _ = sbx(a, b, 0.5, np.random.default_rng(3))
        ca_hi, _ = sbx(a, b, 50.0, np.random.default_rng(3))
        spread_lo = np.abs(ca_lo - 0.05).mean()
        spread_hi = np.abs(ca_hi - 0.05).mean()
        assert spread_hi < spread_lo

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            sbx(np.zeros(3), np.zeros(4), 20.0, np.random.default_rng(0))


class TestMutate:
    def test_zero_activation_identity(self):
        # chi always above the activation threshold -> no gene changes
        class HighRng:
            def random(self, shape):
                return np.ones(shape)

        parent = np.array([0.3, -0.2, 1.0])
        out = mutate(parent, 50.0, HighRng(), m2_ceil=10 ** 9)
        assert np.array_equal(out, parent)

    def test_full_activation_changes_genes(self):
        rng = np.random.default_rng(4)
        parent = np.zeros(100)
        out = mutate(parent, 50.0, rng, m2_ceil=1)  # eta_m/m2_ceil >= 1
        assert not np.array_equal(out, parent)

    def test_activation_scales_with_m2_ceil(self):
        parent = np.zeros(2000)
        few = mutate(parent, 50.0, np.random.default_rng(5), m2_ceil=500)
        many = mutate(parent, 50.0, np.random.default_rng(5), m2_ceil=100)
        assert np.count_nonzero(many - parent) > np.count_nonzero(few - parent)

    def test_in_bounds(self):
        rng = np.random.default_rng(6)
        parent = rng.uniform(-PI, PI, 500)
        out = mutate(parent, 10.0, rng, m2_ceil=1)
        assert np.all(out >= -PI) and np.all(out <= PI)

    def test_bad_m2_ceil_rejected(self):
        with pytest.raises(ValueError):
            mutate(np.zeros(3), 50.0, np.random.default_rng(0), m2_ceil=0)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            MoeaConfig(n_p=1)
        with pytest.raises(ValueError):
            MoeaConfig(n_p=4, pd=5)
        with pytest.raises(ValueError):
            MoeaConfig(eta_c=0.0)

    def test_sized(self):
        cfg = MoeaConfig.sized(60, 80)
        assert (cfg.n_p, cfg.g_max) == (60, 80)
        assert cfg.pd == 4
        assert cfg.pc == 180 and cfg.pm == 300
        assert cfg.evals_per_generation == 480


class TestEliteFront:
    def test_hypervolume_monotone(self):
        rng = np.random.default_rng(7)
        elite = EliteFront()
        prev = 0.0
        for _ in range(50):
            elite.update(rng.uniform(0, 10, size=(5, 2)))
            hv = elite.hypervolume((10.0, 10.0))
            assert hv >= prev - 1e-12
            prev = hv

    def test_keeps_only_nondominated(self):
        elite = EliteFront()
        elite.update([(1, 2), (2, 1), (2, 2)])
        assert elite.points == [(1, 2), (2, 1)]
        elite.update([(0.5, 0.5)])
        assert elite.points == [(0.5, 0.5)]


class TestEvolve:
    def test_init_population_properties(self, small_scenario):
        cfg = MoeaConfig(n_p=10, g_max=0, pd=4, pc=8, pm=8)
        pop = init_population(cfg, small_scenario, np.random.default_rng(8))
        assert len(pop) == 10
        for ind in pop:
            assert len(ind.genes) == small_scenario.n_slots
            assert np.all(ind.genes >= -PI) and np.all(ind.genes <= PI)
        # the random-walk half respects the steering limit
        walks = pop[5:]
        for ind in walks:
            assert np.all(np.abs(np.diff(ind.genes)) <= small_scenario.dphi_max + 1e-9)

    def test_zero_generations_returns_evaluated_initial_population(
            self, small_scenario, small_cgm):
        cfg = MoeaConfig(n_p=8, g_max=0, pd=4, pc=8, pm=8)
        pop = evolve(cfg, small_scenario, small_cgm, np.random.default_rng(9))
        assert len(pop) == 8
        for ind in pop:
            assert ind.fitness is not None and ind.rank is not None

    def test_population_size_constant_and_log_monotone(
            self, small_scenario, small_cgm):
        cfg = MoeaConfig(n_p=10, g_max=5, pd=4, pc=10, pm=10)
        log = []
        pop = evolve(cfg, small_scenario, small_cgm, np.random.default_rng(10),
                     log=log)
        assert len(pop) == 10
        assert [r.generation for r in log] == list(range(6))
        hv = [r.hypervolume for r in log]
        assert all(b >= a - 1e-12 for a, b in zip(hv, hv[1:]))
        best_f2 = [r.best_f2 for r in log]
        assert min(best_f2) >= 0

    def test_deterministic_given_seed(self, small_scenario, small_cgm):
        cfg = MoeaConfig(n_p=8, g_max=3, pd=4, pc=8, pm=8)
        a = evolve(cfg, small_scenario, small_cgm, np.random.default_rng(11))
        b = evolve(cfg, small_scenario, small_cgm, np.random.default_rng(11))
        for x, y in zip(a, b):
            assert np.array_equal(x.genes, y.genes)
            assert x.fitness == y.fitness

    def test_improves_over_initial_population(self, small_scenario, small_cgm):
        cfg = MoeaConfig(n_p=12, g_max=15, pd=4, pc=24, pm=24)
        log = []
        evolve(cfg, small_scenario, small_cgm, np.random.default_rng(12), log=log)
        assert log[-1].hypervolume > log[0].hypervolume
