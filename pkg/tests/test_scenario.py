import dataclasses
import math

import numpy as np
import pytest

from duct_planner.moea import MoeaConfig
from duct_planner.pso import PsoConfig
from duct_planner.scenario import (CASE_ENDPOINTS, default_duct_map,
                                   default_grid, default_radio, load_scenario,
                                   make_case, plan_multi_waypoint, run_baseline,
                                   run_hybrid, run_nsga_only, save_scenario,
                                   scenario_from_dict, scenario_to_dict)

SMALL_MOEA = MoeaConfig(n_p=8, g_max=3, pd=4, pc=8, pm=8)
SMALL_PSO = PsoConfig(g_max_prime=3)


class TestBuiltinCases:
    def test_case1_geometry(self):
        sc = make_case(1)
        assert sc.a[:2] == (-50e3, 50e3)
        assert sc.b[:2] == (70e3, 70e3)
        assert sc.v == 20.0 and sc.delta_t == 20.0

    def test_case1_slot_budget(self):
        # straight-line 121.7 km at 400 m/slot, doubled: 609 slots
        sc = make_case(1)
        straight = math.dist(sc.a[:2], sc.b[:2])
        assert straight == pytest.approx(121_655.0, abs=1.0)
        assert sc.n_slots == 609

    def test_endpoints_beyond_los(self):
        from duct_planner.radio import los_range
        d_los = los_range(10.0, 15.0)
        for case, (a, b) in CASE_ENDPOINTS.items():
            assert math.hypot(*a) > d_los
            assert math.hypot(*b) > d_los

    def test_unknown_case_rejected(self):
        with pytest.raises(ValueError):
            make_case(4)

    def test_t_max_factor(self):
        short = make_case(1, t_max_factor=1.5)
        long = make_case(1, t_max_factor=3.0)
        assert long.t_max == pytest.approx(2.0 * short.t_max, rel=0.01)

    def test_default_map_extent(self):
        grid = default_grid()
        assert grid.n_range * grid.delta_d == pytest.approx(160e3)
        assert grid.n_height * grid.delta_h == pytest.approx(40.0)
        cgm = default_duct_map()
        assert cgm.spec == grid
        assert cgm.f == default_radio().f


class TestRunners:
    def test_hybrid_produces_usable_archive(self, small_scenario, small_cgm):
        out = run_hybrid(small_scenario, small_cgm, SMALL_MOEA, SMALL_PSO, seed=1)
        assert len(out.archive) >= 1
        assert len(out.nsga_log) == SMALL_MOEA.g_max + 1
        assert len(out.pso_log) == SMALL_PSO.g_max_prime
        for m in out.archive.members:
            assert len(m.genes) == small_scenario.n_slots

    def test_hybrid_deterministic(self, small_scenario, small_cgm):
        a = run_hybrid(small_scenario, small_cgm, SMALL_MOEA, SMALL_PSO, seed=2)
        b = run_hybrid(small_scenario, small_cgm, SMALL_MOEA, SMALL_PSO, seed=2)
        assert a.archive.fitness_points() == b.archive.fitness_points()

    def test_baseline_runs_without_cgm(self, small_scenario):
        out = run_baseline(small_scenario, SMALL_MOEA, SMALL_PSO, seed=3)
        assert len(out.archive) >= 1

    def test_nsga_only_budget_conversion(self, small_scenario, small_cgm):
        out = run_nsga_only(small_scenario, small_cgm, SMALL_MOEA, SMALL_PSO,
                            seed=4)
        # G'max * n_p extra evaluations at pc+pm per generation:
        # ceil(3 * 8 / 16) = 2 extra generations on top of 3
        assert len(out.nsga_log) == 3 + 2 + 1
        assert out.pso_log == []
        assert len(out.archive) >= 1


class TestMultiWaypoint:
    def test_two_leg_plan(self, small_cgm, radio):
        from duct_planner.evaluator import Scenario
        sc = Scenario(a=(0.0, 0.0, 10.0), b=(7200.0, 0.0, 10.0),
                      waypoints=((3600.0, 0.0, 10.0),),
                      v=20.0, delta_t=20.0, delta_small_t=1.0, t_max=1440.0,
                      d_bits=2e8, radio=radio, name="two-leg")
        plan = plan_multi_waypoint(sc, small_cgm, SMALL_MOEA, SMALL_PSO, seed=5)
        assert len(plan.segments) == 2
        for seg in plan.segments:
            assert len(seg.archive) >= 1
        if plan.selected is not None:
            assert plan.trajectory is not None
            assert np.allclose(plan.trajectory[0], sc.a)
            assert plan.total_m2 == pytest.approx(
                sum(m.eval.m2_tilde for m in plan.selected))

    def test_no_waypoints_single_leg(self, small_scenario, small_cgm):
        plan = plan_multi_waypoint(small_scenario, small_cgm, SMALL_MOEA,
                                   SMALL_PSO, seed=6)
        assert len(plan.segments) == 1


class TestScenarioSerialization:
    def test_round_trip(self, small_scenario, tmp_path):
        path = tmp_path / "scenario.json"
        save_scenario(small_scenario, path)
        loaded = load_scenario(path)
        assert loaded == small_scenario

    def test_round_trip_with_waypoints(self, radio, tmp_path):
        sc = dataclasses.replace(make_case(2),
                                 waypoints=((0.0, 60e3, 10.0),))
        path = tmp_path / "scenario.json"
        save_scenario(sc, path)
        assert load_scenario(path) == sc

    def test_dict_defaults(self, small_scenario):
        data = scenario_to_dict(small_scenario)
        del data["waypoints"]
        del data["phi_bounds"]
        del data["dphi_max"]
        loaded = scenario_from_dict(data)
        assert loaded.waypoints == ()
        assert loaded.dphi_max == pytest.approx(math.pi / 4)
