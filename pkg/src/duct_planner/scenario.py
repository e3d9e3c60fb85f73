"""Experiment orchestration: built-in cases, planner runs, baselines, waypoints."""

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .cgm import MODE_RADIAL, ChannelGainMap, DuctModelParams, GridSpec, synthesize_duct_map
from .evaluator import LosFreeSpaceField, Scenario, make_field
from .kinematics import integrate_trajectory
from .moea import MoeaConfig, evolve
from .pso import Archive, PsoConfig, refine
from .radio import RadioParams


def default_radio() -> RadioParams:
    """10 GHz ship-to-shore link budget (dB figures converted to linear)."""
    return RadioParams(
        p_t=10 ** (15 / 10) * 1e-3,       # 15 dBm
        g_t=10 ** (15 / 10),              # 15 dBi
        g_r=10 ** (20 / 10),              # 20 dBi
        bandwidth=50e6,
        n0=10 ** (-169 / 10) * 1e-3,      # -169 dBm/Hz
        f=10e9,
        z_tx=10.0,
        z_rx=15.0,
    )


CASE_ENDPOINTS = {
    1: ((-50e3, 50e3), (70e3, 70e3)),
    2: ((-70e3, 70e3), (50e3, 50e3)),
    3: ((-70e3, 70e3), (70e3, 70e3)),
}


def make_case(case: int, d_bits: float = 3.2e11, delta_small_t: float = 1.0,
              t_max_factor: float = 2.0) -> Scenario:
    """Built-in scenarios 1-3: far endpoint geometries beyond the LoS range.

    t_max defaults to t_max_factor times the straight-line sailing time,
    rounded up to a whole number of timeslots.
    """
    if case not in CASE_ENDPOINTS:
        raise ValueError(f"unknown case {case}; choose 1, 2 or 3")
    a_xy, b_xy = CASE_ENDPOINTS[case]
    radio = default_radio()
    v, delta_t = 20.0, 20.0
    straight = math.dist(a_xy, b_xy) / v
    t_max = math.ceil(t_max_factor * straight / delta_t) * delta_t
    return Scenario(a=(a_xy[0], a_xy[1], radio.z_tx),
                    b=(b_xy[0], b_xy[1], radio.z_tx),
                    v=v, delta_t=delta_t, delta_small_t=delta_small_t,
                    t_max=t_max, d_bits=d_bits, radio=radio,
                    dphi_max=math.pi / 4, name=f"case{case}")


def default_grid(extent_m: float = 160e3, height_m: float = 40.0) -> GridSpec:
    return GridSpec(delta_d=50.0, delta_h=1.0,
                    n_range=int(math.ceil(extent_m / 50.0)),
                    n_height=int(math.ceil(height_m / 1.0)), mode=MODE_RADIAL)


def default_duct_map(f: float = 10e9) -> ChannelGainMap:
    return synthesize_duct_map(DuctModelParams(), default_grid(), f)


@dataclass
class RunResult:
    archive: Archive
    nsga_log: list
    pso_log: list


def run_hybrid(scenario: Scenario, cgm, moea_cfg: MoeaConfig, pso_cfg: PsoConfig,
             seed: int, threads: int = 1) -> RunResult:
    """Full two-phase pipeline on a CGM (or any gain field)."""
    rng = np.random.default_rng(seed)
    field = make_field(cgm, scenario.radio)
    nsga_log: list = []
    pso_log: list = []
    pop = evolve(moea_cfg, scenario, field, rng, threads=threads, log=nsga_log)
    archive = refine(pop, pso_cfg, scenario, field, rng, threads=threads, log=pso_log)
    return RunResult(archive=archive, nsga_log=nsga_log, pso_log=pso_log)


def run_baseline(scenario: Scenario, moea_cfg: MoeaConfig, pso_cfg: PsoConfig,
                 seed: int, threads: int = 1) -> RunResult:
    """Same pipeline without a CGM: free-space gain inside the LoS range only."""
    return run_hybrid(scenario, LosFreeSpaceField(scenario.radio), moea_cfg, pso_cfg,
                    seed, threads=threads)


def run_nsga_only(scenario: Scenario, cgm, moea_cfg: MoeaConfig,
                  pso_cfg: PsoConfig, seed: int, threads: int = 1) -> RunResult:
    """Plain NSGA-II at an equal evaluation budget to the two-phase pipeline.

    The PSO budget (G'max generations of n_p evaluations) is converted into
    extra NSGA-II generations.
    """
    extra = math.ceil(pso_cfg.g_max_prime * moea_cfg.n_p
                      / moea_cfg.evals_per_generation)
    cfg = MoeaConfig(n_p=moea_cfg.n_p, g_max=moea_cfg.g_max + extra,
                     pd=moea_cfg.pd, pc=moea_cfg.pc, pm=moea_cfg.pm,
                     eta_c=moea_cfg.eta_c, eta_m=moea_cfg.eta_m,
                     iota=moea_cfg.iota,
                     truncation_margin=moea_cfg.truncation_margin)
    rng = np.random.default_rng(seed)
    field = make_field(cgm, scenario.radio)
    nsga_log: list = []
    pop = evolve(cfg, scenario, field, rng, threads=threads, log=nsga_log)
    no_pso = PsoConfig(g_max_prime=0, iota=pso_cfg.iota)
    archive = refine(pop, no_pso, scenario, field, rng, threads=threads)
    return RunResult(archive=archive, nsga_log=nsga_log, pso_log=[])


# ---------------------------------------------------------------------------
# Multi-waypoint planning
# ---------------------------------------------------------------------------

@dataclass
class SegmentPlan:
    scenario: Scenario
    archive: Archive
    feasible: bool


@dataclass
class MultiWaypointPlan:
    segments: list              # SegmentPlan per leg
    selected: list | None       # one archive member per segment, or None
    trajectory: np.ndarray | None  # composed (N, 3) positions
    total_m2: float | None


def plan_multi_waypoint(scenario: Scenario, cgm, moea_cfg: MoeaConfig,
                        pso_cfg: PsoConfig, seed: int,
                        threads: int = 1) -> MultiWaypointPlan:
    """Optimize each leg independently and compose one trajectory.

    The data volume is split equally across legs and each leg's time budget
    is proportional to its share of the total straight-line distance.  The
    composed member per leg minimizes total sailing slots over feasible
    archive members; selection is None if any leg has no feasible member.
    """
    stops = [scenario.a] + [tuple(w) for w in scenario.waypoints] + [scenario.b]
    n_seg = len(stops) - 1
    dists = [math.dist(stops[i][:2], stops[i + 1][:2]) for i in range(n_seg)]
    total = sum(dists) or 1.0

    segments = []
    for i in range(n_seg):
        t_seg = max(2 * scenario.delta_t,
                    math.ceil(scenario.t_max * dists[i] / total / scenario.delta_t)
                    * scenario.delta_t)
        seg_scenario = Scenario(a=stops[i], b=stops[i + 1], v=scenario.v,
                                delta_t=scenario.delta_t,
                                delta_small_t=scenario.delta_small_t,
                                t_max=t_seg, d_bits=scenario.d_bits / n_seg,
                                radio=scenario.radio,
                                phi_bounds=scenario.phi_bounds,
                                dphi_max=scenario.dphi_max,
                                name=f"{scenario.name}-leg{i + 1}")
        result = run_hybrid(seg_scenario, cgm, moea_cfg, pso_cfg, seed + i,
                          threads=threads)
        feasible = any(m.eval.feasible for m in result.archive.members)
        segments.append(SegmentPlan(scenario=seg_scenario, archive=result.archive,
                                    feasible=feasible))

    if not all(seg.feasible for seg in segments):
        return MultiWaypointPlan(segments=segments, selected=None,
                                 trajectory=None, total_m2=None)

    selected = []
    for seg in segments:
        feas = [m for m in seg.archive.members if m.eval.feasible]
        selected.append(min(feas, key=lambda m: m.eval.m2_tilde))

    pieces = []
    for seg, member in zip(segments, selected):
        traj = integrate_trajectory(member.genes, seg.scenario)
        pieces.append(traj.positions if not pieces else traj.positions[1:])
    composed = np.vstack(pieces)
    total_m2 = sum(m.eval.m2_tilde for m in selected)
    return MultiWaypointPlan(segments=segments, selected=selected,
                             trajectory=composed, total_m2=total_m2)


# ---------------------------------------------------------------------------
# Scenario config file (JSON)
# ---------------------------------------------------------------------------

def scenario_to_dict(scenario: Scenario) -> dict:
    radio = scenario.radio
    return {
        "a": list(scenario.a), "b": list(scenario.b),
        "waypoints": [list(w) for w in scenario.waypoints],
        "v": scenario.v, "delta_t": scenario.delta_t,
        "delta_small_t": scenario.delta_small_t, "t_max": scenario.t_max,
        "d_bits": scenario.d_bits,
        "phi_bounds": list(scenario.phi_bounds), "dphi_max": scenario.dphi_max,
        "name": scenario.name,
        "radio": {"p_t": radio.p_t, "g_t": radio.g_t, "g_r": radio.g_r,
                  "bandwidth": radio.bandwidth, "n0": radio.n0, "f": radio.f,
                  "z_tx": radio.z_tx, "z_rx": radio.z_rx},
    }


def scenario_from_dict(data: dict) -> Scenario:
    radio = RadioParams(**data["radio"])
    return Scenario(a=tuple(data["a"]), b=tuple(data["b"]),
                    waypoints=tuple(tuple(w) for w in data.get("waypoints", [])),
                    v=data["v"], delta_t=data["delta_t"],
                    delta_small_t=data["delta_small_t"], t_max=data["t_max"],
                    d_bits=data["d_bits"],
                    phi_bounds=tuple(data.get("phi_bounds", (-math.pi, math.pi))),
                    dphi_max=data.get("dphi_max", math.pi / 4),
                    name=data.get("name", ""), radio=radio)


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        return scenario_from_dict(json.load(fh))


def save_scenario(scenario: Scenario, path) -> None:
    with open(path, "w") as fh:
        json.dump(scenario_to_dict(scenario), fh, indent=2, sort_keys=True)
