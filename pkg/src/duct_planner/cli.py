"""Command-line front end: CGM generation, planning runs, metric comparison."""

import argparse
import csv
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import cgm as cgm_mod
from .cgm import DuctModelParams, GridSpec, load_cgm, save_cgm, synthesize_duct_map
from .evaluator import evaluate
from .kinematics import integrate_trajectory
from .metrics import (comparison_ideal, comparison_reference, line_distribution,
                      normalized_hypervolume)
from .moea import MoeaConfig, nondominated_sort
from .pso import PsoConfig
from .scenario import (default_duct_map, load_scenario, make_case, run_baseline,
                       run_hybrid, run_nsga_only)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="duct-planner",
        description="Ship trajectory planning over evaporation-duct channel gain maps")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-cgm", help="synthesize a duct CGM and write a CGM1 file")
    g.add_argument("--out", required=True)
    g.add_argument("--mode", choices=["radial"], default="radial")
    g.add_argument("--f", type=float, default=10e9, help="carrier frequency (Hz)")
    g.add_argument("--edh", type=float, default=35.0, help="duct height (m)")
    g.add_argument("--delta-max", type=float, default=10.07)
    g.add_argument("--r-sat", type=float, default=120e3)
    g.add_argument("--a-osc", type=float, default=5.0)
    g.add_argument("--lambda", dest="lambda_osc", type=float, default=8e3)
    g.add_argument("--beta-leak", type=float, default=2.0)
    g.add_argument("--extent", type=float, default=160e3, help="horizontal extent (m)")
    g.add_argument("--height", type=float, default=40.0, help="vertical extent (m)")
    g.add_argument("--dd", type=float, default=50.0, help="horizontal cell width (m)")
    g.add_argument("--dh", type=float, default=1.0, help="vertical cell height (m)")
    g.set_defaults(func=cmd_gen_cgm)

    p = sub.add_parser("plan", help="run the planner and export archive/trajectories")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", help="scenario config JSON")
    src.add_argument("--case", type=int, choices=[1, 2, 3])
    cgm_src = p.add_mutually_exclusive_group()
    cgm_src.add_argument("--cgm", help="CGM1 file")
    cgm_src.add_argument("--synthetic", action="store_true",
                         help="use the built-in synthetic duct map (default)")
    p.add_argument("--baseline", action="store_true",
                   help="free-space LoS-only baseline instead of the CGM")
    p.add_argument("--no-pso", action="store_true",
                   help="plain NSGA-II at an equal evaluation budget")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--noise-sigma", type=float, default=0.0,
                   help="Gaussian CGM perturbation (dB)")
    p.add_argument("--dt-sub", type=float, default=None,
                   help="sub-timeslot length override (s)")
    p.add_argument("--d-bits", type=float, default=None)
    p.add_argument("--pop", type=int, default=100)
    p.add_argument("--gens", type=int, default=200)
    p.add_argument("--pso-gens", type=int, default=100)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_plan)

    c = sub.add_parser("compare", help="metric report for two archive files")
    c.add_argument("--a", required=True)
    c.add_argument("--b", required=True)
    c.add_argument("--ref", default="auto", help="'auto' or 'r1,r2'")
    c.set_defaults(func=cmd_compare)
    return parser


def cmd_gen_cgm(args) -> int:
    if args.dd <= 0 or args.dh <= 0:
        raise ValueError("cell sizes --dd and --dh must be strictly positive")
    spec = GridSpec(delta_d=args.dd, delta_h=args.dh,
                    n_range=int(math.ceil(args.extent / args.dd)),
                    n_height=int(math.ceil(args.height / args.dh)), mode="radial")
    params = DuctModelParams(edh=args.edh, delta_max=args.delta_max,
                             r_sat=args.r_sat, a_osc=args.a_osc,
                             lambda_osc=args.lambda_osc, beta_leak=args.beta_leak)
    cgm = synthesize_duct_map(params, spec, args.f)
    save_cgm(cgm, args.out)
    print(f"wrote {args.out}: {spec.n_cells} cells "
          f"(dd={spec.delta_d} m, dh={spec.delta_h} m), "
          f"loss {cgm.loss_db.min():.2f}..{cgm.loss_db.max():.2f} dB")
    return EXIT_OK


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    return max(1, int(os.environ.get("DUCT_PLANNER_THREADS", "1")))


def cmd_plan(args) -> int:
    scenario = load_scenario(args.scenario) if args.scenario else make_case(args.case)
    if args.dt_sub is not None:
        from dataclasses import replace
        scenario = replace(scenario, delta_small_t=args.dt_sub)
    if args.d_bits is not None:
        from dataclasses import replace
        scenario = replace(scenario, d_bits=args.d_bits)

    cgm = load_cgm(args.cgm) if args.cgm else default_duct_map(scenario.radio.f)
    if args.noise_sigma > 0:
        cgm = cgm_mod.perturb(cgm, args.noise_sigma, seed=args.seed)

    moea_cfg = MoeaConfig.sized(args.pop, args.gens)
    pso_cfg = PsoConfig(g_max_prime=args.pso_gens)
    threads = _threads(args)

    if args.baseline:
        result = run_baseline(scenario, moea_cfg, pso_cfg, args.seed, threads=threads)
        field = None
    elif args.no_pso:
        result = run_nsga_only(scenario, cgm, moea_cfg, pso_cfg, args.seed,
                               threads=threads)
        field = cgm
    else:
        result = run_hybrid(scenario, cgm, moea_cfg, pso_cfg, args.seed,
                            threads=threads)
        field = cgm

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_archive(result.archive, out_dir / "archive.json")
    write_generation_log(result.nsga_log + result.pso_log,
                         out_dir / "generations.csv")
    traj_dir = out_dir / "trajectories"
    traj_dir.mkdir(exist_ok=True)
    from .evaluator import LosFreeSpaceField
    eval_field = LosFreeSpaceField(scenario.radio) if args.baseline else field
    for idx, member in enumerate(result.archive.members):
        write_trajectory(member, scenario, eval_field,
                         traj_dir / f"member_{idx:03d}.csv")

    n_feasible = sum(1 for m in result.archive.members if m.eval.feasible)
    print(f"archive: {len(result.archive)} members, {n_feasible} feasible "
          f"-> {out_dir}")
    if n_feasible == 0:
        print("no feasible solution found", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def write_archive(archive, path) -> None:
    payload = [{"f1": m.fitness[0], "f2": m.fitness[1],
                "m1_tilde": m.eval.m1_tilde, "m2_tilde": m.eval.m2_tilde,
                "feasible": m.eval.feasible,
                "genes": [float(g) for g in m.genes]}
               for m in archive.members]
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True)


def read_archive(path) -> list:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise ValueError(f"{path}: archive must be a JSON list")
    for entry in data:
        if "f1" not in entry or "f2" not in entry:
            raise ValueError(f"{path}: archive entries need f1/f2")
    return data


def write_generation_log(records, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["generation", "best_f1", "best_f2", "front_size",
                         "hypervolume"])
        for rec in records:
            writer.writerow([rec.generation, rec.best_f1, rec.best_f2,
                             rec.front_size, rec.hypervolume])


def write_trajectory(member, scenario, field, path) -> None:
    traj = integrate_trajectory(member.genes, scenario)
    res = evaluate(member.genes, scenario, field)
    m = int(round(scenario.delta_t / scenario.delta_small_t))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["slot", "sub_slot", "x_m", "y_m", "z_m", "cumulative_bits"])
        for k, pos in enumerate(traj.positions):
            cum = res.data_curve[k - 1] if k >= 1 else 0.0
            writer.writerow([k // m, k % m, pos[0], pos[1], pos[2], cum])


def cmd_compare(args) -> int:
    try:
        arch_a = read_archive(args.a)
        arch_b = read_archive(args.b)
    except (json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    pts_a = [(e["f1"], e["f2"]) for e in arch_a]
    pts_b = [(e["f1"], e["f2"]) for e in arch_b]
    if args.ref == "auto":
        ref = comparison_reference(pts_a, pts_b)
    else:
        r1, r2 = (float(x) for x in args.ref.split(","))
        ref = (r1, r2)
    ideal = comparison_ideal(pts_a, pts_b)

    def dominated_count(pts, others):
        def dom(q, p):
            return q[0] <= p[0] and q[1] <= p[1] and (q[0] < p[0] or q[1] < p[1])
        return sum(1 for p in pts if any(dom(q, p) for q in others))

    for label, pts, other in (("A", pts_a, pts_b), ("B", pts_b, pts_a)):
        hv = normalized_hypervolume(pts, ref, ideal)
        ld = line_distribution(pts)
        dom = dominated_count(pts, other)
        print(f"{label}: n={len(pts)} normalized_hv={hv:.6f} "
              f"line_distribution={ld:.6f} dominated_by_other={dom}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
