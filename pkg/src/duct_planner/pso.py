"""PSO refinement of an NSGA-II population, maintaining a Pareto archive.

Particles start at the final NSGA-II individuals; each generation updates
velocities toward personal bests and the archive head, re-evaluates, and
merges all positions into the archive, keeping only rank-0 members.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .evaluator import EvalResult, Scenario, evaluate_population, fitness, make_field
from .moea import GenerationRecord, Individual, nondominated_sort


@dataclass(frozen=True)
class PsoConfig:
    g_max_prime: int = 100      # PSO generations
    c1: float = 1.5             # cognitive learning factor
    c2: float = 1.5             # social learning factor
    w1: float = 0.9             # inertia upper bound
    w2: float = 0.4             # inertia lower bound
    vel_scale: float = 0.02     # initial velocity range as a fraction of the bounds
    iota: float = 1.0           # penalty coefficient (matches the NSGA-II phase)
    vel_smooth: int = 10        # boxcar window (slots) correlating the initial kick

    def __post_init__(self):
        if self.g_max_prime < 0:
            raise ValueError("g_max_prime must be nonnegative")
        if self.w1 < self.w2:
            raise ValueError("need w1 >= w2")


def inertia(rho: int, w1: float, w2: float, g_max_prime: int) -> float:
    """Linearly decaying inertia weight over the PSO generations."""
    if g_max_prime < 1:
        raise ValueError("g_max_prime must be >= 1")
    return w1 - rho * (w1 - w2) / g_max_prime


@dataclass
class Particle:
    position: np.ndarray
    velocity: np.ndarray
    fitness: tuple
    eval: EvalResult
    pbest_position: np.ndarray = None
    pbest_fitness: tuple = None


@dataclass
class ArchiveMember:
    genes: np.ndarray
    fitness: tuple
    eval: EvalResult


class Archive:
    """Mutually non-dominated solution set, sorted by (f1, f2), deduplicated."""

    def __init__(self, members=()):
        self.members: list = []
        if members:
            self.merge(members)

    def merge(self, candidates) -> None:
        pool = self.members + list(candidates)
        ranks = nondominated_sort([m.fitness for m in pool])
        kept = [m for m, r in zip(pool, ranks) if r == 0]
        kept.sort(key=lambda m: (m.fitness[0], m.fitness[1]))
        deduped = []
        for m in kept:
            if not any(np.array_equal(m.genes, d.genes) for d in deduped):
                deduped.append(m)
        self.members = deduped

    def __len__(self):
        return len(self.members)

    def fitness_points(self) -> list:
        return [m.fitness for m in self.members]


def _dominates(a, b) -> bool:
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def refine(population, config: PsoConfig, scenario: Scenario, cgm,
           rng: np.random.Generator, threads: int = 1,
           log: list | None = None) -> Archive:
    """PSO phase: refine an evaluated NSGA-II population into an archive.

    The archive is seeded with the population's rank-0 members.  Returns
    the final archive; appends GenerationRecords to log if given.
    """
    if not population:
        raise ValueError("refine requires a non-empty evaluated population")
    field = make_field(cgm, scenario.radio)
    lo, hi = scenario.phi_bounds
    span = hi - lo
    reference = (2.0 * scenario.n_slots, 2.0 * scenario.n_slots)
    # restrict updates to the active dimension, as in the NSGA-II phase
    a_xy = np.asarray(scenario.a[:2], dtype=np.float64)
    b_xy = np.asarray(scenario.b[:2], dtype=np.float64)
    straight_slots = int(np.ceil(np.linalg.norm(b_xy - a_xy)
                                 / (scenario.v * scenario.delta_t)))
    m_cap = min(scenario.n_slots,
                max(straight_slots,
                    max(ind.eval.effective_slots for ind in population)) + 5)

    ranks = nondominated_sort([ind.fitness for ind in population])
    archive = Archive([ArchiveMember(genes=ind.genes.copy(), fitness=ind.fitness,
                                     eval=ind.eval)
                       for ind, r in zip(population, ranks) if r == 0])

    particles = []
    for ind in population:
        vel = rng.uniform(-config.vel_scale * span, config.vel_scale * span,
                          len(ind.genes))
        if config.vel_smooth > 1:
            # correlate the kick across adjacent slots: white heading noise
            # mostly cancels in position space, a low-frequency kick bends
            # the trajectory coherently for the same steering cost
            win = np.ones(config.vel_smooth) / config.vel_smooth
            vel = np.convolve(vel, win, mode="same")
            peak = np.abs(vel).max()
            if peak > 0:
                vel *= config.vel_scale * span / peak
        particles.append(Particle(position=ind.genes.copy(), velocity=vel,
                                  fitness=ind.fitness, eval=ind.eval,
                                  pbest_position=ind.genes.copy(),
                                  pbest_fitness=ind.fitness))

    for rho in range(1, config.g_max_prime + 1):
        w = inertia(rho, config.w1, config.w2, config.g_max_prime)
        arch_pts = np.asarray(archive.fitness_points())
        scale = arch_pts.max(axis=0) - arch_pts.min(axis=0)
        scale[scale == 0] = 1.0
        for p in particles:
            # guide each particle by the archive member nearest its personal
            # best: a single global guide drags the whole swarm across the
            # front and no particle ever refines its own neighborhood
            near = np.abs((arch_pts - np.asarray(p.pbest_fitness)) / scale).sum(axis=1)
            gbest = archive.members[int(near.argmin())].genes
            r1 = rng.random(m_cap)
            r2 = rng.random(m_cap)
            p.velocity[:m_cap] = (w * p.velocity[:m_cap]
                                  + config.c1 * r1 * (p.pbest_position[:m_cap]
                                                      - p.position[:m_cap])
                                  + config.c2 * r2 * (gbest[:m_cap]
                                                      - p.position[:m_cap]))
            p.position[:m_cap] = np.clip(p.position[:m_cap] + p.velocity[:m_cap],
                                         lo, hi)

        results = evaluate_population([p.position for p in particles], scenario,
                                      field, threads=threads)
        for p, res in zip(particles, results):
            p.eval = res
            p.fitness = fitness(res, scenario, config.iota)
            if _dominates(p.fitness, p.pbest_fitness):
                p.pbest_position = p.position.copy()
                p.pbest_fitness = p.fitness

        archive.merge([ArchiveMember(genes=p.position.copy(), fitness=p.fitness,
                                     eval=p.eval) for p in particles])
        if log is not None:
            from .metrics import hypervolume2d
            pts = archive.fitness_points()
            log.append(GenerationRecord(
                generation=rho,
                best_f1=min(f[0] for f in pts),
                best_f2=min(f[1] for f in pts),
                front_size=len(archive),
                hypervolume=hypervolume2d(pts, reference)))

    return archive
