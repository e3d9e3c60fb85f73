"""NSGA-II machinery with penalized fitness and dynamic dimension truncation.

The generational loop evaluates a population of heading vectors, selects a
parent pool by (rank, crowding), produces SBX crossover offspring and
smoothed polynomial mutants, and keeps the elitist top slice of the merged
population.  After each generation the active gene dimension is capped
just above the best front's sailing time, leaving trailing genes inert.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .evaluator import EvalResult, Scenario, evaluate_population, fitness, make_field
from .kinematics import smooth


@dataclass
class Individual:
    genes: np.ndarray
    fitness: tuple | None = None
    eval: EvalResult | None = None
    rank: int | None = None
    crowding: float = 0.0


@dataclass(frozen=True)
class MoeaConfig:
    n_p: int = 100              # population size
    g_max: int = 200            # generations
    pd: int = 4                 # selection pool size
    pc: int = 300               # crossover offspring per generation
    pm: int = 500               # mutants per generation
    eta_c: float = 20.0         # SBX distribution index
    eta_m: float = 50.0         # mutation distribution index
    iota: float = 1.0           # penalty coefficient
    truncation_margin: int = 5  # slots kept beyond the best front's sailing time

    def __post_init__(self):
        if self.n_p < 2:
            raise ValueError("n_p must be >= 2")
        if self.pd > self.n_p:
            raise ValueError("pd must not exceed n_p")
        if self.pc < 0 or self.pm < 0 or self.g_max < 0:
            raise ValueError("pc, pm and g_max must be nonnegative")
        if self.eta_c <= 0 or self.eta_m <= 0:
            raise ValueError("distribution indices must be strictly positive")

    @classmethod
    def sized(cls, n_p: int, g_max: int, **kw) -> "MoeaConfig":
        """Config with pool/offspring counts scaled to the population size."""
        return cls(n_p=n_p, g_max=g_max, pd=max(2, min(4, n_p // 2)),
                   pc=3 * n_p, pm=5 * n_p, **kw)

    @property
    def evals_per_generation(self) -> int:
        return self.pc + self.pm


# ---------------------------------------------------------------------------
# Sorting and diversity
# ---------------------------------------------------------------------------

def nondominated_sort(points) -> list:
    """Pareto rank (0 = non-dominated) of each 2-objective point."""
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    if n == 0:
        return []
    le = (pts[:, None, :] <= pts[None, :, :]).all(axis=2)
    lt = (pts[:, None, :] < pts[None, :, :]).any(axis=2)
    dom = le & lt  # dom[i, j]: i dominates j
    counts = dom.sum(axis=0)
    ranks = np.full(n, -1, dtype=np.int64)
    current = 0
    remaining = counts.copy()
    while (ranks < 0).any():
        front = (remaining == 0) & (ranks < 0)
        ranks[front] = current
        remaining = remaining - dom[front].sum(axis=0)
        current += 1
    return ranks.tolist()


def crowding(front) -> list:
    """Crowding distance per member of one front (2 objectives).

    Boundary members per objective get +inf; interior members accumulate
    the neighbor gap normalized by the front's full objective range.  A
    degenerate objective contributes 0.
    """
    pts = np.asarray(front, dtype=np.float64)
    n = len(pts)
    if n == 0:
        raise ValueError("front must be non-empty")
    dist = np.zeros(n)
    for j in range(pts.shape[1]):
        order = np.argsort(pts[:, j], kind="stable")
        vals = pts[order, j]
        span = vals[-1] - vals[0]
        dist[order[0]] = np.inf
        dist[order[-1]] = np.inf
        if span > 0 and n > 2:
            gaps = (vals[2:] - vals[:-2]) / span
            interior = order[1:-1]
            finite = np.isfinite(dist[interior])
            dist[interior[finite]] += gaps[finite]
    return dist.tolist()


# ---------------------------------------------------------------------------
# Variation operators
# ---------------------------------------------------------------------------

def sbx(parent_a, parent_b, eta_c: float, rng: np.random.Generator,
        bounds=(-np.pi, np.pi)) -> tuple:
    """Simulated binary crossover; children clamped to the heading bounds."""
    a = np.asarray(parent_a, dtype=np.float64)
    b = np.asarray(parent_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("parents must have equal gene lengths")
    nu = rng.random(a.shape)
    beta = np.where(nu <= 0.5,
                    (2.0 * nu) ** (1.0 / (eta_c + 1.0)),
                    (1.0 / (2.0 * (1.0 - nu))) ** (1.0 / (eta_c + 1.0)))
    child_a = 0.5 * ((1.0 + beta) * a + (1.0 - beta) * b)
    child_b = 0.5 * ((1.0 - beta) * a + (1.0 + beta) * b)
    lo, hi = bounds
    return np.clip(child_a, lo, hi), np.clip(child_b, lo, hi)


def mutate(parent, eta_m: float, rng: np.random.Generator, m2_ceil: int,
           bounds=(-np.pi, np.pi)) -> np.ndarray:
    """Polynomial mutation with sailing-time-dependent per-gene activation.

    Each gene mutates with probability min(1, eta_m / m2_ceil), so shorter
    sailing times raise the mutation pressure.
    """
    if m2_ceil < 1:
        raise ValueError("m2_ceil must be >= 1")
    gamma = np.asarray(parent, dtype=np.float64).copy()
    lo, hi = bounds
    span = hi - lo
    chi = rng.random(gamma.shape)
    active = chi <= eta_m / m2_ceil
    if active.any():
        g = gamma[active]
        sigma = rng.random(g.shape)
        mu_a = (g - lo) / span
        mu_b = (hi - g) / span
        low_branch = (2.0 * sigma + (1.0 - 2.0 * sigma)
                      * (1.0 - mu_a) ** (eta_m + 1.0)) ** (1.0 / (eta_m + 1.0)) - 1.0
        high_branch = 1.0 - (2.0 * (1.0 - sigma) + (2.0 * sigma - 1.0)
                             * (1.0 - mu_b) ** (eta_m + 1.0)) ** (1.0 / (eta_m + 1.0))
        mu = np.where(sigma <= 0.5, low_branch, high_branch)
        gamma[active] = np.clip(g + mu * span, lo, hi)
    return gamma


# ---------------------------------------------------------------------------
# Population management
# ---------------------------------------------------------------------------

def init_population(config: MoeaConfig, scenario: Scenario,
                    rng: np.random.Generator) -> list:
    """Half uniform-random individuals, half steering-feasible random walks."""
    lo, hi = scenario.phi_bounds
    n_genes = scenario.n_slots
    pop = []
    n_uniform = config.n_p // 2
    for _ in range(n_uniform):
        pop.append(Individual(genes=rng.uniform(lo, hi, n_genes)))
    for _ in range(config.n_p - n_uniform):
        genes = np.empty(n_genes)
        genes[0] = rng.uniform(lo, hi)
        steps = rng.uniform(-scenario.dphi_max, scenario.dphi_max, n_genes - 1)
        genes[1:] = genes[0] + np.cumsum(steps)
        np.clip(genes, lo, hi, out=genes)
        # clamping can widen a step beyond the limit; re-walk from the clamp
        for i in range(1, n_genes):
            if abs(genes[i] - genes[i - 1]) > scenario.dphi_max:
                genes[i] = min(max(genes[i - 1] + steps[i - 1], lo), hi)
        pop.append(Individual(genes=genes))
    return pop


def assign_ranks(pop: list) -> None:
    """Attach rank and crowding distance to every (evaluated) individual."""
    points = [ind.fitness for ind in pop]
    ranks = nondominated_sort(points)
    for ind, r in zip(pop, ranks):
        ind.rank = r
    for r in set(ranks):
        members = [i for i, ind in enumerate(pop) if ind.rank == r]
        dists = crowding([points[i] for i in members])
        for i, d in zip(members, dists):
            pop[i].crowding = d


def _sorted_by_preference(pop: list) -> list:
    return sorted(pop, key=lambda ind: (ind.rank, -ind.crowding))


def _evaluate_missing(pop, scenario, field, config, threads):
    missing = [ind for ind in pop if ind.eval is None]
    results = evaluate_population([ind.genes for ind in missing], scenario, field,
                                  threads=threads)
    for ind, res in zip(missing, results):
        ind.eval = res
        ind.fitness = fitness(res, scenario, config.iota)


@dataclass
class GenerationRecord:
    generation: int
    best_f1: float
    best_f2: float
    front_size: int
    hypervolume: float


class EliteFront:
    """Cumulative non-dominated set of fitness points seen during a run.

    Used for monitoring: its hypervolume is nondecreasing by construction,
    which is the monotonicity contract the generation log reports.
    """

    def __init__(self):
        self.points: list = []

    def update(self, points) -> None:
        merged = self.points + [tuple(p) for p in points]
        ranks = nondominated_sort(merged)
        self.points = sorted({p for p, r in zip(merged, ranks) if r == 0})

    def hypervolume(self, reference) -> float:
        from .metrics import hypervolume2d
        return hypervolume2d(self.points, reference)


def evolve(config: MoeaConfig, scenario: Scenario, cgm, rng: np.random.Generator,
           threads: int = 1, log: list | None = None) -> list:
    """Run the NSGA-II phase; returns the final evaluated population.

    cgm may be a ChannelGainMap or any gain field.  If log is given, one
    GenerationRecord per generation is appended (hypervolume of the
    cumulative elite front against a fixed reference point).
    """
    field = make_field(cgm, scenario.radio)
    lo, hi = scenario.phi_bounds
    n_genes = scenario.n_slots
    reference = (2.0 * n_genes, 2.0 * n_genes)
    # the active dimension never shrinks below the straight-line sailing time:
    # a shorter horizon could not reach the destination at all
    a_xy = np.asarray(scenario.a[:2], dtype=np.float64)
    b_xy = np.asarray(scenario.b[:2], dtype=np.float64)
    straight_slots = int(np.ceil(np.linalg.norm(b_xy - a_xy)
                                 / (scenario.v * scenario.delta_t)))

    pop = init_population(config, scenario, rng)
    _evaluate_missing(pop, scenario, field, config, threads)
    assign_ranks(pop)
    elite = EliteFront()
    elite.update([ind.fitness for ind in pop if ind.rank == 0])
    m_cap = n_genes
    if log is not None:
        log.append(_record(0, pop, elite, reference))

    for gen in range(1, config.g_max + 1):
        ordered = _sorted_by_preference(pop)
        pool = ordered[:config.pd]

        offspring = []
        while len(offspring) < config.pc:
            i, j = rng.choice(len(pool), size=2, replace=False)
            ca = pool[i].genes.copy()
            cb = pool[j].genes.copy()
            ca[:m_cap], cb[:m_cap] = sbx(pool[i].genes[:m_cap], pool[j].genes[:m_cap],
                                         config.eta_c, rng, bounds=(lo, hi))
            offspring.append(Individual(genes=ca))
            if len(offspring) < config.pc:
                offspring.append(Individual(genes=cb))

        for k in range(config.pm):
            parent = pool[k % len(pool)]
            genes = parent.genes.copy()
            genes[:m_cap] = smooth(genes[:m_cap], scenario.dphi_max, bounds=(lo, hi))
            m2_ceil = max(1, parent.eval.effective_slots)
            genes[:m_cap] = mutate(genes[:m_cap], config.eta_m, rng, m2_ceil,
                                   bounds=(lo, hi))
            offspring.append(Individual(genes=genes))

        _evaluate_missing(offspring, scenario, field, config, threads)
        merged = pop + offspring
        assign_ranks(merged)
        pop = _sorted_by_preference(merged)[:config.n_p]
        assign_ranks(pop)

        front_eff = [ind.eval.effective_slots for ind in pop if ind.rank == 0]
        m_cap = min(n_genes, max(straight_slots, max(front_eff))
                    + config.truncation_margin)
        elite.update([ind.fitness for ind in pop if ind.rank == 0])
        if log is not None:
            log.append(_record(gen, pop, elite, reference))

    return pop


def _record(gen, pop, elite, reference) -> GenerationRecord:
    f1s = [ind.fitness[0] for ind in pop]
    f2s = [ind.fitness[1] for ind in pop]
    front = sum(1 for ind in pop if ind.rank == 0)
    return GenerationRecord(generation=gen, best_f1=min(f1s), best_f2=min(f2s),
                            front_size=front, hypervolume=elite.hypervolume(reference))
