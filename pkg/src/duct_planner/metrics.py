"""Pareto-front quality indicators: 2D hypervolume and line distribution."""

import numpy as np


def hypervolume2d(front, reference) -> float:
    """Exact dominated area of a 2-objective front against a reference point.

    Dominated input points are filtered; points not strictly better than
    the reference in both objectives contribute 0.
    """
    r1, r2 = float(reference[0]), float(reference[1])
    pts = [(float(f1), float(f2)) for f1, f2 in front if f1 < r1 and f2 < r2]
    if not pts:
        return 0.0
    pts.sort()
    stair = []
    best_f2 = np.inf
    for f1, f2 in pts:
        if f2 < best_f2:
            stair.append((f1, f2))
            best_f2 = f2
    area = 0.0
    for k, (f1, f2) in enumerate(stair):
        next_f1 = stair[k + 1][0] if k + 1 < len(stair) else r1
        area += (next_f1 - f1) * (r2 - f2)
    return area


def normalized_hypervolume(front, reference, ideal=None) -> float:
    """Hypervolume scaled by the reference-to-ideal box area.

    ideal defaults to the per-objective minima of the front itself; pass
    shared minima when comparing solution sets.
    """
    front = list(front)
    if not front:
        return 0.0
    if ideal is None:
        ideal = (min(f[0] for f in front), min(f[1] for f in front))
    box = (reference[0] - ideal[0]) * (reference[1] - ideal[1])
    if box <= 0:
        raise ValueError("reference must be strictly worse than ideal per objective")
    return hypervolume2d(front, reference) / box


def line_distribution(front, n_intervals: int | None = None) -> float:
    """Mean distance from equal-interval midpoints to the nearest front value.

    Per objective the front's values are min-max normalized to [0, 1]; a
    degenerate objective (all values equal) normalizes to 0 everywhere.
    Lower is better (more uniform coverage).  n_intervals defaults to the
    front size.
    """
    pts = np.asarray(list(front), dtype=np.float64)
    if pts.ndim != 2 or len(pts) < 1:
        raise ValueError("front must contain at least one 2-objective point")
    if n_intervals is None:
        n_intervals = len(pts)
    mids = (np.arange(n_intervals) + 0.5) / n_intervals
    total = 0.0
    for j in range(pts.shape[1]):
        vals = pts[:, j]
        span = vals.max() - vals.min()
        norm = (vals - vals.min()) / span if span > 0 else np.zeros_like(vals)
        total += float(np.mean(np.min(np.abs(mids[:, None] - norm[None, :]), axis=1)))
    return total / pts.shape[1]


def comparison_reference(*fronts, margin: float = 1.1) -> tuple:
    """Shared reference point: componentwise max over the fronts, scaled."""
    all_pts = [p for front in fronts for p in front]
    if not all_pts:
        raise ValueError("at least one non-empty front required")
    return (margin * max(p[0] for p in all_pts), margin * max(p[1] for p in all_pts))


def comparison_ideal(*fronts) -> tuple:
    """Shared ideal point: componentwise min over the fronts."""
    all_pts = [p for front in fronts for p in front]
    if not all_pts:
        raise ValueError("at least one non-empty front required")
    return (min(p[0] for p in all_pts), min(p[1] for p in all_pts))
