"""Heading-vector kinematics: trajectory integration, steering checks, smoothing.

A decision vector is a sequence of heading angles (rad, measured from the
x-axis), one per timeslot.  The ship moves at constant speed; within a
timeslot the heading is constant and the path is sampled at sub-timeslot
resolution.  Arrival uses a capture rule: at the start of a timeslot, if
the destination is within one timeslot of travel, the ship heads straight
to it and the fractional remainder feeds the fractional sailing-slot count.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SubslotPath:
    """Internal sub-timeslot sampling of a trajectory (hot-loop format).

    xy[k] is the ship position at the start of the k-th sub-timeslot while
    sailing; durations[k] is the time spent there (delta_small_t except for
    a possibly shorter final arrival step).
    """

    xy: np.ndarray            # (K, 2) sub-timeslot start positions
    durations: np.ndarray     # (K,) seconds
    arrival_slot: int | None  # 1-based timeslot of arrival, or None
    arrival_residual: float   # m; distance to destination at start of that slot
    m2_tilde: float           # fractional sailing timeslots
    miss_distance: float      # m; closest slot-start approach to the destination
    miss_slot: int            # 1-based timeslot of that closest approach


@dataclass(frozen=True)
class Trajectory:
    positions: np.ndarray     # (K+1, 3) points at sub-timeslot resolution, m
    arrival_slot: int | None
    arrival_residual: float


def integrate_subslots(phi: np.ndarray, a_xy: np.ndarray, b_xy: np.ndarray,
                       v: float, delta_t: float, delta_small_t: float) -> SubslotPath:
    """Vectorized sub-timeslot integration of a heading vector."""
    m = delta_t / delta_small_t
    if abs(m - round(m)) > 1e-9:
        raise ValueError("delta_t must be an integer multiple of delta_small_t")
    m = int(round(m))
    phi = np.asarray(phi, dtype=np.float64)
    n_slots = len(phi)
    step = v * delta_t

    dirs = np.column_stack([np.cos(phi), np.sin(phi)])
    starts = np.empty((n_slots + 1, 2))
    starts[0] = a_xy
    np.cumsum(step * dirs, axis=0, out=starts[1:])
    starts[1:] += a_xy
    dist = np.linalg.norm(starts - b_xy, axis=1)

    hits = np.flatnonzero(dist[:n_slots] <= step)
    if hits.size:
        i_arr = int(hits[0])
        residual = float(dist[i_arr])
        arrival_slot = i_arr + 1
        m2 = i_arr + residual / step
    else:
        i_arr = n_slots
        residual = float(dist[n_slots])
        arrival_slot = None
        m2 = n_slots + residual / step
    miss = float(dist.min())
    miss_slot = max(1, int(dist.argmin()))

    sub = v * delta_small_t
    offs = np.arange(m) * sub
    full_xy = (np.repeat(starts[:i_arr], m, axis=0)
               + np.tile(offs, i_arr)[:, None] * np.repeat(dirs[:i_arr], m, axis=0))
    full_dur = np.full(i_arr * m, delta_small_t)

    if arrival_slot is not None and residual > 0:
        unit = (b_xy - starts[i_arr]) / residual
        n_arr = int(np.ceil(residual / sub - 1e-12))
        leg_xy = starts[i_arr] + (np.arange(n_arr) * sub)[:, None] * unit
        leg_dur = np.full(n_arr, delta_small_t)
        leg_dur[-1] = residual / v - (n_arr - 1) * delta_small_t
        xy = np.vstack([full_xy, leg_xy]) if i_arr else leg_xy
        dur = np.concatenate([full_dur, leg_dur])
    else:
        xy, dur = full_xy, full_dur

    return SubslotPath(xy=xy, durations=dur, arrival_slot=arrival_slot,
                       arrival_residual=residual, m2_tilde=m2, miss_distance=miss,
                       miss_slot=miss_slot)


def integrate_trajectory(phi, scenario) -> Trajectory:
    """Sub-timeslot trajectory of a heading vector under a scenario."""
    a = np.asarray(scenario.a, dtype=np.float64)
    b = np.asarray(scenario.b, dtype=np.float64)
    path = integrate_subslots(np.asarray(phi, dtype=np.float64), a[:2], b[:2],
                              scenario.v, scenario.delta_t, scenario.delta_small_t)
    end_xy = b[:2] if path.arrival_slot is not None else (
        path.xy[-1] if len(path.xy) else a[:2])
    pts_xy = np.vstack([path.xy, end_xy]) if len(path.xy) else end_xy[None, :]
    positions = np.column_stack([pts_xy, np.full(len(pts_xy), a[2])])
    return Trajectory(positions=positions, arrival_slot=path.arrival_slot,
                      arrival_residual=path.arrival_residual)


def steering_penalty(phi, dphi_max: float, horizon: int | None = None) -> float:
    """Sum of steering-limit violations (rad) over adjacent heading pairs."""
    phi = np.asarray(phi, dtype=np.float64)
    if horizon is None:
        horizon = len(phi) - 1
    if horizon > len(phi) - 1:
        raise ValueError("horizon exceeds heading vector length")
    if horizon <= 0:
        return 0.0
    diffs = np.abs(np.diff(phi[:horizon + 1]))
    return float(np.sum(np.maximum(diffs - dphi_max, 0.0)))


def smooth(phi, dphi_max: float, bounds=(-np.pi, np.pi)) -> np.ndarray:
    """One left-to-right pass of interior-point steering smoothing.

    Wherever the step into entry i violates the limit, entry i is replaced
    by the average of its neighbors (clamped to bounds).  Endpoints are
    untouched and the pass is not iterated to a fixed point.
    """
    out = np.array(phi, dtype=np.float64)
    if len(out) < 3:
        return out
    lo, hi = bounds
    for i in range(1, len(out) - 1):
        if abs(out[i] - out[i - 1]) > dphi_max:
            out[i] = min(max((out[i - 1] + out[i + 1]) / 2.0, lo), hi)
    return out
