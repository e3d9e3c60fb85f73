"""Objective evaluation: fractional transmission/sailing timeslots and fitness.

The evaluator integrates the trajectory at sub-timeslot resolution,
accumulates transmitted bits with the rate sampled at each sub-timeslot's
start position, and produces the fractional slot counts used as the two
minimization objectives.  Infeasibility (data shortfall, non-arrival,
steering violations) is encoded in the result rather than raised, so the
optimizer can penalize it.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import radio as radio_mod
from .cgm import MODE_RADIAL, ChannelGainMap
from .kinematics import integrate_subslots, steering_penalty
from .radio import RadioParams, los_range


@dataclass(frozen=True)
class Scenario:
    a: tuple                    # start (x, y, z) in m
    b: tuple                    # destination (x, y, z) in m
    v: float                    # ship speed (m/s)
    delta_t: float              # timeslot (s)
    delta_small_t: float        # sub-timeslot (s)
    t_max: float                # max sailing time (s)
    d_bits: float               # data volume (bits)
    radio: RadioParams
    waypoints: tuple = ()
    phi_bounds: tuple = (-np.pi, np.pi)
    dphi_max: float = np.pi / 4
    name: str = ""

    def __post_init__(self):
        if not 0 < self.delta_small_t <= self.delta_t:
            raise ValueError("need 0 < delta_small_t <= delta_t")
        m = self.delta_t / self.delta_small_t
        if abs(m - round(m)) > 1e-9:
            raise ValueError("delta_t must divide evenly by delta_small_t")
        if self.d_bits < 0:
            raise ValueError("d_bits must be nonnegative")
        if self.t_max <= 0 or self.v <= 0:
            raise ValueError("t_max and v must be strictly positive")

    @property
    def n_slots(self) -> int:
        """Total timeslot budget M = ceil(T / delta_t)."""
        return int(np.ceil(self.t_max / self.delta_t - 1e-12))

    @property
    def slot_budget(self) -> float:
        """Sailing-slot bound T / delta_t used by the overtime penalty."""
        return self.t_max / self.delta_t


@dataclass(frozen=True)
class EvalResult:
    m1_tilde: float             # fractional transmission timeslots
    m2_tilde: float             # fractional sailing timeslots
    steering_violation: float   # rad
    data_curve: np.ndarray      # cumulative bits per sub-timeslot
    feasible: bool
    arrived: bool = True
    completed: bool = True
    shortfall_bits: float = 0.0
    effective_slots: int = 1    # arrival slot, or closest-approach slot if unarrived


# ---------------------------------------------------------------------------
# Gain fields: total functions position -> linear gain
# ---------------------------------------------------------------------------

class CgmField:
    """CGM-backed gain field; beyond the map extent falls back to free space."""

    def __init__(self, cgm: ChannelGainMap, radio: RadioParams):
        if abs(cgm.f - radio.f) > 1e-6 * radio.f:
            raise ValueError("CGM and radio carrier frequencies differ")
        self.cgm = cgm
        self.radio = radio
        self._gain = 10.0 ** (-cgm.loss_db.astype(np.float64) / 10.0)

    def gains(self, x: np.ndarray, y: np.ndarray, z: float) -> np.ndarray:
        spec = self.cgm.spec
        hi = int(np.floor(z / spec.delta_h))
        if spec.mode == MODE_RADIAL:
            r = np.hypot(x, y)
            ri = np.floor(r / spec.delta_d).astype(np.int64)
            if 0 <= hi < spec.n_height:
                inb = ri < spec.n_range
                col = self._gain[:, hi]
                out = np.empty_like(r)
                out[inb] = col[ri[inb]]
            else:
                inb = np.zeros(len(x), dtype=bool)
                out = np.empty_like(r)
        else:
            xi = np.floor((x + spec.n_x * spec.delta_d / 2.0) / spec.delta_d).astype(np.int64)
            yi = np.floor(y / spec.delta_d).astype(np.int64)
            inb = ((0 <= xi) & (xi < spec.n_x) & (0 <= yi) & (yi < spec.n_y)
                   & (0 <= hi) & (hi < spec.n_height))
            out = np.empty(len(x))
            if inb.any():
                out[inb] = self._gain[xi[inb], yi[inb], hi]
        oob = ~inb
        if oob.any():
            d3 = np.sqrt(x[oob] ** 2 + y[oob] ** 2 + (z - self.radio.z_rx) ** 2)
            out[oob] = _free_space_gains(d3, self.radio.f)
        return out


class LosFreeSpaceField:
    """Baseline without CGM: free-space gain inside the radio horizon, else 0."""

    def __init__(self, radio: RadioParams):
        self.radio = radio
        self.d_los = los_range(radio.z_tx, radio.z_rx)

    def gains(self, x: np.ndarray, y: np.ndarray, z: float) -> np.ndarray:
        d3 = np.sqrt(x ** 2 + y ** 2 + (z - self.radio.z_rx) ** 2)
        out = np.zeros(len(x))
        visible = d3 <= self.d_los
        out[visible] = _free_space_gains(d3[visible], self.radio.f)
        return out


class UniformField:
    """Constant-gain field (testing aid: makes the rate spatially uniform)."""

    def __init__(self, gain: float):
        self.gain = gain

    def gains(self, x: np.ndarray, y: np.ndarray, z: float) -> np.ndarray:
        return np.full(len(x), self.gain)


def _free_space_gains(d: np.ndarray, f: float) -> np.ndarray:
    d = np.maximum(d, 1e-9)
    return (radio_mod.SPEED_OF_LIGHT / (4.0 * np.pi * d * f)) ** 2


def make_field(cgm_or_field, radio: RadioParams):
    """Wrap a raw ChannelGainMap into a total gain field; pass fields through."""
    if isinstance(cgm_or_field, ChannelGainMap):
        return CgmField(cgm_or_field, radio)
    return cgm_or_field


# ---------------------------------------------------------------------------
# Evaluation and fitness
# ---------------------------------------------------------------------------

def evaluate(phi, scenario: Scenario, field) -> EvalResult:
    """Objectives of a heading vector against a gain field.

    field may be a ChannelGainMap or any object with a vectorized
    gains(x, y, z) method.
    """
    field = make_field(field, scenario.radio)
    phi = np.asarray(phi, dtype=np.float64)
    a = np.asarray(scenario.a, dtype=np.float64)
    b = np.asarray(scenario.b, dtype=np.float64)
    path = integrate_subslots(phi, a[:2], b[:2], scenario.v,
                              scenario.delta_t, scenario.delta_small_t)
    m2 = path.m2_tilde
    arrived = path.arrival_slot is not None
    if not arrived:
        # grade non-arrival by the closest slot-start approach so that paths
        # passing near the destination outrank ones merely ending nearer
        m2 = scenario.n_slots + path.miss_distance / (scenario.v * scenario.delta_t)

    if len(path.xy):
        gains = field.gains(path.xy[:, 0], path.xy[:, 1], a[2])
        rates = scenario.radio.bandwidth * np.log2(1.0 + scenario.radio.snr_scale * gains)
        bits = rates * path.durations
        cum = np.cumsum(bits)
    else:
        rates = np.zeros(0)
        cum = np.zeros(0)

    d = scenario.d_bits
    completed = True
    shortfall = 0.0
    if d <= 0:
        m1 = 0.0
    else:
        k = int(np.searchsorted(cum, d, side="left")) if len(cum) else 0
        if len(cum) and k < len(cum):
            before_bits = cum[k - 1] if k else 0.0
            before_time = float(np.sum(path.durations[:k]))
            m1 = (before_time + (d - before_bits) / rates[k]) / scenario.delta_t
        else:
            completed = False
            sent = float(cum[-1]) if len(cum) else 0.0
            shortfall = d - sent
            rmax = float(rates.max()) if len(rates) else 0.0
            if rmax > 0:
                m1 = m2 + shortfall / (rmax * scenario.delta_t)
            else:
                # silent trajectory: push beyond every partially transmitting
                # one, graded by how close it came to the receiver so the
                # search keeps a gradient toward coverage
                closest = float(np.min(np.hypot(path.xy[:, 0], path.xy[:, 1]))) \
                    if len(path.xy) else float(np.hypot(a[0], a[1]))
                m1 = m2 + scenario.n_slots + closest / (scenario.v * scenario.delta_t)

    # the operative horizon: slots actually sailed toward the destination —
    # past it an unarrived trajectory is dead wandering that the steering
    # penalty and variation operators should not spend pressure on
    effective = path.arrival_slot if arrived else path.miss_slot
    horizon = min(effective, len(phi) - 1)
    violation = steering_penalty(phi, scenario.dphi_max, horizon)
    feasible = completed and arrived and violation == 0.0
    return EvalResult(m1_tilde=float(m1), m2_tilde=float(m2),
                      steering_violation=violation, data_curve=cum,
                      feasible=feasible, arrived=arrived, completed=completed,
                      shortfall_bits=shortfall, effective_slots=int(effective))


def fitness(res: EvalResult, scenario: Scenario, iota: float) -> tuple:
    """Penalized objective pair (f1, f2)."""
    if iota <= 0:
        raise ValueError("iota must be strictly positive")
    pen = iota * res.steering_violation
    f1 = res.m1_tilde + max(res.m1_tilde - res.m2_tilde, 0.0) + pen
    f2 = res.m2_tilde + max(res.m2_tilde - scenario.slot_budget, 0.0) + pen
    return (f1, f2)


def evaluate_population(genes_list, scenario: Scenario, field, threads: int = 1):
    """Evaluate many heading vectors; order-preserving and deterministic.

    evaluate is pure, so the result is independent of the thread count.
    """
    field = make_field(field, scenario.radio)
    if threads <= 1 or len(genes_list) < 2:
        return [evaluate(g, scenario, field) for g in genes_list]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda g: evaluate(g, scenario, field), genes_list))
