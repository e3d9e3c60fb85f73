"""Channel gain map storage, synthesis, perturbation and grid lookup.

Maps store large-scale path loss in dB (>= 0), one value per grid cell.
Linear power gain is derived on query as 10^(-loss/10).  The default
radial mode stores a (range, height) table queried with r = sqrt(x^2+y^2);
an optional grid3d mode holds a full (x, y, height) grid for externally
supplied maps.  Grid3d coordinates follow the convention x in
[-n_x*delta_d/2, +n_x*delta_d/2) and y in [0, n_y*delta_d).
"""

import csv
import struct
from dataclasses import dataclass, field

import numpy as np

from .radio import free_space_path_loss_db

MAGIC = b"CGM1"

MODE_RADIAL = "radial"
MODE_GRID3D = "grid3d"


class OutOfExtentError(ValueError):
    """Raised when a queried position lies outside the map extent."""


@dataclass(frozen=True)
class GridSpec:
    delta_d: float              # horizontal cell width (m)
    delta_h: float              # vertical cell height (m)
    n_range: int = 0            # radial mode: horizontal cell count
    n_x: int = 0                # grid3d mode
    n_y: int = 0                # grid3d mode
    n_height: int = 1
    mode: str = MODE_RADIAL

    def __post_init__(self):
        if self.delta_d <= 0 or self.delta_h <= 0:
            raise ValueError("cell sizes must be strictly positive")
        if self.mode == MODE_RADIAL:
            if self.n_range < 1 or self.n_height < 1:
                raise ValueError("radial mode requires n_range >= 1 and n_height >= 1")
        elif self.mode == MODE_GRID3D:
            if self.n_x < 1 or self.n_y < 1 or self.n_height < 1:
                raise ValueError("grid3d mode requires n_x, n_y, n_height >= 1")
        else:
            raise ValueError(f"unknown grid mode: {self.mode!r}")

    @property
    def shape(self) -> tuple:
        if self.mode == MODE_RADIAL:
            return (self.n_range, self.n_height)
        return (self.n_x, self.n_y, self.n_height)

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.shape))


@dataclass(frozen=True)
class DuctModelParams:
    """Parameters of the synthetic duct path-loss model.

    Defaults are calibrated so that in-duct loss at long range sits
    about 10 dB below free space, with visible km-scale oscillation.
    """

    edh: float = 35.0           # duct height (m)
    delta_max: float = 10.07    # long-range duct advantage (dB)
    r_sat: float = 120_000.0    # range at which the advantage saturates (m)
    a_osc: float = 5.0          # oscillation amplitude (dB)
    lambda_osc: float = 8_000.0  # oscillation period (m)
    beta_leak: float = 2.0      # above-duct leakage slope (dB/m)

    def __post_init__(self):
        if min(self.edh, self.delta_max, self.a_osc, self.beta_leak) < 0:
            raise ValueError("duct parameters must be nonnegative")
        if self.r_sat <= 0 or self.lambda_osc <= 0:
            raise ValueError("r_sat and lambda_osc must be strictly positive")


@dataclass(frozen=True)
class ChannelGainMap:
    spec: GridSpec
    loss_db: np.ndarray         # float32, shape spec.shape, finite, >= 0
    f: float                    # carrier frequency (Hz)
    edh: float                  # duct height (m)
    provenance: str = ""

    def __post_init__(self):
        arr = np.asarray(self.loss_db, dtype=np.float32)
        if arr.shape != self.spec.shape:
            raise ValueError(f"loss_db shape {arr.shape} does not match grid {self.spec.shape}")
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise ValueError("loss_db values must be finite and >= 0 dB")
        object.__setattr__(self, "loss_db", arr)

    def gain_at(self, pos) -> float:
        """Linear power gain for the cell containing pos (x, y, z) in m."""
        return float(10.0 ** (-self.loss_db[locate_cell(pos, self.spec)] / 10.0))


def locate_cell(pos, spec: GridSpec) -> tuple:
    """Index of the half-open grid cell containing a 3D position (m)."""
    x, y, z = float(pos[0]), float(pos[1]), float(pos[2])
    hi = int(np.floor(z / spec.delta_h))
    if not 0 <= hi < spec.n_height:
        raise OutOfExtentError(f"height {z} m outside map extent")
    if spec.mode == MODE_RADIAL:
        r = float(np.hypot(x, y))
        ri = int(np.floor(r / spec.delta_d))
        if ri >= spec.n_range:
            raise OutOfExtentError(f"range {r} m outside map extent")
        return (ri, hi)
    xi = int(np.floor((x + spec.n_x * spec.delta_d / 2.0) / spec.delta_d))
    yi = int(np.floor(y / spec.delta_d))
    if not (0 <= xi < spec.n_x and 0 <= yi < spec.n_y):
        raise OutOfExtentError(f"position ({x}, {y}) outside map extent")
    return (xi, yi, hi)


def synthesize_duct_map(params: DuctModelParams, spec: GridSpec, f: float,
                        provenance: str = "synthetic duct model") -> ChannelGainMap:
    """Deterministic parameterized duct path-loss map.

    In-duct loss is free space minus a range-saturating duct advantage and
    a sinusoidal oscillation; above the duct a linear leakage penalty is
    added.  Loss is evaluated at cell centers and clamped at >= 0 dB.
    """
    if f <= 0:
        raise ValueError("carrier frequency must be strictly positive")
    if spec.mode != MODE_RADIAL:
        raise ValueError("the synthetic model generates radial-mode maps")
    r = (np.arange(spec.n_range) + 0.5) * spec.delta_d
    h = (np.arange(spec.n_height) + 0.5) * spec.delta_h
    fspl = np.array([free_space_path_loss_db(ri, f) for ri in r])
    in_duct = (fspl
               - params.delta_max * np.minimum(1.0, r / params.r_sat)
               - params.a_osc * np.sin(2.0 * np.pi * r / params.lambda_osc))
    loss = np.repeat(in_duct[:, None], spec.n_height, axis=1)
    above = h > params.edh
    loss[:, above] += params.beta_leak * (h[above] - params.edh)
    return ChannelGainMap(spec=spec, loss_db=np.maximum(loss, 0.0).astype(np.float32),
                          f=f, edh=params.edh, provenance=provenance)


def perturb(cgm: ChannelGainMap, sigma: float, seed: int) -> ChannelGainMap:
    """New map with i.i.d. N(0, sigma^2) dB added per cell, clamped >= 0."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0:
        return ChannelGainMap(spec=cgm.spec, loss_db=cgm.loss_db.copy(), f=cgm.f,
                              edh=cgm.edh, provenance=cgm.provenance)
    rng = np.random.default_rng(seed)
    noisy = cgm.loss_db.astype(np.float64) + rng.normal(0.0, sigma, cgm.loss_db.shape)
    return ChannelGainMap(spec=cgm.spec, loss_db=np.maximum(noisy, 0.0).astype(np.float32),
                          f=cgm.f, edh=cgm.edh,
                          provenance=f"{cgm.provenance} + noise sigma={sigma} dB")


# ---------------------------------------------------------------------------
# Serialization: CGM1 binary format and CSV import
# ---------------------------------------------------------------------------

def save_cgm(cgm: ChannelGainMap, path) -> None:
    """Write the CGM1 binary format (little-endian, f32 payload)."""
    spec = cgm.spec
    prov = cgm.provenance.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        mode = 0 if spec.mode == MODE_RADIAL else 1
        fh.write(struct.pack("<B", mode))
        fh.write(struct.pack("<dddd", cgm.f, cgm.edh, spec.delta_d, spec.delta_h))
        if spec.mode == MODE_RADIAL:
            fh.write(struct.pack("<II", spec.n_range, spec.n_height))
        else:
            fh.write(struct.pack("<III", spec.n_x, spec.n_y, spec.n_height))
        fh.write(struct.pack("<I", len(prov)))
        fh.write(prov)
        fh.write(cgm.loss_db.astype("<f4").tobytes(order="C"))


def load_cgm(path) -> ChannelGainMap:
    """Read a CGM1 binary file written by save_cgm."""
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ValueError("not a CGM1 file")
        mode = struct.unpack("<B", fh.read(1))[0]
        f, edh, delta_d, delta_h = struct.unpack("<dddd", fh.read(32))
        if mode == 0:
            n_range, n_height = struct.unpack("<II", fh.read(8))
            spec = GridSpec(delta_d=delta_d, delta_h=delta_h, n_range=n_range,
                            n_height=n_height, mode=MODE_RADIAL)
        elif mode == 1:
            n_x, n_y, n_height = struct.unpack("<III", fh.read(12))
            spec = GridSpec(delta_d=delta_d, delta_h=delta_h, n_x=n_x, n_y=n_y,
                            n_height=n_height, mode=MODE_GRID3D)
        else:
            raise ValueError(f"unknown CGM mode byte {mode}")
        (prov_len,) = struct.unpack("<I", fh.read(4))
        provenance = fh.read(prov_len).decode("utf-8")
        payload = fh.read(spec.n_cells * 4)
        loss = np.frombuffer(payload, dtype="<f4").reshape(spec.shape)
    return ChannelGainMap(spec=spec, loss_db=loss.copy(), f=f, edh=edh,
                          provenance=provenance)


def load_csv(path, f: float, edh: float, provenance: str = "csv import") -> ChannelGainMap:
    """Import an external path-loss table.

    Expected columns: (r_m, h_m, loss_db) for a radial map or
    (x_m, y_m, h_m, loss_db) for a full 3D grid.  Coordinates must form a
    complete uniformly spaced grid of cell lower edges.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    if not rows:
        raise ValueError("empty CSV")
    cols = rows[0].keys()
    if "r_m" in cols:
        r = np.array([float(row["r_m"]) for row in rows])
        h = np.array([float(row["h_m"]) for row in rows])
        loss = np.array([float(row["loss_db"]) for row in rows])
        r_vals, h_vals = np.unique(r), np.unique(h)
        delta_d = _uniform_step(r_vals, "r_m")
        delta_h = _uniform_step(h_vals, "h_m")
        spec = GridSpec(delta_d=delta_d, delta_h=delta_h, n_range=len(r_vals),
                        n_height=len(h_vals), mode=MODE_RADIAL)
        grid = np.full(spec.shape, np.nan)
        grid[np.searchsorted(r_vals, r), np.searchsorted(h_vals, h)] = loss
    elif "x_m" in cols:
        x = np.array([float(row["x_m"]) for row in rows])
        y = np.array([float(row["y_m"]) for row in rows])
        h = np.array([float(row["h_m"]) for row in rows])
        loss = np.array([float(row["loss_db"]) for row in rows])
        x_vals, y_vals, h_vals = np.unique(x), np.unique(y), np.unique(h)
        delta_d = _uniform_step(x_vals, "x_m")
        delta_h = _uniform_step(h_vals, "h_m")
        spec = GridSpec(delta_d=delta_d, delta_h=delta_h, n_x=len(x_vals),
                        n_y=len(y_vals), n_height=len(h_vals), mode=MODE_GRID3D)
        grid = np.full(spec.shape, np.nan)
        grid[np.searchsorted(x_vals, x), np.searchsorted(y_vals, y),
             np.searchsorted(h_vals, h)] = loss
    else:
        raise ValueError("CSV must have r_m or x_m,y_m coordinate columns")
    if np.any(np.isnan(grid)):
        raise ValueError("CSV does not cover the full grid")
    return ChannelGainMap(spec=spec, loss_db=grid.astype(np.float32), f=f, edh=edh,
                          provenance=provenance)


def _uniform_step(values: np.ndarray, name: str) -> float:
    if len(values) < 2:
        return 1.0
    steps = np.diff(values)
    if not np.allclose(steps, steps[0]):
        raise ValueError(f"{name} values are not uniformly spaced")
    return float(steps[0])
