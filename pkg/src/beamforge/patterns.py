"""Beam-pattern representation, region segmentation and synthetic targets.

Patterns are stored on a fixed zenith/azimuth grid as peak-normalized dB
magnitudes: the maximum entry is exactly 0 dB and everything is clamped at
``DB_FLOOR``.  Region segmentation partitions the grid by target level into
main lobe (>= -10 dB), side lobe (< -20 dB) and the moderate band between.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from functools import cached_property, lru_cache

import numpy as np

from .errors import GridMismatchError, InvalidTargetSpecError

DB_FLOOR = -60.0
MAIN_LOBE_DB = -10.0
SIDE_LOBE_DB = -20.0

# Transition edge of synthetic targets: linear in dB, 0 to -10 over 3 cells.
TAPER_CELLS = 3


@dataclass(frozen=True)
class AngleGrid:
    """Sampled far-field directions, in degrees.

    ``zeniths_deg`` indexes rows (i), ``azimuths_deg`` columns (j).  Both
    axes must be strictly increasing.
    """

    zeniths_deg: tuple[float, ...]
    azimuths_deg: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "zeniths_deg", tuple(float(v) for v in self.zeniths_deg))
        object.__setattr__(self, "azimuths_deg", tuple(float(v) for v in self.azimuths_deg))
        for name, vals in (("zenith", self.zeniths_deg), ("azimuth", self.azimuths_deg)):
            if len(vals) == 0:
                raise ValueError(f"{name} axis is empty")
            arr = np.asarray(vals)
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} axis has non-finite entries")
            if np.any(np.diff(arr) <= 0):
                raise ValueError(f"{name} axis must be strictly increasing")

    @property
    def h(self) -> int:
        return len(self.zeniths_deg)

    @property
    def w(self) -> int:
        return len(self.azimuths_deg)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.h, self.w)

    @cached_property
    def zeniths_rad(self) -> np.ndarray:
        arr = np.deg2rad(np.asarray(self.zeniths_deg))
        arr.flags.writeable = False
        return arr

    @cached_property
    def azimuths_rad(self) -> np.ndarray:
        arr = np.deg2rad(np.asarray(self.azimuths_deg))
        arr.flags.writeable = False
        return arr

    def nearest_index(self, zenith_deg: float, azimuth_deg: float) -> tuple[int, int]:
        """Grid indices of the sample closest to the given direction."""
        i = int(np.argmin(np.abs(np.asarray(self.zeniths_deg) - zenith_deg)))
        j = int(np.argmin(np.abs(np.asarray(self.azimuths_deg) - azimuth_deg)))
        return i, j

    @classmethod
    def from_steps(
        cls,
        zenith: tuple[float, float, float] = (1.0, 180.0, 1.0),
        azimuth: tuple[float, float, float] = (-89.0, 90.0, 1.0),
    ) -> "AngleGrid":
        """Build a grid from (start, stop, step) per axis, stop inclusive."""

        def axis(start, stop, step):
            n = int(round((stop - start) / step)) + 1
            return tuple(start + step * k for k in range(n))

        return cls(axis(*zenith), axis(*azimuth))


@lru_cache(maxsize=1)
def default_grid() -> AngleGrid:
    """The standard 180 x 180 grid: zenith 1..180, azimuth -89..90, 1 degree."""
    return AngleGrid.from_steps()


@dataclass(frozen=True, eq=False)
class BeamPattern:
    """Peak-normalized dB beam pattern on an angle grid."""

    values: np.ndarray
    grid: AngleGrid

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != self.grid.shape:
            raise GridMismatchError(
                f"pattern shape {vals.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("pattern has non-finite entries")
        if vals.max() != 0.0:
            raise ValueError("pattern peak must be exactly 0 dB")
        if vals.min() < DB_FLOOR:
            raise ValueError(f"pattern entries must not fall below {DB_FLOOR} dB")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_values(cls, values: np.ndarray, grid: AngleGrid) -> "BeamPattern":
        """Renormalize raw dB values to peak 0 and clamp at the floor."""
        vals = np.asarray(values, dtype=np.float64)
        if not np.all(np.isfinite(vals)):
            raise ValueError("pattern has non-finite entries")
        vals = np.maximum(vals - vals.max(), DB_FLOOR)
        return cls(vals, grid)

    def peak_index(self) -> tuple[int, int]:
        """(zenith, azimuth) indices of the 0 dB entry (first on ties)."""
        i, j = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        return int(i), int(j)


@dataclass(frozen=True, eq=False)
class RegionMask:
    """Partition of a grid into main-lobe, moderate and side-lobe cells."""

    main_lobe: np.ndarray
    moderate: np.ndarray
    side_lobe: np.ndarray

    def __post_init__(self):
        masks = []
        for name in ("main_lobe", "moderate", "side_lobe"):
            m = np.asarray(getattr(self, name), dtype=bool)
            m = m.copy()
            m.flags.writeable = False
            object.__setattr__(self, name, m)
            masks.append(m)
        if not (masks[0].shape == masks[1].shape == masks[2].shape):
            raise GridMismatchError("region masks have mismatched shapes")
        total = masks[0].astype(int) + masks[1].astype(int) + masks[2].astype(int)
        if np.any(total != 1):
            raise ValueError("region masks must partition the grid")

    @property
    def shape(self) -> tuple[int, int]:
        return self.main_lobe.shape

    @property
    def n_main(self) -> int:
        return int(self.main_lobe.sum())

    @property
    def n_moderate(self) -> int:
        return int(self.moderate.sum())

    @property
    def n_side(self) -> int:
        return int(self.side_lobe.sum())


def segment_regions(target: BeamPattern) -> RegionMask:
    """Split the grid by target level into the three loss regions.

    Main lobe: >= -10 dB.  Side lobe: < -20 dB.  Moderate: in between.
    """
    vals = target.values
    main = vals >= MAIN_LOBE_DB
    side = vals < SIDE_LOBE_DB
    moderate = ~main & ~side
    return RegionMask(main, moderate, side)


_SHAPE_KINDS = ("pencil", "triangular", "flattop")
_ALL_KINDS = _SHAPE_KINDS + ("from-beamformer", "from-file")


@dataclass(frozen=True)
class TargetSpec:
    """Parameters of a synthetic target beam pattern.

    ``base_deg`` is the azimuth extent (triangle base, rectangle width) and
    ``height_deg`` the zenith extent; both are ignored for pencil targets.
    """

    kind: str
    center_zenith_deg: float = 90.0
    center_azimuth_deg: float = 0.0
    base_deg: float = 0.0
    height_deg: float = 0.0
    sidelobe_db: float = -25.0

    def __post_init__(self):
        if self.kind not in _ALL_KINDS:
            raise InvalidTargetSpecError(f"unknown target kind {self.kind!r}")
        if self.sidelobe_db >= MAIN_LOBE_DB:
            raise InvalidTargetSpecError("side-lobe level must be below -10 dB")
        if self.kind in ("triangular", "flattop"):
            if self.base_deg <= 0 or self.height_deg <= 0:
                raise InvalidTargetSpecError(f"{self.kind} target needs positive extents")

    def to_json_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json_dict(cls, data: dict) -> "TargetSpec":
        return cls(**data)


def _dilate_chebyshev(mask: np.ndarray) -> np.ndarray:
    """One Chebyshev-ring dilation (8-neighborhood)."""
    h, w = mask.shape
    padded = np.zeros((h + 2, w + 2), dtype=bool)
    padded[1:-1, 1:-1] = mask
    out = np.zeros_like(mask)
    for di in (0, 1, 2):
        for dj in (0, 1, 2):
            out |= padded[di : di + h, dj : dj + w]
    return out


def _interior_mask(spec: TargetSpec, grid: AngleGrid) -> np.ndarray:
    ze = np.asarray(grid.zeniths_deg)[:, None]
    az = np.asarray(grid.azimuths_deg)[None, :]
    cz, ca = spec.center_zenith_deg, spec.center_azimuth_deg
    if spec.kind == "pencil":
        i, j = grid.nearest_index(cz, ca)
        mask = np.zeros(grid.shape, dtype=bool)
        mask[i, j] = True
        return mask
    if spec.kind == "triangular":
        # Isosceles triangle: base parallel to azimuth at low zenith, apex
        # toward increasing zenith, bounding box centered on the spec center.
        z0 = cz - spec.height_deg / 2.0
        frac = (ze - z0) / spec.height_deg
        half_width = (spec.base_deg / 2.0) * (1.0 - frac)
        return (frac >= 0.0) & (frac <= 1.0) & (np.abs(az - ca) <= half_width)
    # flattop
    return (np.abs(az - ca) <= spec.base_deg / 2.0) & (
        np.abs(ze - cz) <= spec.height_deg / 2.0
    )


def _check_geometry(spec: TargetSpec, grid: AngleGrid) -> None:
    ze_lo, ze_hi = grid.zeniths_deg[0], grid.zeniths_deg[-1]
    az_lo, az_hi = grid.azimuths_deg[0], grid.azimuths_deg[-1]
    if spec.kind == "pencil":
        dz = daz = 0.0
    else:
        dz, daz = spec.height_deg / 2.0, spec.base_deg / 2.0
    ok = (
        spec.center_zenith_deg - dz >= ze_lo
        and spec.center_zenith_deg + dz <= ze_hi
        and spec.center_azimuth_deg - daz >= az_lo
        and spec.center_azimuth_deg + daz <= az_hi
    )
    if not ok:
        raise InvalidTargetSpecError("target geometry falls outside the angle grid")


def make_target(spec: TargetSpec, grid: AngleGrid) -> BeamPattern:
    """Render a synthetic target pattern on the grid.

    The main lobe is flat at 0 dB.  Triangular and flat-top shapes get a
    linear-in-dB edge taper from 0 to -10 dB over ``TAPER_CELLS`` cells;
    everything beyond sits at the configured side-lobe level.
    """
    if spec.kind not in _SHAPE_KINDS:
        raise InvalidTargetSpecError(f"cannot synthesize a {spec.kind!r} target")
    _check_geometry(spec, grid)
    interior = _interior_mask(spec, grid)
    if not interior.any():
        raise InvalidTargetSpecError("main lobe covers no grid cell")

    values = np.full(grid.shape, max(spec.sidelobe_db, DB_FLOOR))
    if spec.kind != "pencil":
        ring = interior
        for step in range(1, TAPER_CELLS + 1):
            grown = _dilate_chebyshev(ring)
            values[grown & ~ring] = MAIN_LOBE_DB * step / TAPER_CELLS
            ring = grown
    values[interior] = 0.0
    return BeamPattern(values, grid)


# ---------------------------------------------------------------------------
# File formats: CSV grid of dB values, PGM heatmap, JSON sidecar.

def save_pattern_csv(pattern: BeamPattern, path) -> None:
    """Write the dB grid as CSV, H rows by W columns, 6 decimal places."""
    np.savetxt(path, pattern.values, fmt="%.6f", delimiter=",")


def load_pattern_csv(path, grid: AngleGrid) -> BeamPattern:
    """Read a CSV pattern; values are re-normalized to peak 0 and floored."""
    vals = np.loadtxt(path, delimiter=",", ndmin=2)
    if vals.shape != grid.shape:
        raise GridMismatchError(
            f"pattern file shape {vals.shape} does not match grid {grid.shape}"
        )
    return BeamPattern.from_values(vals, grid)


def save_pattern_pgm(pattern: BeamPattern, path) -> None:
    """Write an 8-bit grayscale PGM heatmap (-60 dB -> 0, 0 dB -> 255)."""
    scaled = (pattern.values - DB_FLOOR) / (0.0 - DB_FLOOR) * 255.0
    levels = np.clip(np.rint(scaled), 0, 255).astype(np.uint8)
    h, w = levels.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(levels.tobytes())


def save_target(pattern: BeamPattern, csv_path, spec: TargetSpec | None = None,
                sidecar_path=None) -> None:
    """Write a target pattern CSV plus an optional JSON spec sidecar."""
    save_pattern_csv(pattern, csv_path)
    if sidecar_path is not None:
        spec = spec if spec is not None else TargetSpec(kind="from-file")
        with open(sidecar_path, "w") as fh:
            json.dump(spec.to_json_dict(), fh, indent=2)
            fh.write("\n")


def load_target(csv_path, grid: AngleGrid, sidecar_path=None):
    """Read a target CSV (and sidecar when given); returns (pattern, spec)."""
    pattern = load_pattern_csv(csv_path, grid)
    spec = None
    if sidecar_path is not None:
        with open(sidecar_path) as fh:
            spec = TargetSpec.from_json_dict(json.load(fh))
    return pattern, spec
