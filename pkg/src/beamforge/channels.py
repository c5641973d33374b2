"""Clustered multipath channel generation and channel file ingestion.

The generator is a small stand-in for a full ray-tracing simulator: each
channel draws a handful of departure paths around a random cluster center,
with geometrically decaying Rayleigh-faded gains.  Channels built from path
metadata satisfy

    h = sum_p alpha_p * conj(steering_vector(zenith_p, azimuth_p))

so that the matched filter h/||h|| points its pattern peaks at the path
directions.  The CSV format round-trips bit-exactly, which lets externally
generated channel files flow through the same pipeline.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .arrays import ArrayConfig, steering_vector
from .errors import ChannelFormatError, DegenerateInputError

ZENITH_RANGE = (1.0, 180.0)
AZIMUTH_RANGE = (-89.0, 90.0)
LOS_BOOST_DB = 10.0


@dataclass(frozen=True)
class PathParams:
    """One departure path: complex gain plus direction in degrees."""

    gain: complex
    zenith_deg: float
    azimuth_deg: float

    def __post_init__(self):
        if self.gain == 0:
            raise ValueError("path gain must be nonzero")
        if not (np.isfinite(self.gain) and np.isfinite(self.zenith_deg)
                and np.isfinite(self.azimuth_deg)):
            raise ValueError("path parameters must be finite")
        if not 0.0 <= self.zenith_deg <= 180.0:
            raise ValueError("zenith must lie in [0, 180] degrees")
        if not -90.0 <= self.azimuth_deg <= 90.0:
            raise ValueError("azimuth must lie in [-90, 90] degrees")


@dataclass(frozen=True, eq=False)
class Channel:
    """Channel vector, with per-path metadata when the generator made it."""

    h: np.ndarray  # (n_t,) complex128
    paths: tuple[PathParams, ...] = ()

    def __post_init__(self):
        h = np.asarray(self.h, dtype=np.complex128)
        if h.ndim != 1 or h.size < 1:
            raise ValueError("channel vector must be a nonempty vector")
        if not np.all(np.isfinite(h)):
            raise ValueError("channel vector has non-finite entries")
        if not np.any(h):
            raise DegenerateInputError("channel vector is zero")
        h = h.copy()
        h.flags.writeable = False
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "paths", tuple(self.paths))

    @property
    def n_t(self) -> int:
        return self.h.size


@dataclass(frozen=True)
class ChannelModelConfig:
    """Clustered-path model parameters.

    ``path_count_range`` is inclusive on both ends.  ``decay_db_per_path``
    is the mean power drop from each path to the next.  ``angle_spread_deg``
    scales the Laplacian offsets of the later paths around the first.
    ``los_probability`` is the chance the first path gets a +10 dB
    line-of-sight power boost.
    """

    path_count_range: tuple[int, int] = (3, 5)
    decay_db_per_path: float = 8.0
    angle_spread_deg: float = 5.0
    los_probability: float = 0.0
    seed: int = 0

    def __post_init__(self):
        lo, hi = self.path_count_range
        if lo < 1 or hi < lo:
            raise ValueError("path count range must satisfy 1 <= lo <= hi")
        if self.decay_db_per_path < 0:
            raise ValueError("decay must be nonnegative")
        if self.angle_spread_deg < 0:
            raise ValueError("angle spread must be nonnegative")
        if not 0.0 <= self.los_probability <= 1.0:
            raise ValueError("LOS probability must lie in [0, 1]")
        object.__setattr__(self, "path_count_range", (int(lo), int(hi)))

    def to_json_dict(self) -> dict:
        return {
            "path_count_range": list(self.path_count_range),
            "decay_db_per_path": self.decay_db_per_path,
            "angle_spread_deg": self.angle_spread_deg,
            "los_probability": self.los_probability,
            "seed": self.seed,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ChannelModelConfig":
        data = dict(data)
        if "path_count_range" in data:
            data["path_count_range"] = tuple(data["path_count_range"])
        return cls(**data)


def reconstruct_channel(cfg: ArrayConfig, paths) -> np.ndarray:
    """Channel vector implied by path metadata."""
    h = np.zeros(cfg.n_t, dtype=np.complex128)
    for p in paths:
        h += p.gain * np.conj(steering_vector(cfg, p.zenith_deg, p.azimuth_deg))
    return h


def _draw_channel(cfg: ArrayConfig, model: ChannelModelConfig,
                  rng: np.random.Generator) -> Channel:
    lo, hi = model.path_count_range
    n_paths = int(rng.integers(lo, hi + 1))
    zen0 = rng.uniform(*ZENITH_RANGE)
    az0 = rng.uniform(*AZIMUTH_RANGE)
    los = rng.uniform() < model.los_probability
    paths = []
    for p in range(n_paths):
        amp = 10.0 ** (-model.decay_db_per_path * p / 20.0)
        if los and p == 0:
            amp *= 10.0 ** (LOS_BOOST_DB / 20.0)
        gain = amp * (rng.standard_normal() + 1j * rng.standard_normal()) / np.sqrt(2.0)
        if p == 0:
            zen, az = zen0, az0
        else:
            zen = float(np.clip(zen0 + rng.laplace(0.0, model.angle_spread_deg),
                                *ZENITH_RANGE))
            az = float(np.clip(az0 + rng.laplace(0.0, model.angle_spread_deg),
                               *AZIMUTH_RANGE))
        paths.append(PathParams(complex(gain), zen, az))
    return Channel(reconstruct_channel(cfg, paths), tuple(paths))


def generate_channels(cfg: ArrayConfig, model: ChannelModelConfig,
                      count: int) -> list[Channel]:
    """Draw ``count`` independent channels, deterministically per seed.

    Each channel gets its own spawned substream, so the draw is stable under
    any parallel evaluation order.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    seqs = np.random.SeedSequence(model.seed).spawn(count)
    return [_draw_channel(cfg, model, np.random.default_rng(s)) for s in seqs]


# ---------------------------------------------------------------------------
# CSV of channel vectors (one row per channel, Re/Im interleaved) plus an
# optional JSON sidecar of path metadata.  Floats use repr precision so the
# round-trip is bit-exact.

def save_channels(channels, csv_path, sidecar_path=None) -> None:
    with open(csv_path, "w") as fh:
        for ch in channels:
            cells = []
            for z in ch.h:
                cells.append(repr(float(z.real)))
                cells.append(repr(float(z.imag)))
            fh.write(",".join(cells))
            fh.write("\n")
    if sidecar_path is not None:
        meta = [
            [
                {
                    "gain_re": p.gain.real,
                    "gain_im": p.gain.imag,
                    "zenith_deg": p.zenith_deg,
                    "azimuth_deg": p.azimuth_deg,
                }
                for p in ch.paths
            ]
            for ch in channels
        ]
        with open(sidecar_path, "w") as fh:
            json.dump(meta, fh, indent=2)
            fh.write("\n")


def load_channels(csv_path, cfg: ArrayConfig | None = None,
                  sidecar_path=None) -> list[Channel]:
    """Read channels back; validates shape against ``cfg`` when given."""
    rows = []
    with open(csv_path, newline="") as fh:
        for row_idx, row in enumerate(csv.reader(fh)):
            if not row:
                continue
            if len(row) % 2 != 0:
                raise ChannelFormatError(
                    f"row {row_idx}: odd column count {len(row)}"
                )
            try:
                values = [float(cell) for cell in row]
            except ValueError:
                bad = next(i for i, cell in enumerate(row)
                           if not _parses_as_float(cell))
                raise ChannelFormatError(
                    f"row {row_idx}, column {bad}: not a number: {row[bad]!r}"
                ) from None
            vec = np.asarray(values[0::2]) + 1j * np.asarray(values[1::2])
            if cfg is not None and vec.size != cfg.n_t:
                raise ChannelFormatError(
                    f"row {row_idx}: {vec.size} entries, array has {cfg.n_t} elements"
                )
            if not np.any(vec):
                raise DegenerateInputError(f"row {row_idx}: channel vector is zero")
            rows.append(vec)
    if not rows:
        raise ChannelFormatError("channel file holds no rows")
    sizes = {v.size for v in rows}
    if len(sizes) > 1:
        raise ChannelFormatError(f"rows have inconsistent lengths {sorted(sizes)}")

    metadata = [()] * len(rows)
    if sidecar_path is not None:
        with open(sidecar_path) as fh:
            meta = json.load(fh)
        if len(meta) != len(rows):
            raise ChannelFormatError(
                f"sidecar lists {len(meta)} channels, file has {len(rows)}"
            )
        metadata = [
            tuple(
                PathParams(complex(p["gain_re"], p["gain_im"]),
                           p["zenith_deg"], p["azimuth_deg"])
                for p in entry
            )
            for entry in meta
        ]
    return [Channel(vec, paths) for vec, paths in zip(rows, metadata)]


def _parses_as_float(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False
