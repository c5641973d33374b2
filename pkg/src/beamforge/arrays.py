"""Uniform rectangular array geometry and far-field responses.

Elements sit on an n_y x n_z grid in the y-z plane and are indexed
row-major: element l = m * n_z + n for horizontal index m and vertical
index n.  Its phase toward direction (zenith theta, azimuth phi) is
k * d * (m * sin(theta) sin(phi) + n * cos(theta)).

The full-grid response factorizes through the element grid, which keeps
the hot loops at O(H * W * n_y) instead of O(H * W * n_t): with
F = f reshaped to (n_y, n_z),

    g[i, j] = sum_m (F @ Ez)[m, i] * B[i, j]**m,

where B[i, j] = exp(j k d sin(theta_i) sin(phi_j)) and
Ez[n, i] = exp(j k d n cos(theta_i)).  The compiled kernels evaluate the
inner power sums; everything else is plain numpy.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import DegenerateInputError, GridMismatchError
from .patterns import DB_FLOOR, AngleGrid, BeamPattern

SPEED_OF_LIGHT = 299792458.0


@dataclass(frozen=True)
class ArrayConfig:
    """Geometry of a uniform rectangular array plus its RF chain count.

    ``n_y`` horizontal elements, ``n_z`` vertical, ``spacing`` in meters,
    ``n_rf`` RF chains for hybrid architectures.
    """

    n_y: int
    n_z: int
    spacing: float
    wavelength: float
    n_rf: int = 1

    def __post_init__(self):
        if self.n_y < 1 or self.n_z < 1:
            raise ValueError("array needs at least one element per axis")
        if self.spacing <= 0 or self.wavelength <= 0:
            raise ValueError("spacing and wavelength must be positive")
        if not 1 <= self.n_rf <= self.n_y * self.n_z:
            raise ValueError("n_rf must be between 1 and the element count")

    @property
    def n_t(self) -> int:
        return self.n_y * self.n_z

    @property
    def wavenumber(self) -> float:
        return 2.0 * np.pi / self.wavelength

    @property
    def kd(self) -> float:
        """Phase advance per element index, k * d."""
        return self.wavenumber * self.spacing

    @classmethod
    def half_wavelength(cls, n_y: int, n_z: int, frequency_hz: float = 28e9,
                        n_rf: int = 1) -> "ArrayConfig":
        lam = SPEED_OF_LIGHT / frequency_hz
        return cls(n_y=n_y, n_z=n_z, spacing=lam / 2.0, wavelength=lam, n_rf=n_rf)

    @classmethod
    def default(cls, n_rf: int = 2) -> "ArrayConfig":
        """16 x 16 half-wavelength array at 28 GHz."""
        return cls.half_wavelength(16, 16, n_rf=n_rf)


def _direction_cosines(zenith_rad, azimuth_rad):
    """(u, v) with u = sin(zenith) sin(azimuth), v = cos(zenith)."""
    return np.sin(zenith_rad) * np.sin(azimuth_rad), np.cos(zenith_rad)


def steering_vector(cfg: ArrayConfig, zenith_deg: float, azimuth_deg: float) -> np.ndarray:
    """Array response toward a single direction, length n_t, unit-modulus."""
    u, v = _direction_cosines(np.deg2rad(zenith_deg), np.deg2rad(azimuth_deg))
    m = np.repeat(np.arange(cfg.n_y), cfg.n_z)
    n = np.tile(np.arange(cfg.n_z), cfg.n_y)
    return np.exp(1j * (cfg.kd * (m * u + n * v)))


@dataclass(frozen=True, eq=False)
class SteeringMatrix:
    """Dense steering matrix over a grid, columns in row-major cell order."""

    entries: np.ndarray  # (n_t, H*W) complex128
    cfg: ArrayConfig
    grid: AngleGrid

    def column(self, i: int, j: int) -> np.ndarray:
        return self.entries[:, i * self.grid.w + j]


def build_steering_matrix(cfg: ArrayConfig, grid: AngleGrid) -> SteeringMatrix:
    """Assemble the full (n_t, H*W) steering matrix.

    Columns reproduce ``steering_vector`` bit for bit: the phase is computed
    with the same operation order.  Large for big grids (~132 MB at 256
    elements on the 180 x 180 grid), so only the exact-recovery and greedy
    baselines use it; synthesis goes through the factorized kernels.
    """
    u2d, v1d = _direction_cosines(grid.zeniths_rad[:, None], grid.azimuths_rad[None, :])
    u = u2d.ravel()
    v = np.repeat(v1d, grid.w)
    m = np.repeat(np.arange(cfg.n_y), cfg.n_z)
    n = np.tile(np.arange(cfg.n_z), cfg.n_y)
    entries = np.exp(1j * (cfg.kd * (m[:, None] * u[None, :] + n[:, None] * v[None, :])))
    return SteeringMatrix(entries, cfg, grid)


@lru_cache(maxsize=2)
def cached_steering_matrix(cfg: ArrayConfig, grid: AngleGrid) -> SteeringMatrix:
    sm = build_steering_matrix(cfg, grid)
    sm.entries.flags.writeable = False
    return sm


@lru_cache(maxsize=8)
def _phase_tables(cfg: ArrayConfig, grid: AngleGrid):
    """Factorized phase tables (B, Ez) for the grid response kernels."""
    u, v = _direction_cosines(grid.zeniths_rad[:, None], grid.azimuths_rad[None, :])
    base = np.exp(1j * (cfg.kd * u))                                   # (H, W)
    ez = np.exp(1j * (cfg.kd * np.outer(np.arange(cfg.n_z), v)))       # (n_z, H)
    base.flags.writeable = False
    ez.flags.writeable = False
    return base, ez


def _check_beamformer_vector(cfg: ArrayConfig, f) -> np.ndarray:
    f = np.asarray(f, dtype=np.complex128)
    if f.shape != (cfg.n_t,):
        raise GridMismatchError(f"beamformer has shape {f.shape}, expected ({cfg.n_t},)")
    if not np.all(np.isfinite(f)):
        raise DegenerateInputError("beamformer has non-finite entries")
    return f


def response_grid(cfg: ArrayConfig, grid: AngleGrid, f: np.ndarray) -> np.ndarray:
    """Complex far-field response g[i, j] = sum_l f_l a_l(i, j), shape (H, W)."""
    f = _check_beamformer_vector(cfg, f)
    base, ez = _phase_tables(cfg, grid)
    coeffs = np.ascontiguousarray((f.reshape(cfg.n_y, cfg.n_z) @ ez).T)  # (H, n_y)
    return kernels.pattern_forward(coeffs, base)


def response_adjoint(cfg: ArrayConfig, grid: AngleGrid, weights: np.ndarray) -> np.ndarray:
    """Pull a per-cell cotangent back to the elements.

    Returns c with c[l] = sum_{i,j} weights[i, j] * a_l(i, j), so that for
    scalar objectives dL = Re(sum_l c_l df_l) when weights[i, j] = dL/dg[i, j]
    in the Wirtinger sense.
    """
    weights = np.ascontiguousarray(weights, dtype=np.complex128)
    if weights.shape != grid.shape:
        raise GridMismatchError(
            f"weights shape {weights.shape} does not match grid {grid.shape}"
        )
    base, ez = _phase_tables(cfg, grid)
    qt = kernels.pattern_adjoint(weights, base, cfg.n_y)  # (H, n_y)
    return np.ascontiguousarray(qt.T @ ez.T).ravel()      # (n_y, n_z) row-major


def magnitude_to_db(mag: np.ndarray, ref: float | None = None):
    """Peak-normalized dB with the standard floor; returns (db, ref)."""
    mag = np.asarray(mag, dtype=np.float64)
    if ref is None:
        ref = float(mag.max())
    if ref <= 0.0:
        raise DegenerateInputError("response is identically zero")
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mag / ref)
    return np.maximum(db, DB_FLOOR), ref


def compute_pattern(cfg: ArrayConfig, grid: AngleGrid, f: np.ndarray) -> BeamPattern:
    """Peak-normalized dB pattern of a beamforming vector."""
    f = _check_beamformer_vector(cfg, f)
    if not np.any(f):
        raise DegenerateInputError("beamformer is the zero vector")
    db, _ = magnitude_to_db(np.abs(response_grid(cfg, grid, f)))
    return BeamPattern(db, grid)


def target_from_beamformer(cfg: ArrayConfig, grid: AngleGrid, f: np.ndarray) -> BeamPattern:
    """Use the pattern radiated by an existing beamformer as a target."""
    return compute_pattern(cfg, grid, f)
