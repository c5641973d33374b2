"""Reference beamformers and least-squares phase-pattern recovery.

Everything here is closed-form or greedy: the matched filter, the
amplitude-only partial-CSI variant, greedy steering-atom selection for the
hybrid architecture, an exhaustive DFT codebook scan, and the recovery of a
digital beamformer from a complex (phase-carrying) response grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arrays import (
    ArrayConfig,
    SteeringMatrix,
    response_grid,
    steering_vector,
)
from .beamformers import AnalogBeamformer, DigitalBeamformer, HybridBeamformer
from .channels import Channel
from .errors import DegenerateInputError, GridMismatchError
from .patterns import AngleGrid

GRAM_COND_LIMIT = 1e10
GRAM_RIDGE = 1e-9


def _channel_vector(h) -> np.ndarray:
    vec = h.h if isinstance(h, Channel) else np.asarray(h, dtype=np.complex128)
    if not np.any(vec):
        raise DegenerateInputError("channel vector is zero")
    return vec


def mrt(h) -> DigitalBeamformer:
    """Matched filter w = h/||h||, the unit-norm rate maximizer."""
    vec = _channel_vector(h)
    return DigitalBeamformer(vec / np.linalg.norm(vec))


def partial_csi_dbf(paths, cfg: ArrayConfig) -> DigitalBeamformer:
    """Digital beamformer from path directions and gain amplitudes only.

    Stand-in for a transmitter that knows each path's strength but not its
    phase: the matched filter with every gain phase zeroed.
    """
    paths = tuple(paths)
    if not paths:
        raise DegenerateInputError("no path metadata available")
    w = np.zeros(cfg.n_t, dtype=np.complex128)
    for p in paths:
        w += abs(p.gain) * np.conj(steering_vector(cfg, p.zenith_deg, p.azimuth_deg))
    norm = np.linalg.norm(w)
    if norm == 0.0:
        raise DegenerateInputError("path sum collapsed to zero")
    return DigitalBeamformer(w / norm)


@lru_cache(maxsize=4)
def _sine_dictionary(cfg: ArrayConfig, size: int) -> np.ndarray:
    """Constant-modulus steering atoms on a sine-domain grid, unit columns.

    ``size`` must be a perfect square; each axis gets sqrt(size) phase
    gradients at cell centers of [-1, 1), so no two atoms coincide.
    """
    per_axis = math.isqrt(size)
    if per_axis * per_axis != size:
        raise ValueError(f"dictionary size {size} is not a perfect square")
    u = (2.0 * np.arange(per_axis) + 1.0 - per_axis) / per_axis
    m = np.repeat(np.arange(cfg.n_y), cfg.n_z)
    n = np.tile(np.arange(cfg.n_z), cfg.n_y)
    # atom index k = k_u * per_axis + k_v
    phases = cfg.kd * (
        m[:, None, None] * u[None, :, None] + n[:, None, None] * u[None, None, :]
    )
    atoms = np.exp(1j * phases).reshape(cfg.n_t, size) / np.sqrt(cfg.n_t)
    atoms.flags.writeable = False
    return atoms


def omp_hybrid(f_opt: np.ndarray, cfg: ArrayConfig,
               dictionary_size: int = 4096) -> HybridBeamformer:
    """Greedy steering-atom approximation of a target beamforming vector.

    Runs n_rf rounds of: correlate the dictionary with the normalized
    residual, take the best unused atom (falling back to the next-best if
    the selection turns rank-deficient), refit the baseband weights by
    least squares, update the residual.
    """
    f_opt = np.asarray(f_opt, dtype=np.complex128)
    if f_opt.shape != (cfg.n_t,):
        raise GridMismatchError(f"beamformer has shape {f_opt.shape}, "
                                f"expected ({cfg.n_t},)")
    norm = np.linalg.norm(f_opt)
    if abs(norm - 1.0) > 1e-6:
        raise ValueError("target vector must be unit norm")
    if dictionary_size < cfg.n_rf:
        raise ValueError("dictionary must hold at least n_rf atoms")

    atoms = _sine_dictionary(cfg, dictionary_size)
    selected: list[int] = []
    residual = f_opt
    w = np.zeros(0, dtype=np.complex128)
    for _ in range(cfg.n_rf):
        scores = np.abs(atoms.conj().T @ residual)
        scores[selected] = -1.0
        for cand in np.argsort(-scores, kind="stable"):
            trial = selected + [int(cand)]
            sub = atoms[:, trial]
            w_trial, _, rank, _ = np.linalg.lstsq(sub, f_opt, rcond=None)
            if rank == len(trial):
                selected = trial
                w = w_trial
                break
        else:
            raise DegenerateInputError("dictionary exhausted without a full-rank fit")
        residual = f_opt - atoms[:, selected] @ w
        rnorm = np.linalg.norm(residual)
        if rnorm > 0.0:
            residual = residual / rnorm
    phases = np.angle(atoms[:, selected] * np.sqrt(cfg.n_t))
    return HybridBeamformer(phases, w)


def dft_codebook(cfg: ArrayConfig) -> np.ndarray:
    """All n_t Kronecker DFT codewords as columns, modulus 1/sqrt(n_t).

    Codeword p*n_z + q pairs the p-th horizontal with the q-th vertical
    DFT vector, matching the row-major element layout.
    """
    fy = np.exp(2j * np.pi * np.outer(np.arange(cfg.n_y), np.arange(cfg.n_y))
                / cfg.n_y)
    fz = np.exp(2j * np.pi * np.outer(np.arange(cfg.n_z), np.arange(cfg.n_z))
                / cfg.n_z)
    return np.kron(fy, fz) / np.sqrt(cfg.n_t)


def dft_codebook_abf(h, cfg: ArrayConfig) -> AnalogBeamformer:
    """Best DFT codeword by received power, ties to the lowest index."""
    vec = _channel_vector(h)
    if vec.size != cfg.n_t:
        raise GridMismatchError(f"channel has {vec.size} entries, "
                                f"array has {cfg.n_t} elements")
    book = dft_codebook(cfg)
    scores = np.abs(vec.conj() @ book)
    best = int(np.argmax(scores))
    p, q = divmod(best, cfg.n_z)
    m = np.repeat(np.arange(cfg.n_y), cfg.n_z)
    n = np.tile(np.arange(cfg.n_z), cfg.n_y)
    phases = 2.0 * np.pi * (m * p / cfg.n_y + n * q / cfg.n_z)
    return AnalogBeamformer(phases)


@dataclass(frozen=True, eq=False)
class PhasePattern:
    """Un-normalized complex response grid, the phase-carrying pattern."""

    values: np.ndarray  # (H, W) complex128
    grid: AngleGrid

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.complex128)
        if vals.shape != self.grid.shape:
            raise GridMismatchError(
                f"pattern shape {vals.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("pattern has non-finite entries")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_beamformer(cls, cfg: ArrayConfig, grid: AngleGrid,
                        f: np.ndarray) -> "PhasePattern":
        """Response grid X with vec(X)^T = f^H A."""
        f = np.asarray(f, dtype=np.complex128)
        return cls(response_grid(cfg, grid, np.conj(f)), grid)


@lru_cache(maxsize=2)
def _gram(sm: SteeringMatrix):
    """(A A^H, condition number); keyed by matrix instance, so the shared
    cached steering matrix pays the assembly cost once."""
    a = sm.entries
    gram = a @ a.conj().T
    gram.flags.writeable = False
    return gram, float(np.linalg.cond(gram))


def ls_recover(xp: PhasePattern, sm: SteeringMatrix) -> DigitalBeamformer:
    """Recover a digital beamformer from its phase-carrying pattern.

    Solves f^H = y A^H (A A^H)^{-1} with y the peak-scaled flattened
    pattern, adding a tiny relative ridge when the Gram matrix is
    ill-conditioned.
    """
    if xp.grid != sm.grid:
        raise GridMismatchError("pattern and steering matrix use different grids")
    peak = float(np.abs(xp.values).max())
    if peak == 0.0:
        raise DegenerateInputError("phase pattern is identically zero")
    n_t = sm.cfg.n_t
    y = xp.values.ravel() / peak
    gram, cond = _gram(sm)
    if cond > GRAM_COND_LIMIT:
        ridge = GRAM_RIDGE * float(np.trace(gram).real) / n_t
        gram = gram + ridge * np.eye(n_t)
    rhs = sm.entries @ np.conj(y)
    try:
        f = np.linalg.solve(gram, rhs)
    except np.linalg.LinAlgError as exc:
        raise DegenerateInputError(f"steering Gram matrix is singular: {exc}") from exc
    norm = np.linalg.norm(f)
    if norm == 0.0:
        raise DegenerateInputError("recovered beamformer is zero")
    return DigitalBeamformer(f / norm)
