"""Constrained beamformer parametrizations and conversions.

Three architectures:

* digital: one unconstrained complex weight per element,
* analog: one phase shifter per element, constant modulus 1/sqrt(n_t),
* hybrid: n_rf RF chains driving a phase matrix, f = (1/sqrt(n_t)) e^{j Phi} w.

``realize`` maps any of them to the physical length-n_t vector, projected to
unit transmit norm.  ``ParameterLayout`` fixes the flat real-parameter order
shared by the optimizer, the gradient code and the decoder network.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .arrays import ArrayConfig
from .errors import DegenerateInputError, GridMismatchError

ARCHITECTURES = ("digital", "analog", "hybrid")


def _check_finite(name, arr):
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")


@dataclass(frozen=True, eq=False)
class DigitalBeamformer:
    """Unconstrained complex weights, one per element."""

    weights: np.ndarray  # (n_t,) complex128

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.complex128)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("digital weights must be a nonempty vector")
        _check_finite("weights", w)
        w = w.copy()
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def architecture(self) -> str:
        return "digital"

    @property
    def n_t(self) -> int:
        return self.weights.size


@dataclass(frozen=True, eq=False)
class AnalogBeamformer:
    """Phase-shifter network: one phase per element, fixed modulus."""

    phases: np.ndarray  # (n_t,) float64, radians

    def __post_init__(self):
        p = np.asarray(self.phases, dtype=np.float64)
        if p.ndim != 1 or p.size < 1:
            raise ValueError("analog phases must be a nonempty vector")
        _check_finite("phases", p)
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "phases", p)

    @property
    def architecture(self) -> str:
        return "analog"

    @property
    def n_t(self) -> int:
        return self.phases.size


@dataclass(frozen=True, eq=False)
class HybridBeamformer:
    """Phase matrix (n_t x n_rf) in front of a complex baseband vector."""

    phases: np.ndarray    # (n_t, n_rf) float64, radians
    baseband: np.ndarray  # (n_rf,) complex128

    def __post_init__(self):
        p = np.asarray(self.phases, dtype=np.float64)
        b = np.asarray(self.baseband, dtype=np.complex128)
        if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError("hybrid phases must be an (n_t, n_rf) matrix")
        if b.shape != (p.shape[1],):
            raise ValueError("baseband length must equal the RF chain count")
        _check_finite("phases", p)
        _check_finite("baseband", b)
        p, b = p.copy(), b.copy()
        p.flags.writeable = False
        b.flags.writeable = False
        object.__setattr__(self, "phases", p)
        object.__setattr__(self, "baseband", b)

    @property
    def architecture(self) -> str:
        return "hybrid"

    @property
    def n_t(self) -> int:
        return self.phases.shape[0]

    @property
    def n_rf(self) -> int:
        return self.phases.shape[1]


Beamformer = DigitalBeamformer | AnalogBeamformer | HybridBeamformer


def _check_dims(bf: Beamformer, cfg: ArrayConfig) -> None:
    if bf.n_t != cfg.n_t:
        raise GridMismatchError(
            f"beamformer sized for {bf.n_t} elements, array has {cfg.n_t}"
        )
    if isinstance(bf, HybridBeamformer) and bf.n_rf != cfg.n_rf:
        raise GridMismatchError(
            f"beamformer uses {bf.n_rf} RF chains, array config has {cfg.n_rf}"
        )


def phase_matrix(bf: HybridBeamformer) -> np.ndarray:
    """Constant-modulus RF stage, entries of magnitude 1/sqrt(n_t)."""
    return np.exp(1j * bf.phases) / np.sqrt(bf.n_t)


def raw_realize(bf: Beamformer, cfg: ArrayConfig) -> np.ndarray:
    """Physical vector before the final unit-norm projection.

    Analog and hybrid keep their structural 1/sqrt(n_t) modulus; digital
    returns the weights as stored.  The gradient code differentiates this
    map; the projection in ``realize`` is a detached rescaling.
    """
    _check_dims(bf, cfg)
    if isinstance(bf, DigitalBeamformer):
        return bf.weights.copy()
    if isinstance(bf, AnalogBeamformer):
        return np.exp(1j * bf.phases) / np.sqrt(bf.n_t)
    return phase_matrix(bf) @ bf.baseband


def realize(bf: Beamformer, cfg: ArrayConfig) -> np.ndarray:
    """Map parameters to the physical unit-norm beamforming vector."""
    f = raw_realize(bf, cfg)
    norm = np.linalg.norm(f)
    if norm == 0.0:
        raise DegenerateInputError(f"{bf.architecture} beamformer realizes to zero")
    return f / norm


def analog_from_hybrid(bf: HybridBeamformer, cfg: ArrayConfig) -> AnalogBeamformer:
    """Project a hybrid beamformer onto the constant-modulus set.

    Keeps the per-element phase of the realized hybrid vector and drops the
    magnitude variation.
    """
    f = realize(bf, cfg)
    if np.any(f == 0):
        raise DegenerateInputError(
            "hybrid vector has zero entries, element phase undefined"
        )
    return AnalogBeamformer(np.angle(f))


@dataclass(frozen=True)
class ParameterLayout:
    """Flat real-parameter order for one architecture on one array.

    digital: [Re w_0, Im w_0, Re w_1, Im w_1, ...], 2 n_t entries.
    analog:  [phi_0, ..., phi_{n_t-1}], n_t entries.
    hybrid:  phase matrix flattened column by column (RF chain 0 first),
             then [Re b_0, Im b_0, Re b_1, Im b_1, ...]; (n_t + 2) n_rf.
    """

    architecture: str
    n_t: int
    n_rf: int = 1

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"unknown architecture {self.architecture!r}")
        if self.n_t < 1 or self.n_rf < 1:
            raise ValueError("layout dimensions must be positive")

    @property
    def size(self) -> int:
        if self.architecture == "digital":
            return 2 * self.n_t
        if self.architecture == "analog":
            return self.n_t
        return (self.n_t + 2) * self.n_rf

    def pack(self, bf: Beamformer) -> np.ndarray:
        """Flatten a beamformer into the layout's real vector."""
        if bf.architecture != self.architecture or bf.n_t != self.n_t:
            raise GridMismatchError("beamformer does not match layout")
        if isinstance(bf, DigitalBeamformer):
            out = np.empty(self.size)
            out[0::2] = bf.weights.real
            out[1::2] = bf.weights.imag
            return out
        if isinstance(bf, AnalogBeamformer):
            return bf.phases.copy()
        if bf.n_rf != self.n_rf:
            raise GridMismatchError("beamformer does not match layout")
        out = np.empty(self.size)
        k = self.n_t * self.n_rf
        out[:k] = bf.phases.ravel(order="F")
        out[k::2] = bf.baseband.real
        out[k + 1 :: 2] = bf.baseband.imag
        return out

    def unpack(self, params: np.ndarray) -> Beamformer:
        """Inverse of ``pack``."""
        params = np.asarray(params, dtype=np.float64)
        if params.shape != (self.size,):
            raise GridMismatchError(
                f"parameter vector has shape {params.shape}, expected ({self.size},)"
            )
        if self.architecture == "digital":
            return DigitalBeamformer(params[0::2] + 1j * params[1::2])
        if self.architecture == "analog":
            return AnalogBeamformer(params)
        k = self.n_t * self.n_rf
        phases = params[:k].reshape((self.n_t, self.n_rf), order="F")
        baseband = params[k::2] + 1j * params[k + 1 :: 2]
        return HybridBeamformer(phases, baseband)


def parameter_layout(bf: Beamformer) -> ParameterLayout:
    """Layout descriptor matching an existing beamformer."""
    n_rf = bf.n_rf if isinstance(bf, HybridBeamformer) else 1
    return ParameterLayout(bf.architecture, bf.n_t, n_rf)


def layout_for(architecture: str, cfg: ArrayConfig) -> ParameterLayout:
    """Layout descriptor for an architecture on a given array."""
    return ParameterLayout(architecture, cfg.n_t, cfg.n_rf)


def random_beamformer(architecture: str, cfg: ArrayConfig,
                      rng: np.random.Generator) -> Beamformer:
    """Seeded random starting point for synthesis.

    Digital weights and hybrid baseband entries are i.i.d. complex Gaussian
    scaled to unit norm; phases are uniform on [0, 2 pi).
    """

    def unit_gaussian(n):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        return v / np.linalg.norm(v)

    if architecture == "digital":
        return DigitalBeamformer(unit_gaussian(cfg.n_t))
    if architecture == "analog":
        return AnalogBeamformer(rng.uniform(0.0, 2.0 * np.pi, cfg.n_t))
    if architecture == "hybrid":
        phases = rng.uniform(0.0, 2.0 * np.pi, (cfg.n_t, cfg.n_rf))
        return HybridBeamformer(phases, unit_gaussian(cfg.n_rf))
    raise ValueError(f"unknown architecture {architecture!r}")


# ---------------------------------------------------------------------------
# JSON serialization. Floats are written with full repr precision so a
# save/load cycle reproduces every parameter bit for bit.

def to_json_dict(bf: Beamformer) -> dict:
    if isinstance(bf, DigitalBeamformer):
        return {
            "architecture": "digital",
            "weights_re": [float(x) for x in bf.weights.real],
            "weights_im": [float(x) for x in bf.weights.imag],
        }
    if isinstance(bf, AnalogBeamformer):
        return {
            "architecture": "analog",
            "phases": [float(x) for x in bf.phases],
        }
    return {
        "architecture": "hybrid",
        "n_rf": bf.n_rf,
        "phases": [[float(x) for x in row] for row in bf.phases],
        "baseband_re": [float(x) for x in bf.baseband.real],
        "baseband_im": [float(x) for x in bf.baseband.imag],
    }


def from_json_dict(data: dict) -> Beamformer:
    arch = data.get("architecture")
    if arch == "digital":
        return DigitalBeamformer(
            np.asarray(data["weights_re"]) + 1j * np.asarray(data["weights_im"])
        )
    if arch == "analog":
        return AnalogBeamformer(np.asarray(data["phases"]))
    if arch == "hybrid":
        return HybridBeamformer(
            np.asarray(data["phases"], dtype=np.float64),
            np.asarray(data["baseband_re"]) + 1j * np.asarray(data["baseband_im"]),
        )
    raise ValueError(f"unknown architecture tag {arch!r}")


def save_beamformer(bf: Beamformer, path) -> None:
    with open(path, "w") as fh:
        json.dump(to_json_dict(bf), fh, indent=2)
        fh.write("\n")


def load_beamformer(path) -> Beamformer:
    with open(path) as fh:
        return from_json_dict(json.load(fh))
