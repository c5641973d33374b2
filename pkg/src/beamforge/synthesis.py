"""Pattern-to-beamformer synthesis.

Two pathways:

* ``synthesize_direct`` runs Adam on the composite loss over one target's
  beamformer parameters, keeping the best iterate seen.
* ``train_decoder`` fits a small fully connected network that maps a pooled
  pattern feature vector straight to beamformer parameters, trained online
  on a handful of targets with the same loss; ``decode`` then turns any
  pattern into a beamformer with one forward pass.

Both the optimizer and the network backpropagation are written out here: the
loss gradient arrives from ``objective`` in flat parameter order, which is
exactly the network's output layer, so the chain rule continues through the
dense layers without any framework.
"""

from __future__ import annotations

import base64
import json
import time
from dataclasses import dataclass, replace

import numpy as np

from .arrays import ArrayConfig, compute_pattern
from .beamformers import (
    Beamformer,
    ParameterLayout,
    analog_from_hybrid,
    layout_for,
    random_beamformer,
    realize,
)
from .errors import NonFiniteLossError, UnsupportedGridError
from .objective import LossBreakdown, _loss_and_gradient, composite_loss
from .patterns import AngleGrid, BeamPattern, RegionMask, segment_regions

FEATURE_GRID = (180, 180)
FEATURE_BINS = 32
N_FEATURES = FEATURE_BINS * FEATURE_BINS
HIDDEN_WIDTHS = (1024, 2048, 1024)


@dataclass(frozen=True)
class SynthesisConfig:
    """Knobs shared by direct synthesis and decoder training."""

    architecture: str = "digital"
    learning_rate: float = 1e-3
    epochs: int = 500
    betas: tuple[float, float] = (0.9, 0.999)
    epsilon: float = 1e-8
    seed: int = 0
    restarts: int = 1

    def __post_init__(self):
        if self.architecture not in ("digital", "analog", "hybrid"):
            raise ValueError(f"unknown architecture {self.architecture!r}")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        b1, b2 = self.betas
        if not (0.0 <= b1 < 1.0 and 0.0 <= b2 < 1.0):
            raise ValueError("betas must lie in [0, 1)")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        object.__setattr__(self, "betas", (float(b1), float(b2)))


class Adam:
    """Standard Adam with bias correction, operating on one flat vector."""

    def __init__(self, size: int, learning_rate: float,
                 betas: tuple[float, float] = (0.9, 0.999),
                 epsilon: float = 1e-8):
        self.learning_rate = learning_rate
        self.beta1, self.beta2 = betas
        self.epsilon = epsilon
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad * grad
        m_hat = self.m / (1.0 - self.beta1 ** self.t)
        v_hat = self.v / (1.0 - self.beta2 ** self.t)
        return params - self.learning_rate * m_hat / (np.sqrt(v_hat) + self.epsilon)


@dataclass(frozen=True)
class SynthesisResult:
    """Outcome of one synthesis run.

    ``trajectory`` holds the best total loss seen up to each epoch;
    ``loss`` is recomputed from the returned beamformer, so it matches what
    an independent evaluation of the result would report.
    """

    beamformer: Beamformer
    loss: LossBreakdown
    trajectory: tuple[float, ...]
    seconds: float

    def to_json_dict(self) -> dict:
        return {
            "loss": self.loss.to_json_dict(),
            "trajectory": list(self.trajectory),
            "seconds": self.seconds,
        }


def _adam_descend(cfg: ArrayConfig, grid: AngleGrid, t_vals: np.ndarray,
                  mask: RegionMask, layout: ParameterLayout,
                  params: np.ndarray, syn: SynthesisConfig):
    """Adam descent from one starting point; returns (best params, trajectory)."""
    opt = Adam(layout.size, syn.learning_rate, syn.betas, syn.epsilon)
    best_total = np.inf
    best_params = params
    trajectory = []
    for epoch in range(syn.epochs):
        breakdown, grad = _loss_and_gradient(
            cfg, grid, t_vals, mask, layout.unpack(params)
        )
        total = breakdown.total
        if not np.isfinite(total):
            raise NonFiniteLossError(f"loss became non-finite at epoch {epoch}")
        if total < best_total:
            best_total = total
            best_params = params
        trajectory.append(best_total)
        params = opt.step(params, grad)
    return best_params, trajectory


def synthesize_direct(target: BeamPattern, cfg: ArrayConfig,
                      syn: SynthesisConfig) -> SynthesisResult:
    """Fit a beamformer to one target pattern by gradient descent.

    Runs ``syn.restarts`` independent seeded starts and keeps the one whose
    best iterate scores lowest.
    """
    t0 = time.perf_counter()
    grid = target.grid
    mask = segment_regions(target)
    layout = layout_for(syn.architecture, cfg)

    best = None
    for restart in range(syn.restarts):
        rng = np.random.default_rng((syn.seed, restart))
        start = layout.pack(random_beamformer(syn.architecture, cfg, rng))
        params, trajectory = _adam_descend(cfg, grid, target.values, mask,
                                           layout, start, syn)
        if best is None or trajectory[-1] < best[1][-1]:
            best = (params, trajectory)

    params, trajectory = best
    bf = layout.unpack(params)
    loss = composite_loss(target, compute_pattern(cfg, grid, realize(bf, cfg)), mask)
    return SynthesisResult(bf, loss, tuple(trajectory),
                           time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# Featurizer: fixed average pooling of the dB grid down to 32 x 32.

def _bin_edges(length: int, bins: int) -> np.ndarray:
    """Start offsets of ``bins`` contiguous blocks whose sizes differ by
    at most one cell (the first length % bins blocks get the extra cell)."""
    sizes = np.full(bins, length // bins)
    sizes[: length % bins] += 1
    return np.concatenate(([0], np.cumsum(sizes)[:-1]))


def featurize(target: BeamPattern) -> np.ndarray:
    """Pool a 180 x 180 pattern to 1024 features in [0, 1].

    Average-pools the dB values into a 32 x 32 grid, flattens row-major and
    rescales -60..0 dB to 0..1.  Deterministic and parameter-free.
    """
    if target.grid.shape != FEATURE_GRID:
        raise UnsupportedGridError(
            f"featurizer needs a {FEATURE_GRID[0]} x {FEATURE_GRID[1]} grid, "
            f"got {target.grid.shape[0]} x {target.grid.shape[1]}"
        )
    h, w = target.grid.shape
    rows = _bin_edges(h, FEATURE_BINS)
    cols = _bin_edges(w, FEATURE_BINS)
    pooled = np.add.reduceat(np.add.reduceat(target.values, rows, axis=0),
                             cols, axis=1)
    row_sizes = np.diff(np.concatenate((rows, [h])))
    col_sizes = np.diff(np.concatenate((cols, [w])))
    pooled /= np.outer(row_sizes, col_sizes)
    return (pooled.ravel() + 60.0) / 60.0


# ---------------------------------------------------------------------------
# Dense network with manual backpropagation.

class Mlp:
    """Fully connected net, ReLU hidden layers, linear output.

    Parameters live in one flat vector (weights row-major, then biases,
    layer by layer) so the same Adam loop drives it.
    """

    def __init__(self, widths: tuple[int, ...], rng: np.random.Generator):
        if len(widths) < 2:
            raise ValueError("network needs an input and an output width")
        self.widths = tuple(int(v) for v in widths)
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(self.widths[:-1], self.widths[1:]):
            scale = 1.0 / np.sqrt(fan_in)
            self.weights.append(rng.uniform(-scale, scale, (fan_in, fan_out)))
            self.biases.append(rng.uniform(-scale, scale, fan_out))

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def pack(self) -> np.ndarray:
        parts = []
        for w, b in zip(self.weights, self.biases):
            parts.append(w.ravel())
            parts.append(b)
        return np.concatenate(parts)

    def unpack(self, params: np.ndarray) -> None:
        k = 0
        for idx, (w, b) in enumerate(zip(self.weights, self.biases)):
            self.weights[idx] = params[k : k + w.size].reshape(w.shape)
            k += w.size
            self.biases[idx] = params[k : k + b.size]
            k += b.size
        if k != params.size:
            raise ValueError("parameter vector does not match network shape")

    def forward(self, x: np.ndarray):
        """Batched forward pass; returns (output, activation cache)."""
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        cache = [x]
        for idx in range(self.n_layers):
            z = cache[-1] @ self.weights[idx] + self.biases[idx]
            if idx < self.n_layers - 1:
                z = np.maximum(z, 0.0)
            cache.append(z)
        return cache[-1], cache

    def backward(self, cache, grad_out: np.ndarray) -> np.ndarray:
        """Gradient of sum(grad_out * output) in packed parameter order."""
        grads_w = [None] * self.n_layers
        grads_b = [None] * self.n_layers
        delta = np.atleast_2d(grad_out)
        for idx in range(self.n_layers - 1, -1, -1):
            if idx < self.n_layers - 1:
                # ReLU mask of this layer's post-activation output
                delta = delta * (cache[idx + 1] > 0.0)
            grads_w[idx] = cache[idx].T @ delta
            grads_b[idx] = delta.sum(axis=0)
            if idx > 0:
                delta = delta @ self.weights[idx].T
        parts = []
        for gw, gb in zip(grads_w, grads_b):
            parts.append(gw.ravel())
            parts.append(gb)
        return np.concatenate(parts)


class MlpDecoder:
    """Trained pattern-to-parameters network bound to one array layout."""

    def __init__(self, mlp: Mlp, architecture: str, cfg: ArrayConfig,
                 training_loss: float = float("nan"),
                 trajectory: tuple[float, ...] = ()):
        if architecture not in ("digital", "hybrid"):
            raise ValueError("decoder heads support digital or hybrid output")
        layout = layout_for(architecture, cfg)
        if mlp.widths[0] != N_FEATURES or mlp.widths[-1] != layout.size:
            raise ValueError(
                f"network widths {mlp.widths} do not map {N_FEATURES} features "
                f"to {layout.size} parameters"
            )
        self.mlp = mlp
        self.architecture = architecture
        self.cfg = cfg
        self.layout = layout
        self.training_loss = training_loss
        self.trajectory = trajectory

    def to_json_dict(self) -> dict:
        layers = []
        for w, b in zip(self.mlp.weights, self.mlp.biases):
            layers.append({
                "weight_b64": base64.b64encode(
                    np.ascontiguousarray(w, dtype="<f8").tobytes()).decode("ascii"),
                "bias_b64": base64.b64encode(
                    np.ascontiguousarray(b, dtype="<f8").tobytes()).decode("ascii"),
            })
        return {
            "architecture": self.architecture,
            "widths": list(self.mlp.widths),
            "array": {
                "n_y": self.cfg.n_y,
                "n_z": self.cfg.n_z,
                "spacing": self.cfg.spacing,
                "wavelength": self.cfg.wavelength,
                "n_rf": self.cfg.n_rf,
            },
            "training_loss": self.training_loss,
            "layers": layers,
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "MlpDecoder":
        widths = tuple(data["widths"])
        mlp = Mlp(widths, np.random.default_rng(0))
        for idx, layer in enumerate(data["layers"]):
            w = np.frombuffer(base64.b64decode(layer["weight_b64"]), dtype="<f8")
            b = np.frombuffer(base64.b64decode(layer["bias_b64"]), dtype="<f8")
            mlp.weights[idx] = w.reshape(widths[idx], widths[idx + 1]).copy()
            mlp.biases[idx] = b.copy()
        a = data["array"]
        cfg = ArrayConfig(n_y=a["n_y"], n_z=a["n_z"], spacing=a["spacing"],
                          wavelength=a["wavelength"], n_rf=a["n_rf"])
        return cls(mlp, data["architecture"], cfg,
                   training_loss=data.get("training_loss", float("nan")))


def save_decoder(dec: MlpDecoder, path) -> None:
    with open(path, "w") as fh:
        json.dump(dec.to_json_dict(), fh)
        fh.write("\n")


def load_decoder(path) -> MlpDecoder:
    with open(path) as fh:
        return MlpDecoder.from_json_dict(json.load(fh))


def decoder_widths(architecture: str, cfg: ArrayConfig) -> tuple[int, ...]:
    """Feature width, the three hidden widths, and the parameter head."""
    return (N_FEATURES,) + HIDDEN_WIDTHS + (layout_for(architecture, cfg).size,)


def train_decoder(targets, cfg: ArrayConfig, syn: SynthesisConfig,
                  widths: tuple[int, ...] | None = None) -> MlpDecoder:
    """Fit the decoder network on a small set of target patterns.

    Full-batch Adam on the mean composite loss across targets.  The forward
    pass is featurize -> network -> unpack -> pattern; the loss gradient in
    parameter order feeds straight into the network's backpropagation.  The
    best parameter vector seen (by mean loss) is kept.
    """
    targets = list(targets)
    if not targets:
        raise ValueError("decoder training needs at least one target")
    if syn.architecture not in ("digital", "hybrid"):
        raise ValueError("decoder heads support digital or hybrid output")
    grid = targets[0].grid
    for t in targets:
        if t.grid != grid:
            raise ValueError("all targets must share one grid")

    layout = layout_for(syn.architecture, cfg)
    if widths is None:
        widths = decoder_widths(syn.architecture, cfg)
    if widths[0] != N_FEATURES or widths[-1] != layout.size:
        raise ValueError("widths must run from the feature size to the layout size")

    features = np.stack([featurize(t) for t in targets])
    masks = [segment_regions(t) for t in targets]

    rng = np.random.default_rng(syn.seed)
    mlp = Mlp(widths, rng)
    params = mlp.pack()
    opt = Adam(params.size, syn.learning_rate, syn.betas, syn.epsilon)

    best_total = np.inf
    best_params = params
    trajectory = []
    n = len(targets)
    for epoch in range(syn.epochs):
        mlp.unpack(params)
        out, cache = mlp.forward(features)
        grad_out = np.empty_like(out)
        total = 0.0
        for idx, target in enumerate(targets):
            breakdown, g = _loss_and_gradient(
                cfg, grid, target.values, masks[idx], layout.unpack(out[idx])
            )
            total += breakdown.total
            grad_out[idx] = g
        total /= n
        if not np.isfinite(total):
            raise NonFiniteLossError(f"loss became non-finite at epoch {epoch}")
        if total < best_total:
            best_total = total
            best_params = params
        trajectory.append(best_total)
        params = opt.step(params, mlp.backward(cache, grad_out / n))

    mlp.unpack(best_params)
    return MlpDecoder(mlp, syn.architecture, cfg,
                      training_loss=best_total, trajectory=tuple(trajectory))


def decode(dec: MlpDecoder, target: BeamPattern, cfg: ArrayConfig,
           architecture: str | None = None) -> Beamformer:
    """One deterministic forward pass from a pattern to a beamformer.

    An analog beamformer can be requested from a hybrid-head decoder; the
    hybrid output is then projected onto the constant-modulus set.
    """
    if cfg != dec.cfg:
        raise ValueError("decoder was trained for a different array")
    wanted = architecture if architecture is not None else dec.architecture
    if wanted != dec.architecture and not (
        wanted == "analog" and dec.architecture == "hybrid"
    ):
        raise ValueError(
            f"decoder with {dec.architecture} head cannot produce {wanted} output"
        )
    out, _ = dec.mlp.forward(featurize(target))
    bf = dec.layout.unpack(out[0])
    if wanted == "analog":
        return analog_from_hybrid(bf, cfg)
    return bf
