"""Stochastic binary Helmholtz machine: parameters, passes and densities.

Layers are stored bottom-up in Python lists: index 0 is the data layer and
index ``M - 1`` the top layer.  Activities live in {-1, +1}.

Every pass accepts either a single pattern (1-d arrays per layer) or a batch
(2-d arrays, one row per sample); the last axis always indexes neurons.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

DEFAULT_LAYER_SIZES = (10, 8, 5, 3)


class ShapeError(ValueError):
    """Raised when array dimensions disagree with the network shape."""


@dataclass(frozen=True)
class NetworkShape:
    layer_sizes: tuple[int, ...] = DEFAULT_LAYER_SIZES

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        if len(sizes) < 2:
            raise ShapeError("a Helmholtz machine needs at least two layers")
        if any(s < 1 for s in sizes):
            raise ShapeError(f"layer sizes must be positive, got {sizes}")
        object.__setattr__(self, "layer_sizes", sizes)

    @property
    def n_layers(self) -> int:
        return len(self.layer_sizes)

    @property
    def data_size(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_hidden(self) -> int:
        return sum(self.layer_sizes[1:])

    @property
    def n_units(self) -> int:
        return sum(self.layer_sizes)


def _check_finite(arrays, what):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise ValueError(f"{what} contains non-finite entries")


@dataclass
class GenerativeParams:
    """Top-down parameters.

    ``weights[m]`` maps layer ``m + 1`` to layer ``m`` and has shape
    (size[m + 1], size[m]); ``biases[m]`` has length size[m].  The top layer
    is driven by a constant +1 unit through ``top_bias``.
    """

    shape: NetworkShape
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    top_bias: np.ndarray

    def __post_init__(self):
        sizes = self.shape.layer_sizes
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise ShapeError("generative parameter lists must have one entry per layer pair")
        for m, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (sizes[m + 1], sizes[m]):
                raise ShapeError(f"generative weights[{m}] has shape {w.shape}, "
                                 f"expected {(sizes[m + 1], sizes[m])}")
            if b.shape != (sizes[m],):
                raise ShapeError(f"generative biases[{m}] has shape {b.shape}, expected {(sizes[m],)}")
        if self.top_bias.shape != (sizes[-1],):
            raise ShapeError(f"top_bias has shape {self.top_bias.shape}, expected {(sizes[-1],)}")
        _check_finite(self.arrays(), "generative parameters")

    @classmethod
    def zeros(cls, shape: NetworkShape) -> "GenerativeParams":
        s = shape.layer_sizes
        return cls(shape,
                   [np.zeros((s[m + 1], s[m])) for m in range(len(s) - 1)],
                   [np.zeros(s[m]) for m in range(len(s) - 1)],
                   np.zeros(s[-1]))

    def arrays(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases, self.top_bias]

    def copy(self) -> "GenerativeParams":
        return GenerativeParams(self.shape, [w.copy() for w in self.weights],
                                [b.copy() for b in self.biases], self.top_bias.copy())


@dataclass
class RecognitionParams:
    """Bottom-up parameters.

    ``weights[m]`` maps layer ``m`` to layer ``m + 1`` with shape
    (size[m], size[m + 1]); ``biases[m]`` has length size[m + 1].
    """

    shape: NetworkShape
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self):
        sizes = self.shape.layer_sizes
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise ShapeError("recognition parameter lists must have one entry per layer pair")
        for m, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (sizes[m], sizes[m + 1]):
                raise ShapeError(f"recognition weights[{m}] has shape {w.shape}, "
                                 f"expected {(sizes[m], sizes[m + 1])}")
            if b.shape != (sizes[m + 1],):
                raise ShapeError(f"recognition biases[{m}] has shape {b.shape}, "
                                 f"expected {(sizes[m + 1],)}")
        _check_finite(self.arrays(), "recognition parameters")

    @classmethod
    def zeros(cls, shape: NetworkShape) -> "RecognitionParams":
        s = shape.layer_sizes
        return cls(shape,
                   [np.zeros((s[m], s[m + 1])) for m in range(len(s) - 1)],
                   [np.zeros(s[m + 1]) for m in range(len(s) - 1)])

    def arrays(self) -> list[np.ndarray]:
        return [*self.weights, *self.biases]

    def copy(self) -> "RecognitionParams":
        return RecognitionParams(self.shape, [w.copy() for w in self.weights],
                                 [b.copy() for b in self.biases])


@dataclass
class CompleteState:
    """One joint ±1 assignment (or a batch of them) to every layer.

    ``layers[0]`` is the data ``d``; ``layers[1:]`` are the hidden causes.
    """

    layers: list[np.ndarray] = field(default_factory=list)

    @property
    def data(self) -> np.ndarray:
        return self.layers[0]

    @property
    def hidden(self) -> list[np.ndarray]:
        return self.layers[1:]

    def validate(self, shape: NetworkShape) -> None:
        if len(self.layers) != shape.n_layers:
            raise ShapeError(f"state has {len(self.layers)} layers, shape has {shape.n_layers}")
        for m, (s, n) in enumerate(zip(self.layers, shape.layer_sizes)):
            if s.shape[-1] != n:
                raise ShapeError(f"layer {m} has {s.shape[-1]} units, expected {n}")
            if not np.all(np.abs(s) == 1):
                raise ValueError(f"layer {m} has activities outside {{-1, +1}}")


def activation(weights, prev_activities, bias):
    """Weighted sum of the parent activities plus bias."""
    w = np.asarray(weights, dtype=float)
    s = np.asarray(prev_activities, dtype=float)
    if w.shape[0] != s.shape[-1]:
        raise ShapeError(f"weights have {w.shape[0]} rows but {s.shape[-1]} parent activities")
    return s @ w + bias


def unit_probability(a):
    """Probability that a unit with activation ``a`` fires +1 (overflow-safe sigmoid)."""
    return expit(a)


def log_unit_likelihood(a, s):
    """log P(s | a) for s in {-1, +1}: equals -log(1 + exp(-s a))."""
    return -np.logaddexp(0.0, -s * a)


def _sample(p, rng):
    return np.where(rng.random(np.shape(p)) < p, 1.0, -1.0)


def _data_array(data) -> np.ndarray:
    if hasattr(data, "sign_form"):
        return data.sign_form
    return np.asarray(data, dtype=float)


def recognition_pass(rec: RecognitionParams, data, rng: np.random.Generator) -> CompleteState:
    """Sample hidden causes bottom-up given clamped data (a draw from Q(α|d))."""
    d = _data_array(data)
    if d.shape[-1] != rec.shape.data_size:
        raise ShapeError(f"data has {d.shape[-1]} bits, data layer has {rec.shape.data_size}")
    layers = [d]
    for w, b in zip(rec.weights, rec.biases):
        layers.append(_sample(expit(layers[-1] @ w + b), rng))
    return CompleteState(layers)


def generative_pass(gen: GenerativeParams, rng: np.random.Generator,
                    n: int | None = None) -> CompleteState:
    """Sample a dream top-down; ``n`` draws a batch of ``n`` dreams."""
    batch = () if n is None else (n,)
    top = _sample(np.broadcast_to(expit(gen.top_bias), batch + gen.top_bias.shape), rng)
    layers = [top]
    for w, b in zip(reversed(gen.weights), reversed(gen.biases)):
        layers.append(_sample(expit(layers[-1] @ w + b), rng))
    return CompleteState(layers[::-1])


def generative_activations(gen: GenerativeParams, state: CompleteState) -> list[np.ndarray]:
    """Top-down activations of every layer with the state's activities as parents."""
    s = state.layers
    acts = [s[m + 1] @ w + b for m, (w, b) in enumerate(zip(gen.weights, gen.biases))]
    acts.append(np.broadcast_to(gen.top_bias, s[-1].shape))
    return acts


def recognition_activations(rec: RecognitionParams, state: CompleteState) -> list[np.ndarray]:
    """Bottom-up activations of hidden layers 1..M-1 given the state's lower layers."""
    s = state.layers
    return [s[m] @ w + b for m, (w, b) in enumerate(zip(rec.weights, rec.biases))]


def clamped_generative_probabilities(gen: GenerativeParams, state: CompleteState) -> list[np.ndarray]:
    """Per-neuron top-down firing probabilities, layer 0 first; no sampling."""
    state.validate(gen.shape)
    return [expit(a) for a in generative_activations(gen, state)]


def recognition_probabilities(rec: RecognitionParams, state: CompleteState) -> list[np.ndarray]:
    """Per-neuron bottom-up firing probabilities for hidden layers 1..M-1."""
    state.validate(rec.shape)
    return [expit(a) for a in recognition_activations(rec, state)]


def generative_layer_log_terms(gen: GenerativeParams, state: CompleteState) -> list[np.ndarray]:
    """Per-layer contribution to log P(α, d), summed over neurons."""
    acts = generative_activations(gen, state)
    return [log_unit_likelihood(a, s).sum(axis=-1) for a, s in zip(acts, state.layers)]


def log_recognition_density(rec: RecognitionParams, state: CompleteState):
    """log Q(α|d), factorized over hidden neurons."""
    state.validate(rec.shape)
    acts = recognition_activations(rec, state)
    return sum(log_unit_likelihood(a, s).sum(axis=-1) for a, s in zip(acts, state.layers[1:]))


def log_generative_density(gen: GenerativeParams, state: CompleteState):
    """log P(α, d), factorized over all neurons with the top layer fed by unity."""
    state.validate(gen.shape)
    return sum(generative_layer_log_terms(gen, state))


def estimate_free_energy(gen: GenerativeParams, rec: RecognitionParams, data,
                         n_samples: int, rng: np.random.Generator) -> tuple[float, float]:
    """Monte-Carlo estimate of F = E_Q[log Q(α|d) - log P(α, d)].

    Returns the sample mean and its standard error.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    d = np.broadcast_to(_data_array(data), (n_samples, gen.shape.data_size))
    state = recognition_pass(rec, d, rng)
    f = log_recognition_density(rec, state) - log_generative_density(gen, state)
    if n_samples == 1 or np.all(f == f[0]):
        return float(f[0]), 0.0
    return float(f.mean()), float(f.std(ddof=1) / np.sqrt(n_samples))
