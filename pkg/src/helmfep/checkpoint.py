"""JSON checkpoints: lossless, human-readable, validated on load."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .active import SalienceDistribution
from .grammar import Pattern, is_well_formed
from .network import GenerativeParams, NetworkShape, RecognitionParams

FORMAT_VERSION = 1
STAGES = ("init", "stage1", "stage2")


class CheckpointError(ValueError):
    """A checkpoint file failed validation."""


@dataclass
class Checkpoint:
    shape: NetworkShape
    gen: GenerativeParams
    rec: RecognitionParams
    stage: str = "init"
    seed: int = 0
    iteration: int = 0
    round: int = 0
    rng_state: dict | None = None
    salience: SalienceDistribution | None = None
    config: dict = field(default_factory=dict)
    trace: dict = field(default_factory=dict)

    def rng(self) -> np.random.Generator:
        """A generator positioned where the saved run stopped."""
        if self.rng_state is None:
            return np.random.default_rng(self.seed)
        bitgen = getattr(np.random, self.rng_state["bit_generator"])()
        bitgen.state = self.rng_state
        return np.random.Generator(bitgen)

    def to_dict(self) -> dict:
        out = {
            "format_version": FORMAT_VERSION,
            "stage": self.stage,
            "shape": list(self.shape.layer_sizes),
            "seed": self.seed,
            "iteration": self.iteration,
            "round": self.round,
            "rng_state": self.rng_state,
            "generative": {
                "weights": [w.tolist() for w in self.gen.weights],
                "biases": [b.tolist() for b in self.gen.biases],
                "top_bias": self.gen.top_bias.tolist(),
            },
            "recognition": {
                "weights": [w.tolist() for w in self.rec.weights],
                "biases": [b.tolist() for b in self.rec.biases],
            },
            "salience": None,
            "config": self.config,
            "trace": self.trace,
        }
        if self.salience is not None:
            out["salience"] = {
                "patterns": [p.bits for p in self.salience.patterns],
                "counts": [int(c) for c in self.salience.weights],
                "total": self.salience.total,
            }
        return out

    def dumps(self) -> str:
        # json writes floats with repr, the shortest round-trip decimal
        return json.dumps(self.to_dict(), indent=1) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())


def _require(cond, message):
    if not cond:
        raise CheckpointError(message)


def _array(value, shape, name):
    try:
        a = np.array(value, dtype=float)
    except (TypeError, ValueError):
        raise CheckpointError(f"{name}: not a numeric array") from None
    _require(a.shape == tuple(shape), f"{name}: shape {a.shape} conflicts with declared {tuple(shape)}")
    _require(bool(np.all(np.isfinite(a))), f"{name}: contains non-finite values")
    return a


def from_dict(d: dict) -> Checkpoint:
    """Rebuild a checkpoint, raising CheckpointError at the first broken invariant."""
    _require(isinstance(d, dict), "checkpoint: top level must be an object")
    for key in ("format_version", "stage", "shape", "generative", "recognition"):
        _require(key in d, f"checkpoint: missing field {key!r}")
    _require(d["format_version"] == FORMAT_VERSION,
             f"format_version: expected {FORMAT_VERSION}, got {d['format_version']!r}")
    _require(d["stage"] in STAGES, f"stage: {d['stage']!r} is not one of {STAGES}")
    try:
        shape = NetworkShape(tuple(d["shape"]))
    except (TypeError, ValueError) as exc:
        raise CheckpointError(f"shape: {exc}") from None
    sizes = shape.layer_sizes
    pairs = len(sizes) - 1

    g, r = d["generative"], d["recognition"]
    for part, name in ((g, "generative"), (r, "recognition")):
        _require(len(part.get("weights", [])) == pairs, f"{name}.weights: expected {pairs} matrices")
        _require(len(part.get("biases", [])) == pairs, f"{name}.biases: expected {pairs} vectors")
    gen = GenerativeParams(
        shape,
        [_array(g["weights"][m], (sizes[m + 1], sizes[m]), f"generative.weights[{m}]") for m in range(pairs)],
        [_array(g["biases"][m], (sizes[m],), f"generative.biases[{m}]") for m in range(pairs)],
        _array(g.get("top_bias"), (sizes[-1],), "generative.top_bias"),
    )
    rec = RecognitionParams(
        shape,
        [_array(r["weights"][m], (sizes[m], sizes[m + 1]), f"recognition.weights[{m}]") for m in range(pairs)],
        [_array(r["biases"][m], (sizes[m + 1],), f"recognition.biases[{m}]") for m in range(pairs)],
    )

    salience = None
    s = d.get("salience")
    if s is not None:
        patterns, counts = s.get("patterns", []), s.get("counts", [])
        _require(len(patterns) == len(counts) > 0, "salience: patterns and counts must be non-empty and aligned")
        for p in patterns:
            _require(isinstance(p, str) and len(p) == sizes[0], f"salience: pattern {p!r} has wrong length")
            _require(is_well_formed(Pattern(p), sizes[0]), f"salience: pattern {p} is not well formed")
        _require(all(isinstance(c, int) and c >= 1 for c in counts), "salience: counts must be integers >= 1")
        salience = SalienceDistribution(patterns, counts)
        declared = s.get("total")
        _require(isinstance(declared, int), "salience.total: missing or not an integer")
        _require(abs(declared - salience.total) <= 1e-9 * salience.total,
                 f"salience.total: {declared} disagrees with the count sum {salience.total}")
    _require(d["stage"] != "stage2" or salience is not None, "salience: stage2 checkpoints must carry one")

    return Checkpoint(shape, gen, rec, d["stage"], int(d.get("seed", 0)), int(d.get("iteration", 0)),
                      int(d.get("round", 0)), d.get("rng_state"), salience,
                      d.get("config") or {}, d.get("trace") or {})


def loads(text: str) -> Checkpoint:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"checkpoint: not valid JSON ({exc.msg} at line {exc.lineno})") from None
    return from_dict(d)


def load(path) -> Checkpoint:
    return loads(Path(path).read_text())
