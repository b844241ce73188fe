"""Wake-sleep training with local delta rules."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy.special import expit

from .network import (
    CompleteState,
    GenerativeParams,
    NetworkShape,
    RecognitionParams,
    generative_pass,
    recognition_pass,
)


class UpdateRule(str, enum.Enum):
    """Which local delta rule drives the parameter updates.

    ``EXACT_GRADIENT`` uses the {0,1} form of the target, ``(1 + s) / 2``,
    which is the true derivative of the per-sample log density.
    ``PAPER_LITERAL`` plugs the ±1 activity straight into ``s - p``.
    The weighted and mean-activity variants are reserved names only.
    """

    EXACT_GRADIENT = "exact_gradient"
    PAPER_LITERAL = "paper_literal"
    WEIGHTED_DELTA = "weighted_delta"
    MEAN_ACTIVITY = "mean_activity"


_IMPLEMENTED_RULES = (UpdateRule.EXACT_GRADIENT, UpdateRule.PAPER_LITERAL)


def _rule(rule) -> UpdateRule:
    rule = UpdateRule(rule)
    if rule not in _IMPLEMENTED_RULES:
        raise NotImplementedError(f"update rule {rule.value!r} is reserved but not implemented")
    return rule


def delta_target(s, rule=UpdateRule.EXACT_GRADIENT):
    """The value a unit's firing probability is pulled towards."""
    if _rule(rule) is UpdateRule.EXACT_GRADIENT:
        return (1.0 + s) / 2.0
    return s


def generative_delta(s_parent, s_target, p_target, rule=UpdateRule.EXACT_GRADIENT):
    """Derivatives (dθ, db) of the per-sample objective for one connection.

    The update is applied as ``param -= learning_rate * d``.  Broadcasts over
    numpy arrays.  The same rule serves recognition weights with the roles of
    the layers exchanged.
    """
    err = delta_target(s_target, rule) - p_target
    return -s_parent * err, -err


@dataclass
class TrainConfig:
    learning_rate: float = 0.05
    stage1_iterations: int = 60_000
    eval_samples: int = 10_000
    seed: int = 0
    update_rule: UpdateRule = UpdateRule.EXACT_GRADIENT
    trace_interval: int = 5_000
    fe_samples: int = 1_000
    init_scale: float = 0.1

    def __post_init__(self):
        self.update_rule = UpdateRule(self.update_rule)
        if not self.learning_rate >= 0:
            raise ValueError("learning_rate must be non-negative")
        for name in ("stage1_iterations", "eval_samples", "trace_interval", "fe_samples"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["update_rule"] = self.update_rule.value
        return d


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    free_energy: float
    accuracy: float


@dataclass
class TrainTrace:
    records: list[TraceRecord] = field(default_factory=list)

    def append(self, record: TraceRecord) -> None:
        if self.records and record.iteration <= self.records[-1].iteration:
            raise ValueError("trace iterations must be strictly increasing")
        self.records.append(record)

    def to_list(self) -> list[dict]:
        return [asdict(r) for r in self.records]

    @classmethod
    def from_list(cls, rows) -> "TrainTrace":
        trace = cls()
        for row in rows:
            trace.append(TraceRecord(**row))
        return trace


def init_params(shape: NetworkShape, rng: np.random.Generator,
                scale: float = 0.1) -> tuple[GenerativeParams, RecognitionParams]:
    """Weights and biases uniform in [-scale, scale]; the top bias starts at zero."""
    gen = GenerativeParams.zeros(shape)
    rec = RecognitionParams.zeros(shape)
    for a in [*gen.weights, *gen.biases, *rec.weights, *rec.biases]:
        a[...] = rng.uniform(-scale, scale, a.shape)
    return gen, rec


def apply_generative_update(gen: GenerativeParams, state: CompleteState,
                            learning_rate: float, rule=UpdateRule.EXACT_GRADIENT) -> None:
    """Move every generative parameter one delta-rule step towards ``state``."""
    s = state.layers
    for m, (w, b) in enumerate(zip(gen.weights, gen.biases)):
        err = delta_target(s[m], rule) - expit(s[m + 1] @ w + b)
        w += learning_rate * np.outer(s[m + 1], err)
        b += learning_rate * err
    gen.top_bias += learning_rate * (delta_target(s[-1], rule) - expit(gen.top_bias))


def apply_recognition_update(rec: RecognitionParams, state: CompleteState,
                             learning_rate: float, rule=UpdateRule.EXACT_GRADIENT) -> None:
    """Move every recognition parameter one delta-rule step towards ``state``."""
    s = state.layers
    for m, (w, b) in enumerate(zip(rec.weights, rec.biases)):
        err = delta_target(s[m + 1], rule) - expit(s[m] @ w + b)
        w += learning_rate * np.outer(s[m], err)
        b += learning_rate * err


def wake_step(gen: GenerativeParams, rec: RecognitionParams, data, cfg: TrainConfig,
              rng: np.random.Generator, learning_rate: float | None = None) -> CompleteState:
    """Recognize ``data`` bottom-up, then fit the generative weights to the sample."""
    lr = cfg.learning_rate if learning_rate is None else learning_rate
    state = recognition_pass(rec, data, rng)
    apply_generative_update(gen, state, lr, cfg.update_rule)
    return state


def sleep_step(gen: GenerativeParams, rec: RecognitionParams, cfg: TrainConfig,
               rng: np.random.Generator, learning_rate: float | None = None) -> CompleteState:
    """Dream top-down, then fit the recognition weights to invert the dream."""
    lr = cfg.learning_rate if learning_rate is None else learning_rate
    dream = generative_pass(gen, rng)
    apply_recognition_update(rec, dream, lr, cfg.update_rule)
    return dream


def eval_rng(seed: int, *key: int) -> np.random.Generator:
    """Independent evaluation stream, derived from the run seed and a key."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _checkpoint(gen, rec, signs, cfg, iteration) -> TraceRecord:
    from .metrics import dataset_free_energy, generation_accuracy

    rng = eval_rng(cfg.seed, 1, iteration)
    acc, _, _ = generation_accuracy(gen, cfg.eval_samples, rng)
    data = signs[rng.integers(len(signs), size=cfg.fe_samples)]
    fe, _ = dataset_free_energy(gen, rec, data, rng)
    return TraceRecord(iteration, fe, acc)


def train_stage1(cfg: TrainConfig, wellformed, shape: NetworkShape | None = None,
                 rng: np.random.Generator | None = None,
                 params: tuple[GenerativeParams, RecognitionParams] | None = None,
                 trace: bool = True):
    """Plain wake-sleep on data drawn uniformly from ``wellformed``.

    One iteration is one wake step followed by one sleep step.  Returns
    ``(gen, rec, trace)``; ``rng`` is advanced in place so callers can
    persist its state.
    """
    signs = np.array([p.sign_form if hasattr(p, "sign_form") else p for p in wellformed], dtype=float)
    if len(signs) == 0:
        raise ValueError("the training set is empty")
    shape = shape or NetworkShape()
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    if params is None:
        gen, rec = init_params(shape, rng, cfg.init_scale)
    else:
        gen, rec = params[0].copy(), params[1].copy()
    rule = _rule(cfg.update_rule)
    lr = cfg.learning_rate

    record = trace and cfg.trace_interval > 0 and cfg.eval_samples > 0 and cfg.fe_samples > 0
    history = TrainTrace()
    if record:
        history.append(_checkpoint(gen, rec, signs, cfg, 0))
    for it in range(1, cfg.stage1_iterations + 1):
        state = recognition_pass(rec, signs[rng.integers(len(signs))], rng)
        apply_generative_update(gen, state, lr, rule)
        dream = generative_pass(gen, rng)
        apply_recognition_update(rec, dream, lr, rule)
        if record and (it % cfg.trace_interval == 0 or it == cfg.stage1_iterations):
            history.append(_checkpoint(gen, rec, signs, cfg, it))
    return gen, rec, history
