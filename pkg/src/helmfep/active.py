"""Stage II: grammar-filtered sleep and salience-driven input sampling."""

from __future__ import annotations

from dataclasses import dataclass, asdict, field

import numpy as np

from .grammar import Pattern, is_well_formed, pattern_codes
from .metrics import generation_accuracy, kl_from_uniform
from .network import GenerativeParams, RecognitionParams, generative_pass, recognition_pass
from .training import (
    UpdateRule,
    _rule,
    apply_generative_update,
    apply_recognition_update,
    eval_rng,
)


class SalienceDistribution:
    """Count weights over the well-formed patterns.

    A pattern's sampling probability is its weight over the total.  Every
    weight starts at 1 and grows by 1 each time the pattern is accepted as a
    dream, so the total is always ``W`` plus the number of accepted dreams.
    """

    def __init__(self, patterns, weights=None):
        self.patterns = tuple(p if isinstance(p, Pattern) else Pattern(p) for p in patterns)
        if not self.patterns:
            raise ValueError("salience support must be non-empty")
        lengths = {len(p) for p in self.patterns}
        if len(lengths) != 1:
            raise ValueError("all patterns must have the same length")
        self.length = lengths.pop()
        for p in self.patterns:
            if not is_well_formed(p, self.length):
                raise ValueError(f"pattern {p} is not well formed")
        self._index = {p.bits: i for i, p in enumerate(self.patterns)}
        if len(self._index) != len(self.patterns):
            raise ValueError("salience support contains duplicates")
        self.signs = np.array([p.sign_form for p in self.patterns])
        self._by_code = np.full(1 << self.length, -1, dtype=np.int64)
        self._by_code[pattern_codes(self.signs)] = np.arange(len(self.patterns))

        if weights is None:
            self.weights = np.ones(len(self.patterns), dtype=np.int64)
        else:
            self.weights = np.array(weights, dtype=np.int64)
            if self.weights.shape != (len(self.patterns),):
                raise ValueError("one weight per pattern is required")
            if np.any(self.weights < 1):
                raise ValueError("salience weights must be at least 1")
        self.total = int(self.weights.sum())

    def __len__(self):
        return len(self.patterns)

    def index(self, p) -> int:
        bits = p.bits if isinstance(p, Pattern) else str(p)
        return self._index.get(bits, -1)

    def index_of_signs(self, signs) -> int:
        return int(self._by_code[pattern_codes(signs)])

    def weight(self, p) -> int:
        i = self.index(p)
        return int(self.weights[i]) if i >= 0 else 0

    def probability(self, p) -> float:
        return self.weight(p) / self.total

    def probabilities(self) -> np.ndarray:
        return self.weights / self.total

    def increment(self, i: int) -> None:
        self.weights[i] += 1
        self.total += 1

    def sample_indices(self, rng: np.random.Generator, n: int | None = None):
        cum = np.cumsum(self.weights)
        u = rng.random(n) * self.total
        return np.searchsorted(cum, u, side="right")

    def verify_total(self, rtol: float = 1e-9) -> None:
        actual = int(self.weights.sum())
        if abs(actual - self.total) > rtol * max(actual, 1):
            raise ValueError(f"salience total {self.total} disagrees with weight sum {actual}")

    def copy(self) -> "SalienceDistribution":
        return SalienceDistribution(self.patterns, self.weights.copy())


def salience_init(wellformed) -> SalienceDistribution:
    """Uniform salience: every well-formed pattern starts with weight 1."""
    return SalienceDistribution(wellformed)


def salience_update(dist: SalienceDistribution, generated) -> None:
    """Count one more occurrence of ``generated``; it must be well formed."""
    i = dist.index(generated)
    if i < 0:
        raise ValueError(f"{generated} is outside the well-formed support; filter dreams first")
    dist.increment(i)


def sample_input(dist: SalienceDistribution, rng: np.random.Generator) -> Pattern:
    return dist.patterns[dist.sample_indices(rng)]


@dataclass
class Stage2Config:
    rounds: int = 200
    wake_steps_per_round: int = 50
    sleep_attempts_per_round: int = 50
    max_dream_retries: int = 100
    learning_rate: float = 0.01
    # None: the wake phase uses learning_rate as well
    wake_learning_rate: float | None = None
    eval_samples: int = 10_000
    eval_interval: int = 1
    seed: int = 0
    update_rule: UpdateRule = UpdateRule.EXACT_GRADIENT

    def __post_init__(self):
        self.update_rule = UpdateRule(self.update_rule)
        for name in ("rounds", "wake_steps_per_round", "sleep_attempts_per_round",
                     "max_dream_retries", "eval_samples", "eval_interval"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not self.learning_rate >= 0:
            raise ValueError("learning_rate must be non-negative")
        if self.wake_learning_rate is not None and not self.wake_learning_rate >= 0:
            raise ValueError("wake_learning_rate must be non-negative")

    @property
    def wake_rate(self) -> float:
        return self.learning_rate if self.wake_learning_rate is None else self.wake_learning_rate

    def to_dict(self) -> dict:
        d = asdict(self)
        d["update_rule"] = self.update_rule.value
        return d


@dataclass
class RoundReport:
    round: int
    accepted: int
    exhausted: int
    accuracy: float | None = None
    distinct_valid: int | None = None
    kl_from_uniform: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def filtered_sleep_step(gen: GenerativeParams, rec: RecognitionParams,
                        dist: SalienceDistribution, cfg: Stage2Config,
                        rng: np.random.Generator) -> Pattern | None:
    """Dream until a well-formed pattern appears (at most ``max_dream_retries``).

    The accepted dream trains the recognition weights and is counted into the
    salience.  Returns the accepted pattern, or None when every retry was
    rejected, in which case nothing changes.
    """
    rule = _rule(cfg.update_rule)
    for _ in range(cfg.max_dream_retries):
        dream = generative_pass(gen, rng)
        i = dist.index_of_signs(dream.data)
        if i >= 0:
            apply_recognition_update(rec, dream, cfg.learning_rate, rule)
            dist.increment(i)
            return dist.patterns[i]
    return None


def stage2_round(gen: GenerativeParams, rec: RecognitionParams, dist: SalienceDistribution,
                 cfg: Stage2Config, rng: np.random.Generator, round_index: int = 0) -> RoundReport:
    """Wake steps on salience-sampled inputs, then filtered sleep attempts."""
    rule = _rule(cfg.update_rule)
    lr = cfg.wake_rate
    for _ in range(cfg.wake_steps_per_round):
        data = dist.signs[dist.sample_indices(rng)]
        apply_generative_update(gen, recognition_pass(rec, data, rng), lr, rule)
    accepted = 0
    for _ in range(cfg.sleep_attempts_per_round):
        if filtered_sleep_step(gen, rec, dist, cfg, rng) is not None:
            accepted += 1
    return RoundReport(round_index, accepted, cfg.sleep_attempts_per_round - accepted)


@dataclass
class Stage2Trace:
    rounds: list[RoundReport] = field(default_factory=list)

    def accuracies(self) -> list[float]:
        return [r.accuracy for r in self.rounds if r.accuracy is not None]

    def to_list(self) -> list[dict]:
        return [r.to_dict() for r in self.rounds]

    @classmethod
    def from_list(cls, rows) -> "Stage2Trace":
        return cls([RoundReport(**row) for row in rows])


def train_stage2(gen: GenerativeParams, rec: RecognitionParams, wellformed, cfg: Stage2Config,
                 rng: np.random.Generator | None = None,
                 salience: SalienceDistribution | None = None, start_round: int = 0):
    """Fine-tune stage-I parameters by active inference.

    Works on copies of the inputs.  Returns ``(gen, rec, salience, trace)``;
    each round's report carries the accuracy, distinct valid dreams and
    KL(salience || uniform) measured on an independent evaluation stream.
    """
    gen, rec = gen.copy(), rec.copy()
    dist = salience_init(wellformed) if salience is None else salience.copy()
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    trace = Stage2Trace()
    for r in range(start_round + 1, start_round + cfg.rounds + 1):
        report = stage2_round(gen, rec, dist, cfg, rng, r)
        if cfg.eval_samples > 0 and cfg.eval_interval > 0 and r % cfg.eval_interval == 0:
            acc, distinct, _ = generation_accuracy(gen, cfg.eval_samples, eval_rng(cfg.seed, 2, r))
            report.accuracy, report.distinct_valid = acc, distinct
            report.kl_from_uniform = kl_from_uniform(dist)
        trace.rounds.append(report)
    return gen, rec, dist, trace
