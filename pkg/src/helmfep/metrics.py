"""Evaluation: generation accuracy, diversity, free-energy terms, divergence."""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

from .grammar import pattern_codes, valid_mask
from .network import (
    GenerativeParams,
    RecognitionParams,
    _data_array,
    generative_layer_log_terms,
    generative_pass,
    log_recognition_density,
    recognition_pass,
)


@dataclass
class EvalReport:
    accuracy: float
    n_samples: int
    distinct_valid: int
    dream_entropy: float
    coverage: float
    fe_mean: float
    fe_stderr: float
    kl_salience_uniform: float

    def to_dict(self) -> dict:
        return asdict(self)


def dream_histogram(gen: GenerativeParams, n: int, rng: np.random.Generator):
    """Draw ``n`` dreams; return their data-layer codes and validity flags."""
    data = generative_pass(gen, rng, n).data
    return pattern_codes(data), valid_mask(data)


def generation_accuracy(gen: GenerativeParams, n: int,
                        rng: np.random.Generator) -> tuple[float, int, float]:
    """Fraction of well-formed dreams, distinct valid patterns, dream entropy (nats)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    codes, ok = dream_histogram(gen, n, rng)
    counts = np.bincount(codes)
    freq = counts[counts > 0] / n
    entropy = float(-(freq * np.log(freq)).sum()) + 0.0
    return int(ok.sum()) / n, int(np.unique(codes[ok]).size), entropy


def _free_energy_terms(gen, rec, data, rng):
    state = recognition_pass(rec, data, rng)
    log_q = log_recognition_density(rec, state)
    terms = generative_layer_log_terms(gen, state)
    log_prior = sum(terms[1:])
    return log_q, log_prior, terms[0]


def fe_decomposition(gen: GenerativeParams, rec: RecognitionParams, data, n_samples: int,
                     rng: np.random.Generator) -> tuple[float, float]:
    """Split the free energy into complexity and accuracy terms.

    complexity = mean(log Q(α|d) - log P(α)) and
    accuracy_term = mean(log P(d|α)), so that complexity - accuracy_term
    is the free-energy estimate for the same samples.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    d = np.broadcast_to(_data_array(data), (n_samples, gen.shape.data_size))
    log_q, log_prior, log_lik = _free_energy_terms(gen, rec, d, rng)
    return float(np.mean(log_q - log_prior)), float(np.mean(log_lik))


def dataset_free_energy(gen: GenerativeParams, rec: RecognitionParams, data: np.ndarray,
                        rng: np.random.Generator) -> tuple[float, float]:
    """Mean and standard error of F over a batch of data rows, one sample each."""
    log_q, log_prior, log_lik = _free_energy_terms(gen, rec, np.asarray(data, dtype=float), rng)
    f = log_q - log_prior - log_lik
    if f.size < 2:
        return float(f.mean()), 0.0
    return float(f.mean()), float(f.std(ddof=1) / np.sqrt(f.size))


def kl_divergence_from_uniform(weights) -> float:
    w = np.asarray(weights, dtype=float)
    if np.all(w == w[0]):
        return 0.0
    n, total = w.size, w.sum()
    # x = q / u - 1; each summand u * ((1 + x) log(1 + x) - x) is non-negative
    x = (w * n - total) / total
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(x > -1, (1 + x) * np.log1p(x) - x, 1.0)
    return float(terms.sum() / n)


def kl_from_uniform(dist) -> float:
    """KL(salience || uniform over its support), in nats."""
    return kl_divergence_from_uniform(dist.weights)


def evaluate(gen: GenerativeParams, rec: RecognitionParams, wellformed_signs: np.ndarray,
             n: int, rng: np.random.Generator, salience=None,
             fe_samples: int = 1_000) -> EvalReport:
    """Full report; free energy is averaged over data drawn from the salience
    (uniform over the well-formed set when there is none)."""
    acc, distinct, entropy = generation_accuracy(gen, n, rng)
    if salience is None:
        idx = rng.integers(len(wellformed_signs), size=fe_samples)
        kl = 0.0
    else:
        idx = salience.sample_indices(rng, fe_samples)
        kl = kl_from_uniform(salience)
    fe, se = dataset_free_energy(gen, rec, wellformed_signs[idx], rng)
    return EvalReport(acc, n, distinct, entropy, distinct / len(wellformed_signs), fe, se, kl)
