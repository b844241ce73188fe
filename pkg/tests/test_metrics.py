import math

import numpy as np
import pytest

from helmfep.active import SalienceDistribution, salience_init
from helmfep.grammar import Pattern, wellformed_signs
from helmfep.metrics import (
    evaluate,
    fe_decomposition,
    generation_accuracy,
    kl_divergence_from_uniform,
    kl_from_uniform,
)
from helmfep.network import GenerativeParams, NetworkShape, RecognitionParams, estimate_free_energy
from helmfep.training import init_params

from oracles import FROZEN_W

SHAPE = NetworkShape()
DATA = Pattern("1110110111")


def test_zero_params_accuracy_matches_uniform():
    n = 100_000
    acc, distinct, entropy = generation_accuracy(GenerativeParams.zeros(SHAPE), n, np.random.default_rng(0))
    p = FROZEN_W / 1024
    assert abs(acc - p) < 3 * math.sqrt(p * (1 - p) / n)
    assert distinct == FROZEN_W
    assert entropy == pytest.approx(math.log(1024), abs=0.02)
    assert (acc * n) == int(acc * n)


def test_point_mass_generator():
    gen = GenerativeParams.zeros(SHAPE)
    gen.top_bias[:] = 50.0
    for b in gen.biases:
        b[:] = 50.0
    assert generation_accuracy(gen, 1000, np.random.default_rng(0)) == (1.0, 1, 0.0)


def test_fe_decomposition_zero_params():
    gen, rec = GenerativeParams.zeros(SHAPE), RecognitionParams.zeros(SHAPE)
    complexity, accuracy_term = fe_decomposition(gen, rec, DATA, 10, np.random.default_rng(0))
    assert complexity == 0.0
    assert accuracy_term == pytest.approx(10 * math.log(0.5), abs=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_fe_decomposition_identity(seed):
    gen, rec = init_params(SHAPE, np.random.default_rng(seed), 1.0)
    c, a = fe_decomposition(gen, rec, DATA, 500, np.random.default_rng(seed))
    f, _ = estimate_free_energy(gen, rec, DATA, 500, np.random.default_rng(seed))
    assert abs((c - a) - f) < 1e-12


def test_kl_values(wellformed):
    assert kl_from_uniform(salience_init(wellformed)) == 0.0
    W = len(wellformed)
    weights = np.ones(W, dtype=np.int64)
    weights[0] = 10**6
    assert kl_from_uniform(SalienceDistribution(wellformed, weights)) == pytest.approx(math.log(W), abs=0.01)


def test_kl_zero_iff_equal():
    assert kl_divergence_from_uniform([3, 3, 3]) == 0.0
    assert kl_divergence_from_uniform([3, 3, 4]) > 0.0
    assert kl_divergence_from_uniform([1, 2]) > 0.0


def test_evaluate_report(stage1_model, wellformed):
    gen, rec = stage1_model
    report = evaluate(gen, rec, wellformed_signs(), 5000, np.random.default_rng(0))
    assert report.n_samples == 5000
    assert 0 <= report.coverage <= 1
    assert report.coverage == report.distinct_valid / FROZEN_W
    assert report.kl_salience_uniform == 0.0
    assert report.fe_stderr > 0
    d = salience_init(wellformed)
    d.increment(0)
    report2 = evaluate(gen, rec, wellformed_signs(), 5000, np.random.default_rng(0), salience=d)
    assert report2.kl_salience_uniform > 0
    assert set(report.to_dict()) == {"accuracy", "n_samples", "distinct_valid", "dream_entropy", "coverage",
                                     "fe_mean", "fe_stderr", "kl_salience_uniform"}
