import math
import pickle

import numpy as np
import pytest
from scipy import stats

from helmfep.grammar import Pattern, pattern_codes
from helmfep.network import (
    CompleteState,
    GenerativeParams,
    NetworkShape,
    RecognitionParams,
    ShapeError,
    activation,
    clamped_generative_probabilities,
    estimate_free_energy,
    generative_pass,
    log_generative_density,
    log_recognition_density,
    recognition_pass,
    unit_probability,
)
from helmfep.training import init_params

from oracles import all_sign_vectors, literal_log_joint, literal_log_recognition

SHAPE = NetworkShape()
DATA = Pattern("1101101101")


def random_params(shape, seed, scale=1.0):
    return init_params(shape, np.random.default_rng(seed), scale)


def test_default_shape():
    assert SHAPE.layer_sizes == (10, 8, 5, 3)
    assert SHAPE.n_hidden == 16 and SHAPE.n_units == 26


@pytest.mark.parametrize("sizes", [(10,), (), (3, 0)])
def test_bad_shapes(sizes):
    with pytest.raises(ShapeError):
        NetworkShape(sizes)


def test_param_dimension_checks():
    gen = GenerativeParams.zeros(SHAPE)
    with pytest.raises(ShapeError):
        GenerativeParams(SHAPE, gen.weights[::-1], gen.biases, gen.top_bias)
    rec = RecognitionParams.zeros(SHAPE)
    with pytest.raises(ShapeError):
        RecognitionParams(SHAPE, rec.weights, rec.biases[:-1])
    bad = gen.copy()
    bad.biases[0][0] = np.nan
    with pytest.raises(ValueError):
        GenerativeParams(SHAPE, bad.weights, bad.biases, bad.top_bias)


class TestActivation:
    def test_zero_weights_leave_bias(self):
        assert activation(np.zeros((4, 1)), [1, -1, 1, 1], 0.7)[0] == 0.7

    def test_cancellation(self):
        assert activation(np.array([[1.0], [-1.0]]), [1, 1], 0.0)[0] == 0.0
        assert activation(np.array([[0.5], [0.5]]), [1, -1], 0.25)[0] == 0.25

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            activation(np.zeros((3, 1)), [1, 1], 0.0)


class TestUnitProbability:
    def test_values(self):
        assert unit_probability(0.0) == 0.5
        assert unit_probability(math.log(3)) == pytest.approx(0.75, abs=1e-15)
        a = 1.7
        assert unit_probability(a) + unit_probability(-a) == pytest.approx(1.0, abs=1e-12)

    def test_saturates_without_overflow(self):
        with np.errstate(over="raise"):
            p = unit_probability(np.array([-800.0, 800.0]))
        assert p[0] >= 0.0 and p[1] <= 1.0


class TestRecognitionPass:
    def test_zero_params_half(self):
        rec = RecognitionParams.zeros(SHAPE)
        state = recognition_pass(rec, np.tile(DATA.sign_form, (20_000, 1)), np.random.default_rng(0))
        assert np.array_equal(state.data[0], DATA.sign_form)
        hidden = np.concatenate(state.hidden, axis=1)
        frac = (hidden > 0).mean(axis=0)
        # 3σ binomial band at n = 20000
        assert np.all(np.abs(frac - 0.5) < 3 * 0.5 / math.sqrt(20_000) + 1e-3)

    def test_deterministic(self):
        _, rec = random_params(SHAPE, 1)
        a = recognition_pass(rec, DATA, np.random.default_rng(7))
        b = recognition_pass(rec, DATA, np.random.default_rng(7))
        assert pickle.dumps(a.layers) == pickle.dumps(b.layers)

    def test_saturated_bias(self):
        rec = RecognitionParams.zeros(SHAPE)
        rec.biases[0][2] = 20.0
        state = recognition_pass(rec, np.tile(DATA.sign_form, (100_000, 1)), np.random.default_rng(3))
        # P(-1) = 1 - σ(20) ≈ 2e-9, so none of 10^5 draws should be -1
        assert np.all(state.layers[1][:, 2] == 1.0)

    def test_activities_are_signs(self):
        _, rec = random_params(SHAPE, 2)
        state = recognition_pass(rec, DATA, np.random.default_rng(0))
        state.validate(SHAPE)

    def test_shape_error(self):
        with pytest.raises(ShapeError):
            recognition_pass(RecognitionParams.zeros(SHAPE), np.ones(9), np.random.default_rng(0))


class TestGenerativePass:
    def test_zero_params_uniform_data(self):
        gen = GenerativeParams.zeros(SHAPE)
        dreams = generative_pass(gen, np.random.default_rng(11), 100_000)
        counts = np.bincount(pattern_codes(dreams.data), minlength=1024)
        assert stats.chisquare(counts).pvalue > 0.001

    def test_top_bias_saturates(self):
        gen = GenerativeParams.zeros(SHAPE)
        gen.top_bias[:] = 20.0
        dreams = generative_pass(gen, np.random.default_rng(5), 100_000)
        assert np.all(dreams.layers[-1] == 1.0)

    def test_deterministic(self):
        gen, _ = random_params(SHAPE, 4)
        a = generative_pass(gen, np.random.default_rng(9))
        b = generative_pass(gen, np.random.default_rng(9))
        assert pickle.dumps(a.layers) == pickle.dumps(b.layers)

    def test_batch_shapes(self):
        gen, _ = random_params(SHAPE, 4)
        state = generative_pass(gen, np.random.default_rng(9), 7)
        assert [s.shape for s in state.layers] == [(7, 10), (7, 8), (7, 5), (7, 3)]


class TestClampedProbabilities:
    def test_zero_params(self):
        gen = GenerativeParams.zeros(SHAPE)
        state = generative_pass(gen, np.random.default_rng(0))
        probs = clamped_generative_probabilities(gen, state)
        assert all(np.all(p == 0.5) for p in probs)
        assert [p.shape for p in probs] == [(10,), (8,), (5,), (3,)]

    def test_single_weight(self):
        shape = NetworkShape((1, 1))
        gen = GenerativeParams.zeros(shape)
        gen.weights[0][0, 0] = 2.0
        probs = clamped_generative_probabilities(gen, CompleteState([np.array([1.0]), np.array([-1.0])]))
        assert probs[0][0] == pytest.approx(0.11920292202211755, rel=1e-12)
        assert probs[1][0] == 0.5

    def test_pure(self):
        gen, _ = random_params(SHAPE, 3)
        state = generative_pass(gen, np.random.default_rng(1))
        a = clamped_generative_probabilities(gen, state)
        b = clamped_generative_probabilities(gen, state)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))


class TestDensities:
    def test_zero_param_values(self):
        gen, rec = GenerativeParams.zeros(SHAPE), RecognitionParams.zeros(SHAPE)
        state = recognition_pass(rec, DATA, np.random.default_rng(0))
        assert log_recognition_density(rec, state) == pytest.approx(16 * math.log(0.5), abs=1e-12)
        assert log_generative_density(gen, state) == pytest.approx(26 * math.log(0.5), abs=1e-12)

    def test_match_literal_products(self):
        gen, rec = random_params(SHAPE, 8)
        for seed in range(20):
            state = recognition_pass(rec, DATA, np.random.default_rng(seed))
            assert log_generative_density(gen, state) == pytest.approx(
                literal_log_joint(gen, state.layers), abs=1e-10)
            assert log_recognition_density(rec, state) == pytest.approx(
                literal_log_recognition(rec, state.layers), abs=1e-10)

    def test_non_positive(self):
        gen, rec = random_params(SHAPE, 5, scale=3.0)
        for seed in range(50):
            state = generative_pass(gen, np.random.default_rng(seed))
            assert log_generative_density(gen, state) <= 0
            assert log_recognition_density(rec, state) <= 0

    def test_single_unit_normalizes(self):
        _, rec = random_params(SHAPE, 6)
        state = recognition_pass(rec, DATA, np.random.default_rng(0))
        # flip one top-layer unit: the two values' densities sum to the marginal
        layers_up = [s.copy() for s in state.layers]
        layers_dn = [s.copy() for s in state.layers]
        layers_up[-1][1], layers_dn[-1][1] = 1.0, -1.0
        both = (np.exp(log_recognition_density(rec, CompleteState(layers_up)))
                + np.exp(log_recognition_density(rec, CompleteState(layers_dn))))
        rest = [s.copy() for s in state.layers]
        rest[-1] = np.delete(rest[-1], 1)
        small = NetworkShape((10, 8, 5, 2))
        rec_small = RecognitionParams(small, [w.copy() for w in rec.weights[:-1]] + [np.delete(rec.weights[-1], 1, axis=1)],
                                      [b.copy() for b in rec.biases[:-1]] + [np.delete(rec.biases[-1], 1)])
        assert both == pytest.approx(np.exp(log_recognition_density(rec_small, CompleteState(rest))), rel=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_exhaustive_normalization_tiny(self, seed):
        shape = NetworkShape((2, 1))
        gen, rec = random_params(shape, seed, scale=2.0)
        total = sum(np.exp(log_generative_density(gen, CompleteState([d, a])))
                    for d in all_sign_vectors(2) for a in all_sign_vectors(1))
        assert total == pytest.approx(1.0, abs=1e-10)
        for d in all_sign_vectors(2):
            q = sum(np.exp(log_recognition_density(rec, CompleteState([d, a]))) for a in all_sign_vectors(1))
            assert q == pytest.approx(1.0, abs=1e-10)

    def test_state_validation(self):
        gen = GenerativeParams.zeros(SHAPE)
        with pytest.raises(ShapeError):
            log_generative_density(gen, CompleteState([np.ones(10), np.ones(8)]))
        with pytest.raises(ValueError):
            log_generative_density(gen, CompleteState([np.zeros(10), np.ones(8), np.ones(5), np.ones(3)]))


class TestFreeEnergy:
    @pytest.mark.parametrize("n", [1, 5, 100])
    def test_zero_param_closed_form(self, n):
        gen, rec = GenerativeParams.zeros(SHAPE), RecognitionParams.zeros(SHAPE)
        mean, se = estimate_free_energy(gen, rec, DATA, n, np.random.default_rng(n))
        assert abs(mean - 10 * math.log(2)) < 1e-12
        assert se == 0.0

    def test_deterministic(self):
        gen, rec = random_params(SHAPE, 2)
        a = estimate_free_energy(gen, rec, DATA, 200, np.random.default_rng(4))
        b = estimate_free_energy(gen, rec, DATA, 200, np.random.default_rng(4))
        assert a == b

    def test_stderr_scaling(self):
        gen, rec = random_params(SHAPE, 3, scale=1.0)
        ratios = []
        for t in range(20):
            _, se1 = estimate_free_energy(gen, rec, DATA, 2000, np.random.default_rng(100 + t))
            _, se2 = estimate_free_energy(gen, rec, DATA, 4000, np.random.default_rng(200 + t))
            ratios.append(se2 / se1)
        assert np.mean(ratios) == pytest.approx(1 / math.sqrt(2), rel=0.2)

    def test_rejects_zero_samples(self):
        with pytest.raises(ValueError):
            estimate_free_energy(GenerativeParams.zeros(SHAPE), RecognitionParams.zeros(SHAPE), DATA, 0,
                                 np.random.default_rng(0))
