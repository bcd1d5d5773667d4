import math

import numpy as np
import pytest

from signedot.measures import SignedGridMeasure
from signedot.noise import (
    NoiseModel,
    add_noise,
    philox_generator,
    sample_batch,
    sample_zero_sum,
    standard_draw,
)


class TestNoiseModel:
    def test_validation(self):
        with pytest.raises(ValueError):
            NoiseModel(8, 0.0)
        with pytest.raises(ValueError):
            NoiseModel(1, 0.1)
        with pytest.raises(ValueError):
            NoiseModel(8, 0.1, seed=-1)

    def test_covariance_matrix(self):
        m = NoiseModel(4, 0.5)
        C = m.covariance()
        assert C.shape == (16, 16)
        np.testing.assert_allclose(np.diag(C), 0.25)
        assert C[0, 1] == pytest.approx(-0.25 / 15)
        np.testing.assert_allclose(C.sum(axis=1), 0.0, atol=1e-15)
        np.testing.assert_allclose(NoiseModel(4, 0.5, iid=True).covariance(), 0.25 * np.eye(16))


class TestDraws:
    def test_zero_sum(self):
        model = NoiseModel(16, 0.3, seed=7)
        for t in range(20):
            eps = sample_zero_sum(model, t)
            assert abs(eps.total_mass) <= 1e-12 * 16 * 0.3

    def test_reproducible_and_order_free(self):
        a = standard_draw(8, seed=3, trial=5, stream=1)
        for t in range(5):
            standard_draw(8, seed=3, trial=t, stream=1)
        b = standard_draw(8, seed=3, trial=5, stream=1)
        np.testing.assert_array_equal(a, b)

    def test_streams_trials_seeds_differ(self):
        base = standard_draw(8, 0, 0, 0)
        for other in (standard_draw(8, 0, 0, 1), standard_draw(8, 0, 1, 0), standard_draw(8, 1, 0, 0)):
            assert not np.allclose(base, other)

    def test_philox_key_layout(self):
        g = philox_generator(11, 4, 2)
        state = g.bit_generator.state["state"]
        np.testing.assert_array_equal(state["key"], [11, 4])
        np.testing.assert_array_equal(state["counter"], [0, 2, 0, 0])

    def test_negative_indices_rejected(self):
        with pytest.raises(ValueError):
            philox_generator(0, -1)

    def test_moments(self):
        n, sigma, trials = 4, 0.2, 40000
        X = sample_batch(NoiseModel(n, sigma, seed=1), trials)
        m = n * n
        var = X.var(axis=0).mean()
        assert var == pytest.approx(sigma**2, rel=0.02)
        C = np.cov(X, rowvar=False)
        off = C[~np.eye(m, dtype=bool)].mean()
        assert off == pytest.approx(-sigma**2 / (m - 1), rel=0.05)

    def test_iid_draws_do_not_sum_to_zero(self):
        model = NoiseModel(8, 1.0, iid=True)
        sums = [sample_zero_sum(model, t).total_mass for t in range(50)]
        assert np.std(sums) == pytest.approx(8.0, rel=0.3)

    def test_add_noise(self):
        mu = SignedGridMeasure.point_mass(4, (1, 1))
        eps = sample_zero_sum(NoiseModel(4, 0.1), 0)
        noisy = add_noise(mu, eps)
        np.testing.assert_array_equal(noisy.values, mu.values + eps.values)
        assert noisy.total_mass == pytest.approx(1.0, abs=1e-14)

    def test_expected_positive_part(self):
        # E sum eps_+ = m sigma / sqrt(2 pi) for marginal variance sigma^2
        n, sigma = 16, 1.0
        X = sample_batch(NoiseModel(n, sigma, seed=2), 2000)
        mean_pos = np.maximum(X, 0).sum(axis=1).mean()
        assert mean_pos == pytest.approx(n * n * sigma / math.sqrt(2 * math.pi), rel=0.01)
        assert (X**2).sum(axis=1).mean() == pytest.approx(n * n * sigma**2, rel=0.01)
