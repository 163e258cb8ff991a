import unittest

import numpy as np

from core.errors import ModelError
from core.mixture import (ModeModel, NormalizedCell, denormalize_values, fit_gmm, mode_denormalize,
                          mode_normalize, normalize_values)


def fixed_model(means, stds, weights=None):
    means = np.asarray(means, dtype=float)
    weights = np.full(len(means), 1.0 / len(means)) if weights is None else np.asarray(weights, dtype=float)
    return ModeModel(weights, means, np.asarray(stds, dtype=float), 0.0, (float(means.min()), float(means.max())),
                     1e-6)


class TestFitGMM(unittest.TestCase):
    def test_single_gaussian_picks_one_mode(self):
        values = np.random.default_rng(0).normal(0.0, 1.0, 2000)
        model = fit_gmm(values, k_max=5)
        self.assertEqual(model.k, 1)
        self.assertAlmostEqual(model.means[0], 0.0, delta=0.1)

    def test_bimodal_picks_two_modes(self):
        rng = np.random.default_rng(1)
        values = np.concatenate([rng.normal(-5.0, 1.0, 1000), rng.normal(5.0, 1.0, 1000)])
        model = fit_gmm(values, k_max=5)
        self.assertEqual(model.k, 2)
        self.assertAlmostEqual(model.means[0], -5.0, delta=0.3)
        self.assertAlmostEqual(model.means[1], 5.0, delta=0.3)
        self.assertAlmostEqual(model.weights.sum(), 1.0)

    def test_constant_column_is_degenerate(self):
        model = fit_gmm(np.full(50, 3.0))
        self.assertTrue(model.degenerate)
        self.assertEqual(model.k, 1)
        self.assertEqual(model.means[0], 3.0)
        self.assertEqual(model.stds[0], 1e-6)

    def test_em_never_decreases_likelihood(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            size = int(rng.integers(20, 150))
            centres = rng.normal(0.0, 5.0, 3)
            values = rng.normal(centres[rng.integers(0, 3, size)], rng.uniform(0.2, 2.0))
            model = fit_gmm(values, k_max=3, seed=int(rng.integers(1000)))
            trace = np.asarray(model.trace)
            slack = 1e-9 * np.maximum(1.0, np.abs(trace[:-1]))
            self.assertTrue((np.diff(trace) >= -slack).all())

    def test_same_seed_same_model(self):
        values = np.random.default_rng(3).gamma(2.0, 2.0, 500)
        first, second = fit_gmm(values, seed=4), fit_gmm(values, seed=4)
        np.testing.assert_array_equal(first.means, second.means)

    def test_empty_column(self):
        with self.assertRaises(ModelError):
            fit_gmm(np.array([np.nan, np.nan]))


class TestModeNormalization(unittest.TestCase):
    def setUp(self):
        self.model = fixed_model([0.0, 10.0], [1.0, 1.0])

    def test_value_at_mean(self):
        cell = mode_normalize(10.0, self.model, np.random.default_rng(0))
        self.assertEqual(cell, NormalizedCell(2, 0.0))

    def test_alpha_scaled_by_four_sigma(self):
        cell = mode_normalize(2.0, self.model, np.random.default_rng(0))
        self.assertEqual(cell.mode_id, 1)
        self.assertAlmostEqual(cell.alpha, 0.5)

    def test_alpha_is_clipped(self):
        model = fixed_model([0.0], [1.0])
        self.assertEqual(mode_normalize(100.0, model, np.random.default_rng(0)).alpha, 1.0)

    def test_denormalize(self):
        self.assertAlmostEqual(mode_denormalize(NormalizedCell(2, -0.25), self.model), 9.0)

    def test_bad_mode(self):
        with self.assertRaises(ModelError):
            mode_denormalize(NormalizedCell(3, 0.0), self.model)

    def test_reconstruction_within_clip(self):
        values = np.random.default_rng(5).normal(10.0, 1.0, 500)
        modes, alphas = normalize_values(values, self.model, np.random.default_rng(6))
        restored = denormalize_values(modes, alphas, self.model)
        inside = np.abs(values - 10.0) < 4.0
        np.testing.assert_allclose(restored[inside], values[inside])


if __name__ == "__main__":
    unittest.main()
