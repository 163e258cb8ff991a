import unittest

import numpy as np
from scipy.optimize import linear_sum_assignment, linprog

from core.errors import InputError
from core.metrics import (EmpiricalDistribution, PCAProjection, cdf_points, categorical_ks, centroid_distance,
                          emd_1d, emd_categorical, fidelity_report, ks_stat, normalized_emd, pca_overlay,
                          pca_project)
from tests.support import make_table


def assignment_emd(a, b):
    """W1 by optimal matching of equal-size replicated samples."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    size = np.lcm(len(a), len(b))
    a_rep, b_rep = np.repeat(a, size // len(a)), np.repeat(b, size // len(b))
    cost = np.abs(a_rep[:, None] - b_rep[None, :])
    rows, cols = linear_sum_assignment(cost)
    return cost[rows, cols].mean()


def transport_emd(a, b):
    """Categorical EMD with unit ground cost, solved as a linear program."""
    support = sorted(set(a) | set(b))
    k = len(support)
    cost = np.array([[0.0 if i == j else 1.0 for j in range(k)] for i in range(k)]).ravel()
    equalities, targets = [], []
    for i, c in enumerate(support):
        row = np.zeros((k, k))
        row[i, :] = 1.0
        equalities.append(row.ravel())
        targets.append(a.get(c, 0.0))
        col = np.zeros((k, k))
        col[:, i] = 1.0
        equalities.append(col.ravel())
        targets.append(b.get(c, 0.0))
    return linprog(cost, A_eq=np.array(equalities), b_eq=np.array(targets), bounds=(0, None)).fun


def frequencies(points):
    values, counts = np.unique(points, return_counts=True)
    return {f"c{v}": c / counts.sum() for v, c in zip(values, counts)}


class TestEMD(unittest.TestCase):
    def test_shifted_points(self):
        self.assertAlmostEqual(emd_1d([0, 1, 2], [1, 2, 3]), 1.0)
        self.assertAlmostEqual(emd_1d([0.0], [5.0]), 5.0)
        self.assertEqual(emd_1d([1, 2, 3], [3, 1, 2]), 0.0)

    def test_matches_optimal_assignment(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            a, b = rng.normal(size=4), rng.exponential(size=6)
            self.assertAlmostEqual(emd_1d(a, b), assignment_emd(a, b), delta=1e-9)

    def test_small_integer_samples_match_assignment(self):
        # Few distinct values, so most pairs carry ties
        rng = np.random.default_rng(7)
        for _ in range(1000):
            a = rng.integers(0, 4, rng.integers(1, 9))
            b = rng.integers(0, 4, rng.integers(1, 9))
            self.assertAlmostEqual(emd_1d(a, b), assignment_emd(a, b), delta=1e-9)

    def test_tied_points(self):
        self.assertAlmostEqual(emd_1d([0, 0, 1, 1], [0, 1, 1, 1]), 0.25)

    def test_categorical_is_total_variation(self):
        self.assertAlmostEqual(emd_categorical({'a': 0.5, 'b': 0.5}, {'a': 0.2, 'b': 0.8}), 0.3)
        self.assertAlmostEqual(emd_categorical({'a': 1.0}, {'b': 1.0}), 1.0)

    def test_categorical_matches_transport(self):
        rng = np.random.default_rng(1)
        for _ in range(5):
            p, q = rng.dirichlet(np.ones(4)), rng.dirichlet(np.ones(4))
            a = dict(zip('wxyz', p))
            b = dict(zip('wxyz', q))
            self.assertAlmostEqual(emd_categorical(a, b), transport_emd(a, b), delta=1e-7)

    def test_categorical_small_samples_match_transport(self):
        rng = np.random.default_rng(8)
        for _ in range(1000):
            a = frequencies(rng.integers(0, 4, rng.integers(1, 9)))
            b = frequencies(rng.integers(0, 4, rng.integers(1, 9)))
            self.assertAlmostEqual(emd_categorical(a, b), transport_emd(a, b), delta=1e-7)

    def test_metric_properties(self):
        rng = np.random.default_rng(2)
        a, b, c = rng.normal(size=50), rng.normal(1.0, size=40), rng.normal(-1.0, 2.0, size=30)
        self.assertAlmostEqual(emd_1d(a, b), emd_1d(b, a))
        self.assertEqual(emd_1d(a, a), 0.0)
        self.assertGreater(emd_1d(a, b), 0.0)
        self.assertLessEqual(emd_1d(a, c), emd_1d(a, b) + emd_1d(b, c) + 1e-12)

    def test_empty_sample(self):
        with self.assertRaises(InputError):
            emd_1d([], [1.0])

    def test_normalized_by_real_range(self):
        real = make_table({'x': np.array([0.0, 10.0])}).column('x')
        synth = make_table({'x': np.array([1.0, 11.0])}).column('x')
        self.assertAlmostEqual(normalized_emd(real, synth, 'continuous'), 0.1)

    def test_normalized_constant_column_is_raw(self):
        real = make_table({'x': np.array([2.0, 2.0])}).column('x')
        synth = make_table({'x': np.array([3.0, 3.0])}).column('x')
        self.assertAlmostEqual(normalized_emd(real, synth, 'continuous'), 1.0)


class TestKS(unittest.TestCase):
    def test_identical_and_disjoint(self):
        self.assertEqual(ks_stat([1, 2, 3], [1, 2, 3]), 0.0)
        self.assertEqual(ks_stat([1, 2, 3], [4, 5, 6]), 1.0)

    def test_tied_points(self):
        self.assertAlmostEqual(ks_stat([0, 1], [0, 2]), 0.5)

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(3)
        a, b = rng.normal(size=200), rng.normal(0.3, size=150)
        self.assertAlmostEqual(ks_stat(a, b), ks_stat(np.exp(a), np.exp(b)))

    def test_categorical(self):
        self.assertAlmostEqual(categorical_ks({'a': 0.5, 'b': 0.5}, {'a': 0.2, 'b': 0.8}), 0.3)
        self.assertEqual(categorical_ks({'a': 1.0}, {'a': 1.0}), 0.0)


class TestCDF(unittest.TestCase):
    def test_points(self):
        self.assertEqual(cdf_points([3, 1, 2, 2]), [(1.0, 0.25), (2.0, 0.75), (3.0, 1.0)])

    def test_single_value(self):
        self.assertEqual(cdf_points([7.5]), [(7.5, 1.0)])

    def test_distribution_from_series(self):
        table = make_table({'g': np.array(['b', 'a', 'a', 'b'])})
        dist = EmpiricalDistribution.from_series(table.column('g'), 'discrete')
        self.assertEqual(dist.probabilities, {'a': 0.5, 'b': 0.5})


class TestFidelity(unittest.TestCase):
    def test_identical_tables(self):
        table = make_table({'x': np.arange(20, dtype=float), 'g': np.array(['a', 'b'] * 10)})
        report = fidelity_report(table, table)
        self.assertEqual(report.mean_ks, 0.0)
        self.assertEqual(report.mean_emd, 0.0)
        self.assertEqual(set(report.to_dict()['attributes']), {'x', 'g'})


class TestPCA(unittest.TestCase):
    def test_points_on_a_line(self):
        t = np.linspace(0.0, 1.0, 100)
        table = make_table({'a': t, 'b': 2.0 * t + 1.0, 'c': -t})
        projection = PCAProjection(2).fit(table)
        self.assertGreaterEqual(projection.explained_variance_ratio[0], 0.99)

    def test_isotropic_cloud(self):
        values = np.random.default_rng(4).normal(size=(5000, 2))
        projection = PCAProjection(2).fit(make_table({'a': values[:, 0], 'b': values[:, 1]}))
        first, second = projection.explained_variance_ratio
        self.assertAlmostEqual(first / second, 1.0, delta=0.1)

    def test_identical_tables_overlap(self):
        rng = np.random.default_rng(5)
        table = make_table({'a': rng.normal(size=50), 'g': rng.choice(['x', 'y'], 50)})
        overlay = pca_overlay(table, table)
        real = overlay[overlay['source'] == 'real'][['pc1', 'pc2']].to_numpy()
        synth = overlay[overlay['source'] == 'synthetic'][['pc1', 'pc2']].to_numpy()
        np.testing.assert_array_equal(real, synth)
        self.assertEqual(centroid_distance(overlay), 0.0)

    def test_degenerate_columns_padded(self):
        table = make_table({'a': np.arange(10, dtype=float), 'b': np.full(10, 4.0)})
        coords = pca_project(table, dims=2)
        self.assertEqual(coords.shape, (10, 2))
        np.testing.assert_array_equal(coords[:, 1], 0.0)

    def test_shifted_synthetic_moves_centroid(self):
        rng = np.random.default_rng(6)
        real = make_table({'a': rng.normal(size=200), 'b': rng.normal(size=200)})
        synth = make_table({'a': rng.normal(3.0, 1.0, 200), 'b': rng.normal(size=200)})
        self.assertGreater(centroid_distance(pca_overlay(real, synth)), 2.0)


if __name__ == "__main__":
    unittest.main()
