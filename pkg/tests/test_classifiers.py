import unittest

import numpy as np
import pandas as pd

from core.classifiers import CLASSIFIER_KINDS, train_classifier
from core.errors import ConfigError, ModelError


def blobs(n=400, seed=0):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, n)
    features = pd.DataFrame({
        'a': rng.normal(labels * 4.0, 1.0),
        'b': rng.normal(labels * -4.0, 1.0),
    })
    return features, pd.Series(np.where(labels == 1, 'yes', 'no'))


def xor(n=400, seed=1):
    rng = np.random.default_rng(seed)
    a, b = rng.uniform(-1, 1, n), rng.uniform(-1, 1, n)
    return pd.DataFrame({'a': a, 'b': b}), pd.Series(np.where((a > 0) ^ (b > 0), 'odd', 'even'))


class TestTrainClassifier(unittest.TestCase):
    def test_logistic_regression_separates_blobs(self):
        features, labels = blobs()
        model = train_classifier('LR', features, labels)
        self.assertGreaterEqual(model.score(features, labels), 0.95)
        self.assertEqual(model.classes, ['no', 'yes'])

    def test_tree_learns_xor(self):
        features, labels = xor()
        tree = train_classifier('DT', features, labels, params={'max_depth': 20, 'min_leaf': 1})
        self.assertEqual(tree.score(features, labels), 1.0)
        linear = train_classifier('LR', features, labels)
        self.assertLessEqual(linear.score(features, labels), 0.7)

    def test_tree_respects_limits(self):
        features, labels = xor()
        tree = train_classifier('DT', features, labels, params={'max_depth': 3, 'min_leaf': 20})
        estimator = tree.pipeline.named_steps['model']
        self.assertLessEqual(estimator.get_depth(), 3)
        leaves = estimator.apply(tree.pipeline.named_steps['encode'].transform(features))
        self.assertGreaterEqual(np.bincount(leaves)[np.unique(leaves)].min(), 20)

    def test_forest_is_deterministic(self):
        features, labels = xor()
        first = train_classifier('RF', features, labels, seed=3).predict(features)
        second = train_classifier('RF', features, labels, seed=3).predict(features)
        np.testing.assert_array_equal(first, second)

    def test_boosting_loss_does_not_increase(self):
        features, labels = blobs(seed=2)
        model = train_classifier('GBC', features, labels, params={'n_stages': 30})
        loss = model.training_loss
        self.assertEqual(len(loss), 30)
        self.assertTrue((np.diff(loss) <= 1e-9).all())

    def test_mixed_features(self):
        features, labels = blobs(seed=4)
        features['colour'] = np.where(labels == 'yes', 'red', 'blue')
        features.loc[0, 'colour'] = None
        for kind in CLASSIFIER_KINDS:
            model = train_classifier(kind, features, labels, seed=5)
            self.assertGreaterEqual(model.score(features, labels), 0.95, kind)

    def test_unseen_category_at_predict(self):
        features, labels = blobs(seed=6)
        features['colour'] = 'red'
        model = train_classifier('LR', features, labels)
        features['colour'] = 'green'
        self.assertEqual(len(model.predict(features)), len(features))

    def test_unknown_kind(self):
        features, labels = blobs()
        with self.assertRaises(ConfigError):
            train_classifier('SVM', features, labels)

    def test_unknown_parameter(self):
        features, labels = blobs()
        with self.assertRaises(ConfigError):
            train_classifier('DT', features, labels, params={'depth': 3})

    def test_logistic_regression_takes_no_learning_rate(self):
        features, labels = blobs()
        with self.assertRaises(ConfigError):
            train_classifier('LR', features, labels, params={'learning_rate': 0.1})

    def test_too_few_rows(self):
        features, labels = blobs()
        with self.assertRaises(ModelError):
            train_classifier('LR', features.head(9), labels.head(9))

    def test_single_class(self):
        features, _ = blobs()
        with self.assertRaises(ModelError):
            train_classifier('LR', features, pd.Series(['yes'] * len(features)))


if __name__ == "__main__":
    unittest.main()
