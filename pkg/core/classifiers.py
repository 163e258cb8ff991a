# core/classifiers.py

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from sklearn.compose import ColumnTransformer
from sklearn.ensemble import GradientBoostingClassifier, RandomForestClassifier
from sklearn.impute import SimpleImputer
from sklearn.linear_model import LogisticRegression
from sklearn.pipeline import Pipeline, make_pipeline
from sklearn.preprocessing import OneHotEncoder, StandardScaler
from sklearn.tree import DecisionTreeClassifier

from config.settings import CLASSIFIER_DEFAULTS
from core.errors import ConfigError, ModelError

logger = logging.getLogger(__name__)

CLASSIFIER_KINDS = ('LR', 'DT', 'RF', 'GBC')
MIN_TRAINING_ROWS = 10
MISSING_TOKEN = '<missing>'


def _estimator(kind: str, params: Dict, seed: int, n_rows: int):
    if kind == 'LR':
        # mean log-loss + (l2 / 2)||w||^2 corresponds to C = 1 / (l2 * n)
        return LogisticRegression(C=1.0 / (params['l2'] * n_rows), max_iter=params['epochs'],
                                  random_state=seed)
    if kind == 'DT':
        return DecisionTreeClassifier(criterion='gini', max_depth=params['max_depth'],
                                      min_samples_leaf=params['min_leaf'], random_state=seed)
    if kind == 'RF':
        return RandomForestClassifier(n_estimators=params['n_trees'], max_features='sqrt',
                                      max_depth=params['max_depth'], min_samples_leaf=params['min_leaf'],
                                      bootstrap=True, random_state=seed)
    if kind == 'GBC':
        return GradientBoostingClassifier(n_estimators=params['n_stages'], max_depth=params['max_depth'],
                                          learning_rate=params['learning_rate'], random_state=seed)
    raise ConfigError(f"unknown classifier kind '{kind}' (expected one of {', '.join(CLASSIFIER_KINDS)})")


def _encoder(features: pd.DataFrame) -> ColumnTransformer:
    """z-score numeric columns, one-hot the rest."""
    numeric = list(features.select_dtypes(include='number').columns)
    categorical = [c for c in features.columns if c not in numeric]
    transformers = []
    if numeric:
        transformers.append(('num', make_pipeline(SimpleImputer(strategy='mean'), StandardScaler()), numeric))
    if categorical:
        transformers.append(('cat', make_pipeline(
            SimpleImputer(strategy='constant', fill_value=MISSING_TOKEN),
            OneHotEncoder(handle_unknown='ignore'),
        ), categorical))
    return ColumnTransformer(transformers)


def _prepare(features: pd.DataFrame) -> pd.DataFrame:
    frame = features.copy()
    for name in frame.columns:
        if not pd.api.types.is_numeric_dtype(frame[name]):
            frame[name] = frame[name].astype(object).where(frame[name].notna(), MISSING_TOKEN).astype(str)
    return frame


@dataclass
class Classifier:
    kind: str
    pipeline: Pipeline
    feature_columns: List[str]
    params: Dict
    seed: int

    @property
    def classes(self) -> List[str]:
        return [str(c) for c in self.pipeline.classes_]

    def predict(self, features: pd.DataFrame) -> np.ndarray:
        return self.pipeline.predict(_prepare(features[self.feature_columns]))

    def score(self, features: pd.DataFrame, labels: pd.Series) -> float:
        """Accuracy on the given rows."""
        predictions = self.predict(features)
        return float(np.mean(predictions == labels.astype(str).to_numpy()))

    @property
    def training_loss(self) -> Optional[np.ndarray]:
        """Per-stage training log-loss for GBC, None for other kinds."""
        estimator = self.pipeline.steps[-1][1]
        return getattr(estimator, 'train_score_', None)


def train_classifier(kind: str, features: pd.DataFrame, labels: pd.Series,
                     params: Optional[Dict] = None, seed: int = 0) -> Classifier:
    """Fit one of LR, DT, RF or GBC on a feature frame.

    Numeric columns are z-scored and the rest one-hot encoded inside the
    fitted pipeline, so predict takes raw frames.

    Raises:
        ModelError: fewer than 10 rows or a single label class
        ConfigError: unknown kind or hyperparameter
    """
    if kind not in CLASSIFIER_KINDS:
        raise ConfigError(f"unknown classifier kind '{kind}' (expected one of {', '.join(CLASSIFIER_KINDS)})")
    merged = dict(CLASSIFIER_DEFAULTS[kind])
    unknown = sorted(set(params or {}) - set(merged))
    if unknown:
        raise ConfigError(f"unknown {kind} parameters {unknown}")
    merged.update(params or {})

    labels = labels.astype(str)
    if len(features) < MIN_TRAINING_ROWS:
        raise ModelError(f"need at least {MIN_TRAINING_ROWS} training rows, got {len(features)}")
    if labels.nunique() < 2:
        raise ModelError("training labels contain a single class")

    prepared = _prepare(features)
    pipeline = Pipeline([
        ('encode', _encoder(prepared)),
        ('model', _estimator(kind, merged, seed, len(prepared))),
    ])
    pipeline.fit(prepared, labels.to_numpy())
    logger.debug(f"Trained {kind} on {len(prepared)} rows, {prepared.shape[1]} features")
    return Classifier(kind, pipeline, list(features.columns), merged, seed)
