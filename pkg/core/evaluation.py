# core/evaluation.py
"""Train-on-synthetic, test-on-real utility evaluation."""

import logging
from dataclasses import dataclass
from typing import Dict, Sequence, Tuple

import numpy as np
import pandas as pd

from core.classifiers import CLASSIFIER_KINDS, train_classifier
from core.dataset import DISCRETE, Table
from core.errors import InputError
from utils.helpers import derive_seed

logger = logging.getLogger(__name__)


@dataclass
class UtilityEntry:
    real_accuracy: float
    synth_accuracy: float

    @property
    def delta(self) -> float:
        return self.synth_accuracy - self.real_accuracy


@dataclass
class UtilityReport:
    target: str
    entries: Dict[str, UtilityEntry]
    baseline: float
    test_rows: int
    test_digest: str
    seed: int

    def to_dict(self) -> Dict:
        return {
            'target': self.target,
            'baseline': self.baseline,
            'test_rows': self.test_rows,
            'test_digest': self.test_digest,
            'seed': self.seed,
            'classifiers': {
                kind: {'real_accuracy': e.real_accuracy, 'synth_accuracy': e.synth_accuracy,
                       'delta': e.delta}
                for kind, e in self.entries.items()
            },
        }


def _labelled(table: Table, target: str, role: str) -> Tuple[pd.DataFrame, pd.Series]:
    frame = table.frame[table.frame[target].notna()]
    dropped = len(table) - len(frame)
    if dropped:
        logger.warning(f"Dropped {dropped} {role} rows with missing '{target}'")
    return frame.drop(columns=[target]), frame[target].astype(str)


def frame_digest(frame: pd.DataFrame) -> str:
    """Content fingerprint of a frame, identical for identical cells."""
    return f"{int(pd.util.hash_pandas_object(frame, index=True).sum()) & 0xFFFFFFFFFFFF:012x}"


def tstr(synth: Table, real_train: Table, real_test: Table, target: str,
         kinds: Sequence[str] = CLASSIFIER_KINDS, seed: int = 0) -> UtilityReport:
    """Train each kind on real_train and on synth; score both on one real_test.

    The majority baseline is real_train's most frequent class scored on
    real_test.
    """
    for role, table in (('synthetic', synth), ('train', real_train), ('test', real_test)):
        if target not in table.schema.names:
            raise InputError(f"target missing from {role} table", column=target)
    if real_train.schema.kind_of(target) != DISCRETE:
        raise InputError("target must be a discrete column", column=target)
    if synth.schema.names != real_train.schema.names or real_test.schema.names != real_train.schema.names:
        raise InputError("tables do not share a schema")

    train_x, train_y = _labelled(real_train, target, 'train')
    synth_x, synth_y = _labelled(synth, target, 'synthetic')
    test_x, test_y = _labelled(real_test, target, 'test')

    majority = train_y.value_counts().sort_index().idxmax()
    baseline = float(np.mean(test_y.to_numpy() == majority))

    entries = {}
    for index, kind in enumerate(kinds):
        kind_seed = derive_seed(seed, index)
        on_real = train_classifier(kind, train_x, train_y, seed=kind_seed)
        on_synth = train_classifier(kind, synth_x, synth_y, seed=kind_seed)
        entries[kind] = UtilityEntry(on_real.score(test_x, test_y), on_synth.score(test_x, test_y))
        logger.info(f"{kind}: real {entries[kind].real_accuracy:.3f}, "
                    f"synthetic {entries[kind].synth_accuracy:.3f}")

    return UtilityReport(target, entries, baseline, len(test_y), frame_digest(real_test.frame), seed)


def split_record(train: Table, holdout: Table, holdout_fraction: float, seed: int) -> Dict:
    """What a report needs to show which rows were held out."""
    return {
        'holdout_fraction': holdout_fraction,
        'seed': seed,
        'train_rows': len(train),
        'holdout_rows': len(holdout),
        'train_digest': frame_digest(train.frame),
        'holdout_digest': frame_digest(holdout.frame),
    }
