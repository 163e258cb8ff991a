# core/attacks.py
"""
Privacy attacks against a synthetic table.

Attribute inference trains a classifier on the synthetic rows and asks it
to recover a sensitive attribute of real rows. Re-identification links
every real row to its nearest synthetic row over the quasi-identifiers and
checks whether the linked row discloses the sensitive attributes.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from sklearn.neighbors import NearestNeighbors

from config.settings import ATTACK_DEFAULTS
from core.classifiers import train_classifier
from core.dataset import CONTINUOUS, DISCRETE, Table
from core.errors import InputError
from core.sensitivity import SensitivityMap
from utils.helpers import substream

logger = logging.getLogger(__name__)

INFERENCE = 'attribute-inference'
REIDENTIFICATION = 'reidentification'

# One-hot mismatch weight: two differing categories cost 2 * 0.5 = 1 under L1
ONE_HOT_WEIGHT = 0.5


@dataclass
class AttackReport:
    kind: str
    targets: List[str]
    success_rate: float
    baseline: float
    seed: int
    levels: Dict[str, str] = field(default_factory=dict)
    settings: Dict = field(default_factory=dict)

    @property
    def advantage(self) -> float:
        return self.success_rate - self.baseline

    def to_dict(self) -> Dict:
        return {
            'attack': self.kind,
            'targets': list(self.targets),
            'success_rate': self.success_rate,
            'baseline': self.baseline,
            'advantage': self.advantage,
            'seed': self.seed,
            'levels': dict(self.levels),
            'settings': dict(self.settings),
        }


def _check_columns(names: Sequence[str], *tables: Table):
    for table in tables:
        absent = [n for n in names if n not in table.schema.names]
        if absent:
            raise InputError(f"columns {absent} not present in both tables")


def _levels(columns: Sequence[str], sensitivity_map: Optional[SensitivityMap]) -> Dict[str, str]:
    if sensitivity_map is None:
        return {}
    return {name: sensitivity_map.level(name).value for name in columns}


def attribute_inference_attack(synth: Table, real: Table, target: str, known: Sequence[str],
                               kind: str = ATTACK_DEFAULTS['classifier'], seed: int = 0,
                               sensitivity_map: Optional[SensitivityMap] = None) -> AttackReport:
    """Accuracy of a synth-trained known -> target classifier on real rows.

    Baseline is the share of real rows holding the real majority class.
    """
    known = list(known)
    if not known:
        raise InputError("attribute inference needs at least one known column")
    if target in known:
        raise InputError("target must not be among the known columns", column=target)
    _check_columns([target, *known], synth, real)
    if real.schema.kind_of(target) != DISCRETE:
        raise InputError("attribute inference is defined for discrete targets; bin the column first",
                         column=target)

    synth_rows = synth.frame[synth.frame[target].notna()]
    real_rows = real.frame[real.frame[target].notna()]
    classifier = train_classifier(kind, synth_rows[known], synth_rows[target], seed=seed)
    accuracy = classifier.score(real_rows[known], real_rows[target])

    labels = real_rows[target].astype(str)
    baseline = float(labels.value_counts().max() / len(labels))
    logger.info(f"Inference on '{target}': accuracy {accuracy:.3f}, baseline {baseline:.3f}")
    return AttackReport(INFERENCE, [target], accuracy, baseline, seed,
                        levels=_levels([target], sensitivity_map),
                        settings={'known': known, 'classifier': kind})


def _encode_identifiers(frame: pd.DataFrame, reference: Table, columns: Sequence[str]) -> np.ndarray:
    """Continuous columns z-scored on the reference, discrete one-hot at half weight."""
    blocks = []
    for name in columns:
        ref = reference.non_missing(name)
        if reference.schema.kind_of(name) == CONTINUOUS:
            values = frame[name].to_numpy(dtype=float)
            mean = float(ref.mean())
            std = float(ref.std(ddof=0)) or 1.0
            blocks.append(np.nan_to_num((values - mean) / std, nan=0.0)[:, None])
        else:
            tokens = frame[name]
            for category in sorted(ref.astype(str).unique()):
                blocks.append(((tokens == category).to_numpy(dtype=float) * ONE_HOT_WEIGHT)[:, None])
    return np.hstack(blocks)


def _disclosed(real: Table, real_rows: pd.DataFrame, linked: pd.DataFrame,
               sensitive: Sequence[str], tolerance: float) -> np.ndarray:
    """Row mask: every sensitive attribute of the linked row agrees with the real row."""
    hit = np.ones(len(real_rows), dtype=bool)
    for name in sensitive:
        a = real_rows[name].reset_index(drop=True)
        b = linked[name].reset_index(drop=True)
        if real.schema.kind_of(name) == CONTINUOUS:
            width = tolerance * float(real.non_missing(name).std(ddof=0))
            # NaN on either side compares False
            hit &= np.abs(a.to_numpy(dtype=float) - b.to_numpy(dtype=float)) <= width
        else:
            hit &= (a.notna() & b.notna() & (a.astype(str) == b.astype(str))).to_numpy()
    return hit


def reidentification_attack(synth: Table, real: Table, quasi_identifiers: Sequence[str],
                            sensitive: Sequence[str],
                            match_tol: float = ATTACK_DEFAULTS['match_tolerance'], seed: int = 0,
                            shuffles: int = ATTACK_DEFAULTS['baseline_shuffles'],
                            sensitivity_map: Optional[SensitivityMap] = None) -> AttackReport:
    """Share of real rows whose nearest synthetic row discloses all sensitive attributes.

    Distance is L1 over the quasi-identifiers. The baseline is the same
    disclosure rate under uniformly random pairing, averaged over shuffles.
    """
    quasi_identifiers, sensitive = list(quasi_identifiers), list(sensitive)
    if not quasi_identifiers:
        raise InputError("re-identification needs at least one quasi-identifier")
    if not sensitive:
        raise InputError("re-identification needs at least one sensitive column")
    overlap = sorted(set(quasi_identifiers) & set(sensitive))
    if overlap:
        raise InputError(f"columns {overlap} are both quasi-identifier and sensitive")
    if match_tol < 0:
        raise InputError(f"match tolerance must be >= 0, got {match_tol}")
    _check_columns([*quasi_identifiers, *sensitive], synth, real)

    real_rows, synth_rows = real.frame, synth.frame.reset_index(drop=True)
    index = NearestNeighbors(n_neighbors=1, metric='manhattan', algorithm='brute')
    index.fit(_encode_identifiers(synth_rows, real, quasi_identifiers))
    _, nearest = index.kneighbors(_encode_identifiers(real_rows, real, quasi_identifiers))
    linked = synth_rows.iloc[nearest[:, 0]]
    success = float(_disclosed(real, real_rows, linked, sensitive, match_tol).mean())

    rates = []
    for s in range(shuffles):
        pairing = substream(seed, s).integers(0, len(synth_rows), len(real_rows))
        rates.append(_disclosed(real, real_rows, synth_rows.iloc[pairing], sensitive, match_tol).mean())
    baseline = float(np.mean(rates)) if rates else 0.0

    logger.info(f"Re-identification on {sensitive}: success {success:.3f}, baseline {baseline:.3f}")
    return AttackReport(REIDENTIFICATION, sensitive, success, baseline, seed,
                        levels=_levels(sensitive, sensitivity_map),
                        settings={'quasi_identifiers': quasi_identifiers, 'match_tolerance': match_tol,
                                  'shuffles': shuffles})


def attack_gap(enforced: AttackReport, plain: AttackReport) -> float:
    """Enforced minus non-enforced success rate; negative means enforcement helped."""
    if enforced.kind != plain.kind or enforced.targets != plain.targets:
        raise InputError("attack reports must share kind and targets to be compared")
    return enforced.success_rate - plain.success_rate
