# core/sweep.py
"""
With/without-enforcement comparison repeated over several seeds.

Each seed splits the real table, fits the copula on the training part and
draws two synthetic tables from it: a plain sample and an enforced one.
Utility is scored on the held-out rows; the attacks target the training
rows, the ones the generator has seen.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from config.settings import (ATTACK_DEFAULTS, COPULA_DEFAULTS, DATASET_DEFAULTS, ENFORCEMENT_DEFAULTS,
                             MIXTURE_DEFAULTS)
from core.attacks import attack_gap, attribute_inference_attack, reidentification_attack
from core.dataset import Table, split
from core.enforcement import DistortionConfig, generate_enforced
from core.errors import InputError
from core.evaluation import split_record, tstr
from core.sensitivity import BandConfig, SensitivityMap, privacy_bands
from core.synth import fit, sample
from utils.helpers import derive_seed

logger = logging.getLogger(__name__)


@dataclass
class SeedOutcome:
    seed: int
    accepted: bool
    real_accuracy: float
    plain_accuracy: float
    enforced_accuracy: float
    inference_gap: Optional[float] = None
    reidentification_gap: Optional[float] = None
    split: Dict = field(default_factory=dict)

    @property
    def utility_gap(self) -> float:
        """Trained-on-real minus trained-on-enforced accuracy."""
        return self.real_accuracy - self.enforced_accuracy

    def to_dict(self) -> Dict:
        return {
            'seed': self.seed,
            'accepted': self.accepted,
            'real_accuracy': self.real_accuracy,
            'plain_accuracy': self.plain_accuracy,
            'enforced_accuracy': self.enforced_accuracy,
            'utility_gap': self.utility_gap,
            'inference_gap': self.inference_gap,
            'reidentification_gap': self.reidentification_gap,
            'split': dict(self.split),
        }


def _mean(values: List[Optional[float]]) -> Optional[float]:
    present = [v for v in values if v is not None]
    return float(np.mean(present)) if present else None


@dataclass
class SweepReport:
    target: str
    classifier: str
    outcomes: List[SeedOutcome]
    settings: Dict = field(default_factory=dict)

    @property
    def mean_utility_gap(self) -> float:
        return _mean([o.utility_gap for o in self.outcomes])

    @property
    def mean_inference_gap(self) -> Optional[float]:
        return _mean([o.inference_gap for o in self.outcomes])

    @property
    def mean_reidentification_gap(self) -> Optional[float]:
        return _mean([o.reidentification_gap for o in self.outcomes])

    def to_dict(self) -> Dict:
        return {
            'target': self.target,
            'classifier': self.classifier,
            'seeds': [o.seed for o in self.outcomes],
            'mean_real_accuracy': _mean([o.real_accuracy for o in self.outcomes]),
            'mean_enforced_accuracy': _mean([o.enforced_accuracy for o in self.outcomes]),
            'mean_utility_gap': self.mean_utility_gap,
            'mean_inference_gap': self.mean_inference_gap,
            'mean_reidentification_gap': self.mean_reidentification_gap,
            'settings': dict(self.settings),
            'runs': [o.to_dict() for o in self.outcomes],
        }


def enforcement_sweep(real: Table, sensitivity_map: SensitivityMap, target: str, seeds: Sequence[int],
                      band_config: Optional[BandConfig] = None,
                      distortion: Optional[DistortionConfig] = None,
                      classifier: str = ATTACK_DEFAULTS['classifier'],
                      inference_target: Optional[str] = None,
                      inference_known: Optional[Sequence[str]] = None,
                      quasi_identifiers: Sequence[str] = (),
                      sensitive: Sequence[str] = (),
                      holdout_fraction: float = DATASET_DEFAULTS['holdout_fraction'],
                      n: Optional[int] = None,
                      max_iters: int = ENFORCEMENT_DEFAULTS['max_iters'],
                      k_max: int = MIXTURE_DEFAULTS['k_max'],
                      shrinkage: float = COPULA_DEFAULTS['shrinkage'],
                      match_tol: float = ATTACK_DEFAULTS['match_tolerance']) -> SweepReport:
    """Run the plain vs enforced comparison once per seed.

    n defaults to the size of the training part. The inference attack runs
    when inference_target is given, re-identification when both
    quasi_identifiers and sensitive are non-empty.
    """
    seeds = list(seeds)
    if not seeds:
        raise InputError("the sweep needs at least one seed")
    if target not in real.schema.names:
        raise InputError("target not in table", column=target)
    if bool(quasi_identifiers) != bool(sensitive):
        raise InputError("re-identification needs both quasi-identifiers and sensitive columns")
    distortion = distortion or DistortionConfig()
    bands = privacy_bands(sensitivity_map, band_config)
    known = list(inference_known or [c for c in real.schema.names if c != inference_target])

    outcomes = []
    for seed in seeds:
        train, test = split(real, holdout_fraction, seed)
        model = fit(train, shrinkage=shrinkage, k_max=k_max)
        size = n or len(train)
        plain = sample(model, size, derive_seed(seed, 0))
        enforced, report = generate_enforced(model, train, bands, sensitivity_map, distortion, n=size,
                                             max_iters=max_iters, seed=derive_seed(seed, 1))

        on_plain = tstr(plain, train, test, target, kinds=[classifier], seed=seed).entries[classifier]
        on_enforced = tstr(enforced, train, test, target, kinds=[classifier], seed=seed).entries[classifier]
        outcome = SeedOutcome(seed, report.accepted, on_enforced.real_accuracy, on_plain.synth_accuracy,
                              on_enforced.synth_accuracy,
                              split=split_record(train, test, holdout_fraction, seed))

        if inference_target is not None:
            outcome.inference_gap = attack_gap(
                attribute_inference_attack(enforced, train, inference_target, known, kind=classifier, seed=seed),
                attribute_inference_attack(plain, train, inference_target, known, kind=classifier, seed=seed),
            )
        if quasi_identifiers:
            outcome.reidentification_gap = attack_gap(
                reidentification_attack(enforced, train, quasi_identifiers, sensitive, match_tol, seed=seed),
                reidentification_attack(plain, train, quasi_identifiers, sensitive, match_tol, seed=seed),
            )
        logger.info(f"Seed {seed}: utility gap {outcome.utility_gap:.3f}, "
                    f"inference gap {outcome.inference_gap}, re-identification gap {outcome.reidentification_gap}")
        outcomes.append(outcome)

    settings = {
        'holdout_fraction': holdout_fraction,
        'max_iters': max_iters,
        'k_max': k_max,
        'shrinkage': shrinkage,
        'flip_target': distortion.flip_target,
        'inference_target': inference_target,
        'inference_known': known if inference_target is not None else [],
        'quasi_identifiers': list(quasi_identifiers),
        'sensitive': list(sensitive),
        'match_tolerance': match_tol,
    }
    return SweepReport(target, classifier, outcomes, settings)
