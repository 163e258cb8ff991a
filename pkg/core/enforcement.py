# core/enforcement.py
"""
Sensitivity-scaled distortion and the EMD acceptance loop.

Each attribute carries a distortion knob: a Gaussian noise scale for
continuous columns and a flip probability for discrete ones. The loop
samples, distorts, measures normalized EMD against the real table and
nudges the knob of every attribute that falls outside its band.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from config import sensitivity as sensitivity_config
from config.settings import ENFORCEMENT_DEFAULTS
from core.dataset import CONTINUOUS, Table, category_frequencies
from core.errors import ConfigError
from core.metrics import normalized_emd
from core.sensitivity import AcceptanceBand, SensitivityLevel, SensitivityMap
from core.synth import TabularModel, sample
from utils.helpers import derive_seed, substream

logger = logging.getLogger(__name__)

ACCEPTED = 'accepted'
FAILED = 'failed'

Knob = Tuple[float, float]   # (noise_scale, flip_prob)


@dataclass
class DistortionConfig:
    levels: Dict[SensitivityLevel, Knob] = field(default_factory=dict)
    flip_target: str = sensitivity_config.DEFAULT_FLIP_TARGET

    def __post_init__(self):
        merged = {SensitivityLevel(k): tuple(v) for k, v in sensitivity_config.DEFAULT_DISTORTION.items()}
        merged.update({SensitivityLevel(k): (float(v[0]), float(v[1])) for k, v in self.levels.items()})
        self.levels = merged
        self.validate()

    def validate(self) -> 'DistortionConfig':
        if self.flip_target not in sensitivity_config.FLIP_TARGETS:
            raise ConfigError(f"flip target must be one of {sensitivity_config.FLIP_TARGETS}, "
                              f"got '{self.flip_target}'")
        for level, (noise, flip) in self.levels.items():
            if noise < 0:
                raise ConfigError(f"noise scale for {level.value} must be >= 0, got {noise}")
            if not 0.0 <= flip <= 1.0:
                raise ConfigError(f"flip probability for {level.value} must lie in [0, 1], got {flip}")
        ordered = [self.levels[level] for level in
                   (SensitivityLevel.LOW, SensitivityLevel.MEDIUM, SensitivityLevel.HIGH)]
        for lower, higher in zip(ordered, ordered[1:]):
            if higher[0] < lower[0] or higher[1] < lower[1]:
                raise ConfigError("distortion must be non-decreasing from Low to High")
        return self

    def knob(self, level: SensitivityLevel) -> Knob:
        return self.levels[SensitivityLevel(level)]


def _distort_columns(table: Table, knobs: Dict[str, Knob], flip_target: str, seed: int) -> Table:
    frame = table.frame.copy()
    for index, spec in enumerate(table.schema.columns):
        noise, flip = knobs.get(spec.name, (0.0, 0.0))
        rng = substream(seed, index)
        column = frame[spec.name]
        if spec.kind == CONTINUOUS:
            if noise <= 0:
                continue
            values = column.to_numpy(dtype=float)
            scale = noise * float(np.nanstd(values))
            frame[spec.name] = values + rng.normal(0.0, 1.0, len(values)) * scale
        else:
            if flip <= 0:
                continue
            frequencies = category_frequencies(column)
            if not frequencies:
                continue
            categories = np.asarray(list(frequencies), dtype=object)
            if flip_target == 'marginal':
                weights = np.fromiter(frequencies.values(), dtype=float)
            else:
                weights = np.full(len(categories), 1.0 / len(categories))
            flips = (rng.random(len(column)) < flip) & column.notna().to_numpy()
            replacements = rng.choice(categories, size=len(column), p=weights / weights.sum())
            frame[spec.name] = pd.Series(np.where(flips, replacements, column.to_numpy(dtype=object)),
                                         index=frame.index)
    return Table(table.schema, frame)


def distort(table: Table, sensitivity_map: SensitivityMap, config: Optional[DistortionConfig] = None,
            seed: int = 0) -> Table:
    """Add tier-scaled noise to continuous cells and flip discrete cells.

    Continuous cells gain N(0, (eps * std)^2); each discrete cell is redrawn
    with probability p from the configured flip target. At p = 1 a discrete
    column approaches its marginal only with flip_target='marginal'; the
    default uniform redraw pushes it toward equal category shares instead.
    Low-tier defaults leave the table unchanged.
    """
    config = config or DistortionConfig()
    knobs = {name: config.knob(entry.level) for name, entry in sensitivity_map.items()}
    return _distort_columns(table, knobs, config.flip_target, seed)


@dataclass
class AttributeTrace:
    level: str
    band: Tuple[float, float]
    kind: str
    emd: List[float] = field(default_factory=list)
    noise_scale: List[float] = field(default_factory=list)
    flip_prob: List[float] = field(default_factory=list)
    final_emd: float = float('nan')
    final_noise_scale: float = 0.0
    final_flip_prob: float = 0.0
    status: str = FAILED

    def to_dict(self) -> Dict:
        return {
            'level': self.level,
            'kind': self.kind,
            'band': [self.band[0], self.band[1]],
            'emd_trajectory': list(self.emd),
            'noise_trajectory': list(self.noise_scale),
            'flip_trajectory': list(self.flip_prob),
            'final_emd': self.final_emd,
            'final_noise_scale': self.final_noise_scale,
            'final_flip_prob': self.final_flip_prob,
            'status': self.status,
        }


@dataclass
class EnforcementReport:
    attributes: Dict[str, AttributeTrace]
    iterations: int
    selected_iteration: int
    seed: int
    n_samples: int
    flip_target: str

    @property
    def accepted(self) -> bool:
        return all(t.status == ACCEPTED for t in self.attributes.values())

    @property
    def failed(self) -> List[str]:
        return [name for name, t in self.attributes.items() if t.status != ACCEPTED]

    def to_dict(self) -> Dict:
        return {
            'status': ACCEPTED if self.accepted else FAILED,
            'iterations': self.iterations,
            'selected_iteration': self.selected_iteration,
            'seed': self.seed,
            'n_samples': self.n_samples,
            'flip_target': self.flip_target,
            'failed_attributes': self.failed,
            'attributes': {name: t.to_dict() for name, t in self.attributes.items()},
        }


def _violation(emd: float, band: AcceptanceBand) -> float:
    if emd < band.t_min:
        return band.t_min - emd
    if emd > band.t_max:
        return emd - band.t_max
    return 0.0


def _adjust(value: float, emd: float, band: AcceptanceBand, cap: Optional[float]) -> float:
    if emd < band.t_min:
        value = ENFORCEMENT_DEFAULTS['floor_step'] if value <= 0 else value * ENFORCEMENT_DEFAULTS['increase_factor']
    elif emd > band.t_max:
        value = value * ENFORCEMENT_DEFAULTS['decrease_factor']
    return min(value, cap) if cap is not None else value


def generate_enforced(model: TabularModel, real: Table, bands: List[AcceptanceBand],
                      sensitivity_map: SensitivityMap, config: Optional[DistortionConfig] = None,
                      n: int = ENFORCEMENT_DEFAULTS['n_samples'],
                      max_iters: int = ENFORCEMENT_DEFAULTS['max_iters'],
                      seed: int = 0, progress: bool = False) -> Tuple[Table, EnforcementReport]:
    """Sample and distort until every attribute's normalized EMD is in band.

    Iteration i samples with sub-seed (seed, i, 0) and distorts with
    (seed, i, 1). On exhaustion the iterate with the fewest violations
    (then the smallest total violation) is returned and its violating
    attributes are marked failed.
    """
    config = config or DistortionConfig()
    by_name = {band.attribute: band for band in bands}
    missing = [name for name in model.schema.names if name not in by_name]
    if missing:
        raise ConfigError(f"no acceptance band for attributes {missing}")
    if max_iters < 1:
        raise ConfigError(f"max_iters must be at least 1, got {max_iters}")

    knobs = {name: config.knob(sensitivity_map.level(name)) for name in model.schema.names}
    traces = {
        spec.name: AttributeTrace(sensitivity_map.level(spec.name).value,
                                  (by_name[spec.name].t_min, by_name[spec.name].t_max), spec.kind)
        for spec in model.schema.columns
    }

    best = None
    iterations = 0
    for iteration in tqdm(range(1, max_iters + 1), desc='enforcing', disable=not progress, leave=False):
        iterations = iteration
        drawn = sample(model, n, derive_seed(seed, iteration, 0))
        distorted = _distort_columns(drawn, knobs, config.flip_target, derive_seed(seed, iteration, 1))

        emds = {}
        for spec in model.schema.columns:
            emd = normalized_emd(real.column(spec.name), distorted.column(spec.name), spec.kind)
            emds[spec.name] = emd
            trace = traces[spec.name]
            trace.emd.append(emd)
            trace.noise_scale.append(knobs[spec.name][0])
            trace.flip_prob.append(knobs[spec.name][1])
            logger.debug(f"iteration {iteration} {spec.name}: EMD {emd:.5f} knob {knobs[spec.name]}")

        violations = {name: _violation(emds[name], by_name[name]) for name in emds}
        violating = [name for name, v in violations.items() if v > 0]
        score = (len(violating), sum(violations.values()))
        if best is None or score < best[0]:
            best = (score, iteration, distorted, dict(emds), dict(knobs))

        if not violating:
            logger.info(f"All {len(emds)} attributes within band at iteration {iteration}")
            break

        for name in violating:
            noise, flip = knobs[name]
            band = by_name[name]
            if traces[name].kind == CONTINUOUS:
                noise = _adjust(noise, emds[name], band, cap=None)
            else:
                flip = _adjust(flip, emds[name], band, cap=1.0)
            knobs[name] = (noise, flip)

    _, selected, table, emds, chosen = best
    for name, trace in traces.items():
        trace.final_emd = emds[name]
        trace.final_noise_scale, trace.final_flip_prob = chosen[name]
        trace.status = ACCEPTED if by_name[name].contains(emds[name]) else FAILED

    report = EnforcementReport(traces, iterations, selected, seed, n, config.flip_target)
    if not report.accepted:
        logger.warning(f"Enforcement failed after {iterations} iterations for {report.failed}")
    return table, report
