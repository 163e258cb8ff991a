# core/sensitivity.py

import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import yaml

from config import sensitivity as sensitivity_config
from config.lexicon import PERMISSIVE_TYPES, RESTRICTIVE_TYPES
from core.dataset import Schema
from core.errors import ConfigError, InputError
from core.policy import DeonticRule
from utils.helpers import read_sections, split_assignment

logger = logging.getLogger(__name__)

EXPLICIT = 'explicit-config'
TAG_MATCH = 'tag-match'
DEFAULT = 'default'


class SensitivityLevel(str, Enum):
    LOW = 'Low'
    MEDIUM = 'Medium'
    HIGH = 'High'

    @property
    def rank(self) -> int:
        return [SensitivityLevel.LOW, SensitivityLevel.MEDIUM, SensitivityLevel.HIGH].index(self)

    @classmethod
    def parse(cls, token: str) -> 'SensitivityLevel':
        cleaned = token.strip().lower()
        for member in cls:
            if member.value.lower() == cleaned:
                return member
        raise ValueError(f"unknown sensitivity level '{token}' (expected Low, Medium or High)")


@dataclass(frozen=True)
class Provenance:
    kind: str       # explicit-config | tag-match | default
    detail: str

    def __str__(self):
        return f"{self.kind}: {self.detail}"


@dataclass(frozen=True)
class SensitivityEntry:
    level: SensitivityLevel
    provenance: Provenance


class SensitivityMap:
    """Total map from schema attribute to sensitivity tier."""

    def __init__(self, schema: Schema, entries: Dict[str, SensitivityEntry]):
        missing = [name for name in schema.names if name not in entries]
        if missing:
            raise InputError(f"sensitivity map has no entry for {missing}")
        unknown = sorted(set(entries) - set(schema.names))
        if unknown:
            raise InputError(f"sensitivity map names unknown attributes {unknown}")
        for name, entry in entries.items():
            if not entry.provenance.kind:
                raise InputError("empty provenance", column=name)
        self.schema = schema
        self.entries = {name: entries[name] for name in schema.names}

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, name: str) -> SensitivityEntry:
        return self.entries[name]

    def level(self, name: str) -> SensitivityLevel:
        return self.entries[name].level

    def items(self):
        return self.entries.items()

    def attributes_at(self, *levels: SensitivityLevel) -> List[str]:
        return [name for name, entry in self.entries.items() if entry.level in levels]

    def to_dict(self) -> Dict:
        return {
            'attributes': {
                name: {
                    'level': entry.level.value,
                    'provenance': {'kind': entry.provenance.kind, 'detail': entry.provenance.detail},
                }
                for name, entry in self.entries.items()
            }
        }

    @classmethod
    def from_dict(cls, schema: Schema, data: Dict) -> 'SensitivityMap':
        entries = {}
        for name, entry in (data.get('attributes') or {}).items():
            try:
                level = SensitivityLevel.parse(str(entry['level']))
            except (KeyError, TypeError, ValueError) as e:
                raise InputError(f"invalid sensitivity entry: {e}", column=name)
            prov = entry.get('provenance') or {}
            entries[name] = SensitivityEntry(level, Provenance(str(prov.get('kind', '')), str(prov.get('detail', ''))))
        return cls(schema, entries)

    @classmethod
    def uniform(cls, schema: Schema, level: SensitivityLevel) -> 'SensitivityMap':
        return cls(schema, {
            name: SensitivityEntry(level, Provenance(EXPLICIT, 'uniform'))
            for name in schema.names
        })


@dataclass(frozen=True)
class AcceptanceBand:
    """Allowed normalized-EMD interval [t_min, t_max] for one attribute."""
    attribute: str
    t_min: float
    t_max: float

    def __post_init__(self):
        if not 0.0 <= self.t_min <= self.t_max <= 1.0:
            raise ConfigError(
                f"band must satisfy 0 <= t_min <= t_max <= 1, got [{self.t_min}, {self.t_max}]",
                column=self.attribute,
            )

    def contains(self, value: float) -> bool:
        return self.t_min <= value <= self.t_max


BandConfig = Dict[SensitivityLevel, Tuple[float, float]]


def default_band_config() -> BandConfig:
    return {SensitivityLevel(k): tuple(v) for k, v in sensitivity_config.DEFAULT_BANDS.items()}


def validate_band_config(bands: BandConfig) -> BandConfig:
    """Check per-level bounds and that t_min never loosens from Low to High."""
    merged = default_band_config()
    merged.update({SensitivityLevel(k): (float(v[0]), float(v[1])) for k, v in bands.items()})
    for level, (t_min, t_max) in merged.items():
        if not 0.0 <= t_min <= t_max <= 1.0:
            raise ConfigError(f"band for {level.value} must satisfy 0 <= t_min <= t_max <= 1, "
                              f"got ({t_min}, {t_max})")
    low, medium, high = (merged[level][0] for level in
                         (SensitivityLevel.LOW, SensitivityLevel.MEDIUM, SensitivityLevel.HIGH))
    if not low <= medium <= high:
        raise ConfigError(f"t_min must be non-decreasing from Low to High, got {low}, {medium}, {high}")
    return merged


@dataclass
class SensitivityConfig:
    tag_keywords: Dict[str, List[str]] = field(
        default_factory=lambda: {k: list(v) for k, v in sensitivity_config.DEFAULT_TAG_KEYWORDS.items()})
    overrides: Dict[str, SensitivityLevel] = field(default_factory=dict)
    bands: BandConfig = field(default_factory=default_band_config)
    distortion: Dict[SensitivityLevel, Tuple[float, float]] = field(default_factory=dict)


def _keyword_pattern(keywords: Iterable[str]) -> Optional[re.Pattern]:
    cleaned = sorted({k.strip().lower() for k in keywords if k and k.strip()}, key=lambda k: (-len(k), k))
    if not cleaned:
        return None
    return re.compile(r'(?<!\w)(?:' + '|'.join(re.escape(k) for k in cleaned) + r')(?!\w)', re.IGNORECASE)


def _classify_tag(tag: str, rules: List[DeonticRule],
                  tag_keywords: Dict[str, List[str]]) -> Tuple[SensitivityLevel, Provenance]:
    pattern = _keyword_pattern(tag_keywords.get(tag, []))
    if pattern is None:
        logger.warning(f"Tag '{tag}' has no keywords; treating it as unmatched")
        return SensitivityLevel.MEDIUM, Provenance(TAG_MATCH, f"{tag}: no rule matched")

    matched = [rule for rule in rules if pattern.search(rule.sentence)]
    restrictive = [r for r in matched if r.deontic_type.value in RESTRICTIVE_TYPES]
    permissive = [r for r in matched if r.deontic_type.value in PERMISSIVE_TYPES]
    if restrictive:
        rule = restrictive[0]
        return SensitivityLevel.HIGH, Provenance(TAG_MATCH, f"{tag} via {rule.deontic_type.value} {rule.source}")
    if permissive:
        rule = permissive[0]
        return SensitivityLevel.LOW, Provenance(TAG_MATCH, f"{tag} via {rule.deontic_type.value} {rule.source}")
    return SensitivityLevel.MEDIUM, Provenance(TAG_MATCH, f"{tag}: no rule matched")


def classify_attributes(schema: Schema, rules: List[DeonticRule],
                        tag_keywords: Optional[Dict[str, List[str]]] = None,
                        overrides: Optional[Dict[str, SensitivityLevel]] = None) -> SensitivityMap:
    """Assign every attribute a tier.

    Precedence: explicit override, then tag/rule matching (restrictive rule
    -> High, permissive only -> Low, tag unmatched -> Medium; the strictest
    tag wins), then High as the fail-safe default.
    """
    tag_keywords = sensitivity_config.DEFAULT_TAG_KEYWORDS if tag_keywords is None else tag_keywords
    overrides = overrides or {}
    unknown = sorted(set(overrides) - set(schema.names))
    if unknown:
        raise ConfigError(f"overrides name unknown attributes {unknown}")

    entries = {}
    for spec in schema.columns:
        if spec.name in overrides:
            level = SensitivityLevel(overrides[spec.name])
            entries[spec.name] = SensitivityEntry(level, Provenance(EXPLICIT, f"override {level.value}"))
        elif spec.tags:
            candidates = [_classify_tag(tag, rules, tag_keywords) for tag in sorted(spec.tags)]
            level, provenance = max(candidates, key=lambda c: c[0].rank)
            entries[spec.name] = SensitivityEntry(level, provenance)
        else:
            entries[spec.name] = SensitivityEntry(SensitivityLevel.HIGH, Provenance(DEFAULT, 'fail-safe High'))

    result = SensitivityMap(schema, entries)
    logger.info(f"Classified {len(result)} attributes: {tier_histogram(result)}")
    return result


def privacy_bands(sensitivity_map: SensitivityMap, band_config: Optional[BandConfig] = None) -> List[AcceptanceBand]:
    """One acceptance band per attribute, taken from its tier."""
    bands = validate_band_config(band_config or {})
    result = []
    for name, entry in sensitivity_map.items():
        t_min, t_max = bands[entry.level]
        result.append(AcceptanceBand(name, t_min, t_max))
    return result


def tier_histogram(sensitivity_map: SensitivityMap) -> Dict[str, int]:
    counts = {level.value: 0 for level in SensitivityLevel}
    for _, entry in sensitivity_map.items():
        counts[entry.level.value] += 1
    return counts


def _parse_pair(value: str, path, line_no) -> Tuple[float, float]:
    parts = [p.strip() for p in value.split(',')]
    if len(parts) != 2:
        raise ConfigError("expected two comma-separated numbers", path=path, line=line_no)
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise ConfigError(f"cannot parse '{value}' as two numbers", path=path, line=line_no)


def _parse_level(token: str, path, line_no) -> SensitivityLevel:
    try:
        return SensitivityLevel.parse(token)
    except ValueError as e:
        raise ConfigError(str(e), path=path, line=line_no)


def load_sensitivity_config(path) -> SensitivityConfig:
    """Parse the [tags], [overrides], [bands] and [distortion] sections.

    Absent sections keep their defaults.
    """
    config = SensitivityConfig()
    path_str = str(path)
    tags: Dict[str, List[str]] = {}
    bands: BandConfig = {}

    for section, line_no, line in read_sections(path):
        name, value = split_assignment(line, path=path_str, line_no=line_no)
        section_key = (section or '').lower()
        if section_key == 'tags':
            tags[name] = [k.strip() for k in value.split(',') if k.strip()]
        elif section_key == 'overrides':
            config.overrides[name] = _parse_level(value, path_str, line_no)
        elif section_key == 'bands':
            bands[_parse_level(name, path_str, line_no)] = _parse_pair(value, path_str, line_no)
        elif section_key == 'distortion':
            noise, flip = _parse_pair(value, path_str, line_no)
            config.distortion[_parse_level(name, path_str, line_no)] = (noise, flip)
        else:
            raise ConfigError(f"unknown section '{section}'", path=path_str, line=line_no)

    if tags:
        config.tag_keywords = tags
    try:
        config.bands = validate_band_config(bands)
    except ConfigError as e:
        raise ConfigError(e.reason, path=path_str)
    return config


def save_sensitivity_map(sensitivity_map: SensitivityMap, path, header: Optional[str] = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = yaml.safe_dump(sensitivity_map.to_dict(), sort_keys=True, allow_unicode=True)
    with path.open('w', encoding='utf-8', newline='\n') as fh:
        if header:
            fh.write(header.rstrip('\n') + '\n')
        fh.write(body)


def load_sensitivity_map(path, schema: Schema) -> SensitivityMap:
    try:
        with Path(path).open(encoding='utf-8') as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as e:
        raise InputError(f"cannot read sensitivity map: {e.strerror}", path=str(path))
    except yaml.YAMLError as e:
        raise InputError(f"invalid YAML: {e}", path=str(path))
    return SensitivityMap.from_dict(schema, data)
