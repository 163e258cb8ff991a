# core/dataset.py

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
import yaml

from config.settings import DATASET_DEFAULTS
from core.errors import ConfigError, InputError
from utils.helpers import substream

logger = logging.getLogger(__name__)

CONTINUOUS = 'continuous'
DISCRETE = 'discrete'
COLUMN_KINDS = (CONTINUOUS, DISCRETE)


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str
    tags: FrozenSet[str] = frozenset()

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name.strip():
            raise ConfigError("column name must be a nonempty string")
        if self.kind not in COLUMN_KINDS:
            raise ConfigError(f"unknown kind '{self.kind}'", column=self.name)
        object.__setattr__(self, 'tags', frozenset(self.tags))


@dataclass(frozen=True)
class Schema:
    """Ordered attribute universe the policy rules bind to."""
    columns: Tuple[ColumnSpec, ...]

    def __post_init__(self):
        object.__setattr__(self, 'columns', tuple(self.columns))
        seen = set()
        for spec in self.columns:
            if spec.name in seen:
                raise ConfigError("duplicate column name", column=spec.name)
            seen.add(spec.name)

    @property
    def names(self) -> List[str]:
        return [c.name for c in self.columns]

    @property
    def width(self) -> int:
        return len(self.columns)

    def column(self, name: str) -> ColumnSpec:
        for spec in self.columns:
            if spec.name == name:
                return spec
        raise InputError("unknown column", column=name)

    def kind_of(self, name: str) -> str:
        return self.column(name).kind

    def index_of(self, name: str) -> int:
        return self.names.index(name)

    @property
    def continuous(self) -> List[str]:
        return [c.name for c in self.columns if c.kind == CONTINUOUS]

    @property
    def discrete(self) -> List[str]:
        return [c.name for c in self.columns if c.kind == DISCRETE]

    def without_tags(self) -> 'Schema':
        return Schema(tuple(ColumnSpec(c.name, c.kind) for c in self.columns))

    def to_dict(self) -> Dict:
        return {
            'columns': [
                {'name': c.name, 'kind': c.kind, 'tags': sorted(c.tags)}
                for c in self.columns
            ]
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'Schema':
        return cls(tuple(
            ColumnSpec(entry['name'], entry['kind'], frozenset(entry.get('tags') or []))
            for entry in data.get('columns', [])
        ))


@dataclass(frozen=True)
class SchemaConfig:
    """Partial schema read from a config file; unlisted columns are inferred."""
    columns: Dict[str, ColumnSpec] = field(default_factory=dict)
    distinct_threshold: int = DATASET_DEFAULTS['distinct_threshold']


@dataclass(frozen=True, eq=False)
class Table:
    """Schema plus a DataFrame of cells.

    Continuous columns are float64, discrete columns hold string tokens.
    Missing cells are NaN/None. Treat instances as read-only.
    """
    schema: Schema
    frame: pd.DataFrame

    def __post_init__(self):
        if list(self.frame.columns) != self.schema.names:
            raise InputError(
                f"frame columns {list(self.frame.columns)} do not match schema {self.schema.names}"
            )
        for name in self.schema.continuous:
            values = self.frame[name].to_numpy(dtype=float)
            if np.isinf(values).any():
                raise InputError("infinite value stored", column=name)

    def __len__(self) -> int:
        return len(self.frame)

    @property
    def n_rows(self) -> int:
        return len(self.frame)

    def column(self, name: str) -> pd.Series:
        return self.frame[name]

    def non_missing(self, name: str) -> pd.Series:
        return self.frame[name].dropna()

    def take(self, indices: Sequence[int]) -> 'Table':
        return Table(self.schema, self.frame.iloc[list(indices)].reset_index(drop=True))


@dataclass
class ColumnStats:
    name: str
    kind: str
    count: int
    missing_count: int
    min: Optional[float] = None
    max: Optional[float] = None
    mean: Optional[float] = None
    std: Optional[float] = None
    frequencies: Dict[str, float] = field(default_factory=dict)
    warning: Optional[str] = None


def _read_rows(path: Path) -> Tuple[List[str], List[Tuple[int, List[str]]]]:
    """Parse delimited text into a header and (line number, cells) rows."""
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise InputError(f"cannot read file: {e.strerror}", path=str(path))

    lines = text.splitlines(keepends=True)
    skipped = 0
    while skipped < len(lines) and lines[skipped].startswith('#'):
        skipped += 1

    reader = csv.reader(lines[skipped:], strict=True)
    try:
        header = next(reader)
    except StopIteration:
        raise InputError("file has no header row", path=str(path))
    except csv.Error as e:
        raise InputError(f"malformed header: {e}", path=str(path), line=skipped + 1)

    header = [h.strip() for h in header]
    rows = []
    while True:
        try:
            cells = next(reader)
        except StopIteration:
            break
        except csv.Error as e:
            raise InputError(f"malformed row: {e}", path=str(path), line=skipped + reader.line_num)
        line_no = skipped + reader.line_num
        if not cells:
            continue
        if len(cells) != len(header):
            raise InputError(
                f"expected {len(header)} fields, found {len(cells)}",
                path=str(path), line=line_no,
            )
        rows.append((line_no, cells))
    return header, rows


def _is_numeric_token(values: pd.Series) -> pd.Series:
    parsed = pd.to_numeric(values, errors='coerce')
    return parsed.notna() & np.isfinite(parsed.astype(float))


def infer_schema(raw: pd.DataFrame, distinct_threshold: int = DATASET_DEFAULTS['distinct_threshold']) -> Schema:
    """Type each column of a raw string frame as continuous or discrete.

    Discrete iff any non-numeric token is present or the number of distinct
    values is at most distinct_threshold. Empty strings count as missing.
    """
    if raw.empty:
        raise InputError("cannot infer a schema from an empty table")

    columns = []
    for name in raw.columns:
        values = raw[name]
        values = values[values.notna() & (values.astype(str) != DATASET_DEFAULTS['missing_marker'])]
        numeric = _is_numeric_token(values) if len(values) else pd.Series(dtype=bool)
        if len(values) == 0 or not numeric.all():
            kind = DISCRETE
        elif pd.to_numeric(values).nunique() <= distinct_threshold:
            kind = DISCRETE
        else:
            kind = CONTINUOUS
        columns.append(ColumnSpec(str(name), kind))
    return Schema(tuple(columns))


def _resolve_schema(raw: pd.DataFrame, schema: Union[Schema, SchemaConfig, None], path: Path) -> Schema:
    if isinstance(schema, Schema):
        if set(schema.names) != set(raw.columns):
            missing = sorted(set(schema.names) - set(raw.columns))
            extra = sorted(set(raw.columns) - set(schema.names))
            raise ConfigError(
                f"schema does not match header (missing {missing}, unexpected {extra})",
                path=str(path),
            )
        return schema

    config = schema or SchemaConfig()
    unknown = sorted(set(config.columns) - set(raw.columns))
    if unknown:
        raise ConfigError(f"schema config names unknown columns {unknown}", path=str(path))
    inferred = infer_schema(raw, config.distinct_threshold)
    return Schema(tuple(config.columns.get(c.name, c) for c in inferred.columns))


def load_table(path, schema: Union[Schema, SchemaConfig, None] = None) -> Table:
    """Load a CSV file with header into a validated Table.

    Args:
        path: delimited text file, comma separator, first row the header
        schema: full Schema, partial SchemaConfig, or None to infer

    Raises:
        InputError: width violations or unparseable continuous cells,
            with the offending line number
    """
    path = Path(path)
    header, rows = _read_rows(path)
    if len(set(header)) != len(header) or any(not h for h in header):
        raise InputError("header names must be unique and nonempty", path=str(path), line=1)

    line_numbers = [line_no for line_no, _ in rows]
    raw = pd.DataFrame([cells for _, cells in rows], columns=header, dtype=object)
    if raw.empty and not isinstance(schema, Schema):
        raise InputError("table has no data rows", path=str(path))

    resolved = _resolve_schema(raw, schema, path)
    frame = pd.DataFrame(index=range(len(raw)))
    missing = DATASET_DEFAULTS['missing_marker']
    for spec in resolved.columns:
        values = raw[spec.name] if len(raw) else pd.Series([], dtype=object)
        is_missing = values.astype(str) == missing
        if spec.kind == CONTINUOUS:
            parsed = pd.to_numeric(values.where(~is_missing), errors='coerce').astype(float)
            bad = (~is_missing) & ~(parsed.notna() & np.isfinite(parsed))
            if bad.any():
                pos = int(np.flatnonzero(bad.to_numpy())[0])
                raise InputError(
                    f"cannot parse '{values.iloc[pos]}' as a finite number",
                    path=str(path), line=line_numbers[pos], column=spec.name,
                )
            frame[spec.name] = parsed.to_numpy()
        else:
            frame[spec.name] = values.where(~is_missing, None).astype(object).to_numpy()

    table = Table(resolved, frame[resolved.names])
    logger.info(f"Loaded {len(table)} rows x {resolved.width} columns from {path.name}")
    return table


def export_table(table: Table, path, header: Optional[str] = None) -> None:
    """Write a table as CSV that load_table reads back cell-for-cell."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = table.frame.to_csv(index=False, lineterminator='\n', na_rep='')
    with path.open('w', encoding='utf-8', newline='') as fh:
        if header:
            fh.write(header.rstrip('\n') + '\n')
        fh.write(body)


def load_schema_config(path) -> SchemaConfig:
    """Read the YAML schema config: optional distinct_threshold plus column list."""
    path = Path(path)
    try:
        with path.open(encoding='utf-8') as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as e:
        raise ConfigError(f"cannot read schema config: {e.strerror}", path=str(path))
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML: {e}", path=str(path))

    if not isinstance(data, dict):
        raise ConfigError("schema config must be a mapping", path=str(path))

    columns = {}
    for entry in data.get('columns') or []:
        if not isinstance(entry, dict) or 'name' not in entry:
            raise ConfigError("every column entry needs a name", path=str(path))
        name = str(entry['name'])
        if name in columns:
            raise ConfigError("duplicate column in schema config", path=str(path), column=name)
        kind = entry.get('kind')
        if kind not in COLUMN_KINDS:
            raise ConfigError(f"kind must be one of {list(COLUMN_KINDS)}", path=str(path), column=name)
        columns[name] = ColumnSpec(name, kind, frozenset(str(t) for t in entry.get('tags') or []))

    threshold = int(data.get('distinct_threshold', DATASET_DEFAULTS['distinct_threshold']))
    return SchemaConfig(columns, threshold)


def save_schema_config(schema: Schema, path, header: Optional[str] = None,
                       distinct_threshold: int = DATASET_DEFAULTS['distinct_threshold']) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = yaml.safe_dump({'distinct_threshold': distinct_threshold, **schema.to_dict()},
                          sort_keys=True, allow_unicode=True)
    with path.open('w', encoding='utf-8', newline='') as fh:
        if header:
            fh.write(header.rstrip('\n') + '\n')
        fh.write(body)


def split(table: Table, holdout_fraction: float, seed: int) -> Tuple[Table, Table]:
    """Deterministic disjoint (train, holdout) partition of the rows.

    Holdout size is round(fraction * n), half rounding up. Both parts keep
    the original row order.
    """
    if not 0.0 < holdout_fraction < 1.0:
        raise InputError(f"holdout fraction must lie in (0, 1), got {holdout_fraction}")
    n = len(table)
    if n == 0:
        raise InputError("cannot split an empty table")

    n_holdout = int(np.floor(holdout_fraction * n + 0.5))
    order = substream(seed).permutation(n)
    holdout = np.sort(order[:n_holdout])
    train = np.sort(order[n_holdout:])
    return table.take(train), table.take(holdout)


def summarize(table: Table) -> List[ColumnStats]:
    """Per-column statistics over non-missing cells."""
    if len(table) == 0:
        raise InputError("cannot summarize an empty table")

    stats = []
    for spec in table.schema.columns:
        values = table.non_missing(spec.name)
        entry = ColumnStats(
            name=spec.name,
            kind=spec.kind,
            count=int(len(values)),
            missing_count=int(len(table) - len(values)),
        )
        if len(values) == 0:
            entry.warning = 'all cells missing'
            logger.warning(f"Column '{spec.name}' has no non-missing cells")
        elif spec.kind == CONTINUOUS:
            arr = values.to_numpy(dtype=float)
            entry.min = float(arr.min())
            entry.max = float(arr.max())
            entry.mean = float(np.clip(arr.mean(), entry.min, entry.max))
            entry.std = float(arr.std())
        else:
            entry.frequencies = category_frequencies(values)
        stats.append(entry)
    return stats


def category_frequencies(values: pd.Series) -> Dict[str, float]:
    """Category -> relative frequency over non-missing cells, keys sorted."""
    values = values.dropna().astype(str)
    if len(values) == 0:
        return {}
    counts = values.value_counts(sort=False)
    total = counts.sum()
    return {str(k): float(counts[k] / total) for k in sorted(counts.index)}
