# core/benchmark.py
"""
Deterministic stand-in for a farm-survey dataset.

Every column is a monotone transform of one latent Gaussian vector built
from three shared factors, so the planted dependence is rank-based. The
farmer_category target is a binned score over four columns with a small
share of labels flipped. Candidate rows whose score lands within a margin
of a cut point are discarded, so the classes are separated before noise.
"""

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.stats import norm

from config import sensitivity as sensitivity_config
from core.dataset import CONTINUOUS, DISCRETE, ColumnSpec, Schema, Table, export_table, save_schema_config
from utils.helpers import substream

logger = logging.getLogger(__name__)

BENCHMARK_ROWS = 5000
TARGET = 'farmer_category'
LABEL_NOISE = 0.05

# name -> (factor, loading, mixture components as (weight, mean, std), tag)
CONTINUOUS_COLUMNS = {
    'farm_size_ha': (0, 0.7, [(0.6, 2.0, 0.6), (0.4, 8.0, 1.5)], 'PII'),
    'household_size': (2, 0.4, [(1.0, 6.0, 2.0)], 'PII'),
    'farmer_age': (2, 0.5, [(1.0, 45.0, 10.0)], 'PII'),
    'annual_income': (0, 0.6, [(0.5, 1200.0, 300.0), (0.35, 3000.0, 500.0), (0.15, 7000.0, 900.0)], 'PII'),
    'herd_size': (1, 0.7, [(0.7, 5.0, 2.0), (0.3, 25.0, 6.0)], 'PII'),
    'distance_to_market_km': (2, -0.3, [(0.7, 4.0, 1.5), (0.3, 18.0, 4.0)], 'PII'),
    'milk_yield_l': (1, 0.8, [(1.0, 900.0, 250.0)], None),
    'vaccination_cost': (1, 0.5, [(0.6, 40.0, 10.0), (0.4, 90.0, 15.0)], None),
    'land_rent': (0, 0.8, [(1.0, 300.0, 80.0)], None),
    'feed_expense': (1, 0.6, [(0.5, 150.0, 40.0), (0.5, 400.0, 60.0)], None),
    'rainfall_mm': (2, 0.3, [(0.5, 600.0, 80.0), (0.5, 1100.0, 120.0)], 'public'),
    'subsidy_amount': (0, 0.5, [(0.5, 200.0, 50.0), (0.3, 600.0, 90.0), (0.2, 1400.0, 200.0)], 'public'),
}

# name -> (factor, loading, categories in latent order with frequencies, tag).
# Categories are listed in sorted order so the latent order is the sort order.
DISCRETE_COLUMNS = {
    'gender': (2, 0.2, [('female', 0.3), ('male', 0.7)], 'PII'),
    'education_level': (0, 0.5, [('none', 0.4), ('primary', 0.3), ('secondary', 0.2), ('tertiary', 0.1)], 'PII'),
    'village': (2, 0.3, [('v1', 0.3), ('v2', 0.25), ('v3', 0.15), ('v4', 0.12), ('v5', 0.1), ('v6', 0.08)], 'PII'),
    'phone_ownership': (0, 0.4, [('no', 0.2), ('yes', 0.8)], 'PII'),
    'livestock_breed': (1, 0.5, [('crossbred', 0.5), ('exotic', 0.3), ('local', 0.2)], None),
    'itm_treated': (1, 0.3, [('no', 0.7), ('yes', 0.3)], None),
    'region': (2, 0.4, [('R1', 0.35), ('R2', 0.25), ('R3', 0.2), ('R4', 0.12), ('R5', 0.08)], 'public'),
}

# Score weights over the four target drivers. Classes run from the lowest
# score up and are split at TARGET_CUTS on the standardized score; rows within
# TARGET_MARGIN of a cut are never emitted.
TARGET_WEIGHTS = {'subsidy_amount': 1.0, 'herd_size': 0.4, 'rainfall_mm': 0.3, 'region': 0.3}
TARGET_CLASSES = ['subsistence', 'emerging', 'commercial']
TARGET_CUTS = (-0.05, 1.05)
TARGET_MARGIN = 0.25

COLUMN_ORDER = [
    'farm_size_ha', 'household_size', 'farmer_age', 'annual_income', 'herd_size',
    'distance_to_market_km', 'milk_yield_l', 'vaccination_cost', 'land_rent', 'feed_expense',
    'rainfall_mm', 'subsidy_amount', 'gender', 'education_level', 'village', 'phone_ownership',
    'livestock_breed', 'itm_treated', 'region', TARGET,
]

BENCHMARK_POLICY = [
    "The farmer can provide data to land owners, potato processors, the government, paying authorities, etc.",
    "Unless otherwise agreed in the contract, the data originator can transmit this data to another data user.",
    "Contracts must not be amended without the prior consent of the data originator.",
    "Parties may not use, process, or share data without the consent of the data originator.",
    "Data cannot be owned in the same way as physical assets.",
    "The data originator can store data in a primary location, in a data platform, "
    "or cloud-based storage platforms.",
    "The datasets should only be kept for as long as is strictly necessary for the relevant analyses "
    "to be carried out.",
    "If the data is being used to make decisions about the data originator as a natural person the GDPR "
    "applies. For instance, the rights regarding data produced on the farm or during farming operations "
    "are granted to the farmer and may be used extensively by them.",
]


def _mixture_quantile(u: np.ndarray, components: List[Tuple[float, float, float]]) -> np.ndarray:
    weights = np.array([c[0] for c in components])
    means = np.array([c[1] for c in components])
    stds = np.array([c[2] for c in components])
    grid = np.linspace((means - 6 * stds).min(), (means + 6 * stds).max(), 4001)
    cdf = (weights * norm.cdf((grid[:, None] - means) / stds)).sum(axis=1)
    return np.interp(u, cdf, grid)


def _bucket(latent: np.ndarray, categories: List[Tuple[str, float]]) -> Tuple[np.ndarray, np.ndarray]:
    """Category tokens and mid-interval normal scores for threshold-binned latents."""
    names = np.array([c[0] for c in categories], dtype=object)
    cum = np.cumsum([c[1] for c in categories])
    index = np.searchsorted(cum[:-1], norm.cdf(latent), side='right')
    lower = np.concatenate([[0.0], cum[:-1]])
    mids = norm.ppf((lower + cum) / 2.0)
    return names[index], mids[index]


def benchmark_schema() -> Schema:
    columns = []
    for name in COLUMN_ORDER:
        if name in CONTINUOUS_COLUMNS:
            tag = CONTINUOUS_COLUMNS[name][3]
            columns.append(ColumnSpec(name, CONTINUOUS, frozenset([tag]) if tag else frozenset()))
        elif name in DISCRETE_COLUMNS:
            tag = DISCRETE_COLUMNS[name][3]
            columns.append(ColumnSpec(name, DISCRETE, frozenset([tag]) if tag else frozenset()))
        else:
            columns.append(ColumnSpec(name, DISCRETE))
    return Schema(tuple(columns))


def _draw_candidates(seed: int, size: int) -> Tuple[Dict[str, np.ndarray], np.ndarray]:
    """Column values for `size` candidate rows plus their standardized target score."""
    factors = substream(seed, 0, size).standard_normal((size, 3))
    frame: Dict[str, np.ndarray] = {}
    scores: Dict[str, np.ndarray] = {}

    for index, name in enumerate(COLUMN_ORDER):
        if name == TARGET:
            continue
        spec = CONTINUOUS_COLUMNS.get(name) or DISCRETE_COLUMNS[name]
        factor, loading = spec[0], spec[1]
        own = substream(seed, 1, size, index).standard_normal(size)
        latent = loading * factors[:, factor] + np.sqrt(1.0 - loading ** 2) * own
        if name in CONTINUOUS_COLUMNS:
            frame[name] = np.round(_mixture_quantile(norm.cdf(latent), spec[2]), 3)
            scores[name] = latent
        else:
            frame[name], scores[name] = _bucket(latent, spec[2])

    score = sum(weight * scores[name] for name, weight in TARGET_WEIGHTS.items())
    return frame, (score - score.mean()) / score.std()


def generate_benchmark(seed: int, n_rows: int = BENCHMARK_ROWS) -> Table:
    """Build the 20-column benchmark table; identical for identical seeds."""
    cuts = np.array(TARGET_CUTS)
    size = 3 * n_rows + 64
    while True:
        candidates, score = _draw_candidates(seed, size)
        keep = np.flatnonzero(np.abs(score[:, None] - cuts).min(axis=1) >= TARGET_MARGIN)
        if len(keep) >= n_rows:
            break
        size *= 2
    rows = keep[:n_rows]
    frame = {name: values[rows] for name, values in candidates.items()}

    names = np.array(TARGET_CLASSES, dtype=object)
    position = np.searchsorted(cuts, score[rows])
    rng = substream(seed, 2)
    flip = rng.random(n_rows) < LABEL_NOISE
    offsets = rng.integers(1, len(names), n_rows)
    frame[TARGET] = np.where(flip, names[(position + offsets) % len(names)], names[position])

    schema = benchmark_schema()
    table = Table(schema, pd.DataFrame({name: frame[name] for name in schema.names}))
    logger.info(f"Generated benchmark with {n_rows} rows from {size} candidates (seed {seed})")
    return table


def render_sensitivity_config(tag_keywords: Optional[Dict[str, List[str]]] = None) -> str:
    tag_keywords = tag_keywords or sensitivity_config.DEFAULT_TAG_KEYWORDS
    lines = ['[tags]']
    lines.extend(f"{tag} = {', '.join(words)}" for tag, words in sorted(tag_keywords.items()))
    return '\n'.join(lines) + '\n'


def write_benchmark(table: Table, out_dir, header: Optional[str] = None) -> Dict[str, Path]:
    """Write the table, its tagged schema, a sensitivity config and the policy text."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        'data': out_dir / 'benchmark.csv',
        'schema': out_dir / 'schema.yaml',
        'sensitivity_config': out_dir / 'sensitivity.cfg',
        'policy': out_dir / 'policy.txt',
    }
    export_table(table, paths['data'], header)
    save_schema_config(table.schema, paths['schema'], header)
    prefix = header.rstrip('\n') + '\n' if header else ''
    for key, body in (('sensitivity_config', render_sensitivity_config()),
                      ('policy', '\n'.join(BENCHMARK_POLICY) + '\n')):
        with paths[key].open('w', encoding='utf-8', newline='\n') as fh:
            fh.write(prefix + body)
    return paths
