# core/synth.py
"""
Latent-Gaussian copula backend.

Continuous marginals are mixture-normalized and kept as a quantile table
of the reconstructed column; discrete marginals are category frequencies
placed on latent thresholds. Dependence lives in one shrunk correlation
matrix over all columns.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.stats import norm, truncnorm

from config.settings import COPULA_DEFAULTS, MIXTURE_DEFAULTS
from core.dataset import CONTINUOUS, Schema, Table, category_frequencies
from core.errors import ModelError
from core.mixture import ModeModel, denormalize_values, fit_gmm, normalize_values
from utils.helpers import substream

logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class TabularModel:
    schema: Schema
    mode_models: Dict[str, ModeModel]
    frequencies: Dict[str, Dict[str, float]]
    quantiles: Dict[str, np.ndarray]
    correlation: np.ndarray
    shrinkage: float
    n_rows: int
    metadata: Dict = field(default_factory=dict)

    def categories(self, column: str) -> List[str]:
        return list(self.frequencies[column])

    def cumulative(self, column: str) -> np.ndarray:
        """Cumulative category frequencies with a leading 0 and trailing 1."""
        freqs = np.fromiter(self.frequencies[column].values(), dtype=float)
        cum = np.concatenate([[0.0], np.cumsum(freqs)])
        cum[-1] = 1.0
        return cum

    def latent_interval(self, column: str, category: str) -> Tuple[float, float]:
        cats = self.categories(column)
        j = cats.index(category)
        cum = self.cumulative(column)
        lower = -np.inf if j == 0 else float(norm.ppf(cum[j]))
        upper = np.inf if j == len(cats) - 1 else float(norm.ppf(cum[j + 1]))
        return lower, upper


def _continuous_scores(values: pd.Series) -> pd.Series:
    """Standard-normal scores from averaged ranks: Phi^-1(rank / (n + 1))."""
    n = values.notna().sum()
    ranks = values.rank(method='average')
    return pd.Series(norm.ppf(ranks / (n + 1)), index=values.index)


def _discrete_scores(values: pd.Series, frequencies: Dict[str, float]) -> pd.Series:
    """Mid-interval latent score for each category."""
    cum = np.concatenate([[0.0], np.cumsum(list(frequencies.values()))])
    mids = norm.ppf(np.clip((cum[:-1] + cum[1:]) / 2.0, 1e-12, 1 - 1e-12))
    lookup = dict(zip(frequencies, mids))
    return values.map(lambda v: lookup.get(str(v), np.nan) if pd.notna(v) else np.nan).astype(float)


def _shrink(corr: np.ndarray, shrinkage: float) -> Tuple[np.ndarray, float]:
    identity = np.eye(len(corr))
    step = COPULA_DEFAULTS['shrinkage_step']
    floor = COPULA_DEFAULTS['min_eigenvalue']
    requested = shrinkage
    while True:
        shrunk = (1.0 - shrinkage) * corr + shrinkage * identity
        if np.linalg.eigvalsh(shrunk).min() > floor or shrinkage >= 1.0:
            break
        shrinkage = min(1.0, round(shrinkage + step, 10))
    if shrinkage > requested:
        logger.warning(f"Correlation not positive definite at lambda={requested}; used {shrinkage}")
    return shrunk, shrinkage


def fit(table: Table, schema: Optional[Schema] = None,
        shrinkage: float = COPULA_DEFAULTS['shrinkage'],
        k_max: int = MIXTURE_DEFAULTS['k_max'],
        min_rows: int = COPULA_DEFAULTS['min_rows']) -> TabularModel:
    """Fit per-column marginals and the latent correlation matrix.

    Raises:
        ModelError: fewer than min_rows rows, or a column with no values
    """
    schema = schema or table.schema
    if not 0.0 <= shrinkage <= 1.0:
        raise ModelError(f"shrinkage must lie in [0, 1], got {shrinkage}")
    if len(table) < min_rows:
        raise ModelError(f"table has {len(table)} rows; fitting a model to fewer than "
                         f"{min_rows} rows is not advised")

    fit_seed = COPULA_DEFAULTS['fit_seed']
    mode_models, frequencies, quantiles = {}, {}, {}
    latent = pd.DataFrame(index=table.frame.index)

    for index, spec in enumerate(schema.columns):
        column = table.column(spec.name)
        present = column.dropna()
        if len(present) == 0:
            raise ModelError(f"column '{spec.name}' has no values to fit")

        if spec.kind == CONTINUOUS:
            values = present.to_numpy(dtype=float)
            model = fit_gmm(values, k_max=k_max)
            modes, alphas = normalize_values(values, model, substream(fit_seed, index))
            reconstructed = denormalize_values(modes, alphas, model)
            knots = min(len(values), COPULA_DEFAULTS['quantile_knots'])
            quantiles[spec.name] = np.quantile(reconstructed, np.linspace(0.0, 1.0, knots))
            mode_models[spec.name] = model
            latent[spec.name] = _continuous_scores(column.astype(float))
        else:
            frequencies[spec.name] = category_frequencies(column)
            latent[spec.name] = _discrete_scores(column, frequencies[spec.name])

    corr = latent.corr(method='pearson').to_numpy()
    corr = np.nan_to_num(corr, nan=0.0)
    corr = (corr + corr.T) / 2.0
    np.fill_diagonal(corr, 1.0)
    correlation, used = _shrink(corr, shrinkage)

    logger.info(f"Fitted copula on {len(table)} rows, {schema.width} columns, lambda={used}")
    return TabularModel(schema, mode_models, frequencies, quantiles, correlation, used, len(table),
                        metadata={'k_max': k_max, 'requested_shrinkage': shrinkage})


def _decode(model: TabularModel, latent: np.ndarray) -> pd.DataFrame:
    uniforms = norm.cdf(latent)
    frame = {}
    for index, spec in enumerate(model.schema.columns):
        u = uniforms[:, index]
        if spec.kind == CONTINUOUS:
            knots = model.quantiles[spec.name]
            frame[spec.name] = np.interp(u, np.linspace(0.0, 1.0, len(knots)), knots)
        else:
            cats = np.asarray(model.categories(spec.name), dtype=object)
            cum = model.cumulative(spec.name)
            idx = np.searchsorted(cum[1:-1], u, side='right')
            frame[spec.name] = cats[idx]
    return pd.DataFrame(frame, columns=model.schema.names)


def _independent_normals(seed: int, n: int, columns: List[int]) -> np.ndarray:
    """Standard normals, one substream per column index."""
    return np.column_stack([substream(seed, j).standard_normal(n) for j in columns])


def sample(model: TabularModel, n: int, seed: int) -> Table:
    """Draw n synthetic rows; identical for identical (model, n, seed)."""
    if n < 1:
        raise ModelError(f"sample size must be at least 1, got {n}")
    d = model.schema.width
    chol = np.linalg.cholesky(model.correlation)
    latent = _independent_normals(seed, n, list(range(d))) @ chol.T
    return Table(model.schema, _decode(model, latent))


def sample_conditional(model: TabularModel, column: str, category: str, n: int, seed: int) -> Table:
    """Draw n rows whose `column` equals `category`.

    The conditioning score is drawn from the standard normal truncated to the
    category's latent interval; the rest follow the exact conditional Gaussian.
    """
    if n < 1:
        raise ModelError(f"sample size must be at least 1, got {n}")
    if column not in model.frequencies:
        raise ModelError(f"'{column}' is not a discrete column of the model")
    if category not in model.frequencies[column]:
        raise ModelError(f"unknown category '{category}' for column '{column}'")

    lower, upper = model.latent_interval(column, category)
    if np.isneginf(lower) and np.isposinf(upper):
        return sample(model, n, seed)

    c = model.schema.index_of(column)
    others = [j for j in range(model.schema.width) if j != c]
    r = model.correlation
    z_c = truncnorm.rvs(lower, upper, size=n, random_state=substream(seed, c))

    latent = np.empty((n, model.schema.width))
    latent[:, c] = z_c
    if others:
        cross = r[others, c]
        cond_cov = r[np.ix_(others, others)] - np.outer(cross, cross)
        chol = np.linalg.cholesky((cond_cov + cond_cov.T) / 2.0)
        latent[:, others] = np.outer(z_c, cross) + _independent_normals(seed, n, others) @ chol.T

    frame = _decode(model, latent)
    frame[column] = category
    return Table(model.schema, frame)


def save_model(model: TabularModel, path, header: Optional[str] = None) -> None:
    """Persist everything sampling needs; load_model reproduces it exactly."""
    payload = {
        'format_version': MODEL_FORMAT_VERSION,
        'schema': model.schema.to_dict(),
        'mode_models': {name: m.to_dict() for name, m in model.mode_models.items()},
        'frequencies': model.frequencies,
        'quantiles': {name: [float(v) for v in q] for name, q in model.quantiles.items()},
        'correlation': [[float(v) for v in row] for row in model.correlation],
        'shrinkage': float(model.shrinkage),
        'n_rows': int(model.n_rows),
        'metadata': model.metadata,
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='\n') as fh:
        if header:
            fh.write(header.rstrip('\n') + '\n')
        json.dump(payload, fh, sort_keys=True, indent=1)
        fh.write('\n')


def load_model(path) -> TabularModel:
    path = Path(path)
    try:
        lines = path.read_text(encoding='utf-8').splitlines()
    except OSError as e:
        raise ModelError(f"cannot read model file {path}: {e.strerror}")
    body = '\n'.join(line for line in lines if not line.startswith('#'))
    try:
        payload = json.loads(body)
    except json.JSONDecodeError as e:
        raise ModelError(f"model file {path} is not valid JSON: {e}")

    version = payload.get('format_version')
    if version != MODEL_FORMAT_VERSION:
        raise ModelError(f"unsupported model format version {version}")

    schema = Schema.from_dict(payload['schema'])
    return TabularModel(
        schema=schema,
        mode_models={name: ModeModel.from_dict(m) for name, m in payload['mode_models'].items()},
        # keep the saved category order; it defines the latent thresholds
        frequencies={name: dict(f) for name, f in payload['frequencies'].items()},
        quantiles={name: np.asarray(q, dtype=float) for name, q in payload['quantiles'].items()},
        correlation=np.asarray(payload['correlation'], dtype=float),
        shrinkage=float(payload['shrinkage']),
        n_rows=int(payload['n_rows']),
        metadata=payload.get('metadata', {}),
    )
