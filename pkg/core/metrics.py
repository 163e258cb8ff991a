# core/metrics.py
"""Distribution distances, CDF export and the PCA coverage projection."""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from scipy.stats import ks_2samp, wasserstein_distance

from core.dataset import CONTINUOUS, Table, category_frequencies
from core.errors import InputError

logger = logging.getLogger(__name__)

EIGEN_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    kind: str
    values: Optional[np.ndarray] = None               # sorted, continuous only
    probabilities: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind == CONTINUOUS:
            if self.values is None or len(self.values) == 0:
                raise InputError("continuous distribution needs at least one value")
        elif abs(sum(self.probabilities.values()) - 1.0) > 1e-9:
            raise InputError("category probabilities must sum to 1")

    @classmethod
    def from_series(cls, values: pd.Series, kind: str) -> 'EmpiricalDistribution':
        present = values.dropna()
        if kind == CONTINUOUS:
            return cls(kind, values=np.sort(present.to_numpy(dtype=float)))
        return cls(kind, probabilities=category_frequencies(present))


def _sample(values, name: str) -> np.ndarray:
    array = np.asarray(values, dtype=float).ravel()
    if len(array) == 0:
        raise InputError(f"{name} sample is empty")
    return array


def emd_1d(a, b) -> float:
    """Exact 1-D Earth Mover's Distance between two empirical samples."""
    return float(wasserstein_distance(_sample(a, 'first'), _sample(b, 'second')))


def emd_categorical(a: Dict[str, float], b: Dict[str, float]) -> float:
    """EMD with unit ground distance, i.e. total variation."""
    support = set(a) | set(b)
    return 0.5 * float(sum(abs(a.get(c, 0.0) - b.get(c, 0.0)) for c in support))


def ks_stat(a, b) -> float:
    """Largest gap between the two empirical CDFs."""
    result = ks_2samp(_sample(a, 'first'), _sample(b, 'second'), method='asymp')
    return float(result.statistic)


def categorical_ks(a: Dict[str, float], b: Dict[str, float]) -> float:
    """KS analogue for categories: largest cumulative gap in sorted category order."""
    support = sorted(set(a) | set(b))
    gaps = np.cumsum([a.get(c, 0.0) - b.get(c, 0.0) for c in support])
    return float(np.abs(gaps).max()) if len(gaps) else 0.0


def cdf_points(values) -> List[Tuple[float, float]]:
    """Vertices (x, F(x)) of the empirical CDF step function."""
    array = _sample(values, 'CDF')
    xs, counts = np.unique(array, return_counts=True)
    fractions = np.cumsum(counts) / len(array)
    fractions[-1] = 1.0
    return [(float(x), float(f)) for x, f in zip(xs, fractions)]


def normalized_emd(real: pd.Series, synth: pd.Series, kind: str) -> float:
    """EMD on the band scale.

    Continuous columns are divided by the real column's range (left raw when
    the range is zero); discrete columns use total variation.
    """
    real = real.dropna()
    synth = synth.dropna()
    if kind == CONTINUOUS:
        real_values = real.to_numpy(dtype=float)
        distance = emd_1d(real_values, synth.to_numpy(dtype=float))
        span = float(real_values.max() - real_values.min())
        return distance / span if span > 0 else distance
    return emd_categorical(category_frequencies(real), category_frequencies(synth))


@dataclass
class AttributeFidelity:
    kind: str
    ks: float
    emd: float


@dataclass
class FidelityReport:
    attributes: Dict[str, AttributeFidelity]

    @property
    def mean_ks(self) -> float:
        return float(np.mean([a.ks for a in self.attributes.values()]))

    @property
    def mean_emd(self) -> float:
        return float(np.mean([a.emd for a in self.attributes.values()]))

    def to_dict(self) -> Dict:
        return {
            'attributes': {name: {'kind': a.kind, 'ks': a.ks, 'emd': a.emd}
                           for name, a in self.attributes.items()},
            'mean_ks': self.mean_ks,
            'mean_emd': self.mean_emd,
        }


def fidelity_report(real: Table, synth: Table) -> FidelityReport:
    """Per-attribute KS and normalized EMD of synth against real."""
    attributes = {}
    for spec in real.schema.columns:
        r, s = real.non_missing(spec.name), synth.non_missing(spec.name)
        if len(r) == 0 or len(s) == 0:
            logger.warning(f"Column '{spec.name}' has no values on one side; skipped in fidelity")
            continue
        if spec.kind == CONTINUOUS:
            ks = ks_stat(r.to_numpy(dtype=float), s.to_numpy(dtype=float))
        else:
            ks = categorical_ks(category_frequencies(r), category_frequencies(s))
        attributes[spec.name] = AttributeFidelity(spec.kind, ks, normalized_emd(r, s, spec.kind))
    return FidelityReport(attributes)


class PCAProjection:
    """Projection onto the top principal components of a standardized encoding.

    Continuous columns enter z-scored (missing at the mean); discrete columns
    are one-hot encoded over the categories seen at fit time.
    """

    def __init__(self, dims: int = 2):
        self.dims = dims
        self.categories: Dict[str, List[str]] = {}
        self.means: Optional[np.ndarray] = None
        self.scales: Optional[np.ndarray] = None
        self.components: Optional[np.ndarray] = None
        self.explained_variance_ratio: Optional[np.ndarray] = None
        self.schema = None

    def _encode(self, table: Table) -> np.ndarray:
        blocks = []
        for spec in self.schema.columns:
            column = table.column(spec.name)
            if spec.kind == CONTINUOUS:
                blocks.append(column.astype(float).to_numpy()[:, None])
            else:
                cats = self.categories[spec.name]
                blocks.append(np.column_stack([(column == c).to_numpy(dtype=float) for c in cats])
                              if cats else np.zeros((len(table), 0)))
        return np.hstack(blocks) if blocks else np.zeros((len(table), 0))

    def fit(self, table: Table) -> 'PCAProjection':
        if len(table) < 2:
            raise InputError("PCA projection needs at least 2 rows")
        self.schema = table.schema
        self.categories = {name: sorted(table.non_missing(name).astype(str).unique())
                           for name in table.schema.discrete}
        encoded = self._encode(table)
        self.means = np.nanmean(encoded, axis=0)
        encoded = np.where(np.isnan(encoded), self.means, encoded)
        scales = encoded.std(axis=0)
        self.scales = np.where(scales > 0, scales, 1.0)
        standardized = (encoded - self.means) / self.scales

        cov = np.cov(standardized, rowvar=False, ddof=1).reshape(encoded.shape[1], encoded.shape[1])
        eigvals, eigvecs = np.linalg.eigh(cov)
        order = np.argsort(eigvals)[::-1]
        eigvals, eigvecs = eigvals[order], eigvecs[:, order]

        total = eigvals[eigvals > 0].sum()
        components = np.zeros((self.dims, encoded.shape[1]))
        ratios = np.zeros(self.dims)
        for i in range(min(self.dims, len(eigvals))):
            if eigvals[i] <= EIGEN_TOLERANCE:
                break
            vector = eigvecs[:, i]
            # deterministic orientation: largest loading positive
            if vector[np.argmax(np.abs(vector))] < 0:
                vector = -vector
            components[i] = vector
            ratios[i] = eigvals[i] / total
        if not ratios.all():
            logger.warning(f"Degenerate covariance; {int((ratios == 0).sum())} component(s) padded with zeros")
        self.components = components
        self.explained_variance_ratio = ratios
        return self

    def transform(self, table: Table) -> np.ndarray:
        encoded = self._encode(table)
        encoded = np.where(np.isnan(encoded), self.means, encoded)
        return ((encoded - self.means) / self.scales) @ self.components.T


def pca_project(table: Table, dims: int = 2) -> np.ndarray:
    """(n, dims) coordinates of the table's rows on its own principal components."""
    return PCAProjection(dims).fit(table).transform(table)


def pca_overlay(real: Table, synth: Table, dims: int = 2) -> pd.DataFrame:
    """Both tables projected with the real table's components, labelled by source."""
    projection = PCAProjection(dims).fit(real)
    columns = [f"pc{i + 1}" for i in range(dims)]
    frames = []
    for label, table in (('real', real), ('synthetic', synth)):
        frame = pd.DataFrame(projection.transform(table), columns=columns)
        frame.insert(0, 'source', label)
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def centroid_distance(overlay: pd.DataFrame) -> float:
    """Euclidean distance between the real and synthetic centroids of an overlay."""
    coords = [c for c in overlay.columns if c != 'source']
    centroids = overlay.groupby('source')[coords].mean()
    return float(np.linalg.norm(centroids.loc['real'] - centroids.loc['synthetic']))
