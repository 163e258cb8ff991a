# core/mixture.py
"""
One-dimensional Gaussian mixtures for mode-specific normalization.

A continuous value v is encoded as (mode, alpha): the mode is drawn from
the posterior p(mode | v) and alpha = clip((v - mu) / (4 sigma), -1, 1).
"""

import logging
from dataclasses import dataclass
from typing import Dict, NamedTuple, Optional, Tuple

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from config.settings import MIXTURE_DEFAULTS
from core.errors import ModelError
from utils.helpers import substream

logger = logging.getLogger(__name__)

WIDTH = MIXTURE_DEFAULTS['normalization_width']


class NormalizedCell(NamedTuple):
    mode_id: int    # 1-based component index
    alpha: float    # in [-1, 1]


@dataclass(frozen=True, eq=False)
class ModeModel:
    weights: np.ndarray
    means: np.ndarray
    stds: np.ndarray
    log_likelihood: float
    value_range: Tuple[float, float]
    sigma_floor: float
    bic: float = float('nan')
    trace: Tuple[float, ...] = ()
    degenerate: bool = False

    @property
    def k(self) -> int:
        return len(self.weights)

    def log_joint(self, values: np.ndarray) -> np.ndarray:
        """(n, k) array of log(pi_i) + log N(v | mu_i, sigma_i)."""
        values = np.asarray(values, dtype=float).reshape(-1, 1)
        with np.errstate(divide='ignore'):
            log_w = np.log(self.weights)
        return norm.logpdf(values, self.means, self.stds) + log_w

    def posterior(self, values) -> np.ndarray:
        log_joint = self.log_joint(values)
        return np.exp(log_joint - logsumexp(log_joint, axis=1, keepdims=True))

    def to_dict(self) -> Dict:
        return {
            'weights': [float(w) for w in self.weights],
            'means': [float(m) for m in self.means],
            'stds': [float(s) for s in self.stds],
            'log_likelihood': float(self.log_likelihood),
            'value_range': [float(self.value_range[0]), float(self.value_range[1])],
            'sigma_floor': float(self.sigma_floor),
            'bic': float(self.bic),
            'degenerate': bool(self.degenerate),
        }

    @classmethod
    def from_dict(cls, data: Dict) -> 'ModeModel':
        return cls(
            weights=np.asarray(data['weights'], dtype=float),
            means=np.asarray(data['means'], dtype=float),
            stds=np.asarray(data['stds'], dtype=float),
            log_likelihood=float(data['log_likelihood']),
            value_range=(float(data['value_range'][0]), float(data['value_range'][1])),
            sigma_floor=float(data['sigma_floor']),
            bic=float(data.get('bic', float('nan'))),
            degenerate=bool(data.get('degenerate', False)),
        )


def _seed_means(values: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ style seeding: each new centre drawn with probability ~ D^2."""
    centres = [values[rng.integers(len(values))]]
    for _ in range(1, k):
        d2 = np.min((values[:, None] - np.asarray(centres)[None, :]) ** 2, axis=1)
        total = d2.sum()
        if total <= 0:
            centres.append(values[rng.integers(len(values))])
        else:
            centres.append(values[rng.choice(len(values), p=d2 / total)])
    return np.sort(np.asarray(centres, dtype=float))


def _e_step(values, weights, means, stds) -> Tuple[float, np.ndarray]:
    with np.errstate(divide='ignore'):
        log_joint = norm.logpdf(values[:, None], means, stds) + np.log(weights)
    log_norm = logsumexp(log_joint, axis=1)
    resp = np.exp(log_joint - log_norm[:, None])
    return float(log_norm.sum()), resp


def _run_em(values: np.ndarray, k: int, sigma_floor: float, rng: np.random.Generator,
            tolerance: float, max_iter: int):
    n = len(values)
    means = _seed_means(values, k, rng)
    stds = np.full(k, max(values.std(), sigma_floor))
    weights = np.full(k, 1.0 / k)

    ll, resp = _e_step(values, weights, means, stds)
    trace = [ll]
    for _ in range(max_iter):
        nk = resp.sum(axis=0)
        alive = nk > 1e-12
        weights = nk / n
        new_means = means.copy()
        new_means[alive] = (resp[:, alive] * values[:, None]).sum(axis=0) / nk[alive]
        new_stds = stds.copy()
        var = (resp[:, alive] * (values[:, None] - new_means[alive]) ** 2).sum(axis=0) / nk[alive]
        new_stds[alive] = np.maximum(np.sqrt(var), sigma_floor)
        means, stds = new_means, new_stds

        new_ll, resp = _e_step(values, weights, means, stds)
        trace.append(new_ll)
        gain = new_ll - ll
        ll = new_ll
        if gain < tolerance:
            break
    return weights, means, stds, trace


def fit_gmm(values, k_max: int = MIXTURE_DEFAULTS['k_max'],
            seed: int = MIXTURE_DEFAULTS['init_seed'],
            tolerance: float = MIXTURE_DEFAULTS['tolerance'],
            max_iter: int = MIXTURE_DEFAULTS['max_iter']) -> ModeModel:
    """Fit mixtures with 1..k_max components by EM and keep the lowest BIC.

    A constant column yields a flagged single mode with sigma at the floor.
    """
    values = np.asarray(values, dtype=float)
    values = values[np.isfinite(values)]
    if len(values) == 0:
        raise ModelError("cannot fit a mixture to an empty column")
    if k_max < 1:
        raise ModelError(f"k_max must be at least 1, got {k_max}")

    n = len(values)
    std = float(values.std())
    ratio = MIXTURE_DEFAULTS['sigma_floor_ratio']
    sigma_floor = ratio * std if std > 0 else ratio
    value_range = (float(values.min()), float(values.max()))
    distinct = np.unique(values)

    if len(distinct) < 2:
        logger.warning(f"Constant column (value {distinct[0]}); using a single degenerate mode")
        mean = np.array([distinct[0]])
        sd = np.array([sigma_floor])
        ll = float(norm.logpdf(values, mean[0], sd[0]).sum())
        return ModeModel(np.array([1.0]), mean, sd, ll, value_range, sigma_floor,
                         bic=-2 * ll + 1 * np.log(n), trace=(ll,), degenerate=True)

    best: Optional[ModeModel] = None
    for k in range(1, min(k_max, len(distinct)) + 1):
        weights, means, stds, trace = _run_em(values, k, sigma_floor, substream(seed, k),
                                              tolerance, max_iter)
        ll = trace[-1]
        bic = -2.0 * ll + (3 * k - 1) * np.log(n)
        order = np.argsort(means, kind='stable')
        candidate = ModeModel(weights[order], means[order], stds[order], ll, value_range,
                              sigma_floor, bic=float(bic), trace=tuple(trace))
        logger.debug(f"k={k}: log-likelihood {ll:.4f}, BIC {bic:.4f}, {len(trace)} EM steps")
        if best is None or candidate.bic < best.bic:
            best = candidate

    # Zero-weight components carry no information
    keep = best.weights > 0
    if not keep.all():
        w = best.weights[keep]
        best = ModeModel(w / w.sum(), best.means[keep], best.stds[keep], best.log_likelihood,
                         best.value_range, best.sigma_floor, best.bic, best.trace)
    return best


def mode_normalize(value: float, model: ModeModel, rng: np.random.Generator) -> NormalizedCell:
    """Encode one value: sample its mode from the posterior, then scale within it."""
    modes, alphas = normalize_values(np.array([value]), model, rng)
    return NormalizedCell(int(modes[0]), float(alphas[0]))


def normalize_values(values, model: ModeModel, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized mode_normalize; returns 1-based mode ids and alphas."""
    values = np.asarray(values, dtype=float)
    posterior = model.posterior(values)
    cumulative = np.cumsum(posterior, axis=1)
    draws = rng.random(len(values))
    modes = np.minimum((draws[:, None] > cumulative).sum(axis=1), model.k - 1)
    alphas = np.clip((values - model.means[modes]) / (WIDTH * model.stds[modes]), -1.0, 1.0)
    return modes + 1, alphas


def mode_denormalize(cell: NormalizedCell, model: ModeModel) -> float:
    if not 1 <= cell.mode_id <= model.k:
        raise ModelError(f"mode {cell.mode_id} outside 1..{model.k}")
    index = cell.mode_id - 1
    return float(cell.alpha * WIDTH * model.stds[index] + model.means[index])


def denormalize_values(modes, alphas, model: ModeModel) -> np.ndarray:
    index = np.asarray(modes, dtype=int) - 1
    return np.asarray(alphas, dtype=float) * WIDTH * model.stds[index] + model.means[index]
