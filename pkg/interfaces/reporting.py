# interfaces/reporting.py
"""Provenance headers, report files and the short summaries echoed by the CLI."""

from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import yaml

from config.settings import TOOL_NAME, TOOL_VERSION


def provenance_header(seed: int, config_hash: str) -> str:
    return f"# {TOOL_NAME} {TOOL_VERSION} seed={seed} config={config_hash}"


def to_plain(value):
    """Recursively turn numpy scalars, arrays and tuples into YAML-safe builtins."""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_plain(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def write_report(payload: Dict, path, header: Optional[str] = None) -> Path:
    """Write a YAML report with sorted keys behind the provenance line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = yaml.safe_dump(to_plain(payload), sort_keys=True, allow_unicode=True, default_flow_style=False)
    with path.open('w', encoding='utf-8', newline='\n') as fh:
        if header:
            fh.write(header.rstrip('\n') + '\n')
        fh.write(body)
    return path


def write_points(frame: pd.DataFrame, path, header: Optional[str] = None) -> Path:
    """Plain CSV point file for external plotting."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('w', encoding='utf-8', newline='') as fh:
        if header:
            fh.write(header.rstrip('\n') + '\n')
        fh.write(frame.to_csv(index=False, lineterminator='\n'))
    return path


def cdf_frame(series: Iterable[Tuple[str, Sequence[Tuple[float, float]]]]) -> pd.DataFrame:
    """Stack labelled CDF vertex lists into one (source, x, F) frame."""
    rows = [(label, x, f) for label, points in series for x, f in points]
    return pd.DataFrame(rows, columns=['source', 'x', 'F'])


def format_counts(title: str, counts: Dict[str, int]) -> List[str]:
    width = max((len(k) for k in counts), default=0)
    lines = [title]
    lines.extend(f"  {name.ljust(width)}  {count}" for name, count in counts.items())
    return lines


def format_enforcement(report: Dict) -> List[str]:
    lines = [f"Enforcement {report['status']} after {report['iterations']} iteration(s) "
             f"(selected iteration {report['selected_iteration']})"]
    for name, trace in report['attributes'].items():
        lines.append(f"  {name}: {trace['level']} EMD {trace['final_emd']:.4f} "
                     f"band [{trace['band'][0]}, {trace['band'][1]}] {trace['status']}")
    return lines


def format_utility(report: Dict) -> List[str]:
    lines = [f"Utility on '{report['target']}' (majority baseline {report['baseline']:.3f})"]
    for kind, entry in report['classifiers'].items():
        lines.append(f"  {kind}: real {entry['real_accuracy']:.3f}  synthetic {entry['synth_accuracy']:.3f}  "
                     f"delta {entry['delta']:+.3f}")
    return lines


def format_attack(report: Dict) -> List[str]:
    return [f"{report['attack']} on {', '.join(report['targets'])}: "
            f"success {report['success_rate']:.3f}, baseline {report['baseline']:.3f}, "
            f"advantage {report['advantage']:+.3f}"]


def _gap(value: Optional[float]) -> str:
    return '-' if value is None else f"{value:+.3f}"


def format_sweep(report: Dict) -> List[str]:
    lines = [f"Sweep on '{report['target']}' with {report['classifier']} over {len(report['runs'])} seed(s)"]
    for run in report['runs']:
        lines.append(f"  seed {run['seed']}: real {run['real_accuracy']:.3f}  enforced {run['enforced_accuracy']:.3f}  "
                     f"inference gap {_gap(run['inference_gap'])}  "
                     f"re-identification gap {_gap(run['reidentification_gap'])}")
    lines.append(f"  mean utility gap {report['mean_utility_gap']:+.3f}, "
                 f"inference gap {_gap(report['mean_inference_gap'])}, "
                 f"re-identification gap {_gap(report['mean_reidentification_gap'])}")
    return lines
