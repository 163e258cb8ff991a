# interfaces/cli.py
"""
Command line for the policy-enforced synthesis pipeline.

Every subcommand takes flags, optionally backed by a YAML run config
(--config); flags win. Every file written starts with a provenance line.
"""

import functools
import logging
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import click
import yaml

from config.sensitivity import DEFAULT_FLIP_TARGET, FLIP_TARGETS
from config.settings import (ATTACK_DEFAULTS, COPULA_DEFAULTS, DATASET_DEFAULTS, ENFORCEMENT_DEFAULTS,
                             EXIT_CODES, MIXTURE_DEFAULTS, TOOL_NAME, TOOL_VERSION)
from core import attacks, benchmark, evaluation, metrics, policy, sensitivity, sweep, synth
from core.classifiers import CLASSIFIER_KINDS
from core.dataset import Schema, SchemaConfig, Table, export_table, load_schema_config, load_table, split
from core.enforcement import DistortionConfig, generate_enforced
from core.errors import ConfigError, InputError, PolicyVaultError
from interfaces import reporting
from utils.helpers import stable_hash, strip_header_lines

logger = logging.getLogger(__name__)

ATTACK_KINDS = ('inference', 'reidentification')
PATH_FIELDS = ('data', 'policy', 'schema', 'sensitivity_config', 'rules', 'map', 'model', 'synth',
               'out', 'lexicon')
CONFIG_ALIASES = {'lambda': 'shrinkage', 'sensitivity-config': 'sensitivity_config', 'max-iters': 'max_iters'}
SWEEP_SEEDS = 5


@dataclass
class RunConfig:
    """Resolved settings for one subcommand run."""
    command: str
    data: Optional[Path] = None
    policy: Optional[Path] = None
    schema: Optional[Path] = None
    sensitivity_config: Optional[Path] = None
    rules: Optional[Path] = None
    map: Optional[Path] = None
    model: Optional[Path] = None
    synth: Optional[Path] = None
    out: Optional[Path] = None
    lexicon: Optional[Path] = None
    seed: Optional[int] = None
    n: int = ENFORCEMENT_DEFAULTS['n_samples']
    max_iters: int = ENFORCEMENT_DEFAULTS['max_iters']
    target: Optional[str] = None
    qi: List[str] = field(default_factory=list)
    known: List[str] = field(default_factory=list)
    attack: str = 'inference'
    delta: float = ATTACK_DEFAULTS['match_tolerance']
    classifier: str = ATTACK_DEFAULTS['classifier']
    holdout_fraction: float = DATASET_DEFAULTS['holdout_fraction']
    shrinkage: float = COPULA_DEFAULTS['shrinkage']
    k_max: int = MIXTURE_DEFAULTS['k_max']
    flip_target: str = DEFAULT_FLIP_TARGET
    split_seed: Optional[int] = None
    seeds: int = SWEEP_SEEDS
    infer: Optional[str] = None
    sensitive: List[str] = field(default_factory=list)

    @classmethod
    def build(cls, command: str, config_path: Optional[str] = None, **flags) -> 'RunConfig':
        values: Dict = {}
        if config_path:
            values.update(_read_run_config(config_path))
        values.update({k: v for k, v in flags.items() if v is not None})

        known_fields = {f.name for f in fields(cls)} - {'command'}
        unknown = sorted(set(values) - known_fields)
        if unknown:
            raise ConfigError(f"unknown run settings {unknown}", path=config_path)

        for name in PATH_FIELDS:
            if values.get(name) is not None:
                values[name] = Path(str(values[name])).expanduser().resolve()
        for name in ('qi', 'known', 'sensitive'):
            if isinstance(values.get(name), str):
                values[name] = [c.strip() for c in values[name].split(',') if c.strip()]
        try:
            for name, cast in (('seed', int), ('n', int), ('max_iters', int), ('k_max', int), ('split_seed', int),
                               ('seeds', int), ('delta', float), ('holdout_fraction', float), ('shrinkage', float)):
                if values.get(name) is not None:
                    values[name] = cast(values[name])
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid run setting: {e}", path=config_path)
        return cls(command=command, **values)

    def config_hash(self) -> str:
        """Digest of the non-path settings plus the base names of the paths."""
        payload = asdict(self)
        for name in PATH_FIELDS:
            payload[name] = payload[name].name if payload[name] is not None else None
        return stable_hash(payload)

    def header(self) -> str:
        return reporting.provenance_header(self.seed, self.config_hash())

    def target_columns(self) -> List[str]:
        return [c.strip() for c in (self.target or '').split(',') if c.strip()]

    def holdout(self, real: Table) -> Tuple[Table, Table, Dict]:
        """(train, holdout, split record); fit, synthesize and evaluate share it."""
        split_seed = self.seed if self.split_seed is None else self.split_seed
        train, held_out = split(real, self.holdout_fraction, split_seed)
        return train, held_out, evaluation.split_record(train, held_out, self.holdout_fraction, split_seed)


def _read_run_config(path) -> Dict:
    try:
        with Path(path).open(encoding='utf-8') as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as e:
        raise ConfigError(f"cannot read run config: {e.strerror}", path=str(path))
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML: {e}", path=str(path))
    if not isinstance(data, dict):
        raise ConfigError("run config must be a mapping", path=str(path))
    return {CONFIG_ALIASES.get(str(k), str(k).replace('-', '_')): v for k, v in data.items()}


def _require(cfg: RunConfig, *names: str):
    for name in names:
        value = getattr(cfg, name)
        if value is None or value == []:
            raise click.UsageError(f"--{name.replace('_', '-')} is required (flag or run config)")


def run_command(fn):
    """Map library errors onto exit codes."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except PolicyVaultError as e:
            click.echo(f"error: {e}", err=True)
            raise click.exceptions.Exit(EXIT_CODES['input'])
        except OSError as e:
            click.echo(f"error: {e}", err=True)
            raise click.exceptions.Exit(EXIT_CODES['input'])
    return wrapper


def _echo(lines: List[str]):
    for line in lines:
        click.echo(line)


def _load_real(cfg: RunConfig):
    schema_config = load_schema_config(cfg.schema) if cfg.schema else None
    return load_table(cfg.data, schema_config)


def _schema_only(cfg: RunConfig) -> Schema:
    """Schema from the data when given, else every column listed in the schema config."""
    if cfg.data:
        return _load_real(cfg).schema
    config: SchemaConfig = load_schema_config(cfg.schema)
    if not config.columns:
        raise ConfigError("schema config lists no columns", path=str(cfg.schema))
    return Schema(tuple(config.columns.values()))


def _sensitivity_config(cfg: RunConfig) -> sensitivity.SensitivityConfig:
    if cfg.sensitivity_config:
        return sensitivity.load_sensitivity_config(cfg.sensitivity_config)
    return sensitivity.SensitivityConfig()


def _sensitivity_map(cfg: RunConfig, schema: Schema,
                     settings: sensitivity.SensitivityConfig) -> sensitivity.SensitivityMap:
    if cfg.map:
        return sensitivity.load_sensitivity_map(cfg.map, schema)
    rules = policy.load_rules(cfg.rules) if cfg.rules else []
    return sensitivity.classify_attributes(schema, rules, settings.tag_keywords, settings.overrides)


def run_options(fn):
    fn = click.option('--seed', type=int, default=None, help='Random seed (required).')(fn)
    fn = click.option('--config', 'config_path', type=str, default=None,
                      help='YAML run config; flags override its values.')(fn)
    return fn


@click.group()
@click.version_option(TOOL_VERSION, prog_name=TOOL_NAME)
@click.option('--verbose', is_flag=True, help='Log per-iteration detail.')
def cli(verbose):
    """Policy-enforced synthetic tabular data."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO,
                        format='%(levelname)s %(name)s: %(message)s', stream=sys.stderr, force=True)


@cli.command('extract-rules')
@run_options
@click.option('--policy', 'policy_path', type=str, default=None, help='Policy text document.')
@click.option('--lexicon', type=str, default=None, help='Trigger lexicon file.')
@click.option('--out', type=str, default=None, help='Rule file to write (JSON Lines).')
@run_command
def extract_rules_command(config_path, seed, policy_path, lexicon, out):
    """Extract deontic rules from a policy document."""
    cfg = RunConfig.build('extract-rules', config_path, seed=seed, policy=policy_path, lexicon=lexicon, out=out)
    _require(cfg, 'seed', 'policy', 'out')
    try:
        lines = cfg.policy.read_text(encoding='utf-8').splitlines()
    except OSError as e:
        raise InputError(f"cannot read policy: {e.strerror}", path=str(cfg.policy))
    text = '\n'.join(strip_header_lines(lines))

    rules = policy.extract_rules(text, policy.load_lexicon(cfg.lexicon), document=cfg.policy.name)
    policy.export_rules(rules, cfg.out, cfg.header())
    _echo(reporting.format_counts(f"{len(rules)} rules written to {cfg.out.name}", policy.rule_counts(rules)))


@cli.command('classify')
@run_options
@click.option('--schema', type=str, default=None, help='Schema config (YAML) with column tags.')
@click.option('--data', type=str, default=None, help='Data file, to infer unlisted columns.')
@click.option('--rules', type=str, default=None, help='Rule file from extract-rules.')
@click.option('--sensitivity-config', 'sensitivity_config', type=str, default=None)
@click.option('--out', type=str, default=None, help='Sensitivity map to write (YAML).')
@run_command
def classify_command(config_path, seed, schema, data, rules, sensitivity_config, out):
    """Assign each attribute a sensitivity tier."""
    cfg = RunConfig.build('classify', config_path, seed=seed, schema=schema, data=data, rules=rules,
                          sensitivity_config=sensitivity_config, out=out)
    _require(cfg, 'seed', 'out')
    if cfg.schema is None and cfg.data is None:
        raise click.UsageError('--schema or --data is required')

    table_schema = _schema_only(cfg)
    result = _sensitivity_map(cfg, table_schema, _sensitivity_config(cfg))
    sensitivity.save_sensitivity_map(result, cfg.out, cfg.header())
    _echo(reporting.format_counts('Tier histogram', sensitivity.tier_histogram(result)))


@cli.command('fit')
@run_options
@click.option('--data', type=str, default=None)
@click.option('--schema', type=str, default=None)
@click.option('--split-seed', 'split_seed', type=int, default=None, help='Holdout split seed; defaults to --seed.')
@click.option('--out', type=str, default=None, help='Model file to write.')
@run_command
def fit_command(config_path, seed, data, schema, split_seed, out):
    """Fit and persist the generative model on the training rows."""
    cfg = RunConfig.build('fit', config_path, seed=seed, data=data, schema=schema, split_seed=split_seed, out=out)
    _require(cfg, 'seed', 'data', 'out')
    train, _, record = cfg.holdout(_load_real(cfg))
    model = synth.fit(train, shrinkage=cfg.shrinkage, k_max=cfg.k_max)
    model.metadata['split'] = record
    synth.save_model(model, cfg.out, cfg.header())
    click.echo(f"Model fitted on {len(train)} training rows (lambda {model.shrinkage}) written to {cfg.out.name}")


@cli.command('synthesize')
@run_options
@click.option('--data', type=str, default=None)
@click.option('--schema', type=str, default=None)
@click.option('--map', 'map_path', type=str, default=None, help='Sensitivity map from classify.')
@click.option('--rules', type=str, default=None, help='Rule file, used when no map is given.')
@click.option('--sensitivity-config', 'sensitivity_config', type=str, default=None)
@click.option('--model', type=str, default=None, help='Model file from fit; fitted on the fly otherwise.')
@click.option('--n', type=int, default=None, help='Synthetic rows.')
@click.option('--max-iters', 'max_iters', type=int, default=None)
@click.option('--split-seed', 'split_seed', type=int, default=None, help='Holdout split seed; defaults to --seed.')
@click.option('--out', type=str, default=None, help='Output directory.')
@run_command
def synthesize_command(config_path, seed, data, schema, map_path, rules, sensitivity_config, model,
                       n, max_iters, split_seed, out):
    """Generate synthetic rows that satisfy every attribute's band."""
    cfg = RunConfig.build('synthesize', config_path, seed=seed, data=data, schema=schema, map=map_path,
                          rules=rules, sensitivity_config=sensitivity_config, model=model, n=n,
                          max_iters=max_iters, split_seed=split_seed, out=out)
    _require(cfg, 'seed', 'data', 'out')
    if cfg.flip_target not in FLIP_TARGETS:
        raise ConfigError(f"flip_target must be one of {FLIP_TARGETS}")

    real = _load_real(cfg)
    train, _, record = cfg.holdout(real)
    if cfg.model:
        fitted = synth.load_model(cfg.model)
        fitted_on = fitted.metadata.get('split', {}).get('train_digest')
        if fitted_on != record['train_digest']:
            logger.warning("Model was not fitted on this run's training rows; held-out rows may have leaked")
    else:
        fitted = synth.fit(train, shrinkage=cfg.shrinkage, k_max=cfg.k_max)
    if fitted.schema.names != real.schema.names:
        raise ConfigError("model schema does not match the data header", path=str(cfg.model))
    settings = _sensitivity_config(cfg)
    level_map = _sensitivity_map(cfg, real.schema, settings)
    bands = sensitivity.privacy_bands(level_map, settings.bands)
    distortion = DistortionConfig(levels=settings.distortion, flip_target=cfg.flip_target)

    table, report = generate_enforced(fitted, train, bands, level_map, distortion, n=cfg.n,
                                      max_iters=cfg.max_iters, seed=cfg.seed, progress=True)
    header = cfg.header()
    export_table(table, cfg.out / 'synthetic.csv', header)
    payload = report.to_dict()
    payload['split'] = record
    reporting.write_report(payload, cfg.out / 'enforcement.yaml', header)
    _echo(reporting.format_enforcement(payload))
    if not report.accepted:
        raise click.exceptions.Exit(EXIT_CODES['enforcement'])


@cli.command('evaluate')
@run_options
@click.option('--data', type=str, default=None, help='Real data file.')
@click.option('--schema', type=str, default=None)
@click.option('--synth', type=str, default=None, help='Synthetic data file.')
@click.option('--target', type=str, default=None, help='Discrete column to predict.')
@click.option('--split-seed', 'split_seed', type=int, default=None, help='Holdout split seed; defaults to --seed.')
@click.option('--out', type=str, default=None, help='Output directory.')
@run_command
def evaluate_command(config_path, seed, data, schema, synth, target, split_seed, out):
    """Utility (train on synthetic, test on held-out real) plus fidelity and coverage."""
    cfg = RunConfig.build('evaluate', config_path, seed=seed, data=data, schema=schema, synth=synth,
                          target=target, split_seed=split_seed, out=out)
    _require(cfg, 'seed', 'data', 'synth', 'target', 'out')
    real = _load_real(cfg)
    synthetic = load_table(cfg.synth, real.schema)
    real_train, real_test, record = cfg.holdout(real)
    header = cfg.header()

    utility = evaluation.tstr(synthetic, real_train, real_test, cfg.target, seed=cfg.seed).to_dict()
    fidelity = metrics.fidelity_report(real, synthetic)

    for name in real.schema.continuous:
        if len(real.non_missing(name)) and len(synthetic.non_missing(name)):
            frame = reporting.cdf_frame([('real', metrics.cdf_points(real.non_missing(name))),
                                         ('synthetic', metrics.cdf_points(synthetic.non_missing(name)))])
            reporting.write_points(frame, cfg.out / 'cdf' / f"{name}.csv", header)
    overlay = metrics.pca_overlay(real, synthetic)
    reporting.write_points(overlay, cfg.out / 'pca.csv', header)

    payload = {
        'split': record,
        'utility': utility,
        'fidelity': fidelity.to_dict(),
        'coverage': {'centroid_distance': metrics.centroid_distance(overlay), 'dims': 2},
    }
    reporting.write_report(payload, cfg.out / 'evaluation.yaml', header)
    _echo(reporting.format_utility(utility))
    click.echo(f"Mean KS {fidelity.mean_ks:.4f}, mean normalized EMD {fidelity.mean_emd:.4f}, "
               f"centroid distance {payload['coverage']['centroid_distance']:.4f}")


@cli.command('attack')
@run_options
@click.option('--data', type=str, default=None, help='Real data file.')
@click.option('--schema', type=str, default=None)
@click.option('--synth', type=str, default=None, help='Synthetic data file.')
@click.option('--attack', 'attack_kind', type=click.Choice(ATTACK_KINDS), default=None)
@click.option('--target', type=str, default=None,
              help='Inference target, or comma-separated sensitive columns for re-identification.')
@click.option('--known', type=str, default=None, help='Comma-separated columns known to the attacker.')
@click.option('--qi', type=str, default=None, help='Comma-separated quasi-identifiers.')
@click.option('--delta', type=float, default=None, help='Continuous match tolerance in std units.')
@click.option('--classifier', type=click.Choice(CLASSIFIER_KINDS), default=None)
@click.option('--map', 'map_path', type=str, default=None, help='Sensitivity map, to report target tiers.')
@click.option('--out', type=str, default=None, help='Attack report to write (YAML).')
@run_command
def attack_command(config_path, seed, data, schema, synth, attack_kind, target, known, qi, delta,
                   classifier, map_path, out):
    """Run an attribute-inference or re-identification attack."""
    cfg = RunConfig.build('attack', config_path, seed=seed, data=data, schema=schema, synth=synth,
                          attack=attack_kind, target=target, known=known, qi=qi, delta=delta,
                          classifier=classifier, map=map_path, out=out)
    _require(cfg, 'seed', 'data', 'synth', 'target', 'out')
    if cfg.attack not in ATTACK_KINDS:
        raise click.UsageError(f"--attack must be one of {', '.join(ATTACK_KINDS)}")
    if cfg.attack == 'reidentification':
        _require(cfg, 'qi')
    elif len(cfg.target_columns()) != 1:
        raise click.UsageError("attribute inference takes exactly one --target column")

    real = _load_real(cfg)
    synthetic = load_table(cfg.synth, real.schema)
    level_map = sensitivity.load_sensitivity_map(cfg.map, real.schema) if cfg.map else None

    if cfg.attack == 'inference':
        target_column = cfg.target_columns()[0]
        known_columns = cfg.known or [c for c in real.schema.names if c != target_column]
        report = attacks.attribute_inference_attack(synthetic, real, target_column, known_columns,
                                                    kind=cfg.classifier, seed=cfg.seed,
                                                    sensitivity_map=level_map)
    else:
        report = attacks.reidentification_attack(synthetic, real, cfg.qi, cfg.target_columns(),
                                                 match_tol=cfg.delta, seed=cfg.seed,
                                                 sensitivity_map=level_map)
    payload = report.to_dict()
    reporting.write_report(payload, cfg.out, cfg.header())
    _echo(reporting.format_attack(payload))


@cli.command('sweep')
@run_options
@click.option('--data', type=str, default=None, help='Real data file.')
@click.option('--schema', type=str, default=None)
@click.option('--map', 'map_path', type=str, default=None, help='Sensitivity map from classify.')
@click.option('--rules', type=str, default=None, help='Rule file, used when no map is given.')
@click.option('--sensitivity-config', 'sensitivity_config', type=str, default=None)
@click.option('--target', type=str, default=None, help='Discrete column for the utility comparison.')
@click.option('--seeds', type=int, default=None, help='Number of seeds, counted up from --seed.')
@click.option('--infer', type=str, default=None, help='Attribute-inference target.')
@click.option('--known', type=str, default=None, help='Comma-separated columns known to the attacker.')
@click.option('--qi', type=str, default=None, help='Comma-separated quasi-identifiers.')
@click.option('--sensitive', type=str, default=None, help='Comma-separated re-identification targets.')
@click.option('--n', type=int, default=None, help='Synthetic rows per run.')
@click.option('--max-iters', 'max_iters', type=int, default=None)
@click.option('--out', type=str, default=None, help='Sweep report to write (YAML).')
@run_command
def sweep_command(config_path, seed, data, schema, map_path, rules, sensitivity_config, target, seeds,
                  infer, known, qi, sensitive, n, max_iters, out):
    """Compare plain and enforced synthesis over several seeds."""
    cfg = RunConfig.build('sweep', config_path, seed=seed, data=data, schema=schema, map=map_path, rules=rules,
                          sensitivity_config=sensitivity_config, target=target, seeds=seeds, infer=infer,
                          known=known, qi=qi, sensitive=sensitive, n=n, max_iters=max_iters, out=out)
    _require(cfg, 'seed', 'data', 'target', 'out')
    if cfg.seeds < 1:
        raise click.UsageError("--seeds must be at least 1")
    if bool(cfg.qi) != bool(cfg.sensitive):
        raise click.UsageError("--qi and --sensitive go together")

    real = _load_real(cfg)
    settings = _sensitivity_config(cfg)
    level_map = _sensitivity_map(cfg, real.schema, settings)
    report = sweep.enforcement_sweep(
        real, level_map, cfg.target, [cfg.seed + i for i in range(cfg.seeds)],
        band_config=settings.bands,
        distortion=DistortionConfig(levels=settings.distortion, flip_target=cfg.flip_target),
        classifier=cfg.classifier, inference_target=cfg.infer, inference_known=cfg.known or None,
        quasi_identifiers=cfg.qi, sensitive=cfg.sensitive, holdout_fraction=cfg.holdout_fraction,
        n=cfg.n, max_iters=cfg.max_iters, k_max=cfg.k_max, shrinkage=cfg.shrinkage, match_tol=cfg.delta,
    )
    payload = report.to_dict()
    reporting.write_report(payload, cfg.out, cfg.header())
    _echo(reporting.format_sweep(payload))


@cli.command('benchmark')
@run_options
@click.option('--n', type=int, default=None, help='Rows to generate.')
@click.option('--out', type=str, default=None, help='Output directory.')
@run_command
def benchmark_command(config_path, seed, n, out):
    """Write the deterministic benchmark dataset with schema, tags and policy."""
    cfg = RunConfig.build('benchmark', config_path, seed=seed, out=out, n=n)
    _require(cfg, 'seed', 'out')
    table = benchmark.generate_benchmark(cfg.seed, cfg.n)
    paths = benchmark.write_benchmark(table, cfg.out, cfg.header())
    for key, path in paths.items():
        click.echo(f"{key}: {path}")


def main(argv: Optional[List[str]] = None):
    cli.main(args=argv, prog_name=TOOL_NAME)
