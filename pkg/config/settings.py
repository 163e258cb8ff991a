# settings.py
# Tool identity, numeric defaults and exit codes

TOOL_NAME = 'policyvault'
TOOL_VERSION = '0.1.0'

DATASET_DEFAULTS = {
    'distinct_threshold': 20,   # discrete iff distinct values <= this
    'holdout_fraction': 0.2,
    'missing_marker': '',       # empty field on input
}

MIXTURE_DEFAULTS = {
    'k_max': 10,
    'tolerance': 1e-6,          # stop when log-likelihood gain drops below
    'max_iter': 200,
    'sigma_floor_ratio': 1e-6,  # floor = ratio * column std (or ratio if std == 0)
    'normalization_width': 4.0, # alpha = (v - mu) / (width * sigma)
    'init_seed': 0,             # fixed sub-seed for k-means++ seeding
}

COPULA_DEFAULTS = {
    'shrinkage': 0.05,
    'shrinkage_step': 0.05,
    'min_rows': 30,
    'quantile_knots': 2001,
    'fit_seed': 0,              # posterior mode draws during fit
    'min_eigenvalue': 1e-10,
}

ENFORCEMENT_DEFAULTS = {
    'max_iters': 25,
    'increase_factor': 1.5,     # EMD below t_min
    'decrease_factor': 0.67,    # EMD above t_max
    'floor_step': 0.01,         # first step when a knob starts at 0
    'n_samples': 5000,
}

CLASSIFIER_DEFAULTS = {
    'LR': {'epochs': 500, 'l2': 1e-4},
    'DT': {'max_depth': 8, 'min_leaf': 5},
    'RF': {'n_trees': 100, 'max_depth': 8, 'min_leaf': 5},
    'GBC': {'n_stages': 100, 'max_depth': 3, 'learning_rate': 0.1},
}

ATTACK_DEFAULTS = {
    'classifier': 'RF',
    'match_tolerance': 0.25,    # delta, in units of real-column std
    'baseline_shuffles': 100,
}

# Process exit codes for the command line
EXIT_CODES = {
    'ok': 0,
    'usage': 2,
    'input': 3,
    'enforcement': 4,
}
