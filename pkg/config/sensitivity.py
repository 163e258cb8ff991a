# sensitivity.py
# Tier defaults: acceptance bands, distortion levels and tag keywords

SENSITIVITY_LEVELS = ['Low', 'Medium', 'High']

# Normalized-EMD acceptance band per tier: (t_min, t_max).
# Higher tiers carry a distortion floor.
DEFAULT_BANDS = {
    'Low': (0.0, 0.05),
    'Medium': (0.01, 0.08),
    'High': (0.03, 0.12),
}

# Starting distortion per tier: (noise_scale, flip_prob)
DEFAULT_DISTORTION = {
    'Low': (0.0, 0.0),
    'Medium': (0.05, 0.02),
    'High': (0.15, 0.05),
}

# Where a flipped discrete cell is redrawn from
FLIP_TARGETS = ['uniform', 'marginal']
DEFAULT_FLIP_TARGET = 'uniform'

# Keywords searched for in rule sentences, per attribute tag
DEFAULT_TAG_KEYWORDS = {
    'PII': ['data originator', 'personal', 'natural person', 'farmer'],
    'location': ['location', 'address', 'farm'],
    'public': ['public', 'government', 'paying authorities'],
}
