"""Small table builders shared by the test modules."""

import numpy as np
import pandas as pd

from core.dataset import CONTINUOUS, DISCRETE, ColumnSpec, Schema, Table


def make_table(columns, tags=None):
    """Table from name -> values; float arrays become continuous columns."""
    tags = tags or {}
    specs, frame = [], {}
    for name, values in columns.items():
        values = np.asarray(values)
        if values.dtype.kind == 'f':
            specs.append(ColumnSpec(name, CONTINUOUS, frozenset(tags.get(name, []))))
            frame[name] = values.astype(float)
        else:
            specs.append(ColumnSpec(name, DISCRETE, frozenset(tags.get(name, []))))
            frame[name] = values.astype(str).astype(object)
    schema = Schema(tuple(specs))
    return Table(schema, pd.DataFrame(frame, columns=schema.names))


def gaussian_table(n, seed=0, mean=0.0, std=1.0):
    rng = np.random.default_rng(seed)
    return make_table({'x': rng.normal(mean, std, n)})
