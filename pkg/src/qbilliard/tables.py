"""Loop-count distributions and their CSV form.

A table is a block of ``# key=value`` metadata lines followed by a fixed
header and one row per entry, floats written with ``%.12e`` so identical
inputs give byte-identical files::

    # model=pctc
    # M=2
    k,probability
    0,1.666666666667e-01
"""

import io
from dataclasses import dataclass, field

import numpy as np

from . import __version__


@dataclass(frozen=True, eq=False)
class LoopDistribution:
    probabilities: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("probabilities must be a non-empty vector")
        object.__setattr__(self, "probabilities", p)

    @property
    def expectation(self):
        return float(np.arange(self.probabilities.size) @ self.probabilities)

    @property
    def total(self):
        return float(self.probabilities.sum())

    def to_csv(self):
        rows = [(k, p) for k, p in enumerate(self.probabilities)]
        return format_table(("k", "probability"), rows, self.metadata)


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return "pass" if value else "fail"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.12e" % value
    return str(value)


def format_table(columns, rows, metadata=None):
    out = io.StringIO()
    meta = {"code_version": __version__}
    meta.update(metadata or {})
    for key, value in meta.items():
        out.write(f"# {key}={_meta_value(value)}\n")
    out.write(",".join(columns) + "\n")
    for row in rows:
        out.write(",".join(_cell(v) for v in row) + "\n")
    return out.getvalue()


def _meta_value(value):
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (list, tuple)):
        return ";".join(_meta_value(v) for v in value)
    return str(value)


def parse_table(text):
    """Inverse of ``format_table``: ``(metadata, columns, rows)`` with string cells."""
    meta, columns, rows = {}, None, []
    for line in text.splitlines():
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            meta[key] = value
        elif columns is None:
            columns = line.split(",")
        else:
            rows.append(line.split(","))
    return meta, columns, rows
