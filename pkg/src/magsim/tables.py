"""Column-oriented numeric result table with reproducibility metadata.

The CSV dialect is deliberately plain: '#'-prefixed key = value metadata
lines, one header row, then data rows with repr-formatted floats (shortest
round-trip representation, locale-independent). Equal configs produce
byte-identical files.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field as dfield

import numpy as np


@dataclass
class ResultTable:
    columns: dict
    metadata: dict = dfield(default_factory=dict)

    def __post_init__(self):
        lengths = {k: len(v) for k, v in self.columns.items()}
        if len(set(lengths.values())) > 1:
            raise ValueError(f"unequal column lengths: {lengths}")
        self.columns = {k: np.asarray(v) for k, v in self.columns.items()}

    @property
    def n_rows(self) -> int:
        return 0 if not self.columns else len(next(iter(self.columns.values())))

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            for k in sorted(self.metadata):
                fh.write(f"# {k} = {self.metadata[k]}\n")
            fh.write(",".join(self.columns.keys()) + "\n")
            cols = list(self.columns.values())
            for i in range(self.n_rows):
                fh.write(",".join(_fmt(c[i]) for c in cols) + "\n")

    @classmethod
    def read_csv(cls, path) -> "ResultTable":
        meta = {}
        rows = []
        header = None
        with open(path, newline="") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if not line:
                    continue
                if line.startswith("#"):
                    key, _, val = line[1:].partition("=")
                    meta[key.strip()] = val.strip()
                elif header is None:
                    header = line.split(",")
                else:
                    rows.append([_parse(tok) for tok in line.split(",")])
        if header is None:
            raise ValueError("file has no header row")
        cols = {name: np.array([r[i] for r in rows])
                for i, name in enumerate(header)}
        return cls(cols, meta)


def _fmt(value) -> str:
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    if isinstance(value, (np.integer, int)):
        return str(int(value))
    return str(value)


def _parse(token: str):
    try:
        return int(token)
    except ValueError:
        try:
            return float(token)
        except ValueError:
            return token


def config_hash(items: dict) -> str:
    """Order-independent hash of flattened 'section.key = value' pairs."""
    canon = "\n".join(f"{k} = {items[k]}" for k in sorted(items))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]
