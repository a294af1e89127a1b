"""Tabular results and their CSV / JSON emission."""

from __future__ import annotations

import io
import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

from . import __version__

SIG_DIGITS = 12


def _cell(v):
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, float):
        if math.isinf(v) or math.isnan(v):
            return v
        return float(f"{v:.{SIG_DIGITS}g}")
    return v


def _text(v) -> str:
    v = _cell(v)
    if isinstance(v, float):
        return f"{v:.{SIG_DIGITS}g}"
    return str(v)


@dataclass
class SweepResult:
    header: list
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.metadata.setdefault("version", __version__)

    def add(self, *row) -> None:
        if len(row) != len(self.header):
            raise ValueError(f"row has {len(row)} cells, header has {len(self.header)}")
        self.rows.append(tuple(row))

    def column(self, name: str) -> list:
        j = self.header.index(name)
        return [r[j] for r in self.rows]

    def to_csv(self) -> str:
        out = io.StringIO()
        for key in sorted(self.metadata):
            out.write(f"# {key}: {json.dumps(self.metadata[key], sort_keys=True)}\n")
        out.write(",".join(self.header) + "\n")
        for r in self.rows:
            out.write(",".join(_text(v) for v in r) + "\n")
        return out.getvalue()

    def to_json(self) -> str:
        doc = {
            "metadata": self.metadata,
            "header": list(self.header),
            "rows": [[_cell(v) for v in r] for r in self.rows],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def render(self, fmt: str = "csv") -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"unknown output format {fmt!r}")


def _parse(x: str):
    try:
        return float(x)
    except ValueError:
        return x


def read_csv(text: str) -> SweepResult:
    """Parse the output of :meth:`SweepResult.to_csv` (numbers come back as floats)."""
    meta, lines = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            key, _, val = line[2:].partition(": ")
            meta[key] = json.loads(val)
        elif line:
            lines.append(line)
    header = lines[0].split(",")
    rows = [tuple(_parse(x) for x in line.split(",")) for line in lines[1:]]
    return SweepResult(header, rows, meta)


def frange(start: float, stop: float, step: float) -> list:
    """Inclusive float range without accumulated drift."""
    if step <= 0:
        raise ValueError("step must be positive")
    if stop < start:
        raise ValueError("empty range: stop < start")
    n = int(math.floor((stop - start) / step + 1e-9))
    return [round(start + i * step, 12) for i in range(n + 1)]


def grid(axes: Sequence[tuple]) -> list:
    """Cartesian product of ``(name, values)`` axes as a list of dicts."""
    names = [n for n, _ in axes]
    return [dict(zip(names, combo)) for combo in itertools.product(*(v for _, v in axes))]
