"""Report containers and 17-significant-digit JSON/CSV emission."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .kp_centralizer import TwistedVector
from .seq_core import SeqVector, format_sparse


def fmt_float(v: float) -> str:
    return format(float(v), ".17g")


def _plain(o):
    """Replace library objects by JSON-ready structures."""
    if isinstance(o, SeqVector):
        return o.to_json()
    if isinstance(o, TwistedVector):
        return o.to_json()
    if isinstance(o, np.ndarray):
        return [_plain(v) for v in o.tolist()]
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, dict):
        return {str(k): _plain(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_plain(v) for v in o]
    return o


def dumps(obj, indent: int = 2) -> str:
    """JSON text with every float written to 17 significant digits."""

    def enc(o, level):
        pad = " " * (indent * (level + 1))
        end = " " * (indent * level)
        if o is None or o is True or o is False:
            return json.dumps(o)
        if isinstance(o, int):
            return str(o)
        if isinstance(o, float):
            return fmt_float(o) if math.isfinite(o) else "null"
        if isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, list):
            if not o:
                return "[]"
            if all(not isinstance(v, (dict, list)) for v in o):
                return "[" + ", ".join(enc(v, level + 1) for v in o) + "]"
            return "[\n" + ",\n".join(pad + enc(v, level + 1) for v in o) + "\n" + end + "]"
        if isinstance(o, dict):
            if not o:
                return "{}"
            items = (pad + json.dumps(k) + ": " + enc(v, level + 1) for k, v in o.items())
            return "{\n" + ",\n".join(items) + "\n" + end + "}"
        raise TypeError(f"cannot serialize {type(o).__name__}")

    return enc(_plain(obj), 0) + "\n"


def _cell(v) -> str:
    if isinstance(v, SeqVector):
        return format_sparse(v)
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return fmt_float(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return ";".join(_cell(x) for x in v)
    if isinstance(v, dict):
        return json.dumps(_plain(v), sort_keys=True)
    return str(v)


@dataclass
class ExperimentReport:
    command: str
    config: dict
    rows: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)
    duration: float = 0.0  # seconds; kept out of the serialized payload

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def payload(self) -> dict:
        return {"command": self.command, "config": self.config, "rows": self.rows,
                "summary": {"passed": self.passed, "checks": self.checks}}

    def to_json(self) -> str:
        return dumps(self.payload())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = []
        for row in self.rows:
            header.extend(k for k in row if k not in header)
        w.writerow(header)
        for row in self.rows:
            w.writerow([_cell(row[k]) if k in row else "" for k in header])
        return buf.getvalue()

    def render(self, fmt: str) -> str:
        return self.to_csv() if fmt == "csv" else self.to_json()
