"""Experiment reports: per-row statistics, metadata, pass/fail flags, and
deterministic CSV/JSON serialization.

Serialized reports are a pure function of (config, build): floats are
written with ``repr`` so parsing an emitted CSV reproduces the in-memory
rows exactly, and volatile metadata (wall time) is kept in memory only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

from . import __version__
from .core import compensated_sum
from .errors import ConfigError, DomainError

__all__ = ["aggregate", "Report", "ConvergenceReport", "CONVERGENCE_COLUMNS", "build_id"]

CONVERGENCE_COLUMNS = ("n", "estimate", "target", "abs_err", "rel_err", "stderr")

# Metadata keys that vary between runs of the same config; excluded from the
# serialized artifact so reports stay byte-identical across worker counts.
_VOLATILE_META = ("wall_time_s", "workers")


def build_id() -> str:
    return f"rvlab-{__version__}"


def aggregate(values: Sequence[float]) -> tuple[float, float | None]:
    """Mean and jackknife standard error of per-replication values.

    Summation is compensated and follows replication-index order, so the
    result does not depend on which worker produced which value.  With a
    single value the standard error is undefined and reported as ``None``.
    """
    m = len(values)
    if m == 0:
        raise DomainError("aggregate needs at least one value")
    mean = compensated_sum(values) / m
    if m == 1:
        return mean, None
    # Jackknife variance of the mean; for the mean statistic this reduces to
    # sum((v - mean)^2) / (m (m - 1)).
    ss = compensated_sum((v - mean) ** 2 for v in values)
    return mean, math.sqrt(ss / (m * (m - 1)))


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_cell(text: str):
    if text == "true":
        return True
    if text == "false":
        return False
    try:
        as_int = int(text)
    except ValueError:
        pass
    else:
        return as_int
    try:
        return float(text)
    except ValueError:
        return text


@dataclass
class Report:
    """Tabular experiment output plus summary scalars and pass/fail flags."""

    columns: tuple[str, ...]
    rows: list[tuple]
    extra: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ConfigError(
                    f"row {row!r} does not match columns {self.columns!r}"
                )

    @property
    def passed(self) -> bool:
        return all(self.flags.values())

    def _serializable_meta(self) -> dict:
        return {k: v for k, v in self.meta.items() if k not in _VOLATILE_META}

    def to_csv(self) -> str:
        lines = [f"# {build_id()}"]
        for key, payload in (
            ("meta", self._serializable_meta()),
            ("extra", self.extra),
            ("flags", self.flags),
        ):
            lines.append(f"# {key}: {json.dumps(payload, sort_keys=True)}")
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(_fmt(v) for v in row))
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        doc = {
            "build": build_id(),
            "meta": self._serializable_meta(),
            "extra": self.extra,
            "flags": self.flags,
            "columns": list(self.columns),
            "rows": [list(r) for r in self.rows],
        }
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def write(self, path: str, fmt: str = "csv") -> None:
        if fmt not in ("csv", "json"):
            raise ConfigError(f"unknown report format {fmt!r}")
        text = self.to_csv() if fmt == "csv" else self.to_json()
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)

    @classmethod
    def from_csv(cls, text: str) -> "Report":
        meta: dict = {}
        extra: dict = {}
        flags: dict = {}
        header: tuple[str, ...] | None = None
        rows: list[tuple] = []
        for line in text.splitlines():
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                for key, target in (("meta:", meta), ("extra:", extra), ("flags:", flags)):
                    if body.startswith(key):
                        target.update(json.loads(body[len(key):]))
                continue
            if header is None:
                header = tuple(line.split(","))
                continue
            rows.append(tuple(_parse_cell(c) for c in line.split(",")))
        if header is None:
            raise ConfigError("CSV report has no header line")
        return cls(columns=header, rows=rows, extra=extra, flags=flags, meta=meta)


class ConvergenceReport(Report):
    """Per-grid-size Monte Carlo estimates against a limit target.

    Rows are (n, estimate, target, abs_err, rel_err, stderr) sorted by n
    ascending; extra columns (e.g. a second Monte Carlo target) may be
    appended after the base six.
    """

    def __post_init__(self):
        super().__post_init__()
        if tuple(self.columns[: len(CONVERGENCE_COLUMNS)]) != CONVERGENCE_COLUMNS:
            raise ConfigError(
                f"convergence report columns must start with {CONVERGENCE_COLUMNS}"
            )
        ns = [row[0] for row in self.rows]
        if ns != sorted(ns):
            raise ConfigError("convergence report rows must be sorted by n")
        for row in self.rows:
            stderr = row[5]
            if stderr is not None and not stderr > 0:
                raise ConfigError("stderr must be positive when replications >= 2")
