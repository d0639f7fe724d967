"""Point-set sources and report files.

All randomness goes through ``numpy.random.default_rng`` (PCG64) seeded
explicitly; nothing reads ambient entropy.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from dataclasses import astuple, dataclass, fields
from typing import Optional, Sequence

import numpy as np

from .geometry import PointSet

log = logging.getLogger(__name__)


class ReportSchemaError(ValueError):
    """A report file does not have the expected layout."""


class CsvFormatError(ValueError):
    pass


# --------------------------------------------------------------------------
# CSV ingestion

def _parse_number(text: str) -> Optional[float]:
    try:
        value = float(text)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def read_csv_points(path) -> tuple[PointSet, int]:
    """Load a numeric CSV; returns the point set and the number of dropped rows.

    A first row with no numeric field is a header and is skipped. Rows with
    a missing or non-numeric field are dropped. Blank lines are ignored.
    """
    try:
        with open(path, newline="", encoding="utf-8-sig") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise CsvFormatError(f"cannot read {path}: {exc}") from exc
    rows = [r for r in rows if any(cell.strip() for cell in r)]
    if rows and all(_parse_number(cell.strip()) is None for cell in rows[0]):
        rows = rows[1:]
    good, dropped = [], 0
    for row in rows:
        values = [_parse_number(cell.strip()) for cell in row]
        if any(v is None for v in values):
            dropped += 1
            continue
        good.append(values)
    if not good:
        raise CsvFormatError(f"{path} has no valid numeric rows")
    widths = {len(r) for r in good}
    if len(widths) != 1:
        raise CsvFormatError(f"{path} has ragged numeric rows (widths {sorted(widths)})")
    return PointSet(np.array(good, dtype=np.float64)), dropped


def load_csv(path) -> PointSet:
    points, dropped = read_csv_points(path)
    if dropped:
        log.warning("dropped %d row(s) with missing or non-numeric values from %s", dropped, path)
    return points


# --------------------------------------------------------------------------
# generators

def sample_unit_sphere(n: int, d: int, seed) -> PointSet:
    """``n`` points uniform on the unit sphere in ``R^d`` (normalized Gaussians)."""
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    if d < 2:
        raise ValueError(f"the unit sphere needs d >= 2, got {d}")
    g = np.random.default_rng(seed).standard_normal((n, d))
    return PointSet(g / np.linalg.norm(g, axis=1, keepdims=True))


def sample_gaussian(n: int, d: int, seed) -> PointSet:
    if n < 1 or d < 1:
        raise ValueError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    return PointSet(np.random.default_rng(seed).standard_normal((n, d)))


def sample_near_collinear(n: int, d: int, seed, clusters: int = 3, noise: float = 1e-3) -> PointSet:
    """Points bunched tightly around a few random directions.

    Each point is a random multiple (0.5 to 2) of one of ``clusters`` unit
    directions plus isotropic Gaussian noise of scale ``noise``; this is a
    hard case for Gram-Schmidt and for greedy ties.
    """
    if n < 1 or d < 1 or clusters < 1:
        raise ValueError("need n, d and clusters >= 1")
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((clusters, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    which = rng.integers(clusters, size=n)
    scale = rng.uniform(0.5, 2.0, size=n)
    pts = dirs[which] * scale[:, None] + noise * rng.standard_normal((n, d))
    return PointSet(pts)


def derive_seed(*keys: int) -> int:
    """A 63-bit seed determined by ``keys`` (via numpy's SeedSequence)."""
    return int(np.random.SeedSequence([int(k) for k in keys]).generate_state(1, np.uint64)[0] >> 1)


# --------------------------------------------------------------------------
# experiment configuration and reports

SOURCES = ("sphere", "gaussian", "tightness")


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one local-optimality experiment.

    ``dataset`` is ``sphere``, ``gaussian``, ``tightness`` or a CSV path.
    """

    dataset: str = "sphere"
    m: int = 10
    part_sizes: tuple = (3000,)
    k_values: tuple = (1, 2, 4, 6, 8, 10, 12, 14, 16, 18, 20)
    d: int = 784
    epsilon: Optional[float] = None
    seeds: tuple = (0, 1, 2, 3, 4)
    experiment: str = "fig1"

    def __post_init__(self):
        if self.m < 1 or self.d < 1:
            raise ValueError("m and d must be positive")
        if not self.part_sizes or min(self.part_sizes) < 1:
            raise ValueError("part sizes must be positive")
        if not self.k_values or min(self.k_values) < 1:
            raise ValueError("k values must be positive")
        if list(self.k_values) != sorted(self.k_values):
            raise ValueError("k values must be sorted ascending")
        if not self.seeds or len(set(self.seeds)) != len(self.seeds):
            raise ValueError("seeds must be a non-empty list of distinct integers")
        if self.epsilon is not None and not self.epsilon > 0:
            raise ValueError("epsilon must be positive")

    @property
    def repetitions(self) -> int:
        return len(self.seeds)

    @property
    def is_generator(self) -> bool:
        return self.dataset in SOURCES


@dataclass(frozen=True)
class ReportRow:
    experiment: str
    k: int
    part_size: int
    mapper: str
    measured_ratio: float
    bound: float
    seed: int
    wall_time: float = 0.0


REPORT_FIELDS = tuple(f.name for f in fields(ReportRow))
_FIELD_TYPES = {"experiment": str, "k": int, "part_size": int, "mapper": str,
                "measured_ratio": float, "bound": float, "seed": int, "wall_time": float}


def _real(x: float, json_style: bool = False) -> str:
    if math.isnan(x):
        return "NaN" if json_style else "nan"
    if math.isinf(x):
        text = "Infinity" if json_style else "inf"
        return text if x > 0 else "-" + text
    return format(x, ".17g")


def format_report(rows: Sequence[ReportRow], fmt: str) -> str:
    """Serialize rows; reals use 17 significant digits so they read back exactly."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_FIELDS)
        for row in rows:
            writer.writerow(_real(v) if isinstance(v, float) else v for v in astuple(row))
        return buf.getvalue()
    if fmt == "json":
        if not rows:
            return "[]\n"
        items = []
        for row in rows:
            parts = []
            for name, v in zip(REPORT_FIELDS, astuple(row)):
                text = _real(v, True) if isinstance(v, float) else json.dumps(v)
                parts.append(f"{json.dumps(name)}: {text}")
            items.append("  {" + ", ".join(parts) + "}")
        return "[\n" + ",\n".join(items) + "\n]\n"
    raise ValueError(f"format must be csv or json, not {fmt!r}")


def write_report(rows: Sequence[ReportRow], fmt: str, path) -> None:
    text = format_report(rows, fmt)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _coerce(record: dict) -> ReportRow:
    try:
        values = {}
        for name in REPORT_FIELDS:
            raw = record[name]
            kind = _FIELD_TYPES[name]
            if kind is int:
                if isinstance(raw, float) or isinstance(raw, bool):
                    raise ReportSchemaError(f"field {name!r} must be an integer, got {raw!r}")
                values[name] = int(raw)
            elif kind is float:
                values[name] = float(raw)
            else:
                if not isinstance(raw, str):
                    raise ReportSchemaError(f"field {name!r} must be a string, got {raw!r}")
                values[name] = raw
    except (KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, ReportSchemaError):
            raise
        raise ReportSchemaError(f"bad report record {record!r}: {exc}") from exc
    return ReportRow(**values)


def parse_report(text: str, fmt: str) -> list:
    if fmt == "json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ReportSchemaError(f"not a JSON report: {exc}") from exc
        if not isinstance(data, list) or not all(isinstance(r, dict) for r in data):
            raise ReportSchemaError("a JSON report must be an array of objects")
        for r in data:
            if set(r) != set(REPORT_FIELDS):
                raise ReportSchemaError(f"JSON report keys {sorted(r)} do not match {list(REPORT_FIELDS)}")
        return [_coerce(r) for r in data]
    if fmt == "csv":
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header is None or tuple(header) != REPORT_FIELDS:
            raise ReportSchemaError(f"CSV report header {header!r} does not match {list(REPORT_FIELDS)}")
        rows = []
        for line in reader:
            if len(line) != len(REPORT_FIELDS):
                raise ReportSchemaError(f"CSV report row has {len(line)} fields: {line!r}")
            rows.append(_coerce(dict(zip(REPORT_FIELDS, line))))
        return rows
    raise ValueError(f"format must be csv or json, not {fmt!r}")


def read_report(path, fmt: Optional[str] = None) -> list:
    """Read a report; the format defaults to the file extension."""
    if fmt is None:
        ext = os.path.splitext(str(path))[1].lower().lstrip(".")
        if ext not in ("csv", "json"):
            raise ValueError(f"cannot infer the report format of {path}; pass fmt")
        fmt = ext
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_report(fh.read(), fmt)
