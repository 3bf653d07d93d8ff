"""Report containers and deterministic CSV/JSON emission."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

SCHEMA = "v1"

CORRESPONDENCE_COLUMNS = (
    "trial", "seed", "l", "alpha", "top_scaled", "bottom_scaled", "location", "error", "bound",
)


@dataclass
class TableReport:
    """Named table plus summary metadata; the common shape behind every emitted file."""

    experiment: str
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)
    summary: dict[str, Any] = field(default_factory=dict)
    config: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": SCHEMA,
            "experiment": self.experiment,
            "config": _clean(self.config),
            "columns": list(self.columns),
            "rows": [_clean(list(r)) for r in self.rows],
            "summary": _clean(self.summary),
        }


@dataclass
class CorrespondenceRow:
    trial: int
    seed: int
    l: int
    alpha: float
    top_scaled: float
    bottom_scaled: float
    location: float
    error: float
    bound: float

    def as_tuple(self) -> tuple:
        return (self.trial, self.seed, self.l, self.alpha, self.top_scaled, self.bottom_scaled,
                self.location, self.error, self.bound)


@dataclass
class TrialOutcome:
    trial: int
    seed: int
    L: int
    max_error: float
    edge_value: float
    edge_bound: float
    skipped: bool = False
    reason: str = ""

    @property
    def edge_ok(self) -> bool:
        return (not self.skipped) and self.edge_value <= self.edge_bound


@dataclass
class CorrespondenceReport:
    experiment: str
    rows: list[CorrespondenceRow] = field(default_factory=list)
    trials: list[TrialOutcome] = field(default_factory=list)
    config: dict[str, Any] = field(default_factory=dict)
    extra: dict[str, Any] = field(default_factory=dict)

    columns = CORRESPONDENCE_COLUMNS

    @property
    def completed(self) -> list[TrialOutcome]:
        return [t for t in self.trials if not t.skipped]

    @property
    def skipped(self) -> int:
        return sum(t.skipped for t in self.trials)

    def summary(self) -> dict[str, Any]:
        done = self.completed
        errs = sorted(t.max_error for t in done)
        return {
            "trials": len(self.trials),
            "skipped": self.skipped,
            "L": [t.L for t in done],
            "max_error_median": _median(errs),
            "max_error_max": errs[-1] if errs else None,
            "edge_pass": sum(t.edge_ok for t in done),
            "edge_values": [t.edge_value for t in done],
            "edge_bound": done[0].edge_bound if done else None,
            "bound_note": "bound and edge constant are calibrated surrogates (c = C = 1)",
            **self.extra,
        }

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": SCHEMA,
            "experiment": self.experiment,
            "config": _clean(self.config),
            "columns": list(self.columns),
            "rows": [_clean(list(r.as_tuple())) for r in self.rows],
            "trials": [_clean(vars(t).copy()) for t in self.trials],
            "summary": _clean(self.summary()),
        }

    @property
    def table_rows(self) -> list[tuple]:
        return [r.as_tuple() for r in self.rows]

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "CorrespondenceReport":
        if data.get("schema") != SCHEMA:
            raise ValueError(f"unsupported schema {data.get('schema')!r}")
        rows = [CorrespondenceRow(*_unclean(r)) for r in data["rows"]]
        trials = [TrialOutcome(**{k: _unclean(v) for k, v in t.items()}) for t in data["trials"]]
        rep = cls(data["experiment"], rows, trials, _unclean(data["config"]))
        base = set(cls(data["experiment"]).summary())
        rep.extra = {k: _unclean(v) for k, v in data["summary"].items() if k not in base}
        return rep


def _median(xs: Sequence[float]) -> float | None:
    if not xs:
        return None
    s = sorted(xs)
    m = len(s) // 2
    return s[m] if len(s) % 2 else 0.5 * (s[m - 1] + s[m])


def _clean(obj: Any) -> Any:
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and not isinstance(obj, (str, bytes)):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def _unclean(obj: Any) -> Any:
    if isinstance(obj, list):
        return [_unclean(v) for v in obj]
    if isinstance(obj, dict):
        return {k: _unclean(v) for k, v in obj.items()}
    if obj in ("inf", "-inf", "nan"):
        return float(obj)
    return obj


def _cell(v: Any) -> str:
    v = _clean(v)
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def render(report, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report.to_dict(), indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(report.columns)
        rows = report.table_rows if hasattr(report, "table_rows") else report.rows
        for r in rows:
            w.writerow([_cell(v) for v in r])
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def emit(report, fmt: str, path: str | Path | None) -> str:
    """Write ``report`` as ``csv`` or ``json``; ``path=None`` only returns the text."""
    text = render(report, fmt)
    if path is not None:
        p = Path(path)
        try:
            p.parent.mkdir(parents=True, exist_ok=True)
            p.write_text(text)
        except OSError as exc:
            raise OSError(f"cannot write report to {p}: {exc}") from exc
    return text


def load_json_report(path: str | Path) -> CorrespondenceReport:
    return CorrespondenceReport.from_dict(json.loads(Path(path).read_text()))
