"""CSV / JSON emission of reports, with fixed float formatting and atomic writes."""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from optrace.traceformula import VerificationReport

VERIFY_COLUMNS = ("p", "lhs_partial", "rhs", "deviation", "remainder_N")


def fmt_float(x: float) -> str:
    """17 significant digits; negative zero prints as 0."""
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite value {x}")
    if x == 0:
        return "0"
    return format(x, ".17g")


def fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return fmt_float(v)
    return str(v)


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON with floats at 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [pad + to_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if hasattr(obj, "tolist"):
        return to_json(obj.tolist(), indent, _level)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def write_atomic(path: str | Path, text: str) -> None:
    """Write through a temporary file in the target directory, then rename."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc


@dataclass
class Table:
    """Generic tabular result for the auxiliary commands."""

    command: str
    columns: list[str]
    rows: list[list]
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "metadata": self.metadata,
            "columns": list(self.columns),
            "rows": [dict(zip(self.columns, r)) for r in self.rows],
        }


def _metadata_lines(meta: dict) -> list[str]:
    return [f"# {key}: {json.dumps(_plain(val), sort_keys=True)}" for key, val in meta.items()]


def _plain(obj):
    # metadata is rendered compactly but with the same float rule as the table
    if isinstance(obj, float):
        return float(fmt_float(obj))
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _csv(meta: dict, columns, rows) -> str:
    lines = _metadata_lines(meta)
    lines.append(",".join(columns))
    lines.extend(",".join(fmt_value(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def verification_csv(report: VerificationReport) -> str:
    meta = {
        "command": "verify",
        "k": report.k,
        "d": report.d,
        "N": report.N,
        "potential": report.potential,
        "conditions": report.conditions.to_dict(),
        "settings": report.settings,
        "rhs_candidates": report.rhs_candidates,
        "warnings": report.warnings,
    }
    rows = [[r.p, r.lhs_partial, r.rhs, r.deviation, r.remainder_N] for r in report.rows]
    return _csv(meta, VERIFY_COLUMNS, rows)


def render(report: VerificationReport | Table, fmt: str) -> str:
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    if isinstance(report, VerificationReport):
        if fmt == "csv":
            return verification_csv(report)
        return to_json(report.to_dict()) + "\n"
    if fmt == "csv":
        return _csv({"command": report.command, **report.metadata}, report.columns, report.rows)
    return to_json(report.to_dict()) + "\n"


def emit_report(report: VerificationReport | Table, fmt: str, path: str | Path) -> Path:
    write_atomic(path, render(report, fmt))
    return Path(path)


def load_report(path: str | Path) -> VerificationReport:
    return VerificationReport.from_dict(json.loads(Path(path).read_text()))
