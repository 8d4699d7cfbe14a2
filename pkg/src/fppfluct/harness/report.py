"""ExperimentReport and its CSV/JSON serialisation."""

from __future__ import annotations

import csv
import io
import json
import subprocess
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return "" if v is None else str(v)


def _jsonable(v):
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def version_string() -> str:
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=5,
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


@dataclass
class ExperimentReport:
    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)
    samples: dict = field(default_factory=dict, repr=False)  # raw per-n samples, not serialised

    def __post_init__(self):
        if self.rows and "n" in self.columns:
            self.rows.sort(key=lambda r: (r["n"],) + tuple(r.get(k, 0) for k in ("k", "alpha", "K") if k in r))

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([_fmt(r.get(c)) for c in self.columns])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"columns": self.columns, "rows": [_jsonable({c: r.get(c) for c in self.columns}) for r in self.rows],
                "metadata": _jsonable(self.metadata)}

    def write(self, prefix) -> tuple[Path, Path]:
        prefix = Path(prefix)
        if prefix.suffix in (".csv", ".json"):
            prefix = prefix.with_suffix("")
        prefix.parent.mkdir(parents=True, exist_ok=True)
        csv_path, json_path = prefix.with_suffix(".csv"), prefix.with_suffix(".json")
        csv_path.write_text(self.csv_text())
        json_path.write_text(json.dumps(self.to_dict(), indent=2, allow_nan=True))
        return csv_path, json_path
