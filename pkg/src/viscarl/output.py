"""CSV and JSON-metadata persistence for CLI runs.

CSV files carry a header row, comma separators and floats printed with 15
significant digits via repr-stable formatting, so identical configs produce
byte-identical files. Each run also writes a flat JSON metadata record with
the resolved configuration, seed, package versions, an ISO-8601 timestamp
and the wall time.
"""

from __future__ import annotations

import csv
import json
import platform
import time
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

SCHEMA_VERSION = 1


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.15g}"
    return str(v)


def write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])


def write_metadata(path: Path, subcommand: str, resolved_config: dict,
                   wall_time_s: float, extra: dict | None = None) -> None:
    import viscarl
    record = {
        "schema_version": SCHEMA_VERSION,
        "subcommand": subcommand,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "wall_time_s": wall_time_s,
        "viscarl_version": viscarl.__version__,
        "numpy_version": np.__version__,
        "python_version": platform.python_version(),
    }
    for k, v in resolved_config.items():
        record[f"config.{k}"] = v
    for k, v in (extra or {}).items():
        record[k] = v
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(record, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def _json_default(o):
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    raise TypeError(f"Object of type {o.__class__.__name__} "
                    f"is not JSON serializable")


class Stopwatch:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        return False
