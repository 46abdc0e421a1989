"""CSV tables and JSON summaries for counting runs.

Reals are written with ``repr`` so that reading them back is bit-exact.
CSV columns are append-only: new fields go at the end of a row.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Any, Mapping

from .core_types import SCHEMA_VERSION, CountResult, geometry_from_record, geometry_to_record

COUNT_COLUMNS = ("m", "lambda0", "lambda0_over_h", "below", "ambiguous", "shift", "lambda1")


def write_table(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def read_table(text: str) -> tuple[list[str], list[list[str]]]:
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], rows[1:]


def count_csv(result: CountResult) -> str:
    amb = set(result.ambiguous_m)
    rows = []
    for m in sorted(result.ground_values):
        lam = result.ground_values[m]
        rows.append((m, lam, lam / result.h, result.below[m], m in amb, result.shifts[m], result.excited_values[m]))
    return write_table(COUNT_COLUMNS, rows)


def count_summary(result: CountResult) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "geometry": geometry_to_record(result.geometry),
        "variant": result.variant,
        "h": result.h,
        "m_window": list(result.m_window),
        "count": result.count,
        "predicted": result.predicted,
        "ratio": result.ratio,
        "ambiguous_m": list(result.ambiguous_m),
    }


def dumps(obj: Mapping[str, Any]) -> str:
    return json.dumps(obj, sort_keys=True)


def read_count(csv_text: str, summary: Mapping[str, Any]) -> CountResult:
    """Rebuild a :class:`CountResult` from its CSV table and JSON summary."""
    header, rows = read_table(csv_text)
    col = {name: i for i, name in enumerate(header)}
    ground, shifts, excited, below = {}, {}, {}, {}
    for row in rows:
        m = int(row[col["m"]])
        ground[m] = float(row[col["lambda0"]])
        shifts[m] = float(row[col["shift"]])
        excited[m] = float(row[col["lambda1"]])
        below[m] = row[col["below"]] == "1"
    return CountResult(
        h=float(summary["h"]),
        geometry=geometry_from_record(summary["geometry"]),
        variant=str(summary["variant"]),
        m_window=(int(summary["m_window"][0]), int(summary["m_window"][1])),
        ground_values=ground,
        shifts=shifts,
        excited_values=excited,
        below=below,
        count=int(summary["count"]),
        predicted=float(summary["predicted"]),
        ratio=float(summary["ratio"]),
        ambiguous_m=tuple(int(m) for m in summary["ambiguous_m"]),
    )
