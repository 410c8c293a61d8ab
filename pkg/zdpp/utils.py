# Copyright (c) 2025, HUMMBL, LLC
#
# Licensed under the Business Source License 1.1 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://github.com/hummbl-dev/engine-ops/blob/main/LICENSE
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
# Change Date: 2029-01-01
# Change License: Apache License, Version 2.0

"""
Utility Functions Module

Table writers shared by the CLI and the verification harness.
"""

from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO
import csv
import io
import json
import math

from .config import OutputFormat
from .params import CheckReport

Row = Dict[str, Any]


def format_number(value: Any) -> str:
    """
    Format one table cell.

    Floats are printed with 17 significant digits so they parse back to the
    same double; non-finite values use the spellings Python reads back.
    """
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.17g}"
    if value is None:
        return ""
    return str(value)


def _columns(rows: Sequence[Row]) -> List[str]:
    columns: List[str] = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    return columns


def rows_to_csv(rows: Sequence[Row], columns: Optional[Sequence[str]] = None) -> str:
    """Render rows as CSV with a header row and CRLF line ends."""
    columns = list(columns) if columns is not None else _columns(rows)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\r\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(row.get(col)) for col in columns])
    return buffer.getvalue()


def _json_safe(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return format_number(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def rows_to_json(rows: Sequence[Row]) -> str:
    """Render rows as a JSON array of objects."""
    payload = [{key: _json_safe(value) for key, value in row.items()} for row in rows]
    return json.dumps(payload, indent=2) + "\n"


def render_rows(rows: Sequence[Row], fmt: OutputFormat) -> str:
    if fmt is OutputFormat.JSON:
        return rows_to_json(rows)
    return rows_to_csv(rows)


def write_rows(
    rows: Sequence[Row],
    fmt: OutputFormat = OutputFormat.CSV,
    path: Optional[Path] = None,
    stream: Optional[TextIO] = None,
) -> None:
    """Write a table to a file, or to the given stream when no path is set."""
    text = render_rows(rows, fmt)
    if path is not None:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        return
    if stream is not None:
        stream.write(text)


def report_rows(reports: Sequence[CheckReport]) -> List[Row]:
    """One row per verification check, in run order."""
    return [report.to_row() for report in reports]


def write_audit(report: Dict[str, Any], path: Path) -> None:
    """Write a telemetry audit report as JSON."""
    with open(path, "w", encoding="utf-8") as f:
        json.dump(report, f, default=str, indent=2)
