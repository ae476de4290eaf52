"""CSV and JSON writers for command rows."""
import csv
import json
import math
from typing import IO, Any, Dict, List, Sequence

from tasepcheck.models.results import OutputFormat

Row = Dict[str, Any]


def format_value(value: Any) -> str:
    """CSV cell text: 17 significant digits for floats, lowercase booleans, empty for None."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _json_value(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def write_csv(rows: List[Row], columns: Sequence[str], stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(column)) for column in columns])


def write_json(rows: List[Row], columns: Sequence[str], stream: IO[str]) -> None:
    # floats are written with their shortest round-trip repr
    payload = [{column: _json_value(row.get(column)) for column in columns} for row in rows]
    json.dump(payload, stream, indent=2)
    stream.write("\n")


def write_rows(rows: List[Row], columns: Sequence[str], output_format: OutputFormat, stream: IO[str]) -> None:
    if OutputFormat(output_format) is OutputFormat.JSON:
        write_json(rows, columns, stream)
    else:
        write_csv(rows, columns, stream)
