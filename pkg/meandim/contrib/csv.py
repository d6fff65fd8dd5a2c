"""
CSV output.

Tables are written as RFC 4180 CSV: CRLF line endings, minimal quoting, '.'
as the decimal separator and floats in 17 significant digits, so that a
value read back is the value written.
"""

import csv
import io
import math
from pathlib import Path
from typing import Any


def format_cell(value: Any) -> str:
    """
    Render one cell.

    Args:
        value: Cell value

    Returns:
        "" for None, "true"/"false" for booleans, 17 significant digits for
        floats and ``str`` otherwise
    """
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return format(value, ".17g")
    if hasattr(value, "item"):
        return format_cell(value.item())
    return str(value)


class CsvTable:
    """
    A CSV table with a fixed column order.

    Attributes:
        columns: Header names, in output order
        rows: Row dictionaries; missing keys become empty cells

    Example:
        >>> table = CsvTable(("d", "nu"), [{"d": 2, "nu": 1.5}])
        >>> table.to_string()
        'd,nu\\r\\n2,1.5\\r\\n'
    """

    def __init__(self, columns: tuple[str, ...], rows: list[dict[str, Any]] = None):
        self.columns = tuple(columns)
        self.rows = list(rows or [])

    def to_string(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\r\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([format_cell(row.get(column)) for column in self.columns])
        return buffer.getvalue()

    def write(self, path: str | Path) -> Path:
        """Write the table to ``path`` and return the path."""
        path = Path(path)
        with open(path, "w", newline="", encoding="utf-8") as dst:
            dst.write(self.to_string())
        return path
