"""
Markdown table generation utilities.

Used by the subcommands to print short summaries of their results to the
terminal.
"""

from typing import Any

from meandim.contrib.csv import format_cell


def _short(value: Any) -> str:
    if isinstance(value, float):
        return format(value, ".6g")
    return format_cell(value)


class Table:
    """
    Generates Markdown tables from structured data.

    Attributes:
        data: List of dictionaries representing table rows
        headers: List of column header names

    Example:
        >>> data = [
        ...     {'d': 10, 'nu': 1.0841},
        ...     {'d': 39, 'nu': 1.9731}
        ... ]
        >>> table = Table(data)
        >>> print(table)
    """

    def __init__(self, data: list[dict[str, Any]] | None = None):
        self.data = data or []
        self._headers = list(self.data[0].keys()) if self.data else []

    @property
    def headers(self) -> str:
        """
        Markdown header and separator rows.

        Returns:
            String containing the formatted header and separator rows
        """
        return "\n".join(
            [
                f"| {' | '.join(self._headers)} |",
                f"| {' | '.join(['---' for _ in self._headers])} |",
            ]
        )

    @headers.setter
    def headers(self, headers: list[str]) -> None:
        self._headers = headers

    @property
    def body(self) -> str:
        """
        Markdown data rows; floats are shown to six significant digits.

        Returns:
            String containing all data rows
        """
        return "\n".join(
            f"| {' | '.join(_short(row.get(h)) for h in self._headers)} |"
            for row in self.data
        )

    def __str__(self) -> str:
        return "\n".join([self.headers, self.body])
