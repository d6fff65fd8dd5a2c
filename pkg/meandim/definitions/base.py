"""
Base classes for meandim definition objects.

This module provides the small amount of shared behaviour the definition
classes need: a JSON-friendly dictionary form for anything that appears in an
experiment configuration, and a list type that flattens report objects into
CSV rows.
"""

import json
from dataclasses import fields, is_dataclass
from enum import Enum
from typing import Any, ClassVar

import numpy as np


def _plain(value: Any) -> Any:
    """Convert tuples, numpy scalars and enums into JSON-compatible values."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (tuple, list, np.ndarray)):
        return [_plain(i) for i in value]
    if isinstance(value, np.generic):
        return value.item()
    if is_dataclass(value) and isinstance(value, BaseDefinition):
        return value.to_dict()
    return value


class BaseDefinition:
    """
    Base class for immutable definitions that round-trip through JSON.

    Subclasses are frozen dataclasses. The class attribute ``kind`` names the
    variant and is written under ``tag_key`` so that readers can dispatch on it.

    Attributes:
        kind: Enum member identifying the variant
        tag_key: Dictionary key holding ``kind.value``
    """

    kind: ClassVar[Enum]
    tag_key: ClassVar[str] = "kind"

    def to_dict(self) -> dict[str, Any]:
        """
        Return a JSON-compatible dictionary describing this definition.

        Returns:
            Dictionary with the variant tag followed by the dataclass fields
        """
        data = {self.tag_key: self.kind.value}
        for field in fields(self):
            if field.init and field.repr:
                data[field.name] = _plain(getattr(self, field.name))
        return data

    def to_string(self) -> str:
        """
        Return the canonical JSON text of this definition.

        Returns:
            JSON string with sorted keys
        """
        return json.dumps(self.to_dict(), sort_keys=True)

    def __str__(self):
        return self.to_string()


class BaseArray(list):
    """
    Collection of report objects that serialize to CSV rows.

    Every item must implement ``to_rows()`` returning a list of dictionaries;
    the array concatenates them in insertion order, which is the rank order
    of the tasks that produced them.
    """

    def to_rows(self) -> list[dict[str, Any]]:
        """
        Flatten all items into a single list of rows.

        Returns:
            Rows of all items, in order
        """
        rows = []
        for item in self:
            rows.extend(item.to_rows())
        return rows
