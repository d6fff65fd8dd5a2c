"""meandim definitions package."""

from meandim.contrib.families import Family, LawKind

# Largest product grid the exact oracle will enumerate
MAX_GRID_SIZE = 10**7

__all__ = ["Family", "LawKind", "MAX_GRID_SIZE"]
