from pathlib import Path

import numpy as np

from meandim.definitions.points import DirectionTable, load_direction_table

TEST_DATA = Path(__file__).parent / "test_data"


def data_path(name: str) -> Path:
    return TEST_DATA / name


def head_table() -> DirectionTable:
    """Direction table for dimensions 1..41 read from the test data."""
    with open(data_path("directions_head.txt"), encoding="ascii") as src:
        return load_direction_table(src, source="directions_head.txt")


def brute_force_hybrids(spec, X: np.ndarray, X_prime: np.ndarray) -> np.ndarray:
    """f(x_{-j}:x'_j) for every j, one evaluation per hybrid point."""
    n, d = X.shape
    out = np.empty((n, d))
    for j in range(d):
        hybrid = X.copy()
        hybrid[:, j] = X_prime[:, j]
        out[:, j] = spec.evaluate_batch(hybrid)
    return out
