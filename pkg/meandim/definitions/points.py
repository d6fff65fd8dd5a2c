"""
Sobol' points, nested uniform scrambling and midpoint grids.

This module ingests Joe-Kuo style direction numbers, generates Sobol' points
in 32-bit precision by Gray-code updates, randomizes them with a hash-based
nested uniform (Owen) scramble and builds the one-dimensional midpoint grids
used for deterministic variance computations.

Point batches keep the 32-bit integer digits next to the floating point
values. Scrambling works on the digits; the values are derived on demand and
never contain an exact 0 (see ``ZERO_REPLACEMENT``).
"""

import hashlib
import logging
import os
from collections.abc import Iterable
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from importlib import resources
from pathlib import Path
from typing import TextIO

import numpy as np

from meandim.exceptions import DirectionFileError, DirectionTableTooSmall, DomainError

logger = logging.getLogger(__name__)

BITS = 32
ZERO_REPLACEMENT = 2.0**-33

DIRECTION_FILE = "new-joe-kuo-6.21201"
DIRECTION_FILE_SHA256 = "a8276f8f98833fbacc48affbd03249f7019e673cba9838ad53ba89ef3e9a5538"
DIRECTIONS_ENV_VAR = "MEANDIM_DIRS"

# Minimum dimension count the shipped direction file must provide
MIN_SHIPPED_DIMENSIONS = 4096

# splitmix64 finalizer constants
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1

# Coordinates scrambled together; bounds temporaries to rows x block
_SCRAMBLE_COLUMN_BLOCK = 64


@dataclass(frozen=True)
class DirectionRecord:
    """
    One record of a direction-number file.

    Attributes:
        dim_index: 1-based dimension the record belongs to
        degree: Degree s of the primitive polynomial
        coefficient: Interior polynomial coefficients a, as an s-1 bit integer
        initial: Initial direction integers m_1..m_s
    """

    dim_index: int
    degree: int
    coefficient: int
    initial: tuple[int, ...]


def _direction_column(record: DirectionRecord | None) -> list[int]:
    """Derive v_1..v_32 (as 32-bit integers) for one dimension."""
    if record is None:
        m = [1] * BITS
    else:
        s, a = record.degree, record.coefficient
        m = list(record.initial)
        for k in range(s, BITS):
            value = m[k - s] ^ (m[k - s] << s)
            for i in range(1, s):
                if (a >> (s - 1 - i)) & 1:
                    value ^= m[k - i] << i
            m.append(value)
    return [m[k] << (BITS - 1 - k) for k in range(BITS)]


class DirectionTable:
    """
    Sobol' direction numbers for dimensions 1..max_dim.

    Dimension 1 is the van der Corput column (v_k = 2^(32-k)) and needs no
    record; dimension j >= 2 comes from record j - 2. Derived direction
    integers are computed lazily and cached per table.

    Attributes:
        records: Parsed records for dimensions 2..max_dim
        max_dim: Largest supported dimension
        source: Where the records came from, for logging and manifests
        sha256: Checksum of the source text, when known
    """

    def __init__(
        self,
        records: Iterable[DirectionRecord],
        source: str = "<memory>",
        sha256: str | None = None,
    ):
        self.records = tuple(records)
        self.max_dim = len(self.records) + 1
        self.source = source
        self.sha256 = sha256
        self._columns = np.zeros((0, BITS), dtype=np.uint32)

    def __repr__(self):
        return f"DirectionTable(max_dim={self.max_dim}, source={self.source!r})"

    def require(self, dim: int) -> None:
        """
        Check that ``dim`` dimensions are available.

        Raises:
            DirectionTableTooSmall: If ``dim`` exceeds ``max_dim``
        """
        if dim > self.max_dim:
            raise DirectionTableTooSmall(required=dim, available=self.max_dim)

    def direction_integers(self, dim: int) -> np.ndarray:
        """
        Derived direction integers for dimensions 1..dim.

        Args:
            dim: Number of leading dimensions

        Returns:
            uint32 array of shape (dim, 32); entry [j, k] is v_{j+1, k+1}
        """
        self.require(dim)
        have = self._columns.shape[0]
        if dim > have:
            extra = [
                _direction_column(None if j == 0 else self.records[j - 1])
                for j in range(have, dim)
            ]
            self._columns = np.vstack(
                [self._columns, np.array(extra, dtype=np.uint32)]
            )
        return self._columns[:dim]


def load_direction_table(
    stream: TextIO | Iterable[str],
    source: str = "<stream>",
    sha256: str | None = None,
) -> DirectionTable:
    """
    Parse a Joe-Kuo style direction-number file.

    Records are whitespace-separated ``d s a m_1 ... m_s``, one per dimension
    starting at d = 2, sorted by d. A single header line beginning with a
    non-digit may precede them. Blank lines are ignored.

    Args:
        stream: Text stream or iterable of lines
        source: Label stored on the table
        sha256: Checksum stored on the table

    Returns:
        DirectionTable supporting dimensions 1..(last d)

    Raises:
        DirectionFileError: On malformed records, even or oversized m_i,
            dimension gaps, or when no records are present

    Example:
        >>> table = load_direction_table(["d s a m_i", "2 1 0 1"])
        >>> table.max_dim
        2
    """
    records = []
    seen_content = False
    for lineno, raw in enumerate(stream, start=1):
        text = raw.strip()
        if not text:
            continue
        if not seen_content and not text[0].isdigit():
            seen_content = True
            continue
        seen_content = True
        try:
            numbers = [int(token) for token in text.split()]
        except ValueError:
            raise DirectionFileError("non-integer field", line=lineno) from None
        if len(numbers) < 4:
            raise DirectionFileError("expected 'd s a m_1 ... m_s'", line=lineno)
        d, s, a, *m = numbers
        expected = len(records) + 2
        if d != expected:
            raise DirectionFileError(
                f"dimension gap, expected d={expected} but found d={d}", line=lineno
            )
        if not 1 <= s < BITS:
            raise DirectionFileError(f"invalid degree s={s}", line=lineno)
        if len(m) != s:
            raise DirectionFileError(
                f"degree {s} needs {s} initial values, found {len(m)}", line=lineno
            )
        if not 0 <= a < 2 ** (s - 1):
            raise DirectionFileError(f"coefficient a={a} needs more than s-1 bits", line=lineno)
        for i, value in enumerate(m, start=1):
            if value % 2 == 0:
                raise DirectionFileError(f"m_{i}={value} is even", line=lineno)
            if not 0 < value < 2**i:
                raise DirectionFileError(f"m_{i}={value} is not below 2^{i}", line=lineno)
        records.append(DirectionRecord(d, s, a, tuple(m)))
    if not records:
        raise DirectionFileError("no records")
    return DirectionTable(records, source=source, sha256=sha256)


def resolve_direction_path(explicit: str | os.PathLike | None = None) -> Path | None:
    """
    Resolve which direction file to use.

    Precedence: ``explicit`` argument, then the ``MEANDIM_DIRS`` environment
    variable, then the packaged file (returned as None).

    Args:
        explicit: Path given by the caller, if any

    Returns:
        Path of a user-supplied file, or None for the packaged file
    """
    if explicit:
        return Path(explicit)
    env = os.environ.get(DIRECTIONS_ENV_VAR)
    if env:
        return Path(env)
    return None


@lru_cache(maxsize=8)
def _load_cached(path: str | None, verify: bool) -> DirectionTable:
    if path is None:
        raw = resources.files("meandim.data").joinpath(DIRECTION_FILE).read_bytes()
        source = f"meandim.data/{DIRECTION_FILE}"
    else:
        raw = Path(path).read_bytes()
        source = path
    digest = hashlib.sha256(raw).hexdigest()
    text = raw.decode("ascii")
    if path is None and verify and digest != DIRECTION_FILE_SHA256:
        logger.error("Checksum mismatch for packaged direction file: %s", digest)
        raise DirectionFileError(f"packaged {DIRECTION_FILE} failed its checksum")
    table = load_direction_table(text.splitlines(), source=source, sha256=digest)
    if path is None and table.max_dim < MIN_SHIPPED_DIMENSIONS:
        raise DirectionFileError(
            f"packaged direction file supports only {table.max_dim} dimensions"
        )
    logger.info("Loaded %d direction records from %s", len(table.records), source)
    return table


def load_default_table(
    path: str | os.PathLike | None = None,
    verify: bool = True,
) -> DirectionTable:
    """
    Load a direction table, cached per path.

    Args:
        path: Explicit file; when None the ``MEANDIM_DIRS`` variable and then
            the packaged Joe-Kuo file are used
        verify: Check the packaged file against its recorded SHA-256

    Returns:
        The parsed DirectionTable
    """
    resolved = resolve_direction_path(path)
    return _load_cached(None if resolved is None else str(resolved), verify)


@dataclass(frozen=True, eq=False)
class PointBatch:
    """
    A block of points in the open unit cube.

    Attributes:
        digits: uint32 array (n, dim) of 32-bit digit expansions, or None for
            batches built directly from values (midpoint grids)
        replicate_id: Replicate the batch belongs to
        scramble_seed: Seed of the scramble applied, None when unscrambled
    """

    digits: np.ndarray | None
    replicate_id: int = 0
    scramble_seed: int | None = None
    _values: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return (self.digits if self.digits is not None else self._values).shape[0]

    @property
    def dim(self) -> int:
        return (self.digits if self.digits is not None else self._values).shape[1]

    @cached_property
    def values(self) -> np.ndarray:
        """Points as floats in (0, 1); exact zeros are replaced by 2^-33."""
        if self._values is not None:
            return self._values
        values = self.digits * 2.0**-BITS
        values[values == 0.0] = ZERO_REPLACEMENT
        values.setflags(write=False)
        return values

    def rows(self, start: int, stop: int) -> "PointBatch":
        """
        Slice a row block, keeping replicate and scramble identity.

        Args:
            start: First row
            stop: One past the last row

        Returns:
            PointBatch with rows ``start:stop``
        """
        if self.digits is None:
            return PointBatch(
                None, self.replicate_id, self.scramble_seed, self._values[start:stop]
            )
        return PointBatch(self.digits[start:stop], self.replicate_id, self.scramble_seed)


def _check_power_of_two(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise DomainError(f"n={n} is not a power of two")
    m = n.bit_length() - 1
    if m > BITS:
        raise DomainError(f"n=2^{m} exceeds 2^{BITS} points")
    return m


def sobol_points(
    table: DirectionTable,
    n: int,
    dim: int,
    order: str = "gray",
) -> PointBatch:
    """
    First n points of the Sobol' sequence in ``dim`` dimensions.

    In Gray-code order point i is x_{i-1} XOR v_c with c the lowest set bit of
    i; in natural order point i XORs the v_k of every set bit of i. Both orders
    give the same point set; point 0 is the origin before adjustment.

    Args:
        table: Direction numbers
        n: Number of points, a power of two up to 2^32
        dim: Dimension, 1..table.max_dim
        order: "gray" or "natural"

    Returns:
        Unscrambled PointBatch

    Raises:
        DomainError: If ``n`` is not a power of two, ``dim < 1`` or the order
            is unknown
        DirectionTableTooSmall: If ``dim`` exceeds the table
    """
    m = _check_power_of_two(n)
    if dim < 1:
        raise DomainError(f"dim={dim} must be positive")
    v = table.direction_integers(dim)
    digits = np.zeros((n, dim), dtype=np.uint32)
    if order == "gray":
        current = np.zeros(dim, dtype=np.uint32)
        for i in range(1, n):
            c = (i & -i).bit_length() - 1
            current ^= v[:, c]
            digits[i] = current
    elif order == "natural":
        index = np.arange(n, dtype=np.uint64)
        for k in range(m):
            mask = ((index >> np.uint64(k)) & np.uint64(1)).astype(bool)
            digits[mask] ^= v[:, k]
    else:
        raise DomainError(f"unknown order {order!r}")
    digits.setflags(write=False)
    return PointBatch(digits)


def derive_seed(master_seed: int, *keys: int) -> int:
    """
    Derive a child seed from a master seed and integer keys.

    Uses numpy's SeedSequence spawn keys, so the result is platform
    independent and distinct keys give statistically independent seeds.

    Args:
        master_seed: Nonnegative master seed
        *keys: Nonnegative integers, for example (d, replicate)

    Returns:
        64-bit child seed
    """
    sequence = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(keys))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def _path_keys(seed: int, dim: int) -> np.ndarray:
    """Per-(coordinate, depth) hash keys, shape (dim, 32)."""
    state = np.random.SeedSequence(entropy=seed).generate_state(
        dim * BITS, dtype=np.uint64
    )
    return state.reshape(dim, BITS)


def _mix(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer, a bijection on uint64."""
    z = z ^ (z >> np.uint64(30))
    z = z * _MIX1
    z = z ^ (z >> np.uint64(27))
    z = z * _MIX2
    return z ^ (z >> np.uint64(31))


def _scramble_digits(digits: np.ndarray, keys: np.ndarray) -> np.ndarray:
    """Flip each bit by a hash of (key for coordinate and depth, preceding bits)."""
    x = digits.astype(np.uint64)
    out = np.zeros_like(x)
    golden = np.uint64(_GOLDEN)
    one = np.uint64(1)
    with np.errstate(over="ignore"):
        for depth in range(BITS):
            shift = np.uint64(BITS - 1 - depth)
            prefix = x >> (shift + one)
            flip = _mix(prefix * golden ^ keys[:, depth]) >> np.uint64(63)
            out |= (((x >> shift) & one) ^ flip) << shift
    return out.astype(np.uint32)


def owen_scramble(batch: PointBatch, seed: int) -> PointBatch:
    """
    Nested uniform scramble of an unscrambled Sobol' batch.

    Every coordinate passes through its own random binary permutation tree
    to 32-bit depth: bit k is flipped iff a keyed hash of (seed, coordinate,
    first k bits) says so. The flip of a bit depends only on the bits above
    it, so dyadic intervals map onto dyadic intervals and the net property
    survives. Scrambling a row block gives the same rows as scrambling the
    whole batch.

    Args:
        batch: Unscrambled batch with digits
        seed: 64-bit scramble seed

    Returns:
        Scrambled PointBatch with the same replicate id

    Raises:
        DomainError: If the batch is already scrambled or has no digits
    """
    if batch.digits is None or batch.scramble_seed is not None:
        raise DomainError("owen_scramble needs an unscrambled Sobol' batch")
    seed = int(seed) & _MASK64
    keys = _path_keys(seed, batch.dim)
    out = np.empty_like(batch.digits)
    for start in range(0, batch.dim, _SCRAMBLE_COLUMN_BLOCK):
        stop = start + _SCRAMBLE_COLUMN_BLOCK
        out[:, start:stop] = _scramble_digits(
            batch.digits[:, start:stop], keys[start:stop]
        )
    out.setflags(write=False)
    return PointBatch(out, replicate_id=batch.replicate_id, scramble_seed=seed)


def midpoint_grid(n: int) -> PointBatch:
    """
    One-dimensional midpoint-rule grid.

    Args:
        n: Number of points, at least 1

    Returns:
        PointBatch with values (i + 0.5) / n for i = 0..n-1

    Raises:
        DomainError: If ``n < 1``
    """
    if n < 1:
        raise DomainError("midpoint_grid needs at least one point")
    values = ((np.arange(n, dtype=float) + 0.5) / n).reshape(n, 1)
    values.setflags(write=False)
    return PointBatch(None, _values=values)


def elementary_interval_counts(batch: PointBatch, k: int) -> np.ndarray:
    """
    Count points per dyadic interval of length 2^-k, per coordinate.

    Args:
        batch: Batch with digits
        k: Interval level, 0..32

    Returns:
        int array (2^k, dim) of counts
    """
    if batch.digits is None:
        raise DomainError("elementary_interval_counts needs a digit batch")
    if not 0 <= k <= BITS:
        raise DomainError(f"level k={k} out of range")
    cells = batch.digits.astype(np.uint64) >> np.uint64(BITS - k)
    counts = np.zeros((2**k, batch.dim), dtype=np.int64)
    for j in range(batch.dim):
        counts[:, j] = np.bincount(cells[:, j].astype(np.int64), minlength=2**k)
    return counts
