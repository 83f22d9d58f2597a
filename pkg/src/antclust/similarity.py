"""Similarity between dataset items.

Every item similarity lands in [0, 1] (1 = identical). A dataset is a list
of feature columns; each column knows how to compare two of its entries, and
the total similarity of a pair is the mean over columns. Three column kinds
exist: scalar values compared by ``1 - |x - y|``, sets of fixed-width binary
descriptors compared by their best-matching pair under Hamming distance, and
precomputed similarity matrices ingested from disk.

File formats
------------
Similarity matrix: plain text, first line ``n``, then n lines of n
space-separated decimals.

Descriptor container: binary, magic ``ADSC``, then little-endian u32 item
count and u32 descriptor width in bytes; per item a u32 descriptor count
followed by ``count * width`` raw bytes. A text alternative for hand-written
fixtures holds one line per item, descriptors as hex strings separated by
spaces; ``convert-descriptors`` in the CLI turns it into the container.

Scalar dataset: CSV, one row per item, one column per scalar feature,
optional header.
"""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np

from ._backend import kernels, use_compiled
from .errors import (
    ConfigError,
    DataError,
    DescriptorFormatError,
    DescriptorMismatchError,
    FeatureRangeError,
    MatrixParseError,
    MatrixRangeError,
    MatrixShapeError,
    MatrixSymmetryError,
)

SYMMETRY_TOLERANCE = 1e-9
DEFAULT_DESCRIPTOR_WIDTH = 32  # bytes, i.e. 256-bit descriptors

_POPCOUNT_LUT = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)


# --------------------------------------------------------------------------
# elementary similarities


def sim_scalar(x: float, y: float) -> float:
    """Similarity of two normalized scalars: ``1 - |x - y|``."""
    if not 0.0 <= x <= 1.0 or not 0.0 <= y <= 1.0:
        raise FeatureRangeError(f"scalar features must be in [0, 1], got ({x}, {y})")
    return 1.0 - abs(x - y)


def aggregate_similarity(per_feature_sims) -> float:
    """Mean of the per-feature similarities."""
    sims = list(per_feature_sims)
    if not sims:
        raise ConfigError("at least one similarity measure is required")
    for s in sims:
        if not 0.0 <= s <= 1.0:
            raise DataError(f"per-feature similarity {s} outside [0, 1]")
    return sum(sims) / len(sims)


# --------------------------------------------------------------------------
# binary descriptors


class DescriptorSet:
    """The binary feature descriptors of one item, all of equal width."""

    __slots__ = ("data",)

    def __init__(self, descriptors):
        if isinstance(descriptors, np.ndarray):
            if descriptors.ndim != 2 or descriptors.dtype != np.uint8:
                raise DescriptorFormatError("descriptor array must be 2-D uint8")
            data = np.ascontiguousarray(descriptors)
        else:
            rows = list(descriptors)
            if not rows:
                raise DescriptorFormatError("descriptor set must not be empty")
            widths = {len(r) for r in rows}
            if len(widths) != 1:
                raise DescriptorMismatchError(
                    f"descriptors in one set differ in width: {sorted(widths)}"
                )
            data = np.frombuffer(b"".join(bytes(r) for r in rows), dtype=np.uint8)
            data = data.reshape(len(rows), widths.pop()).copy()
        if data.shape[0] == 0 or data.shape[1] == 0:
            raise DescriptorFormatError("descriptor set must not be empty")
        data.setflags(write=False)
        self.data = data

    @property
    def descriptor_width_bytes(self) -> int:
        return self.data.shape[1]

    @property
    def descriptors(self) -> tuple[bytes, ...]:
        return tuple(row.tobytes() for row in self.data)

    def __len__(self) -> int:
        return self.data.shape[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, DescriptorSet) and np.array_equal(self.data, other.data)


def _min_cross_hamming_numpy(a: np.ndarray, b: np.ndarray) -> int:
    xor = np.bitwise_xor(a[:, None, :], b[None, :, :])
    dists = _POPCOUNT_LUT[xor].sum(axis=2, dtype=np.int64)
    return int(dists.min())


def min_cross_hamming(a: DescriptorSet, b: DescriptorSet, backend: str | None = None) -> int:
    """Smallest Hamming distance over all descriptor pairs (p in a, q in b)."""
    if a.descriptor_width_bytes != b.descriptor_width_bytes:
        raise DescriptorMismatchError(
            f"descriptor widths differ: {a.descriptor_width_bytes} vs "
            f"{b.descriptor_width_bytes} bytes"
        )
    if use_compiled(backend):
        return kernels().min_cross_hamming(a.data, b.data)
    return _min_cross_hamming_numpy(a.data, b.data)


def sim_descriptor_sets(a: DescriptorSet, b: DescriptorSet, backend: str | None = None) -> float:
    """Best-match similarity: ``1 - d_min / max_bits``.

    Only the single best-matching descriptor pair counts; the distance is
    normalized by the maximum possible Hamming distance so identical sets
    score exactly 1 and bitwise complements score exactly 0.
    """
    d_min = min_cross_hamming(a, b, backend)
    return 1.0 - d_min / (8.0 * a.descriptor_width_bytes)


# --------------------------------------------------------------------------
# precomputed similarity matrices


@dataclass(frozen=True)
class SimilarityMatrix:
    """Validated n-by-n similarity matrix: symmetric, unit diagonal, [0, 1]."""

    values: np.ndarray

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @classmethod
    def from_array(cls, raw) -> "SimilarityMatrix":
        """Validate a raw array and canonicalize it.

        Asymmetry beyond 1e-9, out-of-range entries, or a non-unit diagonal
        are rejected with the offending cell. Sub-tolerance asymmetry is
        averaged away and the diagonal snapped to exactly 1 so downstream
        symmetry/identity guarantees are exact.
        """
        m = np.asarray(raw, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise MatrixShapeError(f"expected a square matrix, got shape {m.shape}")
        bad = np.argwhere(~np.isfinite(m))
        if bad.size:
            r, c = bad[0]
            raise MatrixParseError("non-finite matrix entry", int(r), int(c))
        bad = np.argwhere((m < 0.0) | (m > 1.0))
        if bad.size:
            r, c = bad[0]
            raise MatrixRangeError(f"entry {m[bad[0][0], bad[0][1]]} outside [0, 1]", int(r), int(c))
        asym = np.abs(m - m.T)
        bad = np.argwhere(asym > SYMMETRY_TOLERANCE)
        if bad.size:
            r, c = bad[0]
            raise MatrixSymmetryError(
                f"asymmetric beyond {SYMMETRY_TOLERANCE}: {m[r, c]} vs {m[c, r]}",
                int(r),
                int(c),
            )
        diag = np.abs(np.diagonal(m) - 1.0)
        bad = np.argwhere(diag > SYMMETRY_TOLERANCE)
        if bad.size:
            r = int(bad[0][0])
            raise MatrixRangeError(f"diagonal entry {m[r, r]} is not 1", r, r)
        canonical = (m + m.T) / 2.0
        np.fill_diagonal(canonical, 1.0)
        canonical.setflags(write=False)
        return cls(canonical)


def load_similarity_matrix(path) -> SimilarityMatrix:
    """Read and validate a similarity matrix file (see module docstring)."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise MatrixParseError("empty matrix file")
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise MatrixParseError(f"first line must be the item count, got {lines[0]!r}") from None
    if n < 1:
        raise MatrixShapeError(f"item count must be positive, got {n}")
    if len(lines) - 1 != n:
        raise MatrixShapeError(f"expected {n} matrix rows, found {len(lines) - 1}")
    values = np.empty((n, n), dtype=np.float64)
    for r, line in enumerate(lines[1:]):
        tokens = line.split()
        if len(tokens) != n:
            raise MatrixShapeError(f"expected {n} entries, found {len(tokens)}", r)
        for c, token in enumerate(tokens):
            try:
                values[r, c] = float(token)
            except ValueError:
                raise MatrixParseError(f"not a number: {token!r}", r, c) from None
    return SimilarityMatrix.from_array(values)


def write_similarity_matrix(path, matrix) -> None:
    """Write a matrix (SimilarityMatrix or array) in the text format."""
    values = matrix.values if isinstance(matrix, SimilarityMatrix) else np.asarray(matrix)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{values.shape[0]}\n")
        for row in values:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


# --------------------------------------------------------------------------
# feature columns


class ScalarColumn:
    """One scalar feature per item. Comparison requires values in [0, 1]."""

    def __init__(self, values):
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim != 1 or arr.size == 0:
            raise DataError("scalar column must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(arr)):
            raise DataError("scalar column contains non-finite values")
        self.values = arr

    def __len__(self) -> int:
        return self.values.size

    def _check_range(self) -> None:
        if self.values.min() < 0.0 or self.values.max() > 1.0:
            raise FeatureRangeError(
                "scalar column not normalized to [0, 1]; apply normalize_scalar_features"
            )

    def sim(self, i: int, j: int) -> float:
        return sim_scalar(float(self.values[i]), float(self.values[j]))

    def matrix(self, backend: str | None = None) -> np.ndarray:
        self._check_range()
        v = self.values
        return 1.0 - np.abs(v[:, None] - v[None, :])


class DescriptorColumn:
    """One DescriptorSet per item, all sharing the same descriptor width."""

    def __init__(self, sets):
        sets = list(sets)
        if not sets:
            raise DataError("descriptor column must not be empty")
        widths = {s.descriptor_width_bytes for s in sets}
        if len(widths) != 1:
            raise DescriptorMismatchError(
                f"descriptor widths differ across items: {sorted(widths)}"
            )
        self.sets = sets
        self.descriptor_width_bytes = widths.pop()

    def __len__(self) -> int:
        return len(self.sets)

    def sim(self, i: int, j: int) -> float:
        return sim_descriptor_sets(self.sets[i], self.sets[j])

    def matrix(self, backend: str | None = None) -> np.ndarray:
        n = len(self.sets)
        out = np.ones((n, n), dtype=np.float64)
        if use_compiled(backend):
            counts = np.array([len(s) for s in self.sets], dtype=np.int64)
            offsets = np.zeros(n + 1, dtype=np.int64)
            np.cumsum(counts, out=offsets[1:])
            flat = np.vstack([s.data for s in self.sets])
            kernels().descriptor_similarity_matrix(flat, offsets, out)
            return out
        for i in range(n):
            for j in range(i + 1, n):
                out[i, j] = out[j, i] = sim_descriptor_sets(self.sets[i], self.sets[j], "pure")
        return out


class MatrixColumn:
    """A feature whose pairwise similarities were precomputed externally."""

    def __init__(self, matrix: SimilarityMatrix):
        self.matrix_data = matrix

    def __len__(self) -> int:
        return self.matrix_data.n

    def sim(self, i: int, j: int) -> float:
        return float(self.matrix_data.values[i, j])

    def matrix(self, backend: str | None = None) -> np.ndarray:
        return self.matrix_data.values


def normalize_scalar_features(column: ScalarColumn) -> ScalarColumn:
    """Min-max scale a scalar column into [0, 1]; constant columns map to 0.5."""
    v = column.values
    lo, hi = float(v.min()), float(v.max())
    if hi == lo:
        return ScalarColumn(np.full(v.size, 0.5))
    return ScalarColumn((v - lo) / (hi - lo))


def pairwise_similarity(columns, i: int, j: int) -> float:
    """Total similarity of items i and j: mean of the per-column similarities."""
    columns = list(columns)
    if not columns:
        raise ConfigError("at least one feature column is required")
    return aggregate_similarity(col.sim(i, j) for col in columns)


def similarity_matrix(columns, backend: str | None = None) -> np.ndarray:
    """Precompute the full n-by-n similarity matrix for a dataset.

    Accumulates the per-column matrices in column order and divides once, so
    each entry is bit-identical to ``pairwise_similarity(columns, i, j)``.
    """
    columns = list(columns)
    if not columns:
        raise ConfigError("at least one feature column is required")
    sizes = {len(col) for col in columns}
    if len(sizes) != 1:
        raise DataError(f"feature columns disagree on item count: {sorted(sizes)}")
    out = columns[0].matrix(backend).copy()
    for col in columns[1:]:
        out += col.matrix(backend)
    out /= len(columns)
    return out


# --------------------------------------------------------------------------
# descriptor container I/O

_MAGIC = b"ADSC"
_HEADER = struct.Struct("<4sII")
_COUNT = struct.Struct("<I")


def load_descriptor_sets(path) -> list[DescriptorSet]:
    """Read a binary descriptor container; one DescriptorSet per item, in order."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise DescriptorFormatError("truncated container: missing header")
    magic, item_count, width = _HEADER.unpack_from(blob, 0)
    if magic != _MAGIC:
        raise DescriptorFormatError(f"bad magic {magic!r}, expected {_MAGIC!r}")
    if item_count == 0:
        raise DescriptorFormatError("container declares zero items")
    if width == 0:
        raise DescriptorFormatError("container declares zero descriptor width")
    pos = _HEADER.size
    sets = []
    for item in range(item_count):
        if pos + _COUNT.size > len(blob):
            raise DescriptorFormatError(f"truncated container: missing count for item {item}")
        (count,) = _COUNT.unpack_from(blob, pos)
        pos += _COUNT.size
        if count == 0:
            raise DescriptorFormatError(f"item {item} declares zero descriptors")
        end = pos + count * width
        if end > len(blob):
            raise DescriptorFormatError(
                f"truncated container: item {item} declares {count} descriptors "
                f"but the file ends early"
            )
        data = np.frombuffer(blob[pos:end], dtype=np.uint8).reshape(count, width).copy()
        sets.append(DescriptorSet(data))
        pos = end
    if pos != len(blob):
        raise DescriptorFormatError(f"{len(blob) - pos} trailing bytes after the last item")
    return sets


def descriptor_container_bytes(sets) -> bytes:
    """Serialize DescriptorSets into the binary container format."""
    sets = list(sets)
    if not sets:
        raise DescriptorFormatError("nothing to write: no descriptor sets")
    widths = {s.descriptor_width_bytes for s in sets}
    if len(widths) != 1:
        raise DescriptorMismatchError(f"descriptor widths differ across items: {sorted(widths)}")
    chunks = [_HEADER.pack(_MAGIC, len(sets), widths.pop())]
    for s in sets:
        chunks.append(_COUNT.pack(len(s)))
        chunks.append(s.data.tobytes())
    return b"".join(chunks)


def write_descriptor_container(path, sets) -> None:
    """Write DescriptorSets as a binary container."""
    with open(path, "wb") as fh:
        fh.write(descriptor_container_bytes(sets))


def read_descriptor_hex(path) -> list[DescriptorSet]:
    """Read the hand-writable text alternative: one line per item, hex strings."""
    sets = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            tokens = line.split()
            if not tokens:
                continue
            rows = []
            for token in tokens:
                try:
                    raw = bytes.fromhex(token)
                except ValueError:
                    raise DescriptorFormatError(
                        f"line {lineno}: {token!r} is not a hex string"
                    ) from None
                if not raw:
                    raise DescriptorFormatError(f"line {lineno}: empty descriptor")
                if width is None:
                    width = len(raw)
                elif len(raw) != width:
                    raise DescriptorFormatError(
                        f"line {lineno}: descriptor width {len(raw)} != {width}"
                    )
                rows.append(raw)
            sets.append(DescriptorSet(rows))
    if not sets:
        raise DescriptorFormatError("no descriptor lines found")
    return sets


def load_descriptor_input(path) -> list[DescriptorSet]:
    """Load descriptors from either format, sniffing the binary magic."""
    with open(path, "rb") as fh:
        head = fh.read(len(_MAGIC))
    if head == _MAGIC:
        return load_descriptor_sets(path)
    return read_descriptor_hex(path)


# --------------------------------------------------------------------------
# scalar CSV ingestion


def load_scalar_csv(path) -> list[np.ndarray]:
    """Read a scalar dataset CSV into one raw (unnormalized) array per column.

    A first row with any non-numeric cell is treated as a header.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    if not rows:
        raise DataError(f"{path}: empty dataset")
    start = 0
    try:
        [float(cell) for cell in rows[0]]
    except ValueError:
        start = 1
    data_rows = rows[start:]
    if not data_rows:
        raise DataError(f"{path}: no data rows")
    n_cols = len(data_rows[0])
    if start == 1 and len(rows[0]) != n_cols:
        raise DataError(f"{path}: header has {len(rows[0])} cells but rows have {n_cols}")
    values = np.empty((len(data_rows), n_cols), dtype=np.float64)
    for r, row in enumerate(data_rows):
        if len(row) != n_cols:
            raise DataError(f"{path}: row {r + start + 1} has {len(row)} cells, expected {n_cols}")
        for c, cell in enumerate(row):
            try:
                values[r, c] = float(cell)
            except ValueError:
                raise DataError(f"{path}: row {r + start + 1}, column {c + 1}: {cell!r}") from None
    if not np.all(np.isfinite(values)):
        raise DataError(f"{path}: non-finite values in dataset")
    return [values[:, c].copy() for c in range(n_cols)]
