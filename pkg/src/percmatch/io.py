"""Edge-list text files and the binary CSR cache.

Cache layout (all little-endian):

    offset  type         field
    0       4 bytes      magic b"PMGR"
    4       uint32       format version (1)
    8       uint32       flags (bit 0: weight array present)
    12      uint64       n
    20      uint64       nnz (= 2 * edges)
    28      int64[n+1]   CSR offsets
    ...     int32[nnz]   neighbor ids
    ...     float64[n]   weights, only when flag bit 0 is set
"""
from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import Graph

MAGIC = b"PMGR"
VERSION = 1
_HEADER = struct.Struct("<4sIIQQ")


class DataError(ValueError):
    """Malformed input file."""


@dataclass
class EdgeListResult:
    graph: Graph
    ids: np.ndarray  # ids[i] = original id of dense vertex i
    self_loops: int
    duplicates: int


def _scan_bad_line(path) -> None:
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 2:
                raise DataError(f"{path}:{lineno}: expected 'u v', got {text!r}")
            try:
                int(parts[0]), int(parts[1])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-integer vertex id in {text!r}") from None


def load_edge_list(path) -> EdgeListResult:
    """Read a SNAP-style 'u v' edge list; ids are re-indexed densely."""
    path = Path(path)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)  # empty input is reported below
            raw = np.loadtxt(path, dtype=np.int64, comments="#", ndmin=2)
    except ValueError:
        _scan_bad_line(path)
        raise
    if raw.size == 0:
        raise DataError(f"{path}: no edges")
    if raw.shape[1] != 2:
        _scan_bad_line(path)
    ids, dense = np.unique(raw, return_inverse=True)
    e = dense.reshape(-1, 2)
    loops = int(np.count_nonzero(e[:, 0] == e[:, 1]))
    e = e[e[:, 0] != e[:, 1]]
    n = ids.size
    und = np.sort(e, axis=1)
    distinct = np.unique(und[:, 0] * n + und[:, 1]).size
    g = Graph.from_edges(n, e)
    return EdgeListResult(g, ids, loops, int(e.shape[0] - distinct))


def save_edge_list(graph: Graph, path, ids=None) -> None:
    e = graph.edges()
    if ids is not None:
        e = np.asarray(ids)[e]
    with open(path, "w") as fh:
        fh.write(f"# n={graph.n} edges={e.shape[0]}\n")
        np.savetxt(fh, e, fmt="%d", delimiter=" ")


def save_cache(graph: Graph, path) -> None:
    flags = 1 if graph.weights is not None else 0
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, flags, graph.n, graph.indices.size))
        fh.write(np.asarray(graph.indptr, dtype="<i8").tobytes())
        fh.write(np.asarray(graph.indices, dtype="<i4").tobytes())
        if flags & 1:
            fh.write(np.asarray(graph.weights, dtype="<f8").tobytes())


def load_cache(path) -> Graph:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise DataError(f"{path}: truncated header")
    magic, version, flags, n, nnz = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise DataError(f"{path}: not a graph cache")
    if version != VERSION:
        raise DataError(f"{path}: unsupported cache version {version}")
    need = _HEADER.size + 8 * (n + 1) + 4 * nnz + (8 * n if flags & 1 else 0)
    if len(data) != need:
        raise DataError(f"{path}: expected {need} bytes, found {len(data)}")
    off = _HEADER.size
    indptr = np.frombuffer(data, "<i8", n + 1, off).astype(np.int64)
    off += 8 * (n + 1)
    indices = np.frombuffer(data, "<i4", nnz, off).astype(np.int32)
    off += 4 * nnz
    weights = np.frombuffer(data, "<f8", n, off).astype(np.float64) if flags & 1 else None
    return Graph(int(n), indptr, indices, weights)


def load_graph(path) -> Graph:
    """Cache files are recognized by their magic bytes; anything else is an edge list."""
    with open(path, "rb") as fh:
        head = fh.read(4)
    if head == MAGIC:
        return load_cache(path)
    return load_edge_list(path).graph
