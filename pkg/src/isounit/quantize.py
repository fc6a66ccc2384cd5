"""K-means vector quantization of feature frames into discrete units."""
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._io import atomic_open
from .errors import (
    DimMismatch,
    EmptyInput,
    FormatError,
    LengthMismatch,
    NonFiniteInput,
    TooFewPoints,
)
from .units import ContinuousUnitSeq

FEATURE_MAGIC = b"UFLT"
CODEBOOK_MAGIC = b"UFCB"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sBII")


@dataclass(frozen=True, eq=False)
class Codebook:
    centroids: np.ndarray
    wcss: float = float("nan")
    n_iter: int = 0
    history: tuple = field(default=(), repr=False)

    def __post_init__(self):
        c = np.array(self.centroids, dtype=np.float64, ndmin=2)
        if c.shape[0] < 1 or c.shape[1] < 1:
            raise FormatError(f"codebook needs K >= 1 and d >= 1, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise NonFiniteInput("codebook centroids must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "centroids", c)

    @property
    def k(self):
        return self.centroids.shape[0]

    @property
    def dims(self):
        return self.centroids.shape[1]


def _as_features(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1) if x.size else x.reshape(0, 1)
    if x.ndim != 2:
        raise DimMismatch(f"features must be a 2-D (n, d) matrix, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput("feature matrix contains NaN or inf")
    return np.ascontiguousarray(x)


def _assign(x, centroids, kb, n_threads=1):
    n = x.shape[0]
    if n_threads <= 1 or n < 2:
        return kb.assign_nearest(x, centroids)
    bounds = np.linspace(0, n, min(n_threads, n) + 1).astype(np.int64)
    chunks = [(bounds[i], bounds[i + 1]) for i in range(len(bounds) - 1)]
    labels = np.empty(n, np.int64)
    dist = np.empty(n, np.float64)

    def work(span):
        lo, hi = span
        labels[lo:hi], dist[lo:hi] = kb.assign_nearest(x[lo:hi], centroids)

    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        list(pool.map(work, chunks))
    return labels, dist


def _total(dist):
    # fixed ascending-row order so the objective is reproducible bit for bit
    return float(np.add.accumulate(dist)[-1]) if dist.size else 0.0


def _kmeans_pp(x, k, rng, kb):
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    _, d2 = kb.assign_nearest(x, x[chosen])
    for _ in range(1, k):
        total = _total(d2)
        if total > 0:
            r = rng.random() * total
            idx = int(np.searchsorted(np.add.accumulate(d2), r, side="right"))
            idx = min(idx, n - 1)
            while d2[idx] == 0:  # guard against landing on a zero-mass point
                idx -= 1
        else:
            # fewer distinct rows than k: any unused row will do
            free = np.setdiff1d(np.arange(n), chosen)
            idx = int(free[rng.integers(free.size)])
        chosen.append(idx)
        _, nd = kb.assign_nearest(x, x[idx:idx + 1])
        d2 = np.minimum(d2, nd)
    return x[chosen].copy()


def kmeans_fit(x, k, max_iters=100, seed=0, n_threads=1, debug=False, backend=None):
    """Lloyd's algorithm from k-means++ seeds.

    Stops after ``max_iters`` centroid updates or when no assignment changes.
    The returned codebook records the within-cluster sum of squares after
    every assignment step in ``history``; ``debug=True`` asserts it never
    increases.
    """
    x = _as_features(x)
    n = x.shape[0]
    if k < 1:
        raise TooFewPoints(f"k must be >= 1, got {k}")
    if n < k:
        raise TooFewPoints(f"{n} points cannot form {k} clusters")
    kb = kernels.get_backend(backend)
    rng = np.random.default_rng(seed)
    centroids = _kmeans_pp(x, k, rng, kb)
    labels, dist = _assign(x, centroids, kb, n_threads)
    history = [_total(dist)]
    it = 0
    while it < max_iters:
        it += 1
        sums, counts = kb.centroid_sums(x, labels, k)
        live = counts > 0
        centroids = centroids.copy()
        centroids[live] = sums[live] / counts[live, None]
        empty = np.flatnonzero(~live)
        if empty.size:
            # move each empty cluster onto a distinct worst-served point
            far = np.argsort(-dist, kind="stable")[:empty.size]
            centroids[empty] = x[far]
        new_labels, dist = _assign(x, centroids, kb, n_threads)
        history.append(_total(dist))
        if debug and history[-1] > history[-2]:
            raise AssertionError(f"WCSS increased at iteration {it}: {history[-2]!r} -> {history[-1]!r}")
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
    return Codebook(centroids, history[-1], it, tuple(history))


def quantize_assign(cb, x, n_threads=1, backend=None):
    """Nearest-centroid unit id per feature row (ties to the lower index)."""
    labels, _ = assign_with_distances(cb, x, n_threads, backend)
    return ContinuousUnitSeq(labels)


def assign_with_distances(cb, x, n_threads=1, backend=None):
    x = _as_features(x)
    if x.shape[0] == 0:
        return np.empty(0, np.int64), np.empty(0, np.float64)
    if x.shape[1] != cb.dims:
        raise DimMismatch(f"features have {x.shape[1]} dims, codebook has {cb.dims}")
    return _assign(x, cb.centroids, kernels.get_backend(backend), n_threads)


def wcss(cb, x, n_threads=1, backend=None):
    return _total(assign_with_distances(cb, x, n_threads, backend)[1])


# -- clustering quality --


def _contingency(reference_labels, cluster_ids):
    a = np.asarray(reference_labels).reshape(-1)
    b = np.asarray(cluster_ids).reshape(-1)
    if a.shape[0] != b.shape[0]:
        raise LengthMismatch(f"{a.shape[0]} labels but {b.shape[0]} cluster ids")
    if a.shape[0] == 0:
        raise EmptyInput("no samples")
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1, bi.max() + 1), np.int64)
    np.add.at(table, (ai, bi), 1)
    return table


def purity(reference_labels, cluster_ids):
    table = _contingency(reference_labels, cluster_ids)
    return float(table.max(axis=0).sum() / table.sum())


def _entropy(counts, n):
    p = counts[counts > 0] / n
    return float(-np.sum(p * np.log(p)))


def nmi(reference_labels, cluster_ids):
    """Mutual information over the arithmetic mean of the two entropies."""
    table = _contingency(reference_labels, cluster_ids)
    rows, cols = table.shape
    if rows == 1 and cols == 1:
        return 1.0
    if rows == 1 or cols == 1:
        return 0.0
    n = table.sum()
    a = table.sum(axis=1)
    b = table.sum(axis=0)
    i, j = np.nonzero(table)
    nij = table[i, j].astype(np.float64)
    # exact-integer products inside the log keep independent partitions at 0
    mi = float(np.sum(nij / n * np.log((nij * n) / (a[i].astype(np.float64) * b[j]))))
    mi = max(mi, 0.0)
    denom = (_entropy(a, n) + _entropy(b, n)) / 2
    return float(min(mi / denom, 1.0))


# -- binary feature / codebook files --


def _write_matrix(path, magic, m):
    m = np.asarray(m, dtype="<f4")
    if m.ndim != 2:
        raise DimMismatch("expected a 2-D matrix")
    with atomic_open(path, "wb") as fh:
        fh.write(_HEADER.pack(magic, FORMAT_VERSION, m.shape[0], m.shape[1]))
        fh.write(np.ascontiguousarray(m).tobytes())


def _read_matrix(path, magic):
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise FormatError(f"{path}: truncated header")
    got, version, n, d = _HEADER.unpack_from(blob)
    if got != magic:
        raise FormatError(f"{path}: bad magic {got!r}, expected {magic!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if d < 1:
        raise FormatError(f"{path}: dims must be >= 1")
    payload = blob[_HEADER.size:]
    if len(payload) != 4 * n * d:
        raise FormatError(f"{path}: expected {n * d} float32 values, found {len(payload) // 4}")
    return np.frombuffer(payload, dtype="<f4").reshape(n, d).astype(np.float64)


def write_features(path, x):
    _write_matrix(path, FEATURE_MAGIC, x)


def read_features(path):
    x = _read_matrix(path, FEATURE_MAGIC)
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput(f"{path}: feature file contains NaN or inf")
    return x


def write_codebook(path, cb):
    _write_matrix(path, CODEBOOK_MAGIC, cb.centroids)


def read_codebook(path):
    return Codebook(_read_matrix(path, CODEBOOK_MAGIC))
