"""Duration regulation for deduplicated unit sequences.

``bound_durations`` turns real-valued per-unit durations into integer frame
counts whose total is exactly the requested target:

1. rescale so the durations sum to the target,
2. round half away from zero, with a floor of one frame,
3. take the residual ``allocated - rounded`` per unit,
4. if the rounded total overshoots, take one frame off each of the units with
   the most negative residual; if it undershoots, add one frame to each of the
   units with the largest residual.

Ties in step 4 go to the lowest index. A decremented unit can reach zero
frames, meaning it is dropped on expansion.
"""
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

import numpy as np

from . import kernels
from ._io import atomic_open, read_lines
from .errors import (
    EmptyCorpus,
    EmptyInput,
    FormatError,
    InfeasibleAdjustment,
    LengthMismatch,
    NegativeDuration,
    NonPositiveDuration,
    NonFiniteInput,
    NonPositiveTarget,
)
from .units import as_units

MODES = ("bounded", "early_stop", "unbounded")


def _as_durations(d):
    a = np.asarray(d, dtype=np.float64)
    if a.ndim != 1:
        a = a.reshape(-1)
    return np.ascontiguousarray(a)


def _check_target(target):
    if int(target) != target or target < 1:
        raise NonPositiveTarget(f"target must be a positive integer, got {target!r}")
    return int(target)


def _check_finite(d):
    if not np.all(np.isfinite(d)):
        raise NonFiniteInput("durations must be finite")


def _check_positive(d):
    if d.shape[0] == 0:
        raise EmptyInput("duration sequence is empty")
    _check_finite(d)
    if not np.all(d > 0):
        i = int(np.flatnonzero(~(d > 0))[0])
        raise NonPositiveDuration(f"duration {d[i]!r} at index {i} is not positive")


def allocate_proportional(d, target, backend=None):
    d = _as_durations(d)
    _check_positive(d)
    target = _check_target(target)
    return kernels.get_backend(backend).normalize(d, target)


def integerize_bounded(dprime, target, backend=None):
    dp = _as_durations(dprime)
    if dp.shape[0] == 0:
        raise EmptyInput("duration sequence is empty")
    target = _check_target(target)
    _check_finite(dp)
    if not np.all(dp >= 0):
        raise NegativeDuration("allocated durations must be non-negative")
    out, status = kernels.get_backend(backend).integerize(dp, target)
    if status:
        raise InfeasibleAdjustment(
            f"needs {abs(int(out.sum()) - target)} one-frame adjustments "
            f"but only {dp.shape[0]} units exist")
    return BoundedAllocation(out, target)


def bound_durations(d, target, backend=None):
    kb = kernels.get_backend(backend)
    return integerize_bounded(allocate_proportional(d, target, backend=kb.NAME), target, backend=kb.NAME)


def early_stop(d, target, backend=None):
    """Natural rounded durations, truncated once the running total hits ``target``."""
    d = _as_durations(d)
    if d.shape[0] == 0:
        raise EmptyInput("duration sequence is empty")
    _check_finite(d)
    target = _check_target(target)
    offsets = np.array([0, d.shape[0]], np.int64)
    return kernels.get_backend(backend).early_stop_batch(d, offsets, np.array([target], np.int64))


def unbounded(d, backend=None):
    d = _as_durations(d)
    return np.maximum(kernels.get_backend(backend).round_half_up(d), 1)


@dataclass(frozen=True, eq=False)
class BoundedAllocation:
    durations: np.ndarray
    target: int

    def __post_init__(self):
        self.durations.setflags(write=False)

    def __len__(self):
        return self.durations.shape[0]

    def __iter__(self):
        return iter(self.durations.tolist())

    def tolist(self):
        return self.durations.tolist()


# -- batch regulation over ragged corpora --


def pack(seqs):
    """Flatten ragged sequences into (values, offsets)."""
    lengths = np.fromiter((len(s) for s in seqs), dtype=np.int64, count=len(seqs))
    offsets = np.zeros(len(seqs) + 1, np.int64)
    np.cumsum(lengths, out=offsets[1:])
    if len(seqs):
        values = np.concatenate([np.asarray(s, dtype=np.float64) for s in seqs])
    else:
        values = np.empty(0, np.float64)
    return np.ascontiguousarray(values), offsets


def unpack(values, offsets):
    return [values[offsets[i]:offsets[i + 1]] for i in range(offsets.shape[0] - 1)]


def _seq_error(cls, seq, msg):
    exc = cls(msg)
    exc.sequence = seq
    return exc


def regulate_batch(values, offsets, targets, mode="bounded", backend=None):
    """Regulate many sequences at once; returns flat int64 durations.

    ``targets`` is ignored in unbounded mode. Errors tied to one sequence
    carry its 0-based index as ``exc.sequence``.
    """
    kb = kernels.get_backend(backend)
    values = np.ascontiguousarray(values, dtype=np.float64)
    offsets = np.ascontiguousarray(offsets, dtype=np.int64)
    lengths = np.diff(offsets)
    if lengths.size and lengths.min() == 0:
        seq = int(np.argmin(lengths))
        raise _seq_error(EmptyInput, seq, f"sequence {seq} is empty")
    _check_finite(values)
    if mode == "unbounded":
        return np.maximum(kb.round_half_up(values), 1)
    targets = np.ascontiguousarray(targets, dtype=np.int64)
    if targets.shape[0] != lengths.shape[0]:
        raise LengthMismatch(f"{lengths.shape[0]} sequences but {targets.shape[0]} targets")
    if targets.size and targets.min() < 1:
        seq = int(np.argmin(targets))
        raise _seq_error(NonPositiveTarget, seq, f"sequence {seq} has target {int(targets.min())}")
    if mode == "early_stop":
        return kb.early_stop_batch(values, offsets, targets)
    if mode != "bounded":
        raise ValueError(f"unknown mode {mode!r}")
    if values.size and not np.all(values > 0):
        i = int(np.flatnonzero(~(values > 0))[0])
        seq = int(np.searchsorted(offsets, i, side="right") - 1)
        raise _seq_error(NonPositiveDuration, seq, f"sequence {seq} has a non-positive duration")
    out, status = kb.bound_batch(values, offsets, targets)
    if status.any():
        seq = int(np.flatnonzero(status)[0])
        raise _seq_error(InfeasibleAdjustment, seq, f"sequence {seq} needs more one-frame adjustments than it has units")
    return out


# -- table-based duration predictor --


@dataclass(frozen=True)
class DurationTable:
    mean_duration: Mapping[int, float]
    fallback: float

    def __post_init__(self):
        object.__setattr__(self, "mean_duration",
                           MappingProxyType({int(k): float(v) for k, v in self.mean_duration.items()}))

    def to_json(self):
        return {
            "mean_duration": {str(k): v for k, v in sorted(self.mean_duration.items())},
            "fallback": self.fallback,
        }

    @classmethod
    def from_json(cls, obj):
        if not isinstance(obj, dict) or set(obj) != {"mean_duration", "fallback"}:
            raise FormatError("duration table needs exactly 'mean_duration' and 'fallback'")
        try:
            means = {int(k): float(v) for k, v in obj["mean_duration"].items()}
            fallback = float(obj["fallback"])
        except (TypeError, ValueError, AttributeError) as exc:
            raise FormatError(f"bad duration table: {exc}") from None
        if fallback < 1.0 or any(v < 1.0 for v in means.values()):
            raise FormatError("duration table means must all be >= 1")
        return cls(means, fallback)


def fit_duration_table(corpus):
    if len(corpus) == 0:
        raise EmptyCorpus("cannot fit a duration table on an empty corpus")
    all_units = []
    all_durs = []
    for i, (u, d) in enumerate(corpus):
        u = as_units(u)
        d = np.asarray(d, dtype=np.int64).reshape(-1)
        if u.shape[0] != d.shape[0]:
            raise LengthMismatch(f"pair {i}: {u.shape[0]} units but {d.shape[0]} durations")
        if d.size and d.min() < 1:
            raise NonPositiveDuration(f"pair {i}: observed run lengths must be >= 1")
        all_units.append(u)
        all_durs.append(d)
    units = np.concatenate(all_units)
    durs = np.concatenate(all_durs).astype(np.float64)
    if units.size == 0:
        raise EmptyCorpus("corpus contains no units")
    keys, inverse = np.unique(units, return_inverse=True)
    sums = np.bincount(inverse, weights=durs)
    counts = np.bincount(inverse)
    return DurationTable(dict(zip(keys.tolist(), (sums / counts).tolist())), float(durs.mean()))


def predict_durations(table, u):
    u = as_units(u)
    get = table.mean_duration.get
    return np.array([get(int(x), table.fallback) for x in u], dtype=np.float64)


# -- duration text files --


def format_duration_line(values):
    a = np.asarray(values).reshape(-1)
    if np.issubdtype(a.dtype, np.integer):
        return " ".join(str(v) for v in a.tolist())
    return " ".join(repr(v) for v in a.astype(np.float64).tolist())


def parse_duration_line(line, lineno):
    if line == "":
        return np.empty(0, np.float64)
    try:
        return np.array([float(p) for p in line.split(" ")], dtype=np.float64)
    except ValueError:
        raise FormatError(f"line {lineno}: expected numbers separated by single spaces") from None


def read_duration_file(path):
    return [parse_duration_line(line, i) for i, line in enumerate(read_lines(path), 1)]


def write_duration_file(path, seqs):
    with atomic_open(path) as fh:
        for seq in seqs:
            fh.write(format_duration_line(seq) + "\n")
