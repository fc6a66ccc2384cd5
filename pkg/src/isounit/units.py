"""Frame-level and deduplicated unit sequences.

A continuous sequence holds one unit id per 20 ms frame. Collapsing it
removes adjacent repeats and keeps each run's length as an integer duration;
expanding reverses that. Zero durations are allowed in ``expand`` and drop
the unit entirely, which is how the bounded regulator discards a unit.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._io import atomic_open, read_lines
from .errors import FormatError, LengthMismatch, NegativeDuration, UnitOutOfRange

DEFAULT_FRAME_MS = 20


def _frozen(a):
    a = np.array(a, dtype=np.int64).reshape(-1)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ContinuousUnitSeq:
    units: np.ndarray
    frame_ms: int = DEFAULT_FRAME_MS

    def __post_init__(self):
        object.__setattr__(self, "units", _frozen(self.units))

    def __len__(self):
        return self.units.shape[0]

    def __eq__(self, other):
        if not isinstance(other, ContinuousUnitSeq):
            return NotImplemented
        return self.frame_ms == other.frame_ms and np.array_equal(self.units, other.units)

    __hash__ = None


def as_units(z):
    """Coerce a ContinuousUnitSeq or any integer sequence to an int64 array."""
    if isinstance(z, ContinuousUnitSeq):
        return z.units
    a = np.asarray(z)
    if a.size == 0:
        return np.empty(0, np.int64)
    if a.ndim != 1:
        raise FormatError(f"unit sequence must be 1-D, got shape {a.shape}")
    if not np.issubdtype(a.dtype, np.integer):
        if not np.all(np.equal(np.mod(a, 1), 0)):
            raise FormatError("unit ids must be integers")
    return np.ascontiguousarray(a, dtype=np.int64)


def collapse(z, backend=None):
    """Split a frame-level sequence into (deduplicated units, run lengths)."""
    kb = kernels.get_backend(backend)
    return kb.run_lengths(as_units(z))


def expand(units, durations, backend=None, frame_ms=DEFAULT_FRAME_MS):
    """Repeat ``units[i]`` exactly ``durations[i]`` times."""
    u = as_units(units)
    d = np.asarray(durations)
    if d.size == 0:
        d = np.empty(0, np.int64)
    if u.shape[0] != d.shape[0]:
        raise LengthMismatch(f"{u.shape[0]} units but {d.shape[0]} durations")
    if d.size and not np.all(np.equal(np.mod(d, 1), 0)):
        raise FormatError("realized durations must be integers")
    d = np.ascontiguousarray(d, dtype=np.int64)
    if d.size and d.min() < 0:
        raise NegativeDuration(f"duration {int(d.min())} at index {int(np.argmin(d))}")
    kb = kernels.get_backend(backend)
    return ContinuousUnitSeq(kb.expand_runs(u, d), frame_ms)


def has_adjacent_repeats(units):
    u = as_units(units)
    return bool(u.shape[0] > 1 and np.any(u[1:] == u[:-1]))


def check_vocab(units, vocab_size):
    u = as_units(units)
    bad = u < 0
    if vocab_size is not None:
        bad |= u >= vocab_size
    if bad.any():
        limit = f"[0, {vocab_size})" if vocab_size is not None else ">= 0"
        raise UnitOutOfRange(f"unit id {int(u[bad][0])} outside {limit}")


# -- unit text files: one sequence per line, ids separated by single spaces --


def parse_int_line(line, lineno):
    if line == "":
        return np.empty(0, np.int64)
    parts = line.split(" ")
    try:
        return np.array([int(p) for p in parts], dtype=np.int64)
    except ValueError:
        raise FormatError(f"line {lineno}: expected integers separated by single spaces") from None


def read_unit_file(path, vocab_size=None):
    seqs = []
    for lineno, line in enumerate(read_lines(path), 1):
        seq = parse_int_line(line, lineno)
        try:
            check_vocab(seq, vocab_size)
        except UnitOutOfRange as exc:
            raise UnitOutOfRange(f"line {lineno}: {exc}") from None
        seqs.append(seq)
    return seqs


def format_int_line(seq):
    return " ".join(str(int(v)) for v in as_units(seq))


def write_unit_file(path, seqs):
    with atomic_open(path) as fh:
        for seq in seqs:
            fh.write(format_int_line(seq) + "\n")
