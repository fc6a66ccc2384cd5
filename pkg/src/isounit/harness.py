"""Synthetic corpora, length-regulation comparisons, and a reference regulator.

``reference_bound`` is a deliberately plain re-derivation of the bounded
regulator (lists, ``decimal`` rounding, ``sorted``) used as a fuzz oracle
for the optimized kernels in :mod:`isounit.lengthreg`.
"""
import json
from dataclasses import asdict, dataclass, fields
from decimal import ROUND_HALF_UP, Decimal
from typing import List, Optional, Tuple

import numpy as np

from . import lengthreg
from .kernels import numpy_backend
from .errors import InfeasibleAdjustment, InvalidSpec, IsoUnitError
from .metrics import DEFAULT_LC_THRESHOLDS, corpus_bleu, evaluate_lengths
from .units import expand

MIN_GEOMETRIC_P = 0.05


@dataclass(frozen=True)
class SyntheticSpec:
    n_sequences: int = 1000
    vocab_size: int = 1000
    mean_length: float = 20.0
    geometric_p: float = 0.4
    jitter_percent: float = 0.0
    # systematic offset applied to every target, e.g. -5 for targets 5% short
    target_shift_percent: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.n_sequences < 1:
            raise InvalidSpec("n_sequences must be >= 1")
        if self.vocab_size < 2:
            raise InvalidSpec("vocab_size must be >= 2 so adjacent units can differ")
        if not self.mean_length >= 1:
            raise InvalidSpec("mean_length must be >= 1")
        if not MIN_GEOMETRIC_P <= self.geometric_p <= 1:
            raise InvalidSpec(f"geometric_p must lie in [{MIN_GEOMETRIC_P}, 1]")
        if not 0 <= self.jitter_percent < 100:
            raise InvalidSpec("jitter_percent must lie in [0, 100)")
        if not -100 < self.target_shift_percent < 100:
            raise InvalidSpec("target_shift_percent must lie in (-100, 100)")
        if self.seed < 0:
            raise InvalidSpec("seed must be non-negative")

    @classmethod
    def from_mapping(cls, obj):
        if not isinstance(obj, dict):
            raise InvalidSpec("spec must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(obj) - known)
        if unknown:
            raise InvalidSpec(f"unknown spec keys: {', '.join(unknown)}")
        return cls(**obj)

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)


Corpus = List[Tuple[np.ndarray, np.ndarray, int]]


def generate_corpus(spec: SyntheticSpec) -> Corpus:
    """Random (units, run lengths, target length) triples, deterministic in ``spec.seed``."""
    rng = np.random.default_rng(spec.seed)
    n = spec.n_sequences
    lengths = 1 + rng.poisson(spec.mean_length - 1, size=n)
    total = int(lengths.sum())
    first = rng.integers(0, spec.vocab_size, size=n)
    # non-zero steps mod K keep neighbours distinct
    steps = rng.integers(1, spec.vocab_size, size=total)
    durations = rng.geometric(spec.geometric_p, size=total).astype(np.int64)
    if spec.jitter_percent > 0:
        jitter = rng.uniform(-spec.jitter_percent, spec.jitter_percent, size=n)
    else:
        jitter = np.zeros(n)
    scale = 1 + (spec.target_shift_percent + jitter) / 100
    starts = np.concatenate(([0], np.cumsum(lengths)[:-1]))
    natural = np.add.reduceat(durations, starts)
    targets = np.maximum(numpy_backend.round_half_up(natural * scale), 1)

    corpus = []
    pos = 0
    for i in range(n):
        m = int(lengths[i])
        st = steps[pos:pos + m].copy()
        st[0] = first[i]
        units = np.cumsum(st) % spec.vocab_size
        corpus.append((units.astype(np.int64), durations[pos:pos + m].copy(), int(targets[i])))
        pos += m
    return corpus


def compare_modes(corpus, modes=lengthreg.MODES, thresholds=DEFAULT_LC_THRESHOLDS,
                     table=None, with_bleu=False, backend=None):
    """Regulate every sequence under each mode and score lengths against targets.

    Predicted durations are the corpus run lengths, or ``table`` predictions
    when a :class:`~isounit.lengthreg.DurationTable` is given. ``repeats``
    counts reused reference frames under wrap-around allocation.
    """
    if len(corpus) == 0:
        raise IsoUnitError("corpus is empty")
    if table is None:
        predicted = [d for _, d, _ in corpus]
    else:
        predicted = [lengthreg.predict_durations(table, u) for u, _, _ in corpus]
    values, offsets = lengthreg.pack(predicted)
    targets = np.array([t for _, _, t in corpus], dtype=np.int64)
    reports = {}
    for mode in modes:
        realized = lengthreg.regulate_batch(values, offsets, targets, mode, backend)
        out_len = np.add.reduceat(realized, offsets[:-1]) if realized.size else np.zeros(0, np.int64)
        if mode == "bounded" and not np.array_equal(out_len, targets):
            bad = int(np.flatnonzero(out_len != targets)[0])
            raise AssertionError(f"bounded regulation missed the target on sequence {bad}")
        n_video = -(-out_len // 2)
        n_ref = -(-targets // 2)
        repeats = int(np.maximum(n_video - n_ref, 0).sum())
        bleu = None
        if with_bleu:
            hyps = [expand(u, r).units.tolist()
                    for (u, _, _), r in zip(corpus, lengthreg.unpack(realized, offsets))]
            refs = [expand(u, d).units.tolist() for u, d, _ in corpus]
            bleu = corpus_bleu(hyps, refs)
        pairs = np.stack([out_len, targets], axis=1)
        reports[mode] = evaluate_lengths(pairs, thresholds, bleu=bleu, repeats=repeats)
    return reports


run_table3_style = compare_modes


# -- reference regulator and cross-checks --


def _round_half_up(x):
    return int(Decimal(x).quantize(Decimal(1), rounding=ROUND_HALF_UP))


def reference_bound(d, target, normalize=True):
    """Straight-line bounded regulation: rescale, round, clamp, adjust by residual."""
    d = [float(v) for v in d]
    n = len(d)
    if normalize:
        total = 0.0
        for v in d:
            total += v
        alloc = [v * target / total for v in d]
    else:
        alloc = d
    pred = [max(_round_half_up(v), 1) for v in alloc]
    diff = [a - p for a, p in zip(alloc, pred)]
    gap = sum(pred) - target
    if gap == 0:
        return pred
    if abs(gap) > n:
        raise InfeasibleAdjustment(f"{abs(gap)} adjustments for {n} units")
    if gap > 0:
        order = sorted(range(n), key=lambda i: (diff[i], i))
        step = -1
    else:
        order = sorted(range(n), key=lambda i: (-diff[i], i))
        step = 1
    for i in order[:abs(gap)]:
        pred[i] += step
    return pred


@dataclass
class CheckResult:
    passed: bool
    expected: Optional[list] = None
    got: Optional[list] = None
    first_divergence: Optional[int] = None
    message: str = ""


def oracle_bound_check(d, target, normalize=True, backend=None):
    """Compare the kernel regulator with :func:`reference_bound` elementwise."""
    try:
        expected = reference_bound(d, target, normalize)
    except InfeasibleAdjustment as exc:
        expected = exc
    try:
        if normalize:
            got = lengthreg.bound_durations(d, target, backend=backend).tolist()
        else:
            got = lengthreg.integerize_bounded(d, target, backend=backend).tolist()
    except InfeasibleAdjustment as exc:
        got = exc
    if isinstance(expected, Exception) or isinstance(got, Exception):
        same = type(expected) is type(got)
        return CheckResult(same, None if same else repr(expected), None if same else repr(got),
                           message="" if same else "only one side raised")
    for i, (e, g) in enumerate(zip(expected, got)):
        if e != g:
            return CheckResult(False, expected, got, i, f"index {i}: expected {e}, got {g}")
    if len(expected) != len(got):
        return CheckResult(False, expected, got, min(len(expected), len(got)), "length differs")
    return CheckResult(True, expected, got)


def fuzz_instances(count, seed=0, max_units=64, max_target=512):
    """Yield (durations, target, kind) cases mixing continuous values, integers and ties."""
    rng = np.random.default_rng(seed)
    kinds = ("uniform", "integer", "equal", "lognormal", "tiny_target")
    for i in range(count):
        kind = kinds[i % len(kinds)]
        n = int(rng.integers(1, max_units + 1))
        target = int(rng.integers(1, max_target + 1))
        if kind == "uniform":
            d = rng.uniform(0.01, 10.0, size=n)
        elif kind == "integer":
            d = rng.integers(1, 11, size=n).astype(np.float64)
        elif kind == "equal":
            d = np.full(n, float(rng.integers(1, 6)))
        elif kind == "lognormal":
            d = rng.lognormal(0.5, 1.0, size=n)
        else:
            target = int(rng.integers(1, n + 1))
            d = rng.uniform(0.5, 3.0, size=n)
        yield d, target, kind


@dataclass
class FuzzSummary:
    instances: int = 0
    divergences: int = 0
    sum_failures: int = 0
    stability_failures: int = 0
    proportionality_failures: int = 0
    scale_failures: int = 0
    first_failure: Optional[str] = None

    @property
    def ok(self):
        return not (self.divergences or self.sum_failures or self.stability_failures
                    or self.proportionality_failures or self.scale_failures)


def fuzz_bound(count=10_000, seed=0, max_units=64, max_target=512, backend=None):
    """Oracle equivalence plus regulator invariants on random instances."""
    summary = FuzzSummary()
    rng = np.random.default_rng(seed + 1)

    def fail(field_name, text):
        setattr(summary, field_name, getattr(summary, field_name) + 1)
        if summary.first_failure is None:
            summary.first_failure = text

    for d, target, kind in fuzz_instances(count, seed, max_units, max_target):
        summary.instances += 1
        check = oracle_bound_check(d, target, backend=backend)
        if not check.passed:
            fail("divergences", f"{kind} T={target}: {check.message}")
            continue
        out = np.asarray(check.got)
        alloc = lengthreg.allocate_proportional(d, target, backend=backend)
        pred = np.maximum([_round_half_up(v) for v in alloc], 1)
        if int(out.sum()) != target:
            fail("sum_failures", f"{kind} T={target}: sum {int(out.sum())}")
        if np.any(np.abs(out - pred) > 1) or np.any(out < 0):
            fail("stability_failures", f"{kind} T={target}: moved more than one frame")
        if np.any(np.abs(out - alloc) > 2):
            fail("proportionality_failures", f"{kind} T={target}: off by more than 2 frames")
        # powers of two rescale exactly in binary floating point
        c = 2.0 ** int(rng.integers(-20, 21))
        scaled = lengthreg.bound_durations(d * c, target, backend=backend).durations
        if not np.array_equal(scaled, out):
            fail("scale_failures", f"{kind} T={target}: scale {c} changed the result")
    return summary
