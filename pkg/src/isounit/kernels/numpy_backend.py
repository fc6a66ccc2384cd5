"""Pure-numpy kernels.

Arithmetic order matches the numba loops exactly (sequential sums over
sequence elements and feature dims), so both backends are bit-identical.
"""
import numpy as np

NAME = "numpy"

# Row chunk for distance evaluation; bounds the (rows, K) scratch array.
_ASSIGN_CHUNK = 4096


def run_lengths(z):
    n = z.shape[0]
    if n == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    starts = np.flatnonzero(np.concatenate(([True], z[1:] != z[:-1])))
    ends = np.append(starts[1:], n)
    return z[starts].astype(np.int64), (ends - starts).astype(np.int64)


def expand_runs(units, durations):
    return np.repeat(units, durations).astype(np.int64)


def round_half_up(x):
    # x - floor(x) is exact for x >= 0, so the .5 comparison is exact too
    fl = np.floor(x)
    return (fl + (x - fl >= 0.5)).astype(np.int64)


def seq_sum(x):
    if x.shape[0] == 0:
        return 0.0
    return float(np.add.accumulate(x)[-1])


def integerize(dprime, target):
    n = dprime.shape[0]
    pred = np.maximum(round_half_up(dprime), 1)
    diff = dprime - pred
    total = int(pred.sum())
    if total > target:
        k = total - target
        if k > n:
            return pred, 1
        idx = np.argsort(diff, kind="stable")[:k]
        pred[idx] -= 1
    elif total < target:
        k = target - total
        if k > n:
            return pred, 1
        idx = np.argsort(-diff, kind="stable")[:k]
        pred[idx] += 1
    return pred, 0


def normalize(d, target):
    return d * target / seq_sum(d)


def bound_batch(values, offsets, targets):
    out = np.empty(values.shape[0], np.int64)
    status = np.zeros(targets.shape[0], np.int64)
    for s in range(targets.shape[0]):
        lo, hi = offsets[s], offsets[s + 1]
        res, st = integerize(normalize(values[lo:hi], targets[s]), targets[s])
        out[lo:hi] = res
        status[s] = st
    return out, status


def early_stop_batch(values, offsets, targets):
    natural = np.maximum(round_half_up(values), 1)
    out = np.empty_like(natural)
    for s in range(targets.shape[0]):
        lo, hi = offsets[s], offsets[s + 1]
        seg = natural[lo:hi]
        before = np.concatenate(([0], np.cumsum(seg)[:-1]))
        room = np.maximum(targets[s] - before, 0)
        out[lo:hi] = np.minimum(seg, room)
    return out


def assign_nearest(x, centroids):
    n, d = x.shape
    labels = np.empty(n, np.int64)
    dist = np.empty(n, np.float64)
    for lo in range(0, n, _ASSIGN_CHUNK):
        xs = x[lo:lo + _ASSIGN_CHUNK]
        acc = np.zeros((xs.shape[0], centroids.shape[0]))
        for j in range(d):
            t = xs[:, j, None] - centroids[None, :, j]
            acc += t * t
        lab = np.argmin(acc, axis=1)
        labels[lo:lo + xs.shape[0]] = lab
        dist[lo:lo + xs.shape[0]] = acc[np.arange(xs.shape[0]), lab]
    return labels, dist


def centroid_sums(x, labels, k):
    sums = np.zeros((k, x.shape[1]))
    # np.add.at is unbuffered and applies rows in index order
    np.add.at(sums, labels, x)
    counts = np.bincount(labels, minlength=k).astype(np.int64)
    return sums, counts
