"""Loop kernels compiled with numba.

Importing this module raises ImportError when numba is missing.
"""
import numpy as np
from numba import njit

NAME = "numba"


@njit(cache=True, nogil=True)
def run_lengths(z):
    n = z.shape[0]
    units = np.empty(n, np.int64)
    durs = np.empty(n, np.int64)
    if n == 0:
        return units, durs
    m = 0
    units[0] = z[0]
    durs[0] = 1
    for i in range(1, n):
        if z[i] == units[m]:
            durs[m] += 1
        else:
            m += 1
            units[m] = z[i]
            durs[m] = 1
    return units[:m + 1].copy(), durs[:m + 1].copy()


@njit(cache=True, nogil=True)
def expand_runs(units, durations):
    total = 0
    for i in range(durations.shape[0]):
        total += durations[i]
    out = np.empty(total, np.int64)
    pos = 0
    for i in range(units.shape[0]):
        for _ in range(durations[i]):
            out[pos] = units[i]
            pos += 1
    return out


@njit(cache=True, nogil=True)
def _round1(v):
    fl = np.floor(v)
    r = np.int64(fl)
    if v - fl >= 0.5:
        r += 1
    return r


@njit(cache=True, nogil=True)
def round_half_up(x):
    out = np.empty(x.shape[0], np.int64)
    for i in range(x.shape[0]):
        out[i] = _round1(x[i])
    return out


@njit(cache=True, nogil=True)
def seq_sum(x):
    s = 0.0
    for i in range(x.shape[0]):
        s += x[i]
    return s


@njit(cache=True, nogil=True)
def integerize(dprime, target):
    n = dprime.shape[0]
    pred = np.empty(n, np.int64)
    diff = np.empty(n, np.float64)
    total = 0
    for i in range(n):
        p = _round1(dprime[i])
        if p < 1:
            p = 1
        pred[i] = p
        diff[i] = dprime[i] - p
        total += p
    if total > target:
        k = total - target
        if k > n:
            return pred, 1
        order = np.argsort(diff, kind="mergesort")
        for j in range(k):
            pred[order[j]] -= 1
    elif total < target:
        k = target - total
        if k > n:
            return pred, 1
        order = np.argsort(-diff, kind="mergesort")
        for j in range(k):
            pred[order[j]] += 1
    return pred, 0


@njit(cache=True, nogil=True)
def normalize(d, target):
    total = seq_sum(d)
    out = np.empty(d.shape[0], np.float64)
    for i in range(d.shape[0]):
        out[i] = d[i] * target / total
    return out


@njit(cache=True, nogil=True)
def bound_batch(values, offsets, targets):
    out = np.empty(values.shape[0], np.int64)
    status = np.zeros(targets.shape[0], np.int64)
    for s in range(targets.shape[0]):
        lo = offsets[s]
        hi = offsets[s + 1]
        res, st = integerize(normalize(values[lo:hi], targets[s]), targets[s])
        out[lo:hi] = res
        status[s] = st
    return out, status


@njit(cache=True, nogil=True)
def early_stop_batch(values, offsets, targets):
    out = np.empty(values.shape[0], np.int64)
    for s in range(targets.shape[0]):
        used = 0
        for i in range(offsets[s], offsets[s + 1]):
            nat = _round1(values[i])
            if nat < 1:
                nat = 1
            room = targets[s] - used
            if room < 0:
                room = 0
            take = nat if nat < room else room
            out[i] = take
            used += nat
    return out


@njit(cache=True, nogil=True)
def assign_nearest(x, centroids):
    n, d = x.shape
    k = centroids.shape[0]
    labels = np.empty(n, np.int64)
    dist = np.empty(n, np.float64)
    for i in range(n):
        best = np.inf
        arg = 0
        for c in range(k):
            acc = 0.0
            for j in range(d):
                t = x[i, j] - centroids[c, j]
                acc += t * t
            if acc < best:
                best = acc
                arg = c
        labels[i] = arg
        dist[i] = best
    return labels, dist


@njit(cache=True, nogil=True)
def centroid_sums(x, labels, k):
    n, d = x.shape
    sums = np.zeros((k, d))
    counts = np.zeros(k, np.int64)
    for i in range(n):
        c = labels[i]
        counts[c] += 1
        for j in range(d):
            sums[c, j] += x[i, j]
    return sums, counts
