"""Slow, independent reference computations used to check the package."""
import itertools
import math


def brute_bleu(hyps, refs, max_n=4):
    """Corpus BLEU by positional n-gram scanning, no hashing, no smoothing."""
    correct = [0] * max_n
    total = [0] * max_n
    hyp_len = sum(len(h) for h in hyps)
    ref_len = sum(len(r) for r in refs)
    for hyp, ref in zip(hyps, refs):
        for n in range(1, max_n + 1):
            hyp_grams = [tuple(hyp[i:i + n]) for i in range(len(hyp) - n + 1)]
            ref_grams = [tuple(ref[i:i + n]) for i in range(len(ref) - n + 1)]
            total[n - 1] += len(hyp_grams)
            seen = []
            for g in hyp_grams:
                if g in seen:
                    continue
                seen.append(g)
                in_hyp = sum(1 for x in hyp_grams if x == g)
                in_ref = sum(1 for x in ref_grams if x == g)
                correct[n - 1] += min(in_hyp, in_ref)
    if hyp_len == 0 or any(t == 0 for t in total) or any(c == 0 for c in correct):
        return 0.0
    prod = 1.0
    for c, t in zip(correct, total):
        prod *= c / t
    geo = prod ** (1.0 / max_n)
    bp = 1.0 if hyp_len >= ref_len else math.exp(1 - ref_len / hyp_len)
    return 100.0 * bp * geo


def loop_nmi(labels, clusters):
    n = len(labels)
    la = sorted(set(labels))
    cl = sorted(set(clusters))
    if len(la) == 1 and len(cl) == 1:
        return 1.0
    if len(la) == 1 or len(cl) == 1:
        return 0.0
    mi = 0.0
    for a in la:
        for b in cl:
            nab = sum(1 for x, y in zip(labels, clusters) if x == a and y == b)
            if nab == 0:
                continue
            na = labels.count(a)
            nb = clusters.count(b)
            mi += nab / n * math.log(n * nab / (na * nb))
    ha = -sum(labels.count(a) / n * math.log(labels.count(a) / n) for a in la)
    hb = -sum(clusters.count(b) / n * math.log(clusters.count(b) / n) for b in cl)
    return mi / ((ha + hb) / 2)


def loop_purity(labels, clusters):
    hit = 0
    for c in set(clusters):
        members = [l for l, k in zip(labels, clusters) if k == c]
        hit += max(members.count(l) for l in set(members))
    return hit / len(labels)


def optimal_wcss(points, k):
    """Minimum within-cluster sum of squares over every assignment of points to k labels."""
    best = math.inf
    for assign in itertools.product(range(k), repeat=len(points)):
        if len(set(assign)) != k:
            continue
        cost = 0.0
        for c in range(k):
            members = [p for p, a in zip(points, assign) if a == c]
            dims = len(members[0])
            mean = [sum(m[j] for m in members) / len(members) for j in range(dims)]
            cost += sum(sum((m[j] - mean[j]) ** 2 for j in range(dims)) for m in members)
        best = min(best, cost)
    return best
