"""Length metrics, corpus BLEU, and the synthesizer loss terms as plain functions."""
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .errors import (
    EmptyCorpus,
    EmptyInput,
    InvalidWeights,
    LengthMismatch,
    NonPositiveDuration,
    PositiveLogProb,
    ShapeMismatch,
)

DEFAULT_LC_THRESHOLDS = (5, 10, 20)
MAX_NGRAM = 4
GAN_EPS = 1e-7
LAMBDA_SYNC = 0.03
LAMBDA_GEN = 0.07


def _length_pairs(pairs):
    a = np.asarray(pairs, dtype=np.float64)
    if a.size == 0:
        raise EmptyCorpus("length corpus is empty")
    a = a.reshape(-1, 2)
    if np.any(a < 1):
        raise NonPositiveDuration("lengths must be >= 1")
    return a[:, 0], a[:, 1]


def length_ratio(pairs):
    """Mean of per-sample predicted/reference length ratios."""
    pred, ref = _length_pairs(pairs)
    return float(np.mean(pred / ref))


def length_compliance(pairs, k):
    """Percent of samples whose length is within +-k% of the reference (inclusive)."""
    pred, ref = _length_pairs(pairs)
    if k <= 0:
        raise ValueError("k must be positive")
    # |p - r| <= k/100 * r, scaled by 100 to stay in exact integer arithmetic
    ok = np.abs(pred - ref) * 100 <= k * ref
    return float(100.0 * np.count_nonzero(ok) / ok.shape[0])


# -- BLEU --


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu_stats(hypotheses, references):
    """Pooled (correct, total) n-gram counts plus (hyp_len, ref_len)."""
    if len(hypotheses) != len(references):
        raise LengthMismatch(f"{len(hypotheses)} hypotheses but {len(references)} references")
    if len(hypotheses) == 0:
        raise EmptyCorpus("BLEU needs at least one sentence")
    correct = [0] * MAX_NGRAM
    total = [0] * MAX_NGRAM
    hyp_len = ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp = list(hyp)
        ref = list(ref)
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, MAX_NGRAM + 1):
            h = _ngrams(hyp, n)
            r = _ngrams(ref, n)
            total[n - 1] += max(len(hyp) - n + 1, 0)
            correct[n - 1] += sum(min(c, r[g]) for g, c in h.items())
    return correct, total, hyp_len, ref_len


def bleu_from_stats(correct, total, hyp_len, ref_len):
    # no smoothing: a zero (or undefined) precision at any order gives 0
    if hyp_len == 0:
        return 0.0
    log_p = 0.0
    for c, t in zip(correct, total):
        if t == 0 or c == 0:
            return 0.0
        log_p += math.log(c / t)
    bp = 1.0 if hyp_len >= ref_len else math.exp(1 - ref_len / hyp_len)
    return 100.0 * bp * math.exp(log_p / len(correct))


def corpus_bleu(hypotheses, references):
    """Corpus BLEU (0-100) over pre-tokenized sentences, n-grams up to 4."""
    return bleu_from_stats(*bleu_stats(hypotheses, references))


# -- loss terms --


def sync_similarity(v, a, eps=1e-8):
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    if v.shape != a.shape or v.size == 0:
        raise ShapeMismatch(f"embedding shapes {v.shape} and {a.shape}")
    return float(np.dot(v, a) / max(np.linalg.norm(v) * np.linalg.norm(a), eps))


def sync_loss(pairs, eps=1e-8, floor=1e-6):
    """Mean of -log(similarity), with similarity clamped to [floor, 1]."""
    if not 0 < floor < 1:
        raise ValueError("floor must lie in (0, 1)")
    if len(pairs) == 0:
        raise EmptyInput("sync loss needs at least one pair")
    sims = np.array([sync_similarity(v, a, eps) for v, a in pairs])
    return float(np.mean(-np.log(np.clip(sims, floor, 1.0))))


def lip_l1(real_frames, gen_frames):
    real = np.asarray(real_frames, dtype=np.float64)
    gen = np.asarray(gen_frames, dtype=np.float64)
    if real.shape != gen.shape:
        raise ShapeMismatch(f"{real.shape} vs {gen.shape}")
    if real.ndim == 0 or real.shape[0] == 0:
        raise EmptyInput("no frames")
    per_frame = np.abs(real - gen).reshape(real.shape[0], -1).sum(axis=1)
    return float(per_frame.mean())


def gan_losses(d_on_real, d_on_gen, mode="canonical", eps=GAN_EPS):
    """Generator and discriminator losses from discriminator probabilities.

    ``as_written`` takes the discriminator objective literally, with
    log(1 - D) on both the real and generated terms. ``canonical`` uses the
    standard -[E log D(real) + E log(1 - D(gen))].
    """
    real = np.clip(np.asarray(d_on_real, dtype=np.float64).reshape(-1), eps, 1 - eps)
    gen = np.clip(np.asarray(d_on_gen, dtype=np.float64).reshape(-1), eps, 1 - eps)
    if real.size == 0 or gen.size == 0:
        raise EmptyInput("discriminator outputs are empty")
    l_g = float(np.mean(np.log1p(-gen)))
    if mode == "as_written":
        l_d = float(np.mean(np.log1p(-real)) + np.mean(np.log1p(-gen)))
    elif mode == "canonical":
        l_d = float(-(np.mean(np.log(real)) + np.mean(np.log1p(-gen))))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return l_g, l_d


def combined_loss(l_lip, l_sync, l_g, lambda_sync=LAMBDA_SYNC, lambda_gen=LAMBDA_GEN):
    if lambda_sync < 0 or lambda_gen < 0 or lambda_sync + lambda_gen >= 1:
        raise InvalidWeights(f"need lambda_sync, lambda_gen >= 0 with sum < 1, got {lambda_sync}, {lambda_gen}")
    return (1 - lambda_sync - lambda_gen) * l_lip + lambda_sync * l_sync + lambda_gen * l_g


def s2ut_nll(stepwise_target_logprobs):
    lp = np.asarray(stepwise_target_logprobs, dtype=np.float64).reshape(-1)
    if lp.size == 0:
        raise EmptyInput("no decoding steps")
    if np.any(lp > 0):
        raise PositiveLogProb(f"log-probability {float(lp[lp > 0][0])!r} is positive")
    return float(-np.sum(lp))


# -- report --


@dataclass
class EvalReport:
    lr: float
    lc: Dict[int, float] = field(default_factory=dict)
    bleu: Optional[float] = None
    repeats: Optional[int] = None

    def to_json(self):
        """Serialize with fixed decimals: 3 for lr, 2 for lc and bleu."""
        lc = ", ".join(f'"{k}": {v:.2f}' for k, v in self.lc.items())
        bleu = "null" if self.bleu is None else f"{self.bleu:.2f}"
        repeats = "null" if self.repeats is None else str(int(self.repeats))
        return f'{{"lr": {self.lr:.3f}, "lc": {{{lc}}}, "bleu": {bleu}, "repeats": {repeats}}}'


def evaluate_lengths(pairs, thresholds=DEFAULT_LC_THRESHOLDS, bleu=None, repeats=None):
    return EvalReport(
        lr=length_ratio(pairs),
        lc={int(k) if float(k).is_integer() else k: length_compliance(pairs, k) for k in thresholds},
        bleu=bleu,
        repeats=repeats,
    )


def reports_to_json(reports):
    """Serialize a {name: EvalReport} mapping with the same number formatting."""
    body = ",\n".join(f'  "{name}": {rep.to_json()}' for name, rep in reports.items())
    return "{\n" + body + "\n}"
