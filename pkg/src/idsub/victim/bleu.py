"""Sentence-level BLEU-4 over whitespace tokens."""

import math
from collections import Counter


def _ngrams(tokens, n):
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(candidate, reference, max_n=4, smooth=False):
    """BLEU with uniform weights over 1..max_n grams and the usual brevity penalty.

    ``candidate`` and ``reference`` are token lists. Orders for which the
    candidate has no n-grams at all (it is shorter than n) are left out and the
    weights renormalised, so identical short sentences still score 1.
    With ``smooth`` a zero match count is replaced by 0.1 (epsilon smoothing).
    """
    if not candidate or not reference:
        return 0.0
    log_sum = 0.0
    orders = 0
    for n in range(1, max_n + 1):
        cand = _ngrams(candidate, n)
        total = sum(cand.values())
        if total == 0:
            break
        ref = _ngrams(reference, n)
        matched = sum(min(c, ref[g]) for g, c in cand.items())
        if matched == 0:
            if not smooth:
                return 0.0
            matched = 0.1
        log_sum += math.log(matched / total)
        orders += 1
    c, r = len(candidate), len(reference)
    bp = 1.0 if c > r else math.exp(1 - r / c)
    return bp * math.exp(log_sum / orders)


def bleu4(candidate, reference, smooth=False):
    """BLEU-4 of two strings, tokenised on whitespace. Result is in [0, 1]."""
    return bleu(candidate.split(), reference.split(), 4, smooth)
