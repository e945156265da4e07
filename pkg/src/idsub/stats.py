"""NES summaries, agreement rates, correlation coefficients and the Mann-Whitney U test."""

import math
from dataclasses import dataclass

from .errors import ConstantInput, EmptyInput, InvalidDistribution, LengthMismatch

SCORES = (1, 2, 3, 4, 5)
EXACT_MAX_N = 12


@dataclass(frozen=True)
class ScoreDistribution:
    """Fractions of verdicts at NES 1..5."""

    proportions: tuple

    def __post_init__(self):
        p = tuple(float(x) for x in self.proportions)
        if len(p) != 5 or any(x < 0 for x in p) or abs(sum(p) - 1.0) > 1e-9:
            raise InvalidDistribution(f"not a distribution over 1..5: {self.proportions}")
        object.__setattr__(self, "proportions", p)

    @classmethod
    def from_percentages(cls, row):
        """Build from a printed percentage row; renormalises rounding drift."""
        total = sum(row)
        if total <= 0:
            raise InvalidDistribution("percentages sum to zero")
        return cls(tuple(x / total for x in row))

    @classmethod
    def from_scores(cls, scores):
        scores = list(scores)
        if not scores:
            raise EmptyInput("no scores")
        return cls(tuple(scores.count(s) / len(scores) for s in SCORES))


def weighted_nes(dist):
    if not isinstance(dist, ScoreDistribution):
        dist = ScoreDistribution(tuple(dist))
    return sum(s * p for s, p in zip(SCORES, dist.proportions))


def _check_pair(a, b, minimum=1):
    a, b = list(a), list(b)
    if len(a) != len(b):
        raise LengthMismatch(f"lengths differ: {len(a)} vs {len(b)}")
    if len(a) < minimum:
        raise EmptyInput(f"need at least {minimum} paired values")
    return a, b


def consistency(a, b):
    """Exact-match rate, within-one rate and mean absolute difference."""
    a, b = _check_pair(a, b)
    n = len(a)
    diffs = [abs(x - y) for x, y in zip(a, b)]
    return {
        "exact": sum(d == 0 for d in diffs) / n,
        "within1": sum(d <= 1 for d in diffs) / n,
        "mad": sum(diffs) / n,
    }


def rankdata(values):
    """1-based ranks, ties get the average of the ranks they span."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def pearson(x, y):
    x, y = _check_pair(x, y, 2)
    n = len(x)
    mx, my = sum(x) / n, sum(y) / n
    dx = [v - mx for v in x]
    dy = [v - my for v in y]
    sxx = sum(v * v for v in dx)
    syy = sum(v * v for v in dy)
    if sxx == 0 or syy == 0:
        raise ConstantInput("correlation is undefined for constant input")
    r = sum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def spearman(x, y):
    x, y = _check_pair(x, y, 2)
    return pearson(rankdata(x), rankdata(y))


def _count_swaps(seq):
    """Inversions in ``seq`` via merge sort; returns (sorted, swaps)."""
    if len(seq) <= 1:
        return list(seq), 0
    mid = len(seq) // 2
    left, sl = _count_swaps(seq[:mid])
    right, sr = _count_swaps(seq[mid:])
    merged = []
    swaps = sl + sr
    i = j = 0
    while i < len(left) and j < len(right):
        if right[j] < left[i]:
            merged.append(right[j])
            swaps += len(left) - i
            j += 1
        else:
            merged.append(left[i])
            i += 1
    merged.extend(left[i:])
    merged.extend(right[j:])
    return merged, swaps


def _tied_pairs(sorted_values):
    total = 0
    run = 1
    for prev, cur in zip(sorted_values, sorted_values[1:]):
        if cur == prev:
            run += 1
        else:
            total += run * (run - 1) // 2
            run = 1
    return total + run * (run - 1) // 2


def kendall_tau(x, y):
    """Kendall tau-b (Knight's O(n log n) algorithm)."""
    x, y = _check_pair(x, y, 2)
    n = len(x)
    pairs = sorted(zip(x, y))
    n0 = n * (n - 1) // 2
    n1 = _tied_pairs([p[0] for p in pairs])
    n3 = _tied_pairs(pairs)
    ys, swaps = _count_swaps([p[1] for p in pairs])
    n2 = _tied_pairs(ys)
    denom = math.sqrt((n0 - n1) * (n0 - n2))
    if denom == 0:
        raise ConstantInput("tau-b is undefined when either input is constant")
    tau = (n0 - n1 - n2 + n3 - 2 * swaps) / denom
    return max(-1.0, min(1.0, tau))


def _u_distribution(na, nb):
    """Counts of each U value over all C(na+nb, na) rank splits (no ties)."""
    # f[m][n] is a list indexed by U; recurrence on whether the largest value is from a or b
    memo = {}

    def f(m, n):
        if m == 0 or n == 0:
            return [1]
        key = (m, n)
        if key not in memo:
            a = f(m - 1, n)  # largest from a: adds n to U
            b = f(m, n - 1)
            out = [0] * (m * n + 1)
            for u, c in enumerate(a):
                out[u + n] += c
            for u, c in enumerate(b):
                out[u] += c
            memo[key] = out
        return memo[key]

    return f(na, nb)


def mann_whitney_u(a, b, alternative="two-sided"):
    """U statistic of ``a`` and its p-value.

    Exact when the pooled sample has at most 12 values and no ties, otherwise
    the normal approximation with tie-corrected variance and continuity
    correction.
    """
    a, b = list(a), list(b)
    if not a or not b:
        raise EmptyInput("both samples must be non-empty")
    if alternative not in ("two-sided", "less", "greater"):
        raise ValueError(f"unknown alternative {alternative!r}")
    na, nb = len(a), len(b)
    pooled = a + b
    ranks = rankdata(pooled)
    u = sum(ranks[:na]) - na * (na + 1) / 2
    ties = len(set(pooled)) != len(pooled)
    if na + nb <= EXACT_MAX_N and not ties:
        dist = _u_distribution(na, nb)
        total = sum(dist)
        ui = int(round(u))
        p_le = sum(dist[: ui + 1]) / total
        p_ge = sum(dist[ui:]) / total
        if alternative == "less":
            p = p_le
        elif alternative == "greater":
            p = p_ge
        else:
            p = min(1.0, 2 * min(p_le, p_ge))
        return {"U": u, "p": p, "method": "exact"}
    n = na + nb
    mu = na * nb / 2
    tie_term = 0.0
    for v in set(pooled):
        t = pooled.count(v)
        tie_term += t ** 3 - t
    var = na * nb / 12 * ((n + 1) - tie_term / (n * (n - 1)))
    if var <= 0:
        return {"U": u, "p": 1.0, "method": "normal"}
    sd = math.sqrt(var)
    if alternative == "two-sided":
        z = (abs(u - mu) - 0.5) / sd
        p = math.erfc(max(z, 0.0) / math.sqrt(2))
    elif alternative == "greater":
        z = (u - mu - 0.5) / sd
        p = 0.5 * math.erfc(z / math.sqrt(2))
    else:
        z = (u - mu + 0.5) / sd
        p = 0.5 * math.erfc(-z / math.sqrt(2))
    return {"U": u, "p": min(1.0, p), "method": "normal"}


def percent(x):
    """Render a fraction as a two-decimal percentage string."""
    return f"{100 * x:.2f}"
