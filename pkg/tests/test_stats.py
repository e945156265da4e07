import csv
import itertools
import math
import random
from pathlib import Path

import pytest
from scipy import stats as sps

from oracles import kendall_oracle, mwu_exact_oracle, pearson_oracle, rank_oracle
from idsub.errors import ConstantInput, EmptyInput, InvalidDistribution, LengthMismatch
from idsub.stats import (
    ScoreDistribution,
    consistency,
    kendall_tau,
    mann_whitney_u,
    pearson,
    percent,
    rankdata,
    spearman,
    weighted_nes,
)

PRINTED_ROWS = Path(__file__).parent / "fixtures" / "nes_proportions.csv"


def random_vector(rng, n, distinct=False):
    if distinct:
        return rng.sample(range(-20, 20), n)
    return [rng.randint(1, 5) for _ in range(n)]


# -- weighted NES -----------------------------------------------------------------

def test_printed_example_row():
    d = ScoreDistribution((0.4536, 0.4668, 0.0544, 0.0225, 0.0027))
    assert weighted_nes(d) == pytest.approx(1.65, abs=0.005)


def test_weighted_nes_trivial_distributions():
    assert weighted_nes((0, 0, 0, 0, 1)) == 5.0
    assert weighted_nes((0.2,) * 5) == pytest.approx(3.0)


@pytest.mark.parametrize("row", list(csv.DictReader(PRINTED_ROWS.open())), ids=lambda r: f"{r['model']}-{r['task']}-{r['method']}")
def test_printed_rows(row):
    pct = [float(row[f"p{i}"]) for i in range(1, 6)]
    assert weighted_nes(ScoreDistribution.from_percentages(pct)) == pytest.approx(float(row["avg"]), abs=0.01)


def test_weighted_nes_is_linear_and_bounded():
    rng = random.Random(2)
    for _ in range(100):
        p = [rng.random() for _ in range(5)]
        q = [rng.random() for _ in range(5)]
        p, q = [x / sum(p) for x in p], [x / sum(q) for x in q]
        lam = rng.random()
        mix = [lam * a + (1 - lam) * b for a, b in zip(p, q)]
        assert weighted_nes(mix) == pytest.approx(lam * weighted_nes(p) + (1 - lam) * weighted_nes(q))
        assert 1 <= weighted_nes(p) <= 5


@pytest.mark.parametrize("bad", [(0.5, 0.5, 0.5, 0, 0), (-0.1, 1.1, 0, 0, 0), (1, 0, 0, 0)])
def test_invalid_distribution(bad):
    with pytest.raises(InvalidDistribution):
        ScoreDistribution(bad)


def test_from_scores():
    d = ScoreDistribution.from_scores([1, 1, 2, 5])
    assert d.proportions == (0.5, 0.25, 0.0, 0.0, 0.25)
    with pytest.raises(EmptyInput):
        ScoreDistribution.from_scores([])


def test_percent_rendering():
    assert percent(0.45364) == "45.36"


# -- consistency ------------------------------------------------------------------

@pytest.mark.parametrize("a,b,expected", [
    ([3, 4, 5], [3, 4, 5], (1.0, 1.0, 0.0)),
    ([1, 2, 3], [2, 3, 4], (0.0, 1.0, 1.0)),
    ([1, 5], [5, 1], (0.0, 0.0, 4.0)),
])
def test_consistency_examples(a, b, expected):
    c = consistency(a, b)
    assert (c["exact"], c["within1"], c["mad"]) == expected


def test_consistency_errors():
    with pytest.raises(LengthMismatch):
        consistency([1], [1, 2])
    with pytest.raises(EmptyInput):
        consistency([], [])


def test_consistency_invariants():
    rng = random.Random(5)
    for _ in range(200):
        n = rng.randint(1, 10)
        a, b = random_vector(rng, n), random_vector(rng, n)
        c = consistency(a, b)
        assert c["within1"] >= c["exact"]
        assert (c["mad"] == 0) == (c["exact"] == 1)


# -- correlations -----------------------------------------------------------------

def test_correlation_trivial_cases():
    x = [1, 4, 2, 8]
    assert pearson(x, x) == pytest.approx(1.0)
    assert spearman(x, x) == pytest.approx(1.0)
    assert kendall_tau(x, x) == 1.0
    assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)


def test_correlation_errors():
    with pytest.raises(ConstantInput):
        pearson([1, 1, 1], [1, 2, 3])
    with pytest.raises(ConstantInput):
        spearman([1, 2, 3], [2, 2, 2])
    with pytest.raises(ConstantInput):
        kendall_tau([1, 2], [3, 3])
    with pytest.raises(LengthMismatch):
        pearson([1, 2], [1, 2, 3])


def test_rankdata_average_ties():
    assert rankdata([10, 20, 10, 30]) == [1.5, 3.0, 1.5, 4.0]


def _random_pairs(count, seed):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n = rng.randint(2, 8)
        x, y = random_vector(rng, n, rng.random() < 0.3), random_vector(rng, n)
        if len(set(x)) > 1 and len(set(y)) > 1:
            out.append((x, y))
    return out


def test_correlations_match_brute_force_oracles():
    for x, y in _random_pairs(200, seed=13):
        assert pearson(x, y) == pytest.approx(pearson_oracle(x, y), abs=1e-9)
        assert spearman(x, y) == pytest.approx(pearson_oracle(rank_oracle(x), rank_oracle(y)), abs=1e-9)
        assert kendall_tau(x, y) == pytest.approx(kendall_oracle(x, y), abs=1e-9)


def test_correlations_agree_with_scipy():
    for x, y in _random_pairs(100, seed=14):
        assert spearman(x, y) == pytest.approx(sps.spearmanr(x, y).statistic, abs=1e-9)
        assert kendall_tau(x, y) == pytest.approx(sps.kendalltau(x, y).statistic, abs=1e-9)
        assert pearson(x, y) == pytest.approx(sps.pearsonr(x, y).statistic, abs=1e-9)


def test_spearman_rank_invariance_and_kendall_bounds():
    rng = random.Random(21)
    for x, y in _random_pairs(100, seed=15):
        shift = rng.randint(1, 9)
        tx = [v ** 3 + shift for v in x]
        ty = [math.exp(v / 5) for v in y]
        assert spearman(tx, ty) == pytest.approx(spearman(x, y), abs=1e-12)
        assert -1 <= kendall_tau(x, y) <= 1


def test_kendall_strictly_concordant_is_one():
    x = [3, 1, 4, 10, 5]
    assert kendall_tau(x, [2 * v + 1 for v in x]) == 1.0


# -- Mann-Whitney -----------------------------------------------------------------

def test_mwu_small_exact_example():
    r = mann_whitney_u([1, 2], [3, 4])
    assert r["U"] == 0 and r["method"] == "exact"
    assert r["p"] == pytest.approx(2 / 6)
    assert round(r["p"], 4) == 0.3333


def test_mwu_identical_samples_cannot_reject():
    a = [1, 2, 3, 4, 5, 2, 3]
    assert mann_whitney_u(a, list(a))["p"] > 0.05


def test_mwu_exact_matches_enumeration_for_all_small_splits():
    checked = 0
    for total in range(2, 9):
        values = list(range(1, total + 1))
        for na in range(1, total):
            for a in itertools.combinations(values, na):
                b = [v for v in values if v not in a]
                got = mann_whitney_u(list(a), b)
                u, p = mwu_exact_oracle(list(a), b)
                assert got["U"] == u and got["p"] == p
                checked += 1
    assert checked == sum(2 ** t - 2 for t in range(2, 9))


def test_mwu_exact_agrees_with_scipy():
    rng = random.Random(8)
    for _ in range(50):
        pool = rng.sample(range(100), rng.randint(2, 12))
        k = rng.randint(1, len(pool) - 1)
        a, b = pool[:k], pool[k:]
        ref = sps.mannwhitneyu(a, b, alternative="two-sided", method="exact")
        got = mann_whitney_u(a, b)
        assert got["U"] == ref.statistic and got["p"] == pytest.approx(ref.pvalue, abs=1e-12)


def test_mwu_one_sided():
    assert mann_whitney_u([1, 2], [3, 4], "less")["p"] == pytest.approx(1 / 6)
    assert mann_whitney_u([1, 2], [3, 4], "greater")["p"] == pytest.approx(1.0)


def test_mwu_tied_normal_approximation_vs_permutation():
    rng = random.Random(1234)
    a = [rng.choice([1, 1, 2, 2, 2, 3]) for _ in range(15)]
    b = [rng.choice([1, 2, 3, 3, 4, 5]) for _ in range(15)]
    got = mann_whitney_u(a, b)
    assert got["method"] == "normal"

    pooled = a + b
    mu = len(a) * len(b) / 2

    def u_of(sample_a, pool):
        ranks = rank_oracle(pool)
        return sum(ranks[: len(sample_a)]) - len(sample_a) * (len(sample_a) + 1) / 2

    obs = abs(u_of(a, pooled) - mu)
    perm = random.Random(0)
    hits = 0
    trials = 10_000
    for _ in range(trials):
        shuffled = pooled[:]
        perm.shuffle(shuffled)
        if abs(u_of(shuffled[:15], shuffled) - mu) >= obs - 1e-12:
            hits += 1
    assert got["p"] == pytest.approx(hits / trials, abs=0.01)
    ref = sps.mannwhitneyu(a, b, alternative="two-sided", method="asymptotic", use_continuity=True)
    assert got["p"] == pytest.approx(ref.pvalue, abs=1e-9)


def test_mwu_errors():
    with pytest.raises(EmptyInput):
        mann_whitney_u([], [1])
    with pytest.raises(ValueError):
        mann_whitney_u([1], [2], "sideways")
