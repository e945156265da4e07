"""One test per acceptance criterion; the terminal summary prints a PASS/FAIL line for each.

Criterion 10 talks to a real chat endpoint and only runs when
``IDSUB_LIVE_JUDGE_URL`` is set (``IDSUB_LIVE_JUDGE_MODEL`` and
``IDSUB_JUDGE_TOKEN`` are optional).
"""

import csv
import itertools
import json
import os
import random
from pathlib import Path

import httpx
import pytest

from corpora import (
    C_SNIPPETS,
    JAVA_SNIPPETS,
    XOR_CANDIDATES,
    cross_class_synonyms,
    literal_labeled,
    random_valid_map,
    synthetic_corpus,
    xor_records,
)
from oracles import (
    codebleu_oracle,
    cosine_oracle,
    edit_oracle,
    exhaustive_scores,
    kendall_oracle,
    mwu_exact_oracle,
    pearson_oracle,
    rank_oracle,
    texts,
)
from idsub.attacks import (
    AttackConfig,
    CandidateProvider,
    FixedProvider,
    attack_beam,
    attack_greedy,
    attack_greedy_genetic,
)
from idsub.attacks.candidates import SYNONYM
from idsub.code import SubstitutionMap, alpha_equivalent, apply_substitution, parse
from idsub.corpus import iter_jsonl
from idsub.errors import ScoreOutOfRange
from idsub.judge import (
    PAIR,
    ChatClient,
    JudgeConfig,
    MapPurifier,
    MockJudge,
    build_eval_prompt,
    build_purify_prompt,
    detect,
    digit_suffix_rule,
    judge,
    parse_verdict,
    purify,
)
from idsub.metrics import NgramModel, acs, aed, codebleu_simplified, icr, tcr
from idsub.pipeline import (
    StageReport,
    defense_harness,
    export_instructions,
    generate_corpus,
    misclassification_harness,
)
from idsub.stats import ScoreDistribution, kendall_tau, mann_whitney_u, pearson, spearman, weighted_nes
from idsub.victim import ConjunctionVictim, LiteralVictim, ToyVictim, is_correct, train_toy_victim

HERE = Path(__file__).parent
FIX = HERE / "fixtures"
GOLDEN = HERE / "golden"
SNIPPETS = [(s, "java") for s in JAVA_SNIPPETS] + [(s, "c") for s in C_SNIPPETS]


@pytest.fixture(scope="module")
def toy_setup():
    corpus = synthetic_corpus(50, "java")
    victim = train_toy_victim([(r.code, r.label) for r in corpus], seed=0, language="java")
    provider = CandidateProvider((SYNONYM,), synonyms=cross_class_synonyms(), seed=0)
    return corpus, victim, provider


# -- 1 -------------------------------------------------------------------------------

@pytest.mark.acceptance(1, "weighted NES reproduces all 36 printed averages within 0.01")
def test_criterion_1_weighted_nes_table():
    rows = list(csv.DictReader((FIX / "nes_proportions.csv").open()))
    assert len(rows) == 36
    worst = 0.0
    for row in rows:
        dist = ScoreDistribution.from_percentages([float(row[f"p{i}"]) for i in range(1, 6)])
        worst = max(worst, abs(weighted_nes(dist) - float(row["avg"])))
    assert worst <= 0.01


# -- 2 -------------------------------------------------------------------------------

@pytest.mark.acceptance(2, "1000 random renamings are alpha-equivalent and invert byte-identically")
def test_criterion_2_alpha_equivalence_oracle():
    rng = random.Random(2024)
    parsed = [parse(src, lang) for src, lang in SNIPPETS]
    langs = set()
    for _ in range(1000):
        snip = rng.choice(parsed)
        langs.add(snip.language)
        smap = SubstitutionMap(random_valid_map(snip, rng))
        out = apply_substitution(snip, smap)
        assert alpha_equivalent(snip, out) == smap
        assert apply_substitution(out, smap.inverse()).source.encode() == snip.source.encode()
    assert langs == {"java", "c"}


# -- 3 -------------------------------------------------------------------------------

TWO_NAMES = "int left(int right) { return right * 2; }"


@pytest.mark.acceptance(3, "attacks: valid outputs, >=80% WIR/MHM success, 0% when blind, exhaustive beam optimal")
def test_criterion_3_attack_correctness(toy_setup):
    corpus, victim, provider = toy_setup

    # (a) and (b): attackable fixture
    for method in ("wir", "mhm"):
        report = StageReport()
        records = list(generate_corpus(corpus, {"toy": victim}, [AttackConfig(method, budget=500, seed=0)],
                                       provider, report=report))
        assert report.counts["attempted"] == 50
        assert len(records) / 50 >= 0.8, f"{method}: {len(records)}/50"
        for rec in records:
            adv = parse(rec.adversarial, "java")
            assert alpha_equivalent(parse(rec.original, "java"), adv) == rec.map
            assert not is_correct(victim.query(rec.adversarial), rec.truth)

    # (b): identifier-blind fixture
    blind = LiteralVictim("java")
    blind_corpus = literal_labeled(corpus, blind)
    for method in ("wir", "mhm"):
        records = list(generate_corpus(blind_corpus, {"blind": blind}, [AttackConfig(method, budget=500)], provider))
        assert records == []

    # (c): exhaustive beam against brute force on two-identifier fixtures
    rng = random.Random(7)
    snip = parse(TWO_NAMES, "c")
    assert len(snip.identifiers.names()) == 2
    flips = 0
    for _ in range(30):
        table = {"left": rng.sample(["up", "down", "east"], 3), "right": rng.sample(["north", "south", "west"], 3)}
        weights = {w: rng.uniform(-2.5, 0.5) for w in ["up", "down", "east", "north", "south", "west"]}
        victim2 = ToyVictim.keyed(weights, bias=rng.uniform(0.5, 3.0), language="c")
        scores = exhaustive_scores(snip, victim2, 1, table)
        best = min(scores, key=scores.get)
        cfg = AttackConfig("beam", budget=10_000, beam_width=16, k=3)
        res = attack_beam(snip, victim2, 1, FixedProvider(table), cfg)
        if scores[best] < 0.5:
            flips += 1
            assert res.success and scores[frozenset(res.map.items())] < 0.5
        else:
            assert not res.success and res.map == dict(best)
            assert res.score_after == pytest.approx(scores[best])
    assert 0 < flips < 30


# -- 4 -------------------------------------------------------------------------------

@pytest.mark.acceptance(4, "XOR victim: greedy 0%, greedy+genetic 100%, confirmed by enumeration")
def test_criterion_4_genetic_necessity():
    victim = ConjunctionVictim({"alpha", "beta"}, label=1)
    provider = FixedProvider(XOR_CANDIDATES)
    greedy_hits = genetic_hits = 0
    records = xor_records(10)
    for rec in records:
        snip = parse(rec.code, "java")
        scores = exhaustive_scores(snip, victim, 1, XOR_CANDIDATES)
        flipping = [dict(k) for k, s in scores.items() if s < 0.5]
        assert flipping == [{"a": "alpha", "b": "beta"}]
        assert not [k for k, s in scores.items() if s < 0.5 and len(k) < 2]
        cfg = AttackConfig("greedy", budget=500, seed=1)
        greedy_hits += attack_greedy(snip, victim, 1, provider, cfg).success
        full = attack_greedy_genetic(snip, victim, 1, provider, cfg)
        genetic_hits += full.success
        assert not full.success or any(full.map == f for f in flipping)
    assert greedy_hits == 0 and genetic_hits == len(records)


# -- 5 -------------------------------------------------------------------------------

@pytest.mark.acceptance(5, "metrics match brute-force recomputation; uniform PPL equals V")
def test_criterion_5_metrics_oracles():
    rng = random.Random(55)
    for _ in range(100):
        src, lang = rng.choice(SNIPPETS)
        a = parse(src, lang)
        smap = random_valid_map(a, rng)
        b = apply_substitution(a, smap)
        ta, tb = texts(a), texts(b)
        names = a.identifiers.names()
        assert icr(a, smap) == sum(n in smap for n in names) / len(names)
        assert tcr(a, b) == sum(x != y for x, y in zip(ta, tb)) / len(ta)
        assert abs(acs(a, b) - cosine_oracle(ta, tb)) <= 1e-9
        raw, norm = aed(a, b)
        assert raw == edit_oracle(ta, tb) and norm == raw / max(len(ta), len(tb))
        assert abs(codebleu_simplified(a, b) - codebleu_oracle(a, b)) <= 1e-9
    vocab = {f"w{i}" for i in range(9)}
    model = NgramModel.uniform(vocab)
    assert abs(model.perplexity(["w1", "w3", "zz", "w1"]) - model.V) <= 1e-9


# -- 6 -------------------------------------------------------------------------------

@pytest.mark.acceptance(6, "correlations and exact Mann-Whitney match brute-force oracles")
def test_criterion_6_statistics_oracles():
    rng = random.Random(66)
    checked = 0
    while checked < 200:
        n = rng.randint(2, 8)
        x = [rng.randint(1, 5) for _ in range(n)]
        y = [rng.randint(1, 5) for _ in range(n)]
        if len(set(x)) < 2 or len(set(y)) < 2:
            continue
        assert abs(pearson(x, y) - pearson_oracle(x, y)) <= 1e-9
        assert abs(spearman(x, y) - pearson_oracle(rank_oracle(x), rank_oracle(y))) <= 1e-9
        assert abs(kendall_tau(x, y) - kendall_oracle(x, y)) <= 1e-9
        checked += 1
    for total in range(2, 9):
        values = list(range(1, total + 1))
        for na in range(1, total):
            for a in itertools.combinations(values, na):
                b = [v for v in values if v not in a]
                got = mann_whitney_u(list(a), b)
                assert (got["U"], got["p"]) == mwu_exact_oracle(list(a), b)
    assert round(mann_whitney_u([1, 2], [3, 4])["p"], 4) == 0.3333


# -- 7 -------------------------------------------------------------------------------

def _plant(code, lang):
    snip = parse(code, lang)
    name = snip.identifiers.names()[-1]
    return apply_substitution(snip, {name: name + "7"}).source


@pytest.mark.acceptance(7, "offline judge: delta=2 flags all planted and no clean samples; rates monotone")
def test_criterion_7_offline_judge_pipeline(monkeypatch):
    def no_network(*args, **kwargs):
        raise AssertionError("network access attempted")

    monkeypatch.setattr(httpx.Client, "send", no_network)
    for lang in ("java", "c"):
        client = MockJudge(digit_suffix_rule(), language=lang)
        clean = [r.code for r in synthetic_corpus(20, lang, seed=70)]
        planted = [_plant(code, lang) for code in clean]
        assert all(detect(code, client, threshold=2)["flagged"] for code in planted)
        assert not any(detect(code, client, threshold=2)["flagged"] for code in clean)

        samples = [(f"c{i}", code, lang, "clean") for i, code in enumerate(clean)]
        samples += [(f"p{i}", code, lang, "mixed") for i, code in enumerate(planted[:7])]
        samples += [(f"q{i}", code, lang, "mixed") for i, code in enumerate(clean[7:])]
        table = misclassification_harness(samples, client, JudgeConfig())
        for group in table.values():
            rates = [group["rates"][str(d)] for d in (1, 2, 3, 4)]
            assert rates == sorted(rates)
        assert table["clean"]["rates"]["2"] == 0.0
        assert table["mixed"]["rates"]["2"] == pytest.approx(7 / 20)


# -- 8 -------------------------------------------------------------------------------

@pytest.mark.acceptance(8, "defense round trip: inverse purifier 1.0, identity 0.0, exports re-validate")
def test_criterion_8_defense_round_trip(toy_setup, tmp_path):
    corpus, victim, provider = toy_setup
    victims = {"toy": victim}
    records = list(generate_corpus(corpus, victims, [AttackConfig("wir", budget=500, seed=0)], provider))
    assert records

    inverse = MockJudge(purifier=MapPurifier((r.adversarial, r.original) for r in records))
    defended, table = defense_harness(records, inverse, JudgeConfig(), victims)
    assert table["overall"]["rate"] == 1.0

    out = tmp_path / "instructions_purify.jsonl"
    counts = export_instructions(defended, "purify", out, victims)
    assert counts["included"] == len(records)
    truth = {r.adversarial: r.truth for r in records}
    for row in iter_jsonl(out):
        adv, pur = parse(row["input"], "java"), parse(row["output"], "java")
        assert alpha_equivalent(adv, pur)
        assert is_correct(victim.query(row["output"]), truth[row["input"]])

    fresh = list(generate_corpus(corpus, victims, [AttackConfig("wir", budget=500, seed=0)], provider))
    _, identity = defense_harness(fresh, MockJudge(), JudgeConfig(), victims)
    assert identity["overall"]["rate"] == 0.0


# -- 9 -------------------------------------------------------------------------------

@pytest.mark.acceptance(9, "prompts byte-match golden templates; verdict score 2 accepted, 7 rejected")
def test_criterion_9_golden_prompts():
    original = (FIX / "swap_original.java").read_text()
    adversarial = (FIX / "swap_adversarial.java").read_text()
    system, _ = build_eval_prompt(PAIR, original, adversarial)
    assert system.encode("utf-8") == (GOLDEN / "eval_pair_system.txt").read_bytes()
    system, user = build_purify_prompt(adversarial)
    assert system.encode("utf-8") == (GOLDEN / "purify_system.txt").read_bytes()
    assert user == adversarial
    verdict = parse_verdict(json.dumps({"Analysis": "swapBlace reads as a typo of swapBlank.", "Score": 2}))
    assert verdict.score == 2
    with pytest.raises(ScoreOutOfRange):
        parse_verdict(json.dumps({"Analysis": "x", "Score": 7}))


# -- 10 ------------------------------------------------------------------------------

LIVE_URL = os.environ.get("IDSUB_LIVE_JUDGE_URL")


def _live_fixtures():
    rng = random.Random(10)
    ugly = ["v1", "tmp9", "xq", "zz3", "aa"]
    out = [parse((FIX / "swap_adversarial.java").read_text(), "java")]
    for src in JAVA_SNIPPETS[1:5]:
        snip = parse(src, "java")
        names = snip.identifiers.names()
        picks = rng.sample(names, min(2, len(names)))
        out.append(apply_substitution(snip, dict(zip(picks, ugly))))
    return out


@pytest.mark.live
@pytest.mark.acceptance(10, "live endpoint: verdict in 1..5 on the example pair, >=1 of 5 purifications valid")
@pytest.mark.skipif(not LIVE_URL, reason="IDSUB_LIVE_JUDGE_URL is not set")
def test_criterion_10_live_endpoint():
    cfg = JudgeConfig(url=LIVE_URL, model=os.environ.get("IDSUB_LIVE_JUDGE_MODEL", JudgeConfig.model))
    client = ChatClient(cfg)
    try:
        original = (FIX / "swap_original.java").read_text()
        adversarial = (FIX / "swap_adversarial.java").read_text()
        verdict = judge(adversarial, original, client, cfg)
        assert 1 <= verdict.score <= 5
        validated = sum(purify(snip, client, cfg).validated for snip in _live_fixtures())
        assert validated >= 1
    finally:
        client.close()
