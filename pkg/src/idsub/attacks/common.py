"""Shared attack state: configuration, results, cached evaluation, importance ranking."""

import random
from dataclasses import dataclass, field

from ..code.rename import SubstitutionMap, apply_substitution
from ..errors import BudgetExhausted, IdsubError, SubstitutionError
from ..victim.base import BudgetedVictim, is_correct, truth_score

METHODS = ("wir", "mhm", "greedy", "beam")


class OriginalMisclassified(IdsubError):
    """The victim already gets the unperturbed input wrong; nothing to attack."""


@dataclass(frozen=True)
class AttackConfig:
    method: str = "wir"
    budget: int = 2000
    seed: int = 0
    k: int = 10
    placeholder: str = "unk"
    # mhm
    epsilon: float = 1e-6
    proposals: int = 1
    max_iterations: int = 0
    # greedy + genetic
    population: int = 20
    generations: int = 10
    mutation_rate: float = 0.3
    # beam
    beam_width: int = 3
    group_by_statement: bool = True

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown attack method {self.method!r}")
        if self.budget <= 0:
            raise ValueError("budget must be positive")
        if self.beam_width < 1:
            raise ValueError("beam width must be at least 1")
        if self.population < 2:
            raise ValueError("population must be at least 2")
        if self.k < 1:
            raise ValueError("k must be at least 1")


@dataclass
class AttackResult:
    success: bool
    adversarial: object
    map: SubstitutionMap
    queries_used: int
    score_before: float
    score_after: float
    trajectory: list = field(default_factory=list)
    method: str = ""
    exhausted: bool = False

    def to_record(self):
        return {
            "success": self.success,
            "map": self.map.to_dict(),
            "queries": self.queries_used,
            "score_before": self.score_before,
            "score_after": self.score_after,
            "adv_code": self.adversarial.source,
        }


class Search:
    """One attack's view of the victim: budgeted, cached evaluation of rename maps."""

    def __init__(self, snippet, victim, truth, provider, config, other=None):
        self.snippet = snippet
        self.victim = BudgetedVictim(victim, config.budget)
        self.task = victim.task
        self.truth = truth
        self.provider = provider
        self.config = config
        self.other = other
        self.rng = random.Random(config.seed)
        self._cache = {}
        self._cands = {}
        self.baseline = None
        self.best = None  # (score, map, snippet) with the lowest truth score seen

    def _input(self, snip):
        return snip if self.other is None else (snip, self.other)

    def start(self):
        out = self.victim.query(self._input(self.snippet))
        self.baseline = truth_score(out, self.truth)
        if not is_correct(out, self.truth, self.task, self.baseline):
            raise OriginalMisclassified("victim is already wrong on the original input")
        empty = SubstitutionMap()
        self._cache[frozenset()] = (self.baseline, True, self.snippet)
        self.best = (self.baseline, empty, self.snippet)
        return self.baseline

    def render(self, smap):
        return apply_substitution(self.snippet, smap)

    def evaluate(self, smap, track=True):
        """(truth score, still-correct flag, rendered snippet) for ``smap``; cached."""
        key = frozenset(smap.items())
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        snip = self.render(smap)
        out = self.victim.query(self._input(snip))
        score = truth_score(out, self.truth)
        res = (score, is_correct(out, self.truth, self.task, self.baseline), snip)
        self._cache[key] = res
        if track and score < self.best[0]:
            self.best = (score, smap, snip)
        return res

    def candidates(self, name):
        if name not in self._cands:
            self._cands[name] = self.provider.candidates(self.snippet, name, self.config.k)
        return self._cands[name]

    def placeholder_for(self, name):
        ph = self.config.placeholder
        taken = self.snippet.identifier_names
        i = 0
        cand = ph
        while cand in taken and cand != name:
            i += 1
            cand = f"{ph}{i}"
        return cand

    def importance(self):
        """[(name, importance)] sorted by descending importance, ties by first occurrence."""
        scores = []
        for entry in self.snippet.identifiers:
            ph = self.placeholder_for(entry.name)
            if ph == entry.name:
                scores.append((entry.name, 0.0))
                continue
            masked, _, _ = self.evaluate(SubstitutionMap({entry.name: ph}), track=False)
            scores.append((entry.name, self.baseline - masked))
        # stable sort keeps first-occurrence order among equal drops
        return sorted(scores, key=lambda kv: -kv[1])

    def valid(self, smap, name, cand):
        """``cand`` can be added for ``name`` without breaking injectivity."""
        return all(v != cand for k, v in smap.items() if k != name)

    def result(self, smap, method, trajectory, exhausted=False):
        score, correct, snip = self._cache[frozenset(smap.items())]
        return AttackResult(
            success=not correct,
            adversarial=snip,
            map=smap,
            queries_used=self.victim.used,
            score_before=self.baseline,
            score_after=score,
            trajectory=trajectory,
            method=method,
            exhausted=exhausted,
        )


def run_attack(body, method, snippet, victim, truth, provider, config, other=None):
    """Drive ``body(search, trajectory) -> map`` and package an AttackResult.

    On budget exhaustion the map with the lowest truth score seen so far is
    returned, flagged ``exhausted``.
    """
    search = Search(snippet, victim, truth, provider, config, other)
    trajectory = []
    try:
        search.start()
    except BudgetExhausted:
        return AttackResult(False, snippet, SubstitutionMap(), search.victim.used,
                            float("nan"), float("nan"), [], method, True)
    try:
        smap = body(search, trajectory)
    except BudgetExhausted:
        return search.result(search.best[1], method, trajectory, exhausted=True)
    if frozenset(smap.items()) not in search._cache:
        search.evaluate(smap)
    return search.result(smap, method, trajectory)


def importance_rank(snippet, victim, truth, budget=10_000, placeholder="unk", other=None):
    """Identifiers ordered by how much masking each one lowers the truth score."""
    cfg = AttackConfig(budget=budget, placeholder=placeholder)
    search = Search(snippet, victim, truth, None, cfg, other)
    search.start()
    return [name for name, _ in search.importance()]


def safe_evaluate(search, smap):
    try:
        return search.evaluate(smap)
    except SubstitutionError:
        return None
