"""Victim outputs, truth scores and the query-counting victim base class."""

import threading
from dataclasses import dataclass

import numpy as np

from ..code.parser import CodeSnippet
from ..errors import BudgetExhausted, KindMismatch, MissingBaseline, VictimConfigError
from .bleu import bleu4

CLASSIFICATION = "classification"
PAIR_CLASSIFICATION = "pair-classification"
GENERATION = "generation"
TASK_KINDS = (CLASSIFICATION, PAIR_CLASSIFICATION, GENERATION)


@dataclass(frozen=True)
class VictimTask:
    kind: str = CLASSIFICATION
    theta_gen: float = 0.5

    def __post_init__(self):
        if self.kind not in TASK_KINDS:
            raise VictimConfigError(f"unknown task kind {self.kind!r}")
        if not 0 < self.theta_gen <= 1:
            raise VictimConfigError("theta_gen must be in (0, 1]")

    @property
    def arity(self):
        return 2 if self.kind == PAIR_CLASSIFICATION else 1


@dataclass(frozen=True)
class VictimOutput:
    label: int = None
    probs: tuple = None
    text: str = None

    def __post_init__(self):
        if self.probs is not None:
            p = np.asarray(self.probs, dtype=float)
            if (p < 0).any() or abs(p.sum() - 1.0) > 1e-6:
                raise ValueError(f"invalid probability vector {self.probs}")

    @classmethod
    def from_probs(cls, probs):
        probs = tuple(float(x) for x in probs)
        return cls(label=int(np.argmax(probs)), probs=probs)

    @property
    def is_generation(self):
        return self.text is not None

    def to_dict(self):
        if self.is_generation:
            return {"text": self.text}
        return {"label": self.label, "probs": list(self.probs)}


def source_of(item):
    if isinstance(item, CodeSnippet):
        return item.source
    return item


def as_sources(code):
    """Normalise a victim input into a tuple of source strings."""
    if isinstance(code, (tuple, list)):
        return tuple(source_of(c) for c in code)
    return (source_of(code),)


def truth_score(output, truth):
    """Scalar in [0, 1]: probability of the true label, or BLEU-4 against the reference."""
    if output.is_generation:
        if not isinstance(truth, str):
            raise KindMismatch("generation output needs a reference string")
        return bleu4(output.text, truth)
    if isinstance(truth, str) or truth is None:
        raise KindMismatch("classification output needs an integer label")
    return float(output.probs[int(truth)])


def is_correct(output, truth, task=None, baseline=None):
    task = task or (VictimTask(GENERATION) if output.is_generation else VictimTask())
    if task.kind == GENERATION:
        if baseline is None:
            raise MissingBaseline("generation correctness needs the unperturbed truth score")
        return truth_score(output, truth) >= task.theta_gen * baseline
    if isinstance(truth, str):
        raise KindMismatch("classification output needs an integer label")
    return int(np.argmax(output.probs)) == int(truth)


class Victim:
    """Black-box model. Subclasses implement ``_predict(sources)``."""

    task = VictimTask()

    def __init__(self):
        self._lock = threading.Lock()
        self.queries = 0

    def query(self, code):
        out = self._predict(as_sources(code))
        with self._lock:
            self.queries += 1
        return out

    def _predict(self, sources):
        raise NotImplementedError

    def reset_counter(self):
        with self._lock:
            self.queries = 0


class BudgetedVictim:
    """Wraps a victim with a hard query cap; the cap is checked before querying."""

    def __init__(self, victim, budget):
        if budget <= 0:
            raise ValueError("budget must be positive")
        self.victim = victim
        self.budget = budget
        self.used = 0
        self.task = victim.task

    @property
    def remaining(self):
        return self.budget - self.used

    def query(self, code):
        if self.used >= self.budget:
            raise BudgetExhausted(f"query budget of {self.budget} exhausted")
        out = self.victim.query(code)
        self.used += 1
        return out
