"""Offline victims: a bag-of-subtokens logistic classifier and a few fixtures."""

import json

import numpy as np

from ..code.lexer import IDENTIFIER, LITERAL, tokenize
from ..code.names import split_subtokens
from ..code.parser import parse
from ..errors import DegenerateCorpus, VictimConfigError
from .base import CLASSIFICATION, GENERATION, PAIR_CLASSIFICATION, Victim, VictimOutput, VictimTask


def subtoken_bag(source, language):
    bag = set()
    for tok in tokenize(source, language):
        if tok.kind == IDENTIFIER:
            bag.update(split_subtokens(tok.text))
    return bag


def _softmax(z):
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


class ToyVictim(Victim):
    """Softmax regression over binary identifier-subtoken presence features."""

    def __init__(self, vocabulary, weights, bias, language="java", pair=False):
        super().__init__()
        self.vocabulary = list(vocabulary)
        self.index = {s: i for i, s in enumerate(self.vocabulary)}
        self.weights = np.asarray(weights, dtype=float)
        self.bias = np.asarray(bias, dtype=float)
        if self.weights.shape != (len(self.bias), len(self.vocabulary)):
            raise VictimConfigError("weights must be (classes, vocabulary)")
        self.language = language
        self.task = VictimTask(PAIR_CLASSIFICATION if pair else CLASSIFICATION)

    @classmethod
    def keyed(cls, keys, bias=-2.0, language="java", pair=False):
        """Binary victim whose class-1 logit is ``bias + sum(keys[s])`` over present subtokens."""
        vocab = sorted(keys)
        w = np.zeros((2, len(vocab)))
        w[1] = [keys[s] for s in vocab]
        return cls(vocab, w, [0.0, bias], language, pair)

    def features(self, sources):
        x = np.zeros(len(self.vocabulary))
        for src in sources:
            for s in subtoken_bag(src, self.language):
                i = self.index.get(s)
                if i is not None:
                    x[i] = 1.0
        return x

    def probabilities(self, sources):
        return _softmax(self.weights @ self.features(sources) + self.bias)

    def _predict(self, sources):
        return VictimOutput.from_probs(self.probabilities(sources))

    def to_dict(self):
        return {
            "vocabulary": self.vocabulary,
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
            "language": self.language,
            "pair": self.task.kind == PAIR_CLASSIFICATION,
        }

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f)

    @classmethod
    def load(cls, path):
        with open(path) as f:
            d = json.load(f)
        return cls(d["vocabulary"], d["weights"], d["bias"], d.get("language", "java"), d.get("pair", False))


def train_toy_victim(corpus, seed=0, language=None, epochs=400, lr=0.5, l2=1e-3):
    """Fit a ToyVictim on ``corpus``: iterable of (code or (code1, code2), label).

    Full-batch gradient descent from a seeded initialisation, so the same
    corpus and seed always give the same weights.
    """
    corpus = list(corpus)
    labels = sorted({int(y) for _, y in corpus})
    if len(labels) < 2:
        raise DegenerateCorpus("need at least two classes to train a victim")
    pair = isinstance(corpus[0][0], (tuple, list))
    language = language or "java"
    bags = []
    for code, _ in corpus:
        sources = code if pair else (code,)
        bag = set()
        for src in sources:
            bag |= subtoken_bag(src, language)
        bags.append(bag)
    vocab = sorted(set().union(*bags))
    index = {s: i for i, s in enumerate(vocab)}
    X = np.zeros((len(corpus), len(vocab)))
    for r, bag in enumerate(bags):
        for s in bag:
            X[r, index[s]] = 1.0
    n_classes = max(labels) + 1
    Y = np.zeros((len(corpus), n_classes))
    for r, (_, y) in enumerate(corpus):
        Y[r, int(y)] = 1.0

    rng = np.random.default_rng(seed)
    W = rng.normal(0.0, 0.01, size=(n_classes, len(vocab)))
    b = np.zeros(n_classes)
    n = len(corpus)
    for _ in range(epochs):
        P = _softmax(X @ W.T + b)
        G = (P - Y) / n
        W -= lr * (G.T @ X + l2 * W)
        b -= lr * G.sum(axis=0)
    return ToyVictim(vocab, W, b, language, pair)


class LiteralVictim(Victim):
    """Identifier-blind classifier: the label depends only on literal tokens."""

    def __init__(self, language="java", confidence=0.9):
        super().__init__()
        self.language = language
        self.confidence = confidence

    def _predict(self, sources):
        n = sum(1 for src in sources for t in tokenize(src, self.language) if t.kind == LITERAL)
        p1 = self.confidence if n % 2 else 1 - self.confidence
        return VictimOutput.from_probs([1 - p1, p1])


class ConjunctionVictim(Victim):
    """Predicts ``label`` unless every trigger subtoken is present at once.

    No proper subset of the triggers moves the output at all, so no single
    rename flips it.
    """

    def __init__(self, triggers, label=1, confidence=0.9, language="java"):
        super().__init__()
        self.triggers = set(triggers)
        self.label = label
        self.confidence = confidence
        self.language = language

    def _predict(self, sources):
        bag = set()
        for src in sources:
            bag |= subtoken_bag(src, self.language)
        hit = self.triggers <= bag
        p_label = 1 - self.confidence if hit else self.confidence
        probs = [0.0, 0.0]
        probs[self.label] = p_label
        probs[1 - self.label] = 1 - p_label
        return VictimOutput.from_probs(probs)


class ToySummarizer(Victim):
    """Generation victim: a 'summary' built from the declared identifiers' subtokens."""

    task = VictimTask(GENERATION)

    def __init__(self, language="java", max_words=8):
        super().__init__()
        self.language = language
        self.max_words = max_words

    def _predict(self, sources):
        snippet = parse(sources[0], self.language)
        words = []
        for entry in snippet.identifiers:
            words.extend(split_subtokens(entry.name))
        return VictimOutput(text=" ".join(words[: self.max_words]))
