"""Add-k smoothed n-gram model over code subtoken streams, for perplexity."""

import math
from collections import Counter, defaultdict

from ..code.lexer import COMMENT, IDENTIFIER
from ..code.names import split_subtokens
from ..errors import EmptyStream

BOS = "<s>"
UNK = "<unk>"


def subtoken_stream(snippet):
    """Non-comment token texts with identifiers split into lowercase subtokens."""
    out = []
    for tok in snippet.tokens:
        if tok.kind == COMMENT:
            continue
        if tok.kind == IDENTIFIER:
            out.extend(split_subtokens(tok.text))
        else:
            out.append(tok.text)
    return out


class NgramModel:
    """P(w | ctx) = (c(ctx, w) + k) / (c(ctx) + k * V), V including ``<unk>``."""

    def __init__(self, order=3, k=1.0, vocabulary=()):
        if order < 1:
            raise ValueError("order must be >= 1")
        self.order = order
        self.k = k
        self.vocabulary = frozenset(vocabulary) | {UNK}
        self.counts = defaultdict(Counter)
        self.context_totals = Counter()

    @classmethod
    def train(cls, streams, order=3, k=1.0):
        streams = [list(s) for s in streams]
        model = cls(order, k, {w for s in streams for w in s})
        for s in streams:
            for ctx, w in model._events(s):
                model.counts[ctx][w] += 1
                model.context_totals[ctx] += 1
        return model

    @classmethod
    def uniform(cls, vocabulary):
        """Untrained unigram model: every in-vocabulary token has probability 1/V."""
        return cls(order=1, k=1.0, vocabulary=vocabulary)

    @property
    def V(self):
        return len(self.vocabulary)

    def _events(self, stream):
        pad = [BOS] * (self.order - 1)
        seq = pad + [w if w in self.vocabulary else UNK for w in stream]
        for i in range(self.order - 1, len(seq)):
            yield tuple(seq[i - self.order + 1:i]), seq[i]

    def prob(self, word, context=()):
        ctx = tuple(context)[-(self.order - 1):] if self.order > 1 else ()
        if word not in self.vocabulary:
            word = UNK
        num = self.counts[ctx][word] + self.k if ctx in self.counts else self.k
        den = self.context_totals[ctx] + self.k * self.V
        return num / den

    def perplexity(self, stream):
        stream = list(stream)
        if not stream:
            raise EmptyStream("cannot score an empty token stream")
        total = 0.0
        for ctx, w in self._events(stream):
            total += math.log(self.prob(w, ctx))
        return math.exp(-total / len(stream))


def train_ngram(snippets, order=3, k=1.0):
    return NgramModel.train((subtoken_stream(s) for s in snippets), order, k)


def perplexity(model, snippet):
    return model.perplexity(subtoken_stream(snippet))
