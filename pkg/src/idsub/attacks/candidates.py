"""Substitute-name generators for identifier renaming attacks."""

import random
import string

from ..code.names import is_valid_identifier, join_like, reserved_names, split_subtokens

SUBWORD = "subword-mutation"
SYNONYM = "synonym-table"
HARVEST = "corpus-harvest"

# Small neighbourhood table of programming vocabulary. Symmetric lookups are
# built below, so each group only needs listing once.
_SYNONYM_GROUPS = [
    ["copy", "clone", "duplicate", "create"],
    ["blank", "empty", "space", "gap"],
    ["total", "sum", "amount", "acc"],
    ["count", "num", "cnt", "size", "length"],
    ["index", "idx", "pos", "position", "offset"],
    ["result", "res", "ret", "output", "out"],
    ["value", "val", "data", "item"],
    ["list", "array", "arr", "items", "elements"],
    ["str", "string", "text", "s"],
    ["temp", "tmp", "buf", "buffer"],
    ["max", "maximum", "upper", "high"],
    ["min", "minimum", "lower", "low"],
    ["start", "begin", "first", "head"],
    ["end", "finish", "last", "tail"],
    ["get", "fetch", "read", "load"],
    ["set", "put", "write", "store"],
    ["swap", "exchange", "switch", "flip"],
    ["sort", "order", "arrange", "rank"],
    ["file", "path", "doc", "stream"],
    ["key", "name", "id", "label"],
    ["node", "vertex", "elem", "entry"],
    ["board", "grid", "matrix", "table"],
    ["float", "real", "decimal", "double"],
    ["bytes", "octets", "chunk", "block"],
    ["calc", "compute", "calculate", "eval"],
    ["check", "test", "verify", "validate"],
    ["line", "row", "record", "entry"],
    ["col", "column", "field", "cell"],
    ["flag", "mark", "ok", "done"],
    ["input", "in", "src", "source"],
    ["i", "j", "k", "n"],
]

DEFAULT_SYNONYMS = {}
for _group in _SYNONYM_GROUPS:
    for _w in _group:
        DEFAULT_SYNONYMS.setdefault(_w, [])
        DEFAULT_SYNONYMS[_w].extend(x for x in _group if x != _w and x not in DEFAULT_SYNONYMS[_w])


def _char_mutations(word, letters="aceilnorstu"):
    """One-letter edits at the tail of a word (``blank`` -> ``blace``-style)."""
    if len(word) < 3 or not word.isalpha():
        return []
    out = []
    for c in letters:
        if c != word[-1]:
            out.append(word[:-1] + c)
        if len(word) > 3 and c != word[-2]:
            out.append(word[:-2] + c + word[-1])
    return out


class CandidateProvider:
    """Per-identifier candidate lists, deterministic for a given seed.

    ``strategies`` picks among subword mutation, the synonym table and names
    harvested from a corpus (see :meth:`harvest`). Every candidate is a valid,
    non-reserved identifier that differs from the original and does not
    already occur in the snippet.
    """

    def __init__(self, strategies=(SUBWORD, SYNONYM, HARVEST), synonyms=None, seed=0):
        self.strategies = tuple(strategies)
        self.synonyms = DEFAULT_SYNONYMS if synonyms is None else synonyms
        self.seed = seed
        self.harvested = {}

    def harvest(self, snippets):
        for snip in snippets:
            for entry in snip.identifiers:
                self.harvested.setdefault(entry.kind, set()).add(entry.name)
        return self

    def pool(self, snippet, name):
        subs = split_subtokens(name)
        pool = set()
        if SYNONYM in self.strategies:
            for i, s in enumerate(subs):
                for alt in self.synonyms.get(s, ()):
                    pool.add(join_like(name, subs[:i] + [alt] + subs[i + 1:]))
        if SUBWORD in self.strategies:
            for i, s in enumerate(subs):
                for alt in _char_mutations(s):
                    pool.add(join_like(name, subs[:i] + [alt] + subs[i + 1:]))
        if HARVEST in self.strategies:
            entry = snippet.identifiers.get(name)
            kind = entry.kind if entry else None
            pool.update(self.harvested.get(kind, ()))
        return self._filter(snippet, name, pool)

    def _filter(self, snippet, name, pool):
        reserved = reserved_names(snippet.language)
        taken = snippet.identifier_names
        return sorted(
            c for c in pool
            if c != name and is_valid_identifier(c) and c not in reserved and c not in taken
        )

    def candidates(self, snippet, name, k):
        pool = self.pool(snippet, name)
        if len(pool) > k:
            rng = random.Random(f"{self.seed}:{name}")
            pool = sorted(rng.sample(pool, k))
        return pool


class FixedProvider(CandidateProvider):
    """Candidate lists given explicitly per name (fixtures and scripted attacks)."""

    def __init__(self, table, default=()):
        super().__init__(strategies=())
        self.table = {k: list(v) for k, v in table.items()}
        self.default = list(default)

    def pool(self, snippet, name):
        return self._filter(snippet, name, self.table.get(name, self.default))


class RandomNameProvider(CandidateProvider):
    """Random lowercase names, the classic MHM vocabulary sampler."""

    def __init__(self, length=(3, 8), size=64, seed=0):
        super().__init__(strategies=(), seed=seed)
        self.length = length
        self.size = size

    def pool(self, snippet, name):
        rng = random.Random(f"{self.seed}:rand:{name}")
        names = set()
        for _ in range(self.size):
            n = rng.randint(*self.length)
            names.add(rng.choice(string.ascii_lowercase) + "".join(
                rng.choice(string.ascii_lowercase + string.digits) for _ in range(n - 1)))
        return self._filter(snippet, name, names)
