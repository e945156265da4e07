"""Capture-free renaming and alpha-equivalence over parsed snippets."""

from dataclasses import dataclass
from types import MappingProxyType

from ..errors import (
    CaptureViolation,
    InvalidName,
    KeywordCollision,
    SubstitutionError,
    UnknownIdentifier,
)
from .lexer import IDENTIFIER, render
from .names import is_valid_identifier, reserved_names
from .parser import parse


class SubstitutionMap:
    """Injective old-name -> new-name mapping. Identity pairs are dropped."""

    __slots__ = ("_pairs",)

    def __init__(self, pairs=None):
        items = dict(pairs or {})
        items = {k: v for k, v in items.items() if k != v}
        if len(set(items.values())) != len(items):
            raise SubstitutionError("substitution map is not injective")
        self._pairs = MappingProxyType(items)

    @property
    def pairs(self):
        return self._pairs

    def inverse(self):
        return SubstitutionMap({v: k for k, v in self._pairs.items()})

    def restrict(self, names):
        names = set(names)
        return SubstitutionMap({k: v for k, v in self._pairs.items() if k in names})

    def with_pair(self, old, new):
        items = dict(self._pairs)
        items[old] = new
        return SubstitutionMap(items)

    def to_dict(self):
        return dict(self._pairs)

    def __getitem__(self, key):
        return self._pairs[key]

    def __contains__(self, key):
        return key in self._pairs

    def __iter__(self):
        return iter(self._pairs)

    def __len__(self):
        return len(self._pairs)

    def items(self):
        return self._pairs.items()

    def get(self, key, default=None):
        return self._pairs.get(key, default)

    def __eq__(self, other):
        if isinstance(other, SubstitutionMap):
            return dict(self._pairs) == dict(other._pairs)
        if isinstance(other, dict):
            return dict(self._pairs) == {k: v for k, v in other.items() if k != v}
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._pairs.items()))

    def __repr__(self):
        return f"SubstitutionMap({dict(self._pairs)!r})"


@dataclass(frozen=True)
class NotEquivalent:
    reason: str
    token_index: int = -1
    offset: int = -1

    def __bool__(self):
        return False


def check_substitution(snippet, smap):
    """Raise if ``smap`` cannot be applied to ``snippet`` capture-free."""
    reserved = reserved_names(snippet.language)
    for old, new in smap.items():
        if old not in snippet.identifiers:
            raise UnknownIdentifier(f"{old!r} is not a renameable identifier")
        if new in reserved:
            raise KeywordCollision(f"{new!r} is reserved in {snippet.language}")
        if not is_valid_identifier(new):
            raise InvalidName(f"{new!r} is not a valid identifier")
    taken = snippet.identifier_names - set(smap)
    for old, new in smap.items():
        if new in taken:
            raise CaptureViolation(f"renaming {old!r} to {new!r} clashes with an existing name")


def apply_substitution(snippet, smap):
    """Rename every occurrence of each mapped name; returns a new snippet."""
    if not isinstance(smap, SubstitutionMap):
        smap = SubstitutionMap(smap)
    if not len(smap):
        return snippet
    check_substitution(snippet, smap)
    replacements = {}
    for old, new in smap.items():
        for idx in snippet.identifiers[old].occurrences:
            replacements[idx] = new
    source = render(snippet.source, snippet.tokens, replacements)
    try:
        out = parse(source, snippet.language)
    except Exception as exc:
        raise CaptureViolation(f"renamed code no longer parses: {exc}") from exc
    if out.shape != snippet.shape:
        raise CaptureViolation("renaming changed the syntax tree shape")
    return out


def alpha_equivalent(a, b):
    """Return the consistent renaming a -> b, or a NotEquivalent value."""
    if a.language != b.language:
        return NotEquivalent("language differs")
    if len(a.tokens) != len(b.tokens):
        return NotEquivalent("token count differs", min(len(a.tokens), len(b.tokens)))
    renameable = set()
    for entry in a.identifiers:
        renameable.update(entry.occurrences)
    forward, backward = {}, {}
    for i, (ta, tb) in enumerate(zip(a.tokens, b.tokens)):
        if ta.kind != tb.kind:
            return NotEquivalent(f"token kind differs ({ta.kind} vs {tb.kind})", i, ta.start)
        if ta.kind != IDENTIFIER or i not in renameable:
            if ta.text != tb.text:
                what = "identifier outside the rename table" if ta.kind == IDENTIFIER else ta.kind
                return NotEquivalent(f"{what} changed: {ta.text!r} -> {tb.text!r}", i, ta.start)
            if ta.kind != IDENTIFIER:
                continue
        prev = forward.setdefault(ta.text, tb.text)
        if prev != tb.text:
            return NotEquivalent(f"{ta.text!r} renamed inconsistently", i, ta.start)
        back = backward.setdefault(tb.text, ta.text)
        if back != ta.text:
            return NotEquivalent(f"{tb.text!r} is the image of two names", i, ta.start)
    if a.shape != b.shape:
        return NotEquivalent("syntax tree shape differs")
    return SubstitutionMap(forward)
