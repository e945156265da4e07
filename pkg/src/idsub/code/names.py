"""Identifier name rules: keyword tables, the lexical rule, subtoken splitting."""

import re
from functools import lru_cache
from importlib import resources

from ..errors import UnsupportedLanguage

LANGUAGES = ("java", "c")

IDENTIFIER_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

_SUBTOKEN_RE = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|[0-9]+")


def check_language(language):
    lang = (language or "").lower()
    if lang not in LANGUAGES:
        raise UnsupportedLanguage(f"unsupported language: {language!r}")
    return lang


@lru_cache(maxsize=None)
def _keyword_tables(language):
    text = resources.files("idsub.code").joinpath(f"data/{language}_keywords.txt").read_text()
    keywords, literals, contextual = set(), set(), set()
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line[0] == "=":
            literals.add(line[1:])
        elif line[0] == "~":
            contextual.add(line[1:])
        else:
            keywords.add(line)
    return frozenset(keywords), frozenset(literals), frozenset(contextual)


def keywords(language):
    return _keyword_tables(check_language(language))[0]


def literal_words(language):
    return _keyword_tables(check_language(language))[1]


def reserved_names(language):
    """Every name that may never be used as a rename target."""
    kw, lit, ctx = _keyword_tables(check_language(language))
    return kw | lit | ctx


def is_valid_identifier(name):
    return bool(IDENTIFIER_RE.match(name))


def split_subtokens(name):
    """Split an identifier on camelCase humps, underscores and digit runs.

    >>> split_subtokens("swapBlank")
    ['swap', 'blank']
    >>> split_subtokens("to_float4")
    ['to', 'float', '4']
    """
    if not name:
        raise ValueError("name must be non-empty")
    return [m.group(0).lower() for m in _SUBTOKEN_RE.finditer(name)]


def name_parts(name):
    """Underscore/camel parts of ``name`` with digit runs left attached."""
    parts = []
    for chunk in name.split("_"):
        parts.extend(re.findall(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+[0-9]*|[A-Z]+[0-9]*|[0-9]+", chunk))
    return parts


def has_digit_suffix(name):
    """True when some part of the name is letters followed by digits (``tmp2``, ``fooBar7``)."""
    return any(re.fullmatch(r"[A-Za-z]+[0-9]+", part) for part in name_parts(name))


def join_like(template, subtokens):
    """Render ``subtokens`` using the casing convention of ``template``."""
    if not subtokens:
        return template
    if "_" in template.strip("_"):
        upper = template.isupper()
        words = [s.upper() if upper else s for s in subtokens]
        return "_".join(words)
    if template.isupper() and len(template) > 1:
        return "_".join(s.upper() for s in subtokens)
    first = subtokens[0]
    if template[:1].isupper():
        first = first[:1].upper() + first[1:]
    return first + "".join(s[:1].upper() + s[1:] for s in subtokens[1:])
