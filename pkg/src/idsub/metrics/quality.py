"""Adversarial-quality metrics: ICR, TCR, ACS, AED and a simplified CodeBLEU."""

import math
from collections import Counter
from dataclasses import asdict, dataclass

from ..code.lexer import COMMENT, KEYWORD
from ..code.parser import CodeSnippet
from ..code.rename import SubstitutionMap
from ..errors import EmptyInput, LengthMismatch, NoIdentifiers, ParseRequired

KEYWORD_WEIGHT = 5.0
AST_DEPTH = 3


def texts(snippet):
    """Token texts of a parsed snippet; plain sequences pass through."""
    if isinstance(snippet, CodeSnippet):
        return [t.text for t in snippet.tokens]
    return list(snippet)


def icr(original, smap):
    """Share of the snippet's renameable identifiers that the map renames."""
    names = original.identifiers.names()
    if not names:
        raise NoIdentifiers("snippet has no renameable identifiers")
    if not isinstance(smap, SubstitutionMap):
        smap = SubstitutionMap(smap)
    renamed = sum(1 for n in names if n in smap)
    return renamed / len(names)


def tcr(original, adversarial):
    a, b = texts(original), texts(adversarial)
    if len(a) != len(b):
        raise LengthMismatch(f"token counts differ: {len(a)} vs {len(b)}")
    if not a:
        return 0.0
    return sum(x != y for x, y in zip(a, b)) / len(a)


def acs(original, adversarial):
    """Cosine similarity of token-frequency vectors."""
    ca, cb = Counter(texts(original)), Counter(texts(adversarial))
    if not ca or not cb:
        raise EmptyInput("code similarity needs non-empty token sequences")
    dot = sum(v * cb[t] for t, v in ca.items())
    na = math.sqrt(sum(v * v for v in ca.values()))
    nb = math.sqrt(sum(v * v for v in cb.values()))
    return dot / (na * nb)


def levenshtein(a, b):
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i]
        for j, y in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


def aed(original, adversarial):
    """(raw token-level edit distance, distance / longer length)."""
    a, b = texts(original), texts(adversarial)
    raw = levenshtein(a, b)
    longest = max(len(a), len(b))
    return raw, (raw / longest if longest else 0.0)


# -- simplified CodeBLEU ------------------------------------------------------

def _ngrams(seq, n):
    return Counter(tuple(seq[i:i + n]) for i in range(len(seq) - n + 1))


def _bleu_tokens(hyp, ref, keywords=None, max_n=4):
    """BLEU-4 over token lists; with ``keywords`` the unigram counts are weighted."""
    if not hyp or not ref:
        return 0.0
    logs = []
    for n in range(1, max_n + 1):
        h = _ngrams(hyp, n)
        if not h:
            break
        r = _ngrams(ref, n)
        if n == 1 and keywords is not None:
            w = {g: (KEYWORD_WEIGHT if g[0] in keywords else 1.0) for g in h}
            matched = sum(w[g] * min(c, r[g]) for g, c in h.items())
            total = sum(w[g] * c for g, c in h.items())
        else:
            matched = sum(min(c, r[g]) for g, c in h.items())
            total = sum(h.values())
        if matched == 0:
            return 0.0
        logs.append(math.log(matched / total))
    bp = 1.0 if len(hyp) > len(ref) else math.exp(1 - len(ref) / len(hyp))
    return bp * math.exp(sum(logs) / len(logs))


def _shape(node, depth):
    if depth <= 1:
        return (node.type,)
    return (node.type, tuple(_shape(c, depth - 1) for c in node.named_children))


def subtree_shapes(snippet, depth=AST_DEPTH):
    shapes = Counter()
    stack = [snippet.tree.root_node]
    while stack:
        node = stack.pop()
        shapes[_shape(node, depth)] += 1
        stack.extend(node.named_children)
    return shapes


def ast_match(original, adversarial, depth=AST_DEPTH):
    ref = subtree_shapes(original, depth)
    hyp = subtree_shapes(adversarial, depth)
    total = sum(ref.values())
    return sum(min(c, hyp[s]) for s, c in ref.items()) / total if total else 1.0


def codebleu_components(original, adversarial):
    if not isinstance(original, CodeSnippet) or not isinstance(adversarial, CodeSnippet):
        raise ParseRequired("codebleu needs parsed snippets")
    ref = [t.text for t in original.tokens if t.kind != COMMENT]
    hyp = [t.text for t in adversarial.tokens if t.kind != COMMENT]
    kws = {t.text for t in original.tokens if t.kind == KEYWORD} | {
        t.text for t in adversarial.tokens if t.kind == KEYWORD}
    return {
        "bleu": _bleu_tokens(hyp, ref),
        "weighted_bleu": _bleu_tokens(hyp, ref, kws),
        "ast_match": ast_match(original, adversarial),
    }


def codebleu_simplified(original, adversarial):
    """Equal-weight mean of BLEU-4, keyword-weighted BLEU-4 and depth-3 subtree match."""
    c = codebleu_components(original, adversarial)
    return (c["bleu"] + c["weighted_bleu"] + c["ast_match"]) / 3


# -- reports ------------------------------------------------------------------

@dataclass
class MetricsReport:
    icr: float
    tcr: float
    acs: float
    aed_raw: float
    aed_normalized: float
    ppl: float
    codebleu: float

    def to_dict(self):
        return asdict(self)


def pair_metrics(original, adversarial, smap=None, ngram=None):
    from ..code.rename import alpha_equivalent
    from .ngram import perplexity

    if smap is None:
        smap = alpha_equivalent(original, adversarial) or SubstitutionMap()
    raw, norm = aed(original, adversarial)
    return MetricsReport(
        icr=icr(original, smap),
        tcr=tcr(original, adversarial),
        acs=acs(original, adversarial),
        aed_raw=raw,
        aed_normalized=norm,
        ppl=perplexity(ngram, adversarial) if ngram is not None else float("nan"),
        codebleu=codebleu_simplified(original, adversarial),
    )


def mean_report(reports):
    reports = list(reports)
    if not reports:
        raise EmptyInput("no reports to average")
    fields = MetricsReport.__dataclass_fields__
    return MetricsReport(**{f: sum(getattr(r, f) for r in reports) / len(reports) for f in fields})
