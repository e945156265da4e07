"""Deterministic offline stand-ins for the judge / purifier endpoint."""

import json

from ..code.names import has_digit_suffix
from ..code.parser import parse
from ..code.rename import NotEquivalent, alpha_equivalent
from ..errors import CodeModelError, TransportError
from .prompts import eval_instruction, purify_instruction


def constant_rule(score, analysis="constant verdict"):
    def rule(code, original, language):
        return score, analysis
    return rule


def marker_rule(marker, hit_score=1, miss_score=4):
    """Score ``hit_score`` whenever ``marker`` occurs as an identifier."""
    def rule(code, original, language):
        snip = parse(code, language)
        if marker in snip.identifier_names:
            return hit_score, f"identifier {marker} is meaningless"
        return miss_score, "identifier names look natural"
    return rule


def digit_suffix_rule(hit_score=1, miss_score=4):
    """Score 1 iff a renamed identifier (pair mode) or any declared one (single mode)
    has a part made of letters followed by digits."""
    def rule(code, original, language):
        snip = parse(code, language)
        if original is not None:
            smap = alpha_equivalent(parse(original, language), snip)
            names = [] if isinstance(smap, NotEquivalent) else list(smap.pairs.values())
        else:
            names = snip.identifiers.names()
        bad = [n for n in names if has_digit_suffix(n)]
        if bad:
            return hit_score, f"identifiers {', '.join(bad)} carry meaningless numeric suffixes"
        return miss_score, "identifier names are consistent with their roles"
    return rule


def identity_purifier(code, language):
    return code


class MapPurifier:
    """Returns the known original for each adversarial source; identity otherwise."""

    def __init__(self, pairs=()):
        self.table = dict(pairs)

    def add(self, adversarial, original):
        self.table[adversarial] = original

    def __call__(self, code, language):
        return self.table.get(code, code)


class MockJudge:
    """Answers eval prompts through ``rule`` and purify prompts through ``purifier``."""

    def __init__(self, rule=None, purifier=identity_purifier, language="java"):
        self.rule = rule or constant_rule(3)
        self.purifier = purifier
        self.language = language
        self.calls = 0

    def complete(self, system, user):
        self.calls += 1
        if system == purify_instruction():
            return self.purifier(user, self.language)
        if system == eval_instruction("pair"):
            payload = json.loads(user)
            code, original = payload["Adversarial code"], payload["Original code"]
        elif system == eval_instruction("single"):
            code, original = json.loads(user)["Code"], None
        else:
            raise ValueError("mock judge received an unknown system prompt")
        try:
            score, analysis = self.rule(code, original, self.language)
        except CodeModelError as exc:
            score, analysis = 1, f"code does not parse: {exc}"
        return json.dumps({"Analysis": analysis, "Score": score})


class ScriptedClient:
    """Replays a list of responses; ``Exception`` instances in the list are raised."""

    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = 0

    def complete(self, system, user):
        item = self.responses[min(self.calls, len(self.responses) - 1)]
        self.calls += 1
        if isinstance(item, BaseException):
            raise item
        if callable(item):
            return item(system, user)
        return item


class DownClient:
    def complete(self, system, user):
        raise TransportError("endpoint unavailable")
