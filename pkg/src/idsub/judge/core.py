"""judge / purify / detect on top of any client exposing ``complete(system, user)``."""

import re
from dataclasses import dataclass, field

from ..code.parser import CodeSnippet, parse
from ..code.rename import NotEquivalent, SubstitutionMap, alpha_equivalent
from ..errors import CodeModelError, ScoreOutOfRange, Unparseable
from .client import JudgeConfig
from .prompts import PAIR, SINGLE, build_eval_prompt, build_purify_prompt
from .verdict import parse_verdict

_FENCE = re.compile(r"^\s*```[\w+-]*\s*\n(.*?)\n?```\s*$", re.DOTALL)


def judge(code, original, client, config=None, audit=None, record_id=None, details=None):
    """One naturalness verdict. Pair mode when ``original`` is given, single otherwise."""
    config = config or JudgeConfig()
    mode = PAIR if original is not None else SINGLE
    system, user = build_eval_prompt(mode, original, code, config.max_input_tokens)
    last = None
    for _ in range(config.max_retries + 1):
        raw = client.complete(system, user)
        try:
            verdict = parse_verdict(raw)
        except (Unparseable, ScoreOutOfRange) as exc:
            last = exc
            if audit is not None:
                audit.write(record_id, system, user, raw, None)
            continue
        if audit is not None:
            audit.write(record_id, system, user, raw, verdict.to_dict())
        if details is not None:
            details["raw"] = raw
        return verdict
    raise last


def detect(code, client, config=None, threshold=2, audit=None, record_id=None):
    """Flag ``code`` as attacked when its single-snippet NES is at most ``threshold``."""
    if threshold not in (1, 2, 3, 4):
        raise ValueError("threshold must be one of 1, 2, 3, 4")
    verdict = judge(code, None, client, config, audit, record_id)
    return {"flagged": verdict.score <= threshold, "verdict": verdict}


@dataclass
class PurificationResult:
    purified: CodeSnippet
    map: SubstitutionMap
    validated: bool
    attempts: int
    raw: list = field(default_factory=list)
    reason: str = ""


def strip_fences(text):
    m = _FENCE.match(text)
    return m.group(1) if m else text


def validate_purification(adversarial, text):
    """(snippet, recovered map, reason); map is None when invalid."""
    try:
        purified = parse(text, adversarial.language)
    except CodeModelError as exc:
        return None, None, f"does not parse: {exc}"
    smap = alpha_equivalent(adversarial, purified)
    if isinstance(smap, NotEquivalent):
        return purified, None, f"not an identifier-only rewrite: {smap.reason}"
    return purified, smap, ""


def purify(adversarial, client, config=None, attempts=None):
    """Ask the purifier for natural names; accept only identifier-only rewrites that parse."""
    config = config or JudgeConfig()
    attempts = attempts or config.purify_attempts
    system, user = build_purify_prompt(adversarial, config.max_input_tokens)
    raws = []
    best = None
    reason = ""
    for i in range(1, attempts + 1):
        raw = client.complete(system, user)
        raws.append(raw)
        purified, smap, reason = validate_purification(adversarial, strip_fences(raw))
        if smap is not None:
            return PurificationResult(purified, smap, True, i, raws)
        if purified is not None and best is None:
            best = purified
    return PurificationResult(best or adversarial, SubstitutionMap(), False, attempts, raws, reason)
