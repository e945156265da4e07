"""Evaluation and purification prompt construction."""

import json
import re
from functools import lru_cache
from importlib import resources

from ..code.parser import CodeSnippet
from ..errors import OverLengthInput

PAIR = "pair"
SINGLE = "single"
DEFAULT_MAX_TOKENS = 4096

_PIECES = re.compile(r"\w+|[^\w\s]")


@lru_cache(maxsize=None)
def template(name):
    return resources.files("idsub.judge").joinpath(f"templates/{name}.txt").read_text(encoding="utf-8")


def eval_instruction(mode=PAIR):
    return template("eval_pair_system" if mode == PAIR else "eval_single_system")


def purify_instruction():
    return template("purify_system")


def estimate_tokens(*texts):
    """Rough LLM token count: word/punctuation pieces times 1.3."""
    return int(sum(len(_PIECES.findall(t)) for t in texts) * 1.3 + 0.5)


def _src(code):
    return code.source if isinstance(code, CodeSnippet) else code


def _guard(system, user, max_tokens):
    est = estimate_tokens(system, user)
    if est > max_tokens:
        raise OverLengthInput(est, max_tokens)


def eval_user_content(code, original=None):
    if original is not None:
        payload = {"Original code": _src(original), "Adversarial code": _src(code)}
    else:
        payload = {"Code": _src(code)}
    return json.dumps(payload, ensure_ascii=False)


def build_eval_prompt(mode, original, code, max_tokens=DEFAULT_MAX_TOKENS):
    """(system, user) messages for naturalness scoring; pair mode needs ``original``."""
    if mode not in (PAIR, SINGLE):
        raise ValueError(f"unknown prompt mode {mode!r}")
    if mode == PAIR and original is None:
        raise ValueError("pair mode needs the original code")
    system = eval_instruction(mode)
    user = eval_user_content(code, original if mode == PAIR else None)
    _guard(system, user, max_tokens)
    return system, user


def build_purify_prompt(adversarial, max_tokens=DEFAULT_MAX_TOKENS):
    system = purify_instruction()
    user = _src(adversarial)
    _guard(system, user, max_tokens)
    return system, user
