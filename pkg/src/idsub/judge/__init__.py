"""LLM-as-a-judge protocol: prompts, verdict parsing, purification and detection."""

from .client import AuditLog, ChatClient, JudgeConfig, prompt_hash
from .core import PurificationResult, detect, judge, purify, strip_fences, validate_purification
from .mock import (
    DownClient,
    MapPurifier,
    MockJudge,
    ScriptedClient,
    constant_rule,
    digit_suffix_rule,
    identity_purifier,
    marker_rule,
)
from .prompts import (
    PAIR,
    SINGLE,
    build_eval_prompt,
    build_purify_prompt,
    estimate_tokens,
    eval_instruction,
    eval_user_content,
    purify_instruction,
)
from .verdict import NaturalnessVerdict, parse_verdict

__all__ = [
    "PAIR",
    "SINGLE",
    "AuditLog",
    "ChatClient",
    "DownClient",
    "JudgeConfig",
    "MapPurifier",
    "MockJudge",
    "NaturalnessVerdict",
    "PurificationResult",
    "ScriptedClient",
    "build_eval_prompt",
    "build_purify_prompt",
    "constant_rule",
    "detect",
    "digit_suffix_rule",
    "estimate_tokens",
    "eval_instruction",
    "eval_user_content",
    "identity_purifier",
    "judge",
    "marker_rule",
    "parse_verdict",
    "prompt_hash",
    "purify",
    "purify_instruction",
    "strip_fences",
    "validate_purification",
]
