"""Parsing judge responses into NaturalnessVerdict values."""

import json
import re
from dataclasses import dataclass

from ..errors import ScoreOutOfRange, Unparseable

_SCORE_RE = re.compile(r"""["']?score["']?\s*[:=]?\s*["']?(-?\d+)\b""", re.IGNORECASE)
_ANALYSIS_RE = re.compile(r"""["']?analysis["']?\s*[:=]\s*(.*)""", re.IGNORECASE)
_FENCE_RE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)


@dataclass(frozen=True)
class NaturalnessVerdict:
    analysis: str
    score: int

    def __post_init__(self):
        if isinstance(self.score, bool) or not isinstance(self.score, int) or not 1 <= self.score <= 5:
            raise ScoreOutOfRange(self.score)

    def to_dict(self):
        return {"Analysis": self.analysis, "Score": self.score}

    def to_json(self):
        return json.dumps(self.to_dict(), ensure_ascii=False)


def _from_object(obj):
    keys = {k.lower(): k for k in obj}
    if "score" not in keys:
        return None
    raw = obj[keys["score"]]
    try:
        score = int(raw)
    except (TypeError, ValueError):
        raise Unparseable(f"score is not an integer: {raw!r}") from None
    if isinstance(raw, float) and raw != score:
        raise Unparseable(f"score is not an integer: {raw!r}")
    if not 1 <= score <= 5:
        raise ScoreOutOfRange(score)
    analysis = obj.get(keys.get("analysis", "analysis"), "")
    return NaturalnessVerdict(str(analysis), score)


def _json_candidates(raw):
    yield raw.strip()
    for m in _FENCE_RE.finditer(raw):
        yield m.group(1).strip()
    start, end = raw.find("{"), raw.rfind("}")
    if 0 <= start < end:
        yield raw[start:end + 1]


def parse_verdict(raw):
    """Strict JSON first, then the last integer that follows a "Score" label.

    Scores outside 1..5 raise ScoreOutOfRange; they are never clamped.
    """
    if raw is None:
        raise Unparseable("empty response")
    for text in _json_candidates(raw):
        try:
            obj = json.loads(text)
        except ValueError:
            continue
        if isinstance(obj, dict):
            verdict = _from_object(obj)
            if verdict is not None:
                return verdict
    matches = _SCORE_RE.findall(raw)
    if not matches:
        raise Unparseable(f"no score found in response: {raw[:120]!r}")
    score = int(matches[-1])
    if not 1 <= score <= 5:
        raise ScoreOutOfRange(score)
    m = _ANALYSIS_RE.search(raw)
    analysis = m.group(1).strip().strip('",') if m else ""
    return NaturalnessVerdict(analysis, score)
