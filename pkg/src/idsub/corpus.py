"""JSONL corpus I/O.

Single-snippet records: ``{"id", "lang", "code", "label", "reference"}``.
Clone-detection pairs: ``{"id", "lang", "code1", "code2", "label"}``.
"""

import json
import logging
import os
from dataclasses import dataclass

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CorpusRecord:
    id: str
    lang: str
    code: str
    label: int = None
    reference: str = None
    code2: str = None

    @property
    def is_pair(self):
        return self.code2 is not None

    @property
    def truth(self):
        return self.reference if self.label is None else self.label

    @classmethod
    def from_dict(cls, d):
        if "code1" in d:
            return cls(str(d["id"]), d.get("lang", "java"), d["code1"], d.get("label"), None, d["code2"])
        return cls(str(d["id"]), d.get("lang", "java"), d["code"], d.get("label"), d.get("reference"))

    def to_dict(self):
        if self.is_pair:
            return {"id": self.id, "lang": self.lang, "code1": self.code, "code2": self.code2, "label": self.label}
        return {"id": self.id, "lang": self.lang, "code": self.code, "label": self.label, "reference": self.reference}


def iter_jsonl(path, errors=None):
    """Yield parsed objects; corrupt lines are logged (with line number) and skipped."""
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except ValueError as exc:
                log.warning("%s:%d: skipping corrupt line (%s)", path, lineno, exc)
                if errors is not None:
                    errors.append({"line": lineno, "error": str(exc)})
                continue
            yield obj


def read_corpus(path, errors=None):
    out = []
    for obj in iter_jsonl(path, errors):
        try:
            out.append(CorpusRecord.from_dict(obj))
        except (KeyError, TypeError) as exc:
            log.warning("%s: skipping record without field %s", path, exc)
            if errors is not None:
                errors.append({"id": obj.get("id") if isinstance(obj, dict) else None, "error": f"missing {exc}"})
    return out


def write_jsonl(path, rows, append=False):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    n = 0
    with open(path, "a" if append else "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")
            n += 1
    return n
