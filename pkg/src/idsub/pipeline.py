"""End-to-end orchestration: corpus generation, annotation, export and the harnesses."""

import hashlib
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

from .attacks import AttackConfig, OriginalMisclassified, attack
from .code.parser import parse
from .corpus import iter_jsonl, write_jsonl
from .errors import IdsubError, OverLengthInput
from .judge.core import judge, purify
from .judge.prompts import PAIR, eval_instruction, eval_user_content, purify_instruction
from .stats import SCORES, ScoreDistribution, weighted_nes
from .victim.base import is_correct, truth_score

log = logging.getLogger(__name__)

DELTAS = (1, 2, 3, 4)


def record_id(original, method, victim_key, seed):
    h = hashlib.sha256()
    for part in (original, method, victim_key, str(seed)):
        h.update(part.encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()[:16]


@dataclass
class AdversarialRecord:
    id: str
    source_id: str
    lang: str
    original: str
    adversarial: str
    map: dict
    method: str
    victim: str
    task: str
    truth: object
    queries: int = 0
    seed: int = 0
    other: str = None
    score_before: float = None
    score_after: float = None
    verdict: dict = None
    annotation: str = None
    purified: str = None
    purified_map: dict = None
    purify_attempts: int = 0
    score_purified: float = None
    correct_purified: bool = None

    def to_dict(self):
        # stored rows share the attack output keys: "success" and "adv_code"
        d = asdict(self)
        d["adv_code"] = d.pop("adversarial")
        d["success"] = True
        return d

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        d = dict(d)
        if "adv_code" in d:
            d["adversarial"] = d.pop("adv_code")
        return cls(**{k: v for k, v in d.items() if k in names})

    def victim_input(self, code):
        return code if self.other is None else (code, self.other)


# -- corpus generation -------------------------------------------------------------

@dataclass
class StageReport:
    counts: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def bump(self, key, n=1):
        self.counts[key] = self.counts.get(key, 0) + n

    def to_dict(self):
        return {"counts": dict(self.counts), "failures": list(self.failures)}


def attack_row(rec, result):
    """The per-record attack output row (failures included)."""
    return {
        "id": rec.id, "success": result.success, "map": result.map.to_dict(),
        "queries": result.queries_used, "score_before": result.score_before,
        "score_after": result.score_after, "adv_code": result.adversarial.source,
    }


def attack_corpus(dataset, victims, configs, provider, jobs=1, done=(), report=None):
    """Attack every (record, victim, method) and yield ``(row, record | None)``.

    ``row`` is the attack output row for every attempt that ran; ``record``
    is the stored :class:`AdversarialRecord`, present only on success.
    Per-record failures go to ``report`` and never stop the stream. Ids in
    ``done`` are skipped, which makes reruns resumable.
    """
    report = report if report is not None else StageReport()
    done = set(done)
    work = []
    for rec in dataset:
        for vkey, victim in victims.items():
            for cfg in configs:
                rid = record_id(rec.code, cfg.method, vkey, cfg.seed)
                if rid in done:
                    report.bump("skipped_done")
                    continue
                work.append((rid, rec, vkey, victim, cfg))

    def run(item):
        _, rec, _, victim, cfg = item
        try:
            snippet = parse(rec.code, rec.lang)
            return attack(snippet, victim, rec.truth, provider, cfg, other=rec.code2), None
        except (IdsubError, ValueError) as exc:
            return None, exc

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        for (rid, rec, vkey, victim, cfg), (res, exc) in zip(work, pool.map(run, work)):
            report.bump("attempted")
            if exc is not None:
                kind = "misclassified_original" if isinstance(exc, OriginalMisclassified) else "failed"
                report.bump(kind)
                report.failures.append({"id": rec.id, "victim": vkey, "method": cfg.method,
                                        "reason": kind, "error": str(exc)})
                log.info("record %s (%s/%s) skipped: %s", rec.id, vkey, cfg.method, exc)
                continue
            report.bump("queries", res.queries_used)
            row = dict(attack_row(rec, res), id=rid, source_id=rec.id, lang=rec.lang,
                       method=cfg.method, victim=vkey, seed=cfg.seed)
            if not res.success:
                report.bump("unsuccessful")
                yield row, None
                continue
            report.bump("succeeded")
            adv = AdversarialRecord(
                id=rid, source_id=rec.id, lang=rec.lang, original=rec.code,
                adversarial=res.adversarial.source, map=res.map.to_dict(), method=cfg.method,
                victim=vkey, task=victim.task.kind, truth=rec.truth, queries=res.queries_used,
                seed=cfg.seed, other=rec.code2, score_before=res.score_before, score_after=res.score_after,
            )
            yield adv.to_dict(), adv


def generate_corpus(dataset, victims, configs, provider, jobs=1, done=(), report=None):
    """Only the successful adversarial records of :func:`attack_corpus`."""
    for _, record in attack_corpus(dataset, victims, configs, provider, jobs, done, report):
        if record is not None:
            yield record


# -- annotation ---------------------------------------------------------------------

def annotate_corpus(records, client, config, audit=None, report=None):
    """Attach a pair-mode verdict to each record.

    Over-length records are dropped; judge failures mark the record
    ``annotation="failed"`` so export leaves it out.
    """
    report = report if report is not None else StageReport()
    out = []
    for rec in records:
        if rec.verdict is not None:
            report.bump("already_annotated")
            out.append(rec)
            continue
        try:
            verdict = judge(rec.adversarial, rec.original, client, config, audit, rec.id)
        except OverLengthInput:
            report.bump("dropped_over_length")
            continue
        except IdsubError as exc:
            rec.annotation = "failed"
            report.bump("failed")
            report.failures.append({"id": rec.id, "error": str(exc)})
            out.append(rec)
            continue
        rec.verdict = verdict.to_dict()
        rec.annotation = "ok"
        report.bump("annotated")
        out.append(rec)
    return out, report


# -- export -------------------------------------------------------------------------

def _recheck(rec, victims):
    victim = victims.get(rec.victim)
    if victim is None:
        return rec.correct_purified
    out = victim.query(rec.victim_input(rec.purified))
    return is_correct(out, rec.truth, victim.task, rec.score_before)


def export_instructions(records, task, out, victims=None):
    """Write instruction/input/output JSONL for the eval or purify task."""
    if task not in ("eval", "purify"):
        raise ValueError("task must be 'eval' or 'purify'")
    rows = []
    excluded = {}

    def skip(reason):
        excluded[reason] = excluded.get(reason, 0) + 1

    for rec in records:
        if task == "eval":
            if rec.verdict is None or rec.annotation not in (None, "ok"):
                skip("no-verdict")
                continue
            rows.append({
                "instruction": eval_instruction(PAIR),
                "input": eval_user_content(rec.adversarial, rec.original),
                "output": json.dumps(rec.verdict, ensure_ascii=False),
            })
        else:
            if rec.purified is None:
                skip("no-validated-purification")
                continue
            correct = _recheck(rec, victims) if victims else rec.correct_purified
            if not correct:
                skip("victim-wrong-on-purified")
                continue
            rows.append({"instruction": purify_instruction(), "input": rec.adversarial, "output": rec.purified})
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    with open(out, "w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")
    return {"included": len(rows), "excluded": excluded}


# -- defense ------------------------------------------------------------------------

def _group_key(rec):
    return f"{rec.task}/{rec.victim}/{rec.method}"


def _rate_table(groups):
    table = {}
    for key, g in sorted(groups.items()):
        table[key] = dict(g, rate=g["defended"] / g["n"] if g["n"] else 0.0)
    return table


def defense_harness(records, client, config, victims, jobs=1):
    """Purify each adversarial record and re-query its victim.

    Defense success rate = records the victim gets right after purification
    over all records; unvalidated purifications count as failures.
    """
    records = list(records)

    def run(rec):
        victim = victims[rec.victim]
        snippet = parse(rec.adversarial, rec.lang)
        res = purify(snippet, client, config)
        rec.purify_attempts = res.attempts
        if not res.validated:
            rec.purified = None
            rec.correct_purified = False
            return rec, False, False
        rec.purified = res.purified.source
        rec.purified_map = res.map.to_dict()
        out = victim.query(rec.victim_input(res.purified))
        rec.score_purified = truth_score(out, rec.truth)
        rec.correct_purified = is_correct(out, rec.truth, victim.task, rec.score_before)
        return rec, True, rec.correct_purified

    groups = {}
    total = {"n": 0, "defended": 0, "unvalidated": 0, "errors": 0}
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        futures = [pool.submit(run, rec) for rec in records]
        for rec, fut in zip(records, futures):
            g = groups.setdefault(_group_key(rec), {"n": 0, "defended": 0, "unvalidated": 0, "errors": 0})
            try:
                _, validated, ok = fut.result()
            except IdsubError as exc:
                log.warning("defense failed for %s: %s", rec.id, exc)
                validated, ok = True, False
                g["errors"] += 1
                total["errors"] += 1
            for t in (g, total):
                t["n"] += 1
                t["defended"] += int(ok)
                t["unvalidated"] += int(not validated)
    overall = dict(total, rate=total["defended"] / total["n"] if total["n"] else 0.0)
    return records, {"groups": _rate_table(groups), "overall": overall}


# -- misclassification of clean samples --------------------------------------------

def misclassification_harness(samples, client, config, deltas=DELTAS, audit=None):
    """Rates of clean samples flagged at each threshold.

    ``samples`` yields (id, code, lang, group). Judge failures are left out
    of the denominator and counted separately.
    """
    groups = {}
    for sid, code, lang, group in samples:
        g = groups.setdefault(group, {"scores": [], "failed": 0})
        try:
            parse(code, lang)
            verdict = judge(code, None, client, config, audit, sid)
        except IdsubError as exc:
            log.info("clean sample %s excluded: %s", sid, exc)
            g["failed"] += 1
            continue
        g["scores"].append(verdict.score)
    table = {}
    for group, g in sorted(groups.items()):
        n = len(g["scores"])
        rates = {str(d): (sum(s <= d for s in g["scores"]) / n if n else 0.0) for d in deltas}
        table[group] = {"n": n, "failed": g["failed"], "rates": rates,
                        "percent": {d: f"{100 * r:.2f}" for d, r in rates.items()}}
    return table


# -- reporting ----------------------------------------------------------------------

def nes_histograms(records, group_by=("task", "victim", "method")):
    """Per-group NES counts, proportions and weighted average (density-plot data)."""
    buckets = {}
    for rec in records:
        if rec.verdict is None:
            continue
        key = "/".join(str(getattr(rec, g)) for g in group_by)
        buckets.setdefault(key, []).append(int(rec.verdict["Score"]))
    out = {}
    for key, scores in sorted(buckets.items()):
        dist = ScoreDistribution.from_scores(scores)
        out[key] = {
            "scores": list(SCORES),
            "counts": [scores.count(s) for s in SCORES],
            "proportions": list(dist.proportions),
            "weighted_nes": weighted_nes(dist),
        }
    return out


def load_records(path):
    """Successful adversarial records from any stage file (unsuccessful rows are skipped)."""
    return [AdversarialRecord.from_dict(d) for d in iter_jsonl(path) if d.get("success", True)]


def finalize_jsonl(path):
    """Deduplicate rows by id (last wins) and sort by id, so parallel output is deterministic."""
    if not os.path.exists(path):
        return 0
    rows = {}
    for d in iter_jsonl(path):
        rows[str(d.get("id"))] = d
    return write_jsonl(path, (rows[k] for k in sorted(rows)))


class RunDir:
    """``runs/<run-id>/`` with the standard stage files."""

    ADV = "adv.jsonl"
    VERDICTS = "verdicts.jsonl"
    PURIFIED = "purified.jsonl"
    REPORT = "report.json"

    def __init__(self, path):
        self.path = path
        os.makedirs(path, exist_ok=True)

    def file(self, name):
        return os.path.join(self.path, name)

    def instructions(self, task):
        return self.file(f"instructions_{task}.jsonl")

    def load_records(self, name):
        path = self.file(name) if not os.path.isabs(name) else name
        if not os.path.exists(path):
            return []
        return load_records(path)

    def done_ids(self, name):
        path = self.file(name)
        return {d["id"] for d in iter_jsonl(path) if "id" in d} if os.path.exists(path) else set()

    def append(self, name, records):
        return write_jsonl(self.file(name), (r.to_dict() for r in records), append=True)

    def write(self, name, records):
        return self.write_to(self.file(name), records)

    @staticmethod
    def write_to(path, records):
        return write_jsonl(path, (r.to_dict() for r in sorted(records, key=lambda r: r.id)))

    def finalize(self, name):
        return finalize_jsonl(self.file(name))

    def write_report(self, report):
        path = self.file(self.REPORT)
        existing = {}
        if os.path.exists(path):
            with open(path) as f:
                try:
                    existing = json.load(f)
                except ValueError:
                    existing = {}
        for key, value in report.items():
            # per-command result tables accumulate across commands in one run dir
            if isinstance(value, dict) and isinstance(existing.get(key), dict) and key == "results":
                existing[key].update(value)
            else:
                existing[key] = value
        with open(path, "w") as f:
            json.dump(existing, f, indent=2, sort_keys=True, default=str)
        return path


def default_attack_configs(methods, budget=2000, seed=0, **params):
    return [AttackConfig(method=m, budget=budget, seed=seed, **params) for m in methods]
