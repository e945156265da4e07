"""``idsub`` command suite.

Every command writes ``report.json`` into its run directory. Exit codes:
0 ok, 1 runtime error, 2 configuration error, 3 partial (some records failed).
"""

import argparse
import csv
import json
import logging
import os
import platform
import sys
import time
from importlib import metadata

from . import __version__
from .code.parser import parse
from .code.rename import SubstitutionMap
from .config import attack_configs, build_judge, build_provider, build_victim, load_config
from .corpus import read_corpus
from .errors import ConfigError, IdsubError, ScoreOutOfRange
from .judge import AuditLog, detect, purify
from .metrics import mean_report, pair_metrics, train_ngram
from .pipeline import (
    DELTAS,
    RunDir,
    StageReport,
    annotate_corpus,
    attack_corpus,
    defense_harness,
    export_instructions,
    finalize_jsonl,
    load_records,
    misclassification_harness,
    nes_histograms,
)
from .stats import (
    SCORES,
    ScoreDistribution,
    consistency,
    kendall_tau,
    mann_whitney_u,
    pearson,
    percent,
    spearman,
    weighted_nes,
)

OK, RUNTIME, CONFIG, PARTIAL = 0, 1, 2, 3
EXTENSIONS = {".java": "java", ".c": "c", ".h": "c"}

log = logging.getLogger("idsub")


class Partial(Exception):
    """Raised by a command that finished but skipped some records."""

    def __init__(self, result):
        super().__init__("some records failed")
        self.result = result


def _versions():
    out = {"idsub": __version__, "python": platform.python_version()}
    for dist in ("tree-sitter", "tree-sitter-java", "tree-sitter-c", "numpy", "httpx"):
        try:
            out[dist] = metadata.version(dist)
        except metadata.PackageNotFoundError:
            out[dist] = None
    return out


def _split(value):
    return [v.strip() for v in value.split(",") if v.strip()] if value else []


def _lang_of(path, explicit):
    if explicit:
        return explicit
    lang = EXTENSIONS.get(os.path.splitext(path)[1].lower())
    if lang is None:
        raise ConfigError(f"cannot infer the language of {path!r}; pass --lang")
    return lang


def _read(path):
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path!r}: {exc.strerror}") from None


def _require_file(path, flag):
    if not path:
        raise ConfigError(f"{flag} is required")
    if not os.path.exists(path):
        raise ConfigError(f"{flag}: {path!r} does not exist")
    return path


def _victims_for(config, keys):
    return {k: build_victim(config, k) for k in keys}


def _write_csv(path, header, rows):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(header)
        w.writerows(rows)


def _fmt(x, digits=6):
    if x is None or (isinstance(x, float) and x != x):
        return ""
    return f"{x:.{digits}f}" if isinstance(x, float) else str(x)


# -- commands ----------------------------------------------------------------------

def cmd_attack(args, config, run):
    methods = _split(args.method) or config.attack.get("methods") or ["wir"]
    keys = _split(args.victim)
    if not keys:
        raise ConfigError("--victim is required")
    victims = _victims_for(config, keys)
    corpus = read_corpus(_require_file(args.input, "--input"))
    configs = attack_configs(config, methods, args.budget, args.seed)
    snippets = []
    for rec in corpus:
        try:
            snippets.append(parse(rec.code, rec.lang))
        except IdsubError:
            pass
    provider = build_provider(config, snippets)
    out = args.out or run.file(RunDir.ADV)
    done = run.done_ids(out) if os.path.exists(out) else set()
    report = StageReport()
    with open(out, "a", encoding="utf-8") as f:
        for row, _ in attack_corpus(corpus, victims, configs, provider, args.jobs, done, report):
            f.write(json.dumps(row, ensure_ascii=False) + "\n")
            f.flush()
    finalize_jsonl(out)
    result = {"out": out, "methods": methods, "victims": keys, **report.to_dict()}
    succ = report.counts.get("succeeded", 0)
    ran = report.counts.get("attempted", 0) - report.counts.get("failed", 0) \
        - report.counts.get("misclassified_original", 0)
    result["success_rate"] = succ / ran if ran else 0.0
    if report.counts.get("failed"):
        raise Partial(result)
    return result


def cmd_judge(args, config, run):
    records = load_records(_require_file(args.input, "--in"))
    out = args.out or run.file(RunDir.VERDICTS)
    prior = {r.id: r for r in load_records(out)} if os.path.exists(out) else {}
    lang = records[0].lang if records else None
    client, jcfg = build_judge(config, records, lang)
    audit = AuditLog(run.file("audit.jsonl"))
    todo = [prior.get(r.id, r) for r in records]
    annotated, report = annotate_corpus(todo, client, jcfg, audit)
    by_id = dict(prior)
    by_id.update({r.id: r for r in annotated})
    run.write_to(out, by_id.values())
    result = {"out": out, **report.to_dict(), "nes": nes_histograms(annotated)}
    if report.counts.get("failed"):
        raise Partial(result)
    return result


def cmd_purify(args, config, run):
    path = _require_file(args.input, "--in")
    lang = _lang_of(path, args.lang)
    snippet = parse(_read(path), lang)
    client, jcfg = build_judge(config, language=lang)
    res = purify(snippet, client, jcfg)
    payload = {"validated": res.validated, "attempts": res.attempts, "map": res.map.to_dict(),
               "purified": res.purified.source if res.validated else None}
    if not res.validated:
        payload["reason"] = res.reason
    print(json.dumps(payload, ensure_ascii=False))
    return payload


def cmd_detect(args, config, run):
    path = _require_file(args.input, "--in")
    lang = _lang_of(path, args.lang)
    code = _read(path)
    parse(code, lang)
    client, jcfg = build_judge(config, language=lang)
    delta = args.delta if args.delta is not None else config.delta
    res = detect(code, client, jcfg, delta)
    payload = {"flagged": res["flagged"], "score": res["verdict"].score}
    print(json.dumps(payload))
    return dict(payload, delta=delta, analysis=res["verdict"].analysis)


def cmd_defend(args, config, run):
    records = load_records(_require_file(args.input, "--in"))
    victims = _victims_for(config, sorted({r.victim for r in records}))
    lang = records[0].lang if records else None
    client, jcfg = build_judge(config, records, lang)
    records, report = defense_harness(records, client, jcfg, victims, args.jobs)
    out = args.out or run.file(RunDir.PURIFIED)
    run.write_to(out, records)
    result = {"out": out, "defense": report}
    if report["overall"]["errors"]:
        raise Partial(result)
    return result


def cmd_misclassify(args, config, run):
    corpus = read_corpus(_require_file(args.input, "--input"))
    fields = _split(args.group_by) or ["lang"]
    deltas = [int(d) for d in _split(args.deltas)] or list(DELTAS)
    if any(d not in DELTAS for d in deltas):
        raise ConfigError("--deltas must be drawn from 1,2,3,4")
    lang = corpus[0].lang if corpus else None
    client, jcfg = build_judge(config, language=lang)
    samples = (
        (r.id, r.code, r.lang, "/".join(str(getattr(r, g, "")) for g in fields)) for r in corpus
    )
    table = misclassification_harness(samples, client, jcfg, deltas, AuditLog(run.file("audit.jsonl")))
    if args.out:
        header = ["group", "n", "failed"] + [f"delta_{d}" for d in deltas]
        rows = [[g, t["n"], t["failed"]] + [t["percent"][str(d)] for d in deltas] for g, t in table.items()]
        _write_csv(args.out, header, rows)
    print(json.dumps(table, sort_keys=True))
    result = {"misclassification": table}
    if any(t["failed"] for t in table.values()):
        raise Partial(result)
    return result


METRIC_FIELDS = ("icr", "tcr", "acs", "aed_raw", "aed_normalized", "ppl", "codebleu")


def cmd_metrics(args, config, run):
    records = load_records(_require_file(args.pairs, "--pairs"))
    ngram = None
    if args.corpus:
        train = [parse(r.code, r.lang) for r in read_corpus(_require_file(args.corpus, "--corpus"))]
        ngram = train_ngram(train)
    rows, reports, failures = [], [], 0
    for rec in records:
        try:
            orig, adv = parse(rec.original, rec.lang), parse(rec.adversarial, rec.lang)
            rep = pair_metrics(orig, adv, SubstitutionMap(rec.map), ngram)
        except IdsubError as exc:
            log.warning("metrics skipped %s: %s", rec.id, exc)
            failures += 1
            continue
        reports.append(rep)
        rows.append([rec.id, rec.method, rec.victim] + [_fmt(getattr(rep, f)) for f in METRIC_FIELDS])
    mean = mean_report(reports) if reports else None
    if mean is not None:
        rows.append(["mean", "", ""] + [_fmt(getattr(mean, f)) for f in METRIC_FIELDS])
    out = args.out or run.file("metrics.csv")
    _write_csv(out, ["id", "method", "victim", *METRIC_FIELDS], rows)
    result = {"out": out, "pairs": len(reports), "failed": failures,
              "mean": mean.to_dict() if mean else None}
    if failures:
        raise Partial(result)
    return result


def _group_scores(records, fields):
    groups = {}
    for rec in records:
        if rec.verdict is None:
            continue
        key = tuple(str(getattr(rec, f)) for f in fields)
        groups.setdefault(key, {})[rec.id] = int(rec.verdict["Score"])
    return groups


def _proportion_rows(path):
    """Rows of a proportions fixture: CSV with p1..p5 percentage columns plus labels."""
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        labels = [c for c in reader.fieldnames if c not in {f"p{s}" for s in SCORES} | {"avg", "Avg"}]
        for row in reader:
            yield labels, [row[c] for c in labels], [float(row[f"p{s}"]) for s in SCORES]


def cmd_stats(args, config, run):
    out = args.out or run.file("tables.csv")
    if args.proportions:
        rows, header = [], None
        for labels, values, pct in _proportion_rows(_require_file(args.proportions, "--proportions")):
            header = labels + [f"p{s}" for s in SCORES] + ["Avg"]
            avg = weighted_nes(ScoreDistribution.from_percentages(pct))
            rows.append(values + [f"{p:.2f}" for p in pct] + [f"{avg:.2f}"])
        _write_csv(out, header or ["Avg"], rows)
        return {"out": out, "rows": len(rows)}

    fields = _split(args.group_by) or ["task", "victim", "method"]
    records = load_records(_require_file(args.verdicts, "--verdicts"))
    groups = _group_scores(records, fields)
    if args.compare:
        other = _group_scores(load_records(_require_file(args.compare, "--compare")), fields)
        header = fields + ["n", "exact", "within1", "mad", "spearman", "pearson", "kendall", "mwu_U", "mwu_p"]
        rows = []
        for key in sorted(groups):
            ids = sorted(set(groups[key]) & set(other.get(key, {})))
            if not ids:
                continue
            a = [groups[key][i] for i in ids]
            b = [other[key][i] for i in ids]
            c = consistency(a, b)
            cells = [percent(c["exact"]), percent(c["within1"]), _fmt(c["mad"], 4)]
            for fn in (spearman, pearson, kendall_tau):
                try:
                    cells.append(_fmt(fn(a, b), 4))
                except IdsubError:
                    cells.append("")
            mw = mann_whitney_u(a, b)
            cells += [_fmt(float(mw["U"]), 1), _fmt(mw["p"], 4)]
            rows.append(list(key) + [len(ids)] + cells)
        _write_csv(out, header, rows)
        return {"out": out, "rows": len(rows)}

    header = fields + ["n"] + [f"p{s}" for s in SCORES] + ["Avg"]
    rows = []
    for key in sorted(groups):
        scores = list(groups[key].values())
        dist = ScoreDistribution.from_scores(scores)
        rows.append(list(key) + [len(scores)] + [percent(p) for p in dist.proportions]
                    + [f"{weighted_nes(dist):.2f}"])
    _write_csv(out, header, rows)
    return {"out": out, "rows": len(rows), "nes": nes_histograms(records, fields)}


def cmd_export(args, config, run):
    records = load_records(_require_file(args.input, "--in"))
    victims = None
    if args.task == "purify" and args.recheck:
        victims = _victims_for(config, sorted({r.victim for r in records}))
    out = args.out or run.instructions(args.task)
    counts = export_instructions(records, args.task, out, victims)
    return {"out": out, **counts}


COMMANDS = {
    "attack": cmd_attack,
    "judge": cmd_judge,
    "purify": cmd_purify,
    "detect": cmd_detect,
    "defend": cmd_defend,
    "misclassify": cmd_misclassify,
    "metrics": cmd_metrics,
    "stats": cmd_stats,
    "export-instructions": cmd_export,
}


# -- argument parsing --------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML or JSON run configuration")
    common.add_argument("--run-dir", help="output directory (default <out_dir>/<run-id>)")
    common.add_argument("--run-id", help="run identifier under the configured out_dir")
    common.add_argument("--seed", type=int, help="override the configured seed")
    common.add_argument("--jobs", type=int, default=1, help="worker pool size")
    common.add_argument("--mock-judge", help="offline judge: constant:N, digit-suffix or marker:NAME")
    common.add_argument("--purifier", choices=("identity", "inverse"), help="mock purifier")
    common.add_argument("--judge-url", help="chat endpoint url (overrides config)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="idsub", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"idsub {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("attack", parents=[common], help="run identifier-substitution attacks")
    a.add_argument("--method", help="mhm, wir, greedy or beam (comma list allowed)")
    a.add_argument("--victim", help="victim config key (comma list allowed)")
    a.add_argument("--input", help="corpus JSONL")
    a.add_argument("--out", help="attack output JSONL")
    a.add_argument("--budget", type=int, help="query budget per attack")

    j = sub.add_parser("judge", parents=[common], help="annotate adversarial records with NES verdicts")
    j.add_argument("--in", dest="input", help="adversarial records JSONL")
    j.add_argument("--out", help="verdicts JSONL")

    for name, helptext in (("purify", "purify one snippet"), ("detect", "flag one snippet as attacked")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--in", dest="input", help="source file")
        s.add_argument("--lang", choices=("java", "c"))
        if name == "detect":
            s.add_argument("--delta", type=int, choices=DELTAS, help="NES threshold (inclusive)")

    d = sub.add_parser("defend", parents=[common], help="purify records and re-query their victims")
    d.add_argument("--in", dest="input", help="adversarial records JSONL")
    d.add_argument("--out", help="purified JSONL")

    m = sub.add_parser("misclassify", parents=[common], help="flag rates of clean samples per threshold")
    m.add_argument("--input", help="clean corpus JSONL")
    m.add_argument("--deltas", default="1,2,3,4")
    m.add_argument("--group-by", default="lang")
    m.add_argument("--out", help="optional CSV table")

    q = sub.add_parser("metrics", parents=[common], help="baseline quality metrics per pair")
    q.add_argument("--pairs", help="adversarial records JSONL")
    q.add_argument("--corpus", help="training corpus for the perplexity model")
    q.add_argument("--out", help="metrics CSV")

    t = sub.add_parser("stats", parents=[common], help="NES tables, agreement and correlations")
    t.add_argument("--verdicts", help="annotated records JSONL")
    t.add_argument("--group-by", default="task,victim,method")
    t.add_argument("--compare", help="second annotated JSONL, joined by id")
    t.add_argument("--proportions", help="CSV of p1..p5 percentage rows")
    t.add_argument("--out", help="output CSV")

    e = sub.add_parser("export-instructions", parents=[common], help="write an instruction dataset")
    e.add_argument("--in", dest="input", help="annotated or purified records JSONL")
    e.add_argument("--task", choices=("eval", "purify"), required=True)
    e.add_argument("--out", help="instruction JSONL")
    e.add_argument("--recheck", action="store_true", help="re-query victims on purified code")
    return p


def _overrides(args):
    o = {"seed": args.seed, "judge.url": args.judge_url, "judge.mock": args.mock_judge,
         "judge.purifier": args.purifier}
    return {k: v for k, v in o.items() if v is not None}


def _run_dir(args, config):
    if args.run_dir:
        return RunDir(args.run_dir)
    run_id = args.run_id or f"{args.command}-{time.strftime('%Y%m%d-%H%M%S')}"
    return RunDir(os.path.join(config.out_dir, run_id))


def _fail(code, exc):
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}) + "\n")
    return code


def run(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    started = time.time()
    try:
        config = load_config(args.config, _overrides(args))
        rundir = _run_dir(args, config)
    except ConfigError as exc:
        return _fail(CONFIG, exc)

    status, result, error = OK, None, None
    try:
        result = COMMANDS[args.command](args, config, rundir)
    except Partial as p:
        status, result = PARTIAL, p.result
    except KeyboardInterrupt:
        status, error = PARTIAL, {"error": "KeyboardInterrupt", "message": "cancelled"}
    except ConfigError as exc:
        status, error = CONFIG, exc
    except (IdsubError, OSError, ScoreOutOfRange) as exc:
        status, error = RUNTIME, exc

    report = {
        "command": args.command,
        "config": config.to_dict(),
        "flags": {k: v for k, v in vars(args).items() if k != "command"},
        "versions": _versions(),
        "seed": config.seed if args.seed is None else args.seed,
        "timing": {"started": started, "elapsed_s": time.time() - started},
        "exit_code": status,
        "result": result,
        "results": {args.command: result},
    }
    if isinstance(error, Exception):
        report["error"] = {"type": type(error).__name__, "message": str(error)}
    elif error:
        report["error"] = error
    rundir.write_report(report)
    if isinstance(error, Exception):
        return _fail(status, error)
    if error:
        sys.stderr.write(json.dumps(dict(error, exit_code=status)) + "\n")
    return status


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
