import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from corpora import cross_class_synonyms, synthetic_corpus
from idsub.cli import CONFIG, OK, PARTIAL, run
from idsub.corpus import iter_jsonl, write_jsonl

FIX = Path(__file__).parent / "fixtures"
REPORT_KEYS = {"command", "config", "flags", "versions", "seed", "timing", "exit_code", "result", "results"}


@pytest.fixture
def workspace(tmp_path):
    write_jsonl(tmp_path / "train.jsonl", (r.to_dict() for r in synthetic_corpus(50, "java")))
    write_jsonl(tmp_path / "eval.jsonl", (r.to_dict() for r in synthetic_corpus(8, "java", seed=3)))
    (tmp_path / "idsub.json").write_text(json.dumps({
        "victims": {"toy": {"type": "toy", "train": "train.jsonl", "language": "java"}},
        "candidates": {"strategies": ["synonym"], "synonyms": cross_class_synonyms()},
        "attack": {"budget": 300},
        "out_dir": str(tmp_path / "runs"),
    }))
    return tmp_path


def call(capsys, *argv):
    code = run([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def report(run_dir):
    return json.loads((Path(run_dir) / "report.json").read_text())


def test_detect_with_constant_mock(tmp_path, capsys):
    src = tmp_path / "code.java"
    src.write_text((FIX / "swap_adversarial.java").read_text())
    code, out, _ = call(capsys, "detect", "--in", src, "--delta", 2, "--mock-judge", "constant:2",
                        "--run-dir", tmp_path / "run")
    assert code == OK
    assert json.loads(out) == {"flagged": True, "score": 2}
    rep = report(tmp_path / "run")
    assert REPORT_KEYS <= set(rep) and rep["exit_code"] == 0


def test_detect_language_must_be_inferable(tmp_path, capsys):
    src = tmp_path / "code.txt"
    src.write_text("int a;")
    code, _, err = call(capsys, "detect", "--in", src, "--mock-judge", "constant:2", "--run-dir", tmp_path / "r")
    assert code == CONFIG and json.loads(err)["exit_code"] == CONFIG


def test_no_judge_configured_is_config_error(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("IDSUB_JUDGE_URL", raising=False)
    src = tmp_path / "code.c"
    src.write_text("int f(int a) { return a; }")
    code, _, err = call(capsys, "detect", "--in", src, "--run-dir", tmp_path / "r")
    assert code == CONFIG
    assert json.loads(err)["error"] == "ConfigError"


def test_purify_command_with_identity_mock(tmp_path, capsys):
    src = tmp_path / "code.c"
    src.write_text("int f(int a) { return a; }\n")
    code, out, _ = call(capsys, "purify", "--in", src, "--mock-judge", "constant:3", "--run-dir", tmp_path / "r")
    payload = json.loads(out)
    assert code == OK and payload["validated"] and payload["map"] == {}
    assert payload["purified"] == src.read_text()


def test_attack_with_unknown_victim_is_config_error(workspace, capsys):
    code, _, err = call(capsys, "attack", "--config", workspace / "idsub.json", "--method", "wir",
                        "--victim", "missing", "--input", workspace / "eval.jsonl", "--run-dir", workspace / "r")
    assert code == CONFIG
    body = json.loads(err)
    assert set(body) == {"error", "message", "exit_code"} and "missing" in body["message"]
    assert report(workspace / "r")["exit_code"] == CONFIG


def test_missing_config_file(tmp_path, capsys):
    code, _, err = call(capsys, "stats", "--config", tmp_path / "nope.toml", "--run-dir", tmp_path / "r")
    assert code == CONFIG


def test_unknown_config_key(tmp_path, capsys):
    (tmp_path / "c.toml").write_text('surprise = 1\n')
    code, _, err = call(capsys, "stats", "--config", tmp_path / "c.toml", "--run-dir", tmp_path / "r")
    assert code == CONFIG and "surprise" in json.loads(err)["message"]


def test_stats_on_proportions_fixture(tmp_path, capsys):
    out = tmp_path / "nes_table.csv"
    code, _, _ = call(capsys, "stats", "--proportions", FIX / "nes_proportions.csv", "--out", out,
                      "--run-dir", tmp_path / "r")
    assert code == OK
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 36
    assert rows[0]["Avg"] == "1.65" and rows[0]["p1"] == "45.36"
    expected = [r["avg"] for r in csv.DictReader((FIX / "nes_proportions.csv").open())]
    assert all(abs(float(r["Avg"]) - float(e)) <= 0.01 for r, e in zip(rows, expected))


def test_full_offline_workflow(workspace, capsys):
    cfg = workspace / "idsub.json"
    rd = workspace / "runs" / "demo"
    common = ["--config", cfg, "--run-dir", rd]

    code, _, _ = call(capsys, "attack", *common, "--method", "wir,mhm", "--victim", "toy",
                      "--input", workspace / "eval.jsonl")
    assert code == OK
    rows = list(iter_jsonl(rd / "adv.jsonl"))
    assert rows == sorted(rows, key=lambda r: r["id"])
    for row in rows:
        assert {"id", "success", "map", "queries", "score_before", "score_after", "adv_code"} <= set(row)
    attack_result = report(rd)["result"]
    assert attack_result["success_rate"] >= 0.8
    n_success = sum(r["success"] for r in rows)

    # rerunning is a no-op thanks to id-based resumption
    code, _, _ = call(capsys, "attack", *common, "--method", "wir,mhm", "--victim", "toy",
                      "--input", workspace / "eval.jsonl")
    assert code == OK and report(rd)["result"]["counts"]["skipped_done"] == len(rows)
    assert len(list(iter_jsonl(rd / "adv.jsonl"))) == len(rows)

    code, _, _ = call(capsys, "judge", *common, "--in", rd / "adv.jsonl", "--mock-judge", "constant:2")
    assert code == OK
    verdicts = list(iter_jsonl(rd / "verdicts.jsonl"))
    assert len(verdicts) == n_success and all(v["verdict"]["Score"] == 2 for v in verdicts)
    nes = report(rd)["result"]["nes"]
    assert all(h["weighted_nes"] == 2.0 for h in nes.values())
    assert (rd / "audit.jsonl").exists()

    code, _, _ = call(capsys, "stats", *common, "--verdicts", rd / "verdicts.jsonl", "--out", rd / "nes.csv")
    assert code == OK
    table = list(csv.DictReader((rd / "nes.csv").open()))
    assert {r["method"] for r in table} <= {"wir", "mhm"} and all(r["Avg"] == "2.00" for r in table)

    code, _, _ = call(capsys, "stats", *common, "--verdicts", rd / "verdicts.jsonl",
                      "--compare", rd / "verdicts.jsonl", "--out", rd / "agree.csv")
    assert code == OK
    agree = list(csv.DictReader((rd / "agree.csv").open()))
    assert all(r["exact"] == "100.00" and r["mad"] == "0.0000" for r in agree)

    code, _, _ = call(capsys, "metrics", *common, "--pairs", rd / "adv.jsonl", "--corpus", workspace / "train.jsonl",
                      "--out", rd / "metrics.csv")
    assert code == OK
    metrics = list(csv.DictReader((rd / "metrics.csv").open()))
    assert len(metrics) == n_success + 1 and metrics[-1]["id"] == "mean"
    assert all(0 < float(m["icr"]) <= 1 and float(m["ppl"]) >= 1 for m in metrics)

    code, _, _ = call(capsys, "defend", *common, "--in", rd / "adv.jsonl", "--mock-judge", "constant:3",
                      "--purifier", "inverse")
    assert code == OK
    assert report(rd)["result"]["defense"]["overall"]["rate"] == 1.0

    code, _, _ = call(capsys, "export-instructions", *common, "--in", rd / "purified.jsonl", "--task", "purify",
                      "--recheck")
    assert code == OK
    assert report(rd)["result"]["included"] == n_success
    assert len(list(iter_jsonl(rd / "instructions_purify.jsonl"))) == n_success

    code, _, _ = call(capsys, "export-instructions", *common, "--in", rd / "verdicts.jsonl", "--task", "eval")
    assert code == OK and len(list(iter_jsonl(rd / "instructions_eval.jsonl"))) == n_success

    code, out, _ = call(capsys, "misclassify", *common, "--input", workspace / "eval.jsonl",
                        "--mock-judge", "digit-suffix", "--out", rd / "mis.csv")
    assert code == OK
    assert json.loads(out)["java"]["rates"] == {"1": 0.0, "2": 0.0, "3": 0.0, "4": 1.0}

    rep = report(rd)
    assert REPORT_KEYS <= set(rep)
    assert {"attack", "judge", "stats", "metrics", "defend", "export-instructions", "misclassify"} <= set(rep["results"])


def test_judge_failures_give_partial_exit(workspace, capsys):
    cfg = workspace / "idsub.json"
    rd = workspace / "runs" / "p"
    call(capsys, "attack", "--config", cfg, "--run-dir", rd, "--method", "wir", "--victim", "toy",
         "--input", workspace / "eval.jsonl")
    fast = json.loads(cfg.read_text())
    fast["judge"] = {"max_retries": 0, "backoff": 0, "timeout_ms": 2000}
    (workspace / "fast.json").write_text(json.dumps(fast))
    code, _, _ = call(capsys, "judge", "--config", workspace / "fast.json", "--run-dir", rd, "--in", rd / "adv.jsonl",
                      "--judge-url", "http://127.0.0.1:9/unreachable")
    # the unreachable endpoint fails per record, so the stage finishes partially
    assert code == PARTIAL
    assert all(v["annotation"] == "failed" for v in iter_jsonl(rd / "verdicts.jsonl"))


def test_console_entry_point(tmp_path):
    src = tmp_path / "x.c"
    src.write_text("int f(int a2) { return a2; }")
    proc = subprocess.run(
        [sys.executable, "-m", "idsub.cli", "detect", "--in", str(src), "--mock-judge", "digit-suffix",
         "--delta", "1", "--run-dir", str(tmp_path / "r")],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout) == {"flagged": True, "score": 1}


def _schema(rep):
    result = rep["result"] or {}
    return {"top": sorted(rep), "result": sorted(result)}


def _run_every_command(workspace, capsys):
    cfg = workspace / "idsub.json"
    src = workspace / "snippet.java"
    src.write_text((FIX / "swap_adversarial.java").read_text())
    adv = workspace / "runs" / "attack" / "adv.jsonl"
    verdicts = workspace / "runs" / "judge" / "verdicts.jsonl"
    purified = workspace / "runs" / "defend" / "purified.jsonl"
    commands = {
        "attack": ["--method", "wir", "--victim", "toy", "--input", workspace / "eval.jsonl"],
        "judge": ["--in", adv, "--mock-judge", "constant:2"],
        "purify": ["--in", src, "--mock-judge", "constant:2"],
        "detect": ["--in", src, "--mock-judge", "constant:2"],
        "defend": ["--in", adv, "--mock-judge", "constant:2", "--purifier", "inverse"],
        "misclassify": ["--input", workspace / "eval.jsonl", "--mock-judge", "digit-suffix"],
        "metrics": ["--pairs", adv],
        "stats": ["--verdicts", verdicts],
        "export-instructions": ["--in", purified, "--task", "purify"],
    }
    schemas = {}
    for name, extra in commands.items():
        rd = workspace / "runs" / name.split("-")[0]
        code, _, err = call(capsys, name, "--config", cfg, "--run-dir", rd, *extra)
        assert code == OK, (name, err)
        schemas[name] = _schema(report(rd))
    return schemas


def test_report_schema_of_every_command_matches_golden(workspace, capsys):
    golden = json.loads((Path(__file__).parent / "golden" / "report_schema.json").read_text())
    assert _run_every_command(workspace, capsys) == golden


def test_attack_is_deterministic_given_seed(workspace, capsys):
    outputs = []
    for name in ("a", "b"):
        rd = workspace / "runs" / name
        code, _, _ = call(capsys, "attack", "--config", workspace / "idsub.json", "--run-dir", rd, "--method", "mhm",
                          "--victim", "toy", "--input", workspace / "eval.jsonl", "--seed", 11, "--jobs", 3)
        assert code == OK
        outputs.append((rd / "adv.jsonl").read_bytes())
    assert outputs[0] == outputs[1]
