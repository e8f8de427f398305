#!/usr/bin/env python3
"""End-to-end checks of the rsodc command line: exit codes, file layout and JSON schemas.

Usage: cli_contract.py <rsodc binary> <schemas dir>
"""
import csv
import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema

TOOL = sys.argv[1]
SCHEMAS = Path(sys.argv[2])
failures = []


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what)
    if not cond:
        failures.append(what)


def run(*args):
    return subprocess.run([TOOL, *map(str, args)], capture_output=True, text=True)


def validate(path, schema):
    try:
        jsonschema.validate(json.loads(path.read_text()), json.loads((SCHEMAS / schema).read_text()))
        check(True, f"{path.name} matches {schema}")
    except (jsonschema.ValidationError, OSError, json.JSONDecodeError) as e:
        check(False, f"{path.name} matches {schema}: {str(e).splitlines()[0]}")


def read_csv(path):
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    return rows[0], rows[1:]


with tempfile.TemporaryDirectory() as tmp:
    root = Path(tmp)

    r = run("simulate", "--design", 1, "--replicates", 1, "--n", 60, "--p", 20, "--true-k", 3,
            "--theta", 2.2, "--xi", 0.5, "--seed", 3, "--save-data", "--threads", 1, "--out", root / "sim")
    check(r.returncode == 0, "simulate design 1 exits 0")
    validate(root / "sim" / "summary.json", "simulate_summary.schema.json")
    data = next((root / "sim" / "data").glob("*_rep1.csv"))
    truth = data.with_name(data.stem + "_truth.csv")
    check(truth.exists(), "--save-data writes the truth labels")

    r = run("fit", data, "--k", 3, "--seed", 1, "--threads", 1, "--out", root / "fit")
    check(r.returncode == 0, "fit exits 0")
    validate(root / "fit" / "fit.json", "fit.schema.json")
    fit = json.loads((root / "fit" / "fit.json").read_text())
    check(fit["method"] == "rsodc", "positive gamma reports rsodc")
    check(len(set(fit["labels"])) == 3, "k = 3 gives three distinct labels")
    header, rows = read_csv(root / "fit" / "embedding.csv")
    check(header[-1] == "label" and len(rows) == 60, "embedding.csv has one row per subject and a label column")
    worst = max(abs(float(v) - e) for row, emb in zip(rows, fit["embedding"]) for v, e in zip(row[:-1], emb))
    check(worst <= 1e-12, f"embedding.csv round-trips fit.json (max deviation {worst:.3g})")
    check([int(row[-1]) for row in rows] == fit["labels"], "embedding.csv labels match fit.json")

    r = run("fit", data, "--k", 3, "--gamma", 0, "--threads", 1, "--out", root / "sodc")
    check(r.returncode == 0 and json.loads((root / "sodc" / "fit.json").read_text())["method"] == "sodc",
          "--gamma 0 runs sodc")

    r = run("evaluate", "--fit", root / "fit" / "fit.json", "--truth", truth, "--informative", "1,2",
            "--data", data, "--out", root / "eval")
    check(r.returncode == 0, "evaluate exits 0")
    validate(root / "eval" / "metrics.json", "metrics.schema.json")

    r = run("tune", data, "--k", 3, "--eta1-grid", "1,2.5", "--gamma-grid", "0.001", "--rho-grid", "0.01",
            "--repeats", 2, "--threads", 1, "--out", root / "tune")
    check(r.returncode == 0, "tune exits 0")
    validate(root / "tune" / "best_params.json", "best_params.schema.json")
    check((root / "tune" / "cv_table.csv").exists(), "tune writes cv_table.csv")

    r = run("select-k", data, "--k-min", 2, "--k-max", 4, "--mc-samples", 5, "--threads", 1,
            "--out", root / "selk")
    check(r.returncode == 0, "select-k exits 0")
    validate(root / "selk" / "chosen_k.json", "chosen_k.schema.json")

    r = run("simulate", "--design", 2, "--replicates", 2, "--eta1-grid", "2.5", "--gamma-grid", "0.001",
            "--rho-grid", "0.01", "--threads", 1, "--out", root / "sim2")
    check(r.returncode == 0, "simulate design 2 exits 0")
    validate(root / "sim2" / "summary.json", "simulate_summary.schema.json")

    check(run("fit", root / "missing.csv", "--out", root / "x").returncode == 2, "missing input exits 2")
    check(run("fit", data, "--delta", 0, "--out", root / "x").returncode == 2, "delta 0 exits 2")
    check(run("fit", data, "--delta", 60, "--out", root / "x").returncode == 2, "delta >= n exits 2")
    check(run("fit", data, "--k", 1, "--out", root / "x").returncode == 2, "k = 1 exits 2")
    check(run("fit", data, "--v-mode", "other", "--out", root / "x").returncode == 2, "unknown v-mode exits 2")
    check(run("bogus").returncode == 2, "unknown subcommand exits 2")

print(f"{len(failures)} failures")
sys.exit(1 if failures else 0)
