"""Acceptance criteria 1-10.

Each criterion prints one ``PASS``/``FAIL`` line with its runtime and key
metrics.  Run directly (``python3 tests/test_acceptance.py``) for the table
alone, or through pytest.
"""
from __future__ import annotations

import os
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import pytest

from sphermean import suites

# (number, label, runtime budget in seconds, callable returning CheckResults)
CRITERIA = [
    (1, "special functions", 1.0, lambda: [suites.check_special_functions()]),
    (2, "multiplier equivalence", 10.0, lambda: [suites.check_multiplier_equivalence()]),
    (3, "representation residual and refinement", 30.0, lambda: [suites.check_representation()]),
    (4, "zero-ring vanishing", 10.0, lambda: [suites.check_zero_rings()]),
    (5, "counterexample means, product identity, tails", 30.0, lambda: [suites.check_zalcman(7)]),
    (6, "Abel pair, ridge bound, identity, onset", 30.0, lambda: [suites.check_abel(7)]),
    (7, "R-convexity vs brute force", 60.0, lambda: [suites.check_rconvex(7)]),
    (8, "support harness and round trip", 60.0, lambda: [suites.check_support(7)]),
    (9, "R-convex walk", 60.0, lambda: [suites.check_rconvex_walk(7)]),
]

# the criteria are stated for a laptop; slow shared runners may opt out
ENFORCE_RUNTIME = os.environ.get("SPHERMEAN_SKIP_RUNTIME", "") == ""


def _line(number, label, ok, elapsed, budget, detail=""):
    status = "PASS" if ok else "FAIL"
    return f"criterion {number:2d} {status} ({elapsed:6.2f} s / {budget:g} s) {label}{detail}"


def _summary(checks):
    parts = []
    for c in checks:
        flat = {}
        for k, v in c.metrics.items():
            items = v.items() if isinstance(v, dict) else [("", v)]
            for kk, vv in items:
                if isinstance(vv, list) and vv and all(isinstance(x, float) for x in vv):
                    vv = max(vv)
                if isinstance(vv, (int, float, str, bool)):
                    flat[f"{k}.{kk}" if kk else k] = vv
        keys = list(flat)[:3]
        parts.append(", ".join(f"{k}={flat[k]:.3g}" if isinstance(flat[k], float) else f"{k}={flat[k]}"
                               for k in keys))
    return ": " + "; ".join(p for p in parts if p) if parts else ""


def evaluate(number):
    _, label, budget, fn = CRITERIA[number - 1]
    t = time.perf_counter()
    checks = fn()
    elapsed = time.perf_counter() - t
    passed = all(c.passed for c in checks)
    in_time = elapsed <= budget or not ENFORCE_RUNTIME
    return passed, in_time, elapsed, _line(number, label, passed and in_time, elapsed, budget,
                                           _summary(checks)), checks


def _run_verify_all(path):
    cmd = [sys.executable, "-m", "sphermean", "verify", "all", "--seed", "7", "--report", str(path)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    return proc.returncode, proc.stderr


def evaluate_determinism():
    t = time.perf_counter()
    with tempfile.TemporaryDirectory() as tmp:
        a, b = Path(tmp) / "a.json", Path(tmp) / "b.json"
        code_a, err_a = _run_verify_all(a)
        code_b, err_b = _run_verify_all(b)
        same = a.exists() and b.exists() and a.read_bytes() == b.read_bytes()
    elapsed = time.perf_counter() - t
    # budget covers one full suite; two runs are made here
    in_time = elapsed / 2 <= 300.0 or not ENFORCE_RUNTIME
    ok = same and code_a == 0 and code_b == 0
    detail = f": identical={same}, exit codes {code_a}/{code_b}, time is per run"
    return ok, in_time, elapsed, _line(10, "verify all determinism", ok and in_time, elapsed / 2, 300, detail), \
        (err_a + err_b)


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA])
def test_criterion(number, capsys):
    passed, in_time, elapsed, line, checks = evaluate(number)
    with capsys.disabled():
        print("\n" + line)
    assert passed, [(c.name, c.metrics) for c in checks if not c.passed]
    assert in_time, f"runtime {elapsed:.1f} s over budget"


def test_criterion_10_determinism(capsys):
    ok, in_time, elapsed, line, stderr = evaluate_determinism()
    with capsys.disabled():
        print("\n" + line)
    assert ok, stderr
    assert in_time, f"two runs took {elapsed:.1f} s"


if __name__ == "__main__":
    failures = 0
    for c in CRITERIA:
        passed, in_time, _, line, _ = evaluate(c[0])
        print(line, flush=True)
        failures += not (passed and in_time)
    ok, in_time, _, line, _ = evaluate_determinism()
    print(line, flush=True)
    failures += not (ok and in_time)
    sys.exit(1 if failures else 0)
