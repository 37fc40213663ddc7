"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

The lines are printed in the terminal summary (see conftest.py) so they show up
even when output capture is on.
"""
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

import acceptance_checks as checks

LINES: dict[int, str] = {}
OUTCOMES: dict[str, checks.Outcome] = {}


def run(index, check):
    res = check()
    OUTCOMES[check.__name__] = res
    LINES[index] = res.line(index)
    print(LINES[index])
    return res


@pytest.mark.parametrize("index,check", list(enumerate(checks.CHECKS, 1)), ids=lambda x: getattr(x, "__name__", str(x)))
def test_criterion(index, check):
    res = run(index, check)
    assert res.passed, res.detail


def test_determinism():
    """A second run in a fresh interpreter (different hash seed) reproduces every artifact byte for byte."""
    here = {}
    for check in checks.CHECKS:
        res = OUTCOMES.get(check.__name__) or check()
        here[f"verdict/{check.__name__}"] = checks.digest(f"{res.passed} {res.detail}")
        here.update({k: checks.digest(v) for k, v in res.artifacts.items()})
    here.update({k: checks.digest(v) for k, v in checks.emitted_bundles().items()})

    env = dict(os.environ, PYTHONHASHSEED="12345")
    script = Path(__file__).with_name("acceptance_checks.py")
    proc = subprocess.run([sys.executable, str(script)], capture_output=True, text=True, env=env, check=True)
    there = json.loads(proc.stdout)
    differ = sorted(k for k in here.keys() | there.keys() if here.get(k) != there.get(k))
    n_files = sum(1 for k in here if k.startswith("emit/"))
    ok = not differ
    LINES[11] = (f"[criterion 11] {'PASS' if ok else 'FAIL'} determinism: {len(here)} artifacts "
                 f"({n_files} emitted files) compared across two runs, {len(differ)} differ"
                 + (f" (first: {differ[0]})" if differ else ""))
    print(LINES[11])
    assert ok, differ[:10]
