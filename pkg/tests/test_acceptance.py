"""Acceptance gate: one PASS/FAIL line per criterion, at its stated tolerance.

Criteria 1-8 run in-process with a fixed seed; criterion 9 runs the
``selftest`` command twice in fresh interpreters with different hash seeds.
"""

import os
import subprocess
import sys
import time

import pytest

from infmat import acceptance as acc
from infmat.cli import cmd_selftest
from infmat.mutations import MUTATIONS, bracket_sign_flip, criterion_8

from conftest import ACCEPTANCE_LINES

SEED = 42
RESULTS: dict = {}


def record(result, elapsed=None, budget=None):
    ok = result.passed and (budget is None or elapsed < budget)
    timing = "" if elapsed is None else f" [{elapsed:.1f}s" + (f" < {budget}s]" if budget else "]")
    line = f"{result.key:<4} {'PASS' if ok else 'FAIL'}  {result.title}: {result.detail}{timing}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    RESULTS[result.key] = result
    return ok


def timed(fn, *args, **kwargs):
    start = time.perf_counter()
    result = fn(*args, **kwargs)
    return result, time.perf_counter() - start


@pytest.fixture(scope="module")
def c1_runs():
    runs = {}
    for ring in acc.ASSOCIATIVE_RINGS:
        runs[ring.name] = timed(acc.criterion_1, SEED, rings=(ring,))
    return runs


@pytest.mark.parametrize("ring", [r.name for r in acc.ASSOCIATIVE_RINGS])
def test_c1_associative_round_trip(c1_runs, ring):
    result, elapsed = c1_runs[ring]
    assert result.data["corpus"][ring] and len(result.data["corpus"][ring]) == 100
    result = acc.CriterionResult("C1", f"associative round-trip over {ring}", result.passed,
                                 result.detail)
    assert record(result, elapsed, 30)


def test_c2_diagonal_correction():
    assert record(acc.criterion_2())


def test_c3_shape_predicate():
    result, elapsed = timed(acc.criterion_3, SEED)
    assert "1536" in result.detail  # 2^9 support patterns x 3 choices of k
    assert record(result, elapsed, 5)


def test_c4_row_finiteness_detection():
    result, elapsed = timed(acc.criterion_4, SEED)
    assert record(result, elapsed, 5)


def test_c5_trivial_residuals(c1_runs):
    corpus = {}
    for result, _ in c1_runs.values():
        corpus.update(result.data["corpus"])
    assert record(acc.criterion_5(corpus))


def test_c6_sl_membership():
    result, elapsed = timed(acc.criterion_6, SEED)
    assert record(result, elapsed, 60)


def test_c7_lie_round_trip():
    result, elapsed = timed(acc.criterion_7, SEED)
    assert record(result, elapsed, 60)


def test_c8_mutation_sensitivity():
    result = criterion_8(SEED)
    assert set(MUTATIONS) == {"bracket-sign-flip", "dropped-correction", "skipped-antisymmetry"}
    assert record(result)


def _selftest(seed, hashseed):
    env = dict(os.environ, PYTHONHASHSEED=str(hashseed))
    return subprocess.run([sys.executable, "-m", "infmat", "selftest", "--seed", str(seed)],
                          capture_output=True, env=env, check=False, timeout=600)


def test_c9_selftest_determinism():
    first, second = _selftest(7, 1), _selftest(7, 2)
    same = first.stdout == second.stdout and first.returncode == second.returncode == 0
    lines = first.stdout.decode().splitlines()
    detail = f"{len(lines)} lines, exit {first.returncode}, " + ("byte-identical" if same else "differ")
    assert record(acc.CriterionResult("C9", "selftest determinism", same, detail))
    assert lines[-1] == "10/10 suites passed"


def test_supporting_suites():
    assert record(acc.ring_axioms_suite(SEED))
    assert record(acc.bracket_suite(SEED))


def test_selftest_fails_under_planted_bracket_sign_error(monkeypatch, capsys):
    with bracket_sign_flip():
        broken = acc.bracket_suite(SEED)
    assert not broken.passed
    import infmat.acceptance
    monkeypatch.setattr(infmat.acceptance, "run_suite", lambda seed: [broken])

    class Args:
        seed = SEED

    assert cmd_selftest(Args()) != 0
    assert "FAIL" in capsys.readouterr().out
