"""Planted defects for checking that the acceptance suites can fail.

Each mutation is a context manager that patches one piece of the engine
for the duration of the block.
"""

from __future__ import annotations

import contextlib
from unittest import mock

from . import derivations, lie
from . import matrices as mx
from .rings import CoefficientDerivation


def _flipped_bracket(a, b):
    return mx.sub(mx.mul(b, a), mx.mul(a, b))


def _uncorrected(d_prime, window, i0=0, *, ring, seed=0, trials=4, offdiag_only=False):
    # takes d_ij(1) = 0 for granted: no diagonal correction, u read off one pair
    others = [i for i in range(window) if i != i0]
    base = (others[0], i0) if others else (i0, i0)
    m = derivations.coefficient_map(d_prime, *base, ring, check_diagonal=not offdiag_only)
    return {i: ring.zero() for i in range(window)}, CoefficientDerivation(ring, m, f"d{base}")


@contextlib.contextmanager
def bracket_sign_flip():
    with mock.patch.object(mx, "bracket", _flipped_bracket):
        yield


@contextlib.contextmanager
def dropped_correction():
    with mock.patch.object(derivations, "cocycle_correct", _uncorrected), \
            mock.patch.object(lie, "cocycle_correct", _uncorrected):
        yield


@contextlib.contextmanager
def skipped_antisymmetry():
    checks = {k: v for k, v in derivations.VALIDATION_CHECKS.items() if k != "antisymmetry"}
    with mock.patch.object(derivations, "VALIDATION_CHECKS", checks):
        yield


MUTATIONS = {
    "bracket-sign-flip": bracket_sign_flip,
    "dropped-correction": dropped_correction,
    "skipped-antisymmetry": skipped_antisymmetry,
}


def criteria_under(mutation: str, seed: int = 0) -> list:
    """Criteria 1-4 (cheapest first, stopping at the first failure) under a mutation."""
    from . import acceptance as acc

    runs = [acc.criterion_2, lambda: acc.criterion_3(seed), lambda: acc.criterion_4(seed),
            lambda: acc.criterion_1(seed, fail_fast=True)]
    results = []
    with MUTATIONS[mutation]():
        for run in runs:
            results.append(run())
            if not results[-1].passed:
                break
    return results


def criterion_8(seed: int = 0):
    from .acceptance import CriterionResult

    caught = {}
    for name in MUTATIONS:
        failed = [r.key for r in criteria_under(name, seed) if not r.passed]
        caught[name] = failed
    missed = [name for name, failed in caught.items() if not failed]
    detail = "; ".join(f"{name} -> {','.join(failed) or 'undetected'}" for name, failed in caught.items())
    return CriterionResult("C8", "mutation sensitivity", not missed, detail)
