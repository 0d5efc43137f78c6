"""Seeded acceptance suites, shared by the test-suite and ``infmat selftest``.

Each criterion returns a :class:`CriterionResult`.  Expected values are
computed by routes independent of the engine under test: products are
formed with ``mul``/``sub`` rather than ``bracket``, and spans of
commutators are enumerated by brute force.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from . import matrices as mx
from .derivations import (REQUIRED_CHECKS, Ambient, MatrixDerivation, decompose, inner, lift,
                          lemma3_row_probe)
from .lie import (LIE_REQUIRED_CHECKS, SlMembershipOracle, lie_decompose, lie_inner, lie_lift,
                  probe_matrix, sl_member)
from .matrices import FiniteMatrix
from .rings import (Integers, IntegersMod, Matrix2Mod, PolynomialsZ, Ring, check_ring_axioms,
                    commutator)


@dataclass
class CriterionResult:
    key: str
    title: str
    passed: bool
    detail: str = ""
    data: dict = field(default_factory=dict, repr=False)

    def line(self) -> str:
        return f"{self.key:<4} {self.title:<44} {'PASS' if self.passed else 'FAIL'}  {self.detail}"


def _rng(seed, *tags) -> random.Random:
    return random.Random(":".join(str(t) for t in (seed, *tags)))


def random_rcf_part(ring: Ring, rng: random.Random, support: int = 8):
    """A finite matrix on a ``support``-square window, plus optional shift
    and affine diagonal components."""
    entries = {}
    for _ in range(rng.randint(0, 12)):
        entries[(rng.randrange(support), rng.randrange(support))] = ring.random_element(rng)
    a = FiniteMatrix(ring, entries)
    if rng.random() < 0.5:
        s = ring.random_element(rng)
        a = mx.add(a, mx.shift(ring, s))
    if rng.random() < 0.5:
        alpha, beta = ring.random_element(rng), ring.random_element(rng)
        a = mx.add(a, mx.diag(ring, lambda i: ring.add(ring.mul(alpha, ring.from_int(i)), beta)))
    return a


def _lifted(u, x: FiniteMatrix) -> FiniteMatrix:
    return FiniteMatrix(x.ring, {key: u(r) for key, r in x.items()})


def _ad_by_products(a, x, u, n):
    """Window of ``a x - x a + u(x)`` computed without ``bracket``."""
    return mx.window_of(mx.add(mx.sub(mx.mul(a, x), mx.mul(x, a)), _lifted(u, x)), n)


# -- criterion 1 and 5 --------------------------------------------------------------

ASSOCIATIVE_RINGS = (Integers(), IntegersMod(6), PolynomialsZ(), Matrix2Mod(3))


def two_sided_box(ring: Ring, rng: random.Random) -> MatrixDerivation:
    """``x -> A x - x B`` with ``A - B = e_01(1)``: satisfies the matching-index
    Leibniz instances and the shape test but not the antisymmetry relation."""
    a = FiniteMatrix(ring, {(i, j): ring.random_element(rng) for i in range(3) for j in range(3)})
    b = mx.sub(a, mx.unit(ring, 0, 1, ring.one()))
    return MatrixDerivation(ring, Ambient.M_INF,
                            lambda i, j, r: mx.sub(mx.mul(a, mx.unit(ring, i, j, r)),
                                                   mx.mul(mx.unit(ring, i, j, r), b)),
                            name="two-sided")


def criterion_1(seed: int = 0, count: int = 100, window: int = 8, trials: int = 4,
                fail_fast: bool = False, rings=ASSOCIATIVE_RINGS) -> CriterionResult:
    corpus, failures, total = {}, [], 0
    for ring in rings:
        rng = _rng(seed, "c1", ring.name)
        reports = []
        for t in range(count):
            a, u = random_rcf_part(ring, rng), ring.random_derivation(rng)
            report = decompose(inner(a) + lift(u, check=False), window, seed + t, trials)
            reports.append(report)
            total += 1
            problem = None
            if not report.decomposed:
                problem = f"status {report.status} {report.failed_checks()} {report.reason}"
            elif [c for c in REQUIRED_CHECKS if report.checks.get(c) is None
                  or report.checks[c].status not in ("pass",)]:
                problem = "missing checks"
            else:
                for i, j in itertools.product(range(window), repeat=2):
                    for r in report.samples:
                        x = mx.unit(ring, i, j, r)
                        if _ad_by_products(a, x, u, window) != _ad_by_products(
                                report.assembled(), x, report.residual, window):
                            problem = f"mismatch at e_{i}{j}"
                            break
                    if problem:
                        break
            if problem:
                failures.append(f"{ring.name}#{t}: {problem}")
                if fail_fast:
                    return CriterionResult("C1", "associative round-trip", False, failures[0])
        corpus[ring.name] = reports
        # negative control: only the antisymmetry relation exposes this box
        neg = decompose(two_sided_box(ring, rng), window, seed, trials)
        if "antisymmetry" not in neg.failed_checks():
            failures.append(f"{ring.name}: two-sided box not refuted by antisymmetry")
            if fail_fast:
                return CriterionResult("C1", "associative round-trip", False, failures[-1])
    detail = f"{total - len(failures)}/{total} round trips" if not failures else failures[0]
    return CriterionResult("C1", "associative round-trip", not failures, detail, {"corpus": corpus})


def criterion_5(corpus: dict) -> CriterionResult:
    checked = 0
    for name, elements in (("Z", range(-20, 21)), ("Z/6", range(6))):
        for report in corpus.get(name, []):
            if not report.decomposed:
                return CriterionResult("C5", "Der(Z), Der(Z/n) trivial", False, f"{name}: undecomposed")
            for r in elements:
                if report.residual(r) != 0:
                    return CriterionResult("C5", "Der(Z), Der(Z/n) trivial", False,
                                           f"{name}: residual({r}) = {report.residual(r)}")
            checked += 1
    if checked == 0:
        return CriterionResult("C5", "Der(Z), Der(Z/n) trivial", False, "empty corpus")
    return CriterionResult("C5", "Der(Z), Der(Z/n) trivial", True, f"{checked} residuals are zero")


# -- criterion 2 ----------------------------------------------------------------------

def criterion_2(window: int = 8) -> CriterionResult:
    ring = Integers()
    report = decompose(inner(mx.diag(ring, lambda i: i)), window, 0, 4, i0=0)
    ok = (report.decomposed and not report.v
          and report.correction == {i: i for i in range(window)}
          and all(report.residual(r) == 0 for r in range(-10, 11)))
    detail = "v = 0, c(i) = i, u = 0" if ok else (
        f"status {report.status}, v={report.v!r}, c={report.correction}")
    return CriterionResult("C2", "diagonal-correction regression", ok, detail)


# -- criterion 3 ----------------------------------------------------------------------

def _dense_identity_holds(a: list, k: int, n: int = 4) -> bool:
    # e_kk A + A e_kk computed on nested lists over Z/4
    e = [[1 if i == j == k else 0 for j in range(3)] for i in range(3)]
    prod = lambda x, y: [[sum(x[i][m] * y[m][j] for m in range(3)) % n for j in range(3)]
                         for i in range(3)]
    ea, ae = prod(e, a), prod(a, e)
    return all((ea[i][j] + ae[i][j]) % n == a[i][j] for i in range(3) for j in range(3))


def criterion_3(seed: int = 0) -> CriterionResult:
    ring = IntegersMod(4)
    rng = _rng(seed, "c3")
    cells = list(itertools.product(range(3), repeat=2))
    checked = 0
    for mask in range(1 << 9):
        dense = [[0] * 3 for _ in range(3)]
        for bit, (i, j) in enumerate(cells):
            if mask >> bit & 1:
                dense[i][j] = rng.randrange(1, 4)
        a = FiniteMatrix(ring, {(i, j): dense[i][j] for i, j in cells})
        for k in range(3):
            try:
                got = mx.lemma1_shape(a, k)
            except AssertionError as exc:
                return CriterionResult("C3", "shape predicate equivalence", False, str(exc))
            if got != _dense_identity_holds(dense, k):
                return CriterionResult("C3", "shape predicate equivalence", False,
                                       f"mask {mask:09b}, k={k}")
            checked += 1
    return CriterionResult("C3", "shape predicate equivalence", True, f"{checked} cases agree")


# -- criterion 4 ----------------------------------------------------------------------

def criterion_4(seed: int = 0, max_window: int = 32) -> CriterionResult:
    ring = Integers()
    title = "row-finiteness detection"
    r0 = mx.ones_row(ring, 0)
    for n in range(4, max_window + 1):
        probe = lemma3_row_probe(r0, n)
        if probe or probe.witness_row != 0:
            return CriterionResult("C4", title, False, f"ones_row not flagged on window {n}")
    rng = _rng(seed, "c4")
    finite = [FiniteMatrix(ring, {(rng.randrange(8), rng.randrange(8)): rng.randint(-5, 5)
                                  for _ in range(rng.randint(0, 20))}) for _ in range(4)]
    finite.append(FiniteMatrix(ring, {(0, j): 1 for j in range(8)}))
    passers = [mx.shift(ring), mx.diag(ring, lambda i: i), mx.identity(ring), *finite]
    windows = sorted(set(range(1, 9)) | {12, 16, 24, max_window})
    for a in passers:
        for n in windows:
            if not lemma3_row_probe(a, n):
                return CriterionResult("C4", title, False, f"{a!r} flagged on window {n}")
    return CriterionResult("C4", title, True,
                           f"ones_row flagged on windows 4..{max_window}; {len(passers)} rcf operators pass")


# -- criterion 6 ----------------------------------------------------------------------

def additive_span(ring: Ring, generators) -> set:
    """Additive subgroup generated by ``generators`` in a finite ring."""
    span = {ring.zero()}
    gens = set(generators)
    frontier = set(span)
    while frontier:
        new = {ring.add(s, g) for s in frontier for g in gens} - span
        span |= new
        frontier = new
    return span


def criterion_6(seed: int = 0, count: int = 200) -> CriterionResult:
    title = "sl membership oracle vs brute force"
    details = []
    for ring in (IntegersMod(2), IntegersMod(6), Matrix2Mod(3)):
        elements = list(ring.elements())
        span = additive_span(ring, {commutator(ring, r, s) for r in elements for s in elements})
        oracle = SlMembershipOracle(ring)
        rng = _rng(seed, "c6", ring.name)
        hits = 0
        for _ in range(count):
            x = FiniteMatrix(ring, {(rng.randrange(5), rng.randrange(5)): rng.choice(elements)
                                    for _ in range(rng.randint(0, 8))})
            expected = mx.trace(x) in span
            if sl_member(x, oracle) != expected:
                return CriterionResult("C6", title, False, f"{ring.name}: disagreement on {x!r}")
            hits += expected
        details.append(f"{ring.name}: |span|={len(span)}, {hits}/{count} members")
    return CriterionResult("C6", title, True, "; ".join(details))


# -- criterion 7 ----------------------------------------------------------------------

def criterion_7(seed: int = 0, count: int = 50, window: int = 6, reservoir: int = 16,
                trials: int = 4, fail_fast: bool = False) -> CriterionResult:
    title = "Lie round-trip"
    failures, total = [], 0
    for ring in (IntegersMod(3), Matrix2Mod(3)):
        rng = _rng(seed, "c7", ring.name)
        for t in range(count):
            a, u = random_rcf_part(ring, rng), ring.random_derivation(rng)
            report = lie_decompose(lie_inner(a) + lie_lift(u), window, seed + t, trials,
                                   reservoir=reservoir)
            total += 1
            problem = None
            if not report.decomposed:
                problem = f"status {report.status} {report.failed_checks()} {report.reason}"
            elif any(report.checks.get(c) is None or report.checks[c].status != "pass"
                     for c in LIE_REQUIRED_CHECKS):
                problem = "missing checks"
            else:
                probes = [("unit", i, j, r) for r in report.samples
                          for i in range(window) for j in range(window) if i != j]
                probes += [("diff", k, reservoir) for k in range(window)]
                probes += [("diff", k, l) for k in range(window) for l in range(k + 1, window)]
                for p in probes:
                    x = probe_matrix(ring, p)
                    if _ad_by_products(a, x, u, window) != _ad_by_products(
                            report.assembled(), x, report.residual, window):
                        problem = f"mismatch at {p[:3]}"
                        break
            if problem:
                failures.append(f"{ring.name}#{t}: {problem}")
                if fail_fast:
                    return CriterionResult("C7", title, False, failures[0])
    ring = Integers()
    rng = _rng(seed, "c7", ring.name)
    for t in range(5):
        report = lie_decompose(lie_inner(random_rcf_part(ring, rng)), window, seed + t, trials,
                               reservoir=reservoir)
        if report.status != "unsupported" or report.applicability != "half absent":
            failures.append(f"Z#{t}: expected unsupported, got {report.status}")
    detail = f"{total}/{total} round trips; Z gated (no 1/2)" if not failures else failures[0]
    return CriterionResult("C7", title, not failures, detail)


# -- structural suites used by selftest ------------------------------------------------

SELFTEST_RINGS = (Integers(), IntegersMod(2), IntegersMod(6), PolynomialsZ(),
                  Matrix2Mod(2), Matrix2Mod(3))


def ring_axioms_suite(seed: int = 0) -> CriterionResult:
    bad = [f"{ring.name}: {d.check}" for ring in SELFTEST_RINGS
           for d in check_ring_axioms(ring, seed, 200)]
    return CriterionResult("R", "ring axioms", not bad,
                           bad[0] if bad else f"{len(SELFTEST_RINGS)} rings")


def bracket_suite(seed: int = 0) -> CriterionResult:
    """Matrix-unit relations and bracket examples against hand values."""
    ring = Integers()
    e = lambda i, j, r=1: mx.unit(ring, i, j, r)
    S = mx.shift(ring)
    # row 0 of the shift is empty, so [S, e_00] has no e_01 term
    cases = [
        (mx.bracket(S, e(0, 0)), e(1, 0)),
        (mx.bracket(S, e(1, 1)), mx.sub(e(2, 1), e(1, 0))),
        (mx.bracket(e(0, 1), e(1, 1)), e(0, 1)),
        (mx.bracket(e(0, 1), e(1, 0)), mx.sub(e(0, 0), e(1, 1))),
        (mx.bracket(e(0, 0), e(0, 0)), mx.zero_matrix(ring)),
    ]
    bad = [k for k, (got, want) in enumerate(cases) if got != want]
    rng = _rng(seed, "bracket")
    for ring2 in (Integers(), Matrix2Mod(3)):
        for _ in range(50):
            i, k, j, l = (rng.randrange(4) for _ in range(4))
            a, b = ring2.random_element(rng), ring2.random_element(rng)
            lhs = mx.mul(mx.unit(ring2, i, k, a), mx.unit(ring2, l, j, b))
            want = mx.unit(ring2, i, j, ring2.mul(a, b)) if k == l else mx.zero_matrix(ring2)
            if lhs != want:
                bad.append(f"unit product {(i, k, l, j)}")
    return CriterionResult("B", "matrix units and bracket", not bad,
                           f"case {bad[0]} failed" if bad else f"{len(cases)} brackets, 100 unit products")


def run_suite(seed: int = 0, include_mutations: bool = True) -> list[CriterionResult]:
    from .mutations import criterion_8

    results = [ring_axioms_suite(seed), bracket_suite(seed)]
    c1 = criterion_1(seed)
    results += [c1, criterion_2(), criterion_3(seed), criterion_4(seed),
                criterion_5(c1.data["corpus"]), criterion_6(seed), criterion_7(seed)]
    if include_mutations:
        results.append(criterion_8(seed))
    return results
