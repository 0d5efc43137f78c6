"""Black-box derivations of matrix rings and their decomposition.

A :class:`MatrixDerivation` is known only through its values on matrix
units ``e_ij(r)``.  :func:`decompose` recovers a representation

    d = ad(v + diag(c)) + lift(u)

on a finite window, where ``v`` has zero diagonal, ``c`` is a diagonal
correction with ``c(i0) = 0`` and ``u`` is a derivation of the
coefficient ring.  Every verdict is scoped to the probed window.
"""

from __future__ import annotations

import itertools
import logging
import random
import threading
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

from . import matrices as mx
from .matrices import ColumnFiniteOperator, FiniteMatrix, RcfOperator
from .rings import (CoefficientDerivation, Diagnostic, Ring, UsageError,
                    check_derivation_law)

log = logging.getLogger(__name__)


class Ambient(str, Enum):
    M_INF = "M_inf"
    M_RCF = "M_rcf"
    M_FULL = "M_full"


class Refuted(Exception):
    """A check proved the probed map is not of the expected form."""

    def __init__(self, check: str, message: str, witness: tuple = ()):
        super().__init__(f"{check}: {message}")
        self.diagnostic = Diagnostic(check, message, witness)


class Inconclusive(Exception):
    """The black box misbehaved (budget, timeout, malformed output, crash)."""


class ProbeBudgetExceeded(Inconclusive):
    pass


def _default_samples(ring: Ring, seed: int, trials: int) -> list:
    return ring.samples(seed, 2 + len(ring.special_elements()) + trials)


class MatrixDerivation:
    """A derivation given by its values on matrix units.

    ``eval_unit(i, j, r)`` must return the value at ``e_ij(r)``: a
    :class:`FiniteMatrix` for ambient ``M_inf``, possibly an operator for
    the larger ambients.  Values are memoized per ``(i, j, r)``.
    """

    def __init__(self, ring: Ring, ambient: Ambient, eval_unit: Callable,
                 *, provenance=None, name: Optional[str] = None,
                 concurrent_safe: bool = False):
        self.ring = ring
        self.ambient = Ambient(ambient)
        self._eval = eval_unit
        self.provenance = provenance
        self.name = name or "derivation"
        self.concurrent_safe = concurrent_safe
        self._memo: dict = {}
        self._lock = threading.Lock()
        self.probes = 0
        self.max_probes: Optional[int] = None
        self.call_timeout: Optional[float] = None

    def __repr__(self) -> str:
        return f"MatrixDerivation[{self.ring}, {self.ambient.value}]({self.name})"

    def __call__(self, i: int, j: int, r):
        key = (i, j, r)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        with self._lock:
            if self.max_probes is not None and self.probes >= self.max_probes:
                raise ProbeBudgetExceeded(f"probe budget of {self.max_probes} exhausted")
            self.probes += 1
        value = self._call_box(i, j, r)
        if not isinstance(value, (FiniteMatrix, ColumnFiniteOperator)) or value.ring != self.ring:
            raise Inconclusive(f"malformed value at e_{i}{j}({r!r}): {value!r}")
        if self.ambient is Ambient.M_INF and not isinstance(value, FiniteMatrix):
            raise Inconclusive(f"value at e_{i}{j}({r!r}) is not finitely supported")
        with self._lock:
            return self._memo.setdefault(key, value)

    def _call_box(self, i, j, r):
        if self.call_timeout is None:
            return self._eval(i, j, r)
        box: dict = {}

        def run():
            try:
                box["value"] = self._eval(i, j, r)
            except BaseException as exc:  # re-raised in the caller
                box["error"] = exc

        worker = threading.Thread(target=run, daemon=True)
        worker.start()
        worker.join(self.call_timeout)
        if worker.is_alive():
            raise Inconclusive(f"probe e_{i}{j} exceeded {self.call_timeout}s")
        if "error" in box:
            raise box["error"]
        return box["value"]

    def prefetch(self, keys, workers: int = 1) -> None:
        """Evaluate many probes, concurrently when the box allows it."""
        keys = [k for k in keys if k not in self._memo]
        if workers > 1 and self.concurrent_safe and keys:
            from concurrent.futures import ThreadPoolExecutor
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(lambda k: self(*k), keys))
        else:
            for k in keys:
                self(*k)

    def evaluate(self, x: FiniteMatrix):
        return evaluate(self, x)

    def __add__(self, other: "MatrixDerivation") -> "MatrixDerivation":
        return derivation_sum(self, other)

    def __neg__(self) -> "MatrixDerivation":
        return MatrixDerivation(self.ring, self.ambient, lambda i, j, r: mx.neg(self(i, j, r)),
                                provenance=("neg", self), name=f"-{self.name}",
                                concurrent_safe=self.concurrent_safe)

    def __sub__(self, other: "MatrixDerivation") -> "MatrixDerivation":
        return derivation_sum(self, -other)


def inner(a, ambient: Ambient = Ambient.M_INF) -> MatrixDerivation:
    """The inner derivation ``x -> a x - x a``.

    For ambients ``M_inf`` and ``M_rcf`` the operator must be row-and-column
    finite, otherwise its values can leave the finite matrices.
    """
    ambient = Ambient(ambient)
    if ambient is not Ambient.M_FULL and not isinstance(a, (FiniteMatrix, RcfOperator)):
        raise UsageError(f"inner derivation of {ambient.value} needs a row-and-column "
                         f"finite operator, got {a!r}")
    ring = a.ring
    return MatrixDerivation(
        ring, ambient, lambda i, j, r: mx.bracket(a, mx.unit(ring, i, j, r)),
        provenance=("inner", a), name=f"ad({mx._name(a)})", concurrent_safe=True)


def lift(u: CoefficientDerivation, ambient: Ambient = Ambient.M_INF,
         check: bool = True) -> MatrixDerivation:
    """Entrywise application of a coefficient derivation."""
    if check:
        problems = check_derivation_law(u)
        if problems:
            raise ValueError(f"{u.name} is not a derivation: {problems[0]}")
    ring = u.ring
    return MatrixDerivation(
        ring, ambient, lambda i, j, r: mx.unit(ring, i, j, u(r)),
        provenance=("lift", u), name=f"lift({u.name})", concurrent_safe=True)


def derivation_sum(*parts: MatrixDerivation) -> MatrixDerivation:
    if not parts:
        raise ValueError("need at least one derivation")
    first = parts[0]
    for d in parts[1:]:
        if d.ring != first.ring or d.ambient != first.ambient:
            raise UsageError(f"cannot add {first!r} and {d!r}")

    def eval_unit(i, j, r):
        total = parts[0](i, j, r)
        for d in parts[1:]:
            total = mx.add(total, d(i, j, r))
        return total

    return MatrixDerivation(first.ring, first.ambient, eval_unit,
                            provenance=("sum", parts),
                            name=" + ".join(d.name for d in parts),
                            concurrent_safe=all(d.concurrent_safe for d in parts))


def evaluate(d: MatrixDerivation, x: FiniteMatrix):
    """``d(x)`` by additivity over the support of ``x``."""
    if x.ring != d.ring:
        raise UsageError("ring mismatch")
    total = mx.zero_matrix(d.ring)
    for (i, j), r in sorted(x.items()):
        total = mx.add(total, d(i, j, r))
    return total


# -- validation ----------------------------------------------------------------

def _check_additivity(d, n, seed, trials, xs):
    ring, rng = d.ring, random.Random(seed)
    for _ in range(4 * trials):
        i, j = rng.randrange(n), rng.randrange(n)
        r, s = rng.choice(xs), rng.choice(xs)
        lhs = d(i, j, ring.add(r, s))
        rhs = mx.add(d(i, j, r), d(i, j, s))
        if not mx.agree(lhs, rhs, n):
            return Diagnostic("additivity", f"d(e_{i}{j}(r+s)) != d(e_{i}{j}(r)) + d(e_{i}{j}(s))",
                              (i, j, r, s))
    return None


def _leibniz_holds(d, n, i, k, l, j, a, b) -> bool:
    ring = d.ring
    x, y = mx.unit(ring, i, k, a), mx.unit(ring, l, j, b)
    lhs = d(i, j, ring.mul(a, b)) if k == l else mx.zero_matrix(ring)
    rhs = mx.add(mx.mul(d(i, k, a), y), mx.mul(x, d(l, j, b)))
    return mx.agree(lhs, rhs, n)


def _check_leibniz(d, n, seed, trials, xs):
    one = d.ring.one()
    for i, k, j in itertools.product(range(n), repeat=3):
        if not _leibniz_holds(d, n, i, k, k, j, one, one):
            return Diagnostic("leibniz", f"d(e_{i}{k} e_{k}{j}) != d(e_{i}{k}) e_{k}{j} + e_{i}{k} d(e_{k}{j})",
                              (i, k, j, one, one))
    rng = random.Random(seed + 1)
    for t in range(6 * trials):
        i, k, j = rng.randrange(n), rng.randrange(n), rng.randrange(n)
        # every third instance uses a mismatched inner index, whose product is zero
        l = rng.randrange(n) if t % 3 == 2 else k
        a, b = rng.choice(xs), rng.choice(xs)
        if not _leibniz_holds(d, n, i, k, l, j, a, b):
            return Diagnostic("leibniz", f"Leibniz rule fails on e_{i}{k}(a), e_{l}{j}(b)",
                              (i, k, l, j, a, b))
    return None


def _check_shape(d, n, seed, trials, xs):
    one = d.ring.one()
    for k in range(n):
        p = d(k, k, one)
        if not mx.lemma1_shape(p if isinstance(p, FiniteMatrix) else mx.window_of(p, n), k):
            return Diagnostic("lemma1_shape", f"d(e_{k}{k}(1)) has entries off row/column {k} "
                              f"or on the diagonal", (k,))
    return None


def _check_antisymmetry(d, n, seed, trials, xs):
    ring, one = d.ring, d.ring.one()
    for p, q in itertools.permutations(range(n), 2):
        s = ring.add(d(p, p, one).entry(p, q), d(q, q, one).entry(p, q))
        if not ring.is_zero(s):
            return Diagnostic("antisymmetry", f"entry ({p},{q}) of d(e_{p}{p}(1)) + d(e_{q}{q}(1)) "
                              f"is nonzero", (p, q, s))
    return None


VALIDATION_CHECKS: dict = {
    "additivity": _check_additivity,
    "leibniz": _check_leibniz,
    "lemma1_shape": _check_shape,
    "antisymmetry": _check_antisymmetry,
}


def _run_validation(d, n, seed, trials) -> dict:
    xs = _default_samples(d.ring, seed, trials)
    return {name: check(d, n, seed, trials, xs) for name, check in VALIDATION_CHECKS.items()}


def validate_derivation(d: MatrixDerivation, window: int, seed: int = 0,
                        trials: int = 4) -> list[Diagnostic]:
    """Sampled derivation checks on the window; empty means none failed."""
    if window < 1 or trials < 1:
        raise ValueError("window and trials must be >= 1")
    return [diag for diag in _run_validation(d, window, seed, trials).values() if diag]


# -- extraction ---------------------------------------------------------------

def extract_v(d: MatrixDerivation, window: int) -> FiniteMatrix:
    """Off-diagonal matrix ``v`` with ``[v, e_kk(1)] = d(e_kk(1))`` on the window.

    Column ``j`` of ``v`` is read from column ``j`` of ``d(e_jj(1))``.
    """
    n, ring = window, d.ring
    one = ring.one()
    entries = {}
    for j in range(n):
        p = d(j, j, one)
        seen = p if isinstance(p, FiniteMatrix) else mx.window_of(p, n)
        if not mx.lemma1_pattern(seen, j):
            raise Refuted("lemma1_shape", f"d(e_{j}{j}(1)) is not supported on row/column {j}", (j,))
        for i, r in p.col(j):
            if i >= n:
                break
            if i != j:
                entries[(i, j)] = r
    v = FiniteMatrix(ring, entries, _trusted=True)
    for k in range(n):
        lhs = mx.window_of(mx.bracket(v, mx.unit(ring, k, k, one)), n)
        if lhs != mx.window_of(d(k, k, one), n):
            raise Refuted("extract_v", f"[v, e_{k}{k}(1)] differs from d(e_{k}{k}(1)) on the window", (k,))
    return v


def lemma2_operator(d: MatrixDerivation):
    """The full off-diagonal matrix ``v`` read lazily from the black box.

    Columns come from ``d(e_jj(1))``; rows, when the values have row
    accessors, from ``-d(e_kk(1))``.
    """
    ring, one = d.ring, d.ring.one()

    def col(j):
        return [(i, r) for i, r in d(j, j, one).col(j) if i != j]

    if d.ambient is Ambient.M_FULL:
        return ColumnFiniteOperator(ring, col, f"v[{d.name}]")

    def row(k):
        return [(j, ring.neg(r)) for j, r in d(k, k, one).row(k) if j != k]

    return RcfOperator(ring, col, row, f"v[{d.name}]")


@dataclass(frozen=True)
class RowProbe:
    """Outcome of the row-finiteness probe; truthy when no violation was seen."""

    ok: bool
    window: int
    witness_row: Optional[int] = None
    counts: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


def lemma3_row_probe(v, window: int, stages: int = 4) -> RowProbe:
    """Look for rows of ``v`` whose support keeps growing.

    Row ``k`` of ``[v, e_kk(1)]`` is ``-(row k of v)`` off the diagonal; it
    is read through column accessors only, over ``window * 2**s`` columns
    for ``s = 0..stages``.  A row whose nonzero count strictly grows at
    every stage is reported as the witness.
    """
    if window < 1:
        raise ValueError("window bound must be >= 1")
    if isinstance(v, FiniteMatrix) and not v:
        return RowProbe(True, window)
    ring = v.ring
    one = ring.one()
    view = mx.column_view(v)
    extents = [window << s for s in range(stages + 1)]
    for k in range(window):
        b = mx.bracket(view, mx.unit(ring, k, k, one))
        hits = [j for j in range(extents[-1]) if not ring.is_zero(b.entry(k, j))]
        counts = tuple(sum(1 for j in hits if j < e) for e in extents)
        if all(x < y for x, y in zip(counts, counts[1:])):
            return RowProbe(False, window, k, counts)
    return RowProbe(True, window)


class _Reduced:
    """``d' = d - ad(v)`` observed on the window, memoized."""

    def __init__(self, d, v: FiniteMatrix, window: int):
        self.d, self.v, self.n, self.ring = d, v, window, d.ring
        self._memo: dict = {}

    def __call__(self, i, j, r):
        key = (i, j, r)
        hit = self._memo.get(key)
        if hit is None:
            n = self.n
            hit = mx.sub(mx.window_of(self.d(i, j, r), n),
                         mx.window_of(mx.bracket(self.v, mx.unit(self.ring, i, j, r)), n))
            self._memo[key] = hit
        return hit


def reduced(d, v: FiniteMatrix, window: int) -> Callable:
    """``(i, j, r) -> window of (d - ad(v))(e_ij(r))``."""
    return _Reduced(d, v, window)


def coefficient_map(d_prime: Callable, i: int, j: int, ring: Ring,
                    check_diagonal: bool = True) -> Callable:
    """``r -> entry (i, j) of d'(e_ij(r))``.

    ``d'`` must kill ``e_ii(1)`` and ``e_jj(1)``; a value with support
    other than ``(i, j)`` refutes.
    """
    one = ring.one()
    if check_diagonal:
        for k in {i, j}:
            if d_prime(k, k, one):
                raise Refuted("coefficient_map", f"d'(e_{k}{k}(1)) is nonzero", (k,))

    def apply(r):
        value = d_prime(i, j, r)
        stray = [key for key in value.support() if key != (i, j)]
        if stray:
            raise Refuted("coefficient_map", f"d'(e_{i}{j}(r)) has stray support {stray[:3]}",
                          (i, j, r))
        return value.entry(i, j)

    return apply


def cocycle_correct(d_prime: Callable, window: int, i0: int = 0, *, ring: Ring,
                    seed: int = 0, trials: int = 4, offdiag_only: bool = False):
    """Diagonal correction ``c`` and residual coefficient derivation ``u``.

    ``c(i) = d_{i,i0}(1)``; the maps then satisfy
    ``d_ij(r) = c(i) r - r c(j) + u(r)`` with ``u`` independent of ``(i, j)``.
    Returns ``(c, u)`` with ``c`` a dict over the window.
    """
    n = window
    if not 0 <= i0 < n:
        raise ValueError("i0 must lie in the window")
    one, zero = ring.one(), ring.zero()
    pairs = [(i, j) for i in range(n) for j in range(n) if not (offdiag_only and i == j)]
    maps = {p: coefficient_map(d_prime, *p, ring, check_diagonal=not offdiag_only) for p in pairs}
    at_one = {p: m(one) for p, m in maps.items()}

    for i, k, j in itertools.product(range(n), repeat=3):
        if offdiag_only and len({i, k, j}) < 3:
            continue
        if not ring.eq(at_one[(i, j)], ring.add(at_one[(i, k)], at_one[(k, j)])):
            raise Refuted("cocycle_identity", f"d_{i}{j}(1) != d_{i}{k}(1) + d_{k}{j}(1)", (i, k, j))

    c = {i: (zero if i == i0 else at_one[(i, i0)]) for i in range(n)}
    others = [i for i in range(n) if i != i0]
    base = (others[0], i0) if others else (i0, i0)
    base_map, ci = maps[base], c[base[0]]
    u = CoefficientDerivation(ring, lambda r: ring.sub(base_map(r), ring.mul(ci, r)),
                              f"residual{base}")

    for r in _default_samples(ring, seed, trials):
        ur = u(r)
        for (i, j), m in maps.items():
            expected = ring.add(ring.sub(ring.mul(c[i], r), ring.mul(r, c[j])), ur)
            if not ring.eq(m(r), expected):
                raise Refuted("index_independence",
                              f"d_{i}{j}(r) - (c({i}) r - r c({j})) differs from the residual at {base}",
                              (i, j, r))
    return c, u


# -- reports ----------------------------------------------------------------------

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"


@dataclass
class CheckOutcome:
    name: str
    status: str
    detail: str = ""
    witness: Optional[Diagnostic] = None

    def to_json(self, ring=None):
        if self.status == FAIL and self.witness is not None:
            return {"status": FAIL, "witness": self.witness.to_json(ring)}
        if self.detail:
            return {"status": self.status, "detail": self.detail}
        return self.status


DECOMPOSED, REFUTED, INCONCLUSIVE, UNSUPPORTED = "decomposed", "refuted", "inconclusive", "unsupported"

REQUIRED_CHECKS = ("additivity", "leibniz", "lemma1_shape", "antisymmetry", "extract_v",
                   "lemma3_row_probe", "cocycle_identity", "index_independence",
                   "residual_derivation_law", "round_trip")


@dataclass
class DecompositionReport:
    """Result of :func:`decompose` (and of the Lie pipeline)."""

    status: str
    ring: Ring
    window: int
    ambient: str
    i0: int = 0
    v: Optional[FiniteMatrix] = None
    correction: Optional[dict] = None
    residual: Optional[CoefficientDerivation] = None
    checks: dict = field(default_factory=dict)
    witness: Optional[Diagnostic] = None
    reason: str = ""
    notes: list = field(default_factory=list)
    v_operator: object = None
    applicability: Optional[str] = None
    samples: list = field(default_factory=list)

    @property
    def decomposed(self) -> bool:
        return self.status == DECOMPOSED

    def assembled(self) -> FiniteMatrix:
        """``v + diag(c)`` on the window."""
        entries = dict(self.v.items())
        for i, ci in self.correction.items():
            if not self.ring.is_zero(ci):
                entries[(i, i)] = ci
        return FiniteMatrix(self.ring, entries, _trusted=True)

    def predicted(self, i: int, j: int, r):
        """Window of ``ad(v + diag(c))(e_ij(r)) + e_ij(u(r))``."""
        ring = self.ring
        value = mx.add(mx.bracket(self.assembled(), mx.unit(ring, i, j, r)),
                       mx.unit(ring, i, j, self.residual(r)))
        return mx.window_of(value, self.window)

    def failed_checks(self) -> list:
        return [name for name, c in self.checks.items() if c.status == FAIL]

    def residual_description(self) -> dict:
        if self.residual is None:
            return {"description": "none"}
        ring = self.residual.ring
        values = [(r, self.residual(r)) for r in self.samples]
        table = [[ring.to_text(r), ring.to_text(ur)] for r, ur in values]
        if all(ring.is_zero(ur) for _, ur in values):
            name = "zero"
        else:
            name = next((u.name for u in ring.derivations()
                         if all(ring.eq(u(r), ur) for r, ur in values)), "nonzero")
        return {"description": name, "samples": table}

    def to_json(self) -> dict:
        ring = self.ring
        out = {
            "status": self.status,
            "ring": ring.name,
            "ambient": self.ambient,
            "window": self.window,
            "i0": self.i0,
            "checks": {name: c.to_json(ring) for name, c in self.checks.items()},
            "notes": list(self.notes),
        }
        if self.v is not None:
            out["v_entries"] = self.v.to_triples()
        if self.correction is not None:
            out["correction"] = [[i, ring.to_text(ci)] for i, ci in sorted(self.correction.items())]
        out["residual"] = self.residual_description()
        if self.witness is not None:
            out["witness"] = self.witness.to_json(ring)
        if self.reason:
            out["reason"] = self.reason
        if self.applicability is not None:
            out["applicability"] = self.applicability
        return out


class _Recorder:
    def __init__(self, report: DecompositionReport):
        self.report = report

    def ok(self, name: str, detail: str = "") -> None:
        self.report.checks[name] = CheckOutcome(name, PASS, detail)

    def skip(self, name: str, detail: str) -> None:
        self.report.checks[name] = CheckOutcome(name, SKIPPED, detail)

    def fail(self, diag: Diagnostic) -> None:
        self.report.checks[diag.check] = CheckOutcome(diag.check, FAIL, diag.message, diag)
        if self.report.witness is None:
            self.report.witness = diag
            self.report.status = REFUTED


def _round_trip(report: DecompositionReport, d, keys) -> Optional[Diagnostic]:
    for i, j, r in keys:
        if mx.window_of(d(i, j, r), report.window) != report.predicted(i, j, r):
            return Diagnostic("round_trip", f"reassembled derivation differs at e_{i}{j}(r)", (i, j, r))
    return None


def decompose(d: MatrixDerivation, window: int, seed: int = 0, trials: int = 4, i0: int = 0,
              *, max_probes: Optional[int] = None, call_timeout: Optional[float] = None,
              workers: int = 1, probe_stages: int = 4) -> DecompositionReport:
    """Split ``d`` as ``ad(v + diag(c)) + lift(u)`` on the window.

    The row-finiteness probe runs for ambients ``M_inf`` and ``M_rcf`` only;
    for ``M_full`` the inner part may legitimately be column-finite only.
    """
    if window < 1 or trials < 1:
        raise ValueError("window and trials must be >= 1")
    n, ring = window, d.ring
    report = DecompositionReport(INCONCLUSIVE, ring, n, d.ambient.value, i0,
                                 samples=_default_samples(ring, seed, trials))
    rec = _Recorder(report)
    d.max_probes, d.call_timeout = max_probes, call_timeout
    try:
        one = ring.one()
        d.prefetch([(i, j, r) for i in range(n) for j in range(n) for r in (one,)], workers)

        for name, diag in _run_validation(d, n, seed, trials).items():
            rec.fail(diag) if diag else rec.ok(name)
        if report.status == REFUTED:
            return report

        report.v = extract_v(d, n)
        rec.ok("extract_v")

        if d.ambient is Ambient.M_FULL:
            rec.skip("lemma3_row_probe", "inner part may be column-finite only")
        else:
            report.v_operator = lemma2_operator(d)
            probe = lemma3_row_probe(report.v_operator, n, probe_stages)
            if not probe:
                raise Refuted("lemma3_row_probe",
                              f"row {probe.witness_row} of v keeps growing: counts {probe.counts}",
                              (probe.witness_row,))
            rec.ok("lemma3_row_probe", f"no growing row on window {n}")

        d_prime = reduced(d, report.v, n)
        c, u = cocycle_correct(d_prime, n, i0, ring=ring, seed=seed, trials=trials)
        rec.ok("cocycle_identity")
        rec.ok("index_independence")
        report.correction, report.residual = c, u
        if any(not ring.is_zero(ci) for ci in c.values()):
            report.notes.append("coefficient maps do not vanish at 1; "
                                "nonzero diagonal correction applied")

        problems = check_derivation_law(u, seed, trials)
        if problems:
            raise Refuted("residual_derivation_law", problems[0].message, problems[0].witness)
        rec.ok("residual_derivation_law")

        keys = [(i, j, r) for r in report.samples for i in range(n) for j in range(n)]
        diag = _round_trip(report, d, keys)
        if diag:
            raise Refuted(diag.check, diag.message, diag.witness)
        rec.ok("round_trip", f"verified on window {n}")
        report.status = DECOMPOSED
    except Refuted as exc:
        rec.fail(exc.diagnostic)
    except Inconclusive as exc:
        report.status, report.reason = INCONCLUSIVE, str(exc)
    except (UsageError, mx.MalformedEntries, ArithmeticError, TypeError, ValueError,
            KeyError, IndexError, AttributeError) as exc:
        log.debug("black box failed", exc_info=True)
        report.status, report.reason = INCONCLUSIVE, f"black box failed: {type(exc).__name__}: {exc}"
    finally:
        d.max_probes = d.call_timeout = None
    return report
