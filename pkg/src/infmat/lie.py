"""Lie-ring layer: sl membership, Lie derivations and their decomposition.

For the ambient ``sl_inf`` a derivation is probed on off-diagonal units
``e_ij(r)`` (i != j) and on diagonal differences ``e_kk(1) - e_ww(1)``;
the ambients ``gl`` and ``gl_rcf`` are probed on all matrix units.
"""

from __future__ import annotations

import itertools
import logging
import random
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from . import matrices as mx
from .derivations import (DECOMPOSED, INCONCLUSIVE, REFUTED, UNSUPPORTED, DecompositionReport,
                          Inconclusive, MatrixDerivation, Refuted, _default_samples, _Recorder,
                          cocycle_correct, reduced)
from .matrices import ColumnFiniteOperator, FiniteMatrix, RcfOperator
from .rings import (CoefficientDerivation, Diagnostic, Ring, UsageError,
                    check_derivation_law)

log = logging.getLogger(__name__)


class LieAmbient(str, Enum):
    SL_INF = "sl_inf"
    GL = "gl"
    GL_RCF = "gl_rcf"


class Unsupported(Exception):
    """The ring lacks what an operation needs (half element, span oracle)."""


@dataclass(frozen=True)
class SlMembershipOracle:
    """Decides membership in sl via the trace and the commutator span of R."""

    ring: Ring

    def __post_init__(self):
        if self.ring.commutator_span_member is None:
            raise Unsupported(f"{self.ring} has no commutator-span oracle")

    def __call__(self, r) -> bool:
        return self.ring.commutator_span_member(r)


def sl_member(x: FiniteMatrix, oracle: SlMembershipOracle) -> bool:
    """Whether the trace of ``x`` lies in the additive span of commutators."""
    if x.ring != oracle.ring:
        raise UsageError(f"ring mismatch: {x.ring} vs {oracle.ring}")
    return oracle(mx.trace(x))


# probes are ("unit", i, j, r) or ("diff", k, w)

def probe_matrix(ring: Ring, probe) -> FiniteMatrix:
    if probe[0] == "unit":
        _, i, j, r = probe
        return mx.unit(ring, i, j, r)
    _, k, w = probe
    one = ring.one()
    return mx.sub(mx.unit(ring, k, k, one), mx.unit(ring, w, w, one))


def bracket_terms(ring: Ring, x, y) -> Optional[list]:
    """``[x, y]`` of two probes as a signed list of probes, or None when the
    bracket leaves the probe span."""
    if x[0] == "diff" and y[0] == "diff":
        return []
    if x[0] == "unit" and y[0] == "diff":
        terms = bracket_terms(ring, y, x)
        return [(-s, p) for s, p in terms]
    if x[0] == "diff":
        _, k, w = x
        _, i, j, r = y
        m = (k == i) - (w == i) - (j == k) + (j == w)
        return [(1, ("unit", i, j, ring.mul(ring.from_int(m), r)))]
    _, i, j, a = x
    _, k, l, b = y
    if j == k and l == i:
        ab, ba = ring.mul(a, b), ring.mul(b, a)
        if ring.is_zero(ab) and ring.is_zero(ba):
            return []
        if ring.eq(ab, ring.one()) and ring.eq(ba, ring.one()):
            return [(1, ("diff", i, j))]
        return None
    terms = []
    if j == k:
        terms.append((1, ("unit", i, l, ring.mul(a, b))))
    if l == i:
        terms.append((-1, ("unit", k, j, ring.mul(b, a))))
    return terms


class LieDerivation:
    """A Lie derivation given on generator probes.

    ``eval_unit(i, j, r)`` gives the value at ``e_ij(r)`` (only ``i != j``
    is ever asked for ``sl_inf``); ``eval_diff(k, w)`` gives the value at
    ``e_kk(1) - e_ww(1)`` and defaults to the difference of unit values on
    the ``gl`` ambients.
    """

    def __init__(self, ring: Ring, ambient: LieAmbient, eval_unit: Callable,
                 eval_diff: Optional[Callable] = None, *, provenance=None,
                 name: Optional[str] = None):
        self.ring = ring
        self.ambient = LieAmbient(ambient)
        if eval_diff is None and self.ambient is LieAmbient.SL_INF:
            raise ValueError("sl_inf derivations need eval_diff")
        self._eval_unit = eval_unit
        self._eval_diff = eval_diff
        self.provenance = provenance
        self.name = name or "lie derivation"
        self._memo: dict = {}
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        return f"LieDerivation[{self.ring}, {self.ambient.value}]({self.name})"

    def _cached(self, key, compute):
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        value = compute()
        if not isinstance(value, (FiniteMatrix, ColumnFiniteOperator)) or value.ring != self.ring:
            raise Inconclusive(f"malformed value at {key!r}: {value!r}")
        with self._lock:
            return self._memo.setdefault(key, value)

    def unit(self, i: int, j: int, r):
        if i == j and self.ambient is LieAmbient.SL_INF:
            raise ValueError("diagonal units are not sl probes")
        return self._cached(("unit", i, j, r), lambda: self._eval_unit(i, j, r))

    __call__ = unit

    def diff(self, k: int, w: int):
        if self._eval_diff is not None:
            return self._cached(("diff", k, w), lambda: self._eval_diff(k, w))
        one = self.ring.one()
        return self._cached(("diff", k, w), lambda: mx.sub(self.unit(k, k, one), self.unit(w, w, one)))

    def probe(self, p):
        return self.unit(*p[1:]) if p[0] == "unit" else self.diff(*p[1:])

    def __add__(self, other: "LieDerivation") -> "LieDerivation":
        if other.ring != self.ring or other.ambient != self.ambient:
            raise UsageError(f"cannot add {self!r} and {other!r}")
        return LieDerivation(
            self.ring, self.ambient,
            lambda i, j, r: mx.add(self.unit(i, j, r), other.unit(i, j, r)),
            lambda k, w: mx.add(self.diff(k, w), other.diff(k, w)),
            provenance=("sum", (self, other)), name=f"{self.name} + {other.name}")


def lie_inner(a, ambient: LieAmbient = LieAmbient.SL_INF) -> LieDerivation:
    """``ad(a)`` on the Lie ring; ``a`` must be row-and-column finite unless
    the ambient is ``gl``."""
    ambient = LieAmbient(ambient)
    if ambient is not LieAmbient.GL and not isinstance(a, (FiniteMatrix, RcfOperator)):
        raise UsageError(f"{ambient.value} needs a row-and-column finite operator")
    ring = a.ring
    return LieDerivation(
        ring, ambient, lambda i, j, r: mx.bracket(a, mx.unit(ring, i, j, r)),
        lambda k, w: mx.bracket(a, probe_matrix(ring, ("diff", k, w))),
        provenance=("inner", a), name=f"ad({mx._name(a)})")


def lie_lift(u: CoefficientDerivation, ambient: LieAmbient = LieAmbient.SL_INF) -> LieDerivation:
    ring = u.ring
    u1 = u(ring.one())

    def diff(k, w):
        return mx.sub(mx.unit(ring, k, k, u1), mx.unit(ring, w, w, u1))

    return LieDerivation(ring, ambient, lambda i, j, r: mx.unit(ring, i, j, u(r)), diff,
                         provenance=("lift", u), name=f"lift({u.name})")


def restrict(d: MatrixDerivation, ambient: LieAmbient = LieAmbient.SL_INF) -> LieDerivation:
    """An associative derivation viewed as a Lie derivation."""
    ring = d.ring
    one = ring.one()
    return LieDerivation(ring, ambient, d, lambda k, w: mx.sub(d(k, k, one), d(w, w, one)),
                         provenance=("restrict", d), name=d.name)


# -- validation ------------------------------------------------------------------

def _combination(D: LieDerivation, terms):
    total = mx.zero_matrix(D.ring)
    for sign, p in terms:
        value = D.probe(p)
        total = mx.add(total, value) if sign > 0 else mx.sub(total, value)
    return total


def _leibniz_witness(D, n, x, y) -> Optional[Diagnostic]:
    ring = D.ring
    terms = bracket_terms(ring, x, y)
    if terms is None:
        return None
    lhs = _combination(D, terms)
    xm, ym = probe_matrix(ring, x), probe_matrix(ring, y)
    rhs = mx.add(mx.bracket(D.probe(x), ym), mx.bracket(xm, D.probe(y)))
    if mx.agree(lhs, rhs, n):
        return None
    return Diagnostic("lie_leibniz", f"D([x, y]) != [D x, y] + [x, D y] for x={x[:3]}, y={y[:3]}",
                      (x, y))


def _generators(D, n) -> list:
    one = D.ring.one()
    units = [("unit", i, j, one) for i in range(n) for j in range(n)
             if i != j or D.ambient is not LieAmbient.SL_INF]
    diffs = [("diff", k, l) for k in range(n) for l in range(k + 1, n)]
    return units + diffs


def _idx(p) -> set:
    return set(p[1:3]) if p[0] == "unit" else set(p[1:])


def lie_validate(D: LieDerivation, window: int, seed: int = 0, trials: int = 4,
                 oracle: Optional[SlMembershipOracle] = None) -> list[Diagnostic]:
    """Additivity, Lie-Leibniz and (for ``sl_inf``) sl membership of values."""
    return [d for d in _lie_checks(D, window, seed, trials, oracle).values() if d]


def _lie_checks(D, n, seed, trials, oracle) -> dict:
    if n < 2 or trials < 1:
        raise ValueError("window must be >= 2 and trials >= 1")
    ring = D.ring
    rng = random.Random(seed)
    xs = _default_samples(ring, seed, trials)
    offdiag = [(i, j) for i in range(n) for j in range(n) if i != j]
    out: dict = {"additivity": None, "lie_leibniz": None}

    for _ in range(4 * trials):
        i, j = rng.choice(offdiag)
        r, s = rng.choice(xs), rng.choice(xs)
        if not mx.agree(D.unit(i, j, ring.add(r, s)), mx.add(D.unit(i, j, r), D.unit(i, j, s)), n):
            out["additivity"] = Diagnostic("additivity", f"D(e_{i}{j}(r+s)) is not additive",
                                           (i, j, r, s))
            break

    gens = _generators(D, n)
    pairs = [(x, y) for x, y in itertools.product(gens, repeat=2)
             if x[0] == "diff" or y[0] == "diff" or _idx(x) & _idx(y)]
    for _ in range(6 * trials):
        i, j = rng.choice(offdiag)
        x = ("unit", i, j, rng.choice(xs))
        if rng.randrange(3) == 0:
            k, w = rng.sample(range(n), 2)
            y = ("diff", k, w)
        else:
            k, l = rng.choice([p for p in offdiag if {i, j} & set(p)])
            y = ("unit", k, l, rng.choice(xs))
        pairs.append((x, y))
    for x, y in pairs:
        diag = _leibniz_witness(D, n, x, y)
        if diag:
            out["lie_leibniz"] = diag
            break

    if D.ambient is LieAmbient.SL_INF:
        out["sl_membership"] = None
        if oracle is None:
            oracle = SlMembershipOracle(ring)
        for p in gens:
            value = D.probe(p)
            if not isinstance(value, FiniteMatrix) or not sl_member(value, oracle):
                out["sl_membership"] = Diagnostic("sl_membership", f"D{p[:3]} is not in sl", (p,))
                break
    return out


# -- decomposition ---------------------------------------------------------------

def lie_extract_offdiag(D: LieDerivation, window: int, reservoir: Optional[int] = None) -> FiniteMatrix:
    """Off-diagonal part ``v`` read from ``D(e_kk(1) - e_ww(1))`` (``sl_inf``)
    or from ``D(e_kk(1))`` (``gl`` ambients)."""
    n, ring = window, D.ring
    one = ring.one()
    sl = D.ambient is LieAmbient.SL_INF
    if sl and (reservoir is None or reservoir < n):
        raise ValueError("reservoir index must lie outside the window")
    entries = {}
    probes = {}
    for k in range(n):
        p = D.diff(k, reservoir) if sl else D.unit(k, k, one)
        probes[k] = p
        allowed = {k, reservoir} if sl else {k}
        seen = p if isinstance(p, FiniteMatrix) else mx.window_of(p, max(n, (reservoir or 0) + 1))
        stray = [(i, j) for i, j in seen.support()
                 if (i not in allowed and j not in allowed) or (not sl and i == j)]
        if stray:
            raise Refuted("lemma1_shape", f"probe at {k} has entries off rows/columns {sorted(allowed)}",
                          (k, stray[0]))
        for i, r in p.col(k):
            if i >= n:
                break
            if i != k:
                entries[(i, k)] = r
    v = FiniteMatrix(ring, entries, _trusted=True)
    for k, p in probes.items():
        x = probe_matrix(ring, ("diff", k, reservoir)) if sl else mx.unit(ring, k, k, one)
        if mx.window_of(mx.bracket(v, x), n) != mx.window_of(p, n):
            raise Refuted("extract_v", f"[v, probe {k}] differs from D(probe {k}) on the window", (k,))
    return v


LIE_REQUIRED_CHECKS = ("additivity", "lie_leibniz", "extract_v", "cocycle_identity",
                       "index_independence", "residual_derivation_law", "round_trip")


def lie_decompose(D: LieDerivation, window: int, seed: int = 0, trials: int = 4, i0: int = 0,
                  reservoir: Optional[int] = None) -> DecompositionReport:
    """Split ``D`` as ``ad(v + diag(c)) + lift(u)`` on the window.

    Requires the half element; without it the report is ``unsupported``.
    """
    n, ring = window, D.ring
    if reservoir is None:
        reservoir = 2 * n
    report = DecompositionReport(INCONCLUSIVE, ring, n, D.ambient.value, i0,
                                 samples=_default_samples(ring, seed, trials))
    if ring.half is None:
        report.status = UNSUPPORTED
        report.applicability = "half absent"
        report.reason = f"{ring} has no element 1/2"
        return report
    report.applicability = "half present"
    rec = _Recorder(report)
    sl = D.ambient is LieAmbient.SL_INF
    try:
        for name, diag in _lie_checks(D, n, seed, trials, None).items():
            rec.fail(diag) if diag else rec.ok(name)
        if report.status == REFUTED:
            return report

        report.v = lie_extract_offdiag(D, n, reservoir)
        rec.ok("extract_v", f"reservoir {reservoir}" if sl else "")

        c, u = cocycle_correct(reduced(D, report.v, n), n, i0, ring=ring, seed=seed,
                               trials=trials, offdiag_only=sl)
        rec.ok("cocycle_identity")
        rec.ok("index_independence")
        report.correction, report.residual = c, u
        if any(not ring.is_zero(ci) for ci in c.values()):
            report.notes.append("nonzero diagonal correction applied")

        problems = check_derivation_law(u, seed, trials)
        if problems:
            raise Refuted("residual_derivation_law", problems[0].message, problems[0].witness)
        rec.ok("residual_derivation_law")

        a = report.assembled()
        probes = [("unit", i, j, r) for r in report.samples for i in range(n) for j in range(n)
                  if i != j or not sl]
        probes += [("diff", k, reservoir) for k in range(n)]
        probes += [("diff", k, l) for k in range(n) for l in range(k + 1, n)]
        for p in probes:
            x = probe_matrix(ring, p)
            lifted = FiniteMatrix(ring, {key: u(val) for key, val in x.items()})
            predicted = mx.window_of(mx.add(mx.bracket(a, x), lifted), n)
            if mx.window_of(D.probe(p), n) != predicted:
                raise Refuted("round_trip", f"reassembled derivation differs at {p[:3]}", (p,))
        rec.ok("round_trip", f"verified on window {n}")
        report.status = DECOMPOSED
    except Refuted as exc:
        rec.fail(exc.diagnostic)
    except Inconclusive as exc:
        report.status, report.reason = INCONCLUSIVE, str(exc)
    except Unsupported as exc:
        report.status, report.reason = UNSUPPORTED, str(exc)
    except (UsageError, mx.MalformedEntries, ArithmeticError, TypeError, ValueError,
            KeyError, IndexError, AttributeError) as exc:
        log.debug("black box failed", exc_info=True)
        report.status, report.reason = INCONCLUSIVE, f"black box failed: {type(exc).__name__}: {exc}"
    return report
