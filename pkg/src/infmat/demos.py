"""Printed walkthroughs of the decomposition pipeline on small examples."""

from __future__ import annotations

from . import matrices as mx
from .derivations import (Ambient, MatrixDerivation, decompose, inner, lemma2_operator,
                          lemma3_row_probe)
from .lie import LieAmbient, lie_decompose, lie_inner, lie_lift
from .rings import Integers, IntegersMod, Matrix2Mod, inner_ring_derivation


def grid(a, n: int) -> list[str]:
    """Rows of the top-left ``n x n`` window as aligned text."""
    ring = a.ring
    w = mx.window_of(a, n)
    cells = [[ring.to_text(w.entry(i, j)) if (i, j) in w.entries else "." for j in range(n)]
             for i in range(n)]
    width = max(len(c) for row in cells for c in row)
    return ["  " + " ".join(c.rjust(width) for c in row) for row in cells]


def _show(out, title, a, n):
    out.append(title)
    out.extend(grid(a, n))


def _show_report(out, report):
    ring = report.ring
    out.append(f"status: {report.status}")
    for name, c in report.checks.items():
        out.append(f"  check {name:<24} {c.status}")
    if report.witness is not None:
        out.append(f"witness: {report.witness.check}: {report.witness.message}")
    if report.v is not None:
        _show(out, "v (extraction lemma: column j of v read from d(e_jj(1))):", report.v, report.window)
    if report.correction is not None:
        cs = ", ".join(f"c({i}) = {ring.to_text(ci)}" for i, ci in sorted(report.correction.items()))
        out.append(f"diagonal correction: {cs}")
        out.append(f"residual u: {report.residual_description()['description']}")
    for note in report.notes:
        out.append(f"note: {note}")


def _kk_windows(out, d, n, count=3):
    one = d.ring.one()
    for k in range(min(count, n)):
        _show(out, f"d(e_{k}{k}(1)) (shape lemma: supported on row {k} and column {k}):",
              d(k, k, one), n)


def _identity_line(report) -> str:
    if report.decomposed:
        return (f"identity d = ad(v + diag(c)) + lift(u) holds on every unit probe "
                f"of window {report.window}")
    return "identity check not reached"


def demo_diag_correction(n: int = 6) -> list[str]:
    Z = Integers()
    a = mx.diag(Z, lambda i: i, "diag(i)")
    d = inner(a)
    out = [f"scenario: ring Z, d = ad(diag(0, 1, 2, ...)), window {n}, i0 = 0"]
    _kk_windows(out, d, n)
    _show(out, "d(e_10(1)): the coefficient map at (1,0) sends 1 to 1, not 0:",
          d(1, 0, Z.one()), n)
    report = decompose(d, n)
    _show_report(out, report)
    out.append(_identity_line(report))
    return out


def demo_shift(n: int = 6) -> list[str]:
    Z = Integers()
    S = mx.shift(Z)
    d = inner(S)
    out = [f"scenario: ring Z, d = ad(S) with S the shift e_(j+1, j), window {n}"]
    _kk_windows(out, d, n)
    report = decompose(d, n)
    _show_report(out, report)
    recovered = report.decomposed and report.v == mx.window_of(S, n)
    out.append(f"v equals the window of S: {'yes' if recovered else 'no'}")
    out.append(_identity_line(report))
    return out


def demo_lemma3_failure(n: int = 6) -> list[str]:
    Z = Integers()
    J = mx.ones_row(Z, 0)
    d = MatrixDerivation(Z, Ambient.M_RCF, lambda i, j, r: mx.bracket(J, mx.unit(Z, i, j, r)),
                         name="ad(ones_row0)")
    out = [f"scenario: ring Z, black box x -> Jx - xJ with J all ones in row 0, "
           f"ambient M_rcf, window {n}"]
    _kk_windows(out, d, n, count=2)
    probe = lemma3_row_probe(lemma2_operator(d), n)
    out.append("row-finiteness lemma probe: nonzero counts of row k of [v, e_kk] "
               f"over {n}*2^s columns")
    out.append(f"  flagged: {'yes' if not probe else 'no'}; witness row {probe.witness_row}; "
               f"counts {list(probe.counts)}")
    report = decompose(d, n)
    _show_report(out, report)
    return out


def demo_lie_roundtrip(n: int = 4, reservoir: int = 8) -> list[str]:
    F3 = IntegersMod(3)
    M = Matrix2Mod(3)
    out = []
    cases = [
        (F3, lie_inner(mx.shift(F3), LieAmbient.SL_INF), "ad(S)"),
        (M, lie_inner(mx.shift(M, (1, 1, 0, 2)), LieAmbient.SL_INF)
            + lie_lift(inner_ring_derivation(M, (0, 1, 0, 0)), LieAmbient.SL_INF),
         "ad(S*[[1,1],[0,2]]) + lift(ad([[0,1],[0,0]]))"),
        (Integers(), lie_inner(mx.shift(Integers()), LieAmbient.SL_INF), "ad(S)"),
    ]
    for ring, D, label in cases:
        out.append(f"scenario: ring {ring.name}, sl_inf, D = {label}, window {n}, "
                   f"reservoir {reservoir}")
        report = lie_decompose(D, n, reservoir=reservoir)
        out.append(f"applicability: {report.applicability}")
        if report.status == "unsupported":
            out.append(f"status: {report.status} ({report.reason})")
            continue
        _show_report(out, report)
        out.append(_identity_line(report) + " (off-diagonal units and diagonal differences)")
    return out


DEMOS = {
    "diag-correction": demo_diag_correction,
    "shift": demo_shift,
    "lemma3-failure": demo_lemma3_failure,
    "lie-roundtrip": demo_lie_roundtrip,
}
