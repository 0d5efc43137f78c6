"""Matrices indexed by the natural numbers over an exact coefficient ring.

Three classes model the nested rings

* :class:`FiniteMatrix` -- finitely many nonzero entries,
* :class:`RcfOperator` -- finitely many nonzero entries in every row and
  every column, given by row and column accessors,
* :class:`ColumnFiniteOperator` -- finitely many nonzero entries in every
  column, given by a column accessor.

Operators are intensional: equality and every other global property can
only be observed on a finite window ``{0..n-1} x {0..n-1}``.
"""

from __future__ import annotations

import json
import threading
from collections import defaultdict
from typing import Callable, Iterable, Optional, Union

from .rings import Ring, UsageError

Entries = list  # list of (index, element) pairs: ascending, zero-free, duplicate-free


class MalformedEntries(ValueError):
    """An accessor returned a list that is not in canonical form."""


def _canonical(ring: Ring, entries) -> bool:
    last = -1
    for idx, value in entries:
        if type(idx) is not int or idx <= last or ring.is_zero(value):
            return False
        last = idx
    return True


class FiniteMatrix:
    """Element of the ring of finitely supported matrices.

    ``entries`` maps ``(i, j)`` to nonzero ring elements; zeros passed in
    are dropped.  Instances are immutable and hashable.
    """

    __slots__ = ("ring", "_entries", "_cols", "_rows", "_hash")

    def __init__(self, ring: Ring, entries=None, *, _trusted: bool = False):
        self.ring = ring
        if _trusted:
            self._entries = entries
        else:
            clean = {}
            for (i, j), r in dict(entries or {}).items():
                if type(i) is not int or type(j) is not int or i < 0 or j < 0:
                    raise ValueError(f"bad index pair {(i, j)!r}")
                ring.check(r)
                if not ring.is_zero(r):
                    clean[(i, j)] = r
            self._entries = clean
        self._cols = None
        self._rows = None
        self._hash = None

    # -- views ---------------------------------------------------------
    @property
    def entries(self) -> dict:
        return dict(self._entries)

    def items(self):
        return self._entries.items()

    def support(self) -> list:
        return sorted(self._entries)

    def rows(self) -> list:
        return sorted({i for i, _ in self._entries})

    def cols(self) -> list:
        return sorted({j for _, j in self._entries})

    def __len__(self) -> int:
        return len(self._entries)

    def __bool__(self) -> bool:
        return bool(self._entries)

    def entry(self, i: int, j: int):
        return self._entries.get((i, j), self.ring.zero())

    def _index(self):
        if self._cols is None:
            cols, rows = defaultdict(list), defaultdict(list)
            for (i, j), r in sorted(self._entries.items()):
                cols[j].append((i, r))
                rows[i].append((j, r))
            self._cols = dict(cols)
            self._rows = {i: sorted(v) for i, v in rows.items()}
        return self._cols, self._rows

    def col(self, j: int) -> Entries:
        return list(self._index()[0].get(j, ()))

    def row(self, i: int) -> Entries:
        return list(self._index()[1].get(i, ()))

    # -- protocol --------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteMatrix):
            return NotImplemented
        return self.ring == other.ring and self._entries == other._entries

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.ring, frozenset(self._entries.items())))
        return self._hash

    def __repr__(self) -> str:
        body = ", ".join(f"({i},{j}): {self.ring.to_text(r)}" for (i, j), r in sorted(self._entries.items()))
        return f"FiniteMatrix[{self.ring}]{{{body}}}"

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return mul(self, other)

    def to_triples(self) -> list:
        return [[i, j, self.ring.to_text(r)] for (i, j), r in sorted(self._entries.items())]

    def to_json(self) -> str:
        return json.dumps(self.to_triples(), separators=(",", ":"))

    @classmethod
    def from_triples(cls, ring: Ring, triples: Iterable) -> "FiniteMatrix":
        entries = {}
        for i, j, text in triples:
            key = (int(i), int(j))
            entries[key] = ring.add(entries.get(key, ring.zero()), ring.from_text(text))
        return cls(ring, entries)

    @classmethod
    def from_json(cls, ring: Ring, text: str) -> "FiniteMatrix":
        return cls.from_triples(ring, json.loads(text))


class ColumnFiniteOperator:
    """Column-finite matrix given by ``col(j) -> [(i, r), ...]``.

    Columns are memoized; a column that is not ascending, zero-free and
    duplicate-free raises :class:`MalformedEntries` on first access.
    """

    def __init__(self, ring: Ring, col: Callable[[int], Entries], name: Optional[str] = None):
        self.ring = ring
        self._col_fn = col
        self._col_memo: dict = {}
        self._lock = threading.Lock()
        self.name = name or "operator"

    def _fill(self, memo, fn, key, kind):
        hit = memo.get(key)
        if hit is not None:
            return hit
        value = list(fn(key))
        if not _canonical(self.ring, value):
            raise MalformedEntries(f"{self.name}: {kind}({key}) is not canonical: {value!r}")
        value = tuple(value)
        with self._lock:
            return memo.setdefault(key, value)

    def col(self, j: int) -> Entries:
        return list(self._fill(self._col_memo, self._col_fn, j, "col"))

    def entry(self, i: int, j: int):
        for k, r in self.col(j):
            if k == i:
                return r
        return self.ring.zero()

    def __repr__(self) -> str:
        return f"{type(self).__name__}[{self.ring}]({self.name})"

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return mul(self, other)


class RcfOperator(ColumnFiniteOperator):
    """Row-and-column-finite matrix with both accessors."""

    def __init__(self, ring: Ring, col: Callable[[int], Entries],
                 row: Callable[[int], Entries], name: Optional[str] = None):
        super().__init__(ring, col, name)
        self._row_fn = row
        self._row_memo: dict = {}

    def row(self, i: int) -> Entries:
        return list(self._fill(self._row_memo, self._row_fn, i, "row"))


Matrix = Union[FiniteMatrix, ColumnFiniteOperator]


def _kind(a) -> str:
    if isinstance(a, FiniteMatrix):
        return "fin"
    if isinstance(a, RcfOperator):
        return "rcf"
    if isinstance(a, ColumnFiniteOperator):
        return "col"
    raise TypeError(f"not a matrix: {a!r}")


def _has_rows(a) -> bool:
    return _kind(a) in ("fin", "rcf")


def _same(a, b) -> Ring:
    if a.ring is not b.ring and a.ring != b.ring:
        raise UsageError(f"ring mismatch: {a.ring} vs {b.ring}")
    return a.ring


def _merge(ring: Ring, xs: Entries, ys: Entries, sign: bool = False) -> Entries:
    """Sum of two canonical entry lists (``xs - ys`` when ``sign``)."""
    acc = dict(xs)
    for k, r in ys:
        r = ring.neg(r) if sign else r
        acc[k] = ring.add(acc[k], r) if k in acc else r
    return [(k, r) for k, r in sorted(acc.items()) if not ring.is_zero(r)]


def _combine(ring: Ring, terms) -> Entries:
    acc: dict = {}
    for k, r in terms:
        acc[k] = ring.add(acc[k], r) if k in acc else r
    return [(k, r) for k, r in sorted(acc.items()) if not ring.is_zero(r)]


# -- constructors -----------------------------------------------------------

def unit(ring: Ring, i: int, j: int, r) -> FiniteMatrix:
    """Matrix unit ``e_ij(r)``; empty when ``r`` is zero."""
    ring.check(r)
    if ring.is_zero(r):
        return FiniteMatrix(ring, {}, _trusted=True)
    return FiniteMatrix(ring, {(i, j): r}, _trusted=True)


def zero_matrix(ring: Ring) -> FiniteMatrix:
    return FiniteMatrix(ring, {}, _trusted=True)


def diag(ring: Ring, f: Callable[[int], object], name: str = "diag") -> RcfOperator:
    """Diagonal operator with ``f(i)`` at ``(i, i)``."""
    def line(i):
        r = f(i)
        return [] if ring.is_zero(r) else [(i, r)]
    return RcfOperator(ring, line, line, name)


def identity(ring: Ring) -> RcfOperator:
    one = ring.one()
    return diag(ring, lambda i: one, "identity")


def shift(ring: Ring, r=None) -> RcfOperator:
    """``S = sum_k e_{k+1,k}(r)`` (``r`` defaults to one)."""
    r = ring.one() if r is None else r
    if ring.is_zero(r):
        return RcfOperator(ring, lambda j: [], lambda i: [], "shift")
    return RcfOperator(ring, lambda j: [(j + 1, r)],
                       lambda i: [(i - 1, r)] if i >= 1 else [], "shift")


def ones_row(ring: Ring, row: int = 0) -> ColumnFiniteOperator:
    """All-ones row ``row``: column-finite but not row-finite."""
    one = ring.one()
    return ColumnFiniteOperator(ring, lambda j: [(row, one)], f"ones_row({row})")


def operator_from_accessors(ring: Ring, col: Callable[[int], Entries],
                            row: Optional[Callable[[int], Entries]] = None,
                            name: Optional[str] = None) -> ColumnFiniteOperator:
    """Wrap accessors; supplying ``row`` claims row-and-column finiteness."""
    if row is None:
        return ColumnFiniteOperator(ring, col, name)
    return RcfOperator(ring, col, row, name)


def column_view(a) -> ColumnFiniteOperator:
    """``a`` seen only through its columns."""
    return ColumnFiniteOperator(a.ring, a.col, f"columns({getattr(a, 'name', 'finite')})")


# -- arithmetic --------------------------------------------------------------

def add(a, b):
    """Entrywise sum; the result has the class of the wider argument."""
    ring = _same(a, b)
    if isinstance(a, FiniteMatrix) and isinstance(b, FiniteMatrix):
        out = dict(a._entries)
        for key, r in b._entries.items():
            if key in out:
                s = ring.add(out[key], r)
                if ring.is_zero(s):
                    del out[key]
                else:
                    out[key] = s
            else:
                out[key] = r
        return FiniteMatrix(ring, out, _trusted=True)
    col = lambda j: _merge(ring, a.col(j), b.col(j))
    name = f"({_name(a)} + {_name(b)})"
    if _has_rows(a) and _has_rows(b):
        return RcfOperator(ring, col, lambda i: _merge(ring, a.row(i), b.row(i)), name)
    return ColumnFiniteOperator(ring, col, name)


def neg(a):
    ring = a.ring
    if isinstance(a, FiniteMatrix):
        return FiniteMatrix(ring, {k: ring.neg(r) for k, r in a._entries.items()}, _trusted=True)
    col = lambda j: [(i, ring.neg(r)) for i, r in a.col(j)]
    if _has_rows(a):
        return RcfOperator(ring, col, lambda i: [(j, ring.neg(r)) for j, r in a.row(i)], f"-{_name(a)}")
    return ColumnFiniteOperator(ring, col, f"-{_name(a)}")


def sub(a, b):
    ring = _same(a, b)
    if isinstance(a, FiniteMatrix) and isinstance(b, FiniteMatrix):
        out = dict(a._entries)
        for key, r in b._entries.items():
            s = ring.sub(out[key], r) if key in out else ring.neg(r)
            if ring.is_zero(s):
                out.pop(key, None)
            else:
                out[key] = s
        return FiniteMatrix(ring, out, _trusted=True)
    return add(a, neg(b))


def _name(a) -> str:
    return getattr(a, "name", "finite")


def mul(a, b):
    """Exact product.

    Result classes: fin*fin, col*fin, fin*rcf -> finite; rcf*rcf -> rcf;
    anything else (including fin*col) -> column-finite.
    """
    ring = _same(a, b)
    ka, kb = _kind(a), _kind(b)
    rmul = ring.mul
    if kb == "fin":
        # (a b)_{ij} = sum_k a_ik b_kj needs only the columns of a on b's rows
        acc: dict = {}
        cols = a._index()[0] if ka == "fin" else None
        for (k, j), y in b._entries.items():
            for i, x in (cols.get(k, ()) if cols is not None else a.col(k)):
                p = rmul(x, y)
                key = (i, j)
                acc[key] = ring.add(acc[key], p) if key in acc else p
        return FiniteMatrix(ring, {k: r for k, r in acc.items() if not ring.is_zero(r)}, _trusted=True)
    if ka == "fin" and kb == "rcf":
        acc = {}
        for (i, k), x in a._entries.items():
            for j, y in b.row(k):
                p = rmul(x, y)
                key = (i, j)
                acc[key] = ring.add(acc[key], p) if key in acc else p
        return FiniteMatrix(ring, {k: r for k, r in acc.items() if not ring.is_zero(r)}, _trusted=True)

    def col(j):
        return _combine(ring, ((i, rmul(x, y)) for k, y in b.col(j) for i, x in a.col(k)))

    name = f"({_name(a)} * {_name(b)})"
    if ka == "rcf" and kb == "rcf":
        def row(i):
            return _combine(ring, ((j, rmul(x, y)) for k, x in a.row(i) for j, y in b.row(k)))
        return RcfOperator(ring, col, row, name)
    return ColumnFiniteOperator(ring, col, name)


def bracket(a, b):
    """``[a, b] = ab - ba``."""
    return sub(mul(a, b), mul(b, a))


def scale(r, a, *, left: bool = True):
    """``r * a`` (or ``a * r`` when ``left`` is false) for a ring element ``r``."""
    ring = a.ring
    f = (lambda x: ring.mul(r, x)) if left else (lambda x: ring.mul(x, r))
    if isinstance(a, FiniteMatrix):
        return FiniteMatrix(ring, {k: f(x) for k, x in a._entries.items()})
    col = lambda j: [(i, y) for i, y in ((i, f(x)) for i, x in a.col(j)) if not ring.is_zero(y)]
    if _has_rows(a):
        row = lambda i: [(j, y) for j, y in ((j, f(x)) for j, x in a.row(i)) if not ring.is_zero(y)]
        return RcfOperator(ring, col, row, f"scaled({_name(a)})")
    return ColumnFiniteOperator(ring, col, f"scaled({_name(a)})")


# -- observation ---------------------------------------------------------------

def window_of(a, bound: int) -> FiniteMatrix:
    """Entries of ``a`` inside ``{0..bound-1}^2``; reads at most ``bound`` columns."""
    if bound < 1:
        raise ValueError("window bound must be >= 1")
    if isinstance(a, FiniteMatrix):
        return FiniteMatrix(a.ring, {(i, j): r for (i, j), r in a._entries.items()
                                     if i < bound and j < bound}, _trusted=True)
    out = {}
    for j in range(bound):
        for i, r in a.col(j):
            if i >= bound:
                break
            out[(i, j)] = r
    return FiniteMatrix(a.ring, out, _trusted=True)


def agree(a, b, bound: int) -> bool:
    """Exact equality for two finite matrices, window equality otherwise."""
    if isinstance(a, FiniteMatrix) and isinstance(b, FiniteMatrix):
        return a == b
    return window_of(a, bound) == window_of(b, bound)


def window_report(a, bound: int) -> dict:
    return {"bound": bound, "entries": window_of(a, bound).to_triples()}


def trace(a: FiniteMatrix):
    """Sum of the diagonal entries of a finite matrix."""
    if not isinstance(a, FiniteMatrix):
        raise TypeError("trace is only defined for finite matrices")
    ring = a.ring
    t = ring.zero()
    for (i, j), r in a._entries.items():
        if i == j:
            t = ring.add(t, r)
    return t


def lemma1_pattern(a: FiniteMatrix, k: int) -> bool:
    """Entrywise form: every nonzero entry lies in row k or column k, off (k, k)."""
    return all((i == k) != (j == k) for i, j in a._entries)


def lemma1_shape(a: FiniteMatrix, k: int) -> bool:
    """Whether ``a == e_kk(1) a + a e_kk(1)``.

    Both sides are computed; the result must coincide with
    :func:`lemma1_pattern`, and a disagreement is an internal error.
    """
    e = unit(a.ring, k, k, a.ring.one())
    direct = add(mul(e, a), mul(a, e)) == a
    if direct != lemma1_pattern(a, k):
        raise AssertionError(f"shape criterion disagrees with direct evaluation at k={k}: {a!r}")
    return direct


def is_rcf_consistent_on_window(a: RcfOperator, bound: int) -> bool:
    """Row and column accessors agree on the window and return canonical lists."""
    try:
        from_cols = {(i, j): r for j in range(bound) for i, r in a.col(j) if i < bound}
        from_rows = {(i, j): r for i in range(bound) for j, r in a.row(i) if j < bound}
    except MalformedEntries:
        return False
    return from_cols == from_rows
