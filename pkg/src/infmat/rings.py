"""Exact unital coefficient rings and derivations of them.

Elements are plain immutable Python values (ints and tuples) kept in a
canonical form, so ``==`` and hashing agree with ring equality.  Every
ring object knows how to validate, sample, print and parse its elements.
"""

from __future__ import annotations

import itertools
import json
import random
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Optional

RingElement = Any


class UsageError(ValueError):
    """An operation mixed elements or objects from different rings."""


@dataclass(frozen=True)
class Diagnostic:
    """One failed check instance, with the elements that witness it."""

    check: str
    message: str
    witness: tuple = ()

    def to_json(self, ring: Optional["Ring"] = None) -> dict:
        def show(x):
            if ring is not None and ring.contains(x):
                return ring.to_text(x)
            return repr(x)

        return {"check": self.check, "message": self.message,
                "witness": [show(w) for w in self.witness]}


class Ring:
    """Base class of a unital associative ring with exact arithmetic.

    Subclasses provide ``zero``, ``one``, ``add``, ``neg``, ``mul``,
    ``contains``, ``to_text``, ``from_text`` and ``random_element``.
    ``half`` is the element h with h + h = 1 when it exists, else None.
    ``commutator_span_member`` is None when the ring offers no decision
    procedure for the additive span of commutators.
    """

    name: str = "ring"
    is_commutative: bool = False
    commutator_span_member: Optional[Callable[[RingElement], bool]] = None

    # -- arithmetic -----------------------------------------------------
    def zero(self) -> RingElement:
        raise NotImplementedError

    def one(self) -> RingElement:
        raise NotImplementedError

    def add(self, r, s):
        raise NotImplementedError

    def neg(self, r):
        raise NotImplementedError

    def mul(self, r, s):
        raise NotImplementedError

    def eq(self, r, s) -> bool:
        return r == s

    def sub(self, r, s):
        return self.add(r, self.neg(s))

    def is_zero(self, r) -> bool:
        return self.eq(r, self.zero())

    def from_int(self, k: int):
        # double-and-add keeps this exact for rings without a native embedding
        result, base = self.zero(), self.one()
        if k < 0:
            base, k = self.neg(base), -k
        while k:
            if k & 1:
                result = self.add(result, base)
            base = self.add(base, base)
            k >>= 1
        return result

    @property
    def half(self) -> Optional[RingElement]:
        return None

    # -- membership, text -----------------------------------------------
    def contains(self, x) -> bool:
        raise NotImplementedError

    def check(self, *xs) -> None:
        for x in xs:
            if not self.contains(x):
                raise UsageError(f"{x!r} is not an element of {self.name}")

    def to_text(self, x) -> str:
        raise NotImplementedError

    def from_text(self, text: str):
        raise NotImplementedError

    # -- sampling ---------------------------------------------------------
    def random_element(self, rng: random.Random, size: int = 5):
        raise NotImplementedError

    def special_elements(self) -> list:
        """Elements every sample starts with (after zero and one)."""
        return []

    def sample(self, seed: int, size: int = 5):
        """A single pseudo-random element determined by ``(seed, size)``."""
        return self.random_element(random.Random(seed), size)

    def samples(self, seed: int, count: int, size: int = 5) -> list:
        """``count`` elements: zero, one and the special elements first,
        then seeded random draws."""
        rng = random.Random(seed)
        out = [self.zero(), self.one(), *self.special_elements()]
        while len(out) < count:
            out.append(self.random_element(rng, size))
        return out[:max(count, 1)]

    def elements(self) -> Optional[Iterator]:
        """Iterate over all elements of a finite ring; None when infinite."""
        return None

    def derivations(self) -> list["CoefficientDerivation"]:
        """Built-in derivations of this ring; always includes zero."""
        return [zero_derivation(self)]

    def random_derivation(self, rng: random.Random) -> "CoefficientDerivation":
        return rng.choice(self.derivations())

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Integers(Ring):
    """The integers with Python's arbitrary precision ints."""

    name: str = field(default="Z", init=False)
    is_commutative: bool = field(default=True, init=False)

    def zero(self):
        return 0

    def one(self):
        return 1

    def add(self, r, s):
        return r + s

    def neg(self, r):
        return -r

    def mul(self, r, s):
        return r * s

    def from_int(self, k):
        return k

    def is_zero(self, r):
        return r == 0

    def commutator_span_member(self, r):
        return r == 0

    def contains(self, x):
        return type(x) is int

    def to_text(self, x):
        return str(x)

    def from_text(self, text):
        return int(str(text).strip())

    def random_element(self, rng, size=5):
        return rng.randint(-size, size)

    def special_elements(self):
        return [-1, 2]


@dataclass(frozen=True)
class IntegersMod(Ring):
    """Residues modulo ``n`` stored in ``range(n)``."""

    n: int = 2
    name: str = field(default="", init=False)
    is_commutative: bool = field(default=True, init=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"modulus must be >= 2, got {self.n}")
        object.__setattr__(self, "name", f"Z/{self.n}")

    def zero(self):
        return 0

    def one(self):
        return 1

    def add(self, r, s):
        return (r + s) % self.n

    def neg(self, r):
        return -r % self.n

    def mul(self, r, s):
        return r * s % self.n

    def from_int(self, k):
        return k % self.n

    def is_zero(self, r):
        return r == 0

    @property
    def half(self):
        return (self.n + 1) // 2 if self.n % 2 else None

    def commutator_span_member(self, r):
        return r == 0

    def contains(self, x):
        return type(x) is int and 0 <= x < self.n

    def to_text(self, x):
        return str(x)

    def from_text(self, text):
        return int(str(text).strip()) % self.n

    def random_element(self, rng, size=5):
        return rng.randrange(self.n)

    def elements(self):
        return iter(range(self.n))


def _strip(coeffs) -> tuple:
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return tuple(coeffs)


@dataclass(frozen=True)
class PolynomialsZ(Ring):
    """Z[t]; an element is its tuple of coefficients, constant term first,
    with trailing zeros stripped (so zero is the empty tuple)."""

    name: str = field(default="Z[t]", init=False)
    is_commutative: bool = field(default=True, init=False)

    def zero(self):
        return ()

    def one(self):
        return (1,)

    def add(self, r, s):
        if len(r) < len(s):
            r, s = s, r
        return _strip(a + (s[k] if k < len(s) else 0) for k, a in enumerate(r))

    def neg(self, r):
        return tuple(-a for a in r)

    def mul(self, r, s):
        if not r or not s:
            return ()
        out = [0] * (len(r) + len(s) - 1)
        for i, a in enumerate(r):
            if a:
                for j, b in enumerate(s):
                    out[i + j] += a * b
        return _strip(out)

    def from_int(self, k):
        return _strip([k])

    def is_zero(self, r):
        return not r

    def commutator_span_member(self, r):
        return r == ()

    def contains(self, x):
        return (type(x) is tuple and all(type(c) is int for c in x)
                and (not x or x[-1] != 0))

    def to_text(self, x):
        return "[" + ",".join(str(c) for c in x) + "]"

    def from_text(self, text):
        value = json.loads(text) if isinstance(text, str) else text
        if isinstance(value, int):
            value = [value]
        if not isinstance(value, list) or not all(type(c) is int for c in value):
            raise ValueError(f"not a coefficient list: {text!r}")
        return _strip(value)

    def random_element(self, rng, size=5):
        return _strip(rng.randint(-size, size) for _ in range(rng.randint(0, 4)))

    def special_elements(self):
        return [(0, 1), (0, 0, 1), (-1, 2)]

    def derivations(self):
        return [zero_derivation(self), d_dt()]

    def random_derivation(self, rng):
        # p(t) * d/dt is a derivation of Z[t] for every p
        choice = rng.randrange(3)
        if choice == 0:
            return zero_derivation(self)
        if choice == 1:
            return d_dt()
        p = self.random_element(rng, 3) or (1,)
        return scaled_derivation(p, d_dt())


@dataclass(frozen=True)
class Matrix2Mod(Ring):
    """2x2 matrices over Z/p, stored row-major as a 4-tuple (a, b, c, d)."""

    p: int = 3
    name: str = field(default="", init=False)
    is_commutative: bool = field(default=False, init=False)

    def __post_init__(self):
        if self.p < 2 or any(self.p % q == 0 for q in range(2, int(self.p ** 0.5) + 1)):
            raise ValueError(f"M2 needs a prime modulus, got {self.p}")
        object.__setattr__(self, "name", f"M2(Z/{self.p})")

    def zero(self):
        return (0, 0, 0, 0)

    def one(self):
        return (1, 0, 0, 1)

    def add(self, r, s):
        p = self.p
        return ((r[0] + s[0]) % p, (r[1] + s[1]) % p,
                (r[2] + s[2]) % p, (r[3] + s[3]) % p)

    def neg(self, r):
        p = self.p
        return (-r[0] % p, -r[1] % p, -r[2] % p, -r[3] % p)

    def mul(self, r, s):
        p = self.p
        a, b, c, d = r
        e, f, g, h = s
        return ((a * e + b * g) % p, (a * f + b * h) % p,
                (c * e + d * g) % p, (c * f + d * h) % p)

    def from_int(self, k):
        k %= self.p
        return (k, 0, 0, k)

    def is_zero(self, r):
        return r == (0, 0, 0, 0)

    @property
    def half(self):
        if self.p == 2:
            return None
        h = (self.p + 1) // 2
        return (h, 0, 0, h)

    def trace(self, r):
        return (r[0] + r[3]) % self.p

    def commutator_span_member(self, r):
        return self.trace(r) == 0

    def contains(self, x):
        return (type(x) is tuple and len(x) == 4
                and all(type(c) is int and 0 <= c < self.p for c in x))

    def to_text(self, x):
        return f"[[{x[0]},{x[1]}],[{x[2]},{x[3]}]]"

    def from_text(self, text):
        value = json.loads(text) if isinstance(text, str) else text
        try:
            (a, b), (c, d) = value
        except (TypeError, ValueError):
            raise ValueError(f"not a 2x2 matrix: {text!r}") from None
        if not all(type(v) is int for v in (a, b, c, d)):
            raise ValueError(f"not a 2x2 integer matrix: {text!r}")
        p = self.p
        return (a % p, b % p, c % p, d % p)

    def random_element(self, rng, size=5):
        return tuple(rng.randrange(self.p) for _ in range(4))

    def special_elements(self):
        # matrix units are not central
        return [(0, 1, 0, 0), (0, 0, 1, 0), (1, 0, 0, 0)]

    def elements(self):
        return iter(itertools.product(range(self.p), repeat=4))

    def derivations(self):
        return [zero_derivation(self)] + [
            inner_ring_derivation(self, r) for r in self.special_elements()]

    def random_derivation(self, rng):
        if rng.randrange(4) == 0:
            return zero_derivation(self)
        return inner_ring_derivation(self, self.random_element(rng))


_RING_PATTERNS = [
    (re.compile(r"Z"), lambda m: Integers()),
    (re.compile(r"Z/(\d+)"), lambda m: IntegersMod(int(m.group(1)))),
    (re.compile(r"Z\[t\]"), lambda m: PolynomialsZ()),
    (re.compile(r"M2\(Z/(\d+)\)"), lambda m: Matrix2Mod(int(m.group(1)))),
]


def parse_ring(spec: str) -> Ring:
    """Build a ring from ``"Z"``, ``"Z/<n>"``, ``"Z[t]"`` or ``"M2(Z/<p>)"``."""
    text = spec.replace(" ", "")
    for pattern, build in _RING_PATTERNS:
        m = pattern.fullmatch(text)
        if m:
            return build(m)
    raise ValueError(f"unknown ring {spec!r}; expected Z, Z/<n>, Z[t] or M2(Z/<p>)")


def commutator(ring: Ring, r, s):
    """``rs - sr``."""
    ring.check(r, s)
    return ring.sub(ring.mul(r, s), ring.mul(s, r))


def check_ring_axioms(ring: Ring, seed: int = 0, trials: int = 50) -> list[Diagnostic]:
    """Check the ring axioms on sampled triples; empty list means no violation."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    xs = ring.samples(seed, trials + 3)
    rng = random.Random(seed)
    triples = [(xs[i % len(xs)], xs[(i + 1) % len(xs)], xs[(i + 2) % len(xs)])
               for i in range(len(xs))]
    triples += [tuple(rng.choice(xs) for _ in range(3)) for _ in range(trials)]
    add, mul, eq = ring.add, ring.mul, ring.eq
    z, e = ring.zero(), ring.one()
    out: list[Diagnostic] = []

    def expect(name, ok, *witness):
        if not ok:
            out.append(Diagnostic(name, f"{name} fails", witness))

    for a, b, c in triples:
        expect("additive associativity", eq(add(add(a, b), c), add(a, add(b, c))), a, b, c)
        expect("additive commutativity", eq(add(a, b), add(b, a)), a, b)
        expect("additive identity", eq(add(a, z), a), a)
        expect("additive inverse", eq(add(a, ring.neg(a)), z), a)
        expect("multiplicative associativity",
               eq(mul(mul(a, b), c), mul(a, mul(b, c))), a, b, c)
        expect("left distributivity", eq(mul(a, add(b, c)), add(mul(a, b), mul(a, c))), a, b, c)
        expect("right distributivity", eq(mul(add(a, b), c), add(mul(a, c), mul(b, c))), a, b, c)
        expect("unit", eq(mul(e, a), a) and eq(mul(a, e), a), a)
        expect("equality reflexive", eq(a, a), a)
        expect("equality symmetric", eq(a, b) == eq(b, a), a, b)
        if ring.is_commutative:
            expect("commutativity", eq(mul(a, b), mul(b, a)), a, b)
    if ring.half is not None:
        expect("half", eq(add(ring.half, ring.half), e), ring.half)
    # report each violated axiom once, with its first witness
    seen, unique = set(), []
    for d in out:
        if d.check not in seen:
            seen.add(d.check)
            unique.append(d)
    return unique


@dataclass(frozen=True)
class CoefficientDerivation:
    """A (claimed) derivation of a coefficient ring."""

    ring: Ring
    apply: Callable[[RingElement], RingElement]
    name: str

    def __call__(self, r):
        return self.apply(r)

    def __add__(self, other: "CoefficientDerivation") -> "CoefficientDerivation":
        _same_ring(self.ring, other.ring)
        ring = self.ring
        return CoefficientDerivation(
            ring, lambda r: ring.add(self.apply(r), other.apply(r)),
            f"({self.name} + {other.name})")

    def __neg__(self) -> "CoefficientDerivation":
        ring = self.ring
        return CoefficientDerivation(ring, lambda r: ring.neg(self.apply(r)), f"-{self.name}")

    def __sub__(self, other: "CoefficientDerivation") -> "CoefficientDerivation":
        return self + (-other)


def _same_ring(a: Ring, b: Ring) -> None:
    if a != b:
        raise UsageError(f"ring mismatch: {a} vs {b}")


def zero_derivation(ring: Ring) -> CoefficientDerivation:
    return CoefficientDerivation(ring, lambda r: ring.zero(), "zero")


def d_dt() -> CoefficientDerivation:
    """Formal derivative on Z[t]."""
    return CoefficientDerivation(
        PolynomialsZ(), lambda r: _strip(k * c for k, c in enumerate(r) if k), "d/dt")


def scaled_derivation(p, u: CoefficientDerivation) -> CoefficientDerivation:
    """``r -> p * u(r)``; a derivation whenever ``p`` is central."""
    ring = u.ring
    return CoefficientDerivation(ring, lambda r: ring.mul(p, u(r)),
                                 f"{ring.to_text(p)}*{u.name}")


def inner_ring_derivation(ring: Ring, r) -> CoefficientDerivation:
    """``x -> r x - x r``."""
    ring.check(r)
    return CoefficientDerivation(
        ring, lambda x: ring.sub(ring.mul(r, x), ring.mul(x, r)),
        f"inner_ring({ring.to_text(r)})")


def derivation_bracket(u1: CoefficientDerivation, u2: CoefficientDerivation) -> CoefficientDerivation:
    """The commutator ``u1 o u2 - u2 o u1`` of two maps."""
    _same_ring(u1.ring, u2.ring)
    ring = u1.ring
    return CoefficientDerivation(
        ring, lambda r: ring.sub(u1(u2(r)), u2(u1(r))), f"[{u1.name}, {u2.name}]")


def check_derivation_law(u: CoefficientDerivation, seed: int = 0,
                         trials: int = 30) -> list[Diagnostic]:
    """Additivity, Leibniz rule and u(1) = 0 on sampled pairs."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    ring = u.ring
    xs = ring.samples(seed, max(6, len(ring.special_elements()) + 2))
    pairs = list(itertools.product(xs, repeat=2))
    rng = random.Random(seed + 1)
    pairs += [(ring.random_element(rng), ring.random_element(rng)) for _ in range(trials)]
    out: list[Diagnostic] = []
    for a, b in pairs:
        lhs, rhs = u(ring.add(a, b)), ring.add(u(a), u(b))
        if not ring.eq(lhs, rhs):
            out.append(Diagnostic("additivity", "u(a+b) != u(a) + u(b)", (a, b, lhs, rhs)))
            break
    for a, b in pairs:
        lhs = u(ring.mul(a, b))
        rhs = ring.add(ring.mul(u(a), b), ring.mul(a, u(b)))
        if not ring.eq(lhs, rhs):
            out.append(Diagnostic("leibniz", "u(ab) != u(a) b + a u(b)", (a, b, lhs, rhs)))
            break
    if not ring.is_zero(u(ring.one())):
        out.append(Diagnostic("unit", "u(1) != 0", (u(ring.one()),)))
    return out
