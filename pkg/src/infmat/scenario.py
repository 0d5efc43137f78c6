"""JSON scenario files: parsing, object construction and report output."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import __version__
from . import matrices as mx
from .derivations import Ambient, DecompositionReport, decompose, derivation_sum, inner, lift
from .lie import LieAmbient, lie_decompose, lie_inner, lie_lift
from .rings import Ring, d_dt, inner_ring_derivation, parse_ring, zero_derivation


class ScenarioError(ValueError):
    """Malformed scenario; ``line`` points into the source text when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(message)
        self.line = line

    def anchored(self, source: str) -> str:
        return f"{source}:{self.line or 1}: {self}"


_TOP_KEYS = {"ring", "derivation", "window", "seed", "trials", "i0", "reservoir",
             "ambient", "output"}


@dataclass
class Scenario:
    ring: str
    derivation: dict
    window: int = 6
    seed: int = 0
    trials: int = 4
    i0: int = 0
    reservoir: Optional[int] = None
    ambient: str = Ambient.M_INF.value
    output: Optional[str] = None
    text: str = field(default="", repr=False, compare=False)

    @property
    def is_lie(self) -> bool:
        return self.derivation.get("kind") == "lie"

    def resolved(self) -> dict:
        out = {"ring": self.ring, "derivation": self.derivation, "window": self.window,
               "seed": self.seed, "trials": self.trials, "i0": self.i0}
        if self.is_lie:
            out["reservoir"] = self.lie_reservoir()
        else:
            out["ambient"] = self.ambient
        return out

    def lie_reservoir(self) -> int:
        return self.derivation.get("reservoir", self.reservoir if self.reservoir is not None
                                   else 2 * self.window)


def _line_of(text: str, key: str) -> Optional[int]:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _expect_keys(obj, allowed: set, where: str, text: str) -> None:
    if not isinstance(obj, dict):
        raise ScenarioError(f"{where} must be a JSON object", _line_of(text, where))
    for key in obj:
        if key not in allowed:
            raise ScenarioError(f"unknown key {key!r} in {where}", _line_of(text, key))


def _positive(value, key: str, text: str, minimum: int = 1) -> int:
    if type(value) is not int or value < minimum:
        raise ScenarioError(f"{key} must be an integer >= {minimum}", _line_of(text, key))
    return value


def parse_scenario(text: str) -> Scenario:
    """Parse and check a scenario document (without building objects)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc.msg} (column {exc.colno})", exc.lineno) from None
    _expect_keys(doc, _TOP_KEYS, "scenario", text)
    for key in ("ring", "derivation"):
        if key not in doc:
            raise ScenarioError(f"missing required key {key!r}", 1)
    sc = Scenario(ring=doc["ring"], derivation=doc["derivation"], text=text)
    sc.window = _positive(doc.get("window", sc.window), "window", text)
    sc.seed = _positive(doc.get("seed", 0), "seed", text, minimum=0)
    sc.trials = _positive(doc.get("trials", sc.trials), "trials", text)
    sc.i0 = _positive(doc.get("i0", 0), "i0", text, minimum=0)
    if "reservoir" in doc:
        sc.reservoir = _positive(doc["reservoir"], "reservoir", text)
    sc.ambient = doc.get("ambient", sc.ambient)
    if sc.ambient not in {a.value for a in Ambient}:
        raise ScenarioError(f"unknown ambient {sc.ambient!r}", _line_of(text, "ambient"))
    sc.output = doc.get("output")
    if sc.i0 >= sc.window:
        raise ScenarioError("i0 must be smaller than window", _line_of(text, "i0"))
    if not isinstance(sc.ring, str):
        raise ScenarioError("ring must be a string", _line_of(text, "ring"))
    return sc


# -- building ----------------------------------------------------------------------

def _element(ring: Ring, value, key: str, text: str):
    try:
        return ring.from_text(value if isinstance(value, str) else json.dumps(value))
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"bad {ring} element for {key!r}: {exc}", _line_of(text, key)) from None


_AFFINE = re.compile(r"\s*(?:(?:(.+?)\s*\*\s*)?i\s*(?:\+\s*(.+?))?|(.+?))\s*")


def _affine(ring: Ring, formula, text: str):
    """``"a*i+b"`` (either part optional) as the pair ``(a, b)``."""
    m = _AFFINE.fullmatch(formula) if isinstance(formula, str) else None
    if m is None:
        raise ScenarioError(f"bad diag formula {formula!r}", _line_of(text, "formula"))
    a, b, const = m.groups()
    if const is not None:
        return ring.zero(), _element(ring, const, "formula", text)
    return (_element(ring, a or "1", "formula", text),
            _element(ring, b or "0", "formula", text))


def build_operator(ring: Ring, spec, text: str = ""):
    """Named operator constructors: shift, identity, diag, finite, ones_row, sum."""
    if isinstance(spec, str):
        spec = {"name": spec}
    elif isinstance(spec, dict) and "kind" in spec and "name" not in spec:
        spec = {("name" if k == "kind" else k): v for k, v in spec.items()}
    if not isinstance(spec, dict) or "name" not in spec:
        raise ScenarioError("operator must be a name or an object with a 'name'", _line_of(text, "operator"))
    name = spec["name"]
    allowed = {"shift": {"scale"}, "identity": set(), "diag": {"a", "b", "formula"}, "finite": {"entries"},
               "ones_row": {"row"}, "sum": {"parts"}}
    if name not in allowed:
        raise ScenarioError(f"unknown operator {name!r}", _line_of(text, "name"))
    _expect_keys(spec, allowed[name] | {"name"}, f"operator {name}", text)
    if name == "shift":
        scale = _element(ring, spec["scale"], "scale", text) if "scale" in spec else None
        return mx.shift(ring, scale)
    if name == "identity":
        return mx.identity(ring)
    if name == "diag":
        if "formula" in spec:
            a, b = _affine(ring, spec["formula"], text)
        else:
            a = _element(ring, spec.get("a", "1"), "a", text)
            b = _element(ring, spec.get("b", "0"), "b", text)
        return mx.diag(ring, lambda i: ring.add(ring.mul(a, ring.from_int(i)), b),
                       f"diag({ring.to_text(a)}*i+{ring.to_text(b)})")
    if name == "finite":
        entries = spec.get("entries", [])
        try:
            return mx.FiniteMatrix.from_triples(ring, [(i, j, t if isinstance(t, str) else json.dumps(t))
                                                       for i, j, t in entries])
        except (ValueError, TypeError) as exc:
            raise ScenarioError(f"bad finite entries: {exc}", _line_of(text, "entries")) from None
    if name == "ones_row":
        return mx.ones_row(ring, _positive(spec.get("row", 0), "row", text, minimum=0))
    parts = spec.get("parts") or []
    if not parts:
        raise ScenarioError("operator sum needs parts", _line_of(text, "parts"))
    total = build_operator(ring, parts[0], text)
    for part in parts[1:]:
        total = mx.add(total, build_operator(ring, part, text))
    return total


def build_coefficient_derivation(ring: Ring, spec, text: str = ""):
    if spec == "zero":
        return zero_derivation(ring)
    if spec == "d/dt":
        if ring != d_dt().ring:
            raise ScenarioError(f"d/dt needs Z[t], not {ring}", _line_of(text, "derivation"))
        return d_dt()
    if isinstance(spec, dict) and spec.get("kind") == "inner_ring":
        _expect_keys(spec, {"kind", "element"}, "inner_ring", text)
        return inner_ring_derivation(ring, _element(ring, spec.get("element", "0"), "element", text))
    raise ScenarioError(f"unknown coefficient derivation {spec!r}", _line_of(text, "derivation"))


def build_derivation(ring: Ring, spec, text: str = "", *, ambient=Ambient.M_INF, lie: bool = False):
    """Associative descriptors (or their Lie counterparts when ``lie``)."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ScenarioError("derivation must be an object with a 'kind'", _line_of(text, "derivation"))
    kind = spec["kind"]
    if kind == "inner":
        _expect_keys(spec, {"kind", "operator"}, "inner", text)
        op = build_operator(ring, spec.get("operator"), text)
        try:
            return lie_inner(op, ambient) if lie else inner(op, ambient)
        except ValueError as exc:
            raise ScenarioError(str(exc), _line_of(text, "operator")) from None
    if kind == "lift":
        _expect_keys(spec, {"kind", "derivation"}, "lift", text)
        u = build_coefficient_derivation(ring, spec.get("derivation"), text)
        return lie_lift(u, ambient) if lie else lift(u, ambient)
    if kind == "sum":
        _expect_keys(spec, {"kind", "parts"}, "sum", text)
        parts = [build_derivation(ring, p, text, ambient=ambient, lie=lie) for p in spec.get("parts") or []]
        if not parts:
            raise ScenarioError("sum needs parts", _line_of(text, "parts"))
        if lie:
            total = parts[0]
            for p in parts[1:]:
                total = total + p
            return total
        return derivation_sum(*parts)
    if kind == "lie" and not lie:
        _expect_keys(spec, {"kind", "ambient", "reservoir", "derivation"}, "lie", text)
        name = spec.get("ambient", "sl_inf")
        if name not in {a.value for a in LieAmbient}:
            raise ScenarioError(f"unknown Lie ambient {name!r}", _line_of(text, "ambient"))
        if "reservoir" in spec:
            _positive(spec["reservoir"], "reservoir", text)
        return build_derivation(ring, spec.get("derivation"), text, ambient=LieAmbient(name), lie=True)
    raise ScenarioError(f"unknown derivation kind {kind!r}", _line_of(text, "kind"))


def execute(sc: Scenario) -> DecompositionReport:
    """Build the scenario's objects and run the matching pipeline."""
    try:
        ring = parse_ring(sc.ring)
    except ValueError as exc:
        raise ScenarioError(str(exc), _line_of(sc.text, "ring")) from None
    d = build_derivation(ring, sc.derivation, sc.text, ambient=Ambient(sc.ambient))
    if sc.is_lie:
        reservoir = sc.lie_reservoir()
        if reservoir < sc.window:
            raise ScenarioError("reservoir must be >= window", _line_of(sc.text, "reservoir"))
        return lie_decompose(d, sc.window, sc.seed, sc.trials, sc.i0, reservoir)
    return decompose(d, sc.window, sc.seed, sc.trials, sc.i0)


def report_document(sc: Scenario, report: DecompositionReport) -> dict:
    doc = report.to_json()
    doc["tool"] = {"name": "infmat", "version": __version__}
    doc["scenario"] = sc.resolved()
    return doc


def canonical_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


EXIT_CODES = {"decomposed": 0, "refuted": 2, "inconclusive": 3, "unsupported": 3}


def run_scenario(path, out: Optional[str] = None) -> tuple[int, Optional[Path], str]:
    """Run a scenario file; returns ``(exit code, report path, message)``."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        return 1, None, f"{path}: cannot read: {exc.strerror}"
    try:
        sc = parse_scenario(text)
        report = execute(sc)
    except ScenarioError as exc:
        return 1, None, exc.anchored(str(path))
    target = Path(out or sc.output or path.with_suffix(".report.json"))
    if not target.is_absolute() and not out and sc.output:
        target = path.parent / target
    target.write_text(canonical_json(report_document(sc, report)), encoding="utf-8")
    message = f"{report.status}: report written to {target}"
    if report.reason:
        message += f" ({report.reason})"
    return EXIT_CODES[report.status], target, message
