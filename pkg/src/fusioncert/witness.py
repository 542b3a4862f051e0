"""Polynomial inequalities over hybrid-table and extended-table atoms."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import DivisorZero, GuardFailed, MissingTable, UnknownVariable, WitnessError
from .graphs import CausalGraph, base_name, mark_name, scenario
from .scalar import ONE, ZERO, Scalar, to_scalar
from .tables import (DataTable, EttExpansion, HybridDataset, _original_children, dokey,
                     multi_ett_extend, project_to_hybrid)

OBS, DO, EXT = "P", "do", "Q"


@dataclass(frozen=True, order=True)
class Atom:
    """One table entry, marginal over the variables not in `assign`.

    kind is "P" (observational), "do" (single-target intervention, see
    `target`/`value`) or "Q" (extended table; marks appear in `assign`).
    """
    kind: str
    assign: tuple[tuple[str, int], ...]
    target: str = ""
    value: int = 0

    def __str__(self) -> str:
        free = [(k, v) for k, v in self.assign if not k.endswith("#")]
        marks = [(k, v) for k, v in self.assign if k.endswith("#")]
        names = "".join(k for k, _ in free)
        vals = ",".join(str(v) for _, v in free)
        if self.kind == DO:
            return f"P_{names}({vals}|do({self.target}={self.value}))"
        if self.kind == EXT:
            return f"Q_{names}({vals}|" + ",".join(f"{k}={v}" for k, v in marks) + ")"
        return f"P_{names}({vals})"

    def to_json(self) -> dict:
        d = {"table": self.kind, "assign": dict(self.assign)}
        if self.kind == DO:
            d.update(target=self.target, value=self.value)
        return d

    @staticmethod
    def from_json(d: dict) -> "Atom":
        assign = tuple(sorted((k, int(v)) for k, v in d["assign"].items()))
        return Atom(d["table"], assign, d.get("target", ""), int(d.get("value", 0)))

    def relabel(self, perms: Mapping[str, Mapping[int, int]]) -> "Atom":
        def p(name, v):
            m = perms.get(base_name(name))
            return m[v] if m else v
        assign = tuple(sorted((k, p(k, v)) for k, v in self.assign))
        value = p(self.target, self.value) if self.kind == DO else self.value
        return Atom(self.kind, assign, self.target, value)


# a monomial is (numerator atoms, divisor atoms), both sorted tuples
Monomial = tuple[tuple[Atom, ...], tuple[Atom, ...]]
_UNIT: Monomial = ((), ())


class Poly:
    """Sparse polynomial in atoms with coefficients in Q(sqrt 2); divisors allowed."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None):
        self.terms: dict[Monomial, Scalar] = {m: c for m, c in (terms or {}).items() if c != ZERO}

    @staticmethod
    def const(c) -> "Poly":
        return Poly({_UNIT: to_scalar(c) if not isinstance(c, Scalar) else c})

    @staticmethod
    def atom(a: Atom) -> "Poly":
        return Poly({((a,), ()): ONE})

    @staticmethod
    def lift(x) -> "Poly":
        return x if isinstance(x, Poly) else Poly.const(x)

    def __add__(self, other) -> "Poly":
        other = Poly.lift(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, ZERO) + c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-Poly.lift(other))

    def __rsub__(self, other) -> "Poly":
        return Poly.lift(other) - self

    def __mul__(self, other) -> "Poly":
        other = Poly.lift(other)
        out: dict[Monomial, Scalar] = {}
        for (n1, d1), c1 in self.terms.items():
            for (n2, d2), c2 in other.terms.items():
                m = (tuple(sorted(n1 + n2)), tuple(sorted(d1 + d2)))
                out[m] = out.get(m, ZERO) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Poly":
        out = Poly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def __truediv__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            return self * Poly.const(ONE / to_scalar(other))
        if len(other.terms) != 1:
            raise WitnessError("can only divide by a single atom")
        ((num, den), c), = other.terms.items()
        if len(num) != 1 or den:
            raise WitnessError("can only divide by a single atom")
        return Poly({(n, tuple(sorted(d + num))): v / c for (n, d), v in self.terms.items()})

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def atoms(self) -> set[Atom]:
        return {a for n, d in self.terms for a in n + d}

    def divisors(self) -> set[Atom]:
        return {a for _, d in self.terms for a in d}

    @property
    def degree(self) -> int:
        return max((len(n) for n, _ in self.terms), default=0)

    def map_atoms(self, fn) -> "Poly":
        """Substitute each numerator atom by fn(atom) (a Poly); divisors by fn too if single-atom."""
        out = Poly()
        for (num, den), c in self.terms.items():
            t = Poly.const(c)
            for a in num:
                t = t * fn(a)
            for a in den:
                t = t / fn(a)
            out = out + t
        return out

    def relabel(self, perms) -> "Poly":
        return self.map_atoms(lambda a: Poly.atom(a.relabel(perms)))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (num, den), c in sorted(self.terms.items(), key=lambda t: (len(t[0][0]), t[0])):
            body = "*".join(str(a) for a in num)
            if den:
                body = (body or "1") + "/" + "/".join(str(a) for a in den)
            cs = str(c)
            if not body:
                parts.append(cs)
            elif c == ONE:
                parts.append(body)
            elif c == -ONE:
                parts.append("-" + body)
            else:
                parts.append(f"({cs})*{body}")
        return " + ".join(parts).replace("+ -", "- ")

    __repr__ = __str__

    def to_json(self) -> list:
        return [{"coef": c.to_json(), "atoms": [a.to_json() for a in n], "divisors": [a.to_json() for a in d]}
                for (n, d), c in sorted(self.terms.items())]

    @staticmethod
    def from_json(rows: list) -> "Poly":
        out = Poly()
        for r in rows:
            num = tuple(sorted(Atom.from_json(a) for a in r["atoms"]))
            den = tuple(sorted(Atom.from_json(a) for a in r.get("divisors", [])))
            out = out + Poly({(num, den): Scalar.from_json(r["coef"])})
        return out


# ------------------------------------------------------------ atom builders

def _assign(kw: Mapping[str, int]) -> tuple:
    return tuple(sorted((k, int(v)) for k, v in kw.items()))


def P(**kw) -> Poly:
    return Poly.atom(Atom(OBS, _assign(kw)))


def do(target: str, value: int, **kw) -> Poly:
    return Poly.atom(Atom(DO, _assign(kw), target, int(value)))


def Q(marks: Mapping[str, int], **kw) -> Poly:
    full = dict(kw)
    full.update({mark_name(k) if not k.endswith("#") else k: v for k, v in marks.items()})
    return Poly.atom(Atom(EXT, _assign(full)))


def total(fn, names: str, pred=lambda *v: True, cards=None) -> Poly:
    """Sum fn(**assignment) over the outcomes of `names` (binary unless given) satisfying pred."""
    cards = cards or {}
    out = Poly()
    for vals in itertools.product(*(range(cards.get(n, 2)) for n in names)):
        if pred(*vals):
            out = out + fn(**dict(zip(names, vals)))
    return out


def equal(*v) -> bool:
    return len(set(v)) == 1


def differ(*v) -> bool:
    return len(set(v)) > 1


# ------------------------------------------------------------ witnesses

@dataclass(frozen=True)
class Verdict:
    value: object
    bound: object
    satisfied: bool
    slack: object
    parts: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        def enc(v):
            return v.to_json() if isinstance(v, Scalar) else float(v)
        def show(v):
            return str(v) if isinstance(v, Scalar) else f"{v:.12g}"
        return {"value": enc(self.value), "bound": enc(self.bound), "satisfied": self.satisfied,
                "slack": enc(self.slack), "value_text": show(self.value), "slack_text": show(self.slack),
                "value_float": float(self.value), "slack_float": float(self.slack),
                "parts": {k: float(v) for k, v in self.parts.items()}}


@dataclass(frozen=True)
class Witness:
    key: str
    lhs: Poly
    sense: str
    rhs: Poly
    scenario: str
    level: str = "P"
    targets: tuple[str, ...] = ()
    cards: tuple[tuple[str, int], ...] = ()
    parts: tuple[tuple[str, Poly], ...] = ()
    guards: tuple[Poly, ...] = ()
    verified: bool = True
    note: str = ""

    def __post_init__(self):
        if self.sense not in ("<=", ">="):
            raise WitnessError(f"bad comparison {self.sense}")
        for side in (self.lhs, self.rhs):
            if side.degree > 3:
                raise WitnessError(f"{self.key}: degree {side.degree} exceeds 3")

    def graph(self) -> CausalGraph:
        return scenario(self.scenario, dict(self.cards) or None)

    def atoms(self) -> set[Atom]:
        out = self.lhs.atoms() | self.rhs.atoms()
        for g in self.guards:
            out |= g.atoms()
        return out

    def __str__(self) -> str:
        return f"{self.lhs} {self.sense} {self.rhs}"

    def relabel(self, perms) -> "Witness":
        return Witness(self.key, self.lhs.relabel(perms), self.sense, self.rhs.relabel(perms),
                       self.scenario, self.level, self.targets, self.cards,
                       tuple((n, p.relabel(perms)) for n, p in self.parts),
                       tuple(g.relabel(perms) for g in self.guards), self.verified, self.note)

    def to_json(self) -> dict:
        return {"key": self.key, "scenario": self.scenario, "level": self.level,
                "targets": list(self.targets), "cards": dict(self.cards),
                "lhs": self.lhs.to_json(), "sense": self.sense, "rhs": self.rhs.to_json(),
                "parts": {n: p.to_json() for n, p in self.parts},
                "guards": [g.to_json() for g in self.guards],
                "verified": self.verified, "note": self.note, "text": str(self)}

    @staticmethod
    def from_json(d: dict) -> "Witness":
        return Witness(d["key"], Poly.from_json(d["lhs"]), d["sense"], Poly.from_json(d["rhs"]),
                       d["scenario"], d.get("level", "P"), tuple(d.get("targets", ())),
                       tuple(sorted(d.get("cards", {}).items())),
                       tuple((n, Poly.from_json(p)) for n, p in d.get("parts", {}).items()),
                       tuple(Poly.from_json(g) for g in d.get("guards", [])),
                       d.get("verified", True), d.get("note", ""))


class Resolver:
    """Looks up atom values in a hybrid dataset and/or an extended table."""

    def __init__(self, data: HybridDataset | DataTable, graph: CausalGraph | None = None):
        self.graph = graph
        if isinstance(data, DataTable):
            if not data.given:
                raise MissingTable("an extended table must have # variables as conditioning variables")
            self.q: DataTable | None = data
            self.hybrid: HybridDataset | None = None
        else:
            self.q = None
            self.hybrid = data
        self.exact = data.exact if isinstance(data, DataTable) else data.observational.exact
        self._q_by_marks: dict = {}

    def _hyb(self) -> HybridDataset:
        if self.hybrid is None:
            self.hybrid = project_to_hybrid(None, self.q)
        return self.hybrid

    def _ext(self, marks: tuple[str, ...]) -> DataTable:
        if self.q is not None and tuple(sorted(self.q.given)) == marks:
            return self.q
        if marks not in self._q_by_marks:
            if self.graph is None:
                raise MissingTable(f"no extended table over {list(marks)} available")
            self._q_by_marks[marks] = multi_ett_extend(self.graph, self._hyb(), [base_name(m) for m in marks])
        return self._q_by_marks[marks]

    def __call__(self, a: Atom):
        assign = dict(a.assign)
        try:
            if a.kind == OBS:
                return self._hyb().observational.prob(assign)
            if a.kind == DO:
                h = self._hyb()
                key = dokey({a.target: a.value})
                if key not in h.interventions:
                    raise MissingTable(f"P|do({a.target}={a.value})")
                return h.interventions[key].prob(assign)
            marks = tuple(sorted(k for k in assign if k.endswith("#")))
            return self._ext(marks).prob(assign)
        except UnknownVariable as e:
            raise MissingTable(f"{a}: {e}") from None


def value_of(poly: Poly, resolve, exact: bool):
    cache: dict = {}

    def look(a):
        if a not in cache:
            cache[a] = resolve(a)
        return cache[a]

    total_ = ZERO if exact else 0.0
    for (num, den), c in poly.terms.items():
        t = c if exact else float(c)
        for a in num:
            t = t * look(a)
        for a in den:
            d = look(a)
            if d == 0:
                raise DivisorZero(f"{a} is zero")
            t = t / d
        total_ = total_ + t
    return total_


def evaluate(w: Witness, data: HybridDataset | DataTable, graph: CausalGraph | None = None) -> Verdict:
    res = Resolver(data, graph if graph is not None else _graph_or_none(w))
    lhs = value_of(w.lhs, res, res.exact)
    rhs = value_of(w.rhs, res, res.exact)
    slack = rhs - lhs if w.sense == "<=" else lhs - rhs
    parts = {n: value_of(p, res, res.exact) for n, p in w.parts}
    return Verdict(lhs, rhs, bool(slack >= 0), slack, parts)


def guarded_evaluate(w: Witness, data, graph: CausalGraph | None = None, tol: float = 1e-12) -> Verdict:
    res = Resolver(data, graph if graph is not None else _graph_or_none(w))
    failed = []
    for g in w.guards:
        v = value_of(g, res, res.exact)
        if (v != 0) if res.exact else abs(v) > tol:
            failed.append(f"{g} = 0 (got {v})")
    if failed:
        raise GuardFailed(failed)
    return evaluate(w, data, graph)


def _graph_or_none(w: Witness):
    try:
        return w.graph()
    except Exception:
        return None


# ------------------------------------------------------------ pullbacks

def pullback(poly: Poly, graph: CausalGraph, targets: Iterable[str]) -> Poly:
    """Rewrite Q atoms as polynomials in observational and do atoms."""
    targets = sorted(targets)
    orig = _original_children(graph)
    # variables downstream of some target: only those can feel a # value
    downstream: set[str] = set()
    stack = [c for t in targets for c in orig.get(t, [])]
    while stack:
        n = stack.pop()
        if n not in downstream:
            downstream.add(n)
            stack.extend(orig.get(n, []))

    def leaf(dvals: dict, o: dict) -> Poly:
        if not dvals:
            return P(**o)
        (k, v), = dvals.items()
        return do(k, v, **o)

    expand = EttExpansion(orig, targets, leaf)

    def sub(a: Atom) -> Poly:
        if a.kind != EXT:
            return Poly.atom(a)
        assign = dict(a.assign)
        xs = {base_name(k): v for k, v in assign.items() if k.endswith("#")}
        o = {k: v for k, v in assign.items() if not k.endswith("#")}
        if sorted(xs) != targets:
            raise WitnessError(f"{a} does not match targets {targets}")
        if not set(o) & downstream:
            return P(**o)
        return expand.value(o, xs)

    return poly.map_atoms(sub)


def pullback_witness(w: Witness, key: str | None = None) -> Witness:
    g = w.graph()
    return Witness(key or w.key + "-pullback", pullback(w.lhs, g, w.targets), w.sense,
                   pullback(w.rhs, g, w.targets), w.scenario, "P", w.targets, w.cards,
                   tuple((n, pullback(p, g, w.targets)) for n, p in w.parts),
                   tuple(pullback(x, g, w.targets) for x in w.guards), w.verified, w.note)


# ------------------------------------------------------------ dataset relabeling

def relabel_table(t: DataTable, perms: Mapping[str, Mapping[int, int]]) -> DataTable:
    import numpy as np
    out = np.empty_like(t.entries)
    for o in t.outcomes():
        new = tuple(perms.get(base_name(n), {}).get(v, v) for n, v in zip(t.names, o))
        out[new] = t.entries[o]
    return DataTable(t.variables, out, t.given)


def relabel_dataset(h: HybridDataset, perms) -> HybridDataset:
    iv = {}
    for k, t in h.interventions.items():
        (n, v), = k
        v2 = perms.get(n, {}).get(v, v)
        iv[dokey({n: v2})] = relabel_table(t, perms)
    return HybridDataset(relabel_table(h.observational, perms), iv)
