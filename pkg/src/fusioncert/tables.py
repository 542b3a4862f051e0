"""Probability tables, hybrid datasets and the extension maps onto SWIGs."""
from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from .errors import (InconsistentTables, MissingTable, SharedChildrenNonEmpty,
                     TargetNotBinary, UnknownVariable, ZeroProbabilityEvent, TableError)
from .graphs import CausalGraph, LATENT, OBSERVED, base_name, interrupt, mark_name, shared_children
from .scalar import ONE, ZERO, Scalar, to_scalar

Assignment = Mapping[str, int]


def _zero_like(exact: bool):
    return ZERO if exact else 0.0


@dataclass(frozen=True, eq=False)
class DataTable:
    """Dense table over named discrete variables.

    `given` lists the conditioning variables; those are also axes of `entries`
    and the table is normalized separately for each of their assignments.
    """
    variables: tuple[tuple[str, int], ...]
    entries: np.ndarray
    given: tuple[str, ...] = ()

    def __post_init__(self):
        shape = tuple(c for _, c in self.variables)
        if self.entries.shape != shape:
            raise TableError(f"entries shape {self.entries.shape} does not match {shape}")

    # basic views
    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.variables]

    @property
    def free(self) -> list[str]:
        return [n for n in self.names if n not in self.given]

    @property
    def exact(self) -> bool:
        return self.entries.dtype == object

    def card(self, name: str) -> int:
        for n, c in self.variables:
            if n == name:
                return c
        raise UnknownVariable(name)

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownVariable(name) from None

    def outcomes(self) -> Iterable[tuple[int, ...]]:
        return itertools.product(*(range(c) for _, c in self.variables))

    def __getitem__(self, key):
        if isinstance(key, Mapping):
            return self.prob(key)
        return self.entries[key]

    def prob(self, assignment: Assignment):
        """Entry for a possibly partial assignment; missing free variables are summed out."""
        idx = []
        for n in self.names:
            if n in assignment:
                idx.append(int(assignment[n]))
            elif n in self.given:
                raise TableError(f"conditioning variable {n} must be assigned")
            else:
                idx.append(slice(None))
        for k in assignment:
            if k not in self.names:
                raise UnknownVariable(k)
        sub = self.entries[tuple(idx)]
        if isinstance(sub, np.ndarray):
            return _sum(sub.ravel(), self.exact)
        return sub

    def map(self, fn) -> "DataTable":
        flat = [fn(v) for v in self.entries.ravel()]
        dtype = object if flat and isinstance(flat[0], Scalar) else float
        arr = np.empty(len(flat), dtype=dtype)
        arr[:] = flat
        return DataTable(self.variables, arr.reshape(self.entries.shape), self.given)

    def to_float(self) -> "DataTable":
        return self if not self.exact else self.map(float)

    def to_exact(self) -> "DataTable":
        return self if self.exact else self.map(to_scalar)

    # invariants
    def check(self, tol: float = 1e-10) -> list[str]:
        problems = []
        for o in self.outcomes():
            v = self.entries[o]
            if (v < 0) if self.exact else (v < -tol):
                problems.append(f"negative entry at {dict(zip(self.names, o))}: {v}")
        for g in itertools.product(*(range(self.card(n)) for n in self.given)):
            s = self.prob(dict(zip(self.given, g)))
            bad = (s != ONE) if self.exact else abs(s - 1.0) > tol
            if bad:
                problems.append(f"slice {dict(zip(self.given, g))} sums to {s}")
        return problems

    def equals(self, other: "DataTable", tol: float = 0.0) -> bool:
        if self.names != other.names:
            other = other.reorder(self.names)
        if self.exact and other.exact and tol == 0.0:
            return all(a == b for a, b in zip(self.entries.ravel(), other.entries.ravel()))
        a = np.array([float(x) for x in self.entries.ravel()])
        b = np.array([float(x) for x in other.entries.ravel()])
        return bool(np.all(np.abs(a - b) <= tol))

    def reorder(self, names: list[str]) -> "DataTable":
        if sorted(names) != sorted(self.names):
            raise UnknownVariable(f"{names} vs {self.names}")
        perm = [self.axis(n) for n in names]
        return DataTable(tuple(self.variables[i] for i in perm), self.entries.transpose(perm), self.given)

    # json / csv
    def to_json(self) -> dict:
        def enc(v):
            return v.to_json() if isinstance(v, Scalar) else float(v)
        return {"vars": [{"name": n, "card": c} for n, c in self.variables],
                "kind": "conditional" if self.given else "joint",
                "given": list(self.given),
                "entries": [enc(v) for v in self.entries.ravel()]}

    @staticmethod
    def from_json(d: dict) -> "DataTable":
        variables = tuple((v["name"], int(v["card"])) for v in d["vars"])
        raw = d["entries"]
        if raw and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in raw) \
                and any(isinstance(x, float) for x in raw):
            arr = np.array(raw, dtype=float)
        else:
            arr = np.empty(len(raw), dtype=object)
            arr[:] = [Scalar.from_json(x) for x in raw]
        shape = tuple(c for _, c in variables)
        return DataTable(variables, arr.reshape(shape), tuple(d.get("given", ())))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(self.names + ["exact", "value"])
        for o in self.outcomes():
            v = self.entries[o]
            w.writerow(list(o) + [str(v), f"{float(v):.12g}"])
        return buf.getvalue()


def _sum(values, exact: bool):
    total = ZERO if exact else 0.0
    for v in values:
        total = total + v
    return total


def table_from_function(variables, fn, given=(), exact=True) -> DataTable:
    variables = tuple((n, int(c)) for n, c in variables)
    shape = tuple(c for _, c in variables)
    arr = np.empty(shape, dtype=object if exact else float)
    for o in itertools.product(*(range(c) for c in shape)):
        arr[o] = fn(*o)
    return DataTable(variables, arr, tuple(given))


def uniform_table(variables, exact=True) -> DataTable:
    n = int(np.prod([c for _, c in variables]))
    v = Scalar(1) / n if exact else 1.0 / n
    return table_from_function(variables, lambda *o: v, exact=exact)


def marginalize(t: DataTable, keep: Iterable[str]) -> DataTable:
    keep = list(keep)
    for k in keep:
        t.axis(k)
    keep_order = [n for n in t.names if n in keep or n in t.given]
    variables = tuple((n, t.card(n)) for n in keep_order)
    return table_from_function(variables, lambda *o: t.prob(dict(zip(keep_order, o))),
                               given=t.given, exact=t.exact)


def condition(t: DataTable, on: Assignment) -> DataTable:
    """Slice at `on` and renormalize; the conditioned variables are dropped."""
    for k in on:
        t.axis(k)
    z = t.prob(dict(on))
    if (z == ZERO) if t.exact else z <= 0:
        raise ZeroProbabilityEvent(dict(on))
    rest = [n for n in t.names if n not in on]
    variables = tuple((n, t.card(n)) for n in rest)
    return table_from_function(variables, lambda *o: t.prob({**on, **dict(zip(rest, o))}) / z,
                               given=tuple(g for g in t.given if g not in on), exact=t.exact)


def dokey(assign: Mapping[str, int]) -> tuple[tuple[str, int], ...]:
    return tuple(sorted((k, int(v)) for k, v in assign.items()))


@dataclass
class HybridDataset:
    observational: DataTable
    interventions: dict = field(default_factory=dict)

    @property
    def exact(self) -> bool:
        return self.observational.exact

    def do(self, target: str, value: int) -> DataTable:
        key = dokey({target: value})
        if key not in self.interventions:
            raise MissingTable(f"P(.|do({target}={value}))")
        return self.interventions[key]

    def has_do(self, target: str) -> bool:
        card = self.observational.card(target)
        return all(dokey({target: v}) in self.interventions for v in range(card))

    def targets(self) -> list[str]:
        return sorted({k[0][0] for k in self.interventions if len(k) == 1})

    def subset(self, targets: Iterable[str], observational: bool = True) -> "HybridDataset":
        ts = set(targets)
        iv = {k: v for k, v in self.interventions.items() if {n for n, _ in k} <= ts}
        return HybridDataset(self.observational, iv) if observational else HybridDataset(self.observational, iv)

    def tables(self) -> dict[str, DataTable]:
        out = {"P": self.observational}
        for k, t in sorted(self.interventions.items()):
            out["P|do(" + ",".join(f"{n}={v}" for n, v in k) + ")"] = t
        return out

    def check(self) -> list[str]:
        probs = []
        for name, t in self.tables().items():
            probs += [f"{name}: {p}" for p in t.check()]
        return probs

    def to_float(self) -> "HybridDataset":
        return HybridDataset(self.observational.to_float(),
                             {k: v.to_float() for k, v in self.interventions.items()})

    def to_json(self) -> dict:
        return {"observational": self.observational.to_json(),
                "interventions": [{"do": dict(k), "table": t.to_json()}
                                  for k, t in sorted(self.interventions.items())]}

    @staticmethod
    def from_json(d: dict) -> "HybridDataset":
        obs = DataTable.from_json(d["observational"])
        iv = {dokey(e["do"]): DataTable.from_json(e["table"]) for e in d.get("interventions", [])}
        return HybridDataset(obs, iv)

    def equals(self, other: "HybridDataset", tol: float = 0.0) -> bool:
        if set(self.interventions) != set(other.interventions):
            return False
        return self.observational.equals(other.observational, tol) and all(
            t.equals(other.interventions[k], tol) for k, t in self.interventions.items())


# ------------------------------------------------------------------ ETT maps

def _check_targets(graph: CausalGraph, data: HybridDataset, targets: list[str]):
    for t in targets:
        if data.observational.card(t) != 2:
            raise TargetNotBinary(t)
        if not data.has_do(t):
            raise MissingTable(f"do-tables for {t}")


def multi_ett_extend(graph: CausalGraph, data: HybridDataset, targets: Iterable[str],
                     check: bool = True) -> DataTable:
    """Extended table Q(observed | targets#) from observational and single-target do-tables.

    `graph` may be the original DAG or a SWIG of it; edges out of a # node
    are read as edges out of its base node.
    """
    targets = sorted(set(targets))
    orig = _original_children(graph)
    _check_targets(graph, data, targets)
    swig = interrupt(_strip_marks(graph), targets)
    for i, a in enumerate(targets):
        for b in targets[i + 1:]:
            common = shared_children(swig, mark_name(a), mark_name(b))
            if common:
                raise SharedChildrenNonEmpty(f"{a}#, {b}# share {sorted(common)}")
    observed = [n for n in data.observational.names]
    exact = data.exact
    cards = {n: data.observational.card(n) for n in observed}

    def leaf(dvals: dict, o: dict):
        if not dvals:
            return data.observational.prob(o)
        (k, v), = dvals.items()
        return data.do(k, v).prob(o)

    expand = EttExpansion(orig, targets, leaf)
    marks = [mark_name(t) for t in targets]
    variables = tuple((n, cards[n]) for n in observed) + tuple((m, cards[t]) for m, t in zip(marks, targets))

    def entry(*vals):
        o = tuple(sorted(zip(observed, vals[:len(observed)])))
        xs = tuple(sorted(zip(targets, vals[len(observed):])))
        return expand.value(dict(o), dict(xs))

    q = table_from_function(variables, entry, given=tuple(marks), exact=exact)
    if check:
        neg = [o for o in q.outcomes() if (q.entries[o] < 0 if exact else q.entries[o] < -1e-12)]
        if neg:
            raise InconsistentTables(f"{len(neg)} negative extended entries, first at "
                                     f"{dict(zip(q.names, neg[0]))}: {q.entries[neg[0]]}")
        probs = q.check()
        if probs:
            raise InconsistentTables(probs[0])
    return q


class EttExpansion:
    """Recursive form of the extension maps for binary targets.

    value(o, xs) gives Q(o | targets# = xs) for a possibly partial observed
    assignment `o`, in terms of leaf(do_assignment, o') where do_assignment has
    at most one entry. Works for any leaf values supporting + and -.
    """

    def __init__(self, orig_children: dict, targets, leaf):
        self.orig = orig_children
        self.targets = list(targets)
        self.leaf = leaf
        self._memo: dict = {}

    def value(self, o: dict, xs: dict):
        # targets absent from o are summed out, i.e. intervened on at their # value
        dset = {t: xs[t] for t in self.targets if t in xs and t not in o}
        xs = {t: v for t, v in xs.items() if t in o}
        return self._rec(tuple(sorted(dset.items())), tuple(sorted(o.items())), tuple(sorted(xs.items())))

    def _rec(self, dvals: tuple, o: tuple, xs: tuple):
        key = (dvals, o, xs)
        if key in self._memo:
            return self._memo[key]
        od, xd, dd = dict(o), dict(xs), dict(dvals)
        mism = [j for j in sorted(xd) if od[j] != xd[j]]
        if not mism:
            relevant = {k: v for k, v in dd.items()
                        if any(c not in dd for c in self.orig.get(k, ()))}
            if len(relevant) > 1:
                raise SharedChildrenNonEmpty(f"{sorted(relevant)} would need a joint intervention")
            res = self.leaf(relevant, {k: v for k, v in od.items()})
        else:
            j = mism[0]
            d2 = tuple(sorted({**dd, j: xd[j]}.items()))
            o_minus = tuple((k, v) for k, v in o if k != j)
            xs_minus = tuple((k, v) for k, v in xs if k != j)
            o_match = tuple(sorted({**od, j: xd[j]}.items()))
            res = self._rec(d2, o_minus, xs_minus) - self._rec(dvals, o_match, xs)
        self._memo[key] = res
        return res


def ett_extend(graph: CausalGraph, data: HybridDataset, target: str) -> DataTable:
    return multi_ett_extend(graph, data, [target])


def project_to_hybrid(swig: CausalGraph | None, q: DataTable, targets: Iterable[str] | None = None) -> HybridDataset:
    """Inverse of the extension maps: observational plus single-target do-tables."""
    marks = list(q.given)
    tmap = {base_name(m): m for m in marks}
    targets = sorted(tmap) if targets is None else sorted(targets)
    observed = q.free
    cards = {n: q.card(n) for n in observed}
    obs_vars = tuple((n, cards[n]) for n in observed)

    def obs_entry(*o):
        od = dict(zip(observed, o))
        return q.prob({**od, **{tmap[t]: od[t] for t in tmap}})

    obs = table_from_function(obs_vars, obs_entry, exact=q.exact)
    iv = {}
    for t in targets:
        rest = [n for n in observed if n != t]
        rvars = tuple((n, cards[n]) for n in rest)
        for x in range(cards[t]):
            def do_entry(*o, t=t, x=x, rest=rest):
                od = dict(zip(rest, o))
                marks_val = {tmap[s]: od[s] for s in tmap if s != t}
                marks_val[tmap[t]] = x
                return q.prob({**od, **marks_val})
            iv[dokey({t: x})] = table_from_function(rvars, do_entry, exact=q.exact)
    return HybridDataset(obs, iv)


def _strip_marks(graph: CausalGraph) -> CausalGraph:
    """Recover the original DAG from a SWIG (edges from X# become edges from X)."""
    from .graphs import MARK, Node
    if not graph.marks:
        return graph
    nodes = tuple(n for n in graph.nodes if n.kind != MARK)
    edges = tuple((base_name(p), c) if graph.node(p).kind == MARK else (p, c) for p, c in graph.edges)
    return CausalGraph(nodes, edges)


def _original_children(graph: CausalGraph) -> dict[str, list[str]]:
    g = _strip_marks(graph)
    return {n: [c for c in g.children(n) if g.node(c).kind == OBSERVED] for n in g.observed}


def product_dataset(p_first: DataTable, p_rest: DataTable, target: str) -> HybridDataset:
    """P = P_target * P_rest with do-tables equal to P_rest (target has no influence)."""
    names = p_first.names + p_rest.names
    variables = tuple(p_first.variables) + tuple(p_rest.variables)
    n1 = len(p_first.names)
    obs = table_from_function(variables, lambda *o: p_first.entries[o[:n1]] * p_rest.entries[o[n1:]],
                              exact=p_first.exact)
    iv = {dokey({target: x}): p_rest for x in range(p_first.card(target))}
    return HybridDataset(obs, iv)
