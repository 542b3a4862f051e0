"""Latent-exogenous causal structures, interruption and the scenario registry."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .errors import (NotAnInterventionNode, NotFullSwig, TargetHasNoChildren,
                     TargetNotObserved, UnknownScenario, GraphError)

OBSERVED = "observed"
LATENT = "latent"
MARK = "interventionMark"
KINDS = (OBSERVED, LATENT, MARK)


@dataclass(frozen=True, order=True)
class Node:
    name: str
    kind: str
    card: int | None = None


def mark_name(target: str, child: str | None = None) -> str:
    """Name of the # node feeding `child` (or all children) of `target`."""
    return f"{target}#" if child is None else f"{target}#[{child}]"


def base_name(name: str) -> str:
    """Strip # decorations: 'A#' and 'A#[B]' both map to 'A'."""
    return name.split("#", 1)[0]


@dataclass(frozen=True)
class CausalGraph:
    nodes: tuple[Node, ...]
    edges: tuple[tuple[str, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(sorted(self.nodes, key=lambda n: n.name)))
        object.__setattr__(self, "edges", tuple(sorted(set(map(tuple, self.edges)))))

    @staticmethod
    def build(observed: dict[str, int], latents: dict[str, Iterable[str]] | None = None,
              edges: Iterable[tuple[str, str]] = (), marks: dict[str, int] | None = None) -> "CausalGraph":
        nodes = [Node(n, OBSERVED, c) for n, c in observed.items()]
        nodes += [Node(n, MARK, c) for n, c in (marks or {}).items()]
        es = list(edges)
        for lat, children in (latents or {}).items():
            nodes.append(Node(lat, LATENT, None))
            es += [(lat, ch) for ch in children]
        return CausalGraph(tuple(nodes), tuple(es))

    # lookups
    def node(self, name: str) -> Node:
        for n in self.nodes:
            if n.name == name:
                return n
        raise KeyError(name)

    def has(self, name: str) -> bool:
        return any(n.name == name for n in self.nodes)

    def names(self, kind: str | None = None) -> list[str]:
        return [n.name for n in self.nodes if kind is None or n.kind == kind]

    @property
    def observed(self) -> list[str]:
        return self.names(OBSERVED)

    @property
    def latents(self) -> list[str]:
        return self.names(LATENT)

    @property
    def marks(self) -> list[str]:
        return self.names(MARK)

    def card(self, name: str) -> int:
        c = self.node(name).card
        if c is None:
            raise GraphError(f"{name} has no cardinality")
        return c

    def parents(self, name: str) -> list[str]:
        return [p for p, c in self.edges if c == name]

    def children(self, name: str) -> list[str]:
        return [c for p, c in self.edges if p == name]

    def observed_parents(self, name: str) -> list[str]:
        return [p for p in self.parents(name) if self.node(p).kind != LATENT]

    def eligible_targets(self) -> list[str]:
        """Observed nodes with at least one observed child."""
        return [n for n in self.observed
                if any(self.node(c).kind == OBSERVED for c in self.children(n))]

    def to_json(self) -> dict:
        return {"nodes": [{"name": n.name, "kind": n.kind, **({"card": n.card} if n.card else {})}
                          for n in self.nodes],
                "edges": [list(e) for e in self.edges]}

    @staticmethod
    def from_json(d: dict) -> "CausalGraph":
        nodes = tuple(Node(n["name"], n.get("kind", OBSERVED), n.get("card")) for n in d["nodes"])
        return CausalGraph(nodes, tuple(tuple(e) for e in d["edges"]))

    def relabel(self, mapping: dict[str, str]) -> "CausalGraph":
        def rn(x):
            b = base_name(x)
            return mapping.get(x, mapping.get(b, b) + x[len(b):])
        return CausalGraph(tuple(Node(rn(n.name), n.kind, n.card) for n in self.nodes),
                           tuple((rn(p), rn(c)) for p, c in self.edges))


@dataclass
class ValidationReport:
    ok: bool
    violations: list[str] = field(default_factory=list)


def validate(graph: CausalGraph) -> ValidationReport:
    problems = []
    names = [n.name for n in graph.nodes]
    if len(set(names)) != len(names):
        problems.append("duplicate node names")
    known = set(names)
    for p, c in graph.edges:
        if p not in known or c not in known:
            problems.append(f"edge {p}->{c} references an unknown node")
    for n in graph.nodes:
        if n.kind not in KINDS:
            problems.append(f"{n.name}: unknown kind {n.kind}")
        if n.kind in (OBSERVED, MARK) and (not isinstance(n.card, int) or n.card < 1):
            problems.append(f"{n.name}: cardinality must be a positive integer")
    kinds = {n.name: n.kind for n in graph.nodes}
    for p, c in graph.edges:
        if kinds.get(c) == LATENT:
            problems.append(f"latent-exogeneity: latent {c} has parent {p}")
        if kinds.get(c) == MARK:
            problems.append(f"mark-exogeneity: # node {c} has parent {p}")
    if _has_cycle(known, graph.edges):
        problems.append("acyclicity: the edge relation has a cycle")
    return ValidationReport(not problems, problems)


def _has_cycle(nodes: set[str], edges) -> bool:
    adj: dict[str, list[str]] = {n: [] for n in nodes}
    for p, c in edges:
        adj.setdefault(p, []).append(c)
        adj.setdefault(c, [])
    state: dict[str, int] = {}

    def visit(u) -> bool:
        state[u] = 1
        for v in adj[u]:
            s = state.get(v, 0)
            if s == 1 or (s == 0 and visit(v)):
                return True
        state[u] = 2
        return False

    return any(state.get(n, 0) == 0 and visit(n) for n in adj)


def interrupt(graph: CausalGraph, targets: Iterable[str]) -> CausalGraph:
    targets = sorted(set(targets))
    nodes = list(graph.nodes)
    edges = list(graph.edges)
    for t in targets:
        if not graph.has(t) or graph.node(t).kind != OBSERVED:
            raise TargetNotObserved(t)
        if not graph.children(t):
            raise TargetHasNoChildren(t)
    for t in targets:
        m = mark_name(t)
        nodes.append(Node(m, MARK, graph.card(t)))
        edges = [(m, c) if p == t else (p, c) for p, c in edges]
    return CausalGraph(tuple(nodes), tuple(edges))


def is_full_swig(graph: CausalGraph) -> bool:
    return not any(graph.node(p).kind == OBSERVED and graph.node(c).kind == OBSERVED
                   for p, c in graph.edges)


def shared_children(swig: CausalGraph, xi: str, xj: str) -> set[str]:
    for x in (xi, xj):
        if not swig.has(x) or swig.node(x).kind != MARK:
            raise NotAnInterventionNode(x)
    obs = set(swig.observed)
    return set(swig.children(xi)) & set(swig.children(xj)) & obs


def full_swig(graph: CausalGraph) -> CausalGraph:
    return interrupt(graph, graph.eligible_targets())


def maximally_interrupt(graph: CausalGraph) -> CausalGraph:
    """Split every # node with several children into one # node per child edge."""
    if not is_full_swig(graph):
        raise NotFullSwig("maximal interruption needs a full SWIG")
    nodes, edges = [], []
    for n in graph.nodes:
        kids = graph.children(n.name)
        if n.kind == MARK and len(kids) > 1:
            b = base_name(n.name)
            for c in kids:
                m = mark_name(b, c)
                nodes.append(Node(m, MARK, n.card))
                edges.append((m, c))
        else:
            nodes.append(n)
            edges += [(n.name, c) for c in kids]
    return CausalGraph(tuple(nodes), tuple(edges))


# ---------------------------------------------------------------- registry

_TRIANGLE = {"alpha": ["B", "C"], "beta": ["A", "C"], "gamma": ["A", "B"]}

_REGISTRY_JSON = {
    "two-sources-AC": {"latents": {"gamma": ["A", "B"], "alpha": ["B", "C"]}, "edges": [["A", "C"]]},
    "two-sources-chain": {"latents": {"beta": ["A", "C"], "alpha": ["B", "C"]}, "edges": [["A", "B"], ["B", "C"]]},
    "two-sources-collider": {"latents": {"gamma": ["A", "C"], "alpha": ["A", "B"]}, "edges": [["A", "B"], ["C", "B"]]},
    "two-sources-full": {"latents": {"gamma": ["A", "B"], "alpha": ["B", "C"]},
              "edges": [["A", "B"], ["A", "C"], ["B", "C"]]},
    "instrumental": {"latents": {"alpha": ["B", "C"]}, "edges": [["A", "B"], ["B", "C"]]},
    "instrumental-direct": {"latents": {"alpha": ["B", "C"]}, "edges": [["A", "B"], ["B", "C"], ["A", "C"]]},
    "instrumental-two-sources": {"latents": {"gamma": ["A", "B"], "alpha": ["B", "C"]}, "edges": [["A", "B"], ["B", "C"]]},
    "evans-uc": {"latents": {"gamma": ["A", "B"], "alpha": ["B", "C"]}, "edges": [["B", "A"], ["B", "C"]]},
    "evans-extra-edge": {"latents": {"gamma": ["A", "B"], "alpha": ["B", "C"]},
                         "edges": [["B", "A"], ["B", "C"], ["A", "C"]]},
    "measurement-dependence": {"latents": {"lambda": ["A", "B", "C"]}, "edges": [["A", "B"], ["B", "C"]]},
    "bilocal-chain": {"latents": {"gamma": ["A", "B"], "alpha": ["A", "C"]}, "edges": [["A", "B"], ["B", "C"]]},
    "triangle-AB": {"latents": _TRIANGLE, "edges": [["A", "B"]]},
    "triangle-AB-AC": {"latents": _TRIANGLE, "edges": [["A", "B"], ["A", "C"]]},
    "triangle-chain": {"latents": _TRIANGLE, "edges": [["A", "B"], ["B", "C"]]},
    "triangle-collider": {"latents": _TRIANGLE, "edges": [["A", "B"], ["C", "B"]]},
    "triangle-3edges": {"latents": _TRIANGLE, "edges": [["A", "B"], ["B", "C"], ["A", "C"]]},
    # four three-node graphs whose full SWIG is saturated
    "edge-common-cause": {"latents": {"lambda": ["A", "B", "C"]},
                          "edges": [["A", "B"], ["B", "C"], ["A", "C"]]},
    "edge-two-sources": {"latents": {"gamma": ["A", "B"], "alpha": ["B", "C"]},
                         "edges": [["A", "B"], ["B", "C"], ["A", "C"]]},
    "edge-common-cause-noAB": {"latents": {"lambda": ["A", "B", "C"]}, "edges": [["B", "C"], ["A", "C"]]},
    "edge-two-sources-noAB": {"latents": {"gamma": ["A", "B"], "alpha": ["B", "C"]},
                              "edges": [["B", "C"], ["A", "C"]]},
    # helpers
    "bell-bipartite": {"observed": {"X": 2, "Y": 2, "A": 2, "B": 2},
                       "latents": {"lambda": ["A", "B"]}, "edges": [["X", "A"], ["Y", "B"]]},
    "collider": {"observed": {"X0": 2, "X1": 2, "Y": 2}, "latents": {},
                 "edges": [["X0", "Y"], ["X1", "Y"]]},
}

# alias id -> (registered id, relabeling of observed nodes)
ALIASES: dict[str, tuple[str, dict[str, str]]] = {
    "evans": ("evans-uc", {}),
    "bilocal": ("bilocal-chain", {}),
    # the instrumental structure with the roles of the sources read from the other end
    "instrumental-reversed": ("instrumental", {"A": "C", "C": "A"}),
}

NOTES = {
    "instrumental": "only B is intervened on; A stays an exogenous instrument",
    "measurement-dependence": "|A| may be raised to 3 with --card A=3",
    "bell-bipartite": "inputs X, Y and outputs A, B sharing one source",
}


def _entry_to_graph(entry: dict) -> CausalGraph:
    if "nodes" in entry:
        return CausalGraph.from_json(entry)
    observed = dict(entry.get("observed", {}))
    for lat, kids in entry.get("latents", {}).items():
        for k in kids:
            observed.setdefault(k, 2)
    for p, c in entry.get("edges", []):
        observed.setdefault(p, 2)
        observed.setdefault(c, 2)
    return CausalGraph.build(observed, entry.get("latents", {}), [tuple(e) for e in entry["edges"]])


_override: dict[str, dict] = {}


def load_scenario_file(path: str | Path) -> list[str]:
    """Register scenarios from a JSON file: either one graph or a map id -> graph."""
    data = json.loads(Path(path).read_text())
    if "nodes" in data and "edges" in data:
        data = {Path(path).stem: data}
    for key, entry in data.items():
        g = _entry_to_graph(entry)
        rep = validate(g)
        if not rep.ok:
            raise GraphError(f"scenario {key}: " + "; ".join(rep.violations))
        _override[key] = entry
    return list(data)


def scenario_ids(include_aliases: bool = False) -> list[str]:
    ids = sorted(set(_REGISTRY_JSON) | set(_override))
    return ids + sorted(ALIASES) if include_aliases else ids


def scenario(sid: str, cards: dict[str, int] | None = None) -> CausalGraph:
    mapping: dict[str, str] = {}
    if sid in ALIASES:
        sid, mapping = ALIASES[sid]
    entry = _override.get(sid, _REGISTRY_JSON.get(sid))
    if entry is None:
        raise UnknownScenario(sid)
    g = _entry_to_graph(entry)
    if cards:
        g = CausalGraph(tuple(Node(n.name, n.kind, cards.get(n.name, n.card)) for n in g.nodes), g.edges)
    return g.relabel(mapping) if mapping else g
