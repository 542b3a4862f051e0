"""Born rule on small networks of quantum and classical sources."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, IncompletePovm, TableError
from .graphs import LATENT, CausalGraph, base_name, interrupt
from .scalar import Scalar, snap
from .tables import DataTable, HybridDataset, dokey, marginalize, table_from_function

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def ket(*bits: int) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int("".join(map(str, bits)), 2) if bits else 0] = 1
    return v


def proj(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


PHI_PLUS = (ket(0, 0) + ket(1, 1)) / np.sqrt(2)


def werner(v: float) -> np.ndarray:
    return v * proj(PHI_PLUS) + (1 - v) * np.eye(4) / 4


def observable_povm(obs: np.ndarray) -> list[np.ndarray]:
    """Two-outcome POVM of a +/-1 observable; outcome 0 is the +1 eigenspace."""
    d = obs.shape[0]
    return [(np.eye(d) + obs) / 2, (np.eye(d) - obs) / 2]


def classical_state(probs: Sequence[float], copies: int = 1) -> np.ndarray:
    """Diagonal state handing the same classical value to `copies` receivers."""
    k = len(probs)
    dim = k ** copies
    rho = np.zeros((dim, dim), dtype=complex)
    for v, p in enumerate(probs):
        idx = sum(v * k ** i for i in range(copies))
        rho[idx, idx] = p
    return rho


def deterministic(card: int, value: int) -> list[np.ndarray]:
    """Scalar POVM (1x1 elements) that always outputs `value`."""
    return [np.eye(1, dtype=complex) * (1.0 if k == value else 0.0) for k in range(card)]


def relabel_povm(povm: Sequence[np.ndarray], card: int, f: Callable[[int], int]) -> list[np.ndarray]:
    """Coarse-grain/relabel: outcome k of `povm` is reported as f(k)."""
    d = povm[0].shape[0]
    out = [np.zeros((d, d), dtype=complex) for _ in range(card)]
    for k, e in enumerate(povm):
        out[f(k)] = out[f(k)] + e
    return out


@dataclass
class Source:
    state: np.ndarray
    parts: list[tuple[str, int]]  # (receiving node, subsystem dimension), in tensor order


@dataclass
class ClassicalSource:
    probs: list[float]
    receivers: list[str]


# Response: parent values (keyed by base node name; classical latents by latent
# name) -> list of POVM elements on the node's quantum subsystems.
Response = Callable[[Mapping[str, int]], Sequence[np.ndarray]]


@dataclass
class NetworkStrategy:
    """Quantum sources, classical sources and per-node measurement rules.

    A node's local space is the tensor product of the subsystems it receives
    from quantum sources, ordered by source name and then by position in the
    source. Classical sources are folded into diagonal states when evaluated.
    """
    sources: dict[str, Source] = field(default_factory=dict)
    classical: dict[str, ClassicalSource] = field(default_factory=dict)
    responses: dict[str, Response] = field(default_factory=dict)
    name: str = ""
    params: dict = field(default_factory=dict)

    def local_layout(self, node: str) -> tuple[list[tuple[str, int, int]], list[tuple[str, int]]]:
        """Quantum factors (source, index, dim) and classical factors (latent, card) of a node."""
        q = [(s, i, d) for s in sorted(self.sources)
             for i, (n, d) in enumerate(self.sources[s].parts) if n == node]
        c = [(l, len(cs.probs)) for l, cs in sorted(self.classical.items()) if node in cs.receivers]
        return q, c

    def check(self, tol: float = 1e-10) -> list[str]:
        problems = []
        for name, src in self.sources.items():
            rho = src.state
            dim = int(np.prod([d for _, d in src.parts]))
            if rho.shape != (dim, dim):
                problems.append(f"{name}: state is {rho.shape}, parts give {dim}")
                continue
            if np.abs(rho - rho.conj().T).max() > tol:
                problems.append(f"{name}: not Hermitian")
            if abs(np.trace(rho) - 1) > tol:
                problems.append(f"{name}: trace {np.trace(rho).real}")
            if np.linalg.eigvalsh((rho + rho.conj().T) / 2).min() < -tol:
                problems.append(f"{name}: not positive semidefinite")
        for name, cs in self.classical.items():
            if abs(sum(cs.probs) - 1) > tol or min(cs.probs) < -tol:
                problems.append(f"{name}: invalid classical distribution")
        return problems


def _global_state(strat: NetworkStrategy, nodes: list[str]):
    """Joint state with subsystems regrouped node by node; returns (rho, local dims)."""
    factors = []  # (node, dim, kind-order key)
    mats = []
    for s in sorted(strat.sources):
        src = strat.sources[s]
        mats.append(src.state)
        for i, (n, d) in enumerate(src.parts):
            factors.append((n, d, (0, s, i)))
    for l in sorted(strat.classical):
        cs = strat.classical[l]
        k = len(cs.probs)
        mats.append(classical_state(cs.probs, len(cs.receivers)))
        for i, n in enumerate(cs.receivers):
            factors.append((n, k, (1, l, i)))
    for n, _, _ in factors:
        if n not in nodes:
            raise DimensionMismatch(f"source subsystem sent to unknown node {n}")
    rho = np.array([[1.0 + 0j]])
    for m in mats:
        rho = np.kron(rho, m)
    dims = [d for _, d, _ in factors]
    order = sorted(range(len(factors)), key=lambda i: (nodes.index(factors[i][0]), factors[i][2]))
    if factors:
        t = rho.reshape(dims + dims)
        n = len(dims)
        t = t.transpose(order + [n + i for i in order])
        total = int(np.prod(dims))
        rho = t.reshape(total, total)
    local = {node: 1 for node in nodes}
    for n, d, _ in factors:
        local[n] *= d
    return rho, local


def _node_povm(strat: NetworkStrategy, node: str, pv: dict, card: int, local_dim: int):
    qf, cf = strat.local_layout(node)
    qdim = int(np.prod([d for _, _, d in qf])) if qf else 1
    cdim = int(np.prod([k for _, k in cf])) if cf else 1
    if qdim * cdim != local_dim:
        raise DimensionMismatch(f"{node}: local dimension {local_dim} != {qdim}*{cdim}")
    out = [np.zeros((local_dim, local_dim), dtype=complex) for _ in range(card)]
    for cvals in itertools.product(*(range(k) for _, k in cf)):
        env = dict(pv)
        env.update({l: v for (l, _), v in zip(cf, cvals)})
        elems = strat.responses[node](env)
        if len(elems) != card:
            raise IncompletePovm(f"{node}: {len(elems)} outcomes, expected {card}")
        total = sum(np.asarray(e, dtype=complex) for e in elems)
        if np.abs(total - np.eye(qdim)).max() > 1e-10:
            raise IncompletePovm(f"{node}: elements do not sum to identity for {env}")
        cproj = np.zeros((cdim, cdim), dtype=complex)
        idx = 0
        for (_, k), v in zip(cf, cvals):
            idx = idx * k + v
        cproj[idx, idx] = 1
        for k, e in enumerate(elems):
            e = np.asarray(e, dtype=complex)
            if e.shape != (qdim, qdim):
                raise DimensionMismatch(f"{node}: element shape {e.shape}, expected {(qdim, qdim)}")
            out[k] += np.kron(e, cproj)
    return out


def born_float(graph: CausalGraph, strat: NetworkStrategy) -> DataTable:
    """Float table over observed nodes given the # nodes of `graph`."""
    obs, marks = graph.observed, graph.marks
    problems = strat.check()
    if problems:
        raise DimensionMismatch("; ".join(problems))
    missing = [n for n in obs if n not in strat.responses]
    if missing:
        raise DimensionMismatch(f"no response for {missing}")
    rho, local = _global_state(strat, obs)
    cards = {n: graph.card(n) for n in obs + marks}
    variables = tuple((n, cards[n]) for n in obs) + tuple((m, cards[m]) for m in marks)
    arr = np.zeros(tuple(c for _, c in variables))
    parents = {n: [p for p in graph.parents(n) if graph.node(p).kind != LATENT] for n in obs}
    cache: dict = {}

    def povm_for(n, pv):
        key = (n, tuple(sorted(pv.items())))
        if key not in cache:
            cache[key] = _node_povm(strat, n, pv, cards[n], local[n])
        return cache[key]

    for mv in itertools.product(*(range(cards[m]) for m in marks)):
        menv = dict(zip(marks, mv))
        for ov in itertools.product(*(range(cards[n]) for n in obs)):
            env = {**menv, **dict(zip(obs, ov))}
            op = np.array([[1.0 + 0j]])
            for n in obs:
                pv = {base_name(p): env[p] for p in parents[n]}
                povm = povm_for(n, pv)
                op = np.kron(op, povm[env[n]])
            arr[ov + mv] = float(np.real(np.sum(rho * op.T)))
    return DataTable(variables, arr, tuple(marks))


def snap_table(t: DataTable, tol: float = 1e-10) -> DataTable:
    """Check normalization, snap entries into Q(sqrt2) and renormalize exactly."""
    if t.exact:
        return t
    probs = t.check(tol)
    if probs:
        raise TableError("; ".join(probs))
    def sn(x):
        s = snap(float(x))
        if s is None:
            raise TableError(f"entry {x!r} has no small exact form")
        return s
    ex = t.map(sn)
    # renormalize each conditioning slice exactly
    given = list(ex.given)
    if not given:
        z = ex.prob({})
        return ex if z == 1 else ex.map(lambda v: v / z)
    arr = ex.entries.copy()
    for g in itertools.product(*(range(ex.card(n)) for n in given)):
        z = ex.prob(dict(zip(given, g)))
        if z != 1:
            idx = tuple(g[given.index(n)] if n in given else slice(None) for n in ex.names)
            arr[idx] = np.vectorize(lambda v: v / z, otypes=[object])(arr[idx])
    return DataTable(ex.variables, arr, ex.given)


def born_table(graph: CausalGraph, strat: NetworkStrategy, exact: bool = True) -> DataTable:
    t = born_float(graph, strat)
    return snap_table(t) if exact else t


def do_table(graph: CausalGraph, strat: NetworkStrategy, target: str, value: int,
             exact: bool = True) -> DataTable:
    """P(rest | do(target=value)): children of the target receive `value`."""
    rest = [n for n in graph.observed if n != target]
    if not graph.children(target):
        return marginalize(born_table(graph, strat, exact), rest)
    swig = interrupt(graph, [target])
    q = born_table(swig, strat, exact)
    m = target + "#"
    return table_from_function(tuple((n, graph.card(n)) for n in rest),
                               lambda *o: q.prob({**dict(zip(rest, o)), m: value}), exact=exact)


def hybrid_from_strategy(graph: CausalGraph, strat: NetworkStrategy, targets: Sequence[str],
                         exact: bool = True) -> HybridDataset:
    obs = born_table(graph, strat, exact)
    iv = {}
    for t in targets:
        for x in range(graph.card(t)):
            iv[dokey({t: x})] = do_table(graph, strat, t, x, exact)
    return HybridDataset(obs, iv)


def strategy_to_json(graph: CausalGraph, strat: NetworkStrategy) -> dict:
    def cplx(m):
        m = np.asarray(m, dtype=complex)
        return {"shape": list(m.shape), "re": m.real.ravel().tolist(), "im": m.imag.ravel().tolist()}

    full = interrupt(graph, graph.eligible_targets()) if graph.eligible_targets() else graph
    out = {"name": strat.name, "params": strat.params,
           "sources": {s: {"parts": src.parts, "state": cplx(src.state)} for s, src in strat.sources.items()},
           "classical": {l: {"probs": cs.probs, "receivers": cs.receivers} for l, cs in strat.classical.items()},
           "povms": {}}
    for n in graph.observed:
        pars = sorted({base_name(p) for p in full.parents(n) if full.node(p).kind != LATENT})
        _, cf = strat.local_layout(n)
        keys = pars + [l for l, _ in cf]
        ranges = [range(graph.card(p)) for p in pars] + [range(k) for _, k in cf]
        entries = []
        for vals in itertools.product(*ranges):
            env = dict(zip(keys, vals))
            entries.append({"setting": env, "elements": [cplx(e) for e in strat.responses[n](env)]})
        out["povms"][n] = entries
    return out
