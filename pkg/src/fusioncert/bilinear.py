"""Independent-sources feasibility for two-source unpacked models.

The unpacked joint q is constrained linearly by the data; the two sources make the
marginal on the left block times the marginal on the right block equal to the marginal
on their union. M(q) = sum |q_LR - q_L q_R| measures how far q is from that.
Upper bounds come from alternating LPs (see-saw), lower bounds from a McCormick
relaxation of the products refined by best-first branch and bound.
"""
from __future__ import annotations

import heapq
import itertools
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .errors import BudgetExceeded, FusionError, Infeasible, MissingTable, ZeroProbabilityEvent
from .geometry import unpack
from .graphs import CausalGraph
from .witness import Resolver

DEFAULT_GAP = 1e-3
ZERO_TOL = 1e-9


@dataclass
class FactorizationProblem:
    variables: list[str]
    cards: list[int]
    A: np.ndarray            # data constraints A q = b on the unpacked joint
    b: np.ndarray
    left: tuple[int, ...]    # indices into `variables`
    right: tuple[int, ...]
    labels: list[str] = field(default_factory=list)
    dropped: list[str] = field(default_factory=list)

    def __post_init__(self):
        if set(self.left) & set(self.right):
            raise FusionError("factor blocks must be disjoint")
        self.A = np.asarray(self.A, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        joint = list(itertools.product(*(range(c) for c in self.cards)))
        self.size = len(joint)
        lvals = list(itertools.product(*(range(self.cards[i]) for i in self.left)))
        rvals = list(itertools.product(*(range(self.cards[i]) for i in self.right)))
        lpos = {v: k for k, v in enumerate(lvals)}
        rpos = {v: k for k, v in enumerate(rvals)}
        self.nl, self.nr = len(lvals), len(rvals)
        self.ml = np.zeros((self.nl, self.size))
        self.mr = np.zeros((self.nr, self.size))
        self.mlr = np.zeros((self.nl * self.nr, self.size))
        for j, x in enumerate(joint):
            li = lpos[tuple(x[i] for i in self.left)]
            ri = rpos[tuple(x[i] for i in self.right)]
            self.ml[li, j] = 1
            self.mr[ri, j] = 1
            self.mlr[li * self.nr + ri, j] = 1

    def measure(self, q: np.ndarray) -> float:
        u, w = self.ml @ q, self.mr @ q
        return float(np.abs(self.mlr @ q - np.outer(u, w).ravel()).sum())

    def residual(self, q: np.ndarray) -> float:
        return float(np.abs(self.A @ q - self.b).max(initial=0.0))


@dataclass
class MqResult:
    lower: float
    upper: float
    model: np.ndarray
    gap_tol: float
    iterations: int = 0
    nodes: int = 0
    seconds: float = 0.0

    def to_json(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "model": [float(x) for x in self.model],
                "iterations": self.iterations, "nodes": self.nodes, "gap": self.gap_tol}


@dataclass
class Compatible:
    model: np.ndarray
    result: MqResult


@dataclass
class Incompatible:
    lower: float
    result: MqResult


def _blocks(swig: CausalGraph, cfs) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Counterfactual indices driven by exactly one shared latent, one block per latent."""
    lat = [n for n in swig.latents]
    src = {}
    for k, cf in enumerate(cfs):
        ps = tuple(sorted(p for p in swig.parents(cf.node) if p in lat))
        src.setdefault(ps, []).append(k)
    singles = sorted((ps, ks) for ps, ks in src.items() if len(ps) == 1)
    if len(singles) != 2:
        raise FusionError(f"need exactly two single-source blocks, found {len(singles)}")
    return tuple(singles[0][1]), tuple(singles[1][1])


def factorization_problem(graph: CausalGraph, query, data, targets=None) -> FactorizationProblem:
    """Data constraints of `query` tables on the unpacked two-source model of `graph`."""
    spec = unpack(graph, query, targets=targets, shared_ok=True)
    res = Resolver(data, graph)
    rows, rhs, labels, dropped = [], [], [], []
    for atom, row in zip(spec.coords, spec.matrix):
        try:
            val = float(res(atom))
        except (MissingTable, ZeroProbabilityEvent) as e:
            dropped.append(f"{atom}: {e}")
            continue
        r = [float(x) for x in row]
        if not any(r):
            if abs(val) > 1e-12:
                raise Infeasible(f"{atom} = {val} but no unpacked assignment reaches it")
            dropped.append(f"{atom}: vacuous")
            continue
        rows.append(r)
        rhs.append(val)
        labels.append(str(atom))
    left, right = _blocks(spec.graph, spec.counterfactuals)
    return FactorizationProblem([c.name for c in spec.counterfactuals], [c.card for c in spec.counterfactuals],
                                np.array(rows), np.array(rhs), left, right, labels, dropped)


# ------------------------------------------------------------ upper bounds

def _base(p: FactorizationProblem):
    n = p.size
    aeq = np.vstack([p.A, np.ones((1, n))])
    beq = np.concatenate([p.b, [1.0]])
    return aeq, beq


def _lp(c, a_ub, b_ub, a_eq, b_eq, bounds):
    return linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq, bounds=bounds, method="highs")


def _seesaw_step(p: FactorizationProblem, q: np.ndarray, fix_right: bool) -> np.ndarray | None:
    """Fix one factor marginal at its value in q; the best joint with that marginal is an LP."""
    n, k = p.size, p.nl * p.nr
    aeq, beq = _base(p)
    if fix_right:
        w = p.mr @ q
        d = p.mlr - np.kron(p.ml, np.ones((p.nr, 1))) * np.tile(w, p.nl)[:, None]
        aeq = np.vstack([aeq, p.mr])
        beq = np.concatenate([beq, w])
    else:
        u = p.ml @ q
        d = p.mlr - np.tile(p.mr, (p.nl, 1)) * np.repeat(u, p.nr)[:, None]
        aeq = np.vstack([aeq, p.ml])
        beq = np.concatenate([beq, u])
    eye = np.eye(k)
    a_ub = np.vstack([np.hstack([d, -eye]), np.hstack([-d, -eye])])
    a_eq = np.hstack([aeq, np.zeros((aeq.shape[0], k))])
    c = np.concatenate([np.zeros(n), np.ones(k)])
    r = _lp(c, a_ub, np.zeros(2 * k), a_eq, beq, [(0, None)] * (n + k))
    if r.status != 0:
        return None
    return np.clip(r.x[:n], 0, None)


def seesaw(p: FactorizationProblem, q0: np.ndarray, max_iter: int = 200, tol: float = 1e-10):
    """Alternate the two fixed-marginal LPs from q0. Returns (q, trace of M values)."""
    q = q0
    trace = [p.measure(q)]
    for it in range(max_iter):
        nq = _seesaw_step(p, q, fix_right=(it % 2 == 0))
        if nq is None:
            break
        m = p.measure(nq)
        if m <= trace[-1] + 1e-12:
            q = nq
            trace.append(m)
        if len(trace) >= 3 and trace[-3] - trace[-1] < tol:
            break
    return q, trace


def _start_points(p: FactorizationProblem, count: int, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    aeq, beq = _base(p)
    pts = []
    for _ in range(count):
        acc = np.zeros(p.size)
        for _ in range(3):
            r = _lp(rng.normal(size=p.size), None, None, aeq, beq, [(0, None)] * p.size)
            if r.status == 2:
                raise Infeasible("data constraints admit no probability distribution")
            if r.status != 0:
                raise FusionError(f"LP failure: {r.message}")
            acc += r.x
        pts.append(acc / 3)
    return pts


# ------------------------------------------------------------ lower bounds

@dataclass
class _Node:
    lu: np.ndarray
    uu: np.ndarray
    lw: np.ndarray
    uw: np.ndarray
    bound: float = -np.inf
    q: np.ndarray | None = None
    z: np.ndarray | None = None
    y: np.ndarray | None = None


class _Relaxation:
    """LP relaxation lifted by the right factor marginal w.

    Variables: q, w, y[x, j] standing for q_x w_j, W[j, k] standing for w_j w_k, s (abs slacks).
    Every data equation is multiplied by each w_j, and y, W get McCormick bounds from the
    node's box on w. On a box of zero width the relaxation is exact.
    """

    def __init__(self, p: FactorizationProblem):
        n, nl, nr = p.size, p.nl, p.nr
        k = nl * nr
        self.p, self.k = p, k
        self.ow, self.oy = n, n + nr
        self.oW = self.oy + n * nr
        self.os = self.oW + nr * nr
        nv = self.nv = self.os + k
        aeq, beq = _base(p)
        Y = lambda x, j: self.oy + x * nr + j
        rows, rhs = [], []

        def add(r, v):
            rows.append(r)
            rhs.append(v)
        for a, bv in zip(aeq, beq):
            r = np.zeros(nv)
            r[:n] = a
            add(r, bv)
            for j in range(nr):
                r = np.zeros(nv)
                for x in np.nonzero(a)[0]:
                    r[Y(x, j)] = a[x]
                r[self.ow + j] = -bv
                add(r, 0.0)
        for j in range(nr):
            r = np.zeros(nv)
            r[:n] = p.mr[j]
            r[self.ow + j] = -1
            add(r, 0.0)
        for x in range(n):
            r = np.zeros(nv)
            r[x] = -1
            for j in range(nr):
                r[Y(x, j)] = 1
            add(r, 0.0)
        right_of = p.mr.argmax(axis=0)
        for j in range(nr):
            for jj in range(nr):
                r = np.zeros(nv)
                for x in np.nonzero(right_of == jj)[0]:
                    r[Y(x, j)] = 1
                r[self.oW + jj * nr + j] = -1
                add(r, 0.0)
        for j in range(nr):
            for jj in range(j + 1, nr):
                r = np.zeros(nv)
                r[self.oW + j * nr + jj] = 1
                r[self.oW + jj * nr + j] = -1
                add(r, 0.0)
        self.a_eq, self.b_eq = np.array(rows), np.array(rhs)
        # |q_LR - z| <= s with z_ij = sum over x with left i of y[x, j]
        left_of = p.ml.argmax(axis=0)
        zmap = np.zeros((k, nv))
        for x in range(n):
            for j in range(nr):
                zmap[left_of[x] * nr + j, Y(x, j)] = 1
        self.zmap = zmap
        ab = np.zeros((2 * k, nv))
        for sgn, blk in ((1, slice(0, k)), (-1, slice(k, 2 * k))):
            ab[blk, :n] = sgn * p.mlr
            ab[blk] -= sgn * zmap
            ab[blk, self.os:] = -np.eye(k)
        self.abs_rows = ab
        self.Y = Y
        self.c = np.zeros(nv)
        self.c[self.os:] = 1

    def solve(self, node: _Node) -> bool:
        p, nr, n = self.p, self.p.nr, self.p.size
        lw, uw = node.lw, node.uw
        rows, rhs = [], []
        for x in range(n):
            for j in range(nr):
                # lw_j q_x <= y <= uw_j q_x, and q_x <= 1 gives y <= w_j, y >= w_j - (1 - q_x)
                r = np.zeros(self.nv)
                r[self.Y(x, j)] = -1
                r[x] = lw[j]
                rows.append(r)
                rhs.append(0.0)
                r = np.zeros(self.nv)
                r[self.Y(x, j)] = 1
                r[x] = -uw[j]
                rows.append(r)
                rhs.append(0.0)
                r = np.zeros(self.nv)
                r[self.Y(x, j)] = 1
                r[self.ow + j] = -1
                rows.append(r)
                rhs.append(0.0)
        for j in range(nr):
            for jj in range(nr):
                c = self.oW + j * nr + jj
                for (a, b, sgn) in ((lw[j], lw[jj], -1), (uw[j], uw[jj], -1), (uw[j], lw[jj], 1), (lw[j], uw[jj], 1)):
                    r = np.zeros(self.nv)
                    r[c] = sgn
                    r[self.ow + jj] -= sgn * a
                    r[self.ow + j] -= sgn * b
                    rows.append(r)
                    rhs.append(-sgn * a * b)
        bounds = [(0, None)] * n + list(zip(lw, uw)) + [(0, None)] * (self.nv - n - nr)
        res = _lp(self.c, np.vstack([self.abs_rows, np.array(rows)]),
                  np.concatenate([np.zeros(2 * self.k), rhs]), self.a_eq, self.b_eq, bounds)
        if res.status != 0:
            node.bound = np.inf
            return False
        node.bound = float(res.fun)
        node.q = np.clip(res.x[:n], 0, None)
        node.z = self.zmap @ res.x
        node.y = res.x[self.oy:self.oW].reshape(n, nr)
        return True


def _marginal_ranges(p: FactorizationProblem):
    aeq, beq = _base(p)
    out = []
    for m in (p.ml, p.mr):
        lo, hi = np.zeros(len(m)), np.ones(len(m))
        for i, row in enumerate(m):
            r1 = _lp(row, None, None, aeq, beq, [(0, None)] * p.size)
            r2 = _lp(-row, None, None, aeq, beq, [(0, None)] * p.size)
            if r1.status == 2:
                raise Infeasible("data constraints admit no probability distribution")
            lo[i], hi[i] = max(0.0, r1.fun), min(1.0, -r2.fun)
        out.append((lo, hi))
    return out


def _branch(p: FactorizationProblem, node: _Node) -> list[_Node]:
    """Bisect the w coordinate whose lifted products carry the most slack."""
    w = p.mr @ node.q
    slack = np.abs(node.y - np.outer(node.q, w)).sum(axis=0) * (node.uw - node.lw)
    idx = int(slack.argmax())
    mid = 0.5 * (node.lw[idx] + node.uw[idx])
    kids = []
    for a, b in ((node.lw[idx], mid), (mid, node.uw[idx])):
        ch = _Node(node.lu, node.uu, node.lw.copy(), node.uw.copy())
        ch.lw[idx], ch.uw[idx] = a, b
        kids.append(ch)
    return kids


def minimize_mq(p: FactorizationProblem, gap_tol: float = DEFAULT_GAP, starts: int = 32, seed: int = 0,
                max_nodes: int = 20000, workers: int = 4, polish_every: int = 200,
                time_budget: float | None = None) -> MqResult:
    """Interval [lower, upper] of width <= gap_tol containing min M(q) over the data constraints."""
    if gap_tol <= 0:
        raise ValueError("gap_tol must be positive")
    t0 = time.time()
    pts = _start_points(p, starts, seed)
    with ThreadPoolExecutor(max_workers=workers) as ex:
        runs = list(ex.map(lambda q: seesaw(p, q), pts))
    iterations = sum(len(t) - 1 for _, t in runs)
    # deterministic choice: smallest value, then start index
    best_k = min(range(len(runs)), key=lambda k: (runs[k][1][-1], k))
    best_q, best = runs[best_k][0], runs[best_k][1][-1]

    (lu, uu), (lw, uw) = _marginal_ranges(p)
    root = _Node(lu, uu, lw, uw)
    relax = _Relaxation(p)
    relax.solve(root)
    heap = [(root.bound, 0, root)]
    count, nodes = 1, 0
    pruned = np.inf         # smallest bound among discarded nodes
    lower = None
    while heap:
        bound, _, node = heapq.heappop(heap)
        if best - bound <= gap_tol:
            lower = min(bound, pruned)
            break
        nodes += 1
        if nodes > max_nodes or (time_budget is not None and time.time() - t0 > time_budget):
            lo = min(bound, pruned)
            raise BudgetExceeded(f"{nodes} nodes; interval [{max(lo, 0.0):.6g}, {best:.6g}]")
        # the relaxation point satisfies the data, so it gives an upper bound too
        m = p.measure(node.q)
        if m < best - 1e-9 or nodes % polish_every == 0:
            cand, _ = seesaw(p, node.q, max_iter=6)
            mc = p.measure(cand)
            if min(m, mc) < best:
                best, best_q = (m, node.q) if m <= mc else (mc, cand)
        for ch in _branch(p, node):
            if relax.solve(ch):
                if ch.bound >= best - gap_tol:
                    assert ch.bound > best - gap_tol - 1e-12
                    pruned = min(pruned, ch.bound)
                    continue
                heapq.heappush(heap, (ch.bound, count, ch))
                count += 1
    if lower is None:
        lower = min(pruned, best)
    lower = min(max(lower, 0.0), best)
    return MqResult(lower, best, best_q, gap_tol, iterations, nodes, time.time() - t0)


def check_feasibility(p: FactorizationProblem, gap_tol: float = DEFAULT_GAP, **kw) -> Compatible | Incompatible:
    r = minimize_mq(p, gap_tol, **kw)
    if r.lower <= ZERO_TOL:
        return Compatible(r.model, r)
    return Incompatible(r.lower, r)
