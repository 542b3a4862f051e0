"""Classical and no-signalling polytopes of interrupted scenarios.

Coordinates are `Atom`s (full assignments of observational, do- or extended
tables). Inequalities are rows (b, a_1..a_n) meaning b + a.x >= 0, stored as
Fractions; equalities use the same layout with "= 0".
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Mapping, Sequence

from .errors import BudgetExceeded, DimensionMismatch, GeometryError, MultipleLatentComponents
from .exactlp import feasible_convex, maximize_ub
from .graphs import MARK, OBSERVED, CausalGraph, base_name, interrupt, mark_name
from .scalar import Scalar, to_scalar
from .witness import DO, EXT, OBS, Atom, Poly, Resolver, Witness

Row = tuple  # (b, a_1, ..., a_n)


# ------------------------------------------------------------------ unpacking

@dataclass(frozen=True)
class Counterfactual:
    node: str
    parents: tuple[tuple[str, int], ...]
    card: int

    @property
    def name(self) -> str:
        if not self.parents:
            return self.node
        return self.node + "_" + "".join(str(v) for _, v in self.parents)


@dataclass
class UnpackedSpec:
    """Counterfactual variables and the linear map from their joint to data coordinates."""
    graph: CausalGraph
    counterfactuals: list[Counterfactual]
    coords: list[Atom]
    inputs: tuple[str, ...]
    matrix: list[list[Fraction]]  # coords x joint assignments

    @property
    def joint_size(self) -> int:
        return len(self.matrix[0]) if self.matrix else 0

    def joint_assignments(self):
        return itertools.product(*(range(c.card) for c in self.counterfactuals))

    def projection_rows(self) -> list[tuple[Atom, list[tuple[int, Fraction]]]]:
        return [(a, [(j, v) for j, v in enumerate(r) if v]) for a, r in zip(self.coords, self.matrix)]


def _query_targets(query: Iterable[str]) -> tuple[list[str], bool, bool]:
    targets, want_obs, want_q = [], False, False
    for q in query:
        q = q.strip()
        if q == "P":
            want_obs = True
        elif q == "Q":
            want_q = True
        elif q.startswith("do(") and q.endswith(")"):
            targets.append(q[3:-1])
        else:
            raise GeometryError(f"unknown table selector {q!r}")
    return sorted(set(targets)), want_obs, want_q


def unpack(graph: CausalGraph, query: Iterable[str], inputs: Iterable[str] = (),
           targets: Iterable[str] | None = None, shared_ok: bool = False) -> UnpackedSpec:
    """Unpack the SWIG needed for `query` ("P", "do(X)", "Q").

    `inputs` are observed nodes treated as uniformly distributed free settings;
    they absorb any latent that only reaches one other observed node.
    With `shared_ok` several shared latents are allowed; the joint is then unconstrained
    and the caller adds the independence constraints.
    """
    query = list(query)
    qt, want_obs, want_q = _query_targets(query)
    targets = sorted(set(qt) | set(targets or ()))
    inputs = tuple(inputs)
    swig = interrupt(graph, targets) if targets else graph
    observed = [n for n in swig.observed]
    marks = swig.marks
    inner = [n for n in observed if n not in inputs]
    shared = [l for l in swig.latents if sum(1 for c in swig.children(l) if c in inner) >= 2]
    if len(shared) > 1 and not shared_ok:
        raise MultipleLatentComponents(f"latents {shared} each reach several observed nodes")
    # topological order among observed nodes
    order: list[str] = []
    pending = list(inner)
    while pending:
        n = next(n for n in pending if all(p in order or p in inputs or swig.node(p).kind != OBSERVED
                                         for p in swig.parents(n)))
        order.append(n)
        pending.remove(n)
    cfs: list[Counterfactual] = []
    index: dict[tuple[str, tuple], int] = {}
    for n in order:
        ops = [p for p in swig.parents(n) if swig.node(p).kind in (OBSERVED, MARK)]
        for vals in itertools.product(*(range(swig.card(p)) for p in ops)):
            cf = Counterfactual(n, tuple(zip(ops, vals)), swig.card(n))
            index[(n, tuple(zip(ops, vals)))] = len(cfs)
            cfs.append(cf)
    obs_names = list(observed)
    coords = _coords(graph, query, targets)
    pos = {a: i for i, a in enumerate(coords)}
    in_cards = [swig.card(i) for i in inputs]
    weight = Fraction(1, int(_prod(in_cards)))
    joint = list(itertools.product(*(range(c.card) for c in cfs)))
    matrix = [[Fraction(0)] * len(joint) for _ in coords]

    def run(det, markvals, invals):
        env = dict(zip(inputs, invals))
        env.update(markvals)
        for n in order:
            ops = [p for p in swig.parents(n) if swig.node(p).kind in (OBSERVED, MARK)]
            env[n] = det[index[(n, tuple((p, env[p]) for p in ops))]]
        return env

    for j, det in enumerate(joint):
        for invals in itertools.product(*(range(c) for c in in_cards)):
            if want_q:
                for mv in itertools.product(*(range(swig.card(m)) for m in marks)):
                    env = run(det, dict(zip(marks, mv)), invals)
                    a = Atom(EXT, tuple(sorted((k, env[k]) for k in obs_names + list(marks))))
                    matrix[pos[a]][j] += weight
            if want_obs or qt:
                # the observational world: every mark copies its base node
                env = _settle(run, det, marks, invals)
                if want_obs:
                    a = Atom(OBS, tuple(sorted((k, env[k]) for k in obs_names)))
                    matrix[pos[a]][j] += weight
                for t in qt:
                    for v in range(swig.card(t)):
                        fixed = {mark_name(t): v}
                        envd = _settle(run, det, marks, invals, fixed)
                        rest = [n for n in obs_names if n != t]
                        a = Atom(DO, tuple(sorted((k, envd[k]) for k in rest)), t, v)
                        matrix[pos[a]][j] += weight
    return UnpackedSpec(swig, cfs, coords, inputs, matrix)


def _settle(run, det, marks, invals, fixed=None):
    """Evaluate with marks equal to their base values (except `fixed`), by iteration."""
    fixed = fixed or {}
    mv = {m: fixed.get(m, 0) for m in marks}
    for _ in range(len(marks) + 2):
        env = run(det, mv, invals)
        new = {m: fixed.get(m, env[base_name(m)]) for m in marks}
        if new == mv:
            return env
        mv = new
    raise GeometryError("mark values did not settle (cyclic dependence)")


def _prod(xs):
    out = 1
    for x in xs:
        out *= x
    return out


# ------------------------------------------------------------------ polyhedra

@dataclass
class Polyhedron:
    coords: list[Atom]
    vertices: list[tuple] | None = None
    ineqs: list[Row] | None = None
    eqs: list[Row] | None = None

    @property
    def dim(self) -> int:
        return len(self.coords)

    def to_json(self) -> dict:
        enc = lambda r: [str(v) for v in r]
        d = {"coords": [str(a) for a in self.coords]}
        if self.vertices is not None:
            d["vertices"] = [enc(v) for v in self.vertices]
        if self.ineqs is not None:
            d["inequalities"] = [enc(r) for r in self.ineqs]
            d["equalities"] = [enc(r) for r in self.eqs or []]
        return d


def vertices(spec: UnpackedSpec) -> Polyhedron:
    cols = {}
    for j in range(spec.joint_size):
        v = tuple(row[j] for row in spec.matrix)
        cols.setdefault(v, None)
    return Polyhedron(list(spec.coords), vertices=list(cols))


def point_of(data, coords: Sequence[Atom], graph: CausalGraph | None = None) -> list:
    res = Resolver(data, graph)
    return [res(a) for a in coords]


# ------------------------------------------------------------------ membership

@dataclass
class MembershipCertificate:
    feasible: bool
    weights: list | None = None           # convex weights over the vertices
    hyperplane: tuple | None = None       # (h0, h): h0 + h.v <= 0 on vertices, > 0 at the point

    def verify(self, point, poly: Polyhedron) -> bool:
        if self.feasible:
            w = self.weights
            if any(x < 0 for x in w) or sum(w, type(w[0])(0)) != 1:
                return False
            for i, p in enumerate(point):
                if sum((wk * v[i] for wk, v in zip(w, poly.vertices)), type(w[0])(0)) != p:
                    return False
            return True
        h0, h = self.hyperplane
        if any(h0 + sum((hi * vi for hi, vi in zip(h, v)), h0 - h0) > 0 for v in poly.vertices):
            return False
        return h0 + sum((hi * pi for hi, pi in zip(h, point)), h0 - h0) > 0


def lp_membership(point: Sequence, poly: Polyhedron) -> MembershipCertificate:
    if poly.vertices is None:
        raise GeometryError("membership needs a V-form polyhedron")
    if len(point) != poly.dim:
        raise DimensionMismatch(f"point has {len(point)} coordinates, polytope {poly.dim}")
    exact = [to_scalar(p) if not isinstance(p, (Scalar, Fraction, int)) else p for p in point]
    use_scalar = any(isinstance(p, Scalar) for p in exact)
    if use_scalar:
        pts = [[Scalar.coerce(x) for x in v] for v in poly.vertices]
        tgt = [Scalar.coerce(x) for x in exact]
    else:
        pts = [list(v) for v in poly.vertices]
        tgt = [Fraction(x) for x in exact]
    res = feasible_convex(pts, tgt)
    if res.status == "optimal":
        return MembershipCertificate(True, weights=res.x)
    y = res.farkas
    return MembershipCertificate(False, hyperplane=(y[-1], tuple(y[:-1])))


# ------------------------------------------------------------------ row utilities

def _lcm(a, b):
    return a * b // gcd(a, b) if a and b else (a or b)


def primitive(row: Sequence) -> Row:
    """Scale by a positive rational to coprime integers."""
    fr = [Fraction(v) for v in row]
    den = 1
    for v in fr:
        den = _lcm(den, v.denominator)
    ints = [int(v * den) for v in fr]
    g = 0
    for v in ints:
        g = gcd(g, abs(v))
    if g == 0:
        return tuple(ints)
    return tuple(v // g for v in ints)


class EqualityReducer:
    """Reduces rows modulo the span of an equality system (unique RREF)."""

    def __init__(self, eqs: Sequence[Row], n: int):
        self.n = n
        rows = [list(map(Fraction, r)) for r in eqs]
        self.pivots: list[tuple[int, list[Fraction]]] = []
        # pivot on coordinates from the last one backwards, never on the constant
        col_order = list(range(n, 0, -1))
        r = 0
        for col in col_order:
            piv = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
            if piv is None:
                continue
            rows[r], rows[piv] = rows[piv], rows[r]
            p = rows[r][col]
            rows[r] = [v / p for v in rows[r]]
            for i in range(len(rows)):
                if i != r and rows[i][col] != 0:
                    f = rows[i][col]
                    rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
            self.pivots.append((col, rows[r]))
            r += 1
        self.rank = r
        inconsistent = any(all(v == 0 for v in row[1:]) and row[0] != 0 for row in rows[r:])
        if inconsistent:
            raise GeometryError("equality system is inconsistent")

    def reduce(self, row: Sequence) -> list[Fraction]:
        out = list(map(Fraction, row))
        for col, prow in self.pivots:
            f = out[col]
            if f != 0:
                out = [a - f * b for a, b in zip(out, prow)]
        return out

    def key(self, row: Sequence) -> Row:
        return primitive(self.reduce(row))

    def same_span(self, other: "EqualityReducer") -> bool:
        return self.rank == other.rank and all(
            all(v == 0 for v in other.reduce(prow)) for _, prow in self.pivots)


# ------------------------------------------------------------------ facets (double description)

def facets(poly: Polyhedron) -> Polyhedron:
    """Irredundant H-form of the convex hull of the vertices.

    cdd's double description supplies candidate rows; each is kept only if the
    vertices it is tight on have affine rank dim - 1 (checked exactly with flint).
    """
    import cdd
    if not poly.vertices:
        raise GeometryError("no vertices")
    lifted = [[Fraction(1)] + [Fraction(v) for v in vert] for vert in poly.vertices]
    mat = cdd.Matrix(lifted, number_type="fraction")
    mat.rep_type = cdd.RepType.GENERATOR
    h = cdd.Polyhedron(mat).get_inequalities()
    eqs = affine_hull(poly.vertices)
    red = EqualityReducer(eqs, poly.dim)
    full = _rank(lifted)
    keys = set()
    for i in range(h.row_size):
        if i in h.lin_set:
            continue
        row = [Fraction(v) for v in h[i]]
        tight = [v for v in lifted if sum(a * x for a, x in zip(row, v)) == 0]
        if len(tight) == len(lifted):
            continue
        if tight and _rank(tight) == full - 1:
            keys.add(red.key(row))
    ineqs = [tuple(map(Fraction, r)) for r in sorted(keys)]
    return Polyhedron(list(poly.coords), vertices=list(poly.vertices), ineqs=ineqs,
                      eqs=[tuple(p) for _, p in red.pivots])


def _int_rows(rows):
    out = []
    for r in rows:
        den = 1
        for v in r:
            den = _lcm(den, Fraction(v).denominator)
        out.append([int(Fraction(v) * den) for v in r])
    return out


def _rank(rows) -> int:
    import flint
    ints = _int_rows(rows)
    return flint.fmpz_mat(len(ints), len(ints[0]), [v for r in ints for v in r]).rank()


def affine_hull(points: Sequence[Sequence]) -> list[Row]:
    """Rows (b, a) with b + a.p = 0 for every point, spanning all such rows."""
    import flint
    ints = _int_rows([[1] + list(p) for p in points])
    m = flint.fmpz_mat(len(ints), len(ints[0]), [v for r in ints for v in r])
    basis, nullity = m.nullspace()
    return [tuple(Fraction(int(basis[i, j])) for i in range(basis.nrows())) for j in range(nullity)]


# ------------------------------------------------------------------ Fourier-Motzkin

@dataclass
class System:
    """Linear system over named columns: rows b + a.x >= 0 and b + a.x = 0."""
    columns: list
    ineqs: list[Row]
    eqs: list[Row] = field(default_factory=list)


def fourier_motzkin(system: System, eliminate: Iterable, budget: int = 10 ** 7,
                    prune_every: int = 1, log=None) -> System:
    """Project out the `eliminate` columns; the result is irredundant (exact LP checks)."""
    cols = list(system.columns)
    elim = [c for c in cols if c in set(eliminate)]
    ineqs = [list(map(Fraction, r)) for r in system.ineqs]
    eqs = [list(map(Fraction, r)) for r in system.eqs]
    hist: list[frozenset] = [frozenset([i]) for i in range(len(ineqs))]
    # equalities first: exact substitution
    for c in list(elim):
        j = cols.index(c) + 1
        piv = next((e for e in eqs if e[j] != 0), None)
        if piv is None:
            continue
        eqs.remove(piv)
        p = piv[j]
        piv = [v / p for v in piv]

        def sub(r):
            f = r[j]
            return [a - f * b for a, b in zip(r, piv)] if f != 0 else r
        ineqs = [sub(r) for r in ineqs]
        eqs = [sub(r) for r in eqs]
        elim.remove(c)
        ineqs, hist = _drop_column(ineqs, hist, j)
        eqs = [r[:j] + r[j + 1:] for r in eqs]
        cols.pop(j - 1)
    eqs = [r for r in eqs if any(v != 0 for v in r)]
    steps = 0
    while elim:
        # cheapest column next
        def cost(c):
            j = cols.index(c) + 1
            pos = sum(1 for r in ineqs if r[j] > 0)
            neg = sum(1 for r in ineqs if r[j] < 0)
            return pos * neg - pos - neg
        c = min(elim, key=cost)
        j = cols.index(c) + 1
        pos = [(r, h) for r, h in zip(ineqs, hist) if r[j] > 0]
        neg = [(r, h) for r, h in zip(ineqs, hist) if r[j] < 0]
        zero = [(r, h) for r, h in zip(ineqs, hist) if r[j] == 0]
        steps += 1
        new: dict[Row, frozenset] = {}
        for r, h in zero:
            k = primitive(r)
            if k not in new or len(h) < len(new[k]):
                new[k] = h
        for rp, hp in pos:
            for rn, hn in neg:
                hh = hp | hn
                if len(hh) > steps + 1:   # Chernikov: cannot be a facet
                    continue
                a, b = rp[j], -rn[j]
                comb = [b * x + a * y for x, y in zip(rp, rn)]
                k = primitive(comb)
                if k not in new or len(hh) < len(new[k]):
                    new[k] = hh
                if len(new) > budget:
                    raise BudgetExceeded(f"Fourier-Motzkin exceeded {budget} rows")
        ineqs = [list(map(Fraction, k)) for k in new]
        hist = list(new.values())
        ineqs, hist = _drop_column(ineqs, hist, j)
        eqs = [r[:j] + r[j + 1:] for r in eqs]
        cols.pop(j - 1)
        elim.remove(c)
        ineqs, hist = _tidy(ineqs, hist)
        if log:
            log(f"eliminated {c}: {len(ineqs)} rows")
        if prune_every and steps % prune_every == 0 and len(ineqs) > 4 * len(cols):
            ineqs, hist = _prune(ineqs, hist, eqs, screen=True)
    ineqs, hist = _prune(ineqs, hist, eqs, screen=False)
    return System(cols, [tuple(r) for r in ineqs], [tuple(r) for r in eqs])


def _drop_column(ineqs, hist, j):
    return [r[:j] + r[j + 1:] for r in ineqs], hist


def _tidy(ineqs, hist):
    out, oh, seen = [], [], set()
    for r, h in zip(ineqs, hist):
        if all(v == 0 for v in r[1:]):
            if r[0] < 0:
                raise GeometryError("system is infeasible")
            continue
        k = primitive(r)
        if k in seen:
            continue
        seen.add(k)
        out.append(list(map(Fraction, k)))
        oh.append(h)
    return out, oh


def _redundant(i, ineqs, eqs) -> bool:
    """Row i is implied by the others: min a.x over them is >= -b (exact LP)."""
    r = ineqs[i]
    A, b = [], []
    for k, o in enumerate(ineqs):
        if k != i:
            A.append([-v for v in o[1:]])
            b.append(o[0])
    for e in eqs:
        A.append([-v for v in e[1:]])
        b.append(e[0])
        A.append(list(e[1:]))
        b.append(-e[0])
    res = maximize_ub([-v for v in r[1:]], A, b)
    if res.status == "unbounded":
        return False
    if res.status == "infeasible":
        raise GeometryError("system became infeasible")
    return res.objective <= r[0]


def _float_probe(i, ineqs, eqs):
    """Float LP: minimize row i (bounded below by -1) over the other rows and the equalities.

    Returns (value, point, support) where support lists the other rows with nonzero dual.
    """
    import numpy as np
    from scipy.optimize import linprog
    r = ineqs[i]
    idx = [k for k in range(len(ineqs)) if k != i]
    A = [[-float(v) for v in ineqs[k][1:]] for k in idx] + [[-float(v) for v in r[1:]]]
    b = [float(ineqs[k][0]) for k in idx] + [float(r[0]) + 1.0]
    Aeq = np.array([[float(v) for v in e[1:]] for e in eqs]) if eqs else None
    beq = np.array([-float(e[0]) for e in eqs]) if eqs else None
    res = linprog([float(v) for v in r[1:]], A_ub=np.array(A), b_ub=np.array(b), A_eq=Aeq, b_eq=beq,
                  bounds=[(None, None)] * (len(r) - 1), method="highs")
    if res.status != 0:
        return None
    duals = res.ineqlin.marginals
    support = [idx[k] for k in range(len(idx)) if abs(duals[k]) > 1e-9]
    return res.fun + float(r[0]), res.x, support


def _lift(x, red: EqualityReducer | None, n):
    """Round a float point to rationals, then solve the equalities for the pivot coordinates."""
    pt = [Fraction(float(v)).limit_denominator(10 ** 6) for v in x]
    if red is None:
        return pt
    for col, prow in reversed(red.pivots):
        pt[col - 1] = Fraction(0)
        pt[col - 1] = -(prow[0] + sum(prow[j + 1] * pt[j] for j in range(n)))
    return pt


def _separates(i, ineqs, pt) -> bool:
    val = lambda r: r[0] + sum(a * x for a, x in zip(r[1:], pt))
    return val(ineqs[i]) < 0 and all(val(r) >= 0 for k, r in enumerate(ineqs) if k != i)


def _prune(ineqs, hist, eqs, screen: bool):
    """Remove redundant rows; every removal is proven by an exact LP.

    A float LP guides the work: rows it calls irredundant are confirmed by an exact
    separating point when possible. With screen=True unconfirmed rows are simply kept.
    """
    ineqs, hist = list(ineqs), list(hist)
    n = len(ineqs[0]) - 1 if ineqs else 0
    red = EqualityReducer(eqs, n) if eqs else None
    i = 0
    while i < len(ineqs):
        probe = _float_probe(i, ineqs, eqs)
        if probe is not None and probe[0] < -1e-9:
            if _separates(i, ineqs, _lift(probe[1], red, n)) or screen:
                i += 1
                continue
            drop = _redundant(i, ineqs, eqs)
        else:
            drop = False
            if probe is not None:
                sub = [ineqs[i]] + [ineqs[k] for k in probe[2]]
                drop = _redundant(0, sub, eqs)
            if not drop and not screen:
                drop = _redundant(i, ineqs, eqs)
        if drop:
            ineqs.pop(i)
            hist.pop(i)
        else:
            i += 1
    return ineqs, hist


# ------------------------------------------------------------------ linear systems for projection

def classical_system(spec: UnpackedSpec) -> System:
    """x = M q, q >= 0, sum q = 1 over columns [coords..., q_j...]."""
    n, m = len(spec.coords), spec.joint_size
    cols = list(spec.coords) + [("q", j) for j in range(m)]
    eqs = []
    for i, row in enumerate(spec.matrix):
        r = [Fraction(0)] * (1 + n + m)
        r[1 + i] = Fraction(-1)
        for j, v in enumerate(row):
            r[1 + n + j] = v
        eqs.append(tuple(r))
    eqs.append(tuple([Fraction(-1)] + [Fraction(0)] * n + [Fraction(1)] * m))
    ineqs = []
    for j in range(m):
        r = [Fraction(0)] * (1 + n + m)
        r[1 + n + j] = Fraction(1)
        ineqs.append(tuple(r))
    return System(cols, ineqs, eqs)


def no_signalling_system(graph: CausalGraph, query: Iterable[str],
                         targets: Iterable[str] | None = None) -> tuple[System, list[Atom]]:
    """NS relaxation: extended table over the full SWIG of the query targets, nonnegative and
    normalized, each observed marginal independent of the # nodes that are not its ancestors,
    and projecting onto the query tables."""
    query = list(query)
    qt, want_obs, _ = _query_targets(query)
    cut = sorted(set(qt) | set(targets if targets is not None else graph.eligible_targets()))
    coords = _coords(graph, query)
    swig = interrupt(graph, cut) if cut else graph
    obs = swig.observed
    marks = swig.marks
    qvars = obs + list(marks)
    cards = {n: swig.card(n) for n in qvars}
    qatoms = [tuple(zip(qvars, vals)) for vals in itertools.product(*(range(cards[n]) for n in qvars))]
    n, m = len(coords), len(qatoms)
    cols = list(coords) + [("Q", a) for a in qatoms]
    qpos = {a: i for i, a in enumerate(qatoms)}

    def row():
        return [Fraction(0)] * (1 + n + m)

    eqs, ineqs = [], []
    for j in range(m):
        r = row()
        r[1 + n + j] = Fraction(1)
        ineqs.append(tuple(r))
    for mv in itertools.product(*(range(cards[k]) for k in marks)):
        r = row()
        r[0] = Fraction(-1)
        for a in qatoms:
            if tuple(v for k, v in a if k in marks) == mv:
                r[1 + n + qpos[a]] = Fraction(1)
        eqs.append(tuple(r))
    # projections
    for i, atom in enumerate(coords):
        d = dict(atom.assign)
        if atom.kind == OBS:
            fixed = {**d, **{mark_name(t): d[t] for t in cut}}
        else:
            fixed = {**d, **{mark_name(t): d[t] for t in cut if t != atom.target}, mark_name(atom.target): atom.value}
        r = row()
        r[1 + i] = Fraction(-1)
        for a in qatoms:
            ad = dict(a)
            if all(ad[k] == v for k, v in fixed.items()):
                r[1 + n + qpos[a]] += 1
        eqs.append(tuple(r))
    # no-signalling: for each set S of observed nodes, marginal over S independent of marks
    # that are not ancestors (in the SWIG) of S
    anc = {o: _ancestors(swig, o) for o in obs}
    for size in range(1, len(obs) + 1):
        for S in itertools.combinations(obs, size):
            reach = set().union(*(anc[o] for o in S))
            free = [mk for mk in marks if mk not in reach]
            if not free:
                continue
            kept = [mk for mk in marks if mk in reach]
            for sv in itertools.product(*(range(cards[o]) for o in S)):
                for kv in itertools.product(*(range(cards[k]) for k in kept)):
                    base = None
                    for fv in itertools.product(*(range(cards[k]) for k in free)):
                        fixed = {**dict(zip(S, sv)), **dict(zip(kept, kv)), **dict(zip(free, fv))}
                        r = row()
                        for a in qatoms:
                            ad = dict(a)
                            if all(ad[k] == v for k, v in fixed.items()):
                                r[1 + n + qpos[a]] = Fraction(1)
                        if base is None:
                            base = r
                        else:
                            eqs.append(tuple(x - y for x, y in zip(r, base)))
    return System(cols, ineqs, eqs), coords


def _coords(graph: CausalGraph, query: list[str], targets=()) -> list[Atom]:
    qt, want_obs, want_q = _query_targets(query)
    every = sorted(set(qt) | set(targets or ()))
    swig = interrupt(graph, every) if every else graph
    obs = swig.observed
    coords = []
    if want_obs:
        for vals in itertools.product(*(range(swig.card(n)) for n in obs)):
            coords.append(Atom(OBS, tuple(sorted(zip(obs, vals)))))
    for t in qt:
        rest = [n for n in obs if n != t]
        for v in range(swig.card(t)):
            for vals in itertools.product(*(range(swig.card(n)) for n in rest)):
                coords.append(Atom(DO, tuple(sorted(zip(rest, vals))), t, v))
    if want_q:
        qvars = obs + list(swig.marks)
        for vals in itertools.product(*(range(swig.card(n)) for n in qvars)):
            coords.append(Atom(EXT, tuple(sorted(zip(qvars, vals)))))
    return coords


def _ancestors(g: CausalGraph, node: str) -> set[str]:
    out, stack = set(), list(g.parents(node))
    while stack:
        p = stack.pop()
        if p not in out:
            out.add(p)
            stack.extend(g.parents(p))
    return out


def system_to_polyhedron(sys_: System, coords: list[Atom]) -> Polyhedron:
    if sys_.columns != list(coords):
        raise GeometryError("projected columns do not match the coordinate list")
    red = EqualityReducer(sys_.eqs, len(coords))
    ineqs = sorted({red.key(r) for r in sys_.ineqs})
    return Polyhedron(list(coords), ineqs=[tuple(map(Fraction, r)) for r in ineqs],
                      eqs=[tuple(p) for _, p in red.pivots])


# ------------------------------------------------------------------ symmetry classes

@dataclass
class RelabelingGroup:
    name: str
    maps: list[dict]  # each maps Atom -> Atom on the coordinate list

    def __len__(self):
        return len(self.maps)


def relabeling_group(coords: Sequence[Atom], outcome_perms: Mapping[str, Sequence[Sequence[int]]],
                     conditional: Mapping[str, tuple[str, Sequence[Sequence[int]]]] | None = None,
                     name: str = "") -> RelabelingGroup:
    """Outcome relabelings. `outcome_perms[X]` lists the allowed permutations of X's values
    (applied to X, X# and do(X=.) targets). `conditional[X] = (Y, perms)` additionally allows
    an independent permutation of X for each value of its setting Y (Y's # value if present,
    else Y itself, else the do-target value of Y)."""
    conditional = conditional or {}
    names = sorted(outcome_perms)
    cnames = sorted(conditional)
    choices = [list(outcome_perms[n]) for n in names]
    cchoices = []
    for x in cnames:
        y, perms = conditional[x]
        # one permutation per value of the setting
        ycard = max(len(p) for p in outcome_perms.get(y, [[0, 1]]))
        cchoices.append(list(itertools.product(perms, repeat=ycard)))
    maps = []
    for sel in itertools.product(*choices):
        pm = dict(zip(names, sel))
        for csel in itertools.product(*cchoices):
            cm = dict(zip(cnames, csel))
            mp = {}
            for a in coords:
                mp[a] = _apply(a, pm, cm, conditional)
            maps.append(mp)
    return RelabelingGroup(name, maps)


def _apply(a: Atom, pm, cm, conditional) -> Atom:
    d = dict(a.assign)
    if a.kind == DO:
        d[mark_name(a.target)] = a.value
    setting = {}
    for x, (y, _) in conditional.items():
        ym = mark_name(y)
        if a.kind == DO and a.target == x:
            continue
        setting[x] = d[ym] if ym in d else d.get(y)
    new = {}
    for k, v in d.items():
        b = base_name(k)
        w = pm[b][v] if b in pm else v
        if b in cm and not k.endswith("#") and setting.get(b) is not None:
            w = cm[b][setting[b]][w]
        new[k] = w
    if a.kind == DO:
        val = new.pop(mark_name(a.target))
        return Atom(DO, tuple(sorted(new.items())), a.target, val)
    return Atom(a.kind, tuple(sorted(new.items())), a.target, a.value)


def permute_row(row: Row, coords: Sequence[Atom], mp: Mapping[Atom, Atom]) -> Row:
    pos = {a: i for i, a in enumerate(coords)}
    out = [row[0]] + [Fraction(0)] * len(coords)
    for i, a in enumerate(coords):
        out[1 + pos[mp[a]]] = row[1 + i]
    return tuple(out)


def canonicalize(row: Row, coords: Sequence[Atom], group: RelabelingGroup, red: EqualityReducer) -> Row:
    """Lexicographically smallest reduced primitive form over the orbit."""
    return min(red.key(permute_row(row, coords, mp)) for mp in group.maps)


@dataclass
class FacetClass:
    name: str
    representative: Row
    size: int


def classify(poly: Polyhedron, group: RelabelingGroup, trivial: Mapping[str, Sequence[Row]]) -> list[FacetClass]:
    """Group the facets into orbits; orbits containing a listed trivial row are named after it."""
    red = EqualityReducer(poly.eqs or [], poly.dim)
    trivial_keys = {}
    for name, rows in trivial.items():
        for r in rows:
            trivial_keys[canonicalize(r, poly.coords, group, red)] = name
    orbits: dict[Row, list[Row]] = {}
    for r in poly.ineqs:
        orbits.setdefault(canonicalize(r, poly.coords, group, red), []).append(r)
    out, k = [], 0
    for key in sorted(orbits, key=lambda key: (key not in trivial_keys, key)):
        if key in trivial_keys:
            name = trivial_keys[key]
        else:
            k += 1
            name = f"class-{k}"
        out.append(FacetClass(name, key, len(orbits[key])))
    return out


def row_from_witness(w: Witness, coords: Sequence[Atom]) -> Row:
    """Linear witness -> row b + a.x >= 0 (requires full-assignment atoms or marginals of them)."""
    diff = (w.rhs - w.lhs) if w.sense == "<=" else (w.lhs - w.rhs)
    return row_from_poly(diff, coords)


def row_from_poly(poly: Poly, coords: Sequence[Atom]) -> Row:
    out = [Fraction(0)] * (1 + len(coords))
    for (num, den), c in poly.terms.items():
        if den or len(num) > 1:
            raise GeometryError("only linear witnesses map to rows")
        cf = _rational(c)
        if not num:
            out[0] += cf
            continue
        hits = [i for i, a in enumerate(coords) if _covers(a, num[0])]
        if not hits:
            raise GeometryError(f"{num[0]} is not a marginal of the coordinates")
        for i in hits:
            out[1 + i] += cf
    return tuple(out)


def _rational(c: Scalar) -> Fraction:
    if c.b != 0:
        raise GeometryError("irrational coefficient in a linear row")
    return Fraction(c.a)


def _covers(full: Atom, part: Atom) -> bool:
    if full.kind != part.kind or full.target != part.target or full.value != part.value:
        return False
    d = dict(full.assign)
    return all(d.get(k) == v for k, v in part.assign)


def row_to_text(row: Row, coords: Sequence[Atom]) -> str:
    parts = []
    for i, a in enumerate(coords):
        v = row[1 + i]
        if v:
            s = "" if abs(v) == 1 else f"{abs(v)}*"
            parts.append(("- " if v < 0 else "+ ") + s + str(a))
    text = " ".join(parts).lstrip("+ ") or "0"
    return f"{text} >= {-row[0]}"
