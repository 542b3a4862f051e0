"""Second-order inflation of two-source SWIGs, solved with exact certificates.

Both supported SWIGs have the same shape: a node `hub` fed by both sources,
a node `left` fed by the first source only and a node `right` fed by the
second only. `left` and `right` are unpacked into one copy per value of the
# node feeding them. The inflated network has two copies of each source:

    hub^{ij}    sees source-1 copy i and source-2 copy j
    left^i_k    sees source-1 copy i, unpacked for # value k
    right^j_k   sees source-2 copy j, unpacked for # value k

The LP asks for a joint q over the 12 binary inflated variables that is
invariant under swapping either pair of source copies and whose marginals on
the two diagonal copies (i = j = 0 and i = j = 1) factorize into products of
extended-table entries.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import Infeasible, SignatureMismatch, UnsupportedOrder, UnsupportedScenario
from .exactlp import solve_standard
from .graphs import mark_name
from .scalar import Scalar
from .tables import DataTable
from .witness import EXT, Atom, Poly, Witness


@dataclass(frozen=True)
class Layout:
    scenario: str
    hub: str
    left: str
    right: str
    left_mark: str     # base name of the # node feeding `left`
    right_mark: str
    marks: tuple[str, ...]  # # nodes of the extended table, in order


LAYOUTS = {
    "evans-uc-swig": Layout("evans-uc", hub="B", left="A", right="C", left_mark="B", right_mark="B",
                            marks=("B",)),
    "bilocal-swig": Layout("bilocal-chain", hub="A", left="B", right="C", left_mark="A", right_mark="B",
                           marks=("A", "B")),
}
ALIASES = {"evans-uc": "evans-uc-swig", "evans": "evans-uc-swig", "bilocal-chain": "bilocal-swig",
           "bilocal": "bilocal-swig"}


@dataclass
class InflationInstance:
    name: str
    layout: Layout
    variables: list[str]
    symmetries: list[tuple[int, ...]]           # generators, as permutations of variable positions
    # injectable constraints: (positions of the 6 inflated variables, marks of copy 0, marks of copy 1)
    injectable: list[tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]]
    orbits: list[list[int]] = field(default_factory=list, repr=False)

    @property
    def size(self) -> int:
        return 2 ** len(self.variables)

    def rows(self):
        """Constraint rows as (label, column counts). label = (constraint index, values)."""
        col_of = {}
        for k, orb in enumerate(self.orbits):
            for s in orb:
                col_of[s] = k
        n = len(self.variables)
        bits = [[(s >> (n - 1 - p)) & 1 for p in range(n)] for s in range(self.size)]
        out = []
        for ci, (pos, m0, m1) in enumerate(self.injectable):
            groups: dict[tuple, dict[int, int]] = {}
            for s in range(self.size):
                key = tuple(bits[s][p] for p in pos)
                d = groups.setdefault(key, {})
                d[col_of[s]] = d.get(col_of[s], 0) + 1
            for key in sorted(groups):
                out.append(((ci, key), groups[key]))
        return out


def build_inflation(scenario: str, order: int = 2) -> InflationInstance:
    if order != 2:
        raise UnsupportedOrder(f"only second-order inflation is implemented (got {order})")
    sid = ALIASES.get(scenario, scenario)
    if sid not in LAYOUTS:
        raise UnsupportedScenario(scenario)
    lay = LAYOUTS[sid]
    h, l, r = lay.hub, lay.left, lay.right
    names = ([f"{h}^{i}{j}" for j in (0, 1) for i in (0, 1)]
             + [f"{l}^{i}_{k}" for i in (0, 1) for k in (0, 1)]
             + [f"{r}^{j}_{k}" for j in (0, 1) for k in (0, 1)])
    pos = {n: p for p, n in enumerate(names)}

    def perm(fn):
        return tuple(pos[fn(n)] for n in names)

    def swap_first(n):
        base, rest = n.split("^")
        if base == h:
            return f"{h}^{1 - int(rest[0])}{rest[1]}"
        if base == l:
            return f"{l}^{1 - int(rest[0])}{rest[1:]}"
        return n

    def swap_second(n):
        base, rest = n.split("^")
        if base == h:
            return f"{h}^{rest[0]}{1 - int(rest[1])}"
        if base == r:
            return f"{r}^{1 - int(rest[0])}{rest[1:]}"
        return n

    sym = [perm(swap_first), perm(swap_second)]
    mark_vals = list(itertools.product((0, 1), repeat=len(lay.marks)))
    inj = []
    for m0 in mark_vals:
        for m1 in mark_vals:
            d0, d1 = dict(zip(lay.marks, m0)), dict(zip(lay.marks, m1))
            vs = (pos[f"{h}^00"], pos[f"{l}^0_{d0[lay.left_mark]}"], pos[f"{r}^0_{d0[lay.right_mark]}"],
                  pos[f"{h}^11"], pos[f"{l}^1_{d1[lay.left_mark]}"], pos[f"{r}^1_{d1[lay.right_mark]}"])
            inj.append((vs, m0, m1))
    inst = InflationInstance(sid, lay, names, sym, inj)
    inst.orbits = _orbits(len(names), sym)
    return inst


def _orbits(n: int, gens: Sequence[tuple[int, ...]]) -> list[list[int]]:
    def act(g, s):
        # variable p takes the value of variable g[p]
        t = 0
        for p in range(n):
            t |= ((s >> (n - 1 - g[p])) & 1) << (n - 1 - p)
        return t
    seen = [False] * (1 << n)
    out = []
    for s in range(1 << n):
        if seen[s]:
            continue
        orb, stack = [], [s]
        seen[s] = True
        while stack:
            x = stack.pop()
            orb.append(x)
            for g in gens:
                y = act(g, x)
                if not seen[y]:
                    seen[y] = True
                    stack.append(y)
        out.append(sorted(orb))
    return out


# ------------------------------------------------------------------ data side

def _q_atom(lay: Layout, vals: Sequence[int], marks: Sequence[int]) -> Atom:
    hub, left, right = vals
    d = {lay.hub: hub, lay.left: left, lay.right: right}
    d.update({mark_name(m): v for m, v in zip(lay.marks, marks)})
    return Atom(EXT, tuple(sorted(d.items())))


def _rhs_polys(inst: InflationInstance, rows) -> list[Poly]:
    lay = inst.layout
    out = []
    for (ci, key), _ in rows:
        _, m0, m1 = inst.injectable[ci]
        out.append(Poly.atom(_q_atom(lay, key[:3], m0)) * Poly.atom(_q_atom(lay, key[3:], m1)))
    return out


def _check_signature(inst: InflationInstance, q: DataTable):
    lay = inst.layout
    want_free = {lay.hub, lay.left, lay.right}
    want_given = {mark_name(m) for m in lay.marks}
    if set(q.free) != want_free or set(q.given) != want_given:
        raise SignatureMismatch(f"expected Q({','.join(sorted(want_free))} | {','.join(sorted(want_given))}), "
                                f"got Q({','.join(q.free)} | {','.join(q.given)})")
    if any(q.card(n) != 2 for n in q.names):
        raise SignatureMismatch("inflation instances are binary")


def _entry(q: DataTable, a: Atom):
    v = q.prob(dict(a.assign))
    return v if isinstance(v, Scalar) else Scalar.coerce(v)


# ------------------------------------------------------------------ certificates

@dataclass
class InfeasibilityCertificate:
    instance: str
    labels: list                  # constraint labels (constraint index, values)
    dual: list[Fraction]          # y with A^T y <= 0 column-wise
    terms: list[Poly]             # right-hand sides b_k as polynomials in Q atoms
    value: Scalar                 # b(q) . y > 0

    def witness(self) -> Witness:
        return render_witness(self)

    def to_json(self) -> dict:
        return {"instance": self.instance,
                "dual": [{"constraint": list(map(int, [lab[0]])), "values": list(lab[1]), "y": str(y)}
                         for lab, y in zip(self.labels, self.dual) if y != 0],
                "value": str(self.value), "witness": str(render_witness(self).lhs)}


@dataclass
class FeasibleModel:
    instance: str
    weights: dict[int, Scalar]    # orbit index -> total weight (spread evenly over the orbit)


@dataclass
class InflationResult:
    feasible: bool
    model: FeasibleModel | None = None
    certificate: InfeasibilityCertificate | None = None
    route: str = ""               # "float-guided" or "exact-simplex"


def _matrix(inst: InflationInstance):
    rows = inst.rows()
    ncol = len(inst.orbits)
    A = np.zeros((len(rows), ncol))
    for i, (_, cols) in enumerate(rows):
        for k, c in cols.items():
            A[i, k] = c
    return rows, A


def solve(inst: InflationInstance, q: DataTable, exact_fallback: bool = True) -> InflationResult:
    """Exact feasibility of the inflation LP for the extended table `q`.

    A float LP picks a candidate (a vertex or a Farkas vector); the verdict is
    then established exactly. If the candidate cannot be confirmed the exact
    simplex decides.
    """
    from scipy.optimize import linprog
    _check_signature(inst, q)
    rows, A = _matrix(inst)
    polys = _rhs_polys(inst, rows)
    b_exact = [_poly_value(p, q) for p in polys]
    b = np.array([float(x) for x in b_exact])
    res = linprog(np.zeros(A.shape[1]), A_eq=A, b_eq=b, bounds=(0, None), method="highs-ds")
    if res.status == 0:
        model = _exact_primal(A, b_exact, res.x)
        if model is not None:
            return InflationResult(True, FeasibleModel(inst.name, model), route="float-guided")
    elif res.status == 2:
        y = _farkas_candidate(A, b)
        if y is not None:
            cert = _verify_farkas(inst, rows, polys, A, b_exact, y)
            if cert is not None:
                return InflationResult(False, certificate=cert, route="float-guided")
    if not exact_fallback:
        raise Infeasible("float-guided route could not confirm a verdict")
    return _solve_exact(inst, rows, polys, A, b_exact)


def _poly_value(p: Poly, q: DataTable) -> Scalar:
    total = Scalar(0)
    for (num, den), c in p.terms.items():
        t = Scalar.coerce(c)
        for a in num:
            t = t * _entry(q, a)
        total = total + t
    return total


def _farkas_candidate(A, b):
    """Float y maximizing b.y subject to A^T y <= 0 and -1 <= y <= 1."""
    from scipy.optimize import linprog
    res = linprog(-b, A_ub=A.T, b_ub=np.zeros(A.shape[1]), bounds=(-1, 1), method="highs-ds")
    if res.status != 0 or -res.fun <= 1e-12:
        return None
    return res.x


def _rationalize(y, den=10 ** 6):
    return [Fraction(float(v)).limit_denominator(den) for v in y]


def _verify_farkas(inst, rows, polys, A, b_exact, y_float):
    for den in (64, 1024, 10 ** 6):
        y = _rationalize(y_float, den)
        cert = _check_dual(inst, rows, polys, A, b_exact, y)
        if cert is not None:
            return cert
    y = _repair_dual(A, y_float)
    return None if y is None else _check_dual(inst, rows, polys, A, b_exact, y)


def _check_dual(inst, rows, polys, A, b_exact, y):
    Ai = A.astype(np.int64)
    for k in range(Ai.shape[1]):
        col = Ai[:, k]
        if sum((y[i] * int(col[i]) for i in np.nonzero(col)[0]), Fraction(0)) > 0:
            return None
    val = sum((b * yi for b, yi in zip(b_exact, y) if yi != 0), Scalar(0))
    if not val > 0:
        return None
    return InfeasibilityCertificate(inst.name, [lab for lab, _ in rows], y, polys, val)


def _repair_dual(A, y_float, tol=1e-9):
    """Exact y on the face picked by the float solution: tight columns and box bounds kept tight."""
    import flint
    tight_cols = [k for k in range(A.shape[1]) if abs(A[:, k] @ y_float) <= tol]
    at_bound = [i for i in range(len(y_float)) if abs(abs(y_float[i]) - 1) <= tol]
    free = [i for i in range(len(y_float)) if i not in at_bound]
    fixed = {i: (1 if y_float[i] > 0 else -1) for i in at_bound}
    if not free:
        return [Fraction(fixed.get(i, 0)) for i in range(len(y_float))]
    # A[:, k]^T y = 0 on tight columns: solve for the free coordinates
    M = [[int(A[i, k]) for i in free] for k in tight_cols]
    rhs = [-sum(int(A[i, k]) * fixed[i] for i in at_bound) for k in tight_cols]
    if not M:
        return None
    aug = flint.fmpq_mat(len(M), len(free) + 1, [v for row, r in zip(M, rhs) for v in row + [r]])
    red, rank = aug.rref()
    sol = {i: Fraction(0) for i in free}
    for r in range(rank):
        lead = next(c for c in range(len(free) + 1) if red[r, c] != 0)
        if lead == len(free):
            return None
        # choose the float value for non-pivot variables by zeroing them; pivots from the row
        sol[free[lead]] = Fraction(int(red[r, len(free)].p), int(red[r, len(free)].q))
    y = [Fraction(0)] * len(y_float)
    for i, v in fixed.items():
        y[i] = Fraction(v)
    for i, v in sol.items():
        y[i] = v
    return y


def _fq(v):
    import flint
    v = Fraction(v)
    return flint.fmpq(v.numerator, v.denominator)


def _exact_primal(A, b_exact, x_float, tol=1e-10):
    """Exact nonnegative solution on the support of a float vertex, or None."""
    import flint
    support = [k for k in range(A.shape[1]) if x_float[k] > tol]
    if not support:
        return None
    m = A.shape[0]
    cols = len(support)
    rat = [[int(A[i, k]) for k in support] for i in range(m)]
    parts = [[Fraction(s.a) for s in b_exact], [Fraction(s.b) for s in b_exact]]
    sols = []
    for rhs in parts:
        aug = flint.fmpq_mat(m, cols + 1, [_fq(v) for row, r in zip(rat, rhs) for v in row + [r]])
        red, rank = aug.rref()
        x = [Fraction(0)] * cols
        for r in range(rank):
            lead = next(c for c in range(cols + 1) if red[r, c] != 0)
            if lead == cols:
                return None
            if any(red[r, c] != 0 for c in range(lead + 1, cols)):
                return None  # not a vertex: the support has dependent columns
            v = red[r, cols]
            x[lead] = Fraction(int(v.p), int(v.q))
        sols.append(x)
    out = {}
    for k, a, c in zip(support, *sols):
        s = Scalar(a, c)
        if s < 0:
            return None
        out[k] = s
    # re-verify A x = b exactly
    for i in range(m):
        lhs = sum((out[k] * int(A[i, k]) for k in support if A[i, k]), Scalar(0))
        if lhs != b_exact[i]:
            return None
    return out


def _solve_exact(inst, rows, polys, A, b_exact) -> InflationResult:
    Ai = [[int(v) for v in row] for row in A]
    res = solve_standard([0] * A.shape[1], Ai, b_exact)
    if res.status == "optimal":
        model = {k: v for k, v in enumerate(res.x) if v != 0}
        return InflationResult(True, FeasibleModel(inst.name, model), route="exact-simplex")
    # Farkas vector over Q(sqrt2); the rendered witness is only data-independent when rational
    y = [Scalar.coerce(v) for v in res.farkas]
    val = sum((b * yi for b, yi in zip(b_exact, y)), Scalar(0))
    cert = InfeasibilityCertificate(inst.name, [lab for lab, _ in rows], y, polys, val)
    return InflationResult(False, certificate=cert, route="exact-simplex")


def verify_certificate(inst: InflationInstance, cert: InfeasibilityCertificate, q: DataTable | None = None) -> bool:
    """Exact re-check: A^T y <= 0 column-wise and, if given, b(q).y > 0."""
    rows, A = _matrix(inst)
    if [lab for lab, _ in rows] != list(cert.labels):
        return False
    for k in range(A.shape[1]):
        s = sum((cert.dual[i] * int(A[i, k]) for i in np.nonzero(A[:, k])[0]), Fraction(0) * 0)
        if s > 0:
            return False
    if q is not None:
        return _poly_value(render_witness(cert).lhs, q) > 0
    return True


def render_witness(cert: InfeasibilityCertificate) -> Witness:
    """sum_k y_k b_k(Q) <= 0, valid for every classically compatible Q."""
    lhs = Poly()
    for y, p in zip(cert.dual, cert.terms):
        if y != 0:
            lhs = lhs + p * Scalar.coerce(y)
    lay = LAYOUTS[cert.instance]
    return Witness(f"inflation-{cert.instance}", lhs, "<=", Poly(), lay.scenario, "Q",
                   tuple(lay.marks), note="rendered from an inflation infeasibility certificate")


def solve_dataset(scenario: str, data, graph=None) -> tuple[InflationInstance, InflationResult]:
    """Convenience: extend hybrid data to Q over the SWIG and solve."""
    from .graphs import scenario as get_scenario
    from .tables import HybridDataset, multi_ett_extend
    inst = build_inflation(scenario)
    g = graph or get_scenario(inst.layout.scenario)
    q = multi_ett_extend(g, data, inst.layout.marks) if isinstance(data, HybridDataset) else data
    return inst, solve(inst, q)


# ------------------------------------------------------------------ fitting witnesses to the dual cone

def _full_q_atoms(lay: Layout) -> list[Atom]:
    nodes = [lay.hub, lay.left, lay.right]
    out = []
    for vals in itertools.product((0, 1), repeat=3):
        for mv in itertools.product((0, 1), repeat=len(lay.marks)):
            out.append(_q_atom(lay, [dict(zip(nodes, vals))[n] for n in (lay.hub, lay.left, lay.right)], mv))
    return out


def _linear_in_q(atom: Atom, lay: Layout) -> dict[Atom, Fraction]:
    """An observational, do- or extended atom as a sum of full extended entries."""
    from .witness import DO, OBS
    nodes = [lay.hub, lay.left, lay.right]
    d = dict(atom.assign)
    out: dict[Atom, Fraction] = {}
    for full in _full_q_atoms(lay):
        f = dict(full.assign)
        if any(f[k] != v for k, v in d.items() if not k.endswith("#")):
            continue
        ok = True
        for m in lay.marks:
            mk = mark_name(m)
            if atom.kind == EXT:
                want = d.get(mk, 0)   # a missing # value is irrelevant on the no-signalling domain
            elif atom.kind == DO and atom.target == m:
                want = atom.value
            else:
                want = f[m]           # observational: the # node copies its base value
            ok &= f[mk] == want
        if atom.kind == DO and atom.target not in lay.marks:
            ok = False
        if ok:
            out[full] = out.get(full, Fraction(0)) + 1
    if not out:
        raise SignatureMismatch(f"{atom} cannot be read from Q({','.join(nodes)} | marks)")
    return out


def _domain(lay: Layout):
    """Affine parametrization Q = q0 + E t of normalized no-signalling extended tables."""
    import flint
    atoms = _full_q_atoms(lay)
    idx = {a: i for i, a in enumerate(atoms)}
    n = len(atoms)
    eqs = []   # rows (coeffs, rhs)
    marks = [mark_name(m) for m in lay.marks]
    mvals = list(itertools.product((0, 1), repeat=len(marks)))
    for mv in mvals:
        row = [0] * n
        for a in atoms:
            if tuple(dict(a.assign)[m] for m in marks) == mv:
                row[idx[a]] = 1
        eqs.append((row, 1))
    # a node set's marginal cannot depend on # nodes that do not feed any of its members
    feeds = {lay.hub: set(), lay.left: {mark_name(lay.left_mark)}, lay.right: {mark_name(lay.right_mark)}}
    nodes = [lay.hub, lay.left, lay.right]
    for size in (1, 2, 3):
        for S in itertools.combinations(nodes, size):
            reach = set().union(*(feeds[s] for s in S))
            free = [m for m in marks if m not in reach]
            if not free:
                continue
            for sv in itertools.product((0, 1), repeat=size):
                for mv in mvals:
                    md = dict(zip(marks, mv))
                    if any(md[m] != 0 for m in free):
                        continue
                    for fv in itertools.product((0, 1), repeat=len(free)):
                        if not any(fv):
                            continue
                        other = {**md, **dict(zip(free, fv))}
                        row = [0] * n
                        for a in atoms:
                            ad = dict(a.assign)
                            if all(ad[s] == v for s, v in zip(S, sv)):
                                if all(ad[m] == md[m] for m in marks):
                                    row[idx[a]] += 1
                                if all(ad[m] == other[m] for m in marks):
                                    row[idx[a]] -= 1
                        eqs.append((row, 0))
    M = flint.fmpz_mat(len(eqs), n, [v for r, _ in eqs for v in r])
    basis, nullity = M.nullspace()
    E = [[Fraction(int(basis[i, j])) for j in range(nullity)] for i in range(n)]
    # a particular solution: the uniform table
    q0 = [Fraction(1, 8)] * n
    return atoms, q0, E


def _quad(lin_a, lin_b):
    """Product of two affine forms given as lists [c0, c1..ck] -> dict of monomials."""
    out: dict[tuple, Fraction] = {}
    k = len(lin_a)
    for i in range(k):
        if lin_a[i] == 0:
            continue
        for j in range(k):
            if lin_b[j] == 0:
                continue
            key = tuple(sorted(x for x in (i, j) if x))
            out[key] = out.get(key, Fraction(0)) + lin_a[i] * lin_b[j]
    return out


def _poly_in_t(p: Poly, affine_of) -> dict[tuple, Fraction]:
    out: dict[tuple, Fraction] = {}
    for (num, den), c in p.terms.items():
        if den:
            raise SignatureMismatch("witness fitting needs divisor-free polynomials")
        cf = Scalar.coerce(c)
        if cf.b != 0:
            raise SignatureMismatch("witness fitting needs rational coefficients")
        if len(num) > 2:
            raise SignatureMismatch("inflation certificates have degree at most 2")
        forms = [affine_of(a) for a in num]
        if not forms:
            terms = {(): Fraction(1)}
        elif len(forms) == 1:
            terms = {((i,) if i else ()): v for i, v in enumerate(forms[0]) if v}
        else:
            terms = _quad(forms[0], forms[1])
        for key, v in terms.items():
            out[key] = out.get(key, Fraction(0)) + cf.a * v
    return out


@dataclass
class WitnessFit:
    dual: list[Fraction]
    coefficients: list[Fraction]     # weights of the free terms
    witness: Poly                    # target + sum coefficients * free terms, certified <= 0


def fit_witness(inst: InflationInstance, target: Poly, free_terms: Sequence[Poly] = (),
                pins: Sequence[tuple[Sequence[Fraction], Fraction]] = (),
                objective: Sequence[float] | None = None) -> WitnessFit | None:
    """Find y with A^T y <= 0 and weights r such that target + sum r_j free_j equals b(Q).y
    on every normalized no-signalling Q, so that the fitted polynomial is <= 0 for every Q
    admitting an inflation model. `pins` are extra linear equations sum_j c_j r_j = v on r.
    `objective`, if given, is minimized over r (weights on y are zero).
    """
    from scipy.optimize import linprog
    lay = inst.layout
    atoms, q0, E = _domain(lay)
    idx = {a: i for i, a in enumerate(atoms)}
    k = len(E[0])
    cache: dict[Atom, list[Fraction]] = {}

    def affine_of(a: Atom):
        if a not in cache:
            form = [Fraction(0)] * (k + 1)
            for full, c in _linear_in_q(a, lay).items():
                i = idx[full]
                form[0] += c * q0[i]
                for j in range(k):
                    form[j + 1] += c * E[i][j]
            cache[a] = form
        return cache[a]

    rows, A = _matrix(inst)
    polys = _rhs_polys(inst, rows)
    cols_b = [_poly_in_t(p, affine_of) for p in polys]
    tgt = _poly_in_t(target, affine_of)
    frees = [_poly_in_t(p, affine_of) for p in free_terms]
    monos = sorted(set().union(tgt, *cols_b, *frees) if frees else set().union(tgt, *cols_b))
    mpos = {m: i for i, m in enumerate(monos)}
    ny, nr = len(polys), len(frees)
    # equations: sum_k y_k b_k[m] - sum_j r_j free_j[m] = target[m]
    Aeq = np.zeros((len(monos) + len(pins), ny + nr))
    beq = np.zeros(len(monos) + len(pins))
    for kk, cb in enumerate(cols_b):
        for m, v in cb.items():
            Aeq[mpos[m], kk] = float(v)
    for j, fj in enumerate(frees):
        for m, v in fj.items():
            Aeq[mpos[m], ny + j] = -float(v)
    for m, v in tgt.items():
        beq[mpos[m]] = float(v)
    for p, (coef, val) in enumerate(pins):
        for j, c in enumerate(coef):
            Aeq[len(monos) + p, ny + j] = float(c)
        beq[len(monos) + p] = float(val)
    Aub = np.hstack([A.T, np.zeros((A.shape[1], nr))])
    cost = np.zeros(ny + nr)
    if objective is not None:
        cost[ny:] = objective
    res = linprog(cost, A_ub=Aub, b_ub=np.zeros(A.shape[1]), A_eq=Aeq, b_eq=beq,
                  bounds=[(None, None)] * (ny + nr), method="highs-ds")
    if res.status != 0:
        return None
    for den in (64, 1024, 10 ** 6):
        sol = _rationalize(res.x, den)
        y, r = sol[:ny], sol[ny:]
        if _fit_ok(A, cols_b, frees, tgt, pins, y, r):
            wit = target
            for rj, pj in zip(r, free_terms):
                if rj:
                    wit = wit + pj * Scalar(rj)
            return WitnessFit(y, r, wit)
    return None


def _fit_ok(A, cols_b, frees, tgt, pins, y, r) -> bool:
    for kcol in range(A.shape[1]):
        nz = np.nonzero(A[:, kcol])[0]
        if sum((y[i] * int(A[i, kcol]) for i in nz), Fraction(0)) > 0:
            return False
    acc: dict[tuple, Fraction] = {}
    for yk, cb in zip(y, cols_b):
        if yk:
            for m, v in cb.items():
                acc[m] = acc.get(m, Fraction(0)) + yk * v
    for rj, fj in zip(r, frees):
        if rj:
            for m, v in fj.items():
                acc[m] = acc.get(m, Fraction(0)) - rj * v
    keys = set(acc) | set(tgt)
    if any(acc.get(m, 0) != tgt.get(m, 0) for m in keys):
        return False
    return all(sum((c * rj for c, rj in zip(coef, r)), Fraction(0)) == val for coef, val in pins)
