"""Command-line front end.

Exit codes: 0 completed with everything passing / feasible, 1 completed with violations or
failures, 2 usage or parse errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

from .errors import FusionError, GeometryError, MultipleLatentComponents, UnknownClaim, UnknownScenario

OK, FOUND, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


# ------------------------------------------------------------ helpers

def _emit(args, payload: dict, text: str):
    if args.json:
        print(json.dumps(payload, indent=2, default=str))
    else:
        print(text)


def _out(args) -> Path | None:
    if not getattr(args, "out", None):
        return None
    p = Path(args.out)
    p.mkdir(parents=True, exist_ok=True)
    return p


def _write(args, name: str, content: str) -> str | None:
    d = _out(args)
    if d is None:
        return None
    path = d / name
    path.write_text(content)
    return str(path)


def _params(items) -> dict:
    out = {}
    for it in items or []:
        if "=" not in it:
            raise UsageError(f"expected key=value, got {it!r}")
        k, v = it.split("=", 1)
        try:
            out[k] = Fraction(v)
        except ValueError:
            raise UsageError(f"parameter {k} needs a number, got {v!r}") from None
    return out


def _cards(items) -> dict | None:
    if not items:
        return None
    return {k: int(v) for k, v in _params(items).items()}


def _dataset(args):
    """(graph, hybrid dataset) from --data FILE or --strategy ID."""
    from .graphs import scenario
    from .strategies import STRATEGIES, strategy_dataset
    from .tables import HybridDataset
    if getattr(args, "strategy", None):
        if args.strategy not in STRATEGIES:
            raise UsageError(f"unknown strategy {args.strategy!r}")
        g, h = strategy_dataset(args.strategy, _params(args.param), exact=not args.float)
        return g, h
    if not getattr(args, "data", None):
        raise UsageError("give --data FILE or --strategy ID")
    try:
        h = HybridDataset.from_json(json.loads(Path(args.data).read_text()))
    except (OSError, ValueError, KeyError, TypeError) as e:
        raise UsageError(f"cannot parse {args.data}: {e}") from None
    if not args.scenario:
        raise UsageError("--scenario is required with --data")
    g = scenario(args.scenario, _cards(getattr(args, "card", None)))
    return g, (h.to_float() if args.float else h)


def _query(args, h) -> list[str]:
    if getattr(args, "tables", None):
        return list(args.tables)
    return ["P"] + [f"do({t})" for t in h.targets()]


# ------------------------------------------------------------ scenarios

def cmd_scenarios(args) -> int:
    from .graphs import ALIASES, NOTES, scenario, scenario_ids
    if args.action == "list":
        rows = []
        for sid in scenario_ids():
            g = scenario(sid)
            rows.append({"id": sid, "observed": {n: g.card(n) for n in g.observed},
                         "latents": g.latents, "eligible": g.eligible_targets(), "note": NOTES.get(sid, "")})
        lines = []
        for r in rows:
            nodes = ",".join(f"{n}:{c}" for n, c in r["observed"].items())
            lines.append(f"{r['id']:<26} nodes {nodes:<22} do {','.join(r['eligible']) or '-'}")
        text = "\n".join(lines)
        text += "\naliases: " + ", ".join(f"{a} -> {t}" for a, (t, _) in sorted(ALIASES.items()))
        _emit(args, {"scenarios": rows}, text)
        return OK
    if not args.id:
        raise UsageError("scenarios show needs an id")
    g = scenario(args.id, _cards(args.card))
    d = g.to_json()
    d["eligible"] = g.eligible_targets()
    observed = ", ".join(f"{n} ({g.card(n)})" for n in g.observed)
    latents = ", ".join(lat + " -> " + ",".join(g.children(lat)) for lat in g.latents)
    edges = ", ".join(f"{a}->{b}" for a, b in g.edges if a in g.observed)
    text = (f"{args.id}\n  observed: {observed}\n  latents: {latents}\n  edges: {edges}\n"
            f"  eligible interventions: {', '.join(g.eligible_targets()) or '-'}")
    _emit(args, d, text)
    return OK


# ------------------------------------------------------------ reproduce

def cmd_reproduce(args) -> int:
    from .claims import claim_ids, reproduce
    ids = claim_ids() if args.claim == "all" else [args.claim]
    for c in ids:
        if c not in claim_ids():
            raise UnknownClaim(c)
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as ex:
        reports = list(ex.map(reproduce, ids))
    reports.sort(key=lambda r: r.criterion)
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["criterion", "claim", "check", "provenance", "expected", "computed", "ok"])
    for r in reports:
        for c in r.checks:
            w.writerow([r.criterion, r.claim, c.name, c.provenance, c.expected, c.computed, c.ok])
    _write(args, "reproduce.csv", buf.getvalue())
    _write(args, "reproduce.json", json.dumps([r.to_json() for r in reports], indent=2))
    text = []
    for r in reports:
        text.append(r.line())
        if args.verbose:
            for c in r.checks:
                text.append(f"    {'ok ' if c.ok else 'BAD'} {c.name} [{c.provenance}] expected {c.expected}; "
                            f"computed {c.computed}")
    passed = sum(r.passed for r in reports)
    text.append(f"{passed}/{len(reports)} claims pass")
    _emit(args, {"reports": [r.to_json() for r in reports], "passed": passed, "total": len(reports)},
          "\n".join(text))
    return OK if passed == len(reports) else FOUND


# ------------------------------------------------------------ check

def cmd_check(args) -> int:
    g, h = _dataset(args)
    if args.mode == "membership":
        from .geometry import lp_membership, point_of, unpack, vertices
        q = _query(args, h)
        try:
            poly = vertices(unpack(g, q))
        except MultipleLatentComponents as e:
            raise UsageError(f"membership needs a single shared source ({e}); try --mode mq or inflation") from None
        pt = point_of(h, poly.coords, g)
        cert = lp_membership(pt, poly)
        ok = cert.verify(pt, poly)
        payload = {"mode": "membership", "tables": q, "feasible": cert.feasible, "verified": ok}
        if cert.feasible:
            payload["weights"] = {i: str(x) for i, x in enumerate(cert.weights) if x != 0}
        else:
            h0, hv = cert.hyperplane
            payload["hyperplane"] = {"constant": str(h0), "coefficients": {str(a): str(c) for a, c in
                                                                          zip(poly.coords, hv) if c != 0}}
        path = _write(args, "membership.json", json.dumps(payload, indent=2))
        _emit(args, payload, ("FEASIBLE" if cert.feasible else "INFEASIBLE") +
              f" ({'+'.join(q)}; certificate {'verified' if ok else 'NOT verified'})" +
              (f"\ncertificate: {path}" if path else ""))
        return OK if cert.feasible else FOUND
    if args.mode == "inflation":
        return _run_inflation(args, g, h)
    if args.mode == "mq":
        return _run_mq(args, g, h)
    if args.mode == "witnesses":
        return _run_witnesses(args, g, h)
    raise UsageError(f"unsupported mode {args.mode}")


def _run_inflation(args, g, h) -> int:
    from .inflation import solve_dataset, verify_certificate
    scen = args.scenario or _scenario_of(args)
    inst, res = solve_dataset(scen, h, g)
    payload = {"instance": inst.layout.scenario, "feasible": res.feasible,
               "route": res.route, "orbits": len(inst.orbits)}
    text = "FEASIBLE" if res.feasible else "INFEASIBLE"
    if not res.feasible:
        cert = res.certificate
        payload["certificate"] = cert.to_json()
        payload["verified"] = verify_certificate(inst, cert)
        path = _write(args, "inflation_certificate.json", json.dumps(cert.to_json(), indent=2))
        text += f" (certificate value {cert.value}, exact check {'passed' if payload['verified'] else 'FAILED'})"
        if path:
            text += f"\ncertificate written: {path}"
    _emit(args, payload, text)
    return OK if res.feasible else FOUND


def _run_mq(args, g, h) -> int:
    from .bilinear import Compatible, check_feasibility, factorization_problem
    q = _query(args, h)
    targets = list(args.targets) if args.targets else None
    p = factorization_problem(g, q, h, targets=targets)
    res = check_feasibility(p, args.gap, seed=args.seed, time_budget=args.budget)
    r = res.result
    payload = {"tables": q, "variables": p.variables, **r.to_json(), "compatible": isinstance(res, Compatible),
               "dropped": p.dropped}
    _write(args, "mq.json", json.dumps(payload, indent=2))
    verdict = "COMPATIBLE" if isinstance(res, Compatible) else "INCOMPATIBLE"
    _emit(args, payload, f"{verdict}: M_q in [{r.lower:.6g}, {r.upper:.6g}] ({r.nodes} nodes, {r.iterations} "
                         f"see-saw steps)")
    return OK if isinstance(res, Compatible) else FOUND


def _same_scenario(a: str, b: str) -> bool:
    from .graphs import ALIASES
    return ALIASES.get(a, (a,))[0] == ALIASES.get(b, (b,))[0]


def _scenario_of(args) -> str:
    from .strategies import STRATEGIES
    if getattr(args, "strategy", None):
        return STRATEGIES[args.strategy].scenario
    raise UsageError("--scenario is required")


def _run_witnesses(args, g, h) -> int:
    from .catalog import builtin_keys, builtin_witness
    from .errors import DivisorZero, GuardFailed, MissingTable
    from .witness import guarded_evaluate
    scen = args.scenario or _scenario_of(args)
    rows, violated = [], []
    for key in builtin_keys():
        w = builtin_witness(key)
        if not _same_scenario(w.scenario, scen):
            continue
        try:
            v = guarded_evaluate(w, h, g)
        except (GuardFailed, DivisorZero, MissingTable) as e:
            rows.append({"key": key, "status": "not applicable", "reason": str(e)})
            continue
        except FusionError as e:
            rows.append({"key": key, "status": "error", "reason": str(e)})
            continue
        status = "satisfied" if v.satisfied else "VIOLATED"
        if not v.satisfied:
            violated.append(key)
        rows.append({"key": key, "status": status, "verified": w.verified, **v.to_json()})
    text = "\n".join(f"{r['key']:<32} {r['status']:<15} " +
                     (f"value {r['value_text']} (slack {r['slack_text']})" if "value_text" in r else r.get("reason", ""))
                     for r in rows) or "no catalog witness for this scenario"
    _write(args, "witnesses.json", json.dumps(rows, indent=2))
    _emit(args, {"witnesses": rows, "violated": violated}, text)
    return FOUND if violated else OK


# ------------------------------------------------------------ geometry

def cmd_geometry(args) -> int:
    from . import geometry as geo
    from .graphs import scenario
    g = scenario(args.scenario, _cards(args.card))
    q = list(args.tables)
    t = time.time()
    if args.polytope == "no-signalling":
        ns, coords = geo.no_signalling_system(g, q)
        out = geo.fourier_motzkin(ns, [c for c in ns.columns if isinstance(c, tuple)])
        poly = geo.system_to_polyhedron(out, coords)
    else:
        spec = geo.unpack(g, q)
        if args.method == "fm":
            cs = geo.classical_system(spec)
            out = geo.fourier_motzkin(cs, [c for c in cs.columns if isinstance(c, tuple)])
            poly = geo.system_to_polyhedron(out, spec.coords)
        else:
            poly = geo.facets(geo.vertices(spec))
    classes = []
    if args.classify:
        from .claims import md_group, md_trivial
        if not _same_scenario(args.scenario, "measurement-dependence"):
            raise UsageError("--classify uses the measurement-dependence relabeling group")
        a_card = g.card("A")
        trivial = md_trivial(poly.coords) if "P" in q and "do(A)" in q else {}
        classes = geo.classify(poly, md_group(poly.coords, a_card), trivial)
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(["kind", "constant"] + [str(a) for a in poly.coords])
    for r in poly.ineqs:
        w.writerow(["ineq"] + [str(x) for x in r])
    for r in poly.eqs or []:
        w.writerow(["eq"] + [str(x) for x in r])
    _write(args, "facets.csv", buf.getvalue())
    payload = {"tables": q, "polytope": args.polytope, "facets": len(poly.ineqs), "equalities": len(poly.eqs or []),
               "seconds": round(time.time() - t, 2),
               "classes": [{"name": c.name, "size": c.size, "representative": geo.row_to_text(c.representative,
                                                                                             poly.coords)}
                           for c in classes]}
    text = f"{len(poly.ineqs)} facets, {len(poly.eqs or [])} equalities ({payload['seconds']} s)"
    for c in payload["classes"]:
        text += f"\n  {c['name']:<12} {c['size']:>3}  {c['representative']}"
    _emit(args, payload, text)
    return OK


# ------------------------------------------------------------ inflate / mq

def cmd_inflate(args) -> int:
    g, h = _dataset(args)
    return _run_inflation(args, g, h)


def cmd_mq(args) -> int:
    g, h = _dataset(args)
    return _run_mq(args, g, h)


# ------------------------------------------------------------ witness

def cmd_witness(args) -> int:
    from .catalog import builtin_keys, builtin_witness
    from .witness import guarded_evaluate
    if args.action == "list":
        rows = [builtin_witness(k) for k in builtin_keys()]
        _emit(args, {"witnesses": [{"key": w.key, "scenario": w.scenario, "verified": w.verified} for w in rows]},
              "\n".join(f"{w.key:<32} {w.scenario:<24} {'' if w.verified else 'unverified'}" for w in rows))
        return OK
    if not args.key:
        raise UsageError(f"witness {args.action} needs a key")
    try:
        w = builtin_witness(args.key)
    except FusionError as e:
        raise UsageError(str(e)) from None
    if args.action == "show":
        text = f"{w.key} [{w.scenario}, {w.level}]\n  {w}"
        for n, p in w.parts:
            text += f"\n  {n} = {p}"
        if w.note:
            text += f"\n  note: {w.note}"
        _emit(args, w.to_json(), text)
        return OK
    if not (args.strategy or args.data):
        raise UsageError("witness eval needs --strategy or --data")
    if args.data and not args.scenario:
        args.scenario = w.scenario
    g, h = _dataset(args)
    v = guarded_evaluate(w, h, g)
    text = f"{'satisfied' if v.satisfied else 'VIOLATED'}: {v.value} {w.sense} {v.bound} (slack {v.slack})"
    for n, x in v.parts.items():
        text += f"\n  {n} = {x}"
    _emit(args, v.to_json(), text)
    return OK if v.satisfied else FOUND


# ------------------------------------------------------------ strategy

def cmd_strategy(args) -> int:
    from .strategies import STRATEGIES
    if args.action == "list":
        _emit(args, {"strategies": {k: {"scenario": e.scenario, "targets": list(e.targets), "note": e.note}
                                    for k, e in STRATEGIES.items()}},
              "\n".join(f"{k:<22} {e.scenario:<24} do {','.join(e.targets)}  {e.note}" for k, e in STRATEGIES.items()))
        return OK
    if not args.strategy:
        raise UsageError("strategy run needs an id")
    g, h = _dataset(args)
    _write(args, f"{args.strategy}.json", json.dumps(h.to_json(), indent=2))
    for name, t in h.tables().items():
        fname = name.replace("|", "_").replace("(", "_").replace(")", "").replace("=", "").replace(",", "_")
        _write(args, f"{args.strategy}_{fname}.csv", t.to_csv())
    text = "\n".join(f"{name}\n{t.to_csv()}" for name, t in h.tables().items())
    _emit(args, h.to_json(), text)
    return OK


# ------------------------------------------------------------ parser

def _common(p, data=True):
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.add_argument("--out", help="directory for written artifacts")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", default=True, help="exact arithmetic (default)")
    mode.add_argument("--float", action="store_true", help="floating-point tables")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=float, default=None, help="time budget in seconds")
    if data:
        p.add_argument("--scenario")
        p.add_argument("--data", help="hybrid dataset JSON")
        p.add_argument("--strategy", help="built-in strategy id instead of --data")
        p.add_argument("--param", action="append", help="strategy parameter key=value")
        p.add_argument("--card", action="append", help="cardinality override NODE=k")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fusioncert", description="Compatibility certificates for fused "
                                 "observational and interventional data.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("scenarios", help="list or show registered causal graphs")
    p.add_argument("action", choices=["list", "show"])
    p.add_argument("id", nargs="?")
    p.add_argument("--card", action="append")
    _common(p, data=False)
    p.set_defaults(fn=cmd_scenarios)

    p = sub.add_parser("reproduce", help="run registered claims")
    p.add_argument("claim", help="claim id or 'all'")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-v", "--verbose", action="store_true")
    _common(p, data=False)
    p.set_defaults(fn=cmd_reproduce)

    p = sub.add_parser("check", help="check a dataset")
    p.add_argument("--mode", required=True, choices=["membership", "inflation", "mq", "witnesses"])
    p.add_argument("--tables", nargs="+", help='table selectors such as P "do(A)"')
    p.add_argument("--targets", nargs="+", help="extra interrupted nodes for mq")
    p.add_argument("--gap", type=float, default=1e-3)
    _common(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("geometry", help="facets of a classical or no-signalling polytope")
    p.add_argument("--scenario", required=True)
    p.add_argument("--tables", nargs="+", required=True)
    p.add_argument("--card", action="append")
    p.add_argument("--polytope", choices=["classical", "no-signalling"], default="classical")
    p.add_argument("--method", choices=["dd", "fm"], default="dd")
    p.add_argument("--classify", action="store_true")
    _common(p, data=False)
    p.set_defaults(fn=cmd_geometry)

    p = sub.add_parser("inflate", help="second-order inflation LP")
    _common(p)
    p.set_defaults(fn=cmd_inflate)

    p = sub.add_parser("mq", help="minimal source dependence M_q")
    p.add_argument("--tables", nargs="+")
    p.add_argument("--targets", nargs="+")
    p.add_argument("--gap", type=float, default=1e-3)
    _common(p)
    p.set_defaults(fn=cmd_mq)

    p = sub.add_parser("witness", help="catalog witnesses")
    p.add_argument("action", choices=["list", "show", "eval"])
    p.add_argument("key", nargs="?")
    _common(p)
    p.set_defaults(fn=cmd_witness)

    p = sub.add_parser("strategy", help="quantum strategies and their tables")
    p.add_argument("action", choices=["list", "run"])
    p.add_argument("id", nargs="?")
    _common(p)
    p.set_defaults(fn=cmd_strategy)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    if args.cmd == "strategy" and args.id:
        args.strategy = args.id
    try:
        return args.fn(args)
    except (UsageError, UnknownScenario, UnknownClaim, GeometryError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return USAGE
    except FusionError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return FOUND


if __name__ == "__main__":
    sys.exit(main())
