"""Command-line driver: generate datasets, solve, sweep the mixing weight, run ERM, report bounds.

Exit codes: 0 on success, 2 on usage errors, 1 on runtime failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import bounds, csp, erm, generators, milp
from .bnb import BnbConfig, FathomMode, NodeSelection
from .bnb import run as bnb_run
from .scoring import RULES, ScoringSpec

DOMAINS = ("wdp", "facility", "kmeans", "linsep", "familyF", "familyG", "mixture", "knapsack", "coloring")
MILP_SUFFIX = ".milp"
CSP_SUFFIXES = (".csp", ".col")
SWEEP_HEADER = ("mu_lo", "mu_hi", "avg_tree_size")
ARGMIN_HEADER = ("mu_lo", "mu_hi", "lo_closed", "hi_closed", "avg_tree_size", "mu_hat")
BOUNDS_HEADER = ("m", "n_vectors", "erad", "worst_case", "data_dependent")
FAILURES_HEADER = ("instance_id", "error")


class UsageError(Exception):
    pass


# -- dataset loading --------------------------------------------------------------------------

def _is_csp_path(path: Path) -> bool:
    return path.suffix in CSP_SUFFIXES


def load_instance(path: str | Path) -> Any:
    path = Path(path)
    if _is_csp_path(path):
        return csp.loads_csp(path.read_text())
    return milp.read(path)


def dataset_files(target: str | Path) -> list[Path]:
    """Instance files of a dataset directory (manifest order if present) or a single file."""
    target = Path(target)
    if target.is_file():
        return [target]
    if not target.is_dir():
        raise UsageError(f"no such dataset: {target}")
    manifest = target / "manifest.json"
    if manifest.exists():
        files = [target / rec["file"] for rec in json.loads(manifest.read_text())["instances"]]
    else:
        files = sorted(p for p in target.iterdir() if p.suffix in (MILP_SUFFIX, *CSP_SUFFIXES))
    if not files:
        raise UsageError(f"dataset {target} is empty")
    return files


# -- generate ---------------------------------------------------------------------------------

def _family_params(args, k: int) -> generators.FamilyParams:
    # instance k of a family dataset uses scale gamma + k so the files differ only in gamma
    return generators.FamilyParams(args.n, args.mustar, args.gamma + k)


def _generate_one(args, k: int, seed: int) -> tuple[str, dict]:
    d = args.domain
    if d == "knapsack":
        return milp.dumps(generators.knapsack_example()), {}
    if d == "familyF":
        p = _family_params(args, k)
        return milp.dumps(generators.family_F(p)), {"gamma": p.gamma}
    if d == "familyG":
        p = _family_params(args, k)
        return milp.dumps(generators.family_G(p)), {"gamma": p.gamma}
    if d == "wdp":
        return milp.dumps(generators.gen_winner_determination(args.bidders, args.goods, args.bundle, seed)), {}
    if d == "facility":
        return milp.dumps(generators.gen_facility_location(args.facilities, args.customers, seed)), {}
    if d == "kmeans":
        return milp.dumps(generators.gen_kmeans(args.points, args.clusters, seed)), {}
    if d == "linsep":
        return milp.dumps(generators.gen_linear_separator(args.points, args.dim, args.flips, seed)), {}
    if d == "coloring":
        edges = csp.random_graph(args.vertices, args.p, seed)
        return csp.dumps_csp(csp.encode_graph_coloring(edges, args.colors, args.vertices)), {}
    raise UsageError(f"unknown domain {d!r}")


def cmd_generate(args) -> int:
    if args.domain not in DOMAINS:
        raise UsageError(f"unknown domain {args.domain!r}; choose from {', '.join(DOMAINS)}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    suffix = ".csp" if args.domain == "coloring" else MILP_SUFFIX
    records = []
    params = {k: getattr(args, k) for k in _DOMAIN_PARAMS[args.domain]}
    notes = []
    if args.domain == "mixture":
        mix = generators.worst_case_mixture(args.n, args.a, args.b)
        texts = {0: milp.dumps(mix.q_a), 1: milp.dumps(mix.q_b)}
        members = [0 if q is mix.q_a else 1 for q in mix.sample(args.m, args.seed)]
        for k, member in enumerate(members):
            name = f"mixture_{k:03d}{suffix}"
            (out / name).write_text(texts[member])
            records.append({"file": name, "seed": args.seed, "member": "G(a)" if member == 0 else "F(b)"})
        notes.append("instances are draws from the two-point support {G with mustar=a, F with mustar=b}")
    else:
        count = 1 if args.domain == "knapsack" else args.m
        for k in range(count):
            seed = args.seed + k
            text, extra = _generate_one(args, k, seed)
            name = f"{args.domain}_{k:03d}{suffix}"
            (out / name).write_text(text)
            records.append({"file": name, "seed": seed, **extra})
        if args.domain in ("familyF", "familyG"):
            notes.append("instance k uses objective scale gamma + k")
    manifest = {"domain": args.domain, "params": params, "seed": args.seed, "notes": notes, "instances": records}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(records)} instance(s) to {out}")
    return 0


_DOMAIN_PARAMS = {
    "knapsack": (),
    "familyF": ("n", "mustar", "gamma", "m"),
    "familyG": ("n", "mustar", "gamma", "m"),
    "mixture": ("n", "a", "b", "m"),
    "wdp": ("bidders", "goods", "bundle", "m"),
    "facility": ("facilities", "customers", "m"),
    "kmeans": ("points", "clusters", "m"),
    "linsep": ("points", "dim", "flips", "m"),
    "coloring": ("vertices", "p", "colors", "m"),
}


# -- configs ----------------------------------------------------------------------------------

def _engine_cfg(args, is_csp: bool):
    if is_csp:
        return csp.CspConfig(preset=args.preset, node_selection=args.node_selection or "depthfirst",
                             node_cap=args.node_cap, cost_cap=args.cost_cap)
    return BnbConfig(node_selection=args.node_selection or "bestbound", fathom_mode=args.fathom_mode,
                     node_cap=args.node_cap, cost_cap=args.cost_cap, partial_pivots=args.partial_pivots)


def _rules(args, is_csp: bool) -> tuple[str, str]:
    r1 = args.rule1 or ("degdom" if is_csp else "minchange")
    r2 = args.rule2 or ("ddegdom" if is_csp else "maxchange")
    known = csp.CSP_RULES if is_csp else RULES
    for r in (r1, r2):
        if r.split(":")[0] not in known:
            raise UsageError(f"unknown rule {r!r}; choose from {', '.join(sorted(known))}")
    return r1, r2


def _spec(args, is_csp: bool) -> ScoringSpec:
    if args.rule and (args.rule1 or args.rule2):
        raise UsageError("use either --rule or --rule1/--rule2")
    if args.rule:
        known = csp.CSP_RULES if is_csp else RULES
        if args.rule.split(":")[0] not in known:
            raise UsageError(f"unknown rule {args.rule!r}")
        return ScoringSpec.single(args.rule)
    r1, r2 = _rules(args, is_csp)
    if not 0 <= args.mu <= 1:
        raise UsageError("--mu must lie in [0, 1]")
    return ScoringSpec.pair(r1, r2, Fraction(args.mu))


# -- solve / csp ------------------------------------------------------------------------------

def cmd_solve(args) -> int:
    path = Path(args.instance)
    if not path.is_file():
        raise UsageError(f"no such instance file: {path}")
    is_csp = _is_csp_path(path)
    inst = load_instance(path)
    spec = _spec(args, is_csp)
    cfg = _engine_cfg(args, is_csp)
    if is_csp:
        res = csp.ts_run(inst, spec=spec, cfg=cfg)
        tree = res.tree
        print(f"best: {_fmt_csp_solution(inst, res.best)}")
    else:
        res = bnb_run(inst, spec, cfg)
        tree = res.tree
        print(f"optimum: {'infeasible' if res.optimum is None else repr(res.optimum)}")
    print(f"tree_size: {tree.size}{' (capped)' if tree.capped else ''}")
    print(f"fingerprint: {tree.fingerprint}")
    if args.tree:
        print(tree.dump(), end="")
    return 0


def _fmt_csp_solution(inst: csp.CspInstance, y) -> str:
    if y is None:
        return "none"
    return " ".join(f"{name}={v}" for name, v in zip(inst.names, y.values) if v is not None)


def cmd_csp(args) -> int:
    path = Path(args.instance)
    if not path.is_file():
        raise UsageError(f"no such instance file: {path}")
    inst = csp.loads_csp(path.read_text())
    if args.colors is not None:
        inst = csp.CspInstance(inst.names, [tuple(range(args.colors))] * inst.n, inst.constraints)
    spec = _spec(args, True)
    res = csp.ts_run(inst, spec=spec, cfg=_engine_cfg(args, True))
    if args.preset == "hard":
        print(f"satisfiable: {'yes' if res.best is not None else 'no'}")
    print(f"best: {_fmt_csp_solution(inst, res.best)}")
    print(f"tree_size: {res.tree.size}{' (capped)' if res.tree.capped else ''}")
    print(f"fingerprint: {res.tree.fingerprint}")
    if args.brute_force:
        print(f"brute_force_satisfiable: {'yes' if csp.brute_force_satisfiable(inst) else 'no'}")
    return 0


# -- sweep / erm ------------------------------------------------------------------------------

def _enumerate_job(path: str, r1: str, r2: str, cfg: Any, max_intervals: int):
    try:
        inst = load_instance(path)
        pc = erm.enumerate_behaviors(inst, r1, r2, cfg, max_intervals)
        return pc, inst.n if isinstance(inst, csp.CspInstance) else len(inst.binary), None
    except Exception as exc:  # recorded per instance; the sweep goes on
        return None, 0, f"{type(exc).__name__}: {exc}"


def _run_sweep(args) -> tuple[list[tuple[str, erm.PiecewiseCost]], list[tuple[str, str]], dict]:
    files = dataset_files(args.dataset)
    kinds = {_is_csp_path(f) for f in files}
    if len(kinds) != 1:
        raise UsageError("dataset mixes MILP and CSP instances")
    is_csp = kinds.pop()
    r1, r2 = _rules(args, is_csp)
    cfg = _engine_cfg(args, is_csp)
    jobs = [(str(f), r1, r2, cfg, args.max_intervals) for f in files]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_enumerate_job, *zip(*jobs)))
    else:
        results = [_enumerate_job(*j) for j in jobs]
    ok, failed = [], []
    n_max = max(n for _, n, _ in results)
    for f, (pc, _, err) in zip(files, results):
        if err is None:
            ok.append((f.stem, pc))
        else:
            failed.append((f.stem, err))
            print(f"warning: {f.stem} failed: {err}", file=sys.stderr)
    meta = {"dataset": str(args.dataset), "rule1": r1, "rule2": r2, "kind": "csp" if is_csp else "milp",
            "n": n_max, "kappa": cfg.kappa, "instances": [k for k, _ in ok], "failed": [k for k, _ in failed]}
    return ok, failed, meta


def _write_csv(path: Path, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue())


def _fl(x: Fraction | float) -> str:
    return repr(float(x))


def _argmin_row(avg: erm.PiecewiseCost) -> list[Any]:
    best = avg.argmin()
    iv = best.interval
    return [_fl(iv.lo), _fl(iv.hi), int(iv.lo_closed), int(iv.hi_closed), repr(best.cost), _fl(iv.midpoint)]


def cmd_sweep(args) -> int:
    ok, failed, meta = _run_sweep(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "failures.csv", FAILURES_HEADER, failed)
    if not ok:
        print("error: every instance failed", file=sys.stderr)
        return 1
    avg = erm.average([pc for _, pc in ok])
    (out / "intervals.csv").write_text(erm.intervals_csv(ok))
    _write_csv(out / "sweep.csv", SWEEP_HEADER,
               [[_fl(p.interval.lo), _fl(p.interval.hi), repr(p.cost)] for p in avg.pieces])
    arg = _argmin_row(avg)
    _write_csv(out / "argmin.csv", ARGMIN_HEADER, [arg])
    (out / "sweep_manifest.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    counts = [len(pc) for _, pc in ok]
    print(f"instances: {len(ok)} ok, {len(failed)} failed")
    print(f"intervals per instance: min {min(counts)} max {max(counts)}; averaged pieces: {len(avg)}")
    print(f"argmin: mu in {avg.argmin().interval} avg_tree_size {arg[4]}")
    return 0


def cmd_erm(args) -> int:
    ok, failed, _ = _run_sweep(args)
    if not ok:
        print("error: every instance failed", file=sys.stderr)
        return 1
    avg = erm.average([pc for _, pc in ok])
    best = avg.argmin()
    print(f"mu_hat: {float(best.interval.midpoint)!r}")
    print(f"interval: {best.interval}")
    print(f"avg_tree_size: {best.cost!r}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "argmin.csv", ARGMIN_HEADER, [_argmin_row(avg)])
    return 0


# -- bounds -----------------------------------------------------------------------------------

def cmd_bounds(args) -> int:
    art = Path(args.artifacts)
    ivs, meta_path = art / "intervals.csv", art / "sweep_manifest.json"
    if not ivs.is_file() or not meta_path.is_file():
        raise UsageError(f"{art} does not hold sweep artifacts (intervals.csv, sweep_manifest.json)")
    meta = json.loads(meta_path.read_text())
    costs_by_id = erm.read_intervals_csv(ivs.read_text())
    costs = [costs_by_id[k] for k in meta["instances"]]
    n = args.n if args.n is not None else max(1, meta["n"])
    kappa, delta = args.kappa, args.delta
    if not 0 < delta < 1 or kappa < 1:
        raise UsageError("need 0 < delta < 1 and kappa >= 1")
    ms = sorted({m for m in (args.m or []) if 1 <= m <= len(costs)}) or list(range(1, len(costs) + 1))
    curve = bounds.generalization_curves(costs, n, kappa, delta, ms)
    out = Path(args.out) if args.out else art
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "bounds.csv", BOUNDS_HEADER,
               [[p.m, p.n_vectors, repr(p.erad), repr(p.worst_case), repr(p.data_dependent)] for p in curve])

    m = len(costs)
    last = curve[-1] if curve[-1].m == m else bounds.generalization_curves(costs, n, kappa, delta, [m])[0]
    kbar = args.kappa_bar if args.kappa_bar is not None else int(kappa)
    pd_path = bounds.pdim_pathwise(n)
    table = [
        ("pdim_pathwise", f"n={n}", pd_path, "pdim_pathwise"),
        ("pdim_general", f"n={n} d=2 kappa_bar={kbar}", bounds.pdim_general(n, 2, kbar), "pdim_general"),
        ("gen_bound_pdim", f"pdim={pd_path} m={m} kappa={kappa} delta={delta}",
         bounds.gen_bound_pdim(pd_path, m, kappa, delta), "gen_bound_pdim"),
        ("rad_worstcase", f"n={n} m={m} kappa={kappa}", bounds.rad_worstcase(n, m, kappa), "rad_worstcase"),
        ("rad_datadep", f"N={last.n_vectors} m={m}", last.erad, "rad_datadep"),
        ("massart_bound", f"N={last.n_vectors} m={m} c={kappa}",
         bounds.massart_bound(last.n_vectors, m, kappa), "massart_bound"),
        ("gen_bound_rad[worst]", f"m={m} kappa={kappa} delta={delta}", last.worst_case, "gen_bound_rad"),
        ("gen_bound_rad[data]", f"m={m} kappa={kappa} delta={delta}", last.data_dependent, "gen_bound_rad"),
    ]
    w = max(len(r[0]) for r in table)
    wi = max(len(r[1]) for r in table)
    print(f"{'bound':<{w}}  {'inputs':<{wi}}  {'value':>14}  constant")
    for name, inputs, value, key in table:
        flag = "exact" if bounds.EXACT[key] else "up-to-constant"
        print(f"{name:<{w}}  {inputs:<{wi}}  {value:>14.6g}  {flag}")
    print(f"series written to {out / 'bounds.csv'}")
    return 0


# -- parser -----------------------------------------------------------------------------------

def _add_engine_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--node-selection", choices=[s.value for s in NodeSelection], default=None,
                   help="default: bestbound for MILP, depthfirst for CSP")
    p.add_argument("--fathom-mode", choices=[m.value for m in FathomMode], default="full")
    p.add_argument("--node-cap", type=int, default=10**6)
    p.add_argument("--cost-cap", type=int, default=None, help="cap on tree size in costs (kappa)")
    p.add_argument("--partial-pivots", type=int, default=None, help="pivot budget for child LPs inside rules")
    p.add_argument("--preset", choices=sorted(csp.PRESETS), default="hard", help="CSP fathoming preset")


def _add_rule_args(p: argparse.ArgumentParser, single: bool) -> None:
    p.add_argument("--rule1", default=None)
    p.add_argument("--rule2", default=None)
    if single:
        p.add_argument("--rule", default=None, help="single rule instead of a pair")
        p.add_argument("--mu", type=float, default=0.5, help="weight of rule1")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="flat key = value file; flags override it")
    parser = argparse.ArgumentParser(prog="branchlearn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", parents=[common], help="write a dataset of instance files")
    g.add_argument("domain", help=", ".join(DOMAINS))
    g.add_argument("--out", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--m", type=int, default=1, help="number of instances")
    g.add_argument("--n", type=int, default=12)
    g.add_argument("--mustar", type=float, default=0.45)
    g.add_argument("--gamma", type=float, default=1.0)
    g.add_argument("--a", type=float, default=0.40)
    g.add_argument("--b", type=float, default=0.45)
    g.add_argument("--bidders", type=int, default=6)
    g.add_argument("--goods", type=int, default=8)
    g.add_argument("--bundle", type=int, default=3)
    g.add_argument("--facilities", type=int, default=4)
    g.add_argument("--customers", type=int, default=6)
    g.add_argument("--points", type=int, default=6)
    g.add_argument("--clusters", type=int, default=2)
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--flips", type=int, default=1)
    g.add_argument("--vertices", type=int, default=6)
    g.add_argument("--p", type=float, default=0.5)
    g.add_argument("--colors", type=int, default=3)
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", parents=[common], help="solve one instance and print the tree summary")
    s.add_argument("instance")
    _add_rule_args(s, single=True)
    _add_engine_args(s)
    s.add_argument("--tree", action="store_true", help="print the node table")
    s.set_defaults(func=cmd_solve)

    for name, func, hlp in (("sweep", cmd_sweep, "exact sweep of the mixing weight over a dataset"),
                            ("erm", cmd_erm, "empirical risk minimizer of the mixing weight")):
        p = sub.add_parser(name, parents=[common], help=hlp)
        p.add_argument("dataset")
        p.add_argument("--out", required=(name == "sweep"), default=None)
        _add_rule_args(p, single=False)
        _add_engine_args(p)
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--max-intervals", type=int, default=erm.MAX_INTERVALS)
        p.set_defaults(func=func)

    b = sub.add_parser("bounds", parents=[common], help="generalization report from sweep artifacts")
    b.add_argument("artifacts")
    b.add_argument("--kappa", type=float, default=150.0)
    b.add_argument("--delta", type=float, default=0.05)
    b.add_argument("--n", type=int, default=None, help="variable count (default: from the sweep)")
    b.add_argument("--kappa-bar", type=int, default=None)
    b.add_argument("--m", type=int, nargs="*", default=None, help="prefix sizes (default: 1..m)")
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_bounds)

    c = sub.add_parser("csp", parents=[common], help="tree search on a CSP file")
    c.add_argument("instance")
    c.add_argument("--colors", type=int, default=None, help="override domains with colors 0..k-1")
    c.add_argument("--brute-force", action="store_true")
    _add_rule_args(c, single=True)
    _add_engine_args(c)
    c.set_defaults(func=cmd_csp)
    return parser


def read_config(path: str | Path) -> dict[str, str]:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key = value")
        k, v = (t.strip() for t in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str], ns: argparse.Namespace) -> argparse.Namespace:
    sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    subparser = sub_action.choices[ns.command]
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for k, v in read_config(ns.config).items():
        a = actions.get(k)
        if a is None or k in ("config", "help"):
            raise UsageError(f"unknown config key {k!r} for '{ns.command}'")
        if isinstance(a, argparse._StoreTrueAction):
            defaults[k] = v.lower() in ("1", "true", "yes", "on")
        elif a.nargs in ("*", "+"):
            defaults[k] = [a.type(t) if a.type else t for t in v.split()]
        else:
            defaults[k] = v
    subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if ns.config:
            if not Path(ns.config).is_file():
                raise UsageError(f"no such config file: {ns.config}")
            try:
                ns = _apply_config(parser, argv, ns)
            except SystemExit as exc:
                return int(exc.code or 0)
        return ns.func(ns)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
