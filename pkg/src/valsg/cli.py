"""Command-line entry point: ``valsg <group> <action> [flags]``.

Every run prints one JSON report on stdout:
``{"schema": "1", "command", "config", "anchor", "ok", "result"}``.
Exit codes: 0 success, 1 usage or input error, 2 a checked property failed.
A short human summary goes to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from importlib import resources

from . import composite, fatpoints, semigroup, skp, transcend
from .order import encode_value, parse_rat, rat_str
from .poly import PolyParseError, parse_poly

SCHEMA = "1"
DEFAULT_SEED = 0


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# argument helpers ----------------------------------------------------------------------

def _rat_list(text: str) -> list:
    try:
        return [parse_rat(t.strip()) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad rational list {text!r}: {exc}") from None


def _rat(text: str) -> Fraction:
    try:
        return parse_rat(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad rational {text!r}: {exc}") from None


def _params(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"rule parameter {item!r} must look like key=value")
        k, v = item.split("=", 1)
        try:
            out[k] = int(v)
        except ValueError:
            out[k] = v
    return out


def _stream(args) -> semigroup.GenStream:
    if args.gens and args.rule:
        raise UsageError("give either --gens or --rule, not both")
    if args.gens:
        return semigroup.GenStream.finite(_rat_list(args.gens))
    if args.rule:
        try:
            return semigroup.GenStream.from_rule(args.rule, **_params(args.param))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    raise UsageError("give --gens or --rule")


def _bound(text: str):
    if "," in text:
        a, b = _rat_list(text)
        from .order import GroupElem, RAT

        return GroupElem((a, b), (RAT, RAT))
    return _rat(text)


def _seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = os.environ.get("VALSG_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"VALSG_SEED must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def _precision(args, default=None):
    if getattr(args, "precision", None) is not None:
        return _rat(args.precision)
    env = os.environ.get("VALSG_PRECISION")
    if env is not None:
        return _rat(env)
    return default


def _poly(text: str, variables):
    try:
        return parse_poly(text, variables)
    except PolyParseError as exc:
        raise UsageError(str(exc)) from None


# handlers: each returns (result, ok, anchor, summary) ----------------------------------

def cmd_semigroup_enumerate(args):
    table = semigroup.enumerate_below(_stream(args), _bound(args.bound), args.horizon)
    return table.to_json(), True, "value semigroup enumeration", f"{len(table)} elements ({table.status})"


def cmd_semigroup_min_gens(args):
    table = semigroup.enumerate_below(_stream(args), _bound(args.bound), args.horizon)
    gens = semigroup.minimal_generators(table)
    return {"minimal_generators": [encode_value(g) for g in gens], "bound": encode_value(table.bound)}, True, \
        "minimal generators", f"{len(gens)} minimal generators"


def cmd_semigroup_plane_check(args):
    rep = semigroup.plane_branch_check(_rat_list(args.gens))
    return rep.to_json(), True, "plane branch criterion", f"verdict {rep.verdict}"


def cmd_semigroup_s_value(args):
    gamma = _rat(args.gamma)
    prefix = semigroup.enumerate_below(_rat_list(args.prefix), _rat(args.bound) if args.bound else gamma * 2 + 1)
    s, table = semigroup.s_value_table(prefix, gamma)
    return {"s": s, "witness": list(table.witness(gamma * s))}, True, "least multiple in the prefix semigroup", f"s = {s}"


def cmd_semigroup_probe(args):
    base = semigroup.GenStream.from_rule("dyadic-beta")
    cosets = semigroup.GenStream.from_rule("dyadic-module", n=args.n)
    rep = semigroup.module_fin_gen_probe(semigroup.SemiModule(base, cosets), _rat(args.bound), args.horizon)
    return rep.to_json(), True, "finite generation probe of M_n over M_0", f"saturated {rep.saturated}"


def cmd_semigroup_spq(args):
    table = semigroup.spq_build(args.p, args.q, args.depth, _rat(args.bound))
    threshold = _rat(args.threshold)
    scan = semigroup.accumulation_scan(table, threshold, args.k)
    return {"table": table.to_json(), "scan": scan.to_json()}, True, "accumulation of S_{p,q}", \
        f"min gap {scan.min_gap}, {len(scan.cluster_points)} clusters"


def cmd_semigroup_omega(args):
    lam = semigroup.GenStream.from_rule("one-minus-pow")
    emb = semigroup.omega_embedding(lam, args.m, args.grid)
    return emb.to_json(), True, "omega^m embedding", f"{len(emb.values)} grid points"


def cmd_skp_betas(args):
    return [rat_str(skp.dyadic_beta(i)) for i in range(args.count)], True, "dyadic key polynomial values", \
        f"{args.count} values"


def cmd_skp_expand(args):
    f = _poly(args.poly, skp.XY)
    exp = skp.standard_expansion(f)
    ok = exp.reconstruct() == f
    return {"expansion": exp.to_json(), "value": rat_str(skp.nu_bar(f)), "reconstructs": ok}, ok, \
        "standard expansion", f"value {skp.nu_bar(f)}"


def cmd_skp_value(args):
    f = _poly(args.poly, skp.XY)
    v = skp.nu_bar(f)
    return {"value": rat_str(v)}, True, "dyadic valuation", f"value {v}"


def cmd_skp_keys(args):
    seq = skp.skp_build(args.count)
    return seq.to_json(with_polys=not args.no_polys), True, "key polynomial sequence", f"{args.count} key polynomials"


def cmd_skp_divisibility(args):
    reps = [skp.key_divisibility_check(i) for i in range(args.max_index + 1)]
    ok = all(r.verdict for r in reps)
    return [r.to_json() for r in reps], ok, "divisibility of P_i(x, xz) by x^i", f"all divisible {ok}"


def cmd_skp_module(args):
    table = skp.module_Mn(args.n, _rat(args.bound))
    result = table.to_json()
    ok = True
    if args.bruteforce:
        brute = skp.module_Mn_bruteforce(args.n, _rat(args.bound))
        ok = brute == table.elements
        result["bruteforce_agrees"] = ok
    return result, ok, "modules M_n", f"{len(table.elements)} elements"


def cmd_skp_witness(args):
    ws = skp.new_generator_witness(args.n, args.max_index)
    ok = all(w.in_module and w.denominator > w.psi_denominator_bound for w in ws)
    return [w.to_json() for w in ws], ok, "new generators beta_j - n", f"{len(ws)} witnesses"


def cmd_z2_build(args):
    bound = tuple(_rat_list(args.bound))
    try:
        ex = composite.z2_build(args.a_rule, args.b_rule, args.lambda_rule, args.depth, bound)
    except composite.ConstraintError as exc:
        raise UsageError(str(exc)) from None
    ok = all(ix.matches_closed_form and ix.outside_cone and not ix.multiples_in_prefix for ix in ex.indices)
    return ex.to_json(), ok, "rank-2 example in Z^2", f"all indices outside cone {ok}"


def cmd_composite_value(args):
    f = _poly(args.poly, composite.XYUV)
    v = composite.composite_value(f)
    return {"value": encode_value(v)}, True, "composite valuation", f"value {v}"


def cmd_composite_slice(args):
    rep = composite.F_slice(args.level, args.degree, _rat(args.bound), args.samples, _seed(args))
    return rep.to_json(), rep.contained, "slices of the composite value semigroup", f"contained {rep.contained}"


def cmd_composite_phi_check(args):
    results = {}
    for k in range(1, args.k + 1):
        results[str(k)] = composite.phi_derivative_check(k, composite.random_phi_coeffs(k, _seed(args)))
    ok = all(results.values())
    return results, ok, "derivative identity for phi polynomials", f"all hold {ok}"


def cmd_transcend_build(args):
    state = transcend.transcend_build(args.depth, _precision(args))
    result = state.to_json()
    diffs = transcend.difference_values(state)
    diff_ok = all(v == state.steps[i].alpha for (i, _), v in diffs.items())
    result["difference_values_match_alpha"] = diff_ok
    ok = diff_ok and not result["invariant_problems"]
    return result, ok, "inductive transcendental series", f"depth {state.i}, invariants ok {ok}"


def cmd_transcend_spotcheck(args):
    state = transcend.transcend_build(args.depth)
    rep = transcend.perturbation_spotcheck(state, args.n, args.trials, _seed(args))
    return rep.to_json(), rep.ok, "value of a perturbed element equals the predicted value", f"{rep.nonzero}/{rep.trials} nonzero"


def cmd_transcend_spectrum(args):
    state = transcend.transcend_build(args.depth) if args.depth else transcend.TranscendState()
    rep = transcend.d_spectrum(args.n, state.z)
    return rep.to_json(), True, "value spectrum of D_n", f"dimension {rep.dimension}"


def _field(args):
    try:
        return fatpoints.parse_field(args.field)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_fatpoints_dim(args):
    pts = fatpoints.random_points(args.r, _seed(args), _field(args))
    sysm = fatpoints.fatpoint_dim(args.d, args.n, pts)
    return sysm.to_json(), True, "forms vanishing at fat points", f"dim {sysm.dim}"


def cmd_fatpoints_scan(args):
    rep = fatpoints.semigroup_scan(args.s, args.dmax, args.nmax, _seed(args), _field(args), args.jobs)
    return rep.to_json(), rep.ok, "(d, n) semigroup scan", f"ok {rep.ok}, min ratio {rep.min_ratio}"


def cmd_corpus_run(args):
    path = args.path
    if path is None:
        text = resources.files("valsg").joinpath("data/corpus.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    cases = json.loads(text)
    if not cases:
        print("warning: empty corpus", file=sys.stderr)
    outcomes = []
    for case in cases:
        report, code = run(case["argv"])
        diffs = []
        _diff(case["expect"], report.get("result"), "result", diffs)
        if "exit" in case and case["exit"] != code:
            diffs.append({"path": "exit", "expected": case["exit"], "actual": code})
        outcomes.append({"name": case["name"], "passed": not diffs, "diffs": diffs})
    failed = [o for o in outcomes if not o["passed"]]
    return {"cases": outcomes, "passed": len(outcomes) - len(failed), "failed": len(failed)}, not failed, \
        "test-vector corpus", f"{len(outcomes) - len(failed)}/{len(outcomes)} cases pass"


def _diff(expected, actual, path, out):
    """Partial match: dict keys in ``expected`` must match; other values exactly."""
    if isinstance(expected, dict) and isinstance(actual, dict):
        for k, v in expected.items():
            if k not in actual:
                out.append({"path": f"{path}.{k}", "expected": v, "actual": "<missing>"})
            else:
                _diff(v, actual[k], f"{path}.{k}", out)
    elif expected != actual:
        out.append({"path": path, "expected": expected, "actual": actual})


# parser ---------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="valsg", description="Value semigroups of valuations: exact experiments.")
    p.add_argument("--json-out", help="also write the report to this file")
    groups = p.add_subparsers(dest="group", required=True, parser_class=_Parser)

    def action(group, name, handler, help_text):
        sp = group.add_parser(name, help=help_text)
        sp.set_defaults(handler=handler)
        return sp

    def gens_flags(sp):
        sp.add_argument("--gens", help="comma-separated rationals")
        sp.add_argument("--rule", help="named generator rule")
        sp.add_argument("--param", action="append", help="rule parameter key=value")
        sp.add_argument("--bound", required=True)
        sp.add_argument("--horizon", type=int, default=semigroup.DEFAULT_HORIZON)

    sg = groups.add_parser("semigroup").add_subparsers(dest="action", required=True, parser_class=_Parser)
    gens_flags(action(sg, "enumerate", cmd_semigroup_enumerate, "elements below a bound"))
    gens_flags(action(sg, "min-gens", cmd_semigroup_min_gens, "minimal generators below a bound"))
    sp = action(sg, "plane-check", cmd_semigroup_plane_check, "plane branch criterion")
    sp.add_argument("--gens", required=True)
    sp = action(sg, "s-value", cmd_semigroup_s_value, "least s with s*gamma in the prefix semigroup")
    sp.add_argument("--prefix", required=True)
    sp.add_argument("--gamma", required=True)
    sp.add_argument("--bound")
    sp = action(sg, "probe", cmd_semigroup_probe, "finite generation probe for M_n")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--bound", required=True)
    sp.add_argument("--horizon", type=int, default=semigroup.DEFAULT_HORIZON)
    sp = action(sg, "spq", cmd_semigroup_spq, "S_{p,q} table and accumulation scan")
    sp.add_argument("--p", type=int, default=2)
    sp.add_argument("--q", type=int, default=3)
    sp.add_argument("--depth", type=int, default=12)
    sp.add_argument("--bound", default="2")
    sp.add_argument("--threshold", default="1/64", help="gap size counted as small")
    sp.add_argument("--k", type=int, default=5)
    sp = action(sg, "omega", cmd_semigroup_omega, "lex embedding of a grid into m-fold sums")
    sp.add_argument("--m", type=int, default=2)
    sp.add_argument("--grid", type=int, default=10)

    sk = groups.add_parser("skp").add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = action(sk, "betas", cmd_skp_betas, "values of P_0, P_1, ...")
    sp.add_argument("--count", type=int, default=5)
    sp = action(sk, "keys", cmd_skp_keys, "key polynomials")
    sp.add_argument("--count", type=int, default=5)
    sp.add_argument("--no-polys", action="store_true")
    sp = action(sk, "expand", cmd_skp_expand, "standard expansion of a polynomial in x, y")
    sp.add_argument("--poly", required=True)
    sp = action(sk, "value", cmd_skp_value, "valuation of a polynomial in x, y")
    sp.add_argument("--poly", required=True)
    sp = action(sk, "divisibility", cmd_skp_divisibility, "P_i(x, xz) divisible by x^i")
    sp.add_argument("--max-index", type=int, default=8)
    sp = action(sk, "module", cmd_skp_module, "M_n below a bound")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--bound", required=True)
    sp.add_argument("--bruteforce", action="store_true")
    sp = action(sk, "witness", cmd_skp_witness, "new module generators beta_j - n")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--max-index", type=int, default=10)

    z2 = groups.add_parser("z2").add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = action(z2, "build", cmd_z2_build, "rank-2 example with values in Z^2")
    sp.add_argument("--a-rule", default="2^i")
    sp.add_argument("--b-rule", default="i")
    sp.add_argument("--lambda-rule", default="1")
    sp.add_argument("--depth", type=int, default=6)
    sp.add_argument("--bound", default="12,64")

    cp = groups.add_parser("composite").add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = action(cp, "value", cmd_composite_value, "value of a polynomial in x, y, u, v")
    sp.add_argument("--poly", required=True)
    sp = action(cp, "slice", cmd_composite_slice, "sampled second components at one level")
    sp.add_argument("--level", required=True)
    sp.add_argument("--degree", type=int, default=4)
    sp.add_argument("--bound", default="8")
    sp.add_argument("--samples", type=int, default=60)
    sp.add_argument("--seed", type=int)
    sp = action(cp, "phi-check", cmd_composite_phi_check, "derivative identity for k = 1..K")
    sp.add_argument("--k", type=int, default=4)
    sp.add_argument("--seed", type=int)

    tr = groups.add_parser("transcend").add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = action(tr, "build", cmd_transcend_build, "run the inductive construction")
    sp.add_argument("--depth", type=int, default=6)
    sp.add_argument("--precision", help="truncate the reported series")
    sp.add_argument("--seed", type=int, help="accepted for uniformity; the construction is deterministic")
    sp = action(tr, "spotcheck", cmd_transcend_spotcheck, "random perturbation checks")
    sp.add_argument("--depth", type=int, default=5)
    sp.add_argument("--n", type=int, default=3)
    sp.add_argument("--trials", type=int, default=50)
    sp.add_argument("--seed", type=int)
    sp = action(tr, "spectrum", cmd_transcend_spectrum, "value set of D_n at z_depth")
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--depth", type=int, default=0)

    fp = groups.add_parser("fatpoints").add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = action(fp, "dim", cmd_fatpoints_dim, "dimension of forms vanishing at fat points")
    for flag in ("--d", "--n", "--r"):
        sp.add_argument(flag, type=int, required=True)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--field", default=None, help="q or p:<prime> (default p:2147483647)")
    sp = action(fp, "scan", cmd_fatpoints_scan, "(d, n) grid for r = s^2 points")
    sp.add_argument("--s", type=int, default=4)
    sp.add_argument("--dmax", type=int, default=12)
    sp.add_argument("--nmax", type=int, default=3)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--field", default=None)
    sp.add_argument("--jobs", type=int, default=1)

    co = groups.add_parser("corpus").add_subparsers(dest="action", required=True, parser_class=_Parser)
    sp = action(co, "run", cmd_corpus_run, "re-run stored vectors and diff")
    sp.add_argument("--path", help="corpus JSON (default: bundled corpus)")
    return p


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("handler", "json_out")}
    if "seed" in cfg:
        cfg["seed"] = _seed(args)
    if "precision" in cfg:
        prec = _precision(args)
        cfg["precision"] = None if prec is None else rat_str(prec)
    return cfg


def run(argv) -> tuple:
    """Run one command; returns ``(report, exit_code)`` without printing."""
    try:
        args = build_parser().parse_args(argv)
        cfg = _config(args)
        result, ok, anchor, summary = args.handler(args)
    except UsageError as exc:
        return {"schema": SCHEMA, "error": str(exc)}, 1
    except (ValueError, TypeError, LookupError, ArithmeticError, RuntimeError) as exc:
        return {"schema": SCHEMA, "error": f"{type(exc).__name__}: {exc}"}, 1
    report = {
        "schema": SCHEMA,
        "command": f"{args.group} {args.action}",
        "config": cfg,
        "anchor": anchor,
        "ok": ok,
        "result": result,
        "summary": summary,
    }
    return report, 0 if ok else 2


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    report, code = run(argv)
    summary = report.pop("summary", None)
    text = json.dumps(report, sort_keys=True, indent=1)
    print(text)
    out = None
    if "--json-out" in argv:
        idx = argv.index("--json-out")
        if idx + 1 < len(argv):
            out = argv[idx + 1]
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    if "error" in report:
        print(report["error"], file=sys.stderr)
    elif summary:
        print(f"{report['command']}: {summary}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
