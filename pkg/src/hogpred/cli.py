"""Command-line interface. Every analysis prints one JSON report; exit status encodes the verdict.

Exit status: 0 certified/pass, 1 refuted, 2 inconclusive (fuel or truncation), 3 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import __version__, kernels
from .henceforth import henceforth, up_to_box_check
from .law import XTCL_RANK, LawSyntaxError, MissingRank, flatness_check, get_law, simplicity_check, validate_format
from .predicates import Predicate, invariant_check, logical_check
from .semantics import DEFAULT_FUEL, down, reduce_trace
from .syntax import Universe, close_universe, parse_term, show_term
from .types import parse_type
from .wtcheck import INCONCLUSIVE, PASS, respects_weak_check, sn_theorem_report

EXIT_OK, EXIT_REFUTED, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3
SCHEMA_VERSION = 1
# closing a universe under labelled results grows quickly with the size bound
CLOSED_SIZE_BOUND = 5


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def default_fuel() -> int:
    raw = os.environ.get("HOGPRED_FUEL")
    if raw is None:
        return DEFAULT_FUEL
    try:
        val = int(raw)
    except ValueError:
        raise UsageError(f"HOGPRED_FUEL must be a positive integer, got {raw!r}") from None
    if val <= 0:
        raise UsageError("HOGPRED_FUEL must be positive")
    return val


def _positive(s: str) -> int:
    v = int(s)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _common(p, size_default=7, universe=True):
    p.add_argument("--law", default="xtcl-cbn", help="built-in law name or rule file")
    p.add_argument("--fuel", type=_positive, default=None, help="step budget (default 10000 or $HOGPRED_FUEL)")
    p.add_argument("--seed", type=int, default=None, help="recorded in the report; analyses are deterministic")
    p.add_argument("-o", "--output", default=None, help="write the JSON report here instead of stdout")
    if universe:
        p.add_argument("--type-bound", type=_positive, default=4)
        p.add_argument("--size-bound", type=_positive, default=size_default)
        p.add_argument("--closure-fuel", type=_positive, default=50, help="rounds of universe closure")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hogpred", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"hogpred {__version__}")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("enumerate", help="enumerate (and optionally close) a term universe")
    _common(p)
    p.add_argument("--close", action="store_true", help="close under reducts and labelled results")
    p.add_argument("--list", metavar="TYPE", default=None, help="list the members of this type")

    p = sub.add_parser("trace", help="print the reduction trace of a term")
    _common(p, universe=False)
    p.add_argument("--term", required=True)

    for name, hlp in [("check-invariant", "is P an S-relative invariant"), ("check-logical", "is P logical")]:
        p = sub.add_parser(name, help=hlp)
        _common(p, CLOSED_SIZE_BOUND)
        p.add_argument("--pred", required=True, help="predicate JSON file")
        if name == "check-invariant":
            p.add_argument("--rel", default=None, help="relative predicate S (default: full)")

    p = sub.add_parser("henceforth", help="logical refinement of a predicate")
    _common(p, CLOSED_SIZE_BOUND)
    p.add_argument("--pred", required=True)

    p = sub.add_parser("certify-sn", help="termination via induction up to henceforth")
    _common(p, CLOSED_SIZE_BOUND)
    p.add_argument("--rank", default=None, help="rank JSON file (default: app 0, others 1)")

    p = sub.add_parser("validate", help="check the rule format of a law")
    _common(p, universe=False)

    p = sub.add_parser("flatness", help="relative flatness under a rank assignment")
    _common(p, universe=False)
    p.add_argument("--rank", default=None)

    p = sub.add_parser("simplicity", help="simplicity of a law")
    _common(p, universe=False)

    p = sub.add_parser("weak-respect", help="does the law respect weak transitions")
    _common(p, CLOSED_SIZE_BOUND)
    p.add_argument("--n-max", type=int, default=3)
    p.add_argument("--k-max", type=_positive, default=None)

    p = sub.add_parser("sn-report", help="all conditions of the strong-normalization theorem")
    _common(p, CLOSED_SIZE_BOUND)
    p.add_argument("--rank", default=None)
    p.add_argument("--n-max", type=int, default=3)
    p.add_argument("--k-max", type=_positive, default=None)

    p = sub.add_parser("stlc", help="simply typed lambda calculus")
    ssub = p.add_subparsers(dest="stlc_command", parser_class=_Parser)
    ssub.required = True
    for name in ("certify-safety", "certify-sn"):
        q = ssub.add_parser(name)
        q.add_argument("--type-bound", type=_positive, default=3)
        q.add_argument("--size-bound", type=_positive, default=6)
        q.add_argument("--max-context", type=int, default=2)
        q.add_argument("--fuel", type=_positive, default=None)
        q.add_argument("--seed", type=int, default=None)
        q.add_argument("-o", "--output", default=None)
    q = ssub.add_parser("trace")
    q.add_argument("--term", required=True)
    q.add_argument("--fuel", type=_positive, default=None)
    q.add_argument("--seed", type=int, default=None)
    return ap


# -- helpers -------------------------------------------------------------------------


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None


def _law(args):
    try:
        return get_law(args.law)
    except (KeyError, OSError, LawSyntaxError, ValueError) as exc:
        raise UsageError(f"cannot load law {args.law!r}: {exc}") from None


def _rank(args) -> dict:
    if getattr(args, "rank", None) is None:
        return dict(XTCL_RANK)
    data = _load_json(args.rank)
    if not isinstance(data, dict) or not all(isinstance(v, int) and v >= 0 for v in data.values()):
        raise UsageError("rank file must map operator names to natural numbers")
    return data


def _universe(args, law, close: bool = True) -> Universe:
    u = Universe.build(args.size_bound, args.type_bound, law.spec.signature)
    if close:
        close_universe(u, law.gamma, fuel=args.closure_fuel)
    return u.freeze()


def _pred(u: Universe, path: str, law) -> Predicate:
    try:
        return Predicate.from_json(u, _load_json(path), law.spec.signature)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"bad predicate file {path}: {exc}") from None


def _config(args, fuel) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("output",)}
    cfg["fuel"] = fuel
    cfg["kernel_backend"] = kernels.BACKEND
    return cfg


def _emit(args, command: str, fuel, result: dict, started: float, universe_stats=None) -> None:
    report = {
        "tool": "hogpred",
        "version": __version__,
        "schema": SCHEMA_VERSION,
        "command": command,
        "config": _config(args, fuel),
        "result": result,
        "timing": {"seconds": round(time.perf_counter() - started, 3)},
    }
    if universe_stats is not None:
        report["universe"] = universe_stats
    text = json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _closure_exit(u: Universe, status: int) -> int:
    if status == EXIT_OK and not u.is_closed:
        return EXIT_INCONCLUSIVE
    return status


# -- commands ----------------------------------------------------------------------------


def cmd_enumerate(args, fuel, t0):
    law = _law(args)
    u = _universe(args, law, close=args.close)
    res = {"stats": u.stats()}
    if args.list:
        try:
            ty = parse_type(args.list)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        res["members"] = [show_term(t) for t in u.slice(ty)]
    _emit(args, "enumerate", fuel, res, t0)
    return EXIT_OK


def cmd_trace(args, fuel, t0):
    law = _law(args)
    if law.powerset:
        raise UsageError("trace needs a deterministic law")
    try:
        t = parse_term(args.term, law.spec.signature)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    tr = reduce_trace(law, t, fuel)
    for x in tr.terms:
        print(show_term(x))
    marker = {"done": "✓", "fun": "fun", "fuel": "FUEL", "stuck": "STUCK"}[tr.outcome]
    print(marker)
    return {"done": EXIT_OK, "fun": EXIT_OK, "fuel": EXIT_INCONCLUSIVE, "stuck": EXIT_REFUTED}[tr.outcome]


def cmd_check(args, fuel, t0):
    law = _law(args)
    u = _universe(args, law)
    P = _pred(u, args.pred, law)
    if args.command == "check-logical":
        rep = logical_check(law, u, P)
    else:
        S = _pred(u, args.rel, law) if args.rel else Predicate.full(u)
        rep = invariant_check(law, u, S, P)
    _emit(args, args.command, fuel, rep.to_json(), t0, u.stats())
    return _closure_exit(u, EXIT_OK if rep.holds else EXIT_REFUTED)


def cmd_henceforth(args, fuel, t0):
    law = _law(args)
    u = _universe(args, law)
    P = _pred(u, args.pred, law)
    h = henceforth(law, u, P)
    _emit(args, "henceforth", fuel, h.to_json(), t0, u.stats())
    return _closure_exit(u, EXIT_OK)


def cmd_certify_sn(args, fuel, t0):
    law = _law(args)
    if law.powerset:
        raise UsageError("certify-sn needs a deterministic law")
    u = _universe(args, law)
    D = down(law, u, fuel)
    try:
        rep = up_to_box_check(law, _rank(args), u, D)
    except MissingRank as exc:
        raise UsageError(str(exc)) from None
    rep["fuel"] = fuel
    rep["terminating_members"] = D.count()
    confirmed = rep.get("conclusion_confirmed_on_universe", False)
    rep["verdict"] = "SN" if rep["certified"] and confirmed else "NOT certified"
    _emit(args, "certify-sn", fuel, rep, t0, u.stats())
    return _closure_exit(u, EXIT_OK if rep["verdict"] == "SN" else EXIT_REFUTED)


def cmd_validate(args, fuel, t0):
    law = get_law_unchecked(args)
    rep = validate_format(law)
    _emit(args, "validate", fuel, rep.to_json(), t0)
    return EXIT_OK if rep.accepted else EXIT_REFUTED


def get_law_unchecked(args):
    from .law import load_law

    try:
        return load_law(args.law)
    except (KeyError, OSError, LawSyntaxError) as exc:
        raise UsageError(f"cannot load law {args.law!r}: {exc}") from None


def cmd_flatness(args, fuel, t0):
    law = _law(args)
    try:
        rep = flatness_check(law.spec, _rank(args))
    except MissingRank as exc:
        raise UsageError(str(exc)) from None
    _emit(args, "flatness", fuel, rep.to_json(), t0)
    return EXIT_OK if rep.accepted else EXIT_REFUTED


def cmd_simplicity(args, fuel, t0):
    law = _law(args)
    rep = simplicity_check(law.spec)
    _emit(args, "simplicity", fuel, rep.to_json(), t0)
    return EXIT_OK if rep.accepted else EXIT_REFUTED


def cmd_weak(args, fuel, t0):
    law = _law(args)
    if law.powerset:
        raise UsageError("weak-respect needs a deterministic law")
    u = _universe(args, law)
    rep = respects_weak_check(law, u, args.n_max, args.k_max or fuel)
    _emit(args, "weak-respect", fuel, rep.to_json(), t0, u.stats())
    code = {PASS: EXIT_OK, INCONCLUSIVE: EXIT_INCONCLUSIVE}.get(rep.verdict, EXIT_REFUTED)
    return _closure_exit(u, code)


def cmd_sn_report(args, fuel, t0):
    law = _law(args)
    u = _universe(args, law)
    try:
        rep = sn_theorem_report(law, _rank(args), u, fuel, args.n_max, args.k_max)
    except MissingRank as exc:
        raise UsageError(str(exc)) from None
    _emit(args, "sn-report", fuel, rep, t0)
    if rep["certified"]:
        return _closure_exit(u, EXIT_OK)
    return EXIT_INCONCLUSIVE if rep["verdict"] in ("inconclusive", "not applicable") else EXIT_REFUTED


def cmd_stlc(args, fuel, t0):
    from . import stlc

    if args.stlc_command == "trace":
        try:
            t = stlc.parse_lterm(args.term)
            stlc.typecheck((), t)
        except (ValueError, TypeError) as exc:
            raise UsageError(str(exc)) from None
        terms, outcome = stlc.ltrace(t, fuel)
        for x in terms:
            print(stlc.show_lterm(x))
        print({"done": "✓", "fun": "fun", "fuel": "FUEL", "stuck": "STUCK"}[outcome])
        return {"done": EXIT_OK, "fun": EXIT_OK, "fuel": EXIT_INCONCLUSIVE, "stuck": EXIT_REFUTED}[outcome]
    u = stlc.universe(args.size_bound, args.type_bound, args.max_context)
    if args.stlc_command == "certify-safety":
        P = stlc.safe_pred(u, fuel)
    else:
        P = stlc.terminates_pred(u, fuel)
    rep = stlc.up_to_black_check(u, P)
    ok = rep["certified"] and rep.get("conclusion_confirmed_on_universe", False)
    rep["verdict"] = ("type safe" if args.stlc_command == "certify-safety" else "SN") if ok else "NOT certified"
    _emit(args, f"stlc {args.stlc_command}", fuel, rep, t0)
    if not u.closed and ok:
        return EXIT_INCONCLUSIVE
    return EXIT_OK if ok else EXIT_REFUTED


COMMANDS = {
    "enumerate": cmd_enumerate,
    "trace": cmd_trace,
    "check-invariant": cmd_check,
    "check-logical": cmd_check,
    "henceforth": cmd_henceforth,
    "certify-sn": cmd_certify_sn,
    "validate": cmd_validate,
    "flatness": cmd_flatness,
    "simplicity": cmd_simplicity,
    "weak-respect": cmd_weak,
    "sn-report": cmd_sn_report,
    "stlc": cmd_stlc,
}


def main(argv=None) -> int:
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        fuel = args.fuel if getattr(args, "fuel", None) else default_fuel()
        return COMMANDS[args.command](args, fuel, t0)
    except UsageError as exc:
        print(f"hogpred: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
