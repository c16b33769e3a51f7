"""Command line entry point: ``dixtrace <group> <action> [options]``.

Exit codes: 0 success, 1 a checked property failed, 2 bad configuration,
3 numerical failure.
"""
import argparse
import json
import sys
import warnings

from .errors import ConfigError, DomainError, NumericError, UnsupportedWeightError


def _weight_arg(args):
    if getattr(args, "psi", None):
        try:
            return json.loads(args.psi)
        except json.JSONDecodeError:
            return args.psi          # catalog name
    if getattr(args, "family", None):
        return {"family": args.family, "n": args.n, "beta": args.beta}
    return None


def _config(args, kind, **fields):
    from .harness import ExperimentConfig
    base = {}
    if args.config:
        base = ExperimentConfig.load(args.config).to_dict()
    base["kind"] = kind
    w = _weight_arg(args)
    if w is not None:
        base["weight"] = w
    for k, v in fields.items():
        if v is not None:
            base[k] = v
    for k in ("csv", "json", "seed"):
        v = getattr(args, k, None)
        if v is not None:
            base[k] = v
    return ExperimentConfig.from_dict(base)


def _print_json(obj):
    from .harness import _clean
    print(json.dumps(_clean(obj), indent=2, sort_keys=True))


def cmd_psi_inspect(args):
    from .harness import run
    rep = run(_config(args, "psi_report"))
    print(rep.results["table"])
    for k, v in rep.results["equality_criteria"].items():
        print(f"{k}: {v['verdict']}")
    return 0


def cmd_lorentz_report(args):
    from .harness import run
    rep = run(_config(args, "lorentz_report", target=args.profile, scale=args.scale))
    _print_json(rep.results)
    return 0 if rep.verdicts["sandwich"] == "holds" else 1


def cmd_trace_compare(args):
    from .harness import run
    grid = {"kind": "exponent", "min": args.rmin, "max": args.rmax, "points": args.points}
    rep = run(_config(args, "trace_compare", target=args.profile, scale=args.scale, grid=grid))
    r = rep.results
    _print_json({"measurable": r["measurable"], "value": r["value"], "gaps": r["gaps"],
                 "verdicts": rep.verdicts})
    return 0


def cmd_karamata_check(args):
    from .harness import run
    grid = {"kind": "direct", "min": args.rmin, "max": args.rmax, "points": args.points}
    rep = run(_config(args, "karamata", target=args.case, grid=grid))
    _print_json({"agree": rep.results["agree"], "gaps": rep.gaps, "verdicts": rep.verdicts})
    return 0 if rep.results["agree"] else 1


def cmd_weyl_run(args):
    from .harness import run
    rep = run(_config(args, "weyl_compare", target=args.symbol, L=args.L, N=args.N))
    r = rep.results
    _print_json({k: r[k] for k in ("operator_side", "symbol_side", "zeta_side", "gap")})
    return 0


def cmd_suite_all(args):
    from .harness import run_suite
    summary = run_suite(args.out, seed=args.seed or 0)
    _print_json(summary)
    return 0


def cmd_catalog(args):
    from .harness import catalog
    _print_json(catalog())
    return 0


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config JSON; explicit flags override it")
    common.add_argument("--csv", help="write tabular samples here")
    common.add_argument("--json", help="write the run report here")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--psi", help="weight as JSON or a catalog name")

    p = argparse.ArgumentParser(prog="dixtrace", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="group", required=True)

    psi = sub.add_parser("psi").add_subparsers(dest="action", required=True)
    a = psi.add_parser("inspect", parents=[common], help="condition report for a weight")
    a.add_argument("--family", choices=("iterlog", "exppow"))
    a.add_argument("--n", type=int, default=1)
    a.add_argument("--beta", type=float, default=1.0)
    a.set_defaults(func=cmd_psi_inspect)

    lor = sub.add_parser("lorentz").add_subparsers(dest="action", required=True)
    a = lor.add_parser("report", parents=[common], help="extrapolation norms of a profile")
    a.add_argument("--profile", help="catalog id or a knot,value CSV")
    a.add_argument("--scale", type=float)
    a.set_defaults(func=cmd_lorentz_report)

    tr = sub.add_parser("trace").add_subparsers(dest="action", required=True)
    a = tr.add_parser("compare", parents=[common], help="partial sum, cutoff, zeta and heat functionals")
    a.add_argument("--profile")
    a.add_argument("--scale", type=float)
    a.add_argument("--rmin", type=float, default=2.0)
    a.add_argument("--rmax", type=float, default=30.0)
    a.add_argument("--points", type=int, default=32)
    a.set_defaults(func=cmd_trace_compare)

    ka = sub.add_parser("karamata").add_subparsers(dest="action", required=True)
    a = ka.add_parser("check", parents=[common], help="Laplace-Stieltjes against direct asymptotics")
    a.add_argument("--case")
    a.add_argument("--rmin", type=float, default=1e-2)
    a.add_argument("--rmax", type=float, default=1e6)
    a.add_argument("--points", type=int, default=48)
    a.set_defaults(func=cmd_karamata_check)

    we = sub.add_parser("weyl").add_subparsers(dest="action", required=True)
    a = we.add_parser("run", parents=[common], help="quantize a symbol and compare Dixmier values")
    a.add_argument("--symbol")
    a.add_argument("--L", type=float)
    a.add_argument("--N", type=int)
    a.set_defaults(func=cmd_weyl_run)

    su = sub.add_parser("suite").add_subparsers(dest="action", required=True)
    a = su.add_parser("all", parents=[common], help="run the standard battery into a directory")
    a.add_argument("--out", default="dixtrace_out")
    a.set_defaults(func=cmd_suite_all)

    a = sub.add_parser("catalog", help="list built-in weights, profiles, symbols and Karamata cases")
    a.set_defaults(func=cmd_catalog)
    return p


def main(argv=None):
    from ._kernels import set_threads_from_env
    args = build_parser().parse_args(argv)
    set_threads_from_env()
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return args.func(args)
    except (ConfigError, DomainError, UnsupportedWeightError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, FloatingPointError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
