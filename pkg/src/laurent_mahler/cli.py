"""Command-line entry point: ``laurent-mahler <command> ...``.

Exit codes: 0 success, 2 bad configuration, 3 truncated run (partial output
written), 4 internal invariant violation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

from . import cluster as cl
from . import special
from .entropy import EntropyBudgets, compare_entropies, rank2_entropy_exact
from .exprparse import ParseError
from .laurent import format_poly
from .mahler import (SCHEMA_VERSION, SamplerConfig, markoff_recursion_sequence,
                     orbit_mahler_sequence, somos4_recursion_sequence)
from .recurrence import (SingularOrbit, iterate_numeric, iterate_rational, iterate_symbolic,
                         system_from_id)

EXIT_OK, EXIT_CONFIG, EXIT_TRUNCATED, EXIT_INVARIANT = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


# ----------------------------------------------------------------------
# argument helpers
# ----------------------------------------------------------------------
def _int_list(text: str) -> List[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ConfigError(f"expected comma-separated integers, got {text!r}")


def _window(text: Optional[str]):
    if text is None:
        return None
    vals = _int_list(text)
    if len(vals) != 2:
        raise ConfigError("window must be LO,HI")
    return tuple(vals)


def _params(items: Sequence[str], allow_torus: bool) -> Dict[str, object]:
    out: Dict[str, object] = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep or not name:
            raise ConfigError(f"--param expects NAME=VALUE, got {item!r}")
        if value == "torus":
            if not allow_torus:
                raise ConfigError(f"parameter {name} needs a number in this mode")
            out[name] = "torus"
        else:
            try:
                out[name] = int(value)
            except ValueError:
                raise ConfigError(f"parameter {name} must be an integer or 'torus'")
    return out


def _system(text: str):
    try:
        return system_from_id(text)
    except ValueError as exc:  # includes ParseError
        raise ConfigError(str(exc))


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ----------------------------------------------------------------------
# orbit
# ----------------------------------------------------------------------
def _fmt_rational(q) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def cmd_orbit(args) -> int:
    defn = _system(args.system)
    params = _params(args.param, allow_torus=False)
    unknown = set(params) - set(defn.params)
    if unknown:
        raise ConfigError(f"unknown parameters: {', '.join(sorted(unknown))}")
    if args.n < 1:
        raise ConfigError("--n must be positive")
    rows: List[List[str]] = []
    status = EXIT_OK
    note = ""
    if args.mode == "symbolic":
        orbit = iterate_symbolic(defn, args.n, param_values=params)
        for i, p in enumerate(orbit.values, start=1):
            rows.append([str(i), format_poly(p, orbit.variable_names)])
        if orbit.truncated:
            status, note = EXIT_TRUNCATED, orbit.reason
    else:
        if args.init is None:
            raise ConfigError("--init is required for rational and numeric modes")
        missing = [p for p in defn.params if p not in params]
        if missing:
            raise ConfigError(f"parameters need values: {', '.join(missing)}")
        parts = [t.strip() for t in args.init.split(",")]
        if len(parts) != defn.order:
            raise ConfigError(f"{defn.name} needs {defn.order} initial values")
        try:
            if args.mode == "rational":
                init = [Fraction(t) for t in parts]
                values = iterate_rational(defn, init, args.n, params)
                rows = [[str(i), _fmt_rational(v)] for i, v in enumerate(values, start=1)]
            else:
                init = [complex(t.replace(" ", "")) for t in parts]
                orbit = iterate_numeric(defn, init, args.n, [params[p] for p in defn.params])
                for i in range(1, len(orbit) + 1):
                    z = orbit.scalar(i)
                    rows.append([str(i), repr(z.to_complex()), repr(z.log_abs())])
        except ValueError as exc:
            raise ConfigError(str(exc))
        except SingularOrbit as exc:
            status, note = EXIT_TRUNCATED, f"singular orbit: {exc}"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "value", "log_abs"] if args.mode == "numeric" else ["n", "value"])
    w.writerows(rows)
    _emit(buf.getvalue(), args.out)
    if note:
        print(f"truncated: {note}", file=sys.stderr)
    return status


# ----------------------------------------------------------------------
# mahler
# ----------------------------------------------------------------------
def cmd_mahler(args) -> int:
    try:
        cfg = SamplerConfig(mode="lattice" if args.mode == "lattice" else "monte_carlo",
                            sample_count=args.samples, lattice_m=args.lattice_m,
                            rng_seed=args.seed, zero_threshold=args.zero_threshold,
                            block_size=args.block_size,
                            **({"threads": args.threads} if args.threads else {}))
    except ValueError as exc:
        raise ConfigError(str(exc))
    if args.n < 1:
        raise ConfigError("--n must be positive")
    if args.method == "reduced":
        if args.param:
            raise ConfigError("the reduced method takes no parameters")
        if args.system == "markoff":
            seq = markoff_recursion_sequence(args.n, cfg, keep_samples=False)
        elif args.system == "somos4":
            seq = somos4_recursion_sequence(args.n, cfg, keep_samples=False)
        else:
            raise ConfigError("--method reduced is available for markoff and somos4")
    else:
        defn = _system(args.system)
        params = _params(args.param, allow_torus=True)
        unknown = set(params) - set(defn.params)
        if unknown:
            raise ConfigError(f"unknown parameters: {', '.join(sorted(unknown))}")
        seq = orbit_mahler_sequence(defn, args.n, cfg, params, keep_samples=False)
    meta = seq.metadata()
    meta["command"] = ["mahler"] + list(args.argv)
    if args.out:
        _emit(seq.to_csv(), args.out)
        with open(args.out + ".meta.json", "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        sys.stdout.write(seq.to_csv())
        print(json.dumps(meta, sort_keys=True), file=sys.stderr)
    if seq.truncated:
        print(f"truncated: {seq.reason}", file=sys.stderr)
        return EXIT_TRUNCATED
    return EXIT_OK


# ----------------------------------------------------------------------
# entropy
# ----------------------------------------------------------------------
def cmd_entropy(args) -> int:
    defn = _system(args.system)
    budgets = EntropyBudgets(symbolic_n=args.symbolic_n, tropical_n=args.tropical_n,
                             rational_n=args.rational_n, mahler_n=args.mahler_n,
                             mahler_window=_window(args.window), samples=args.samples,
                             seed=args.seed, threads=args.threads)
    report = compare_entropies(defn, budgets)
    text = report.to_json() + "\n"
    if args.out:
        _emit(text, args.out)
    if args.format == "json":
        if not args.out:
            sys.stdout.write(text)
    else:
        print(report.table())
    if report.ordering_ok is False:
        print("ordering violated: Mahler fit exceeds Diophantine fit", file=sys.stderr)
        return EXIT_INVARIANT
    if report.errors:
        for k, v in report.errors.items():
            print(f"{k} estimator failed: {v}", file=sys.stderr)
        return EXIT_TRUNCATED
    return EXIT_OK


# ----------------------------------------------------------------------
# closed forms
# ----------------------------------------------------------------------
def _positive_int(arg: str, name: str, minimum: int = 1) -> int:
    if not arg.isdigit() or int(arg) < minimum:
        raise ConfigError(f"{name} needs an integer argument >= {minimum}")
    return int(arg)


CLOSED_FORMS: Dict[str, Callable[[str], float]] = {
    "smyth": lambda a: special.smyth_constant(),
    "mx4": lambda a: special.mx4_closed(_positive_int(a, "mx4")),
    "mx5": lambda a: special.mx5_closed(_positive_int(a, "mx5")),
    "cstar": lambda a: special.cstar_constant(_positive_int(a, "cstar", 25)),
    "rank2-entropy": lambda a: rank2_entropy_exact(_positive_int(a, "rank2-entropy")),
    "markoff-x5": lambda a: special.markoff_x5_closed(),
    "somos-x6": lambda a: special.somos_x6_closed(),
}
CLOSED_FORM_USAGE = ("smyth", "mx4:r", "mx5:r", "cstar:M", "rank2-entropy:r", "markoff-x5", "somos-x6")
_TAKES_ARGUMENT = {"mx4", "mx5", "cstar", "rank2-entropy"}


def closed_form_value(name: str) -> float:
    base, sep, arg = name.partition(":")
    if base not in CLOSED_FORMS or (base in _TAKES_ARGUMENT) != bool(sep):
        raise ConfigError(f"unknown closed form {name!r}; valid names: {', '.join(CLOSED_FORM_USAGE)}")
    return CLOSED_FORMS[base](arg)


def cmd_closed_form(args) -> int:
    print(format(closed_form_value(args.name), "#.12g"))
    return EXIT_OK


# ----------------------------------------------------------------------
# cluster
# ----------------------------------------------------------------------
def _load_seed(text: str) -> cl.Seed:
    if text.endswith(".json"):
        try:
            with open(text) as fh:
                return cl.seed_from_json(json.load(fh))
        except OSError as exc:
            raise ConfigError(f"cannot read seed file: {exc}")
        except (KeyError, ValueError, ParseError) as exc:
            raise ConfigError(f"bad seed file {text}: {exc}")
    try:
        return cl.builtin_seed(text)
    except ValueError as exc:
        raise ConfigError(str(exc))


def cmd_cluster(args) -> int:
    seed = _load_seed(args.seed)
    out: dict = {"schema_version": SCHEMA_VERSION, "initial": cl.seed_to_json(seed)}
    status = EXIT_OK
    if args.sequence is not None:
        try:
            seq = cl.MutationSequence(_int_list(args.sequence),
                                      _int_list(args.permutation) if args.permutation else None)
            seq.validate(seed.n)
        except (ValueError, IndexError) as exc:
            raise ConfigError(str(exc))
        out["sequence"] = list(seq.indices)
        out["permutation"] = list(seq.permutation) if seq.permutation else None
        if args.check_period:
            check = cl.check_period(seed, seq)
            out["final"] = cl.seed_to_json(check.final)
            out["period"] = {"periodic": check.periodic, "exact": check.exact,
                             "relabelling": list(check.relabelling) if check.relabelling else None}
        else:
            out["final"] = cl.seed_to_json(cl.apply_sequence(seed, seq))
    elif args.check_period:
        raise ConfigError("--check-period needs --sequence")
    if args.explore is not None:
        if args.explore < 1:
            raise ConfigError("--explore needs a depth >= 1")
        rep = cl.explore_mutation_tree(seed, args.explore, max_seeds=args.max_seeds)
        out["tree"] = {"max_degrees": rep.max_degrees, "seeds_per_depth": rep.seeds_per_depth,
                       "truncated": rep.truncated, "reason": rep.reason}
        if rep.truncated:
            status = EXIT_TRUNCATED
    _emit(json.dumps(out, indent=2) + "\n", args.out)
    if "period" in out:
        verdict = "periodic" if out["period"]["periodic"] else "not periodic"
        how = "exactly" if out["period"]["exact"] else (
            f"up to relabelling {out['period']['relabelling']}" if out["period"]["periodic"] else "")
        print(f"sequence {args.sequence}: {verdict} {how}".rstrip(), file=sys.stderr)
    return status


# ----------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------
def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="laurent-mahler",
                                     description="Laurent recurrences, cluster mutations and Mahler measures.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("orbit", help="iterate a recurrence symbolically, exactly or numerically")
    p.add_argument("--system", required=True, help="built-in name (rank2:r, markoff, ...) or recurrence text")
    p.add_argument("--mode", choices=("symbolic", "rational", "numeric"), default="symbolic")
    p.add_argument("--init", help="comma-separated initial values (rational or complex)")
    p.add_argument("--param", action="append", default=[], help="NAME=INT, repeatable")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--out")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("mahler", help="Mahler-measure sequence S_n of a recurrence")
    p.add_argument("--system", required=True)
    p.add_argument("--method", choices=("direct", "reduced"), default="direct")
    p.add_argument("--mode", choices=("mc", "lattice"), default="mc")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--lattice-m", type=int, default=100)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, help="worker threads (default from LAURENT_MAHLER_THREADS)")
    p.add_argument("--zero-threshold", type=float, default=1e-300)
    p.add_argument("--block-size", type=int, default=2000)
    p.add_argument("--param", action="append", default=[], help="NAME=torus or NAME=INT")
    p.add_argument("--out", help="CSV path; metadata goes to PATH.meta.json")
    p.set_defaults(func=cmd_mahler)

    p = sub.add_parser("entropy", help="algebraic, Diophantine and Mahler entropy report")
    p.add_argument("--system", required=True)
    p.add_argument("--format", choices=("table", "json"), default="table")
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int)
    p.add_argument("--symbolic-n", type=int)
    p.add_argument("--tropical-n", type=int, default=30)
    p.add_argument("--rational-n", type=int, default=30)
    p.add_argument("--mahler-n", type=int)
    p.add_argument("--window", help="Mahler fit window LO,HI")
    p.set_defaults(func=cmd_entropy)

    p = sub.add_parser("closed-form", help="print a closed-form constant to 12 significant figures")
    p.add_argument("name", help=", ".join(CLOSED_FORM_USAGE))
    p.set_defaults(func=cmd_closed_form)

    p = sub.add_parser("cluster", help="mutate a seed, check periods, explore the mutation tree")
    p.add_argument("--seed", required=True, help="seed JSON file or a2, rank2:r, markoff, somos4")
    p.add_argument("--sequence", help="1-based mutation indices, e.g. 1,2,1")
    p.add_argument("--permutation", help="1-based relabelling applied after the sequence")
    p.add_argument("--check-period", action="store_true")
    p.add_argument("--explore", type=int, metavar="DEPTH")
    p.add_argument("--max-seeds", type=int, default=200_000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_cluster)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    args.argv = argv[1:]
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (AssertionError, ArithmeticError) as exc:
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
