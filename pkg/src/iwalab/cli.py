"""Command-line front end.

Exit codes: 0 certified result, 1 input error, 2 undetermined, 3 violated
identity or golden-file mismatch.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import experiments
from .experiments import EXAMPLES, SCHEMA, ExampleConfig, default_precision, invariant_summary
from .forms import DescriptorError, EigenformDescriptor, NotOrdinaryError, branch_data, is_prime, load_descriptor
from .iwasawa import (
    e_ell,
    e_ell_oracle,
    euler_factor,
    lambda_transfer_check,
    level_raising_scan,
    primes_above,
)
from .modsym import cache_file, load_or_build
from .padic import UNDETERMINED
from .plfun import pl_function, set_cache_dir

EXIT_OK, EXIT_INPUT, EXIT_UNDETERMINED, EXIT_VIOLATION = 0, 1, 2, 3


class InputError(Exception):
    pass


def dumps(obj) -> str:
    """Canonical JSON text: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def resolve_form(name: str) -> EigenformDescriptor:
    """A descriptor from a file path, or from the bundled data by name."""
    path = Path(name)
    if path.is_file():
        return load_descriptor(path)
    bundled = experiments.data_path(name if name.endswith(".toml") else name + ".toml")
    if bundled.is_file():
        return load_descriptor(bundled)
    raise InputError(f"no descriptor file {name!r} (and no bundled form of that name)")


def _precision(args) -> tuple[int, int]:
    n, M = default_precision(args.p)
    return (args.n if args.n is not None else n), (args.M if args.M is not None else M)


def _check_p_i(args) -> None:
    if args.p == 2 or not is_prime(args.p):
        raise InputError("--p must be an odd prime")
    if not 0 <= args.i <= args.p - 2:
        raise InputError("--i must satisfy 0 <= i <= p-2")


# -- commands ----------------------------------------------------------------------------

def cmd_lfun(args) -> tuple[dict, int]:
    _check_p_i(args)
    f = resolve_form(args.form)
    n, M = _precision(args)
    L = pl_function(f, args.p, args.i, n, M, route=args.route, sigma=args.sigma)
    L_next = pl_function(f, args.p, args.i, n + 1, M, route=args.route, sigma=args.sigma)
    same = (L.invariants.mu, L.invariants.lam) == (L_next.invariants.mu, L_next.invariants.lam)
    stable = L.invariants.certified and L_next.invariants.certified and same
    out = L.to_dict()
    out.update({"schema": SCHEMA, "command": "lfun", "stable_at_next_level": stable,
                "next_level": {"n": n + 1, "mu": L_next.invariants.mu, "lambda": L_next.invariants.lam,
                               "certified": L_next.invariants.certified}})
    if not stable:
        out["certified"] = False
    return out, EXIT_OK if stable else EXIT_UNDETERMINED


def cmd_transfer(args) -> tuple[dict, int]:
    _check_p_i(args)
    f1, f2 = resolve_form(args.f1), resolve_form(args.f2)
    n, M = _precision(args)
    rep = lambda_transfer_check(f1, f2, args.p, args.i, n, M)
    out = rep.to_dict()
    out.update({"schema": SCHEMA, "command": "transfer", "n": n, "M": M})
    if rep.balanced is True:
        return out, EXIT_OK
    if rep.balanced is False:
        return out, EXIT_VIOLATION
    return out, EXIT_UNDETERMINED


def cmd_raise(args) -> tuple[dict, int]:
    f = resolve_form(args.form)
    hits = level_raising_scan(f, args.p, args.lmax)
    return {"schema": SCHEMA, "command": "raise", "form_id": f.name, "p": args.p, "lmax": args.lmax,
            "hits": [h.to_dict() for h in hits]}, EXIT_OK


def cmd_euler(args) -> tuple[dict, int]:
    _check_p_i(args)
    f = resolve_form(args.form)
    if args.l is None:
        raise InputError("euler needs --l")
    if args.l == args.p:
        raise InputError("--l must differ from --p")
    b = branch_data(f, args.p)
    ef = euler_factor(b, args.l)
    places = primes_above(args.l, args.p)
    e_an = e_ell(b, args.l, args.i)
    out = {
        "schema": SCHEMA, "command": "euler", "form_id": f.name, "p": args.p, "i": args.i, "l": args.l,
        "coefficients": [str(c) for c in ef.coefficients()], "places": places.count,
        "e": e_an, "e_literal": e_ell(b, args.l, args.i, variant="literal"),
        "e_oracle": e_ell_oracle(ef, args.p, args.i),
    }
    return out, EXIT_UNDETERMINED if e_an == UNDETERMINED else EXIT_OK


def _run_example(name: str, n_offset: int) -> str:
    return dumps(EXAMPLES[name](ExampleConfig(n_offset=n_offset)))


def cmd_repro(args) -> tuple[dict, int]:
    names = list(EXAMPLES) if args.example in (None, "all") else [args.example]
    for name in names:
        if name not in EXAMPLES:
            raise InputError(f"unknown example {name!r}; choose from {sorted(EXAMPLES)}")
    if args.jobs > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            texts = list(pool.map(_run_example, names, [args.n_offset] * len(names)))
    else:
        texts = [_run_example(name, args.n_offset) for name in names]
    golden_dir = Path(args.golden_dir) if args.golden_dir else experiments.data_path("golden")
    results, code = {}, EXIT_OK
    for name, text in zip(names, texts):
        gpath = golden_dir / f"{name}.json"
        if args.out:
            Path(args.out).mkdir(parents=True, exist_ok=True)
            (Path(args.out) / f"{name}.json").write_text(text)
        if args.update_golden:
            if args.n_offset:
                raise InputError("--update-golden requires --n-offset 0")
            gpath.parent.mkdir(parents=True, exist_ok=True)
            gpath.write_text(text)
            results[name] = "written"
            continue
        if not gpath.is_file():
            results[name] = "missing-golden"
            code = EXIT_VIOLATION
            continue
        golden = gpath.read_text()
        if args.n_offset:
            ok = invariant_summary(json.loads(golden)) == invariant_summary(json.loads(text))
        else:
            ok = golden == text
        results[name] = "match" if ok else "mismatch"
        if not ok:
            code = EXIT_VIOLATION
    mode = "invariants" if args.n_offset else "bytes"
    return {"schema": SCHEMA, "command": "repro", "compare": mode, "n_offset": args.n_offset,
            "results": results}, code


def cmd_cache(args) -> tuple[dict, int]:
    if not args.cache_dir:
        raise InputError("cache needs --cache-dir")
    targets: list[tuple[int, int]] = []
    for name in args.form or []:
        f = resolve_form(name)
        targets.append((f.N, f.k))
    for text in args.space or []:
        try:
            N, k = (int(x) for x in text.split(":"))
        except ValueError:
            raise InputError(f"--space expects N:k, got {text!r}") from None
        targets.append((N, k))
    if not targets:
        raise InputError("cache needs --form or --space")
    entries = []
    for N, k in targets:
        space, status = load_or_build(N, k, args.cache_dir)
        entries.append({"N": N, "k": k, "status": status, "dimension": space.dimension,
                        "file": cache_file(args.cache_dir, N, k).name})
    return {"schema": SCHEMA, "command": "cache", "entries": entries}, EXIT_OK


COMMANDS = {
    "lfun": cmd_lfun,
    "transfer": cmd_transfer,
    "raise": cmd_raise,
    "euler": cmd_euler,
    "repro": cmd_repro,
    "cache": cmd_cache,
}


# -- argument parsing ----------------------------------------------------------------------

def _sigma(text: str) -> tuple[int, ...]:
    if not text:
        return ()
    return tuple(int(x) for x in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report here (repro: directory for fresh reports)")
    common.add_argument("--cache-dir", help="directory for cached modular-symbol presentations")
    common.add_argument("--seed", type=int, default=0, help="seed for any randomized step")

    prec = argparse.ArgumentParser(add_help=False)
    prec.add_argument("--p", type=int, required=True)
    prec.add_argument("--i", type=int, default=0)
    prec.add_argument("--n", type=int, help="level: series are computed modulo (1+T)^(p^(n-1)) - 1")
    prec.add_argument("--M", type=int, help="p-adic precision of coefficients")

    parser = argparse.ArgumentParser(prog="iwalab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lfun", parents=[common, prec], help="p-adic L-function and its invariants")
    p.add_argument("--form", required=True)
    p.add_argument("--sigma", type=_sigma, default=(), help="comma-separated primes to remove")
    p.add_argument("--route", default="auto", choices=["auto", "native", "stabilize", "level_np"])

    p = sub.add_parser("transfer", parents=[common, prec], help="lambda-transfer check for a congruent pair")
    p.add_argument("--f1", required=True)
    p.add_argument("--f2", required=True)

    p = sub.add_parser("raise", parents=[common], help="scan for level-raising primes")
    p.add_argument("--form", required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--lmax", type=int, default=1500)

    p = sub.add_parser("euler", parents=[common, prec], help="lambda of one Euler factor")
    p.add_argument("--form", required=True)
    p.add_argument("--l", type=int)

    p = sub.add_parser("repro", parents=[common], help="recompute the worked examples and diff with golden files")
    p.add_argument("--example", default="all")
    p.add_argument("--n-offset", type=int, default=0, help="raise n by this much; compares invariants only")
    p.add_argument("--update-golden", action="store_true")
    p.add_argument("--golden-dir")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("cache", parents=[common], help="build or verify cached symbol spaces")
    p.add_argument("--form", action="append")
    p.add_argument("--space", action="append", help="N:k")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    random.seed(args.seed)
    if args.cache_dir:
        set_cache_dir(args.cache_dir)
    try:
        report, code = COMMANDS[args.command](args)
    except (InputError, DescriptorError, NotOrdinaryError, FileNotFoundError, ValueError) as exc:
        print(f"iwalab {args.command}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = dumps(report)
    if args.out and args.command != "repro":
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
