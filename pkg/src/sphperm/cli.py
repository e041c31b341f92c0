"""Command-line front end: ``sphperm sample | enumerate | kernel | verify``.

CSV and sample files are the machine interface.  Human-readable summaries go
to standard output only when a data file is written elsewhere.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import math
import os
import sys

import numpy as np

from . import __version__, suites
from .exact import count_table, extension_counts, is_exact, to_param, DEFAULT_PRECISION
from .perm import Metric, Permutation
from .samplers import Ewens, HammingAlpha, Mallows, Uniform, make_rng, sample_batch, sample_sphere_uniform
from .verify import (REPORT_HEADER, Regime, alternating_regime, convergence_experiment, ewens_regime,
                     linear_regime, mallows_regime)

SEED_ENV = "SPHPERM_SEED"
CHUNK = 100_000


class CliError(Exception):
    pass


def resolve_seed(seed: int | None) -> int:
    """Explicit flag, then the ``SPHPERM_SEED`` environment variable, then fresh entropy."""
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise CliError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return int(np.random.SeedSequence().entropy % (1 << 63))


def int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def metric_arg(text: str) -> Metric:
    try:
        return Metric.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


@contextlib.contextmanager
def open_output(path: str | None):
    if path is None or path == "-":
        yield sys.stdout
        return
    try:
        fh = open(path, "w", newline="")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror}") from None
    with fh:
        yield fh


def _param(name: str, text: str | None, default: str | None = None):
    if text is None:
        if default is None:
            raise CliError(f"--{name} is required for this law")
        text = default
    try:
        return to_param(text)
    except (ValueError, ZeroDivisionError):
        raise CliError(f"--{name}: cannot parse {text!r}") from None


def _echo(value) -> str:
    if value == math.inf:
        return "inf"
    return str(value)


# -- sample -------------------------------------------------------------------------------

def build_law(args):
    """Returns (law or None for sphere, parameters to echo, warnings)."""
    if args.law == "uniform":
        return Uniform(), {}, []
    name, cls = {"alpha": ("alpha", HammingAlpha), "mallows": ("q", Mallows),
                 "ewens": ("theta", Ewens)}[args.law]
    value = _param(name, getattr(args, name))
    try:
        law = cls(value)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    warnings = []
    if value != math.inf and not is_exact(value):
        warnings.append(f"decimal {name}={getattr(args, name)} evaluated in {DEFAULT_PRECISION}-bit "
                        f"floating point; pass p/q for exact arithmetic")
    return law, {name: _echo(value)}, warnings


def _format_rows(words: np.ndarray, style: str):
    if style == "oneline":
        for w in words:
            yield " ".join(map(str, w.tolist()))
    else:
        for w in words:
            yield Permutation(tuple(w.tolist()), check=False).format("cycle")


def cmd_sample(args) -> int:
    if args.n < 1 or args.count < 0:
        raise CliError("--n must be >= 1 and --count >= 0")
    seed = resolve_seed(args.seed)
    meta = {"command": "sample", "law": args.law, "n": args.n, "count": args.count,
            "seed": seed, "format": args.format, "version": __version__}
    if args.law == "sphere":
        if args.metric is None or args.radius is None:
            raise CliError("--law sphere needs --metric and --radius")
        m = args.metric
        if m.radius_to_stat(args.n, args.radius) not in m.stat_values(args.n):
            raise CliError(f"empty {m.value} sphere: n={args.n}, radius={args.radius}")
        meta.update(metric=m.value, parameters={"radius": args.radius}, warnings=[])

        def draw(size, rng):
            return sample_sphere_uniform(m, args.n, args.radius, rng, size=size)
    else:
        law, params, warnings = build_law(args)
        meta.update(metric=law.metric.value, parameters=params, warnings=warnings)

        def draw(size, rng):
            return sample_batch(law, args.n, size, rng)

    rng = make_rng(seed)
    with open_output(args.out) as fh:
        done = 0
        while done < args.count:
            size = min(CHUNK, args.count - done)
            for line in _format_rows(draw(size, rng), args.format):
                fh.write(line + "\n")
            done += size
    meta_path = args.meta or (args.out + ".json" if args.out and args.out != "-" else None)
    if meta_path:
        with open_output(meta_path) as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
    for w in meta["warnings"]:
        print(f"sphperm: warning: {w}", file=sys.stderr)
    return 0


# -- enumerate ----------------------------------------------------------------------------

KENDALL_MAX_N = 200


def cmd_enumerate(args) -> int:
    m = args.metric
    if args.nu is not None or args.kappa is not None:
        if args.nu is None or args.kappa is None:
            raise CliError("--nu and --kappa go together")
        if m is Metric.KENDALL and args.nu > KENDALL_MAX_N:
            raise CliError(f"Kendall extension tables are limited to nu <= {KENDALL_MAX_N}")
        try:
            table = extension_counts(m, args.nu, args.kappa, n_min=args.n or 1)
        except ValueError as exc:
            raise CliError(str(exc)) from None
    else:
        if args.n is None or args.n < 1:
            raise CliError("--n must be >= 1")
        try:
            table = count_table(m, args.n, n_min=args.n)
        except MemoryError as exc:
            raise CliError(f"infeasible size: {exc}") from None
    with open_output(args.out) as fh:
        if args.format == "csv":
            table.to_csv(fh)
        else:
            fh.write(table.to_json() + "\n")
    return 0


# -- kernel -------------------------------------------------------------------------------

REGIMES = {"alpha": (Metric.HAMMING, linear_regime), "q": (Metric.KENDALL, mallows_regime),
           "theta": (Metric.CAYLEY, ewens_regime), "alternating": (Metric.HAMMING, None)}


def parse_regime(text: str, metric: Metric):
    """``alpha=1/2``, ``q=1/3``, ``theta=2`` or ``alternating=1/4,3/4``; returns nu -> regime."""
    key, sep, value = text.partition("=")
    key = key.strip().lower()
    if not sep or key not in REGIMES:
        raise CliError(f"unknown regime {text!r}; expected one of alpha=, q=, theta=, alternating=")
    family_metric, make = REGIMES[key]
    if family_metric is not metric:
        raise CliError(f"regime {key}= belongs to the {family_metric.value} metric")
    try:
        if make is not None:
            regime = make(value)
            return lambda idx: regime
        a, b = value.split(",")
        alt = alternating_regime(a, b)
    except (ValueError, ZeroDivisionError):
        raise CliError(f"cannot parse regime {text!r}") from None
    return lambda idx: Regime(alt.name, lambda nu: alt.kappa(nu, first=idx % 2 == 0))


def cmd_kernel(args) -> int:
    m = args.metric
    if args.regime and args.kappa is not None:
        raise CliError("give either --regime or --kappa, not both")
    if not args.regime and args.kappa is None:
        raise CliError("give --regime or --kappa")
    if args.regime:
        regime_at = parse_regime(args.regime, m)
    else:
        fixed = Regime(f"kappa={args.kappa}", lambda nu: args.kappa)
        regime_at = lambda idx: fixed  # noqa: E731
    ns = sorted(set(args.n)) if args.n else None
    rows = []
    for idx, nu in enumerate(args.nu):
        regime = regime_at(idx)
        n_set = ns or list(range(1, nu + 1))
        if max(n_set) > nu or min(n_set) < 1:
            raise CliError(f"--n values must lie in 1..{nu}")
        try:
            report = convergence_experiment(m, regime, max(n_set), [nu], k_values=args.k, n_min=min(n_set))
        except ValueError as exc:
            raise CliError(str(exc)) from None
        rows += [r for r in report.rows if r[2] in n_set]
    with open_output(args.out) as fh:
        fh.write(",".join(REPORT_HEADER) + "\n")
        for r in rows:
            cells = [str(x) for x in r[:6]] + [repr(r[6])]
            cells += ["" if math.isnan(x) else repr(x) for x in r[7:]]
            fh.write(",".join(cells) + "\n")
    return 0


# -- verify -------------------------------------------------------------------------------

def cmd_verify(args) -> int:
    seed = resolve_seed(args.seed)
    options = {"seed": seed, "quick": args.quick}
    if args.max_nu is not None:
        options["max_nu"] = args.max_nu
    print(f"# sphperm {__version__} verify suite={args.suite} seed={seed}"
          + (f" max_nu={args.max_nu}" if args.max_nu is not None else "") + (" quick" if args.quick else ""))
    checks = suites.run(args.suite, **options)
    for c in checks:
        print(c.line(), flush=True)
    failed = [c for c in checks if not c.passed]
    print(f"# {len(checks) - len(failed)}/{len(checks)} checks passed")
    return 1 if failed else 0


# -- parser -------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sphperm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw permutations from a growth law or a sphere")
    p.add_argument("--law", required=True, choices=["uniform", "alpha", "mallows", "ewens", "sphere"])
    p.add_argument("--alpha", help="fraction of singular fixed points, e.g. 1/2")
    p.add_argument("--q", help="Mallows parameter in [0, inf]")
    p.add_argument("--theta", help="Ewens parameter in [0, inf]")
    p.add_argument("--metric", type=metric_arg, help="sphere metric (hamming, kendall, cayley)")
    p.add_argument("--radius", type=int, help="sphere radius")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, help=f"defaults to ${SEED_ENV}, else random (recorded in metadata)")
    p.add_argument("--format", choices=["oneline", "cycle"], default="oneline")
    p.add_argument("--out", help="sample file (default: standard output)")
    p.add_argument("--meta", help="metadata JSON path (default: OUT.json when --out is given)")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("enumerate", help="sphere or extension count tables")
    p.add_argument("--metric", type=metric_arg, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--nu", type=int)
    p.add_argument("--kappa", type=int)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("kernel", help="exact Martin kernels against their limit")
    p.add_argument("--metric", type=metric_arg, required=True)
    p.add_argument("--regime", help="alpha=A, q=Q, theta=T or alternating=A,B")
    p.add_argument("--nu", type=int_list, required=True, help="comma-separated sizes")
    p.add_argument("--kappa", type=int, help="fixed statistic on S_nu instead of a regime")
    p.add_argument("--n", type=int_list)
    p.add_argument("--k", type=int_list)
    p.add_argument("--out")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("--suite", default="all", choices=list(suites.SUITES) + ["all"])
    p.add_argument("--max-nu", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--quick", action="store_true", help="smaller Monte Carlo sizes")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"sphperm: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
