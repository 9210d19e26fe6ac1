"""Command-line experiment runner.

Subcommands write ``k,probability`` style CSV tables with a ``#`` metadata
header.  Options can come from a flat ``key = value`` config file
(``--config``); flags on the command line override it.

Exit codes: 0 success, 1 invalid configuration, 2 size cap exceeded,
3 verification failure, 4 fixed-point iteration did not converge.
"""

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, continuum, deutsch, dispersion, pctc, tables, verification
from .clock import ClockSpec
from .errors import PostselectionError, SizeCapError
from .gates import DISPERSION_GATES, PLACEMENTS, CircuitSpec
from .states import evolved_input

EXIT_OK, EXIT_CONFIG, EXIT_SIZE, EXIT_FAIL, EXIT_NONCONVERGED = 0, 1, 2, 3, 4
OUTPUT_DIR_ENV = "QBILLIARD_OUTPUT_DIR"


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _floats(text):
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _common(p):
    p.add_argument("--config", help="key = value file; flags override its entries")
    p.add_argument("--M", type=int, default=2, help="number of modes per bundle")
    p.add_argument("--N", type=int, default=None, help="clock levels (default M)")
    p.add_argument("--dt", type=float, default=1.0, help="loop delay in units of the orthogonalisation time")
    p.add_argument("--c", type=_floats, default=None, help="localisation weights, comma-separated")
    p.add_argument("--output", help="output file, '-' for stdout")
    p.add_argument("--output-dir", help=f"directory for <command>.csv (default ${OUTPUT_DIR_ENV})")
    p.add_argument("--quiet", action="store_true", help="suppress progress messages")


def build_parser():
    parser = _Parser(prog="qbilliard", description="Loop-count distributions of clocks in looped circuits.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("dctc", help="Deutsch loop-count distribution")
    _common(p)
    p.add_argument("--ecp", action="store_true", help="iterate the loop map from a product seed")
    p.add_argument("--g", type=float, default=0.5, help="vacuum weight of the seed")
    p.add_argument("--q", type=float, default=None, help="use g = q**(1/M)")
    p.add_argument("--coeffs", type=_floats, default=None, help="explicit 2**M fixed-point weights")
    p.add_argument("--seed-weights", type=_floats, default=None, help="clock-level weights of the seed")
    p.add_argument("--coherent", action="store_true", help="pure superposition seed")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--max-iter", type=int, default=10_000)

    p = sub.add_parser("pctc", help="postselected loop-count distribution")
    _common(p)
    p.add_argument("--variant", choices=("standard", "incomplete", "probabilistic"), default="standard")
    p.add_argument("--h", type=float, default=None, help="vacuum weight of the teleportation pair")
    p.add_argument("--p", type=float, default=None, help="power of the interaction swaps")
    p.add_argument("--method", choices=("circuit", "closed"), default="circuit")

    def family_args(p):
        p.add_argument("--family", choices=continuum.FAMILIES, required=True)
        p.add_argument("--q", type=float, default=None)
        p.add_argument("--h", type=float, default=None)
        p.add_argument("--r", type=float, default=None)

    p = sub.add_parser("continuum", help="large-M limit distribution")
    _common(p)
    family_args(p)

    p = sub.add_parser("converge", help="distance of finite-M distributions to the limit")
    _common(p)
    family_args(p)
    p.add_argument("--M-list", type=_ints, default=verification.M_LIST)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("dispersion-check", help="compare dispersive and plain circuits")
    _common(p)
    p.add_argument("--p-values", type=_floats, default=(0.2, 0.37, 0.8))
    p.add_argument("--prescriptions", default="dctc,pctc")
    p.add_argument("--g", type=float, default=0.4)
    p.add_argument("--bundles", choices=("both", "cr", "cv"), default="both")
    p.add_argument("--placement", choices=PLACEMENTS, default="before")
    p.add_argument("--gate", choices=DISPERSION_GATES, default="power_swap")

    p = sub.add_parser("verify", help="run the reproduction suite")
    _common(p)
    p.add_argument("--criteria", type=_ints, default=None, help="subset of criterion numbers")
    return parser


def read_config(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}")
    out = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        out[key] = (lineno, value.strip())
    return out


def _apply_config(subparser, config, path):
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, (lineno, value) in config.items():
        action = actions.get(key)
        if action is None or key in ("config", "help"):
            raise ConfigError(f"{path}:{lineno}: unknown option {key!r}")
        if action.const is True and action.nargs == 0:
            low = value.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ConfigError(f"{path}:{lineno}: {key} must be true or false")
            defaults[key] = low in ("true", "1", "yes")
            continue
        try:
            converted = action.type(value) if action.type else value
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}")
        if action.choices is not None and converted not in action.choices:
            raise ConfigError(f"{path}:{lineno}: {key} must be one of {sorted(action.choices)}")
        defaults[key] = converted
    subparser.set_defaults(**defaults)


def parse_args(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        _apply_config(sub, read_config(args.config), args.config)
        args = parser.parse_args(argv)
    if args.N is None:
        args.N = args.M
    if args.M < 1:
        raise ConfigError("--M must be at least 1")
    if args.N < args.M:
        raise ConfigError(f"--N must be at least M={args.M}, got {args.N}")
    if not args.dt > 0:
        raise ConfigError(f"--dt must be positive, got {args.dt}")
    return args


def _spec(args):
    clock = ClockSpec(args.N)
    return CircuitSpec(args.M, clock, dt=args.dt * clock.t_perp)


def _base_meta(args):
    return {"command": args.command, "M": args.M, "N": args.N, "dt_over_tperp": args.dt}


def _family_param(args):
    name = {"dctc": "q", "pctc_h": "h", "pctc_beta": "r"}[args.family]
    value = getattr(args, name)
    if value is None:
        raise ConfigError(f"family {args.family} needs --{name}")
    return name, value


def run_dctc(args, log):
    meta = _base_meta(args) | {"model": "dctc"}
    M = args.M
    if args.coeffs is not None:
        if len(args.coeffs) != 2**M:
            raise ConfigError(f"--coeffs needs 2**M={2**M} values, got {len(args.coeffs)}")
        coeffs = deutsch.FixedPointCoefficients(M, np.array(args.coeffs))
        meta["coeffs"] = args.coeffs
        return tables.LoopDistribution(deutsch.dctc_pmf(coeffs), meta), EXIT_OK
    g = args.g if args.q is None else args.q ** (1.0 / M)
    meta |= {"g": g} if args.q is None else {"q": args.q, "g": g}
    if not args.ecp:
        return tables.LoopDistribution(deutsch.ecp_pmf(M, g), meta), EXIT_OK
    spec = _spec(args)
    seed = deutsch.EcpSeed(g, args.seed_weights, args.coherent)
    channel = deutsch.DeutschChannel(spec, evolved_input(spec.clock, M, 0, spec.dt, args.c))
    res = deutsch.ecp_fixed_point(channel, seed, tol=args.tol, max_iter=args.max_iter)
    meta |= {"ecp": True, "coherent": args.coherent, "tol": args.tol, "iterations": res.iterations}
    meta["residual"] = res.residual
    if not res.converged:
        log(
            f"ECP did not converge after {res.iterations} iterations "
            f"(last step {res.distances[-1]:.3e}, tol {args.tol:.3e})"
        )
        return None, EXIT_NONCONVERGED
    pmf = deutsch.dctc_pmf(deutsch.extract_coefficients(res.theta))
    return tables.LoopDistribution(pmf, meta), EXIT_OK


def _variant(args):
    if args.variant == "incomplete":
        if args.h is None:
            raise ConfigError("variant incomplete needs --h")
        return pctc.PctcVariant.incomplete(args.h)
    if args.variant == "probabilistic":
        if args.p is None:
            raise ConfigError("variant probabilistic needs --p")
        return pctc.PctcVariant.probabilistic(args.p)
    return pctc.PctcVariant.standard()


def run_pctc(args, log):
    variant = _variant(args)
    meta = _base_meta(args) | {"model": "pctc", "variant": variant.kind, "method": args.method}
    if variant.h is not None:
        meta["h"] = variant.h
    if variant.p is not None:
        meta["p"] = variant.p
    M, N = args.M, args.N
    if args.method == "closed":
        if variant.kind == "standard":
            pmf = pctc.pctc_pmf(M)
        elif variant.kind == "incomplete":
            pmf = pctc.incomplete_pmf(M, N, variant.h)
        else:
            clock = ClockSpec(N)
            w = pctc.probabilistic_weights(M, variant.p, clock, args.dt * clock.t_perp)
            pmf = np.abs(w) ** 2 / np.sum(np.abs(w) ** 2)
        return tables.LoopDistribution(pmf, meta), EXIT_OK
    try:
        res = pctc.pctc_output(_spec(args), variant, c=args.c)
    except PostselectionError as exc:
        raise ConfigError(f"postselection fails for this configuration: {exc}")
    meta["max_residual"] = float(res.residuals.max())
    return tables.LoopDistribution(res.probabilities, meta), EXIT_OK


def run_continuum(args, log):
    name, value = _family_param(args)
    pmf = continuum.limit_distribution(args.family, value)
    meta = {"command": "continuum", "model": args.family, name: value, "tail_bound": continuum.TAIL_BOUND}
    meta["expectation"] = continuum.limit_expectation(args.family, value)
    return tables.LoopDistribution(pmf, meta), EXIT_OK


def run_converge(args, log):
    name, value = _family_param(args)
    if args.jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    Ms = list(args.M_list)
    if not Ms or min(Ms) < 1:
        raise ConfigError("--M-list needs positive integers")
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        dists = list(pool.map(lambda M: continuum.sup_distance(args.family, value, M), Ms))
    monotone = all(b <= a for a, b in zip(dists, dists[1:]))
    meta = {"command": "converge", "model": args.family, name: value, "monotone": monotone}
    return tables.format_table(("M", "sup_distance"), list(zip(Ms, dists)), meta), EXIT_OK


def run_dispersion(args, log):
    prescriptions = tuple(x.strip() for x in args.prescriptions.split(",") if x.strip())
    for pres in prescriptions:
        if pres not in dispersion.PRESCRIPTIONS:
            raise ConfigError(f"unknown prescription {pres!r}")
    if args.M < 2:
        raise ConfigError("dispersion needs M >= 2")
    rows = dispersion.dispersion_invariance_check(
        _spec(args), args.p_values, prescriptions, args.g, args.bundles, args.placement, args.gate
    )
    meta = _base_meta(args) | {
        "bundles": args.bundles, "placement": args.placement, "gate": args.gate,
        "g": args.g, "threshold": dispersion.PASS_THRESHOLD,
    }
    cols = ("M", "p", "prescription", "deviation", "distribution_deviation", "passed")
    data = [(r.M, r.p, r.prescription, r.deviation, r.distribution_deviation, r.passed) for r in rows]
    failed = sum(not r.passed for r in rows)
    if failed:
        log(f"{failed} of {len(rows)} rows exceed the threshold {dispersion.PASS_THRESHOLD:.0e}")
    return tables.format_table(cols, data, meta), EXIT_FAIL if failed else EXIT_OK


def run_verify(args, log):
    numbers = args.criteria
    if numbers is not None:
        bad = [n for n in numbers if n not in verification.CRITERIA]
        if bad:
            raise ConfigError(f"unknown criteria {bad}")
    results = []
    for n in numbers or sorted(verification.CRITERIA):
        res = verification.run_criterion(n)
        log(res.line())
        results.append(res)
    passed = sum(r.passed for r in results)
    log(f"{passed}/{len(results)} criteria passed")
    cols = ("criterion", "title", "passed", "seconds", "measured")
    data = [
        (r.number, r.title, r.passed, r.seconds, ";".join(f"{k}={verification._fmt(v)}" for k, v in r.measured.items()))
        for r in results
    ]
    table = tables.format_table(cols, data, {"command": "verify"})
    return table, EXIT_OK if passed == len(results) else EXIT_FAIL


COMMANDS = {
    "dctc": run_dctc,
    "pctc": run_pctc,
    "continuum": run_continuum,
    "converge": run_converge,
    "dispersion-check": run_dispersion,
    "verify": run_verify,
}


def _destination(args):
    if args.output:
        return None if args.output == "-" else Path(args.output)
    directory = args.output_dir or os.environ.get(OUTPUT_DIR_ENV)
    if directory:
        return Path(directory) / f"{args.command}.csv"
    return None


def _write(text, dest):
    if dest is None:
        sys.stdout.write(text)
        return
    dest.parent.mkdir(parents=True, exist_ok=True)
    dest.write_text(text)


def main(argv=None):
    """Run the CLI and return the exit code."""
    try:
        args = parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    def log(msg):
        if not args.quiet:
            print(msg, file=sys.stderr)

    try:
        out, code = COMMANDS[args.command](args, log)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SizeCapError as exc:
        print(f"size cap: {exc}", file=sys.stderr)
        return EXIT_SIZE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if out is not None:
        text = out.to_csv() if isinstance(out, tables.LoopDistribution) else out
        _write(text, _destination(args))
    return code


if __name__ == "__main__":
    sys.exit(main())
