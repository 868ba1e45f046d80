"""Command-line interface: ``qfl <subcommand> [flags]``.

Machine-readable results go to stdout, diagnostics to stderr.  Exit codes:
0 success, 1 usage, 2 parse error, 3 budget exceeded, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import math
import re
import sys
from fractions import Fraction

from qfl import dynamics, green, height, periodic
from qfl.bipoly import PolySyntaxError, format_poly, parse_poly

EXIT_USAGE, EXIT_PARSE, EXIT_BUDGET, EXIT_NUMERIC = 1, 2, 3, 4


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(f"{self.prog}: error: {message}", EXIT_USAGE)


# -- value parsing ------------------------------------------------------------------

def parse_complex(text):
    """``a+bi``, ``a``, ``bi``, ``i``, ``-i`` or a fraction such as ``1/4``."""
    s = text.strip().replace(" ", "")
    if "/" in s and "i" not in s:
        try:
            return complex(float(Fraction(s)))
        except (ValueError, ZeroDivisionError):
            pass
    s = s.replace("I", "i").replace("i", "j")
    if s.endswith("j"):
        head = s[:-1]
        if head == "" or head[-1] in "+-":
            s = head + "1j"
    try:
        value = complex(s)
    except ValueError:
        raise CliError(f"cannot parse complex number {text!r}", EXIT_PARSE) from None
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise CliError(f"non-finite complex number {text!r}", EXIT_PARSE)
    return value


def parse_window(text):
    parts = text.split(",")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        values = []
    if len(values) != 4 or not all(math.isfinite(v) for v in values):
        raise CliError(f"--window expects re0,re1,im0,im1, got {text!r}", EXIT_PARSE)
    return values


def parse_px(text):
    m = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", text)
    if not m:
        raise CliError(f"--px expects WxH, got {text!r}", EXIT_PARSE)
    return int(m.group(1)), int(m.group(2))


def _poly(text):
    try:
        return parse_poly(text)
    except PolySyntaxError as exc:
        raise CliError(f"{exc} in {text!r}", EXIT_PARSE) from None


def _section(text):
    try:
        return height.parse_section(text)
    except PolySyntaxError as exc:
        raise CliError(f"{exc} in {text!r}", EXIT_PARSE) from None
    except (ZeroDivisionError, ValueError) as exc:
        raise CliError(f"bad section {text!r}: {exc}", EXIT_PARSE) from None


def fmt_complex(z):
    # adding 0.0 turns -0.0 into 0.0
    return f"{z.real + 0.0:.17g}{z.imag + 0.0:+.17g}i"


def fmt_real(x):
    """Short %g text without exponent padding: 1e-9, not 1e-09."""
    return re.sub(r"e([+-])0*(\d)", lambda m: "e" + m.group(1).replace("+", "") + m.group(2), f"{x:.3g}")


def fmt_fraction(q):
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _emit(text, out_path):
    if out_path:
        with open(out_path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- subcommands -----------------------------------------------------------------

def cmd_push(args):
    res = dynamics.pushforward(_poly(args.poly))
    print(f"raw: {format_poly(res.raw)}")
    print(f"reduced: {format_poly(res.reduced)}")
    print(f"multiplicity_collapsed: {str(res.multiplicity_collapsed).lower()}")
    return 0


def describe_outcome(outcome):
    if isinstance(outcome, dynamics.Preperiodic):
        return f"preperiodic preperiod={outcome.preperiod} period={outcome.period}"
    if isinstance(outcome, dynamics.DegreeGrowth):
        return f"degree-growth height_estimate={fmt_fraction(outcome.height_estimates[-1])}"
    if isinstance(outcome, dynamics.NotPreperiodic):
        return (f"not-preperiodic (heuristic) height_estimate={fmt_fraction(outcome.height_estimates[-1])}"
                f" cauchy_difference={fmt_fraction(outcome.cauchy_difference)}")
    if isinstance(outcome, dynamics.BudgetExceeded):
        return f"budget-exceeded: {outcome.reason}"
    return f"inconclusive: {outcome.reason}"


def cmd_orbit(args):
    orb = dynamics.orbit(_poly(args.poly), max_steps=args.steps, degree_budget=args.budget)
    _emit(orb.to_csv(), args.out)
    print(describe_outcome(orb.outcome), file=sys.stderr)
    return EXIT_BUDGET if isinstance(orb.outcome, dynamics.BudgetExceeded) else 0


def cmd_detect(args):
    verdict = dynamics.detect_preperiodic(_poly(args.poly), max_steps=args.steps,
                                          degree_budget=args.budget)
    print(describe_outcome(verdict))
    return EXIT_BUDGET if isinstance(verdict, dynamics.Inconclusive) else 0


def cmd_height(args):
    s = _section(args.section)
    budget = args.budget if args.budget is not None else height.DEFAULT_DEGREE_BUDGET
    report = height.canonical_height_section(s, args.steps, budget)
    print("estimates: " + ", ".join(fmt_fraction(e) for e in report.estimates))
    print(f"height: {fmt_fraction(report.height)} ({report.status}, heuristic stopping rule)")
    print(f"cauchy_difference: {fmt_fraction(report.cauchy_difference)}")
    return 0


def _decimals(eps):
    return min(17, max(1, math.ceil(-math.log10(eps))))


def format_certified(g, eps):
    d = _decimals(eps)
    shown = round(g.estimate, d)
    bound = g.radius + abs(shown - g.estimate)
    shown_bound = eps if bound <= eps else bound
    text = f"{g.estimate:.{d}f} ± {fmt_real(shown_bound)}"
    return text if g.resolved else text + " (escape not certified)"


def _check_eps(eps):
    if not (eps > 0 and math.isfinite(eps)):
        raise CliError("--eps must be a positive number", EXIT_USAGE)


def cmd_green(args):
    _check_eps(args.eps)
    g = green.green_value(parse_complex(args.z), parse_complex(args.lam), args.eps)
    print(format_certified(g, args.eps))
    return 0


def describe_escape(verdict, eps):
    if isinstance(verdict, green.Escapes):
        return f"escapes G={format_certified(verdict.G, eps)}"
    return f"no-escape-within bound={fmt_real(verdict.bound)}"


def cmd_inK(args):
    _check_eps(args.eps)
    if args.poly is not None:
        res = green.curve_in_K_scan(_poly(args.poly), num_lambda=args.samples,
                                    eps=args.eps, seed=args.seed)
        if isinstance(res, green.NotContained):
            z, lam = res.witness
            print(f"not-contained witness z={fmt_complex(z)} lam={fmt_complex(lam)} "
                  f"G={format_certified(res.G, args.eps)}")
        else:
            print(f"no-witness-found samples={res.samples}")
            for lam, why in res.skipped:
                print(f"skipped lam={fmt_complex(lam)}: {why}", file=sys.stderr)
        return 0
    if args.z is None or args.lam is None:
        raise CliError("inK needs --z and --lam, or --poly", EXIT_USAGE)
    verdict = green.in_K_test(parse_complex(args.z), parse_complex(args.lam), args.eps)
    print(describe_escape(verdict, args.eps))
    return 0


def cmd_mandel(args):
    _check_eps(args.eps)
    print(describe_escape(green.mandelbrot_test(parse_complex(args.lam), args.eps), args.eps))
    return 0


def cmd_perpoints(args):
    pts = periodic.periodic_points(parse_complex(args.lam), args.period)
    _emit(periodic.points_to_csv(pts), args.out)
    ambiguous = sum(p.ambiguous for p in pts)
    if ambiguous:
        print(f"warning: {ambiguous} points have an ambiguous exact period", file=sys.stderr)
    return 0


def cmd_dynatomic(args):
    if args.poly is not None:
        ok = periodic.divides_period_curve(_poly(args.poly), args.period)
        print("divides" if ok else "does-not-divide")
        return 0
    _emit(format_poly(periodic.dynatomic(args.period)) + "\n", args.out)
    return 0


def cmd_follow(args):
    z = periodic.follow_periodic(parse_complex(args.lam), parse_complex(args.z), args.period,
                                 parse_complex(args.lam1), steps=args.steps)
    print(fmt_complex(z))
    return 0


def cmd_equidist(args):
    lam, w = parse_complex(args.lam), parse_complex(args.z)
    try:
        diff = periodic.equidist_check(lam, w, args.n)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_NUMERIC) from None
    print(f"{diff:.6e}")
    return 0


def cmd_render(args):
    _check_eps(args.eps)
    re0, re1, im0, im1 = parse_window(args.window)
    w, h = parse_px(args.px)
    lam = parse_complex(args.lam) if args.lam is not None else None
    try:
        region = green.Region(re0, re1, im0, im1, w, h)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_USAGE) from None
    if args.kind == "dynamical" and lam is None:
        raise CliError("dynamical render needs --lam", EXIT_USAGE)
    if args.workers < 1:
        raise CliError("--workers must be at least 1", EXIT_USAGE)
    pixels = green.render_escape(args.kind, region, args.eps, args.out, lam, args.workers)
    print(f"wrote {args.out} ({w}x{h}, {int((pixels > 0).sum())} escaping pixels)")
    return 0


# -- parser ---------------------------------------------------------------------------

def build_parser():
    parser = _Parser(prog="qfl", description="Exact and certified computations for f(z, lam) = (z^2 + lam, lam).")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=func)
        return p

    p = add("push", cmd_push, "push a curve {P = 0} forward once")
    p.add_argument("--poly", required=True)

    for name, func, text in (("orbit", cmd_orbit, "iterate reduced pushforwards, CSV out"),
                             ("detect", cmd_detect, "decide preperiodicity of a curve")):
        p = add(name, func, text)
        p.add_argument("--poly", required=True)
        p.add_argument("--steps", type=int, default=dynamics.DEFAULT_MAX_STEPS)
        p.add_argument("--budget", type=int, default=None, help="max deg_sum (default 64 * deg_sum(P))")
        if name == "orbit":
            p.add_argument("--out")

    p = add("height", cmd_height, "degree-growth height of a rational section p(lam)/q(lam)")
    p.add_argument("--section", required=True)
    p.add_argument("--steps", type=int, default=6)
    p.add_argument("--budget", type=int, default=None, help="max degree of z_m (default 2^14)")

    p = add("green", cmd_green, "certified escape rate G(z, lam)")
    p.add_argument("--z", required=True)
    p.add_argument("--lam", required=True)
    p.add_argument("--eps", type=float, default=1e-9)

    p = add("inK", cmd_inK, "certify escape of z under f_lam, or scan a curve for escaping points")
    p.add_argument("--z")
    p.add_argument("--lam")
    p.add_argument("--poly", help="scan the curve {P = 0} instead")
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float, default=1e-9)

    p = add("mandel", cmd_mandel, "certify that lam lies outside the Mandelbrot set")
    p.add_argument("--lam", required=True)
    p.add_argument("--eps", type=float, default=1e-9)

    p = add("perpoints", cmd_perpoints, "all solutions of f_lam^k(z) = z, CSV out")
    p.add_argument("--lam", required=True)
    p.add_argument("--period", type=int, required=True)
    p.add_argument("--out")

    p = add("dynatomic", cmd_dynatomic, "dynatomic polynomial of period k, or test P | f^k(z) - z")
    p.add_argument("--period", type=int, required=True)
    p.add_argument("--poly")
    p.add_argument("--out")

    p = add("follow", cmd_follow, "continue a period-k point from lam to lam1")
    p.add_argument("--lam", required=True)
    p.add_argument("--z", required=True)
    p.add_argument("--period", type=int, required=True)
    p.add_argument("--lam1", required=True)
    p.add_argument("--steps", type=int, default=64)

    p = add("equidist", cmd_equidist, "periodic-point potential at w minus G(w, lam)")
    p.add_argument("--lam", required=True)
    p.add_argument("--z", required=True, help="the point w")
    p.add_argument("--n", type=int, required=True)

    p = add("render", cmd_render, "render certified escape rates to a PGM image")
    p.add_argument("--kind", choices=["parameter", "dynamical"], default="parameter")
    p.add_argument("--window", required=True, help="re0,re1,im0,im1")
    p.add_argument("--px", required=True, help="WxH")
    p.add_argument("--out", required=True)
    p.add_argument("--lam")
    p.add_argument("--eps", type=float, default=1e-9)
    p.add_argument("--workers", type=int, default=1)
    return parser


# flags whose values may begin with '-' (negative numbers, windows)
_VALUE_FLAGS = {"--z", "--lam", "--lam1", "--window", "--poly", "--section"}


def _join_values(argv):
    out, k = [], 0
    while k < len(argv):
        tok = argv[k]
        if tok in _VALUE_FLAGS and k + 1 < len(argv) and argv[k + 1].startswith("-"):
            out.append(f"{tok}={argv[k + 1]}")
            k += 2
        else:
            out.append(tok)
            k += 1
    return out


def run(argv):
    parser = build_parser()
    try:
        args = parser.parse_args(_join_values(list(argv)))
        return args.func(args)
    except CliError as exc:
        print(exc, file=sys.stderr)
        return exc.code
    except (height.DegreeBudgetError,) as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (periodic.RootFindingError, periodic.ContinuationError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None):
    sys.exit(run(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
