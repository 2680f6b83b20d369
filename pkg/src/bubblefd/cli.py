"""Command line: ``bubblefd {solve,exact,validate}``.

Exit codes: 0 success, 1 configuration or validation error, 2 numerical failure.
"""

import argparse
import csv
import logging
import platform
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, apply_overrides, dump_config, load_config
from .grid import make_grid, write_field_csv
from .iteration import extract_contact_set, iterate
from .operator import StabilityError, check_stability
from .stationary import EXAMPLE_PARAMS, StationaryModel, u_exact_example
from .validation import StudyRunError, error_at_time, order_study, write_error_csv, write_order_csv

log = logging.getLogger("bubblefd")

DEFAULT_TIMES = (0.5, 1.0, 3.0)
DEFAULT_LADDER = ((25, 13), (50, 50), (100, 200))
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


class CLIError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _fmt(v):
    return "%.17g" % v


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _versions():
    import numba
    import scipy

    return {"version.bubblefd": __version__, "version.python": platform.python_version(),
            "version.numpy": np.__version__, "version.scipy": scipy.__version__,
            "version.numba": numba.__version__}


def _parse_pairs(text, what):
    out = []
    for item in text.split(","):
        item = item.strip()
        if item:
            try:
                out.append(float(item) if what == "time" else tuple(int(v) for v in item.split(":")))
            except ValueError:
                raise CLIError(f"cannot parse {what} {item!r}", EXIT_CONFIG) from None
    return out


def build_config(args):
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.set:
        cfg = apply_overrides(cfg, args.set)
    changes = {}
    if args.out is not None:
        changes["out"] = args.out
    if getattr(args, "iterations", None) is not None:
        changes["iterations"] = args.iterations
    if args.lcp is not None:
        changes["lcp_method"] = args.lcp
    return replace(cfg, **changes) if changes else cfg


def _solve(cfg, allow_unstable):
    problem = cfg.problem()
    grid = make_grid(cfg.a, cfg.T, cfg.M, cfg.N)
    report = check_stability(grid, problem.coeffs)
    if not report.satisfied:
        if not allow_unstable:
            raise StabilityError(report.message())
        log.warning("%s; continuing because --allow-unstable was given", report.message())
    rep = iterate(problem, grid, max_outer=cfg.max_outer, outer_tol=cfg.outer_tol, iterations=cfg.iterations,
                  lcp=cfg.lcp_options(), allow_unstable=allow_unstable, check_compat=cfg.check_compat)
    return problem, rep


def _write_solve_artifacts(out, cfg, problem, rep):
    write_field_csv(rep.final, out / "field.csv")
    _write_rows(out / "increments.csv", ["iter", "sup_increment"],
                [[k + 1, _fmt(v)] for k, v in enumerate(rep.sup_increments)])
    rows = []
    if rep.K >= 1:
        for level in extract_contact_set(rep.final, rep.obstacle(rep.K)):
            for iv in level:
                rows.append([iv.n, _fmt(iv.t), _fmt(iv.x_left), _fmt(iv.x_right)])
    _write_rows(out / "contact.csv", ["n", "t", "x_left", "x_right"], rows)
    extra = {"result.outer_iterations": rep.K, "result.converged": rep.converged,
             "result.final_increment": _fmt(rep.sup_increments[-1]) if rep.sup_increments else "nan",
             "result.k_star": _fmt(problem.stationary().k_star)}
    extra.update(_versions())
    (out / "manifest.txt").write_text(dump_config(cfg, extra))


def cmd_solve(cfg, args):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    problem, rep = _solve(cfg, args.allow_unstable)
    _write_solve_artifacts(out, cfg, problem, rep)
    state = "converged" if rep.converged else "not converged"
    print(f"{cfg.M}x{cfg.N} grid: {rep.K} outer iterations ({state}), "
          f"last increment {rep.sup_increments[-1]:.3e}")
    return EXIT_OK


def cmd_exact(cfg, args):
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        model = StationaryModel(cfg.r, cfg.rho, cfg.sigma, cfg.lam, cfg.c, search_upper=max(cfg.a, 2.0))
    except ArithmeticError as exc:
        raise CLIError(f"free boundary: {exc}", EXIT_NUMERIC) from exc
    _write_rows(out / "exact.csv", ["k_star", "b"], [[_fmt(model.k_star), _fmt(model.b)]])
    x = np.linspace(-cfg.a, cfg.a, args.points)
    q = model.q(x)
    is_example = all(getattr(cfg, k) == v for k, v in EXAMPLE_PARAMS.items())
    # the closed form exists only for the reference parameters
    u = u_exact_example(x, model.k_star) if is_example else np.full_like(x, np.nan)
    _write_rows(out / "stationary.csv", ["x", "q", "u_closed_form"],
                [[_fmt(a), _fmt(b), _fmt(c)] for a, b, c in zip(x, q, u)])
    print(f"k_star = {_fmt(model.k_star)}")
    print(f"b = {_fmt(model.b)}")
    return EXIT_OK


def cmd_validate(cfg, args):
    times = _parse_pairs(args.times, "time") if args.times else list(DEFAULT_TIMES)
    for t in times:
        if not 0.0 <= t <= cfg.T:
            raise CLIError(f"time {t} is outside the horizon [0, {cfg.T}]", EXIT_CONFIG)
    ladder = [tuple(p) for p in _parse_pairs(args.ladder, "resolution")] if args.ladder else list(DEFAULT_LADDER)
    if any(len(p) != 2 for p in ladder):
        raise CLIError("ladder entries must look like M:N", EXIT_CONFIG)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    problem, rep = _solve(cfg, args.allow_unstable)
    _write_solve_artifacts(out, cfg, problem, rep)
    model = problem.stationary()
    for t in times:
        er = error_at_time(rep.final, model.q, t)
        write_error_csv(out / f"error_t{t:g}.csv", er)
        print(f"t = {er.time:g}: max error {er.max_error:.3e}, l2 error {er.l2_error:.3e}")
    if args.order:
        study = order_study(problem, ladder, lcp=cfg.lcp_options(), allow_unstable=args.allow_unstable,
                            max_outer=cfg.max_outer, outer_tol=cfg.outer_tol, check_compat=cfg.check_compat)
        write_order_csv(out / "order.csv", study)
        for row in study.rows:
            print(f"M={row.M} N={row.N}: max error {row.max_error:.3e}, observed order {row.observed_order:.3f}")
    return EXIT_OK


def make_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="flat key = value config file")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides the config)")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")
    common.add_argument("--lcp", choices=("psor", "brennan-schwartz"), help="per-level LCP solver")
    common.add_argument("--allow-unstable", action="store_true",
                        help="run even if the stability condition fails")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="bubblefd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="run the monotone iteration")
    p.add_argument("--iterations", type=int, metavar="K", help="exactly K outer iterations")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("exact", parents=[common], help="stationary free boundary and closed form")
    p.add_argument("--points", type=int, default=201, help="mesh points for stationary.csv")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("validate", parents=[common], help="errors against the stationary solution")
    p.add_argument("--iterations", type=int, metavar="K")
    p.add_argument("--times", metavar="T1,T2,...", help="comparison times (default 0.5,1,3)")
    p.add_argument("--order", action="store_true", help="also run the refinement study")
    p.add_argument("--ladder", metavar="M:N,...", help="study resolutions (default 25:13,50:50,100:200)")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = build_config(args)
        return args.func(cfg, args)
    except CLIError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except StudyRunError as exc:
        code = EXIT_NUMERIC if isinstance(exc.__cause__, ArithmeticError) else EXIT_CONFIG
        print(f"error: {exc}", file=sys.stderr)
        return code
    except (ConfigError, StabilityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
