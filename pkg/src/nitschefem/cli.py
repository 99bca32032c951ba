"""Command line front end for convergence studies.

Example::

    nitschefem --dim 2 --degree 2 --levels 1:6 --c0 0 --format markdown

A ``--config`` file holds ``key = value`` lines using the long flag names
(``c0 = 1``, ``levels = 1:5``); flags given on the command line win.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .assembly import assemble_matrix, write_matrix_market
from .mesh import write_vtk
from .solutions import SOLUTIONS
from .solver import ConvergenceError, SingularMatrixError
from .study import StudyConfig, emit, run_study

log = logging.getLogger("nitschefem")


def _levels(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(t) for t in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"levels must look like A:B, got {text!r}") from None
    return lo, hi


def _c0(text: str) -> float | None:
    return None if text.lower() in ("default", "none") else float(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nitschefem", description="Nitsche FEM convergence study for the Poisson problem.")
    p.add_argument("--config", help="key=value file supplying defaults for any flag")
    p.add_argument("--dim", type=int, choices=(2, 3), default=2)
    p.add_argument("--degree", type=int, choices=(1, 2, 3), default=1)
    p.add_argument("--beta", type=int, choices=(-1, 1), default=1)
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--c0", type=_c0, default=1.0, help="penalty constant; 'default' gives 10k^2 for beta=-1")
    p.add_argument("--levels", type=_levels, default=(1, 5), help="refinement levels A:B (inclusive)")
    p.add_argument("--grading", type=float, default=1.0)
    p.add_argument("--solution", choices=sorted(SOLUTIONS), default=None)
    p.add_argument("--expr", help="sympy expression in x, y[, z] for --solution custom")
    p.add_argument("--solver", choices=("direct", "krylov", "gmres", "cg"), default="direct")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--quad-bump", type=int, default=0, help="extra quadrature degree for assembly and errors")
    p.add_argument("--format", choices=("csv", "markdown"), default="csv")
    p.add_argument("--out", help="write the table here instead of stdout")
    p.add_argument("--export-vtk", metavar="PATH", help="finest-level solution as legacy VTK")
    p.add_argument("--export-mtx", metavar="PATH", help="finest-level matrix in MatrixMarket format")
    p.add_argument("--no-timing", action="store_true", help="report elapsed as 0 for reproducible output")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def read_config(path: str) -> list[str]:
    """Turn a ``key = value`` file into command line tokens."""
    argv = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, value = (t.strip() for t in line.split("=", 1))
            flag = "--" + key.replace("_", "-")
            if flag == "--no-timing":
                if value.lower() in ("1", "true", "yes"):
                    argv.append(flag)
            else:
                argv += [flag, value]
    return argv


def parse_args(argv=None) -> argparse.Namespace:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    first = parser.parse_args(argv)
    if first.config:
        try:
            file_argv = read_config(first.config)
        except (OSError, ValueError) as exc:
            parser.error(str(exc))
        # file values first so command line flags override them
        return parser.parse_args(file_argv + argv)
    return first


def main(argv=None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    solution = args.solution or ("sine2d" if args.dim == 2 else "sine3d_vector")
    try:
        cfg = StudyConfig(
            dim=args.dim, degree=args.degree, beta=args.beta, alpha=args.alpha, c0=args.c0,
            levels=args.levels, grading=args.grading, solution=solution, expr=args.expr,
            solver=args.solver, tol=args.tol, quad_bump=args.quad_bump, timing=not args.no_timing,
        )
        table = run_study(cfg)
        text = emit(table, args.format, args.out)
        if args.out is None:
            sys.stdout.write(text)
        space, x = table.finest
        if args.export_vtk:
            nv = space.mesh.num_vertices
            fields = {"u_h": x[:nv]} if x.ndim == 1 else {f"u_h_{j}": x[:nv, j] for j in range(x.shape[1])}
            write_vtk(args.export_vtk, space.mesh, fields, title=f"nitschefem k={cfg.degree} level={cfg.levels[1]}")
        if args.export_mtx:
            write_matrix_market(args.export_mtx, assemble_matrix(space, cfg.nitsche, 2 * cfg.degree + cfg.quad_bump))
    except (ValueError, RuntimeError, OSError, ConvergenceError, SingularMatrixError) as exc:
        print(f"nitschefem: error: {exc}", file=sys.stderr)
        return 1
    return 0
