"""Convergence studies: refinement loops, rate extraction and table output."""
from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .assembly import LinearSystem, NitscheConfig, assemble_matrix, assemble_rhs
from .mesh import build_mesh
from .norms import ErrorReport, boundary_weighted_error, h1_semi_error, l2_error
from .solutions import get_solution
from .solver import solve
from .space import build_space

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "level", "h", "dofs", "l2_rel", "l2_rate", "h1_rel", "h1_rate",
    "bnd_abs", "bnd_rate", "residual", "elapsed",
)


def compute_rates(errors) -> list[float | None]:
    """Pairwise rates ``log2(e[i-1] / e[i])``; ``None`` for the first entry or nonpositive errors."""
    rates: list[float | None] = [None] * len(errors)
    for i in range(1, len(errors)):
        a, b = errors[i - 1], errors[i]
        if a > 0 and b > 0:
            rates[i] = math.log2(a / b)
    return rates


@dataclass
class StudyConfig:
    dim: int = 2
    degree: int = 1
    beta: int = 1
    alpha: float = 1.0
    c0: float | None = 1.0
    levels: tuple[int, int] = (1, 5)
    grading: float = 1.0
    solution: str = "sine2d"
    expr: str | None = None
    solver: str = "direct"
    tol: float = 1e-12
    quad_bump: int = 0
    timing: bool = True

    def __post_init__(self):
        lo, hi = self.levels
        if not hi > lo:
            raise ValueError(f"need at least two levels, got {lo}:{hi}")
        if lo < 0:
            raise ValueError("levels must be nonnegative")
        if self.quad_bump < 0:
            raise ValueError("quad_bump must be nonnegative")
        self.nitsche = NitscheConfig(self.beta, self.alpha, self.c0)


@dataclass
class StudyRow:
    level: int
    h: float
    dofs: int
    l2_rel: float
    l2_rate: float | None
    h1_rel: float
    h1_rate: float | None
    bnd_abs: float
    bnd_rate: float | None
    residual: float
    elapsed: float


@dataclass
class StudyTable:
    rows: list = field(default_factory=list)
    config: StudyConfig | None = None
    #: ``(space, coefficients)`` of the finest level, kept for exports
    finest: tuple | None = field(default=None, repr=False, compare=False)
    columns = CSV_COLUMNS

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]

    def final_rate(self, name: str) -> float | None:
        return getattr(self.rows[-1], name) if self.rows else None


def solve_level(cfg: StudyConfig, level: int):
    """Run one refinement level; returns ``(space, coefficients, ErrorReport, SolveStats)``.

    Vector solutions are solved componentwise with a single factorisation
    and reported as root-sum-of-squares over components.
    """
    comps = get_solution(cfg.solution, cfg.dim, cfg.degree, cfg.expr)
    mesh = build_mesh(cfg.dim, level, cfg.grading)
    space = build_space(mesh, cfg.degree)
    qdeg = 2 * cfg.degree + cfg.quad_bump
    A = assemble_matrix(space, cfg.nitsche, qdeg)
    if len(comps) == 1:
        f, g = comps[0].rhs, comps[0].value
    else:
        def f(x):
            return np.column_stack([c.rhs(x) for c in comps])

        def g(x):
            return np.column_stack([c.value(x) for c in comps])

    b = assemble_rhs(space, cfg.nitsche, f, g, qdeg)
    if b.ndim == 1 or cfg.solver == "direct":
        x, stats = solve(LinearSystem(A, b), cfg.solver, cfg.tol)
    else:
        cols, res = [], []
        for j in range(b.shape[1]):
            xj, stats = solve(LinearSystem(A, b[:, j]), cfg.solver, cfg.tol)
            cols.append(xj)
            res.append(stats.residual)
        x = np.column_stack(cols)
        stats.residual = max(res)
    X = x if x.ndim == 2 else x[:, None]

    edeg = 2 * cfg.degree + 2 + cfg.quad_bump
    zero = np.zeros(space.num_dofs)
    sums = np.zeros(5)
    for j, c in enumerate(comps):
        sums += np.array([
            l2_error(space, X[:, j], c, edeg) ** 2,
            l2_error(space, zero, c, edeg) ** 2,
            h1_semi_error(space, X[:, j], c, edeg) ** 2,
            h1_semi_error(space, zero, c, edeg) ** 2,
            boundary_weighted_error(space, X[:, j], c, 1.0, edeg) ** 2,
        ])
    l2, l2u, h1, h1u, bnd = np.sqrt(sums)
    report = ErrorReport(l2, l2 / l2u if l2u else l2, h1, h1 / h1u if h1u else h1, bnd, stats.residual)
    return space, x, report, stats


def run_study(cfg: StudyConfig) -> StudyTable:
    """Build, assemble, solve and measure errors on every level of ``cfg.levels``."""
    lo, hi = cfg.levels
    raw = []
    for level in range(lo, hi + 1):
        t0 = time.perf_counter()
        try:
            space, x, rep, stats = solve_level(cfg, level)
        except Exception as exc:
            raise RuntimeError(f"level {level}: {exc}") from exc
        elapsed = time.perf_counter() - t0 if cfg.timing else 0.0
        log.info("level %d: %d dofs, L2 %.3e, H1 %.3e (%.2fs)", level, space.num_dofs, rep.l2_rel, rep.h1_rel, elapsed)
        raw.append((level, 2.0**-level, space.num_dofs, rep, elapsed))
    l2r = compute_rates([r[3].l2_rel for r in raw])
    h1r = compute_rates([r[3].h1_rel for r in raw])
    br = compute_rates([r[3].bnd_abs for r in raw])
    rows = [
        StudyRow(lv, h, n, rep.l2_rel, l2r[i], rep.h1_rel, h1r[i], rep.bnd_abs, br[i], rep.residual, el)
        for i, (lv, h, n, rep, el) in enumerate(raw)
    ]
    return StudyTable(rows, cfg, (space, x))


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def to_csv(table) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_fmt(getattr(row, c)) for c in table.columns])
    return buf.getvalue()


def read_csv(text: str) -> list[dict]:
    """Parse CSV written by :func:`emit`; blank cells become ``None``."""
    out = []
    for rec in csv.DictReader(io.StringIO(text)):
        row = {}
        for k, v in rec.items():
            if v == "":
                row[k] = None
            elif k in ("level", "dofs"):
                row[k] = int(v)
            else:
                row[k] = float(v)
        out.append(row)
    return out


def to_markdown(table) -> str:
    def sci(v):
        return "-" if v is None else f"{v:.2e}"

    def rate(v):
        return "-" if v is None else f"{v:.2f}"

    if isinstance(table, StudyTable):
        lines = [
            "| DOF | h | L2 error | Rate | H1 error | Rate | bnd error | Rate | residual |",
            "|---:|:---:|---:|---:|---:|---:|---:|---:|---:|",
        ]
        for r in table.rows:
            lines.append(
                f"| {r.dofs} | 2^-{r.level} | {sci(r.l2_rel)} | {rate(r.l2_rate)} | {sci(r.h1_rel)} | "
                f"{rate(r.h1_rate)} | {sci(r.bnd_abs)} | {rate(r.bnd_rate)} | {sci(r.residual)} |"
            )
        return "\n".join(lines) + "\n"
    cols = table.columns
    lines = ["| " + " | ".join(cols) + " |", "|" + "---:|" * len(cols)]
    for r in table.rows:
        cells = []
        for c in cols:
            v = getattr(r, c)
            cells.append(str(v) if isinstance(v, int) else (rate(v) if c.endswith("rate") else sci(v)))
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def emit(table, fmt: str = "csv", path=None) -> str:
    """Render ``table`` as CSV or Markdown, writing it to ``path`` when given."""
    if fmt == "csv":
        text = to_csv(table)
    elif fmt in ("markdown", "md"):
        text = to_markdown(table)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if path is not None:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text

