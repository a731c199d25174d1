"""Batch front end: problem files in, JSON reports and density tables out.

Problem file format (`key = value` lines, `#` comments):

    variables  = x1 x2
    objective  = x1 x2
    constraint = 1 - x1^2 >= 0        # repeatable
    constraint = 1 - x2^2 >= 0
    measure    = uniform_box          # or counting_hypercube, or omitted
    box        = -1 1 ; -1 1          # per-variable bounds, required for uniform_box
    orders     = 1..3
    tol        = 1e-8                 # optional solver tolerance override

The JSON report has one row per requested order with the full column set;
absent values are explicit nulls.  Exit code 0 iff every requested order
solved (NotCertified is not a failure).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .hierarchy import (LowerBoundResult, SweepRow, lower_bound,
                        min_relaxation_order, sandwich_sweep, upper_bound)
from .measures import CountingHypercube, ReferenceMeasure, UniformBox
from .momentmat import SemialgebraicSet
from .orthobasis import OrthoBasis, build_basis, cd_kernel
from .polyring import (PolyParseError, Polynomial, enumerate_basis,
                       parse_polynomial)
from .sdp import SdpOptions


class ProblemFileError(ValueError):
    """Parse or validation error with a 1-based line number."""

    def __init__(self, message: str, line: int, column: Optional[int] = None):
        loc = f"line {line}" + (f", column {column}" if column is not None else "")
        super().__init__(f"{message} ({loc})")
        self.line = line
        self.column = column


@dataclass
class ProblemFile:
    var_names: List[str]
    objective: Polynomial
    objective_text: str
    constraints: List[Polynomial]
    constraint_texts: List[str]
    measure: Optional[ReferenceMeasure]
    box: Optional[Tuple[Tuple[float, ...], Tuple[float, ...]]]
    orders: Tuple[int, int]
    tol: Optional[float] = None

    @property
    def n(self) -> int:
        return len(self.var_names)

    def semialgebraic_set(self) -> SemialgebraicSet:
        return SemialgebraicSet(self.n, tuple(self.constraints), box=self.box)

    def to_text(self) -> str:
        lines = [f"variables = {' '.join(self.var_names)}",
                 f"objective = {self.objective.to_string(self.var_names)}"]
        for g in self.constraints:
            lines.append(f"constraint = {g.to_string(self.var_names)} >= 0")
        if isinstance(self.measure, UniformBox):
            lines.append("measure = uniform_box")
        elif isinstance(self.measure, CountingHypercube):
            lines.append("measure = counting_hypercube")
        if self.box is not None:
            lines.append("box = " + " ; ".join(
                f"{lo:g} {hi:g}" for lo, hi in zip(self.box[0], self.box[1])))
        lines.append(f"orders = {self.orders[0]}..{self.orders[1]}")
        if self.tol is not None:
            lines.append(f"tol = {self.tol:g}")
        return "\n".join(lines) + "\n"


_SCALAR_KEYS = {"variables", "objective", "measure", "box", "orders", "tol"}


def parse_problem(text: str) -> ProblemFile:
    """Parse and validate a problem file; see the module docstring for syntax."""
    raw: Dict[str, Tuple[str, int]] = {}
    constraint_lines: List[Tuple[str, int]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ProblemFileError("expected 'key = value'", lineno)
        key, _, value = body.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if key == "constraint":
            constraint_lines.append((value, lineno))
            continue
        if key not in _SCALAR_KEYS:
            raise ProblemFileError(f"unknown key {key!r}", lineno)
        if key in raw:
            raise ProblemFileError(f"duplicate key {key!r}", lineno)
        raw[key] = (value, lineno)

    if "variables" not in raw:
        raise ProblemFileError("missing 'variables'", 1)
    var_names = raw["variables"][0].split()
    if not var_names or len(set(var_names)) != len(var_names):
        raise ProblemFileError("variables must be distinct non-empty names",
                               raw["variables"][1])
    n = len(var_names)

    def parse_poly_at(txt: str, lineno: int) -> Polynomial:
        try:
            return parse_polynomial(txt, var_names)
        except PolyParseError as exc:
            raise ProblemFileError(str(exc).rsplit(" (column", 1)[0], lineno,
                                   exc.column)

    if "objective" not in raw:
        raise ProblemFileError("missing 'objective'", 1)
    obj_text, obj_line = raw["objective"]
    objective = parse_poly_at(obj_text, obj_line)

    constraints: List[Polynomial] = []
    constraint_texts: List[str] = []
    for ctext, lineno in constraint_lines:
        body = ctext
        if ">=" in body:
            lhs, _, rhs = body.partition(">=")
            if rhs.strip() != "0":
                raise ProblemFileError("constraints must end in '>= 0'", lineno)
            body = lhs.strip()
        constraints.append(parse_poly_at(body, lineno))
        constraint_texts.append(body)

    box = None
    if "box" in raw:
        btext, bline = raw["box"]
        parts = [p.strip() for p in btext.split(";")]
        if len(parts) != n:
            raise ProblemFileError(
                f"box declares {len(parts)} coordinate ranges for {n} variables", bline)
        lo, hi = [], []
        for p in parts:
            vals = p.split()
            if len(vals) != 2:
                raise ProblemFileError("each box range needs 'lo hi'", bline)
            try:
                a, b = float(vals[0]), float(vals[1])
            except ValueError:
                raise ProblemFileError(f"bad box bound in {p!r}", bline)
            if a >= b:
                raise ProblemFileError("box bounds must satisfy lo < hi", bline)
            lo.append(a)
            hi.append(b)
        box = (tuple(lo), tuple(hi))

    measure: Optional[ReferenceMeasure] = None
    if "measure" in raw:
        mtext, mline = raw["measure"]
        kind = mtext.strip().lower()
        if kind == "uniform_box":
            if box is None:
                raise ProblemFileError("measure uniform_box requires a 'box' line", mline)
            measure = UniformBox(box[0], box[1])
        elif kind == "counting_hypercube":
            measure = CountingHypercube(n)
        else:
            raise ProblemFileError(f"unknown measure kind {mtext!r}", mline)

    if "orders" not in raw:
        raise ProblemFileError("missing 'orders'", 1)
    otext, oline = raw["orders"]
    try:
        if ".." in otext:
            a, b = otext.split("..")
            orders = (int(a), int(b))
        else:
            orders = (int(otext), int(otext))
    except ValueError:
        raise ProblemFileError(f"bad orders value {otext!r} (want 'a..b')", oline)
    if orders[0] < 1 or orders[1] < orders[0]:
        raise ProblemFileError("orders must satisfy 1 <= a <= b", oline)

    tol = None
    if "tol" in raw:
        ttext, tline = raw["tol"]
        try:
            tol = float(ttext)
        except ValueError:
            raise ProblemFileError(f"bad tolerance {ttext!r}", tline)
        if tol <= 0:
            raise ProblemFileError("tolerance must be positive", tline)

    return ProblemFile(var_names=var_names, objective=objective,
                       objective_text=obj_text, constraints=constraints,
                       constraint_texts=constraint_texts, measure=measure,
                       box=box, orders=orders, tol=tol)


# ---------------------------------------------------------------------------
# Running a problem and serializing the report.
# ---------------------------------------------------------------------------

@dataclass
class RunReport:
    problem: ProblemFile
    rows: List[SweepRow]
    density_order: Optional[int] = None

    def density_row(self) -> Optional[SweepRow]:
        if self.density_order is None:
            return None
        for row in self.rows:
            if row.t == self.density_order:
                return row
        return None

    def to_dict(self) -> dict:
        pf = self.problem
        rows_out = []
        for row in self.rows:
            r: dict = {"t": row.t, "rho": None, "u": row.u, "gap": row.gap,
                       "status": "ok", "exactness": None, "minimizers": None,
                       "christoffel": None, "sigma": None,
                       "lower_error": row.lower_error,
                       "upper_error": row.upper_error,
                       "solver": None, "certificate_residual": None,
                       "density_error": None}
            if row.lower_error is not None and row.upper_error is not None:
                r["status"] = "failed"
            elif row.lower_error is not None or row.upper_error is not None:
                r["status"] = "partial"
            lb = row.lower
            if lb is not None:
                r["rho"] = lb.rho
                ex = lb.extraction
                if ex is not None and ex.certified:
                    r["exactness"] = "certified"
                    r["minimizers"] = [{"point": list(xi), "value": fv}
                                       for xi, fv in ex.minimizers]
                    if lb.density_basis is not None:
                        r["christoffel"] = [
                            {"point": list(xi),
                             "value": 1.0 / cd_kernel(lb.density_basis, xi, xi)}
                            for xi, _ in ex.minimizers]
                else:
                    r["exactness"] = "not_certified"
                if lb.sigma is not None:
                    r["sigma"] = [float(v) for v in lb.sigma]
                r["density_error"] = lb.density_error
                r["certificate_residual"] = lb.certificate.residual(lb.f)
                r["solver"] = {"iterations": lb.solution.iterations,
                               "gap": lb.solution.gap,
                               "primal_residual": lb.solution.primal_residual,
                               "dual_residual": lb.solution.dual_residual}
            rows_out.append(r)
        basis_labels = None
        if self.density_order is not None:
            b2t = enumerate_basis(pf.n, 2 * self.density_order)
            basis_labels = [list(a) for a in b2t]
        return {
            "problem": {
                "variables": pf.var_names,
                "objective": pf.objective.to_string(pf.var_names),
                "constraints": [g.to_string(pf.var_names) + " >= 0"
                                for g in pf.constraints],
                "measure": (None if pf.measure is None else
                            type(pf.measure).__name__),
                "box": (None if pf.box is None else
                        [list(pf.box[0]), list(pf.box[1])]),
                "orders": list(pf.orders),
            },
            "rows": rows_out,
            "density_order": self.density_order,
            "density_basis_labels": basis_labels,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @property
    def all_solved(self) -> bool:
        return all(row.lower_error is None and
                   (self.problem.measure is None or row.upper_error is None)
                   for row in self.rows)


def _pick_density_order(rows: Sequence[SweepRow]) -> Optional[int]:
    """Prefer the first certified order with a density, else the last with one."""
    with_density = [row for row in rows
                    if row.lower is not None and row.lower.sigma is not None]
    if not with_density:
        return None
    for row in with_density:
        ex = row.lower.extraction
        if ex is not None and ex.certified:
            return row.t
    return with_density[-1].t


def run(pf: ProblemFile, max_order: Optional[int] = None,
        tol: Optional[float] = None) -> RunReport:
    """Run the sandwich sweep over the requested orders and build the report."""
    B = pf.semialgebraic_set()
    f = pf.objective
    t_lo, t_hi = pf.orders
    if max_order is not None:
        t_hi = min(t_hi, max_order)
    t_lo = max(t_lo, min_relaxation_order(f, B))
    eff_tol = tol if tol is not None else pf.tol
    opts = SdpOptions(tol=eff_tol) if eff_tol is not None else None

    threads = int(os.environ.get("CDMOS_THREADS", "1"))
    orders = list(range(t_lo, t_hi + 1))
    if threads > 1 and len(orders) > 1:
        def one(t):
            return sandwich_sweep(f, B, pf.measure, t, t_min=t, opts=opts)[0]
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, orders))
    else:
        rows = sandwich_sweep(f, B, pf.measure, t_hi, t_min=t_lo, opts=opts)
    return RunReport(problem=pf, rows=rows,
                     density_order=_pick_density_order(rows))


def sample_density(report: RunReport, grid_n: int) -> List[dict]:
    """Evaluate the signed density and diagonal kernel on a regular grid.

    Returns row dicts; raises ProblemFileError-style ValueError when the run
    produced no density (no measure, or no orthonormal basis at degree 2t).
    """
    row = report.density_row()
    if row is None or row.lower is None or row.lower.sigma is None:
        raise ValueError("density unavailable: no reconstructed density in report")
    lb = row.lower
    basis = lb.density_basis
    pf = report.problem
    if pf.box is not None:
        lo, hi = pf.box
    elif isinstance(pf.measure, CountingHypercube):
        lo = (-1.0,) * pf.n
        hi = (1.0,) * pf.n
    else:
        raise ValueError("density unavailable: no box to sample over")
    axes = [np.linspace(a, b, grid_n) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    from .orthobasis import ortho_expansion_poly
    sigma_poly = ortho_expansion_poly(lb.sigma, basis)
    out = []
    for p in pts:
        x = tuple(float(v) for v in p)
        out.append({"x": list(x),
                    "sigma": sigma_poly(x),
                    "kernel_diag": cd_kernel(basis, x, x)})
    return out


def density_csv(rows: List[dict], n: int) -> str:
    header = ",".join([f"x{i+1}" for i in range(n)] + ["sigma", "kernel_diag"])
    lines = [header]
    for r in rows:
        lines.append(",".join([repr(v) for v in r["x"]] +
                              [repr(r["sigma"]), repr(r["kernel_diag"])]))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Command-line entry points.
# ---------------------------------------------------------------------------

def _cmd_solve(args) -> int:
    try:
        with open(args.file, "r") as fh:
            pf = parse_problem(fh.read())
    except (OSError, ProblemFileError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = run(pf, max_order=args.max_order, tol=args.tol)
    payload = report.to_json()
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(payload)
    else:
        sys.stdout.write(payload)
    if args.density_grid:
        try:
            rows = sample_density(report, args.density_grid)
        except ValueError as exc:
            print(f"density unavailable: {exc}", file=sys.stderr)
        else:
            csv = density_csv(rows, pf.n)
            if args.density_out:
                with open(args.density_out, "w") as fh:
                    fh.write(csv)
            else:
                sys.stdout.write(csv)
    return 0 if report.all_solved else 1


def _parse_measure_arg(kind: str, dim: int, lo: float, hi: float) -> ReferenceMeasure:
    kind = kind.lower()
    if kind == "uniform_box":
        return UniformBox((lo,) * dim, (hi,) * dim)
    if kind == "counting_hypercube":
        return CountingHypercube(dim)
    raise ValueError(f"unknown measure kind {kind!r}")


def _cmd_basis(args) -> int:
    try:
        measure = _parse_measure_arg(args.measure, args.dim, args.lo, args.hi)
        basis = build_basis(measure, args.t)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if isinstance(measure, UniformBox):
        lo, hi = measure.lo, measure.hi
    else:
        lo = (-1.0,) * measure.n
        hi = (1.0,) * measure.n
    axes = [np.linspace(a, b, args.grid) for a, b in zip(lo, hi)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    samples = [{"x": [float(v) for v in p],
                "kernel_diag": cd_kernel(basis, p, p)} for p in pts]
    if args.format == "json":
        doc = {"measure": type(measure).__name__, "t": args.t,
               "exponents": [list(a) for a in basis.basis],
               "coefficients": [[float(v) for v in row] for row in basis.D],
               "kernel_diag_samples": samples}
        sys.stdout.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    else:
        labels = ["".join(str(a) for a in alpha) for alpha in basis.basis]
        sys.stdout.write("alpha," + ",".join(labels) + "\n")
        for i, alpha in enumerate(basis.basis):
            sys.stdout.write(labels[i] + "," +
                             ",".join(repr(float(v)) for v in basis.D[i]) + "\n")
        sys.stdout.write("x,kernel_diag\n")
        for s in samples:
            sys.stdout.write(" ".join(repr(v) for v in s["x"]) + "," +
                             repr(s["kernel_diag"]) + "\n")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="cdmos",
        description="Moment-SOS bounds with Christoffel-Darboux density "
                    "reconstruction")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run the hierarchies on a problem file")
    p_solve.add_argument("file")
    p_solve.add_argument("--json", help="write the JSON report here instead of stdout")
    p_solve.add_argument("--density-grid", type=int, default=0, metavar="N",
                         help="sample the signed density on an N-point grid per axis")
    p_solve.add_argument("--density-out", help="write the density CSV here")
    p_solve.add_argument("--tol", type=float, help="solver tolerance override")
    p_solve.add_argument("--max-order", type=int, help="cap the relaxation order")
    p_solve.set_defaults(func=_cmd_solve)

    p_basis = sub.add_parser("basis", help="print an orthonormal basis table")
    p_basis.add_argument("measure", help="uniform_box or counting_hypercube")
    p_basis.add_argument("t", type=int)
    p_basis.add_argument("--dim", type=int, default=1)
    p_basis.add_argument("--lo", type=float, default=-1.0)
    p_basis.add_argument("--hi", type=float, default=1.0)
    p_basis.add_argument("--grid", type=int, default=5)
    p_basis.add_argument("--format", choices=["csv", "json"], default="json")
    p_basis.set_defaults(func=_cmd_basis)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
