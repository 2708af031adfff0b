"""Batch experiments: iteration-count sweeps, coarsening accuracy and tables.

A sweep is described by an :class:`ExperimentConfig` (usually read from a
JSON document) and produces one :class:`ResultRow` per combination of
``n``, ``m`` and inside coefficient.  Rows are written as a flat CSV with a
fixed column order, or pivoted into an ``m x n`` markdown table.
"""
from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import asdict, dataclass, field, fields
from itertools import product
from pathlib import Path

import numpy as np

from .assembly import assemble, assemble_rhs
from .coarsening import (coarsened_interface_solve,
                         coarsened_system, exact_interface_solve, face_leaves,
                         face_prolongation, graded_prolongation,
                         vertex_prolongation)
from .dofmap import ELASTICITY, MAXWELL, build_dofmap
from .mesh import JumpRegion, build_grid, jump_coefficient
from .sets import build_decomposition_sets, strictly_inside
from .sparse import extract_principal_submatrix, factorize, operator_symmetry_check, pcg
from .substructuring import setup_B1, setup_B2

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ResultRow",
    "TwoCubeRow",
    "CSV_COLUMNS",
    "PRECONDITIONERS",
    "DEFAULT_SOLUTION",
    "run_experiment",
    "run_single",
    "run_table13_experiment",
    "coarsening_rows",
    "emit_table",
    "format_table",
    "read_results_csv",
]

PRECONDITIONERS = ("b1", "b2", "none", "exact-interface-b2")
JUMPS = ("none", "choice1", "choice2")
DEFAULT_SOLUTION = {ELASTICITY: "elasticity-poly", MAXWELL: "maxwell-mixed"}
CSV_COLUMNS = ("problem", "precond", "n", "m", "jump", "coeff_inside", "iterations",
               "converged", "final_residual", "dofs_total", "setup_s", "solve_s")


class ConfigError(ValueError):
    """Invalid experiment description."""


def _int_list(value, name) -> tuple[int, ...]:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        value = [value]
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    try:
        out = tuple(int(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a list of integers, got {value!r}") from None
    if not out:
        raise ConfigError(f"{name} must not be empty")
    return out


def _float_list(value, name) -> tuple[float, ...]:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    if isinstance(value, str):
        value = [v for v in value.split(",") if v.strip()]
    try:
        out = tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a list of numbers, got {value!r}") from None
    if not out:
        raise ConfigError(f"{name} must not be empty")
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep of PCG solves.

    Attributes
    ----------
    problem : {"elasticity", "maxwell"}
    preconditioner : {"b1", "b2", "none", "exact-interface-b2"}
    n, m : tuple of int
        Subdomains per axis and fine cells per subdomain per axis.
    jump : {"none", "choice1", "choice2"}
    coefficients : tuple of float
        Coefficient values on the jump region (both coefficients of the
        bilinear form take the value).  Ignored when ``jump == "none"``.
    seed : int
        Seed of the randomized symmetry probe run when ``check`` is set.
    """

    problem: str
    preconditioner: str = "b1"
    n: tuple = (4,)
    m: tuple = (8,)
    jump: str = "none"
    coefficients: tuple = (1.0,)
    tol: float = 1e-6
    max_iter: int = 500
    output: str | None = None
    seed: int = 0
    check: bool = False

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "problem", str(self.problem).lower())
        set_(self, "preconditioner", str(self.preconditioner).lower())
        set_(self, "jump", str(self.jump).lower())
        set_(self, "n", _int_list(self.n, "n"))
        set_(self, "m", _int_list(self.m, "m"))
        set_(self, "coefficients", _float_list(self.coefficients, "coefficients"))
        if self.problem not in (ELASTICITY, MAXWELL):
            raise ConfigError(f"unknown problem {self.problem!r}")
        if self.preconditioner not in PRECONDITIONERS:
            raise ConfigError(f"unknown preconditioner {self.preconditioner!r}; "
                              f"choose from {', '.join(PRECONDITIONERS)}")
        if self.jump not in JUMPS:
            raise ConfigError(f"unknown jump region {self.jump!r}")
        if not 0.0 < float(self.tol) < 1.0:
            raise ConfigError("tol must lie in (0, 1)")
        if int(self.max_iter) < 1:
            raise ConfigError("max_iter must be positive")
        if any(c <= 0 for c in self.coefficients):
            raise ConfigError("coefficients must be positive")
        for n in self.n:
            if n < 2:
                raise ConfigError("n must be at least 2")
            if self.jump != "none" and n % 4:
                raise ConfigError(f"jump regions need n divisible by 4, got n={n}")
        for m in self.m:
            if m < 2 or m % 2:
                raise ConfigError("m must be even and at least 2")

    _ALIASES = {"precond": "preconditioner", "coeff_inside": "coefficients", "out": "output"}

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        names = {f.name for f in fields(cls)}
        kw = {}
        for key, value in data.items():
            key = cls._ALIASES.get(key, key)
            if key not in names:
                raise ConfigError(f"unknown config field {key!r}")
            kw[key] = value
        if "problem" not in kw:
            raise ConfigError("config needs a 'problem' field")
        try:
            return cls(**kw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n"], d["m"], d["coefficients"] = list(self.n), list(self.m), list(self.coefficients)
        return d

    def cases(self):
        """``(n, m, coefficient)`` combinations in run order."""
        coeffs = self.coefficients if self.jump != "none" else (1.0,)
        return list(product(self.n, self.m, coeffs))


@dataclass
class ResultRow:
    """Outcome of one PCG solve.

    The first twelve fields are the CSV columns.  ``extras`` carries
    diagnostics (per-subdomain dofs, coarsening ratios, symmetry probe) that
    are not serialized and do not take part in equality.
    """

    problem: str
    precond: str
    n: int
    m: int
    jump: str
    coeff_inside: float
    iterations: int
    converged: bool
    final_residual: float
    dofs_total: int
    setup_s: float = field(default=0.0, compare=False)
    solve_s: float = field(default=0.0, compare=False)
    extras: dict = field(default_factory=dict, compare=False, repr=False)

    def as_record(self) -> dict:
        return {c: getattr(self, c) for c in CSV_COLUMNS}


def _coefficient_field(grid, jump: str, value: float):
    if jump == "none":
        return None
    return jump_coefficient(grid, JumpRegion.parse(jump), value)


def run_single(problem: str, precond: str, n: int, m: int, jump: str = "none",
               coeff_inside: float = 1.0, tol: float = 1e-6, max_iter: int = 500,
               check: bool = False, seed: int = 0) -> ResultRow:
    """Assemble, set up the preconditioner and run PCG for one case."""
    grid = build_grid(n, m)
    dofmap = build_dofmap(problem, grid)
    A = assemble(dofmap, _coefficient_field(grid, jump, coeff_inside))
    b = assemble_rhs(dofmap, DEFAULT_SOLUTION[problem])
    extras = {}
    t0 = time.perf_counter()
    prec = None
    if precond != "none":
        sets = build_decomposition_sets(grid, dofmap)
        if precond == "b1":
            prec = setup_B1(A, grid, dofmap, sets)
        else:
            prec = setup_B2(A, grid, dofmap, sets, coarsen=(precond == "b2"))
            ratios = [r["ratio"] for r in prec.coarsening_rows()]
            extras["coarsened_ratio_max"] = max(ratios) if ratios else 1.0
        extras["dofs_per_subdomain"] = max(d.size for d in sets.subdomain_interior)
        extras.update(prec.info)
    setup_s = time.perf_counter() - t0
    if check and prec is not None:
        extras["asymmetry"], extras["min_rayleigh"] = operator_symmetry_check(
            prec.apply, A.shape[0], seed=seed)
    t0 = time.perf_counter()
    _, rep = pcg(A, b, prec, tol=tol, max_iter=max_iter)
    solve_s = time.perf_counter() - t0
    extras["history"] = rep.history
    return ResultRow(problem, precond, n, m, jump, float(coeff_inside if jump != "none" else 1.0),
                     rep.iterations, rep.converged, rep.final_residual, A.shape[0],
                     setup_s, solve_s, extras)


def run_experiment(config: ExperimentConfig, path=None, log=None) -> list[ResultRow]:
    """Run every case of ``config``; write the flat CSV to ``path`` or ``config.output``.

    Non-convergence is recorded in the row.  ``log`` receives one line per
    finished case when given.
    """
    rows = []
    for n, m, c in config.cases():
        row = run_single(config.problem, config.preconditioner, n, m, config.jump, c,
                         config.tol, config.max_iter, config.check, config.seed)
        rows.append(row)
        if log is not None:
            log(f"{row.problem} {row.precond} n={n} m={m} jump={row.jump} "
                f"coeff={row.coeff_inside:g}: {row.iterations} iterations"
                + ("" if row.converged else " (not converged)"))
    out = path or config.output
    if out:
        emit_table(rows, "flat-csv", out)
    return rows


# ------------------------------------------------------------------ tables


def _csv_text(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        rec = r.as_record()
        rec["coeff_inside"] = repr(float(rec["coeff_inside"]))
        rec["final_residual"] = repr(float(rec["final_residual"]))
        rec["setup_s"] = f"{rec['setup_s']:.3f}"
        rec["solve_s"] = f"{rec['solve_s']:.3f}"
        rec["converged"] = "true" if rec["converged"] else "false"
        w.writerow([rec[c] for c in CSV_COLUMNS])
    return buf.getvalue()


def _pivot_text(rows) -> str:
    fam = {(r.problem, r.precond, r.jump, r.coeff_inside) for r in rows}
    if len(fam) > 1:
        raise ValueError("paper-style layout needs rows of one family "
                         "(same problem, preconditioner, jump and coefficient)")
    if not rows:
        return ""
    problem, precond, jump, coeff = fam.pop()
    ms = sorted({r.m for r in rows})
    ns = sorted({r.n for r in rows})
    cell = {}
    for r in rows:
        cell[(r.m, r.n)] = f"{r.iterations}" + ("" if r.converged else "*")
    title = f"{problem}, {precond}, jump={jump}"
    if jump != "none":
        title += f", coefficient {coeff:g}"
    lines = [f"<!-- {title} -->",
             "| m \\ n | " + " | ".join(str(n) for n in ns) + " |",
             "|---" * (len(ns) + 1) + "|"]
    for m in ms:
        lines.append(f"| {m} | " + " | ".join(cell.get((m, n), "") for n in ns) + " |")
    return "\n".join(lines) + "\n"


def format_table(rows, layout: str = "flat-csv") -> str:
    """Render rows as a flat CSV or an ``m x n`` markdown pivot.

    In the pivot a ``*`` marks a run that hit the iteration limit.
    """
    rows = list(rows)
    if layout == "flat-csv":
        return _csv_text(rows)
    if layout == "paper-style":
        return _pivot_text(rows)
    raise ValueError(f"unknown layout {layout!r}")


def emit_table(rows, layout: str = "flat-csv", path=None) -> str:
    """:func:`format_table`, also written to ``path`` when given."""
    text = format_table(rows, layout)
    if path is not None:
        Path(path).write_text(text)
    return text


def read_results_csv(path_or_text) -> list[ResultRow]:
    """Parse a flat CSV written by :func:`emit_table`."""
    text = str(path_or_text)
    if "\n" not in text:
        text = Path(text).read_text()
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or tuple(reader.fieldnames) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    rows = []
    for rec in reader:
        rows.append(ResultRow(
            rec["problem"], rec["precond"], int(rec["n"]), int(rec["m"]), rec["jump"],
            float(rec["coeff_inside"]), int(rec["iterations"]),
            rec["converged"].strip().lower() == "true", float(rec["final_residual"]),
            int(rec["dofs_total"]), float(rec["setup_s"]), float(rec["solve_s"])))
    return rows


# ------------------------------------------------------- coarsening studies


@dataclass(frozen=True)
class TwoCubeRow:
    """Interface error of the graded local solve on two unit cubes."""

    problem: str
    cells: int
    h: float
    error: float
    kept: int
    full: int

    @property
    def ratio(self) -> float:
        return self.kept / self.full


def run_table13_experiment(problem: str, cells=(8, 16), split: float = 1.0) -> list[TwoCubeRow]:
    """Two-subdomain coarsening accuracy on ``[0,2] x [0,1]^2``.

    For each ``M`` in ``cells`` (``h = 1/M``) the two unit cubes share the
    face ``x = 1``.  The face load is the residual left after the two
    subdomain interior solves of the manufactured load, as in the second
    preconditioner.  The error is the relative l2 distance between the face
    values of the graded solve and of the full local solve.
    """
    out = []
    for M in cells:
        M = int(M)
        dm = build_dofmap(problem, (2 * M, M, M), 1.0 / M)
        A = assemble(dm)
        g = assemble_rhs(dm, DEFAULT_SOLUTION[problem])
        system = np.arange(dm.num_free)
        mid2 = dm.mid2
        face = system[mid2[:, 0] == 2 * M]
        r = g.copy()
        for lo in ((0, 0, 0), (M, 0, 0)):
            lo = np.asarray(lo)
            inner = system[strictly_inside(dm, system, lo, lo + M)]
            f = factorize(extract_principal_submatrix(A, inner))
            u = np.zeros_like(g)
            u[inner] = f.solve(g[inner])
            r -= A @ u
        b_f = r[face]
        X = exact_interface_solve(A, system, face, b_f)
        leaves = face_leaves(M, 0, (0, 0, 0), split)
        gp = graded_prolongation(dm, leaves, system, face)
        At = coarsened_system(A, gp)
        Xt = coarsened_interface_solve(factorize(At), At.shape[0], gp.interface_cols, b_f)
        err = float(np.linalg.norm(Xt - X) / np.linalg.norm(X))
        out.append(TwoCubeRow(problem, M, 1.0 / M, err, gp.kept_count, gp.full_count))
    return out


def coarsening_rows(problem: str, m_values=(8, 16, 32), split: float = 1.0) -> list[dict]:
    """Kept/full dof counts of one face solver and one vertex solver per ``m``.

    Uses the interior face and the interior vertex of a ``2 x 2 x 2`` grid,
    whose local problems have the same size as those of any larger grid.
    """
    rows = []
    for m in m_values:
        grid = build_grid(2, int(m))
        dm = build_dofmap(problem, grid)
        sets = build_decomposition_sets(grid, dm)
        f = sets.faces[0]
        v = (1, 1, 1)
        for kind, gp in (("face", face_prolongation(grid, dm, sets, f, True, split)),
                         ("vertex", vertex_prolongation(grid, dm, sets, v, True, split))):
            rows.append(dict(problem=problem, m=int(m), solver=f"{kind}{f if kind == 'face' else v}",
                             kind=kind, kept=gp.kept_count, full=gp.full_count, ratio=gp.ratio))
    return rows
