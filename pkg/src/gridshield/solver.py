"""MILP solver orchestration behind a file-level, solver-agnostic boundary.

Every solve writes the model to MPS in a private workspace first; that file is
the audit artifact and what external solvers consume. Three adapters share the
interface:

* ``scipy``  - linked HiGHS via scipy.optimize.milp (default, no binary needed)
* ``cbc``    - COIN-OR CBC executable, CBC solution-file dialect
* ``highs``  - HiGHS executable, HiGHS solution-file dialect

External executables are located via --solver/-config, the GRIDSHIELD_SOLVER
environment variable, or PATH. Whatever produced the numbers, the driver
re-verifies them: the point must pass the model's own feasibility audit and the
recomputed objective must match the reported one to 1e-6 relative; a failure
there flags a writer/parser bug, not a solver bug.
"""

from __future__ import annotations

import os
import shutil
import subprocess
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.optimize as sopt
import scipy.sparse as sp

from .errors import SolutionParseError, SolverError
from .milp import ModelIR, Solution

ENV_SOLVER = "GRIDSHIELD_SOLVER"
_VERIFY_TOL = 1e-6


@dataclass
class SolverConfig:
    solver_id: str = "scipy"
    mip_gap: float = 1e-4
    time_limit_s: float = 900.0
    threads: int = 0
    solution_file_format: str = "auto"  # auto | cbc | highs
    executable: str | None = None
    keep_files: bool = False

    def __post_init__(self):
        if not (0.0 < self.mip_gap < 1.0):
            raise SolverError(f"mip_gap must be in (0, 1), got {self.mip_gap}")
        if self.time_limit_s <= 0:
            raise SolverError(f"time_limit_s must be > 0, got {self.time_limit_s}")


@dataclass
class ParsedSolution:
    values: np.ndarray
    warnings: list[str]
    objective: float | None
    status_hint: str | None


def solve(model: ModelIR, cfg: SolverConfig | None = None,
          workspace: str | None = None) -> Solution:
    """Solve a model and return a verified Solution.

    The workspace (with model.mps and any solver files) is deleted on success
    unless cfg.keep_files is set, and always retained on failure for debugging.
    """
    cfg = cfg or SolverConfig()
    own_workspace = workspace is None
    wdir = Path(workspace) if workspace else Path(tempfile.mkdtemp(prefix="gridshield-"))
    wdir.mkdir(parents=True, exist_ok=True)
    mps_path = wdir / "model.mps"
    model.write_mps(mps_path)
    try:
        if cfg.solver_id == "scipy":
            sol = _solve_scipy(model, cfg)
        else:
            sol = _solve_external(model, cfg, wdir, mps_path)
        _verify(model, sol)
    except Exception:
        # leave the workspace in place for post-mortem
        raise
    else:
        if own_workspace and not cfg.keep_files:
            shutil.rmtree(wdir, ignore_errors=True)
        return sol


def _verify(model: ModelIR, sol: Solution) -> None:
    if sol.status not in ("optimal", "feasible-gap") or sol.values is None:
        return
    violations = model.check_point(sol.values, tol=_VERIFY_TOL)
    if violations:
        worst = max(violations, key=lambda v: v.amount / v.scale)
        raise SolverError(
            f"solution fails feasibility audit ({len(violations)} violations; "
            f"worst: {worst}) - suspect a writer or parser bug")
    recomputed = model.objective_at(sol.values)
    denom = max(1.0, abs(recomputed))
    if abs(recomputed - sol.objective_value) / denom > _VERIFY_TOL:
        raise SolverError(
            f"reported objective {sol.objective_value!r} disagrees with recomputed "
            f"{recomputed!r} beyond {_VERIFY_TOL} relative")
    # trust the recomputation: it is derived from the model, not the report
    sol.objective_value = recomputed


# -- linked adapter ------------------------------------------------------------


def _solve_scipy(model: ModelIR, cfg: SolverConfig) -> Solution:
    t0 = time.monotonic()
    n = model.num_vars
    c = model.objective_vector()
    lo, hi = model.bounds_arrays()
    integrality = np.zeros(n)
    for i in model.binary_indices():
        integrality[i] = 1
    constraints = []
    if model.rows:
        data, rows_i, cols_i, lbs, ubs = [], [], [], [], []
        for r, (_, idxs, coefs, sense, rhs) in enumerate(model.rows):
            for j, cf in zip(idxs, coefs):
                rows_i.append(r)
                cols_i.append(j)
                data.append(cf)
            if sense == "<=":
                lbs.append(-np.inf)
                ubs.append(rhs)
            elif sense == ">=":
                lbs.append(rhs)
                ubs.append(np.inf)
            else:
                lbs.append(rhs)
                ubs.append(rhs)
        a = sp.csr_matrix((data, (rows_i, cols_i)), shape=(model.num_rows, n))
        constraints = [sopt.LinearConstraint(a, np.array(lbs), np.array(ubs))]
    res = sopt.milp(
        c=c, constraints=constraints, integrality=integrality,
        bounds=sopt.Bounds(lo, hi),
        options={"disp": False, "presolve": True,
                 "mip_rel_gap": cfg.mip_gap, "time_limit": cfg.time_limit_s},
    )
    elapsed = time.monotonic() - t0
    if res.status == 0:
        status = "optimal"
    elif res.status == 1:
        status = "feasible-gap" if res.x is not None else "error"
    elif res.status == 2:
        status = "infeasible"
    elif res.status == 3:
        status = "unbounded"
    else:
        status = "error"
    values = np.asarray(res.x, dtype=float) if res.x is not None else None
    objective = model.objective_at(values) if values is not None else float("nan")
    gap = float(getattr(res, "mip_gap", 0.0) or 0.0)
    return Solution(status=status, objective_value=objective, values=values,
                    gap=gap, solve_seconds=elapsed, solver_id="scipy",
                    message=str(res.message))


# -- external adapters ---------------------------------------------------------


def _resolve_executable(cfg: SolverConfig) -> str:
    exe = cfg.executable or os.environ.get(ENV_SOLVER) or shutil.which(cfg.solver_id)
    if not exe or not (Path(exe).exists() or shutil.which(exe)):
        raise SolverError(
            f"solver executable for {cfg.solver_id!r} not found "
            f"(set --solver-path or ${ENV_SOLVER})")
    return exe


def external_command(cfg: SolverConfig, exe: str, mps_path: Path,
                     sol_path: Path, opts_path: Path) -> list[str]:
    """Command line for one external solve; exposed separately for testing."""
    if cfg.solver_id == "cbc":
        cmd = [exe, str(mps_path), "-ratioGap", str(cfg.mip_gap),
               "-seconds", str(cfg.time_limit_s)]
        if cfg.threads:
            cmd += ["-threads", str(cfg.threads)]
        cmd += ["solve", "-solution", str(sol_path)]
        return cmd
    if cfg.solver_id == "highs":
        opts = [f"mip_rel_gap = {cfg.mip_gap}", f"time_limit = {cfg.time_limit_s}"]
        if cfg.threads:
            opts.append(f"threads = {cfg.threads}")
        opts_path.write_text("\n".join(opts) + "\n")
        return [exe, "--options_file", str(opts_path),
                "--solution_file", str(sol_path), str(mps_path)]
    raise SolverError(f"unknown solver_id {cfg.solver_id!r}")


def _solve_external(model: ModelIR, cfg: SolverConfig, wdir: Path,
                    mps_path: Path) -> Solution:
    exe = _resolve_executable(cfg)
    sol_path = wdir / "solution.txt"
    opts_path = wdir / "solver-options.txt"
    cmd = external_command(cfg, exe, mps_path, sol_path, opts_path)
    t0 = time.monotonic()
    proc = subprocess.run(cmd, capture_output=True, text=True,
                          timeout=cfg.time_limit_s * 2 + 60)
    elapsed = time.monotonic() - t0
    if proc.returncode != 0 and not sol_path.exists():
        raise SolverError(
            f"{cfg.solver_id} exited with {proc.returncode}; stderr: "
            f"{proc.stderr.strip()[:500]}")
    if not sol_path.exists():
        raise SolverError(f"{cfg.solver_id} produced no solution file at {sol_path}")
    fmt = cfg.solution_file_format
    if fmt == "auto":
        fmt = cfg.solver_id
    parsed = parse_solution_file(sol_path, fmt, model)
    status = parsed.status_hint or "error"
    if status in ("infeasible", "unbounded", "error"):
        return Solution(status=status, objective_value=float("nan"), values=None,
                        gap=float("nan"), solve_seconds=elapsed,
                        solver_id=cfg.solver_id, message=proc.stdout[-500:])
    objective = model.objective_at(parsed.values)
    return Solution(status=status, objective_value=objective, values=parsed.values,
                    gap=cfg.mip_gap, solve_seconds=elapsed, solver_id=cfg.solver_id,
                    message="; ".join(parsed.warnings))


def parse_solution_file(path, fmt: str, model: ModelIR) -> ParsedSolution:
    """Read a solver solution file into a full value vector.

    Variables absent from the file default to 0 with a warning (the usual
    sparse-solution convention); duplicated entries and unknown names are
    malformed. If the file carries an objective, it is cross-checked against
    the recomputed value and a discrepancy beyond 1e-6 relative is warned."""
    text = Path(path).read_text()
    if fmt == "cbc":
        named, objective, status = _parse_cbc(text)
    elif fmt == "highs":
        named, objective, status = _parse_highs(text)
    else:
        raise SolutionParseError(f"unknown solution file format {fmt!r}")
    warnings: list[str] = []
    values = np.zeros(model.num_vars)
    index = {name: i for i, name in enumerate(model.var_names)}
    missing = set(index) - set(named)
    for name, val in named.items():
        if name not in index:
            raise SolutionParseError(f"{path}: unknown variable {name!r}")
        values[index[name]] = val
    if missing:
        sample = ", ".join(sorted(missing)[:3])
        warnings.append(f"{len(missing)} variables missing from solution file, "
                        f"defaulted to 0 (e.g. {sample})")
    if objective is not None:
        recomputed = model.objective_at(values)
        if abs(recomputed - objective) / max(1.0, abs(recomputed)) > 1e-6:
            warnings.append(f"solution file objective {objective!r} differs from "
                            f"recomputed {recomputed!r}")
    return ParsedSolution(values=values, warnings=warnings, objective=objective,
                          status_hint=status)


def _parse_cbc(text: str) -> tuple[dict[str, float], float | None, str]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise SolutionParseError("empty CBC solution file")
    header = lines[0]
    low = header.lower()
    if low.startswith("optimal"):
        status = "optimal"
    elif "infeasible" in low:
        status = "infeasible"
    elif "unbounded" in low:
        status = "unbounded"
    elif low.startswith("stopped"):
        status = "feasible-gap"
    else:
        raise SolutionParseError(f"unrecognized CBC status line {header!r}")
    objective = None
    if "objective value" in low:
        try:
            objective = float(header.split()[-1])
        except ValueError:
            raise SolutionParseError(f"bad CBC objective in {header!r}") from None
    named: dict[str, float] = {}
    for ln in lines[1:]:
        parts = ln.split()
        # "<index> <name> <value> [reduced cost]"
        if len(parts) < 3:
            raise SolutionParseError(f"malformed CBC entry {ln!r}")
        name = parts[1]
        if name in named:
            raise SolutionParseError(f"duplicate variable {name!r} in CBC solution")
        try:
            named[name] = float(parts[2])
        except ValueError:
            raise SolutionParseError(f"bad value in CBC entry {ln!r}") from None
    return named, objective, status


def _parse_highs(text: str) -> tuple[dict[str, float], float | None, str]:
    lines = text.splitlines()
    status = None
    objective = None
    named: dict[str, float] = {}
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        if line == "Model status":
            i += 1
            word = lines[i].strip().lower()
            if word.startswith("optimal"):
                status = "optimal"
            elif "infeasible" in word:
                status = "infeasible"
            elif "unbounded" in word:
                status = "unbounded"
            elif "time" in word or "limit" in word:
                status = "feasible-gap"
            else:
                status = "error"
        elif line.startswith("Objective"):
            try:
                objective = float(line.split()[-1])
            except ValueError:
                raise SolutionParseError(f"bad HiGHS objective line {line!r}") from None
        elif line.startswith("# Columns"):
            count = int(line.split()[-1])
            for j in range(count):
                i += 1
                parts = lines[i].split()
                if len(parts) != 2:
                    raise SolutionParseError(f"malformed HiGHS column entry {lines[i]!r}")
                name, val = parts
                if name in named:
                    raise SolutionParseError(f"duplicate variable {name!r} in HiGHS solution")
                named[name] = float(val)
        elif line.startswith("# Rows"):
            break
        i += 1
    if status is None:
        raise SolutionParseError("HiGHS solution file has no 'Model status' section")
    return named, objective, status
