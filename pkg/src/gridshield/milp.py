"""Solver-agnostic sparse MILP container with deterministic MPS / LP writers.

The model is a plain ledger of variables, linear rows and a minimization
objective. No presolve or algebraic simplification happens here, so every row
added by a builder can be audited one-to-one in the emitted files. Emission is
byte-reproducible: same build order, same bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ModelError

CONTINUOUS = "continuous"
BINARY = "binary"
SENSES = ("<=", ">=", "=")

_INF = float("inf")


@dataclass(frozen=True)
class VarRef:
    """Handle to a model variable; index is the insertion position."""

    index: int
    name: str
    kind: str


@dataclass
class Solution:
    """Outcome of one solve, values aligned to variable indices."""

    status: str  # optimal | feasible-gap | infeasible | unbounded | error
    objective_value: float
    values: np.ndarray | None
    gap: float
    solve_seconds: float
    solver_id: str = ""
    message: str = ""


@dataclass
class Violation:
    kind: str  # row | bound | integrality
    name: str
    amount: float
    scale: float

    def __str__(self) -> str:
        return f"{self.kind} {self.name}: violated by {self.amount:.3e} (scale {self.scale:.3e})"


def _num(x) -> str:
    """Render a coefficient with 17 significant digits (lossless for doubles)."""
    return format(float(x), ".17g")


class ModelIR:
    """Sparse triplet MILP: minimize c'x + c0 subject to linear rows and bounds."""

    def __init__(self, name: str = "gridshield"):
        self.name = name
        self.var_names: list[str] = []
        self.var_kinds: list[str] = []
        self.lower: list[float] = []
        self.upper: list[float] = []
        self._var_index: dict[str, int] = {}
        # rows: (name, [var indices], [coefficients], sense, rhs)
        self.rows: list[tuple[str, list[int], list[float], str, float]] = []
        self._row_index: dict[str, int] = {}
        self.objective: dict[int, float] = {}
        self.objective_constant: float = 0.0

    # -- construction -------------------------------------------------------

    @property
    def num_vars(self) -> int:
        return len(self.var_names)

    @property
    def num_rows(self) -> int:
        return len(self.rows)

    def add_variable(self, name: str, kind: str, lower: float | None = None,
                     upper: float | None = None) -> VarRef:
        if kind not in (CONTINUOUS, BINARY):
            raise ModelError(f"unknown variable kind {kind!r} for {name!r}")
        if name in self._var_index:
            raise ModelError(f"duplicate variable name {name!r}")
        if kind == BINARY:
            lo = 0.0 if lower is None else float(lower)
            hi = 1.0 if upper is None else float(upper)
            if lo < 0.0 or hi > 1.0:
                raise ModelError(f"binary {name!r} bounds [{lo}, {hi}] outside [0, 1]")
        else:
            if lower is None or upper is None:
                raise ModelError(f"continuous {name!r} needs explicit bounds")
            lo, hi = float(lower), float(upper)
        if math.isnan(lo) or math.isnan(hi):
            raise ModelError(f"NaN bound on {name!r}")
        if lo > hi:
            raise ModelError(f"inverted bounds [{lo}, {hi}] on {name!r}")
        idx = len(self.var_names)
        self.var_names.append(name)
        self.var_kinds.append(kind)
        self.lower.append(lo)
        self.upper.append(hi)
        self._var_index[name] = idx
        return VarRef(idx, name, kind)

    def set_bounds(self, ref: VarRef, lower: float, upper: float) -> None:
        self._check_ref(ref)
        lo, hi = float(lower), float(upper)
        if lo > hi:
            raise ModelError(f"inverted bounds [{lo}, {hi}] on {ref.name!r}")
        if self.var_kinds[ref.index] == BINARY and (lo < 0.0 or hi > 1.0):
            raise ModelError(f"binary {ref.name!r} bounds [{lo}, {hi}] outside [0, 1]")
        self.lower[ref.index] = lo
        self.upper[ref.index] = hi

    def _check_ref(self, ref: VarRef) -> None:
        if not (0 <= ref.index < len(self.var_names)) or self.var_names[ref.index] != ref.name:
            raise ModelError(f"variable {ref.name!r} does not belong to this model")

    def add_constraint(self, name: str, terms: list[tuple[VarRef, float]],
                       sense: str, rhs: float) -> int:
        if sense not in SENSES:
            raise ModelError(f"unknown sense {sense!r} in row {name!r}")
        if name in self._row_index:
            raise ModelError(f"duplicate row name {name!r}")
        rhs = float(rhs)
        if not math.isfinite(rhs):
            raise ModelError(f"non-finite rhs in row {name!r}")
        idxs: list[int] = []
        coefs: list[float] = []
        seen: set[int] = set()
        for ref, c in terms:
            self._check_ref(ref)
            if ref.index in seen:
                raise ModelError(f"duplicate variable {ref.name!r} in row {name!r}")
            seen.add(ref.index)
            c = float(c)
            if not math.isfinite(c):
                raise ModelError(f"non-finite coefficient on {ref.name!r} in row {name!r}")
            idxs.append(ref.index)
            coefs.append(c)
        rid = len(self.rows)
        self.rows.append((name, idxs, coefs, sense, rhs))
        self._row_index[name] = rid
        return rid

    def add_objective_term(self, ref: VarRef, coef: float) -> None:
        self._check_ref(ref)
        coef = float(coef)
        if not math.isfinite(coef):
            raise ModelError(f"non-finite objective coefficient on {ref.name!r}")
        if coef != 0.0:
            self.objective[ref.index] = self.objective.get(ref.index, 0.0) + coef

    # -- dense views ---------------------------------------------------------

    def objective_vector(self) -> np.ndarray:
        c = np.zeros(self.num_vars)
        for i, v in self.objective.items():
            c[i] = v
        return c

    def objective_at(self, values: np.ndarray) -> float:
        return float(sum(values[i] * v for i, v in self.objective.items())
                     + self.objective_constant)

    def bounds_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.lower, dtype=float), np.asarray(self.upper, dtype=float)

    def binary_indices(self) -> list[int]:
        return [i for i, k in enumerate(self.var_kinds) if k == BINARY]

    # -- feasibility audit ---------------------------------------------------

    def check_point(self, values: np.ndarray, tol: float = 1e-6) -> list[Violation]:
        """Report rows, bounds and integrality violated beyond tol x row scale.

        The scale of a row is max(1, |rhs|, max |a_ij x_j|) so the tolerance is
        relative to the magnitudes actually involved. Bounds use max(1, |bound|);
        integrality is an absolute distance-to-integer test.
        """
        values = np.asarray(values, dtype=float)
        if values.shape != (self.num_vars,):
            raise ModelError(
                f"value vector has shape {values.shape}, expected ({self.num_vars},)")
        if np.isnan(values).any():
            missing = self.var_names[int(np.flatnonzero(np.isnan(values))[0])]
            raise ModelError(f"missing value for variable {missing!r}")
        out: list[Violation] = []
        for i, name in enumerate(self.var_names):
            v = values[i]
            lo, hi = self.lower[i], self.upper[i]
            if v < lo - tol * max(1.0, abs(lo)):
                out.append(Violation("bound", name, lo - v, max(1.0, abs(lo))))
            elif v > hi + tol * max(1.0, abs(hi)):
                out.append(Violation("bound", name, v - hi, max(1.0, abs(hi))))
            if self.var_kinds[i] == BINARY:
                dist = abs(v - round(v))
                if dist > tol:
                    out.append(Violation("integrality", name, dist, 1.0))
        for name, idxs, coefs, sense, rhs in self.rows:
            terms = [c * values[j] for j, c in zip(idxs, coefs)]
            act = sum(terms)
            scale = max(1.0, abs(rhs), max((abs(t) for t in terms), default=0.0))
            if sense == "<=":
                viol = act - rhs
            elif sense == ">=":
                viol = rhs - act
            else:
                viol = abs(act - rhs)
            if viol > tol * scale:
                out.append(Violation("row", name, viol, scale))
        return out

    # -- writers -------------------------------------------------------------

    def to_mps(self) -> str:
        """MPS text: classic section layout, whitespace-delimited wide fields.

        Numeric fields carry 17 significant digits, which is wider than the
        12-character fields of strictly fixed-form MPS; CBC and HiGHS both read
        this whitespace-delimited layout. Rows and columns appear in insertion
        order so emission is byte-deterministic.
        """
        lines = [f"NAME          {self.name}", "ROWS", " N  OBJ"]
        sense_tag = {"<=": "L", ">=": "G", "=": "E"}
        for name, _, _, sense, _ in self.rows:
            lines.append(f" {sense_tag[sense]}  {name}")
        # column-major entries: objective first, then rows referencing the column
        col_rows: list[list[tuple[str, float]]] = [[] for _ in range(self.num_vars)]
        for name, idxs, coefs, _, _ in self.rows:
            for j, c in zip(idxs, coefs):
                col_rows[j].append((name, c))
        lines.append("COLUMNS")
        in_int = False
        marker = 0
        for j, vname in enumerate(self.var_names):
            want_int = self.var_kinds[j] == BINARY
            if want_int and not in_int:
                lines.append(f"    MARKER{marker:<10}'MARKER'                 'INTORG'")
                in_int, marker = True, marker + 1
            elif not want_int and in_int:
                lines.append(f"    MARKER{marker:<10}'MARKER'                 'INTEND'")
                in_int, marker = False, marker + 1
            entries = [("OBJ", self.objective.get(j, 0.0))] if j in self.objective \
                else ([("OBJ", 0.0)] if not col_rows[j] else [])
            entries += col_rows[j]
            for rname, c in entries:
                lines.append(f"    {vname}  {rname}  {_num(c)}")
        if in_int:
            lines.append(f"    MARKER{marker:<10}'MARKER'                 'INTEND'")
        lines.append("RHS")
        if self.objective_constant != 0.0:
            lines.append(f"    RHS  OBJ  {_num(-self.objective_constant)}")
        for name, _, _, _, rhs in self.rows:
            if rhs != 0.0:
                lines.append(f"    RHS  {name}  {_num(rhs)}")
        lines.append("BOUNDS")
        for j, vname in enumerate(self.var_names):
            lo, hi = self.lower[j], self.upper[j]
            if self.var_kinds[j] == BINARY:
                if lo == 0.0 and hi == 1.0:
                    lines.append(f" BV BND  {vname}")
                elif lo == hi:
                    lines.append(f" FX BND  {vname}  {_num(lo)}")
                else:
                    lines.append(f" LO BND  {vname}  {_num(lo)}")
                    lines.append(f" UP BND  {vname}  {_num(hi)}")
                continue
            if lo == hi:
                lines.append(f" FX BND  {vname}  {_num(lo)}")
                continue
            if lo == -_INF and hi == _INF:
                lines.append(f" FR BND  {vname}")
                continue
            if lo == -_INF:
                lines.append(f" MI BND  {vname}")
            elif lo != 0.0:
                lines.append(f" LO BND  {vname}  {_num(lo)}")
            if hi != _INF:
                lines.append(f" UP BND  {vname}  {_num(hi)}")
        lines.append("ENDATA")
        return "\n".join(lines) + "\n"

    def to_lp(self) -> str:
        """CPLEX-style LP text, a human-readable twin of the MPS output."""

        def expr(pairs: list[tuple[str, float]], const: float = 0.0) -> str:
            parts: list[str] = []
            for name, c in pairs:
                sign = "-" if c < 0 else "+"
                if not parts and sign == "+":
                    parts.append(f"{_num(abs(c))} {name}")
                else:
                    parts.append(f"{sign} {_num(abs(c))} {name}")
            if const != 0.0 or not parts:
                sign = "-" if const < 0 else "+"
                if not parts:
                    parts.append(_num(const))
                else:
                    parts.append(f"{sign} {_num(abs(const))}")
            return " ".join(parts)

        lines = [f"\\ {self.name}", "Minimize",
                 " obj: " + expr(sorted(((self.var_names[i], c) for i, c in
                                         self.objective.items()), key=lambda p: self._var_index[p[0]]),
                                 self.objective_constant)]
        lines.append("Subject To")
        op = {"<=": "<=", ">=": ">=", "=": "="}
        for name, idxs, coefs, sense, rhs in self.rows:
            body = expr([(self.var_names[j], c) for j, c in zip(idxs, coefs)])
            lines.append(f" {name}: {body} {op[sense]} {_num(rhs)}")
        lines.append("Bounds")
        for j, vname in enumerate(self.var_names):
            lo, hi = self.lower[j], self.upper[j]
            if lo == -_INF and hi == _INF:
                lines.append(f" {vname} free")
            elif lo == hi:
                lines.append(f" {vname} = {_num(lo)}")
            else:
                lo_s = "-inf" if lo == -_INF else _num(lo)
                hi_s = "+inf" if hi == _INF else _num(hi)
                lines.append(f" {lo_s} <= {vname} <= {hi_s}")
        bins = [self.var_names[j] for j in self.binary_indices()]
        if bins:
            lines.append("Binaries")
            for name in bins:
                lines.append(f" {name}")
        lines.append("End")
        return "\n".join(lines) + "\n"

    def write_mps(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(self.to_mps())

    def write_lp(self, path) -> None:
        with open(path, "w", encoding="ascii") as fh:
            fh.write(self.to_lp())
