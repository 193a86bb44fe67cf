import numpy as np
import pytest

from gridshield.errors import ModelError
from gridshield.milp import BINARY, CONTINUOUS, ModelIR


def toy_model():
    m = ModelIR("toy")
    x0 = m.add_variable("x0", BINARY)
    x1 = m.add_variable("x1", CONTINUOUS, 0.0, 5.0)
    x2 = m.add_variable("x2", CONTINUOUS, 1.0, float("inf"))
    m.add_constraint("c0", [(x0, 1.0), (x1, 2.0)], "<=", 6.0)
    m.add_constraint("c1", [(x1, 1.0), (x2, -1.0)], "=", 1.0)
    m.add_objective_term(x0, 1.0)
    m.add_objective_term(x1, 2.5)
    m.objective_constant = 10.0
    return m


GOLDEN_MPS = (
    "NAME          toy\nROWS\n N  OBJ\n L  c0\n E  c1\nCOLUMNS\n"
    "    MARKER0         'MARKER'                 'INTORG'\n"
    "    x0  OBJ  1\n    x0  c0  1\n"
    "    MARKER1         'MARKER'                 'INTEND'\n"
    "    x1  OBJ  2.5\n    x1  c0  2\n    x1  c1  1\n    x2  c1  -1\n"
    "RHS\n    RHS  OBJ  -10\n    RHS  c0  6\n    RHS  c1  1\n"
    "BOUNDS\n BV BND  x0\n UP BND  x1  5\n LO BND  x2  1\nENDATA\n"
)

GOLDEN_LP = (
    "\\ toy\nMinimize\n obj: 1 x0 + 2.5 x1 + 10\nSubject To\n"
    " c0: 1 x0 + 2 x1 <= 6\n c1: 1 x1 - 1 x2 = 1\nBounds\n"
    " 0 <= x0 <= 1\n 0 <= x1 <= 5\n 1 <= x2 <= +inf\nBinaries\n x0\nEnd\n"
)


def test_add_variable_basics():
    m = ModelIR()
    b = m.add_variable("xg_5", BINARY)
    assert (b.index, b.name) == (0, "xg_5")
    assert (m.lower[0], m.upper[0]) == (0.0, 1.0)
    c = m.add_variable("V_3_0", CONTINUOUS, 0.0, 1.05)
    assert c.index == 1 and m.upper[1] == 1.05


def test_duplicate_variable_name():
    m = ModelIR()
    m.add_variable("x", BINARY)
    with pytest.raises(ModelError, match="duplicate variable"):
        m.add_variable("x", CONTINUOUS, 0, 1)


def test_inverted_bounds():
    m = ModelIR()
    with pytest.raises(ModelError, match="inverted"):
        m.add_variable("x", CONTINUOUS, 2.0, 1.0)


def test_constraint_order_and_ids():
    m = ModelIR()
    x1 = m.add_variable("x1", CONTINUOUS, 0, 1)
    x2 = m.add_variable("x2", CONTINUOUS, 0, 1)
    assert m.add_constraint("r0", [(x1, 1.0), (x2, 1.0)], "=", 1.0) == 0
    assert m.add_constraint("vacuous", [], "=", 0.0) == 1  # accepted as vacuous


def test_constraint_rejects_nan_and_foreign_vars():
    m = ModelIR()
    x = m.add_variable("x", CONTINUOUS, 0, 1)
    with pytest.raises(ModelError, match="non-finite"):
        m.add_constraint("bad", [(x, float("nan"))], "<=", 0.0)
    other = ModelIR()
    y = other.add_variable("y", CONTINUOUS, 0, 1)
    with pytest.raises(ModelError, match="does not belong"):
        m.add_constraint("foreign", [(y, 1.0)], "<=", 0.0)
    with pytest.raises(ModelError, match="duplicate variable"):
        m.add_constraint("dup", [(x, 1.0), (x, 2.0)], "<=", 0.0)


def test_mps_golden_bytes():
    assert toy_model().to_mps() == GOLDEN_MPS


def test_lp_golden_bytes():
    assert toy_model().to_lp() == GOLDEN_LP


def test_writers_deterministic(tmp_path):
    m = toy_model()
    m.write_mps(tmp_path / "a.mps")
    m.write_mps(tmp_path / "b.mps")
    assert (tmp_path / "a.mps").read_bytes() == (tmp_path / "b.mps").read_bytes()


def test_mps_uses_bv_for_binaries_and_fx_for_fixed():
    m = toy_model()
    assert " BV BND  x0" in m.to_mps()
    m2 = ModelIR()
    b = m2.add_variable("z", BINARY)
    m2.set_bounds(b, 1.0, 1.0)
    assert " FX BND  z  1" in m2.to_mps()


def test_mps_full_precision():
    m = ModelIR()
    x = m.add_variable("x", CONTINUOUS, 0.0, 1.0)
    m.add_objective_term(x, 0.1)
    assert "0.10000000000000001" in m.to_mps()


def test_mps_roundtrip_through_independent_reader():
    """Parse the emitted MPS with a minimal reader written here, independently
    of the writer, and compare the recovered structure."""
    m = toy_model()
    sections: dict[str, list[str]] = {}
    current = None
    for line in m.to_mps().splitlines():
        token = line.strip()
        if token in ("ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA") or \
                line.startswith("NAME"):
            current = token.split()[0]
            sections[current] = []
        else:
            sections[current].append(line.split())
    rows = {name: sense for sense, name in sections["ROWS"]}
    assert rows == {"OBJ": "N", "c0": "L", "c1": "E"}
    entries = []
    integer = False
    int_vars = set()
    for parts in sections["COLUMNS"]:
        if parts[1] == "'MARKER'":
            integer = parts[2] == "'INTORG'"
            continue
        entries.append((parts[0], parts[1], float(parts[2])))
        if integer:
            int_vars.add(parts[0])
    assert int_vars == {"x0"}
    assert ("x1", "c0", 2.0) in entries and ("x2", "c1", -1.0) in entries
    rhs = {parts[1]: float(parts[2]) for parts in sections["RHS"]}
    assert rhs == {"OBJ": -10.0, "c0": 6.0, "c1": 1.0}


def test_check_point_feasible_empty():
    m = toy_model()
    assert m.check_point(np.array([1.0, 2.0, 1.0])) == []


def test_check_point_row_violation():
    m = ModelIR()
    x1 = m.add_variable("x1", BINARY)
    x2 = m.add_variable("x2", BINARY)
    m.add_constraint("sum1", [(x1, 1.0), (x2, 1.0)], "=", 1.0)
    out = m.check_point(np.array([1.0, 1.0]))
    assert len(out) == 1 and out[0].name == "sum1" and out[0].amount == pytest.approx(1.0)


def test_check_point_integrality_flagged():
    m = ModelIR()
    m.add_variable("b", BINARY)
    out = m.check_point(np.array([0.5]))
    assert any(v.kind == "integrality" and v.name == "b" for v in out)


def test_check_point_bound_violation_and_missing_value():
    m = ModelIR()
    m.add_variable("x", CONTINUOUS, 0.0, 1.0)
    out = m.check_point(np.array([1.5]))
    assert out and out[0].kind == "bound"
    with pytest.raises(ModelError, match="missing value"):
        m.check_point(np.array([float("nan")]))


def test_check_point_respects_row_scale():
    m = ModelIR()
    x = m.add_variable("x", CONTINUOUS, 0.0, 1e9)
    m.add_constraint("big", [(x, 1.0)], "<=", 1e9)
    # 1.0 absolute violation on a 1e9-scale row is inside 1e-6 * scale
    assert m.check_point(np.array([1e9 + 1.0]), tol=1e-6) == []
    assert m.check_point(np.array([1e9 + 1.0]), tol=1e-12) != []


def test_objective_at():
    m = toy_model()
    assert m.objective_at(np.array([1.0, 2.0, 1.0])) == pytest.approx(1 + 5 + 10)
