import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from overtake import ModelSpec, StructuralError, limit_path_closed_form, solve_closed_form
from overtake.io import (
    LIMIT_HEADER,
    PATH_HEADER,
    export_limit_csv,
    export_path_csv,
    export_ratio_csv,
    read_json,
    read_path_csv,
    sha256_file,
    write_json,
    write_manifest,
)
from overtake.overtaking import certify_optimality, constant_saving


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_path_csv_layout(tmp_path, half):
    p = solve_closed_form(0.5, 0.0625, 10)
    out = export_path_csv(p, tmp_path / "p.csv", half)
    r = rows(out)
    assert r[0] == PATH_HEADER
    assert len(r) == 13  # header plus t = 0..11
    assert r[1][5] == ""
    assert r[-1][0] == "11" and r[-1][2:] == ["", "", "", ""]


def test_path_csv_T0(tmp_path, half):
    r = rows(export_path_csv(solve_closed_form(0.5, 0.3, 0), tmp_path / "p.csv", half))
    assert len(r) == 3


@settings(max_examples=20, deadline=None)
@given(alpha=st.floats(0.05, 0.95), k0=st.floats(1e-3, 0.99), T=st.integers(0, 30))
def test_path_csv_round_trip(tmp_path_factory, alpha, k0, T):
    m = ModelSpec.log_cobb_douglas(alpha)
    p = solve_closed_form(alpha, k0, T)
    f = export_path_csv(p, tmp_path_factory.mktemp("rt") / "p.csv", m)
    q = read_path_csv(f, m, k0)
    assert np.array_equal(p.c, q.c) and np.array_equal(p.k, q.k) and np.array_equal(p.lam, q.lam)


def test_read_rejects_infeasible(tmp_path, half):
    f = export_path_csv(solve_closed_form(0.5, 0.0625, 4), tmp_path / "p.csv", half)
    text = f.read_text().splitlines()
    cells = text[3].split(",")
    cells[2] = "0.5"
    text[3] = ",".join(cells)
    f.write_text("\n".join(text) + "\n")
    assert read_path_csv(f).T == 4  # parses without a model
    with pytest.raises(StructuralError, match="infeasible"):
        read_path_csv(f, half)


def test_read_rejects_bad_header(tmp_path):
    f = tmp_path / "x.csv"
    f.write_text("a,b\n1,2\n")
    with pytest.raises(StructuralError):
        read_path_csv(f)


def test_limit_csv(tmp_path):
    r = rows(export_limit_csv(limit_path_closed_form(0.5, 0.0625, 5), tmp_path / "l.csv"))
    assert r[0] == LIMIT_HEADER and len(r) == 7
    assert float(r[1][1]) == 0.0625


def test_ratio_csv(tmp_path):
    (rep,) = certify_optimality(0.5, 0.0625, [constant_saving()], T_grid=range(10, 30))
    r = rows(export_ratio_csv(rep, tmp_path / "r.csv"))
    assert r[0] == ["T", "numerator", "denominator", "ratio", "tail_infimum"]
    assert len(r) == 21
    assert float(r[1][3]) == rep.ratio_sequence[0]


def test_json_nan_becomes_null(tmp_path):
    write_json({"x": float("nan"), "y": np.float64(2.0), "z": np.arange(2)}, tmp_path / "a.json")
    assert read_json(tmp_path / "a.json") == {"x": None, "y": 2.0, "z": [0, 1]}


def test_write_error_names_destination(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="file"):
        write_json({}, blocker / "sub" / "a.json")


def test_manifest(tmp_path, schema_validator):
    f = write_json({"a": 1}, tmp_path / "a.json")
    m = read_json(write_manifest(tmp_path, "steady-state", {"alpha": 0.5}, [f]))
    assert m["outputs"] == {"a.json": sha256_file(f)}
    assert "time" not in str(m).lower()
    schema_validator(m, "manifest")


def test_export_is_deterministic(tmp_path, half):
    p = solve_closed_form(0.5, 0.0625, 20)
    a = export_path_csv(p, tmp_path / "a.csv", half)
    b = export_path_csv(p, tmp_path / "b.csv", half)
    assert sha256_file(a) == sha256_file(b)
