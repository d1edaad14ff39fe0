import json
import math

import jsonschema
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from stiefel_fourier.cli import main
from stiefel_fourier.exact import k2_closed_form_n4
from stiefel_fourier.report import Report, load_schema, parse_csv, to_csv, to_json
from stiefel_fourier.special import stiefel_mass

SCHEMA = load_schema()


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json")
    assert code == 0, err
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    return doc


def test_eval_closed_form(capsys):
    doc = run_json(capsys, "eval", "--n", "4", "--k", "2", "--spectrum", "2,1", "--method", "closed-form")
    row = doc["rows"][0]
    assert row["method"] == "closed-form"
    assert row["value"] == pytest.approx(k2_closed_form_n4(2.0, 1.0), rel=1e-15)


def test_eval_zero_frequency(capsys):
    doc = run_json(capsys, "eval", "--n", "3", "--k", "2", "--spectrum", "0,0")
    assert doc["rows"][0]["value"] == pytest.approx(8 * math.pi**2, rel=1e-15)
    assert doc["rows"][0]["trail"]


def test_eval_degenerate_asymptotic_exits_1(capsys):
    code, out, err = run(capsys, "eval", "--n", "5", "--k", "2", "--spectrum", "1,1", "--method", "asymptotic")
    assert code == 1 and out == ""
    assert "DegenerateDirectionError" in err and "(1,2)" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["eval", "--n", "4", "--k", "2", "--spectrum", "1"],
        ["eval", "--n", "4", "--k", "2", "--spectrum", "a,b"],
        ["eval", "--n", "4", "--k", "2", "--spectrum", "1,-1"],
        ["eval", "--n", "2", "--k", "3", "--spectrum", "1,1,1"],
        ["eval", "--n", "4", "--k", "2"],
        ["eval", "--n", "4", "--k", "2", "--spectrum", "1,1", "--samples", "0"],
        ["eval", "--n", "4", "--k", "2", "--spectrum", "1,1", "--method", "bogus"],
        ["eval", "--n", "4", "--k", "2", "--matrix", "/nonexistent.json"],
        ["sweep", "--n", "4", "--k", "2", "--direction", "2,1", "--taus", "0,1"],
        ["frobnicate"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as info:
        raise SystemExit(main(argv))
    assert info.value.code == 2
    assert capsys.readouterr().out == ""


def test_unsupported_method_exits_1(capsys):
    code, _, err = run(capsys, "eval", "--n", "6", "--k", "4", "--spectrum", "4,3,2,1", "--method", "recursive")
    assert code == 1 and "UnsupportedError" in err
    code, _, err = run(capsys, "eval", "--n", "5", "--k", "2", "--spectrum", "2,1", "--method", "closed-form")
    assert code == 1


def test_probability_normalization(capsys):
    surf = run_json(capsys, "eval", "--n", "5", "--k", "2", "--spectrum", "2,1")["rows"][0]
    prob = run_json(capsys, "eval", "--n", "5", "--k", "2", "--spectrum", "2,1", "--normalization", "probability")["rows"][0]
    assert prob["value"] == pytest.approx(surf["value"] / stiefel_mass(5, 2), rel=1e-15)
    assert prob["total_mass"] == 1.0 and prob["normalization"] == "probability"


@pytest.mark.parametrize("suffix", [".json", ".csv"])
def test_matrix_input(capsys, tmp_path, suffix):
    M = np.random.default_rng(3).standard_normal((5, 2))
    path = tmp_path / f"xi{suffix}"
    if suffix == ".json":
        path.write_text(json.dumps({"matrix": M.tolist()}))
    else:
        np.savetxt(path, M, delimiter=",", fmt="%.17g")
    by_matrix = run_json(capsys, "eval", "--n", "5", "--k", "2", "--matrix", str(path))["rows"][0]
    s = np.linalg.svd(M, compute_uv=False)
    by_spec = run_json(capsys, "eval", "--n", "5", "--k", "2", "--spectrum", ",".join("%.17g" % v for v in s))["rows"][0]
    assert by_matrix["value"] == pytest.approx(by_spec["value"], abs=1e-11)


def test_matrix_shape_mismatch(capsys, tmp_path):
    path = tmp_path / "xi.json"
    path.write_text(json.dumps([[1, 2], [3, 4]]))
    assert run(capsys, "eval", "--n", "5", "--k", "2", "--matrix", str(path))[0] == 2


def test_output_is_bit_identical(capsys):
    argv = ["eval", "--n", "5", "--k", "3", "--spectrum", "0.4,0.3,0.2", "--method", "mc", "--samples", "20000", "--seed", "9", "--format", "csv"]
    first = run(capsys, *argv)[1]
    assert run(capsys, *argv)[1] == first
    assert run(capsys, *argv[:-2], "--threads", "3", "--format", "csv")[1] == first


def test_compare_n4(capsys):
    doc = run_json(capsys, "compare", "--n", "4", "--k", "2", "--spectrum", "2,1", "--samples", "100000")
    methods = {r["method"]: r for r in doc["rows"] if r["kind"] == "method"}
    assert all(methods[m]["status"] == "ok" for m in ("closed-form", "quadrature", "recursive", "monte-carlo", "stationary-phase"))
    exact = ("closed-form", "quadrature", "recursive", "monte-carlo")
    pairs = [r for r in doc["rows"] if r["kind"] == "pair"]
    for r in pairs:
        a, b = r["method"].split(" vs ")
        if a in exact and b in exact:
            assert r["status"] == "ok"


def test_compare_sphere_zero(capsys):
    doc = run_json(capsys, "compare", "--n", "3", "--k", "1", "--spectrum", "1", "--samples", "20000")
    cf = next(r for r in doc["rows"] if r.get("method") == "closed-form")
    assert abs(cf["value"]) <= 1e-13 * cf["total_mass"]


def test_compare_k3(capsys):
    doc = run_json(capsys, "compare", "--n", "5", "--k", "3", "--spectrum", "3,2,1", "--samples", "100000")
    status = {r["method"]: r["status"] for r in doc["rows"] if r["kind"] == "method"}
    assert status["recursive"] == status["monte-carlo"] == status["stationary-phase"] == "ok"
    assert status["quadrature"].startswith("skipped")
    pair = next(r for r in doc["rows"] if r["method"] == "recursive vs monte-carlo")
    assert pair["status"] == "ok"


def test_sweep_n4_bounded(capsys):
    doc = run_json(capsys, "sweep", "--n", "4", "--k", "2", "--direction", "2,1")
    scaled = [r["scaled_err"] for r in doc["rows"]]
    assert [r["tau"] for r in doc["rows"]] == [8.0, 16.0, 32.0, 64.0, 128.0]
    assert max(scaled) <= 1.05 * scaled[0]
    assert abs(doc["summary"]["rel_err_slope"] + 1) <= 0.15


def test_sweep_sphere(capsys):
    doc = run_json(capsys, "sweep", "--n", "4", "--k", "1", "--direction", "1")
    assert abs(doc["summary"]["rel_err_slope"] + 1) <= 0.15


def test_sweep_sphere_n3_leading_term_is_exact(capsys):
    doc = run_json(capsys, "sweep", "--n", "3", "--k", "1", "--direction", "1.1")
    assert all(r["rel_err"] <= 1e-12 for r in doc["rows"])


def test_sweep_degenerate_direction(capsys):
    doc = run_json(capsys, "sweep", "--n", "5", "--k", "2", "--direction", "1,1", "--taus", "4,8,16")
    assert all(r["leading"] is None and "(1,2)" in r["note"] for r in doc["rows"])
    assert all(r["exact_scaled"] > 0 for r in doc["rows"])
    assert "rel_err_slope" not in doc["summary"]


def test_moments(capsys):
    doc = run_json(capsys, "moments", "--k", "2", "--max-m", "4", "--lam", "0.5")
    rows = doc["rows"]
    assert rows[0]["estimate"] == 1.0 and rows[0]["std_error"] == 0.0
    assert abs(rows[1]["estimate"]) <= 3 * rows[1]["std_error"]
    assert abs(rows[2]["estimate"] - 1) <= 3 * rows[2]["std_error"]
    assert doc["summary"]["samples"] == 100000


def test_verify_quick(capsys):
    doc = run_json(capsys, "verify", "--quick")
    assert doc["summary"]["failed"] == 0
    assert any("finite differences" in r["check"] for r in doc["rows"])


def test_verify_sign_check(capsys):
    doc = run_json(capsys, "verify", "--sign-check")
    assert doc["summary"]["passed"] is True
    assert doc["summary"]["separation_at_tau_64"] >= 10
    assert all(r["minus_residual"] > r["plus_residual"] for r in doc["rows"])


def test_table_output(capsys):
    code, out, _ = run(capsys, "eval", "--n", "4", "--k", "2", "--spectrum", "2,1")
    assert code == 0
    assert out.splitlines()[0].split()[:4] == ["n", "k", "spectrum", "method"]


def test_csv_round_trip_from_cli(capsys):
    code, out, _ = run(capsys, "sweep", "--n", "4", "--k", "2", "--direction", "2,1", "--taus", "8,16", "--format", "csv")
    assert code == 0
    rows = parse_csv(out)
    doc = run_json(capsys, "sweep", "--n", "4", "--k", "2", "--direction", "2,1", "--taus", "8,16")
    assert rows == doc["rows"]


cells = st.one_of(
    st.none(),
    st.booleans(),
    st.integers(-(10**12), 10**12),
    st.floats(allow_nan=False, allow_infinity=False),
    # report cells are printable text; csv cannot carry NUL bytes
    st.text(st.characters(blacklist_categories=("Cs", "Cc")), min_size=1).filter(
        lambda s: s not in ("true", "false") and _not_numeric(s)
    ),
)


def _not_numeric(s):
    try:
        float(s)
    except ValueError:
        return True
    return False


@given(st.lists(st.dictionaries(st.sampled_from(["a", "b", "c", "d"]), cells, min_size=4), min_size=1, max_size=5))
def test_csv_round_trip_property(rows):
    assert parse_csv(to_csv(Report("eval", rows))) == rows


@given(st.lists(st.dictionaries(st.sampled_from(["x", "y"]), cells), max_size=4))
def test_json_emitter_is_valid_json(rows):
    doc = json.loads(to_json(Report("sweep", rows, {"note": "ok"})))
    jsonschema.validate(doc, SCHEMA)
    assert doc["rows"] == rows
