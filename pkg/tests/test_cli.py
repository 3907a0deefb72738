import csv
import io
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kstab.cli import InputError, JobConfig, main, parse_lambda, parse_poly

from conftest import poly


def run(argv):
    out = io.StringIO()
    code = main(argv, stdout=out)
    return code, out.getvalue()


def test_parse_examples():
    assert parse_poly("x*z - y^2") == poly({(1, 0, 1): 1, (0, 2, 0): -1})
    assert parse_poly("x0^3 + x1^3 + x2^3") == poly({(3, 0, 0): 1, (0, 3, 0): 1, (0, 0, 3): 1})
    assert parse_poly("xz - y^2") == parse_poly("x z-y ^ 2")
    assert parse_poly("3/4 x0 x3 - 2*x1^2", 4) == poly(
        {(1, 0, 0, 1): "3/4", (0, 2, 0, 0): -2}, 4)
    assert parse_poly("-x^2 + 2 x y", 3) == poly({(2, 0, 0): -1, (1, 1, 0): 2})


@pytest.mark.parametrize("text, msg", [
    ("x + y^2", "not homogeneous"),
    ("x*w", "unknown variable 'w' at position 2"),
    ("x*z - y^", "position 8"),
    ("x*z - y^2 +", "position 11"),
    ("x $ y", "position 2"),
    ("x*z - x*z", "identically zero"),
    ("x/0 y", "position"),
    ("", "empty"),
])
def test_parse_errors(text, msg):
    with pytest.raises(InputError, match=msg):
        parse_poly(text)


def test_parse_variable_range():
    with pytest.raises(InputError, match="outside"):
        parse_poly("x0 + x3", 3)
    with pytest.raises(InputError, match="three variables"):
        parse_poly("x + x3", 4)


def test_parse_roundtrip_through_string(fermat, conic):
    for f in (fermat, conic, poly({(2, 1, 0): "3/7", (0, 0, 3): -5})):
        assert parse_poly(f.to_string(), f.nvars) == f


def test_parse_lambda():
    assert parse_lambda("2,-1,-1").weights == (2, -1, -1)
    assert parse_lambda("(0 0 0)").weights == (0, 0, 0)
    with pytest.raises(InputError, match="sum to zero"):
        parse_lambda("1,0,0")
    with pytest.raises(InputError):
        parse_lambda("1.5,-1.5,0")


jobs = st.builds(
    lambda w, gens, depth, step, grid, seed, sign, inv: JobConfig(
        N=2, gens=tuple(gens), lam=tuple(w) + (-sum(w),), ladder_depth=depth,
        ladder_step=step, grid=grid, seed=seed, weight_sign=sign, invert_lambda=inv),
    st.lists(st.integers(-5, 5), min_size=2, max_size=2),
    st.lists(st.sampled_from(["x*z - y^2", "x^3 + y^3 + z^3", "3/4*x0*x1 - x2^2"]),
             max_size=3),
    st.sampled_from([14.0, 10.0, 7.5]), st.sampled_from([0.5, 0.25]),
    st.integers(2, 10), st.integers(0, 1000), st.sampled_from(["dual", "function"]),
    st.integers(0, 1))


@given(jobs)
@settings(max_examples=50, deadline=None)
def test_job_roundtrip(job):
    assert JobConfig.parse(job.emit()) == job


def test_job_rejects_bad_input():
    with pytest.raises(InputError, match="sum to zero"):
        JobConfig.parse("N=2\nlam=1,1,1\n")
    with pytest.raises(InputError, match="unknown key"):
        JobConfig.parse("N=2\ncolour=blue\n")
    with pytest.raises(InputError, match="not homogeneous"):
        JobConfig.parse("N=2\nlam=0,0,0\ngen=x + y^2\n")


def test_identity_table():
    code, out = run(["identity", "--n", "3", "--csv"])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    table = {(int(r["n"]), int(r["i"])): int(r["value"]) for r in rows}
    assert table[(3, 4)] == 384 and table[(3, 5)] == 0 and table[(3, 2)] == 0
    assert table[(1, 2)] == 8


def test_futaki_command():
    code, out = run(["futaki", "--poly", "x*z - y^2", "--lambda", "-2,1,1"])
    assert code == 0
    d = json.loads(out)
    assert d["F1"] == "-3/4" and d["F0"] == "1/2"
    assert d["weight_poly_text"] == "m^2 - m"
    assert d["job"]["lam"] == [-2, 1, 1]


def test_invert_lambda_and_weight_sign():
    _, out = run(["futaki", "--poly", "x*z - y^2", "--lambda", "2,-1,-1", "--invert-lambda", "1"])
    assert json.loads(out)["F1"] == "-3/4"
    _, out = run(["futaki", "--poly", "x*z - y^2", "--lambda", "-2,1,1", "--weight-sign", "function"])
    assert json.loads(out)["F1"] == "3/4"


def test_hilbert_and_limit_commands():
    code, out = run(["hilbert", "--poly", "x^2 - y*z", "--poly", "x*y"])
    d = json.loads(out)
    assert code == 0 and d["degree"] == 4 and d["dimension"] == 0
    code, out = run(["limit", "--poly", "x*z - y^2", "--lambda", "-2,1,1"])
    assert json.loads(out)["limit_ideal"] == ["x1^2"]


def test_input_errors_exit_2(capsys):
    assert run(["futaki", "--poly", "x + y^2"])[0] == 2
    assert run(["futaki", "--poly", "x*z - y^2", "--lambda", "1,1,1"])[0] == 2
    assert run(["futaki"])[0] == 2
    assert run(["nonsense"])[0] == 2
    assert run(["ray", "--poly", "x*y*z", "--lambda", "1,0,-1"])[0] == 2
    assert "error" in capsys.readouterr().err


def test_job_file(tmp_path):
    job = JobConfig(gens=("x*z - y^2",), lam=(-2, 1, 1))
    path = tmp_path / "conic.job"
    path.write_text(job.emit())
    code, out = run(["futaki", "--job", str(path)])
    assert code == 0 and json.loads(out)["F1"] == "-3/4"


def test_verify_trivial_exit_zero(tmp_path):
    csv_path = tmp_path / "ladder.csv"
    code, out = run(["verify", "--poly", "x*z - y^2", "--lambda", "0,0,0",
                     "--csv", str(csv_path)])
    assert code == 0
    d = json.loads(out)
    assert d["verdict"] == "pass"
    assert all(d["fits"][k]["slope"] == 0 for k in ("nu", "osc"))
    rows = list(csv.DictReader(open(csv_path, newline="")))
    assert list(rows[0]) == ["s", "nu", "psi_s", "I", "J", "osc", "err"]
    assert len(rows) == 29


def test_ray_csv_refits_to_same_slope():
    code, out = run(["ray", "--poly", "x*z - y^2", "--lambda", "2,-1,-1",
                     "--ladder-depth", "3", "--ladder-step", "1", "--csv"])
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["s"]) for r in rows] == [0.0, -1.0, -2.0, -3.0]
    assert float(rows[0]["nu"]) == 0.0
    for r in rows[1:]:
        assert float(r["J"]) == pytest.approx(float(r["I"]) / 2, rel=1e-3)
        assert float(r["osc"]) == pytest.approx(-3 * float(r["s"]))
