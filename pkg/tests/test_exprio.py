import json

import pytest

from bispectral.ansatz import AlgebraSlice, truncated_slice
from bispectral.exact import BiPoly, RatFun
from bispectral.exprio import (ParseError, SchemaError, dump_report, format_ratfun, load_problem, load_report,
                               make_basis, parse_expr, problem_from_dict, problem_to_dict)
from bispectral.theorems import bundled_path, load_example


def test_example1_entry():
    b = make_basis(["x", "z"])
    r = parse_expr("(x*z-1)/x", b)
    assert r == parse_expr("z", b) - parse_expr("1/x", b)
    assert r == load_example("ex1").problem.psi[0, 0]


def test_zero():
    b = make_basis(["x"])
    assert parse_expr("0", b).is_zero()


def test_denominator_exponents():
    b = make_basis(["x", "x - 2"])
    r = parse_expr("1/(x^2*(x-2))", b)
    assert r.num == BiPoly.const(1)
    assert r.den == (2, 1)
    assert RatFun.from_poly(r.den_poly(), b) == parse_expr("x^3 - 2*x^2", b)


def test_gaussian_coefficients():
    b = make_basis(["z"])
    r = parse_expr("(4*i)/z - 1/2", b)
    assert format_ratfun(r) == format_ratfun(parse_expr(format_ratfun(r), b))


def test_syntax_error_has_position():
    b = make_basis(["x"])
    with pytest.raises(ParseError) as e:
        parse_expr("x + * 2", b)
    assert e.value.pos == 4


def test_undeclared_denominator():
    b = make_basis(["x"])
    with pytest.raises(ParseError, match="undeclared denominator factor"):
        parse_expr("1/(x-2)", b)


def test_division_by_zero():
    with pytest.raises(ParseError, match="division by zero"):
        parse_expr("1/0", make_basis([]))


def test_bundled_example_reproduces_data():
    prob = load_problem(bundled_path("example1.json"))
    b = prob.basis
    assert prob.n == 2 and prob.side == "theta"
    assert prob.psi[0, 1] == parse_expr("1/x^2", b)
    assert prob.psi[1, 0].is_zero()
    assert prob.left_op[0][0, 1] == parse_expr("-4/x^3", b)
    assert prob.right_op[0][0, 1] == parse_expr("3/z^2", b)
    assert prob.theta.degree == 3


def test_missing_psi():
    with pytest.raises(SchemaError, match="missing psi"):
        problem_from_dict({"n": 1, "factors": []})


def test_bad_grid_reports_location():
    with pytest.raises(SchemaError, match="psi"):
        problem_from_dict({"n": 2, "factors": [], "psi": [["1"]]})


def test_problem_roundtrip():
    for name in ("example1.json", "example2.json", "example3.json", "kdv_l2.json"):
        prob = load_problem(bundled_path(name))
        again = problem_from_dict(json.loads(json.dumps(problem_to_dict(prob))))
        assert again.psi == prob.psi and again.theta == prob.theta and again.f == prob.f
        assert again.left_op == prob.left_op and again.right_op == prob.right_op


def test_slice_roundtrip_through_report():
    S, _ = truncated_slice(load_example("ex1").psi, 2)
    doc = load_report(dump_report({"verdict": "ok", "bases": {"slice": S}}))
    again = AlgebraSlice.from_dict(doc["bases"]["slice"])
    assert again == S
    assert again.serialize() == S.serialize()


def test_report_requires_keys():
    with pytest.raises(SchemaError):
        load_report(json.dumps({"verdict": "x"}))
