import pytest

from bispectral.ansatz import AnsatzBounds, theta_slice, witness_operator
from bispectral.exact import ONE, I, RatFun
from bispectral.exprio import make_basis, parse_expr
from bispectral.kdv import (NonRationalAntiderivative, NoTermination, b2_operator, l2_potential,
                            rational_antiderivative, schrodinger, synth_wavefunction, verify_kdv_example)
from bispectral.matpoly import MatPoly
from bispectral.operators import LeftOperator, RightOperator, check_left_eigen


@pytest.fixture(scope="module")
def bx():
    return make_basis(["x"])


def test_free_operator(bx):
    L = schrodinger(RatFun.zero(bx))
    assert set(L.coeffs) == {2}


def test_potential_must_not_depend_on_z():
    with pytest.raises(ValueError):
        schrodinger(parse_expr("1/z", make_basis(["z"])))


def test_base_operator_constructible(bx):
    L = schrodinger(parse_expr("1/(4*x^2)", bx))
    assert isinstance(L, LeftOperator) and L.order == 2


def test_antiderivatives(bx):
    assert rational_antiderivative(parse_expr("1/x^2", bx)) == parse_expr("-1/x", bx)
    assert rational_antiderivative(parse_expr("3*x^2 + 2/x^3", bx)) == parse_expr("x^3 - 1/x^2", bx)
    with pytest.raises(NonRationalAntiderivative, match="non-rational antiderivative"):
        rational_antiderivative(parse_expr("1/x", bx))


def test_hermite_reduction_on_cubic_factor():
    b = make_basis(["x^3 - 1"])
    f = parse_expr("x^3 - 1", b)
    # d/dx (x / (x^3 - 1)) integrates back exactly
    g = parse_expr("x/(x^3 - 1)", b)
    assert rational_antiderivative(g.diff("x")) == g
    assert f.diff("x") == parse_expr("3*x^2", b)


def test_zero_potential(bx):
    tail = synth_wavefunction(schrodinger(RatFun.zero(bx)))
    assert tail.K == 0


@pytest.mark.parametrize("s,c1", [(ONE, "-1/x"), (I, "i/x")])
def test_one_darboux_step(bx, s, c1):
    tail = synth_wavefunction(schrodinger(parse_expr("2/x^2", bx)), 4, s)
    assert tail.K == 1
    assert tail.coeffs[1] == parse_expr(c1, bx)


def test_two_darboux_steps(bx):
    tail = synth_wavefunction(schrodinger(parse_expr("6/x^2", bx)), 4)
    psi = tail.to_wavefunction()
    assert tail.K == 2
    assert check_left_eigen(schrodinger(parse_expr("6/x^2", psi.basis)), psi, MatPoly.unit("z", 1, 2, None, -1)).ok


def test_no_termination(bx):
    with pytest.raises(NoTermination, match="no termination by K_max"):
        synth_wavefunction(schrodinger(parse_expr("6/x^2", bx)), 1)


def test_displayed_potential_has_no_rational_tail():
    with pytest.raises(NonRationalAntiderivative):
        synth_wavefunction(schrodinger(l2_potential(1)), 4)


def test_log_derivative_potential_terminates():
    V = l2_potential(1, "log-derivative")
    tail = synth_wavefunction(schrodinger(V), 4, I)
    assert tail.K <= 4
    x3 = parse_expr("x^3 - 1", V.basis)
    # V = -2 (log(x^3 - 1))''
    assert V == (x3.diff("x") * x3.diff("x") - x3.diff("x").diff("x") * x3) * parse_expr("2/(x^3 - 1)^2", V.basis)


def test_degenerate_potential():
    assert l2_potential(0) == parse_expr("6/x^2", make_basis(["x"]))


def test_kdv_example_t3_one():
    r = verify_kdv_example(1)
    assert not r["ok"]
    shown = r["readings"]["displayed"]
    assert all(c["error"] == "non-rational antiderivative" for c in shown["conventions"].values())
    alt = r["readings"]["log-derivative"]
    assert alt["ok"] and alt["verifying_conventions"] == ["i"]
    for c in alt["conventions"].values():
        assert c["theta"]["gamma"] == "-4" and c["theta"]["unique"] and c["theta"]["witness_verifies"]


def test_kdv_example_t3_zero():
    r = verify_kdv_example(0)
    assert r["ok"] and r["verdict"] == "displayed potential verified"
    assert r["readings"]["displayed"]["verifying_conventions"] == ["1", "i"]


def test_gamma_tracks_t3():
    r = verify_kdv_example(2, I)
    assert r["readings"]["log-derivative"]["conventions"]["0+1i"]["theta"]["gamma"] == "-8"


@pytest.mark.parametrize("s", [ONE, I])
def test_self_dual_exponential(bx, s):
    psi = synth_wavefunction(schrodinger(RatFun.zero(bx)), 0, s).to_wavefunction()
    S = theta_slice(psi, AnsatzBounds.make(1, 1, 0, 0))
    x = MatPoly.unit("x", 1, 1)
    assert S.contains(x)
    W = witness_operator(psi, x, AnsatzBounds.make(1, 1, 0, 0))
    assert W == RightOperator.derivative(1, psi.basis).scale(ONE / s)


def test_b2_operator_shape():
    b = make_basis(["z"])
    B = b2_operator(1, b)
    assert B.order == 4 and B.coeffs[1][0, 0] == parse_expr("4*i + 24/z^3", b)
