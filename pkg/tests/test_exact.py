import pytest
from gmpy2 import mpq

from bispectral.exact import (GR, BasisError, BiPoly, Echelon, MatRF, RatFun, ShapeError, exact_nullspace,
                              rank)
from bispectral.exprio import make_basis, parse_expr
from bispectral.theorems import load_example

from conftest import mat, rf


# -- Gaussian rationals ------------------------------------------------------

def test_modulus_identity():
    assert GR(1, 1) * GR(1, -1) == GR(2)


def test_rational_sum():
    assert GR(mpq(1, 2)) + GR(mpq(1, 3)) == GR(mpq(5, 6))


def test_inverse_by_conjugate():
    z = GR(3, 4)
    assert z.inv() == GR(mpq(3, 25), mpq(-4, 25))
    assert z * z.inv() == GR(1)


def test_division_by_zero_is_explicit():
    with pytest.raises(ZeroDivisionError):
        GR(0).inv()
    with pytest.raises(ZeroDivisionError):
        GR(1) / GR(0)


def test_canonical_zero_and_parse_roundtrip():
    assert GR(0) == GR(0, 0) and not GR(0)
    for text in ("5/6", "-3/25+4/25i", "i", "-2i", "0", "+1/2"):
        assert GR.parse(str(GR.parse(text))) == GR.parse(text)
    with pytest.raises(ValueError):
        GR.parse("1+")


# -- polynomials and rational functions -------------------------------------

def test_bipoly_has_no_zero_terms():
    p = BiPoly.var("x") - BiPoly.var("x")
    assert p.is_zero() and p == BiPoly()


def test_diff_of_reciprocal(bx):
    assert rf("1/x", bx).diff("x") == rf("-1/x^2", bx)


def test_quotient_rule(bx):
    assert rf("(x*z-1)/x", bx).diff("x") == rf("1/x^2", bx)


def test_normalization_cancels(bx):
    r = rf("1/x", bx) * rf("x", bx)
    assert r == RatFun.const(1, bx)
    assert r.den == bx.zero_den()


def test_denominator_power_derivative():
    b = make_basis(["x - 2"])
    r = rf("1/(x-2)^3", b)
    assert r.diff("x") == rf("-3/(x-2)^4", b)


def test_equality_is_cross_multiplication(bx):
    a = RatFun(BiPoly.var("x"), (2, 0), bx, normalize=False)
    assert a == rf("1/x", bx)


def test_cross_basis_equality_is_false():
    assert rf("1/x", make_basis(["x"])) != rf("1/x", make_basis(["x", "z"]))


def test_mixed_basis_arithmetic_raises():
    with pytest.raises(BasisError):
        rf("1/x", make_basis(["x"])) + rf("1/x", make_basis(["x", "z"]))


def test_non_coprime_basis_rejected():
    with pytest.raises(BasisError):
        make_basis(["x", "x^2 - 2*x"])


# -- matrices ----------------------------------------------------------------

def test_identity_is_neutral(bx):
    A = mat([["x", "1/z"], ["x*z", "2"]], bx)
    assert A * MatRF.identity(2, bx) == A


def test_nilpotent(bx):
    N = mat([["0", "1"], ["0", "0"]], bx)
    assert (N * N).is_zero()


def test_example1_matrix_square():
    M = load_example("ex1").problem.psi
    sq = M * M
    assert sq[0, 0] == rf("(z - 1/x)^2", M.basis)


def test_shape_mismatch(bx):
    A = MatRF.identity(2, bx)
    B = MatRF.identity(3, bx)
    with pytest.raises(ShapeError):
        A * B
    with pytest.raises(ShapeError):
        A + B


def test_entrywise_diff(bx):
    A = mat([["x^2", "1/x"], ["z", "0"]], bx)
    assert A.diff("x") == mat([["2*x", "-1/x^2"], ["0", "0"]], bx)


# -- nullspace ---------------------------------------------------------------

def test_nullspace_of_zero():
    assert exact_nullspace([[0, 0], [0, 0]]) == [[GR(1), GR(0)], [GR(0), GR(1)]]


def test_nullspace_row_vector():
    # reduced echelon: leading coordinate 1
    assert exact_nullspace([[1, 1]]) == [[GR(1), GR(-1)]]


def test_nullspace_complex():
    ns = exact_nullspace([[GR(0, 1), 1]])
    assert len(ns) == 1
    v = ns[0]
    assert GR(0, 1) * v[0] + v[1] == GR(0)


def test_echelon_contains():
    e = Echelon()
    e.add({0: GR(1), 1: GR(2)})
    e.add({1: GR(1)})
    assert e.contains({0: GR(3)}) and e.rank == 2
    assert rank([{0: GR(1), 1: GR(2)}, {0: GR(2), 1: GR(4)}]) == 1
