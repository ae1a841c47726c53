import pytest

from bispectral.exact import I, MatRF, ShapeError
from bispectral.exprio import make_basis
from bispectral.matpoly import MatPoly
from bispectral.operators import (LeftOperator, RightOperator, WaveFunction, apply_left, apply_right,
                                  check_left_eigen, check_right_eigen, check_triple, compose_left,
                                  compose_right)
from bispectral.theorems import load_example

from conftest import mat, rf


@pytest.fixture(scope="module")
def ex1():
    return load_example("ex1")


@pytest.fixture(scope="module")
def ex3():
    return load_example("ex3")


def exp_identity(n=1, basis=None):
    basis = basis or make_basis(["x", "z"])
    return WaveFunction(MatRF.identity(n, basis))


def test_example1_left_action(ex1):
    psi = ex1.psi
    b = psi.basis
    L = LeftOperator({2: mat([["-1", "0"], ["0", "-1"]], b),
                      0: mat([["2/x^2", "-4/x^3"], ["0", "2/x^2"]], b)})
    assert apply_left(L, psi).mat == psi.mat.scale(rf("-z^2", b))


def test_identity_operators_fix_psi(ex1):
    psi = ex1.psi
    assert apply_left(LeftOperator.identity(2, psi.basis), psi).mat == psi.mat
    assert apply_right(psi, RightOperator.identity(2, psi.basis)).mat == psi.mat


def test_shift_identities():
    psi = exp_identity()
    b = psi.basis
    assert apply_left(LeftOperator.derivative(1, b), psi).mat == mat([["z"]], b)
    assert apply_right(psi, RightOperator.derivative(1, b)).mat == mat([["x"]], b)


def test_shift_identity_with_i_convention():
    b = make_basis(["x", "z"])
    psi = WaveFunction(MatRF.identity(1, b), I)
    assert apply_left(LeftOperator.derivative(1, b), psi).mat == mat([["i*z"]], b)


def test_example1_right_action(ex1):
    res = apply_right(ex1.psi, ex1.B).mat
    assert res == ex1.psi.mat.scale(rf("x^3", ex1.psi.basis))


def test_left_eigen_examples(ex1, ex3):
    assert check_left_eigen(ex3.L, ex3.psi, MatPoly.from_grid("z", [[[], []], [[], [0, 0, 1]]])).ok
    assert check_left_eigen(ex1.L, ex1.psi, MatPoly.unit("z", 2, 2, None, -1)).ok


def test_sign_flip_fails_at_first_entry(ex1):
    v = check_left_eigen(ex1.L, ex1.psi, MatPoly.unit("z", 2, 2, None, 1))
    assert not v.ok and v.witness == (0, 0)
    # residual -2 z^2 (z - 1/x)
    assert v.value == rf("-2*z^2*(z - 1/x)", ex1.psi.basis)
    assert v.to_dict()["witness"]["entry"] == [1, 1]


def test_right_eigen_examples(ex1, ex3):
    theta3 = MatPoly.from_grid("x", [[[0, 1], []], [[0, 0, -2, 1], [0, 1]]])
    assert check_right_eigen(ex3.psi, ex3.B, theta3).ok
    assert check_right_eigen(ex1.psi, RightOperator({}), MatPoly.zero("x", 2)).ok
    assert not check_right_eigen(ex1.psi, ex1.B, MatPoly.unit("x", 2, 2)).ok


def test_shape_checks(ex1):
    with pytest.raises(ShapeError):
        check_left_eigen(ex1.L, ex1.psi, MatPoly.unit("z", 1, 2))
    with pytest.raises(ShapeError):
        apply_left(LeftOperator.identity(3, ex1.psi.basis), ex1.psi)


@pytest.mark.parametrize("ex", ["ex1", "ex2", "ex3"])
def test_triples(ex):
    assert load_example(ex).check().ok


def test_perturbed_theta_fails(ex1):
    theta = ex1.theta + MatPoly.unit("x", 2, 0, (0, 1))
    v = check_triple(ex1.L, ex1.psi, ex1.B, ex1.F, theta)
    assert v.left.ok and not v.right.ok


def test_compose_derivatives():
    b = make_basis(["x", "z"])
    d = LeftOperator.derivative(1, b)
    assert compose_left(d, d) == LeftOperator.derivative(1, b, 2)


def test_compose_right_leibniz():
    # psi -> (psi_z / z)_z / z = psi_zz / z^2 - psi_z / z^3
    b = make_basis(["x", "z"])
    B = RightOperator({1: mat([["1/z"]], b)})
    assert compose_right(B, B) == RightOperator({2: mat([["1/z^2"]], b), 1: mat([["-1/z^3"]], b)})


def test_square_of_bessel_operator():
    b = make_basis(["z"])
    B0 = RightOperator({2: mat([["-1"]], b), 0: mat([["6/z^2"]], b)})
    sq = compose_right(B0, B0)
    # (-d^2 + 6/z^2)^2 = d^4 - 12/z^2 d^2 + 24/z^3 d + (36 - 36)/z^4 ... expanded by hand
    want = RightOperator({4: mat([["1"]], b), 2: mat([["-12/z^2"]], b), 1: mat([["24/z^3"]], b),
                          0: mat([["0"]], b)})
    assert sq.coeffs[4] == want.coeffs[4] and sq.coeffs[2] == want.coeffs[2]
    assert sq.coeffs[1] == want.coeffs[1]
    assert 0 not in sq.coeffs


def test_composition_matches_sequential_action(ex1):
    psi = ex1.psi
    L2 = compose_left(ex1.L, ex1.L)
    assert apply_left(L2, psi).mat == apply_left(ex1.L, apply_left(ex1.L, psi)).mat
    B2 = compose_right(ex1.B, ex1.B)
    assert apply_right(psi, B2).mat == apply_right(apply_right(psi, ex1.B), ex1.B).mat
