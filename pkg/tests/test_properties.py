"""Property suites: random small instances stand in for the all-degrees statements."""

import subprocess
import sys

import pytest
from gmpy2 import mpq
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from bispectral.ansatz import clear_cache, closure_check, stabilize
from bispectral.exact import GR, BiPoly, MatRF, RatFun
from bispectral.exprio import make_basis
from bispectral.operators import (LeftOperator, RightOperator, WaveFunction, apply_left, apply_right,
                                  compose_left, compose_right)
from bispectral.theorems import load_example

BASIS = make_basis(["x", "x - 2", "z"])
SETTINGS = dict(deadline=None, suppress_health_check=[HealthCheck.too_slow])

small = st.integers(-3, 3)
rationals = st.builds(lambda p, q: mpq(p, q), small, st.integers(1, 4))
gaussian = st.builds(GR, rationals, rationals)
nonzero_gaussian = gaussian.filter(bool)


def bipoly(vars_=("x", "z"), max_deg=2, max_terms=3):
    degs = st.tuples(st.integers(0, max_deg if "x" in vars_ else 0), st.integers(0, max_deg if "z" in vars_ else 0))
    return st.dictionaries(degs, gaussian, max_size=max_terms).map(BiPoly)


def ratfun(vars_=("x", "z")):
    xden = st.integers(0, 2) if "x" in vars_ else st.just(0)
    zden = st.integers(0, 2) if "z" in vars_ else st.just(0)
    den = st.tuples(xden, xden, zden)
    return st.builds(lambda n, d: RatFun(n, d, BASIS), bipoly(vars_), den)


def matrix(entry, n=2):
    return st.lists(entry, min_size=n * n, max_size=n * n).map(lambda es: MatRF(n, n, es, BASIS))


def operator(cls, var, max_order=2):
    return st.dictionaries(st.integers(0, max_order), matrix(ratfun((var,))), min_size=1, max_size=3).map(cls)


wave = matrix(ratfun()).filter(lambda m: not m.is_zero()).map(WaveFunction)


# -- field axioms and Leibniz rule (1000 instances each) -----------------------

@settings(max_examples=1000, **SETTINGS)
@given(gaussian, gaussian, gaussian)
def test_field_axioms(a, b, c):
    assert a + b == b + a and a * b == b * a
    assert (a + b) + c == a + (b + c) and (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + GR(0) == a and a * GR(1) == a and a - a == GR(0)
    if a:
        assert a * a.inv() == GR(1)
        assert (b / a) * a == b


@settings(max_examples=1000, **SETTINGS)
@given(ratfun(), ratfun(), st.sampled_from(["x", "z"]))
def test_leibniz(a, b, var):
    assert (a * b).diff(var) == a.diff(var) * b + a * b.diff(var)
    assert (a + b).diff(var) == a.diff(var) + b.diff(var)


@settings(max_examples=300, **SETTINGS)
@given(ratfun(), ratfun(), ratfun())
def test_ratfun_ring_axioms(a, b, c):
    assert a * b == b * a and (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == RatFun.zero(BASIS)


# -- operator actions ------------------------------------------------------------

@settings(max_examples=200, **SETTINGS)
@given(operator(LeftOperator, "x"), wave, operator(RightOperator, "z"))
def test_bimodule_commutation(L, psi, B):
    lhs = apply_right(apply_left(L, psi), B).mat
    rhs = apply_left(L, apply_right(psi, B)).mat
    assert lhs == rhs


@settings(max_examples=100, **SETTINGS)
@given(operator(LeftOperator, "x"), operator(LeftOperator, "x"), wave, nonzero_gaussian)
def test_left_action_linear(L1, L2, psi, c):
    total = apply_left(L1 + L2.scale(c), psi).mat
    assert total == apply_left(L1, psi).mat + apply_left(L2, psi).mat.scale(c)


@settings(max_examples=50, **SETTINGS)
@given(operator(LeftOperator, "x", 1), operator(LeftOperator, "x", 1), operator(LeftOperator, "x", 1))
def test_compose_left_associative(A, B, C):
    assert compose_left(compose_left(A, B), C) == compose_left(A, compose_left(B, C))


@settings(max_examples=50, **SETTINGS)
@given(operator(RightOperator, "z", 1), operator(RightOperator, "z", 1), wave)
def test_compose_right_is_sequential_action(A, B, psi):
    assert apply_right(psi, compose_right(A, B)).mat == apply_right(apply_right(psi, A), B).mat


# -- slices ------------------------------------------------------------------------

@pytest.mark.parametrize("ex,d", [("ex1", 3), ("ex3", 2)])
def test_slice_determinism_in_process(ex, d):
    e = load_example(ex)
    clear_cache()
    a = stabilize(e.psi, d, side=e.side)[0].serialize()
    clear_cache()
    b = stabilize(e.psi, d, side=e.side)[0].serialize()
    assert a == b


def test_slice_determinism_across_processes():
    code = ("from bispectral.ansatz import truncated_slice; from bispectral.theorems import load_example; "
            "print(truncated_slice(load_example('ex1').psi, 3)[0].serialize())")
    outs = {subprocess.run([sys.executable, "-c", code], capture_output=True, check=True).stdout for _ in range(2)}
    assert len(outs) == 1


@pytest.mark.parametrize("ex", ["ex1", "ex2", "ex3"])
def test_closure_degree2(ex):
    e = load_example(ex)
    r = closure_check(e.psi, 2, side=e.side)
    assert r["ok"], r["violators"][:1]
