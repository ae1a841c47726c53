"""Scalar Schrodinger operators with rational potentials and their tail wavefunctions.

For ``L = -(d/dx)^2 + V(x)`` and ``psi = e^{sxz} sum_k c_k(x) z^-k`` the
eigen-relation ``L psi = -s^2 z^2 psi`` is equivalent to

    c_0 = 1,    2 s c_{k+1}' = V c_k - c_k'',

and the tail terminates at K once ``V c_K - c_K'' = 0``.  Each step needs a
rational antiderivative, computed by partial fractions over the factor basis
followed by Hermite reduction; a surviving simple-pole part means a logarithm.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ansatz import AnsatzBounds, stabilize, witness_operator
from .exact import BiPoly, Echelon, FactorBasis, MatRF, RatFun, exact_nullspace, upoly
from .exact.ratfun import BasisError, Factor
from .exact.scalar import ONE, ZERO, GaussianRational, I, as_gr
from .exprio import format_ratfun, format_scalar, make_basis, parse_expr
from .matpoly import MatPoly
from .operators import (LeftOperator, RightOperator, WaveFunction, check_left_eigen, check_right_eigen,
                        compose_right)

__all__ = [
    "NonRationalAntiderivative", "NoTermination", "schrodinger", "rational_antiderivative",
    "TailWaveFunction", "synth_wavefunction", "l2_potential", "b2_operator", "quartic_theta",
    "verify_kdv_example", "POTENTIAL_READINGS",
]


class NonRationalAntiderivative(ValueError):
    pass


class NoTermination(RuntimeError):
    pass


def schrodinger(V: RatFun) -> LeftOperator:
    """``-(d/dx)^2 + V`` as a 1x1 left operator."""
    if V.depends_on("z"):
        raise ValueError("potential depends on z")
    basis = V.basis
    return LeftOperator({2: MatRF(1, 1, [RatFun.const(-1, basis)], basis), 0: MatRF(1, 1, [V], basis)})


def _potential(L: LeftOperator) -> RatFun:
    c = L.coeffs
    if set(c) - {0, 2} or 2 not in c or c[2].shape != (1, 1) or c[2][0, 0] != RatFun.const(-1, c[2].basis):
        raise ValueError("expected a scalar operator -(d/dx)^2 + V")
    return c[0][0, 0] if 0 in c else RatFun.zero(c[2].basis)


# -- rational antiderivatives ---------------------------------------------------

def _upoly_x(p: BiPoly) -> tuple:
    if p.depends_on("z"):
        raise ValueError("expected a polynomial in x only")
    return upoly.trim([p.coefficient(k, 0) for k in range(p.degree("x") + 1)])


def _ratfun(num: tuple, idx: int | None, k: int, basis: FactorBasis) -> RatFun:
    den = list(basis.zero_den())
    if idx is not None:
        den[idx] = k
    return RatFun(BiPoly.from_upoly(num, "x"), tuple(den), basis)


def rational_antiderivative(R: RatFun) -> RatFun:
    """Antiderivative in x with no constant term; raises NonRationalAntiderivative on a log term."""
    if R.depends_on("z"):
        raise ValueError("integrand depends on z")
    basis = R.basis
    num = _upoly_x(R.num)
    active = [(i, k) for i, k in enumerate(R.den) if k]
    for i, _ in active:
        f = basis.factors[i]
        if f.var != "x":
            raise ValueError("integrand has a denominator in z")
        if len(upoly.gcd(f.coeffs, upoly.deriv(f.coeffs))) > 1:
            raise BasisError(f"factor {f} is not squarefree")
    dens = [upoly.power(basis.factors[i].coeffs, k) for i, k in active]
    D = (ONE,)
    for d in dens:
        D = upoly.mul(D, d)
    q, r = upoly.divmod_(num, D)
    out = _ratfun(upoly.integrate(q), None, 0, basis)
    for (i, k), Di in zip(active, dens):
        rest = upoly.divmod_(D, Di)[0]
        s, _, g = upoly.gcdex(rest, Di)
        # rest and Di are coprime, so g = 1 and s*rest = 1 mod Di
        A = upoly.divmod_(upoly.mul(r, s), Di)[1]
        out = out + _hermite(A, i, k, basis)
    return out


def _hermite(A: tuple, idx: int, k: int, basis: FactorBasis) -> RatFun:
    f = basis.factors[idx].coeffs
    fp = upoly.deriv(f)
    s, t, _ = upoly.gcdex(f, fp)  # s f + t f' = 1
    out = RatFun.zero(basis)
    while k >= 2:
        # A = S f + T f' with T = A t mod f; then int A/f^k = -T/((k-1) f^(k-1)) + int (S + T'/(k-1))/f^(k-1)
        T = upoly.divmod_(upoly.mul(A, t), f)[1]
        S, rem = upoly.divmod_(upoly.sub(A, upoly.mul(T, fp)), f)
        assert not rem
        out = out + _ratfun(upoly.scale(T, as_gr(-1) / (k - 1)), idx, k - 1, basis)
        A = upoly.add(S, upoly.scale(upoly.deriv(T), ONE / (k - 1)))
        k -= 1
    q, r = upoly.divmod_(A, f)
    if r:
        raise NonRationalAntiderivative("non-rational antiderivative")
    return out + _ratfun(upoly.integrate(q), None, 0, basis)


# -- tail wavefunctions ----------------------------------------------------------

@dataclass
class TailWaveFunction:
    """``e^{s x z} * sum_k c_k(x) z^-k`` with ``c_0 = 1``."""

    convention: GaussianRational
    coeffs: list

    @property
    def K(self) -> int:
        return len(self.coeffs) - 1

    def basis_with_z(self) -> FactorBasis:
        basis = self.coeffs[0].basis
        return basis.extend([Factor("z", (ZERO, ONE))])

    def to_wavefunction(self) -> WaveFunction:
        basis = self.basis_with_z()
        zi = basis.index(Factor("z", (ZERO, ONE)))
        acc = RatFun.zero(basis)
        for k, c in enumerate(self.coeffs):
            c = c.rebase(basis)
            den = list(basis.zero_den())
            den[zi] = k
            acc = acc + c * RatFun(BiPoly.const(1), tuple(den), basis)
        return WaveFunction(MatRF(1, 1, [acc], basis), self.convention)

    def to_dict(self) -> dict:
        return {"convention": str(self.convention), "K": self.K,
                "coefficients": [format_ratfun(c) for c in self.coeffs]}


def synth_wavefunction(L: LeftOperator, K_max: int = 8, s=ONE) -> TailWaveFunction:
    """Run the tail recursion for a Schrodinger operator; the result is verified exactly."""
    if K_max < 0:
        raise ValueError("K_max must be nonnegative")
    s = as_gr(s)
    V = _potential(L)
    basis = V.basis
    cs = [RatFun.const(1, basis)]
    inv2s = ONE / (s * 2)
    while True:
        c = cs[-1]
        R = V * c - c.diff("x").diff("x")
        if R.is_zero():
            break
        if len(cs) > K_max:
            raise NoTermination("no termination by K_max")
        cs.append(rational_antiderivative(R).scale(inv2s))
    tail = TailWaveFunction(s, cs)
    psi = tail.to_wavefunction()
    F = MatPoly.unit("z", 1, 2, None, -s * s)
    if not check_left_eigen(_rebase_op(L, psi.basis), psi, F).ok:
        raise AssertionError("synthesized wavefunction fails L psi = -s^2 z^2 psi")
    return tail


def _rebase_op(op, basis):
    return type(op)({k: v.rebase(basis) for k, v in op.coeffs.items()})


# -- the L2 example -------------------------------------------------------------

# numerator coefficients (x^0..x^4) of V = num / (x^3 - t3)^2, as functions of t3
POTENTIAL_READINGS = {
    # 6 (x^4 + 12 t3 x) as displayed
    "displayed": lambda t3: (ZERO, t3 * 72, ZERO, ZERO, as_gr(6)),
    # -2 (log(x^3 - t3))'' = (6 x^4 + 12 t3 x) / (x^3 - t3)^2
    "log-derivative": lambda t3: (ZERO, t3 * 12, ZERO, ZERO, as_gr(6)),
}
FALLBACK_READING = "log-derivative"


def l2_potential(t3, reading: str = "displayed") -> RatFun:
    """The L2 potential over the basis [x^3 - t3]; for t3 = 0 both readings reduce to ``6/x^2``."""
    t3 = as_gr(t3)
    if reading not in POTENTIAL_READINGS:
        raise KeyError(f"unknown reading {reading!r}; expected one of {sorted(POTENTIAL_READINGS)}")
    if not t3:
        return RatFun(BiPoly.const(6), (2,), make_basis(["x"]))
    basis = make_basis([f"x^3 - {format_scalar(t3)}"])
    return RatFun(BiPoly.from_upoly(POTENTIAL_READINGS[reading](t3), "x"), (2,), basis)


def b2_operator(t3, basis: FactorBasis) -> RightOperator:
    """``(-(d/dz)^2 + 6/z^2)^2 + 4 i t3 d/dz``."""
    t3 = as_gr(t3)
    B0 = RightOperator({2: MatRF(1, 1, [RatFun.const(-1, basis)], basis),
                        0: MatRF(1, 1, [parse_expr("6/z^2", basis)], basis)})
    B = compose_right(B0, B0)
    if t3:
        B = B + RightOperator({1: MatRF(1, 1, [RatFun.const(I * t3 * 4, basis)], basis)})
    return B


def quartic_theta(gamma) -> MatPoly:
    """``x^4 + gamma x`` as a 1x1 matrix polynomial."""
    return MatPoly("x", 1, [(ZERO,), (as_gr(gamma),), (ZERO,), (ZERO,), (ONE,)])


def _gamma_of(S) -> dict:
    """Locate ``x^4 + gamma x`` in a degree-4 scalar slice, modulo constants."""
    vecs = [p.to_vector(S.degree) for p in S.basis]
    # combinations with vanishing x^2, x^3 coefficients, projected to (x^4, x)
    combos = exact_nullspace([[v[k] for v in vecs] for k in (2, 3)]) if vecs else []
    ech = Echelon()
    for combo in combos:
        ech.add({0: sum((c * v[4] for c, v in zip(combo, vecs)), ZERO),
                 1: sum((c * v[1] for c, v in zip(combo, vecs)), ZERO)})
    rows = ech.rref()
    lead = next((r for r in rows if min(r) == 0), None)
    if lead is None:
        return {"found": False}
    # unique iff x alone is not in the projection
    unique = not any(min(r) == 1 for r in rows)
    return {"found": True, "gamma": as_gr(lead.get(1, ZERO)), "unique": unique}


def _convention_report(L, t3, s, K_max, slice_degree) -> dict:
    try:
        tail = synth_wavefunction(L, K_max, s)
    except (NonRationalAntiderivative, NoTermination) as exc:
        return {"synthesized": False, "error": str(exc)}
    psi = tail.to_wavefunction()
    v = check_right_eigen(psi, b2_operator(t3, psi.basis), quartic_theta(-t3 * 4))
    S, rep = stabilize(psi, slice_degree)
    g = _gamma_of(S)
    out = {"synthesized": True, "K": tail.K, "tail": tail.to_dict()["coefficients"],
           "b2_pair_verifies": v.ok, "slice_dimension": S.dim, "theta": None,
           "schedule_extended": rep.extended}
    if not v.ok:
        out["b2_residual"] = v.to_dict()
    if g["found"]:
        theta = quartic_theta(g["gamma"])
        W = witness_operator(psi, theta, AnsatzBounds.from_dict(rep.steps[rep.stable_step]["bounds"]))
        out["theta"] = {"gamma": str(g["gamma"]), "unique": g["unique"],
                        "witness_order": W.order, "witness_verifies": check_right_eigen(psi, W, theta).ok}
    return out


def verify_kdv_example(t3=ONE, s=None, K_max: int = 4, slice_degree: int = 4) -> dict:
    """Synthesize psi for L2, locate ``x^4 + gamma x`` in its degree-4 slice and test the B2 pair.

    ``s`` restricts the conventions examined (default both 1 and i).  The
    displayed potential is tried first; when it has no rational tail the
    log-derivative reading is run as well and both are reported.
    """
    t3 = as_gr(t3)
    conventions = [("1", ONE), ("i", I)] if s is None else [(str(as_gr(s)), as_gr(s))]
    out = {"t3": str(t3), "readings": {}}
    for reading in ("displayed", FALLBACK_READING):
        V = l2_potential(t3, reading)
        L = schrodinger(V)
        rep = {"potential": format_ratfun(V),
               "conventions": {name: _convention_report(L, t3, sv, K_max, slice_degree)
                               for name, sv in conventions}}
        convs = rep["conventions"].values()
        rep["ok"] = all(c["synthesized"] and c["theta"] and c["theta"]["unique"] for c in convs)
        rep["verifying_conventions"] = [k for k, c in rep["conventions"].items() if c.get("b2_pair_verifies")]
        out["readings"][reading] = rep
        if rep["ok"]:
            break
    out["ok"] = out["readings"]["displayed"]["ok"]
    if out["ok"]:
        out["verdict"] = "displayed potential verified"
    elif out["readings"].get(FALLBACK_READING, {}).get("ok"):
        out["verdict"] = f"displayed potential has no rational tail; {FALLBACK_READING} reading verified"
    else:
        out["verdict"] = "not verified"
    return out
