"""Exact ansatz solver for eigenvalue/operator pairs of a fixed wavefunction.

For ``psi = e^{sxz} M`` the right problem ``psi B = theta(x) psi`` is linear in
the unknown coefficients of ``theta`` and of ``B = sum_j d_z^j b_j(z)`` once
``b_j`` is written as ``poly / prod f^p`` over the declared z-factors, the
numerator exceeding the denominator degree by at most ``q``.  Clearing the common denominator turns the identity into the
vanishing of finitely many BiPoly coefficients.  The left problem
``L psi = psi F(z)`` is handled symmetrically with x and z exchanged.

The right system splits into independent blocks, one per column of ``B``
(the left system: one per row of ``L``), coupled only through the eigenvalue
unknowns.  Each block is eliminated with the operator unknowns first, so the
rows left over are constraints on the eigenvalue alone.
"""

from __future__ import annotations

import json
import time
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Sequence

from gmpy2 import mpq

from .exact import BiPoly, Echelon, MatRF, RatFun
from .exact.linalg import nullspace_rows, rref, solve_affine
from .exact.scalar import GaussianRational, as_gr
from .matpoly import MatPoly
from .operators import LeftOperator, RightOperator, WaveFunction

__all__ = [
    "AnsatzBounds", "AlgebraSlice", "AnsatzSystem", "ConvergenceReport", "StabilizationError",
    "NotInAlgebra", "build_right_system", "build_left_system", "theta_slice", "f_slice",
    "default_schedule", "stabilize", "truncated_slice", "closure_check", "witness_operator",
    "clear_cache",
]

SIDES = {
    # side: (eigenvalue variable, operator variable)
    "theta": ("x", "z"),
    "f": ("z", "x"),
}


class StabilizationError(RuntimeError):
    pass


class NotInAlgebra(ValueError):
    pass


# -- bounds -------------------------------------------------------------------

@dataclass(frozen=True)
class AnsatzBounds:
    """Degree/order/pole bounds of one ansatz.

    ``pole_orders`` is a sorted tuple of ``(factor text, exponent)`` pairs; the
    factor text ``"*"`` stands for every declared factor in the operator variable.
    """

    eigen_deg: int
    op_order: int
    pole_orders: tuple = ()
    num_deg: int = 0

    def __post_init__(self):
        if min(self.eigen_deg, self.op_order, self.num_deg) < 0:
            raise ValueError("bounds must be nonnegative")
        poles = self.pole_orders
        if isinstance(poles, dict):
            poles = poles.items()
        poles = tuple(sorted((str(f), int(k)) for f, k in poles))
        if any(k < 0 for _, k in poles):
            raise ValueError("pole orders must be nonnegative")
        object.__setattr__(self, "pole_orders", poles)

    @classmethod
    def make(cls, d: int, m: int | None = None, poles=None, q: int | None = None) -> "AnsatzBounds":
        """Defaults: ``m = d``, every factor with pole order ``m``, ``q = m + d``."""
        m = d if m is None else m
        if poles is None:
            poles = m
        if isinstance(poles, int):
            poles = {"*": poles}
        return cls(d, m, poles, m + d if q is None else q)

    def with_degree(self, d: int) -> "AnsatzBounds":
        return AnsatzBounds(d, self.op_order, self.pole_orders, self.num_deg)

    def pole_vector(self, basis, var: str) -> tuple:
        from .exprio import parse_factor

        out = [0] * len(basis)
        for text, k in self.pole_orders:
            if text == "*":
                for idx, f in enumerate(basis.factors):
                    if f.var == var:
                        out[idx] = max(out[idx], k)
                continue
            f = parse_factor(text)
            if f not in basis.factors:
                raise ValueError(f"pole order given for undeclared factor {text!r}")
            if f.var != var:
                raise ValueError(f"factor {text!r} is not a factor in {var}")
            idx = basis.index(f)
            out[idx] = max(out[idx], k)
        return tuple(out)

    def to_dict(self) -> dict:
        return {"eigen_deg": self.eigen_deg, "op_order": self.op_order,
                "pole_orders": dict(self.pole_orders), "num_deg": self.num_deg}

    @classmethod
    def from_dict(cls, doc: dict) -> "AnsatzBounds":
        unknown = set(doc) - {"eigen_deg", "op_order", "pole_orders", "num_deg"}
        if unknown:
            raise ValueError(f"unknown bounds keys: {sorted(unknown)}")
        d = int(doc["eigen_deg"])
        return cls.make(d, doc.get("op_order"), doc.get("pole_orders"), doc.get("num_deg"))


# -- slices -------------------------------------------------------------------

class AlgebraSlice:
    """Canonical basis of a space of matrix polynomials of degree <= ``degree``.

    The basis is the reduced row echelon form of the coefficient vectors in
    (degree, row, column) order, so two slices are equal iff their bases are.
    ``info`` carries bookkeeping and is ignored by equality.
    """

    def __init__(self, var: str, n: int, degree: int, basis: Sequence[MatPoly], info: dict | None = None):
        self.var, self.n, self.degree = var, n, degree
        self.basis = tuple(basis)
        self.info = dict(info or {})
        self._ech = None

    @classmethod
    def from_vectors(cls, var: str, n: int, degree: int, rows, info=None) -> "AlgebraSlice":
        """Build from sparse rows ``{coord: value}``; the rows are re-echelonized."""
        reduced = rref({k: as_gr(v) for k, v in r.items()} for r in rows)
        length = n * n * (degree + 1)
        basis = [MatPoly.from_vector(var, n, [as_gr(r.get(c, 0)) for c in range(length)]) for r in reduced]
        return cls(var, n, degree, basis, info)

    @classmethod
    def span(cls, var: str, n: int, degree: int, polys, info=None) -> "AlgebraSlice":
        return cls.from_vectors(var, n, degree, [_sparse(p.to_vector(degree)) for p in polys], info)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __len__(self):
        return len(self.basis)

    def __iter__(self):
        return iter(self.basis)

    def vectors(self) -> list[dict]:
        return [_sparse(p.to_vector(self.degree)) for p in self.basis]

    def _echelon(self) -> Echelon:
        if self._ech is None:
            ech = Echelon()
            for v in self.vectors():
                ech.add(v)
            self._ech = ech
        return self._ech

    def contains(self, p: MatPoly) -> bool:
        if p.var != self.var or p.n != self.n:
            return False
        if p.degree > self.degree:
            return False
        return self._echelon().contains(_sparse(p.to_vector(self.degree)))

    def __contains__(self, p):
        return self.contains(p)

    def contains_slice(self, other: "AlgebraSlice") -> bool:
        return all(self.contains(p) for p in other.basis)

    def truncate(self, d: int) -> "AlgebraSlice":
        """Image under ``p -> p mod var^(d+1)``."""
        if d >= self.degree:
            return AlgebraSlice(self.var, self.n, d, self.basis, self.info)
        cut = self.n * self.n * (d + 1)
        rows = [{k: v for k, v in r.items() if k < cut} for r in self.vectors()]
        return AlgebraSlice.from_vectors(self.var, self.n, d, rows, self.info)

    def top_free(self) -> bool:
        """True when every ``var^degree * E_rc`` lies in the slice."""
        return all(self.contains(MatPoly.unit(self.var, self.n, self.degree, (r, c)))
                   for r in range(self.n) for c in range(self.n))

    def __eq__(self, other):
        if not isinstance(other, AlgebraSlice):
            return NotImplemented
        return (self.var, self.n, self.degree, self.basis) == (other.var, other.n, other.degree, other.basis)

    def __hash__(self):
        return hash((self.var, self.n, self.degree, self.basis))

    def to_dict(self) -> dict:
        return {"var": self.var, "n": self.n, "degree": self.degree, "dimension": self.dim,
                "basis": [p.grid() for p in self.basis]}

    def serialize(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "AlgebraSlice":
        from .exprio import make_basis, parse_matpoly

        basis = make_basis([])
        polys = [parse_matpoly(g, doc["n"], doc["var"], basis, "basis") for g in doc["basis"]]
        return cls.span(doc["var"], doc["n"], doc["degree"], polys)

    def __repr__(self):
        return f"AlgebraSlice({self.var}, n={self.n}, degree={self.degree}, dim={self.dim})"


def _sparse(vec) -> dict:
    return {k: v for k, v in enumerate(vec) if v}


# -- the linear system --------------------------------------------------------

class AnsatzSystem:
    """Block-eliminated linear system for one side, wavefunction and bound set.

    Unknown layout inside block ``b`` (a column of B, or a row of L):
    operator unknowns first, index ``(j*Q + l)*n + k`` for the coefficient
    of ``var^l`` in entry ``k`` of the order-``j`` coefficient; then the
    eigenvalue unknowns at ``n_op + (t*n + r)*n + c`` for entry (r, c) of the
    degree-``t`` coefficient.  ``Q = num_len`` is the numerator length:
    ``num_deg + 1`` plus the degree of the pole denominator.
    """

    def __init__(self, psi: WaveFunction, bounds: AnsatzBounds, side: str = "theta"):
        if side not in SIDES:
            raise ValueError(f"side must be one of {sorted(SIDES)}")
        t0 = time.perf_counter()
        self.psi, self.bounds, self.side = psi, bounds, side
        self.eig_var, self.op_var = SIDES[side]
        n = self.n = psi.n
        D, m, q = bounds.eigen_deg, bounds.op_order, bounds.num_deg
        basis = psi.basis
        self.poles = bounds.pole_vector(basis, self.op_var)
        # numerators may exceed the denominator degree by num_deg, so raising
        # a pole order never removes an operator from the ansatz
        self.num_len = q + 1 + sum((len(f.coeffs) - 1) * k for f, k in zip(basis.factors, self.poles))
        q = self.num_len - 1
        self.n_op = (m + 1) * (q + 1) * n
        self.n_eig = n * n * (D + 1)
        self.complex_mode = not (psi.mat.is_real() and psi.convention.is_real())
        conv = (lambda v: v) if self.complex_mode else (lambda v: v.re)

        # shifts[j] = (d_op + s*eig)^j M, all over one common denominator E
        shifts = psi.shifted(self.op_var, m)
        E = [0] * len(basis)
        for S in shifts:
            for e in S.entries:
                E = [max(a, b) for a, b in zip(E, e.den)]

        def cleared(e: RatFun, extra=None) -> list:
            p = e.num * basis.expand(tuple(a - b for a, b in zip(E, e.den)))
            if extra is not None:
                p = p * extra
            return [(ab, conv(v)) for ab, v in p.terms.items()]

        P = [[cleared(S[r, k]) for r in range(n) for k in range(n)] for S in shifts]
        pole_poly = basis.expand(self.poles)
        R = [cleared(psi.mat[r, k], pole_poly) for r in range(n) for k in range(n)]

        q1 = q + 1
        self.blocks: list[Echelon] = []
        eig_ech = Echelon()
        n_eq = 0
        op_rank = 0
        for b in range(n):
            rows: dict[tuple, dict] = {}

            def put(key, col, val):
                row = rows.get(key)
                if row is None:
                    rows[key] = {col: val}
                else:
                    new = row.get(col, 0) + val
                    if new:
                        row[col] = new
                    else:
                        row.pop(col, None)

            if side == "theta":
                # entry (r, b): sum_{j,l,k} beta * z^l * P_j[r,k]  -  sum_{t,k} theta_t[r,k] x^t R[k,b]
                for r in range(n):
                    for j in range(m + 1):
                        for k in range(n):
                            terms = P[j][r * n + k]
                            for l in range(q1):
                                col = (j * q1 + l) * n + k
                                for (a, c), v in terms:
                                    put((r, a, c + l), col, v)
                    for t in range(D + 1):
                        for k in range(n):
                            col = self.n_op + (t * n + r) * n + k
                            for (a, c), v in R[k * n + b]:
                                put((r, a + t, c), col, -v)
            else:
                # entry (b, c): sum_{i,l,k} alpha * x^l * P_i[k,c]  -  sum_{t,k} F_t[k,c] z^t R[b,k]
                for c in range(n):
                    for i in range(m + 1):
                        for k in range(n):
                            terms = P[i][k * n + c]
                            for l in range(q1):
                                col = (i * q1 + l) * n + k
                                for (a, cc), v in terms:
                                    put((c, a + l, cc), col, v)
                    for t in range(D + 1):
                        for k in range(n):
                            col = self.n_op + (t * n + k) * n + c
                            for (a, cc), v in R[b * n + k]:
                                put((c, a, cc + t), col, -v)
            ech = Echelon()
            for key in sorted(rows):
                row = rows[key]
                if row:
                    ech.add(row)
            n_eq += len(rows)
            self.blocks.append(ech)
            for p, row in ech.pivots.items():
                if p >= self.n_op:
                    eig_ech.add({k - self.n_op: v for k, v in row.items()})
                else:
                    op_rank += 1
        self.eig_echelon = eig_ech
        self.n_equations = n_eq
        one = GaussianRational(1) if self.complex_mode else mpq(1)
        self.eig_space = nullspace_rows(eig_ech.rref(), self.n_eig, one)
        self.fiber_dim = n * self.n_op - op_rank
        self.joint_dim = self.fiber_dim + len(self.eig_space)
        self.seconds = time.perf_counter() - t0

    @property
    def n_unknowns(self) -> int:
        return self.n * self.n_op + self.n_eig

    def slice(self) -> AlgebraSlice:
        info = {"bounds": self.bounds.to_dict(), "side": self.side, "joint_dim": self.joint_dim,
                "fiber_dim": self.fiber_dim, "unknowns": self.n_unknowns, "equations": self.n_equations,
                "seconds": round(self.seconds, 4)}
        return AlgebraSlice.from_vectors(self.eig_var, self.n, self.bounds.eigen_deg, self.eig_space, info)

    # -- witnesses ----------------------------------------------------------
    def _solve_block(self, b: int, eig_vec: list):
        known = {self.n_op + i: v for i, v in enumerate(eig_vec) if v}
        return solve_affine(self.blocks[b], known, range(self.n_op))

    def witness(self, eig: MatPoly):
        """Canonical operator (free unknowns zero) for ``eig``, or raise NotInAlgebra."""
        if eig.var != self.eig_var or eig.n != self.n:
            raise ValueError(f"eigenvalue must be an {self.n}x{self.n} polynomial in {self.eig_var}")
        if eig.degree > self.bounds.eigen_deg:
            raise NotInAlgebra("not in algebra within bounds")
        vec = eig.to_vector(self.bounds.eigen_deg)
        if self.complex_mode:
            parts = [(GaussianRational(1), vec)]
        else:
            parts = [(GaussianRational(1), [v.re for v in vec]), (GaussianRational(0, 1), [v.im for v in vec])]
        n, q1, m = self.n, self.num_len, self.bounds.op_order
        sols = []
        for b in range(n):
            acc: dict[int, GaussianRational] = {}
            for unit, part in parts:
                if not any(part):
                    continue
                sol = self._solve_block(b, part)
                if sol is None:
                    raise NotInAlgebra("not in algebra within bounds")
                for k, v in sol.items():
                    acc[k] = acc.get(k, GaussianRational(0)) + unit * as_gr(v)
            sols.append(acc)
        basis = self.psi.basis
        coeffs = {}
        for j in range(m + 1):
            entries = []
            for r in range(n):
                for c in range(n):
                    # theta side: b_j[r, c] lives in block c with k = r; f side: a_j[r, c] in block r with k = c
                    blk, k = (c, r) if self.side == "theta" else (r, c)
                    terms = {}
                    for l in range(q1):
                        v = sols[blk].get((j * q1 + l) * n + k)
                        if v:
                            terms[(0, l) if self.op_var == "z" else (l, 0)] = v
                    entries.append(RatFun(BiPoly(terms), self.poles, basis))
            mat = MatRF(n, n, entries, basis)
            if not mat.is_zero():
                coeffs[j] = mat
        cls = RightOperator if self.side == "theta" else LeftOperator
        return cls(coeffs)


_CACHE: "OrderedDict[tuple, AnsatzSystem]" = OrderedDict()
_CACHE_SIZE = 64


def clear_cache():
    _CACHE.clear()


def _system(psi: WaveFunction, bounds: AnsatzBounds, side: str) -> AnsatzSystem:
    key = (psi.key(), bounds, side)
    sys_ = _CACHE.get(key)
    if sys_ is None:
        sys_ = AnsatzSystem(psi, bounds, side)
        _CACHE[key] = sys_
        if len(_CACHE) > _CACHE_SIZE:
            _CACHE.popitem(last=False)
    else:
        _CACHE.move_to_end(key)
    return sys_


def build_right_system(psi: WaveFunction, bounds: AnsatzBounds) -> AnsatzSystem:
    return _system(psi, bounds, "theta")


def build_left_system(psi: WaveFunction, bounds: AnsatzBounds) -> AnsatzSystem:
    return _system(psi, bounds, "f")


def theta_slice(psi: WaveFunction, bounds: AnsatzBounds) -> AlgebraSlice:
    """All theta of degree <= eigen_deg admitting a B within the bounds."""
    return build_right_system(psi, bounds).slice()


def f_slice(psi: WaveFunction, bounds: AnsatzBounds) -> AlgebraSlice:
    """All F of degree <= eigen_deg admitting an L within the bounds."""
    return build_left_system(psi, bounds).slice()


def _slice(psi, bounds, side):
    return _system(psi, bounds, side).slice()


# -- stabilization ------------------------------------------------------------

def default_schedule(d: int, steps: int = 4, start: int = 0) -> list[AnsatzBounds]:
    """``m = d, d+1, ...`` with pole order ``m`` at every factor and ``q = m + d``."""
    return [AnsatzBounds.make(d, d + k) for k in range(start, start + steps)]


@dataclass
class ConvergenceReport:
    degree: int
    side: str
    steps: list = field(default_factory=list)
    stable_step: int | None = None
    extended: bool = False
    lookahead: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = {"degree": self.degree, "side": self.side, "steps": self.steps,
             "stable_step": self.stable_step, "schedule_extended": self.extended}
        if self.lookahead:
            d["lookahead"] = self.lookahead
        return d


def stabilize(psi: WaveFunction, d: int, schedule=None, side: str = "theta",
              patience: int = 1, extra_steps: int = 4):
    """Run the slice solver along ``schedule`` until it repeats.

    Returns the first slice that is identical for ``patience`` consecutive
    comparisons, with a report.  With the default schedule up to
    ``extra_steps`` further steps are tried and flagged as an extension;
    an explicit schedule is never extended.
    """
    explicit = schedule is not None
    sched = list(schedule) if explicit else default_schedule(d)
    report = ConvergenceReport(d, side)
    prev, streak, idx = None, 0, 0
    while True:
        if idx >= len(sched):
            if explicit or report.extended:
                raise StabilizationError("no stabilization within schedule")
            report.extended = True
            sched.extend(default_schedule(d, extra_steps, start=len(sched)))
        b = sched[idx]
        if b.eigen_deg != d:
            b = b.with_degree(d)
        cur = _slice(psi, b, side)
        report.steps.append({"bounds": b.to_dict(), "dimension": cur.dim,
                             "joint_dim": cur.info["joint_dim"], "fiber_dim": cur.info["fiber_dim"],
                             "seconds": cur.info["seconds"]})
        if prev is not None and cur == prev:
            streak += 1
            if streak >= patience:
                report.stable_step = idx
                cur.info["report"] = report.to_dict()
                return cur, report
        else:
            streak = 0
        prev = cur
        idx += 1


def truncated_slice(psi: WaveFunction, d: int, side: str = "theta", max_lookahead: int = 10,
                    patience: int = 1):
    """Degree-<=d truncation of the whole eigenvalue algebra.

    Solves for the subspace slices ``S_D`` (degree <= D) at D = d, d+1, ...
    and stops once the truncation of ``S_D`` to degree d agrees with that of
    ``S_{D-1}`` and ``S_D`` contains every ``var^D E_rc``.  Beyond that point
    higher-degree elements can only contribute through the free top block.
    """
    report = ConvergenceReport(d, side)
    prev = None
    for D in range(d, d + max_lookahead + 1):
        S, rep = stabilize(psi, D, side=side, patience=patience)
        T = S.truncate(d)
        free = S.top_free()
        report.extended = report.extended or rep.extended
        report.lookahead.append({"degree": D, "dimension": S.dim, "truncated_dimension": T.dim,
                                 "top_block_free": free, "stable_step": rep.stable_step,
                                 "schedule_extended": rep.extended})
        if prev is not None and T == prev and free:
            report.stable_step = D
            T.info = {"report": report.to_dict()}
            return T, report
        prev = T
    raise StabilizationError("no stabilization within schedule")


def closure_check(psi: WaveFunction, d: int, side: str = "theta") -> dict:
    """Check that products of degree-<=d slice elements land in the degree-<=2d slice."""
    low, _ = stabilize(psi, d, side=side)
    high, _ = stabilize(psi, 2 * d, side=side)
    violators = []
    for i, a in enumerate(low.basis):
        for j, b in enumerate(low.basis):
            if not high.contains(a * b):
                violators.append({"left": i, "right": j, "product": (a * b).grid()})
    return {"ok": not violators, "degree": d, "low_dimension": low.dim,
            "high_dimension": high.dim, "violators": violators}


def witness_operator(psi: WaveFunction, eig: MatPoly, bounds: AnsatzBounds | None = None):
    """Canonical B with ``psi B = theta psi`` (or L with ``L psi = psi F`` for z-polynomials)."""
    side = "theta" if eig.var == "x" else "f"
    if bounds is None:
        bounds = AnsatzBounds.make(max(eig.degree, 0))
    elif bounds.eigen_deg < eig.degree:
        raise NotInAlgebra("not in algebra within bounds")
    return _system(psi, bounds, side).witness(eig)
