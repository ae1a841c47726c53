"""Sparse polynomials in x and z with Gaussian-rational coefficients."""

from __future__ import annotations

from typing import Iterable

from . import upoly
from .scalar import ZERO, GaussianRational, as_gr

VARS = ("x", "z")


class BiPoly:
    """Map ``(deg_x, deg_z) -> coefficient``; zero coefficients are never stored."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for k, v in terms.items():
                v = as_gr(v)
                if v:
                    clean[(int(k[0]), int(k[1]))] = v
        self.terms = clean
        self._hash = None

    @classmethod
    def _wrap(cls, terms: dict) -> "BiPoly":
        p = object.__new__(cls)
        p.terms = terms
        p._hash = None
        return p

    @classmethod
    def const(cls, c) -> "BiPoly":
        c = as_gr(c)
        return cls._wrap({(0, 0): c} if c else {})

    @classmethod
    def monomial(cls, i: int, j: int, c=1) -> "BiPoly":
        c = as_gr(c)
        return cls._wrap({(i, j): c} if c else {})

    @classmethod
    def var(cls, name: str) -> "BiPoly":
        return cls.monomial(1, 0) if name == "x" else cls.monomial(0, 1)

    @classmethod
    def from_upoly(cls, coeffs: Iterable, var: str) -> "BiPoly":
        if var == "x":
            return cls._wrap({(k, 0): c for k, c in enumerate(coeffs) if c})
        return cls._wrap({(0, k): c for k, c in enumerate(coeffs) if c})

    # -- ring operations --------------------------------------------------
    def __add__(self, other: "BiPoly") -> "BiPoly":
        if not isinstance(other, BiPoly):
            other = BiPoly.const(other)
        if len(other.terms) > len(self.terms):
            self, other = other, self
        out = dict(self.terms)
        for k, v in other.terms.items():
            s = out.get(k)
            if s is None:
                out[k] = v
            else:
                s = s + v
                if s:
                    out[k] = s
                else:
                    del out[k]
        return BiPoly._wrap(out)

    __radd__ = __add__

    def __neg__(self) -> "BiPoly":
        return BiPoly._wrap({k: -v for k, v in self.terms.items()})

    def __sub__(self, other: "BiPoly") -> "BiPoly":
        if not isinstance(other, BiPoly):
            other = BiPoly.const(other)
        return self + (-other)

    def __rsub__(self, other):
        return BiPoly.const(other) - self

    def __mul__(self, other) -> "BiPoly":
        if not isinstance(other, BiPoly):
            return self.scale(other)
        if not self.terms or not other.terms:
            return BiPoly._wrap({})
        out: dict = {}
        for (a, b), u in self.terms.items():
            for (c, d), v in other.terms.items():
                k = (a + c, b + d)
                s = out.get(k)
                out[k] = u * v if s is None else s + u * v
        return BiPoly._wrap({k: v for k, v in out.items() if v})

    def __rmul__(self, other) -> "BiPoly":
        return self.scale(other)

    def scale(self, c) -> "BiPoly":
        c = as_gr(c)
        if not c:
            return BiPoly._wrap({})
        return BiPoly._wrap({k: v * c for k, v in self.terms.items()})

    def shift(self, i: int, j: int) -> "BiPoly":
        """Multiply by the monomial x^i z^j."""
        return BiPoly._wrap({(a + i, b + j): v for (a, b), v in self.terms.items()})

    def __pow__(self, k: int) -> "BiPoly":
        out = BiPoly.const(1)
        for _ in range(k):
            out = out * self
        return out

    def diff(self, var: str) -> "BiPoly":
        out = {}
        if var == "x":
            for (a, b), v in self.terms.items():
                if a:
                    out[(a - 1, b)] = v * a
        else:
            for (a, b), v in self.terms.items():
                if b:
                    out[(a, b - 1)] = v * b
        return BiPoly._wrap(out)

    # -- queries ----------------------------------------------------------
    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if not isinstance(other, BiPoly):
            if isinstance(other, (int, GaussianRational)):
                other = BiPoly.const(other)
            else:
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def degree(self, var: str) -> int:
        """Degree in ``var``; -1 for the zero polynomial."""
        idx = 0 if var == "x" else 1
        return max((k[idx] for k in self.terms), default=-1)

    def low_degree(self, var: str) -> int:
        idx = 0 if var == "x" else 1
        return min((k[idx] for k in self.terms), default=0)

    def depends_on(self, var: str) -> bool:
        return self.degree(var) > 0

    def constant_value(self) -> GaussianRational | None:
        if not self.terms:
            return ZERO
        if len(self.terms) == 1 and (0, 0) in self.terms:
            return self.terms[(0, 0)]
        return None

    def coefficient(self, i: int, j: int) -> GaussianRational:
        return self.terms.get((i, j), ZERO)

    def slices(self, var: str) -> dict[int, tuple]:
        """Split into ``{k: univariate poly in var}`` keyed by the power of the other variable."""
        idx, other = (0, 1) if var == "x" else (1, 0)
        rows: dict[int, dict[int, GaussianRational]] = {}
        for k, v in self.terms.items():
            rows.setdefault(k[other], {})[k[idx]] = v
        out = {}
        for key, row in rows.items():
            n = max(row) + 1
            out[key] = tuple(row.get(t, ZERO) for t in range(n))
        return out

    def divexact_univariate(self, f: tuple, var: str) -> "BiPoly | None":
        """Exact quotient by a univariate polynomial in ``var``; None if it does not divide."""
        out = {}
        for key, p in self.slices(var).items():
            q, r = upoly.divmod_(p, f)
            if r:
                return None
            for t, c in enumerate(q):
                if c:
                    out[(t, key) if var == "x" else (key, t)] = c
        return BiPoly._wrap(out)

    def is_real(self) -> bool:
        return all(v.is_real() for v in self.terms.values())

    def sorted_terms(self):
        """Terms in descending (total degree, x-degree) order, the print order."""
        return sorted(self.terms.items(), key=lambda kv: (-(kv[0][0] + kv[0][1]), -kv[0][0]))

    def __repr__(self):
        from ..exprio import format_bipoly

        return f"BiPoly({format_bipoly(self)})"
