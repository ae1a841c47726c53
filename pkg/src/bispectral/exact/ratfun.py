"""Rational functions in x, z whose denominators factor over a registered basis.

A denominator is an exponent vector over a :class:`FactorBasis` of monic,
pairwise coprime univariate polynomials, so no bivariate gcd is ever needed:
reduction is trial division by the registered factors only.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from . import upoly
from .bipoly import BiPoly
from .scalar import ONE, GaussianRational, as_gr


class BasisError(ValueError):
    pass


@dataclass(frozen=True)
class Factor:
    var: str
    coeffs: tuple  # monic UPoly, degree >= 1

    def __post_init__(self):
        if self.var not in ("x", "z"):
            raise BasisError(f"factor variable must be x or z, got {self.var!r}")
        c = upoly.trim(self.coeffs)
        if len(c) < 2:
            raise BasisError("a factor must have positive degree")
        object.__setattr__(self, "coeffs", upoly.monic(c))

    @cached_property
    def poly(self) -> BiPoly:
        return BiPoly.from_upoly(self.coeffs, self.var)

    @cached_property
    def deriv(self) -> BiPoly:
        return BiPoly.from_upoly(upoly.deriv(self.coeffs), self.var)

    def __str__(self):
        from ..exprio import format_bipoly

        return format_bipoly(self.poly)


class FactorBasis:
    """Ordered, pairwise coprime factors shared by every RatFun of a problem."""

    def __init__(self, factors):
        self.factors = tuple(factors)
        for a in range(len(self.factors)):
            for b in range(a):
                fa, fb = self.factors[a], self.factors[b]
                if fa == fb:
                    raise BasisError(f"duplicate factor {fa}")
                if fa.var == fb.var and len(upoly.gcd(fa.coeffs, fb.coeffs)) > 1:
                    raise BasisError(f"factors {fb} and {fa} are not coprime")
        self._powers: dict[tuple[int, int], BiPoly] = {}

    def __len__(self):
        return len(self.factors)

    def __iter__(self):
        return iter(self.factors)

    def __eq__(self, other):
        return isinstance(other, FactorBasis) and self.factors == other.factors

    def __hash__(self):
        return hash(self.factors)

    def __repr__(self):
        return "FactorBasis([" + ", ".join(str(f) for f in self.factors) + "])"

    def index(self, f: Factor) -> int:
        return self.factors.index(f)

    def power(self, idx: int, k: int) -> BiPoly:
        key = (idx, k)
        p = self._powers.get(key)
        if p is None:
            p = BiPoly.const(1) if k == 0 else self.power(idx, k - 1) * self.factors[idx].poly
            self._powers[key] = p
        return p

    def expand(self, den: tuple) -> BiPoly:
        out = BiPoly.const(1)
        for idx, k in enumerate(den):
            if k:
                out = out * self.power(idx, k)
        return out

    def zero_den(self) -> tuple:
        return (0,) * len(self.factors)

    def extend(self, factors) -> "FactorBasis":
        new = [f for f in factors if f not in self.factors]
        return FactorBasis(self.factors + tuple(new)) if new else self


class RatFun:
    """``num / prod(factor_k ** den[k])`` over a FactorBasis; immutable."""

    __slots__ = ("num", "den", "basis", "_hash")

    def __init__(self, num: BiPoly, den: tuple | None, basis: FactorBasis, normalize: bool = True):
        if den is None:
            den = basis.zero_den()
        if len(den) != len(basis):
            raise BasisError("denominator exponent vector does not match the basis")
        if any(k < 0 for k in den):
            raise BasisError("negative denominator exponent")
        self.basis = basis
        self._hash = None
        if normalize:
            num, den = _normalize(num, tuple(den), basis)
        self.num = num
        self.den = tuple(den)

    # -- constructors -----------------------------------------------------
    @classmethod
    def const(cls, c, basis: FactorBasis) -> "RatFun":
        return cls(BiPoly.const(c), None, basis, normalize=False)

    @classmethod
    def zero(cls, basis: FactorBasis) -> "RatFun":
        return cls(BiPoly(), None, basis, normalize=False)

    @classmethod
    def from_poly(cls, p: BiPoly, basis: FactorBasis) -> "RatFun":
        return cls(p, None, basis, normalize=False)

    @classmethod
    def var(cls, name: str, basis: FactorBasis) -> "RatFun":
        return cls(BiPoly.var(name), None, basis, normalize=False)

    def _check(self, other: "RatFun"):
        if other.basis is not self.basis and other.basis != self.basis:
            raise BasisError("RatFun operands use different factor bases")

    def _coerce(self, other) -> "RatFun":
        if isinstance(other, RatFun):
            self._check(other)
            return other
        if isinstance(other, BiPoly):
            return RatFun.from_poly(other, self.basis)
        return RatFun.const(other, self.basis)

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other) -> "RatFun":
        other = self._coerce(other)
        if not other.num:
            return self
        if not self.num:
            return other
        if self.den == other.den:
            return RatFun(self.num + other.num, self.den, self.basis)
        common = tuple(max(a, b) for a, b in zip(self.den, other.den))
        b = self.basis
        n1 = self.num * b.expand(tuple(c - a for c, a in zip(common, self.den)))
        n2 = other.num * b.expand(tuple(c - a for c, a in zip(common, other.den)))
        return RatFun(n1 + n2, common, b)

    __radd__ = __add__

    def __neg__(self) -> "RatFun":
        return RatFun(-self.num, self.den, self.basis, normalize=False)

    def __sub__(self, other) -> "RatFun":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "RatFun":
        return self._coerce(other) - self

    def __mul__(self, other) -> "RatFun":
        other = self._coerce(other)
        if not self.num or not other.num:
            return RatFun.zero(self.basis)
        den = tuple(a + b for a, b in zip(self.den, other.den))
        return RatFun(self.num * other.num, den, self.basis)

    __rmul__ = __mul__

    def scale(self, c) -> "RatFun":
        return RatFun(self.num.scale(c), self.den, self.basis, normalize=False)

    def __pow__(self, k: int) -> "RatFun":
        if k < 0:
            raise ValueError("negative powers need the parser's factor division")
        out = RatFun.const(1, self.basis)
        for _ in range(k):
            out = out * self
        return out

    def div_factor_power(self, den: tuple, c: GaussianRational = ONE) -> "RatFun":
        """Divide by ``c * prod(factor_k ** den[k])``."""
        c = as_gr(c)
        return RatFun(self.num.scale(c.inv()), tuple(a + b for a, b in zip(self.den, den)), self.basis)

    def diff(self, var: str) -> "RatFun":
        """Quotient rule over the factored denominator."""
        b = self.basis
        active = [k for k, e in enumerate(self.den) if e and b.factors[k].var == var]
        if not active:
            return RatFun(self.num.diff(var), self.den, b)
        prod_active = BiPoly.const(1)
        for k in active:
            prod_active = prod_active * b.factors[k].poly
        num = self.num.diff(var) * prod_active
        for k in active:
            rest = BiPoly.const(1)
            for l in active:
                if l != k:
                    rest = rest * b.factors[l].poly
            num = num - (self.num * b.factors[k].deriv * rest).scale(self.den[k])
        den = tuple(e + 1 if k in active else e for k, e in enumerate(self.den))
        return RatFun(num, den, b)

    # -- queries ----------------------------------------------------------
    def __bool__(self):
        return bool(self.num)

    def is_zero(self) -> bool:
        return not self.num

    def __eq__(self, other) -> bool:
        if not isinstance(other, RatFun):
            if isinstance(other, (int, GaussianRational, BiPoly)):
                other = self._coerce(other)
            else:
                return NotImplemented
        if self.basis != other.basis:
            # values over different bases are never identified (keeps mixed dict keys safe)
            return False
        if self.den == other.den:
            return self.num == other.num
        b = self.basis
        return self.num * b.expand(other.den) == other.num * b.expand(self.den)

    def __hash__(self):
        # normalized forms are unique for a pairwise coprime basis
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def depends_on(self, var: str) -> bool:
        if self.num.depends_on(var):
            return True
        return any(e and f.var == var for e, f in zip(self.den, self.basis.factors))

    def den_poly(self) -> BiPoly:
        return self.basis.expand(self.den)

    def is_polynomial(self) -> bool:
        return not any(self.den)

    def constant_value(self) -> GaussianRational | None:
        if any(self.den):
            return None
        return self.num.constant_value()

    def is_real(self) -> bool:
        return self.num.is_real() and all(
            all(c.is_real() for c in f.coeffs) for e, f in zip(self.den, self.basis.factors) if e
        )

    def rebase(self, basis: FactorBasis) -> "RatFun":
        """Re-express over a basis that contains every factor this one uses."""
        den = [0] * len(basis)
        for e, f in zip(self.den, self.basis.factors):
            if e:
                try:
                    den[basis.index(f)] = e
                except ValueError:
                    raise BasisError(f"factor {f} missing from target basis") from None
        return RatFun(self.num, tuple(den), basis, normalize=False)

    def __str__(self):
        from ..exprio import format_ratfun

        return format_ratfun(self)

    def __repr__(self):
        return f"RatFun({self})"


def _normalize(num: BiPoly, den: tuple, basis: FactorBasis):
    if not num:
        return num, basis.zero_den()
    if not any(den):
        return num, den
    den = list(den)
    for k, e in enumerate(den):
        f = basis.factors[k]
        while e:
            q = num.divexact_univariate(f.coeffs, f.var)
            if q is None:
                break
            num, e = q, e - 1
        den[k] = e
    return num, tuple(den)
