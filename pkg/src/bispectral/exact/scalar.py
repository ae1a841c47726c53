"""Gaussian rationals: exact elements of Q(i).

Both parts are stored as ``gmpy2.mpq`` values, which are always reduced with a
positive denominator.
"""

from __future__ import annotations

import re
from fractions import Fraction

from gmpy2 import mpq

__all__ = ["GaussianRational", "GR", "ZERO", "ONE", "I", "as_gr", "to_mpq"]


def to_mpq(v) -> mpq:
    if isinstance(v, mpq):
        return v
    if isinstance(v, (int, Fraction)):
        return mpq(v)
    if isinstance(v, str):
        return mpq(v)
    raise TypeError(f"cannot convert {type(v).__name__} to an exact rational")


class GaussianRational:
    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = to_mpq(re)
        self.im = to_mpq(im)

    @classmethod
    def _raw(cls, re: mpq, im: mpq) -> "GaussianRational":
        g = object.__new__(cls)
        g.re = re
        g.im = im
        return g

    # -- field operations -------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, GaussianRational):
            try:
                other = as_gr(other)
            except TypeError:
                return NotImplemented
        return GaussianRational._raw(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, GaussianRational):
            try:
                other = as_gr(other)
            except TypeError:
                return NotImplemented
        return GaussianRational._raw(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return as_gr(other) - self

    def __neg__(self):
        return GaussianRational._raw(-self.re, -self.im)

    def __mul__(self, other):
        if not isinstance(other, GaussianRational):
            try:
                other = as_gr(other)
            except TypeError:
                return NotImplemented
        a, b, c, d = self.re, self.im, other.re, other.im
        if not b and not d:
            return GaussianRational._raw(a * c, b)
        return GaussianRational._raw(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def inv(self) -> "GaussianRational":
        a, b = self.re, self.im
        if not b:
            if not a:
                raise ZeroDivisionError("inverse of zero Gaussian rational")
            return GaussianRational._raw(1 / a, b)
        n = a * a + b * b
        return GaussianRational._raw(a / n, -b / n)

    def __truediv__(self, other):
        if not isinstance(other, GaussianRational):
            try:
                other = as_gr(other)
            except TypeError:
                return NotImplemented
        return self * other.inv()

    def __rtruediv__(self, other):
        return as_gr(other) * self.inv()

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k < 0:
            return self.inv() ** (-k)
        out, base = ONE, self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self) -> "GaussianRational":
        return GaussianRational._raw(self.re, -self.im)

    # -- comparisons ------------------------------------------------------
    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, other):
        if not isinstance(other, GaussianRational):
            try:
                other = as_gr(other)
            except TypeError:
                return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if not self.im:
            return hash(self.re)
        return hash((self.re, self.im))

    def is_real(self) -> bool:
        return not self.im

    # -- text -------------------------------------------------------------
    def __str__(self):
        if not self.im:
            return _fmt(self.re)
        sign = "-" if self.im < 0 else "+"
        return f"{_fmt(self.re)}{sign}{_fmt(abs(self.im))}i"

    def __repr__(self):
        return f"GR({self})"

    @classmethod
    def parse(cls, text: str) -> "GaussianRational":
        """Inverse of ``str``: accepts ``"p/q"``, ``"a+bi"``, ``"a-bi"`` and ``"bi"``."""
        s = text.replace(" ", "")
        m = _GR_RE.fullmatch(s)
        if not m:
            raise ValueError(f"not a Gaussian rational literal: {text!r}")
        re_part, im_part, lone_im = m.group("re"), m.group("im"), m.group("lone")
        if lone_im is not None:
            return cls(0, _im_value(lone_im))
        return cls(mpq(re_part.lstrip("+")), _im_value(im_part) if im_part else 0)


_NUM = r"[0-9]+(?:/[0-9]+)?"
_GR_RE = re.compile(
    rf"(?P<lone>[+-]?(?:{_NUM})?i)|(?P<re>[+-]?{_NUM})(?P<im>[+-](?:{_NUM})?i)?"
)


def _im_value(tok: str) -> mpq:
    body = tok[:-1]
    if body in ("", "+"):
        return mpq(1)
    if body == "-":
        return mpq(-1)
    return mpq(body.lstrip("+"))


def _fmt(q: mpq) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def as_gr(v) -> GaussianRational:
    if isinstance(v, GaussianRational):
        return v
    if isinstance(v, complex):
        raise TypeError("floating complex numbers are not exact")
    return GaussianRational._raw(to_mpq(v), mpq(0))


GR = GaussianRational
ZERO = GaussianRational(0, 0)
ONE = GaussianRational(1, 0)
I = GaussianRational(0, 1)
