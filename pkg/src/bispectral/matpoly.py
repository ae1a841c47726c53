"""Matrix polynomials in one variable with constant Gaussian-rational coefficients."""

from __future__ import annotations

from .exact import BiPoly, FactorBasis, MatRF, RatFun, ShapeError
from .exact.scalar import ONE, ZERO, as_gr


class MatPoly:
    """``sum_k C_k var^k`` with each ``C_k`` an n x n constant matrix (row-major tuple).

    Trailing zero coefficients are dropped, so ``degree`` is canonical and the
    zero polynomial has degree -1.
    """

    __slots__ = ("var", "n", "coeffs")

    def __init__(self, var: str, n: int, coeffs=()):
        if var not in ("x", "z"):
            raise ValueError(f"MatPoly variable must be x or z, got {var!r}")
        cs = [tuple(as_gr(v) for v in c) for c in coeffs]
        for c in cs:
            if len(c) != n * n:
                raise ShapeError(f"coefficient of size {len(c)} in a {n}x{n} MatPoly")
        while cs and not any(cs[-1]):
            cs.pop()
        self.var, self.n, self.coeffs = var, n, tuple(cs)

    # -- constructors -----------------------------------------------------
    @classmethod
    def zero(cls, var: str, n: int) -> "MatPoly":
        return cls(var, n, ())

    @classmethod
    def identity(cls, var: str, n: int) -> "MatPoly":
        return cls.unit(var, n, 0, None)

    @classmethod
    def unit(cls, var: str, n: int, k: int, rc=None, c=ONE) -> "MatPoly":
        """``c * var^k * E_rc``; ``rc=None`` gives ``c * var^k * I``."""
        mat = [ZERO] * (n * n)
        if rc is None:
            for r in range(n):
                mat[r * n + r] = as_gr(c)
        else:
            mat[rc[0] * n + rc[1]] = as_gr(c)
        return cls(var, n, [(ZERO,) * (n * n)] * k + [tuple(mat)])

    @classmethod
    def from_grid(cls, var: str, grid) -> "MatPoly":
        """Build from an n x n grid of univariate coefficient lists (lowest degree first)."""
        n = len(grid)
        deg = max((len(e) for row in grid for e in row), default=0)
        coeffs = []
        for k in range(deg):
            coeffs.append(tuple(as_gr(grid[r][c][k]) if k < len(grid[r][c]) else ZERO
                                for r in range(n) for c in range(n)))
        return cls(var, n, coeffs)

    @classmethod
    def from_vector(cls, var: str, n: int, vec) -> "MatPoly":
        nn = n * n
        vec = list(vec)
        return cls(var, n, [vec[k:k + nn] for k in range(0, len(vec), nn)])

    # -- structure --------------------------------------------------------
    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coefficient(self, k: int) -> tuple:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return (ZERO,) * (self.n * self.n)

    def entry(self, k: int, r: int, c: int):
        return self.coefficient(k)[r * self.n + c]

    def to_vector(self, d: int) -> list:
        """Coordinates ordered by (degree, row, column) up to degree d."""
        if self.degree > d:
            raise ValueError(f"degree {self.degree} exceeds vector length for degree {d}")
        out = []
        for k in range(d + 1):
            out.extend(self.coefficient(k))
        return out

    def truncate(self, d: int) -> "MatPoly":
        return MatPoly(self.var, self.n, self.coeffs[:d + 1])

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_scalar(self) -> bool:
        n = self.n
        for c in self.coeffs:
            for r in range(n):
                for s in range(n):
                    v = c[r * n + s]
                    if (r != s and v) or (r == s and v != c[0]):
                        return False
        return True

    # -- arithmetic -------------------------------------------------------
    def _check(self, other: "MatPoly"):
        if self.var != other.var or self.n != other.n:
            raise ShapeError("MatPoly operands differ in variable or size")

    def __add__(self, other: "MatPoly") -> "MatPoly":
        self._check(other)
        m = max(len(self.coeffs), len(other.coeffs))
        return MatPoly(self.var, self.n, [
            tuple(a + b for a, b in zip(self.coefficient(k), other.coefficient(k))) for k in range(m)])

    def __neg__(self) -> "MatPoly":
        return MatPoly(self.var, self.n, [tuple(-a for a in c) for c in self.coeffs])

    def __sub__(self, other: "MatPoly") -> "MatPoly":
        return self + (-other)

    def scale(self, s) -> "MatPoly":
        s = as_gr(s)
        return MatPoly(self.var, self.n, [tuple(a * s for a in c) for c in self.coeffs])

    def __mul__(self, other) -> "MatPoly":
        if not isinstance(other, MatPoly):
            return self.scale(other)
        self._check(other)
        n = self.n
        if not self.coeffs or not other.coeffs:
            return MatPoly.zero(self.var, n)
        out = [[ZERO] * (n * n) for _ in range(len(self.coeffs) + len(other.coeffs) - 1)]
        for i, A in enumerate(self.coeffs):
            for j, B in enumerate(other.coeffs):
                acc = out[i + j]
                for r in range(n):
                    for k in range(n):
                        a = A[r * n + k]
                        if not a:
                            continue
                        for c in range(n):
                            b = B[k * n + c]
                            if b:
                                acc[r * n + c] = acc[r * n + c] + a * b
        return MatPoly(self.var, n, out)

    __rmul__ = scale

    def __pow__(self, k: int) -> "MatPoly":
        out = MatPoly.identity(self.var, self.n)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, MatPoly):
            return NotImplemented
        return self.var == other.var and self.n == other.n and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.var, self.n, self.coeffs))

    # -- conversion -------------------------------------------------------
    def entry_poly(self, r: int, c: int) -> BiPoly:
        idx = 0 if self.var == "x" else 1
        terms = {}
        for k, C in enumerate(self.coeffs):
            v = C[r * self.n + c]
            if v:
                terms[(k, 0) if idx == 0 else (0, k)] = v
        return BiPoly(terms)

    def to_matrf(self, basis: FactorBasis) -> MatRF:
        n = self.n
        return MatRF(n, n, [RatFun.from_poly(self.entry_poly(r, c), basis)
                            for r in range(n) for c in range(n)], basis)

    def grid(self) -> list[list[str]]:
        from .exprio import format_bipoly

        return [[format_bipoly(self.entry_poly(r, c)) for c in range(self.n)] for r in range(self.n)]

    def __repr__(self):
        return f"MatPoly({self.var}, {self.grid()})"
