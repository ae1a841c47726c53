"""Dense matrices of RatFun entries sharing one FactorBasis."""

from __future__ import annotations

from .ratfun import BasisError, FactorBasis, RatFun


class ShapeError(ValueError):
    pass


class MatRF:
    __slots__ = ("rows", "cols", "entries", "basis")

    def __init__(self, rows: int, cols: int, entries, basis: FactorBasis):
        entries = tuple(entries)
        if rows <= 0 or cols <= 0 or len(entries) != rows * cols:
            raise ShapeError(f"bad matrix shape {rows}x{cols} for {len(entries)} entries")
        for e in entries:
            if e.basis != basis:
                raise BasisError("matrix entries must share the matrix basis")
        self.rows, self.cols, self.entries, self.basis = rows, cols, entries, basis

    @classmethod
    def from_rows(cls, rows, basis: FactorBasis) -> "MatRF":
        rows = [list(r) for r in rows]
        return cls(len(rows), len(rows[0]), [e for r in rows for e in r], basis)

    @classmethod
    def zeros(cls, rows: int, cols: int, basis: FactorBasis) -> "MatRF":
        z = RatFun.zero(basis)
        return cls(rows, cols, [z] * (rows * cols), basis)

    @classmethod
    def identity(cls, n: int, basis: FactorBasis) -> "MatRF":
        one, z = RatFun.const(1, basis), RatFun.zero(basis)
        return cls(n, n, [one if r == c else z for r in range(n) for c in range(n)], basis)

    @classmethod
    def scalar(cls, n: int, value: RatFun) -> "MatRF":
        z = RatFun.zero(value.basis)
        return cls(n, n, [value if r == c else z for r in range(n) for c in range(n)], value.basis)

    def __getitem__(self, rc) -> RatFun:
        r, c = rc
        return self.entries[r * self.cols + c]

    def row(self, r: int):
        return self.entries[r * self.cols:(r + 1) * self.cols]

    def col(self, c: int):
        return self.entries[c::self.cols]

    @property
    def shape(self):
        return (self.rows, self.cols)

    def _same_shape(self, other: "MatRF"):
        if self.shape != other.shape:
            raise ShapeError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "MatRF") -> "MatRF":
        self._same_shape(other)
        return MatRF(self.rows, self.cols, [a + b for a, b in zip(self.entries, other.entries)], self.basis)

    def __sub__(self, other: "MatRF") -> "MatRF":
        self._same_shape(other)
        return MatRF(self.rows, self.cols, [a - b for a, b in zip(self.entries, other.entries)], self.basis)

    def __neg__(self) -> "MatRF":
        return MatRF(self.rows, self.cols, [-a for a in self.entries], self.basis)

    def __mul__(self, other) -> "MatRF":
        if not isinstance(other, MatRF):
            return self.scale(other)
        if self.cols != other.rows:
            raise ShapeError(f"cannot multiply {self.shape} by {other.shape}")
        out = []
        zero = RatFun.zero(self.basis)
        for r in range(self.rows):
            row = self.row(r)
            for c in range(other.cols):
                acc = zero
                for k in range(self.cols):
                    a, b = row[k], other.entries[k * other.cols + c]
                    if a.num and b.num:
                        acc = acc + a * b
                out.append(acc)
        return MatRF(self.rows, other.cols, out, self.basis)

    def scale(self, s) -> "MatRF":
        """Multiply every entry by a scalar or a RatFun."""
        return MatRF(self.rows, self.cols, [a * s if a.num else a for a in self.entries], self.basis)

    def diff(self, var: str) -> "MatRF":
        return MatRF(self.rows, self.cols, [a.diff(var) for a in self.entries], self.basis)

    def transpose(self) -> "MatRF":
        return MatRF(self.cols, self.rows, [self[r, c] for c in range(self.cols) for r in range(self.rows)], self.basis)

    def is_zero(self) -> bool:
        return all(not a.num for a in self.entries)

    def depends_on(self, var: str) -> bool:
        return any(a.depends_on(var) for a in self.entries)

    def is_real(self) -> bool:
        return all(a.is_real() for a in self.entries)

    def first_nonzero(self):
        for k, a in enumerate(self.entries):
            if a.num:
                return divmod(k, self.cols), a
        return None

    def __eq__(self, other) -> bool:
        if not isinstance(other, MatRF):
            return NotImplemented
        if self.basis != other.basis:
            return False
        return self.shape == other.shape and all(a == b for a, b in zip(self.entries, other.entries))

    def __hash__(self):
        return hash((self.rows, self.cols, self.entries))

    def rebase(self, basis: FactorBasis) -> "MatRF":
        if basis == self.basis:
            return self
        return MatRF(self.rows, self.cols, [a.rebase(basis) for a in self.entries], basis)

    def __repr__(self):
        body = "; ".join(", ".join(str(self[r, c]) for c in range(self.cols)) for r in range(self.rows))
        return f"MatRF[{body}]"
