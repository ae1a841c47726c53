"""Exact sparse Gaussian elimination over Q or Q(i).

Rows are dicts ``{column: value}``.  Values are ``gmpy2.mpq`` when the whole
system is real (fast path) and :class:`GaussianRational` otherwise.  Pivot
columns are always the first nonzero column, so every echelon form produced
here reduces to the unique reduced row echelon form.
"""

from __future__ import annotations

import heapq
from typing import Iterable, Sequence

from gmpy2 import mpq

from .scalar import GaussianRational, as_gr

__all__ = ["Echelon", "exact_nullspace", "rref", "rank", "to_field", "field_rows", "solve_affine",
           "nullspace_rows"]


def to_field(v, complex_mode: bool):
    v = as_gr(v)
    if complex_mode:
        return v
    if v.im:
        raise ValueError("complex value in a real system")
    return v.re


def field_rows(rows: Iterable[dict]) -> tuple[list[dict], bool]:
    """Convert GaussianRational rows to field values; returns (rows, complex_mode)."""
    rows = [dict(r) for r in rows]
    complex_mode = any(as_gr(v).im for r in rows for v in r.values())
    return [{k: to_field(v, complex_mode) for k, v in r.items() if v} for r in rows], complex_mode


class Echelon:
    """Incrementally maintained row echelon form (pivot rows normalized to 1)."""

    def __init__(self):
        self.pivots: dict[int, dict] = {}

    def __len__(self):
        return len(self.pivots)

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def reduce(self, row: dict) -> dict:
        row = {k: v for k, v in row.items() if v}
        pivots = self.pivots
        heap = [c for c in row if c in pivots]
        heapq.heapify(heap)
        while heap:
            c = heapq.heappop(heap)
            v = row.get(c)
            if v is None:
                continue
            for k, pv in pivots[c].items():
                old = row.get(k)
                if old is None:
                    row[k] = -v * pv
                    if k in pivots:
                        heapq.heappush(heap, k)
                else:
                    new = old - v * pv
                    if new:
                        row[k] = new
                    else:
                        del row[k]
        return row

    def add(self, row: dict) -> int | None:
        """Insert a row; return its new pivot column, or None if it was dependent."""
        row = self.reduce(row)
        if not row:
            return None
        p = min(row)
        inv = 1 / row[p]
        self.pivots[p] = {k: v * inv for k, v in row.items()}
        return p

    def contains(self, row: dict) -> bool:
        return not self.reduce(row)

    def rref(self) -> list[dict]:
        """Fully reduced rows sorted by pivot column."""
        done: dict[int, dict] = {}
        for p in sorted(self.pivots, reverse=True):
            row = dict(self.pivots[p])
            for c in sorted(k for k in row if k != p and k in done):
                v = row.get(c)
                if v is None:
                    continue
                for k, pv in done[c].items():
                    new = row.get(k, 0) - v * pv
                    if new:
                        row[k] = new
                    else:
                        row.pop(k, None)
            done[p] = row
        return [done[p] for p in sorted(done)]


def rref(rows: Iterable[dict]) -> list[dict]:
    ech = Echelon()
    for r in rows:
        ech.add(r)
    return ech.rref()


def rank(rows: Iterable[dict]) -> int:
    ech = Echelon()
    for r in rows:
        ech.add(r)
    return ech.rank


def solve_affine(ech: Echelon, known: dict, unknown_cols: Sequence[int]):
    """Solve the echelon system for ``unknown_cols`` with the remaining columns fixed by ``known``.

    Free unknowns are set to zero.  Returns ``{col: value}`` or None when the
    fixed values are inconsistent with the system.
    """
    unknown = set(unknown_cols)
    sol: dict[int, object] = {}
    for p in sorted(ech.pivots, reverse=True):
        row = ech.pivots[p]
        acc = 0
        for k, v in row.items():
            if k == p:
                continue
            x = sol.get(k) if k in unknown else known.get(k)
            if x:
                acc = acc + v * x
        if p in unknown:
            if acc:
                sol[p] = -acc
        elif acc + (known.get(p) or 0):
            return None
    return sol


def nullspace_rows(reduced: Sequence[dict], ncols: int, one) -> list[dict]:
    """RREF basis of the nullspace of a system already in reduced row echelon form."""
    pivot_cols = [min(r) for r in reduced]
    pivset = set(pivot_cols)
    null = Echelon()
    for f in range(ncols):
        if f in pivset:
            continue
        vec = {f: one}
        for p, r in zip(pivot_cols, reduced):
            c = r.get(f)
            if c:
                vec[p] = -c
        null.add(vec)
    return null.rref()


def exact_nullspace(A: Sequence[Sequence]) -> list[list[GaussianRational]]:
    """Basis of ``{v : A v = 0}`` as the reduced row echelon rows of the nullspace.

    ``A`` is a dense matrix of exact scalars.  Every returned vector ``v``
    satisfies ``A v = 0`` exactly and the count is ``cols - rank``.
    """
    if not A:
        return []
    ncols = len(A[0])
    rows, cmode = field_rows({c: v for c, v in enumerate(r) if as_gr(v)} for r in A)
    one = as_gr(1) if cmode else mpq(1)
    return [[as_gr(r.get(c, 0)) for c in range(ncols)] for r in nullspace_rows(rref(rows), ncols, one)]
