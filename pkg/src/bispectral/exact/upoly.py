"""Dense univariate polynomials over Q(i) as coefficient tuples, lowest degree first.

Only what the factor bases and the rational antiderivative need: division with
remainder, extended gcd and differentiation.
"""

from __future__ import annotations

from .scalar import ONE, ZERO, GaussianRational, as_gr

UPoly = tuple  # tuple[GaussianRational, ...], no trailing zeros


def trim(coeffs) -> UPoly:
    c = [as_gr(v) for v in coeffs]
    while c and not c[-1]:
        c.pop()
    return tuple(c)


def degree(p: UPoly) -> int:
    return len(p) - 1


def add(p: UPoly, q: UPoly) -> UPoly:
    n = max(len(p), len(q))
    return trim((p[k] if k < len(p) else ZERO) + (q[k] if k < len(q) else ZERO) for k in range(n))


def sub(p: UPoly, q: UPoly) -> UPoly:
    return add(p, tuple(-c for c in q))


def mul(p: UPoly, q: UPoly) -> UPoly:
    if not p or not q:
        return ()
    out = [ZERO] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if not a:
            continue
        for j, b in enumerate(q):
            out[i + j] = out[i + j] + a * b
    return trim(out)


def scale(p: UPoly, c: GaussianRational) -> UPoly:
    return trim(a * c for a in p)


def deriv(p: UPoly) -> UPoly:
    return trim(p[k] * k for k in range(1, len(p)))


def divmod_(p: UPoly, q: UPoly) -> tuple[UPoly, UPoly]:
    if not q:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(p)
    dq = len(q) - 1
    lead_inv = q[-1].inv()
    quo = [ZERO] * max(len(p) - dq, 0)
    for k in range(len(p) - 1, dq - 1, -1):
        c = r[k]
        if not c:
            continue
        f = c * lead_inv
        quo[k - dq] = f
        for j in range(dq + 1):
            r[k - dq + j] = r[k - dq + j] - f * q[j]
    return trim(quo), trim(r[:dq] if dq > 0 else [])


def monic(p: UPoly) -> UPoly:
    if not p:
        return p
    inv = p[-1].inv()
    return tuple(c * inv for c in p)


def gcd(p: UPoly, q: UPoly) -> UPoly:
    while q:
        p, q = q, divmod_(p, q)[1]
    return monic(p)


def gcdex(p: UPoly, q: UPoly) -> tuple[UPoly, UPoly, UPoly]:
    """Return (s, t, g) with s*p + t*q = g = monic gcd(p, q)."""
    r0, r1 = p, q
    s0, s1 = (ONE,), ()
    t0, t1 = (), (ONE,)
    while r1:
        quo, rem = divmod_(r0, r1)
        r0, r1 = r1, rem
        s0, s1 = s1, sub(s0, mul(quo, s1))
        t0, t1 = t1, sub(t0, mul(quo, t1))
    if not r0:
        return (), (), ()
    inv = r0[-1].inv()
    return scale(s0, inv), scale(t0, inv), scale(r0, inv)


def power(p: UPoly, k: int) -> UPoly:
    out: UPoly = (ONE,)
    for _ in range(k):
        out = mul(out, p)
    return out


def integrate(p: UPoly) -> UPoly:
    """Antiderivative with zero constant term."""
    return trim([ZERO] + [c / (k + 1) for k, c in enumerate(p)])
