"""Expression parsing, problem files and report serialization.

Grammar (deterministic recursive descent)::

    expr   := term { ("+" | "-") term }
    term   := unary { ("*" | "/") unary }
    unary  := ["-"] factor
    factor := base ["^" ["-"] integer]
    base   := integer | integer "/" integer | "i" | "x" | "z" | "(" expr ")"

``integer "/" integer`` is read greedily as a rational literal, so ``2/3^2``
means ``(2/3)^2``.  A divisor (or a base raised to a negative power) must be a
nonzero constant times a product of powers of declared factors.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .exact import BiPoly, Factor, FactorBasis, MatRF, RatFun
from .exact.scalar import ONE, GaussianRational, as_gr
from .matpoly import MatPoly


class ParseError(ValueError):
    def __init__(self, msg: str, pos: int | None = None, text: str | None = None):
        self.pos = pos
        self.text = text
        where = f" at position {pos}" if pos is not None else ""
        super().__init__(f"{msg}{where}" + (f" in {text!r}" if text is not None else ""))


class SchemaError(ValueError):
    pass


_TOKEN = re.compile(r"\s*(?:(?P<int>[0-9]+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))")


def _tokenize(text: str):
    toks, pos = [], 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos:].lstrip()[:1]!r}", pos, text)
        start = m.start(m.lastgroup)
        toks.append((m.lastgroup, m.group(m.lastgroup), start))
        pos = m.end()
    toks.append(("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, basis: FactorBasis):
        self.text, self.basis = text, basis
        self.toks = _tokenize(text)
        self.k = 0

    def peek(self, offset: int = 0):
        return self.toks[min(self.k + offset, len(self.toks) - 1)]

    def take(self):
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect(self, value: str):
        t = self.take()
        if t[1] != value:
            raise ParseError(f"expected {value!r}, found {t[1] or 'end of input'!r}", t[2], self.text)

    def fail(self, msg: str, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok[2], self.text)

    def parse(self) -> RatFun:
        v = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected token {self.peek()[1]!r}")
        return v

    def expr(self) -> RatFun:
        v = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            v = v + rhs if op == "+" else v - rhs
        return v

    def term(self) -> RatFun:
        v = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()
            rhs = self.unary()
            v = v * rhs if op[1] == "*" else self.divide(v, rhs, op)
        return v

    def unary(self) -> RatFun:
        if self.peek()[1] == "-":
            self.take()
            return -self.factor()
        return self.factor()

    def factor(self) -> RatFun:
        start = self.peek()
        b = self.base()
        if self.peek()[1] == "^":
            self.take()
            neg = False
            if self.peek()[1] == "-":
                self.take()
                neg = True
            t = self.take()
            if t[0] != "int":
                self.fail("exponent must be an integer", t)
            k = int(t[1])
            if neg:
                return self.divide(RatFun.const(1, self.basis), b ** k, start)
            return b ** k
        return b

    def base(self) -> RatFun:
        t = self.take()
        kind, val = t[0], t[1]
        if kind == "int":
            if self.peek()[1] == "/" and self.peek(1)[0] == "int":
                self.take()
                den = int(self.take()[1])
                if den == 0:
                    self.fail("division by zero", t)
                return RatFun.const(GaussianRational(f"{val}/{den}"), self.basis)
            return RatFun.const(int(val), self.basis)
        if kind == "name":
            if val == "i":
                return RatFun.const(GaussianRational(0, 1), self.basis)
            if val in ("x", "z"):
                return RatFun.var(val, self.basis)
            raise ParseError(f"unknown symbol {val!r}", t[2], self.text)
        if val == "(":
            v = self.expr()
            self.expect(")")
            return v
        raise ParseError(f"unexpected token {val or 'end of input'!r}", t[2], self.text)

    def divide(self, a: RatFun, b: RatFun, tok) -> RatFun:
        if not b.num:
            raise ParseError("division by zero", tok[2], self.text)
        num, powers = b.num, [0] * len(self.basis)
        for idx, f in enumerate(self.basis.factors):
            while True:
                q = num.divexact_univariate(f.coeffs, f.var)
                if q is None:
                    break
                num, powers[idx] = q, powers[idx] + 1
        c = num.constant_value()
        if c is None or not c:
            raise ParseError("undeclared denominator factor", tok[2], self.text)
        # a / (c * prod f^k / den_b) = a * den_b / (c * prod f^k)
        return (a * RatFun.from_poly(b.den_poly(), self.basis)).div_factor_power(tuple(powers), c)


def parse_expr(text: str, basis: FactorBasis) -> RatFun:
    """Parse ``text`` into an exact RatFun over ``basis``."""
    return _Parser(text, basis).parse()


def parse_factor(text: str) -> Factor:
    p = parse_expr(text, FactorBasis([]))
    num = p.num
    vars_ = [v for v in ("x", "z") if num.depends_on(v)]
    if len(vars_) != 1:
        raise ParseError(f"factor must be a non-constant polynomial in exactly one of x, z: {text!r}")
    var = vars_[0]
    coeffs = [num.coefficient(k, 0) if var == "x" else num.coefficient(0, k)
              for k in range(num.degree(var) + 1)]
    return Factor(var, tuple(coeffs))


def make_basis(factors) -> FactorBasis:
    return FactorBasis([parse_factor(f) if isinstance(f, str) else f for f in factors])


# -- formatting ---------------------------------------------------------------

def format_scalar(c: GaussianRational) -> str:
    """Expression-grammar form of a scalar (parenthesized when complex)."""
    c = as_gr(c)
    if not c.im:
        return str(c)
    parts = []
    if c.re:
        parts.append(str(GaussianRational(c.re)))
    im = abs(c.im)
    body = "i" if im == 1 else f"{GaussianRational(im)}*i"
    if parts:
        parts.append(("- " if c.im < 0 else "+ ") + body)
        return "(" + " ".join(parts) + ")"
    return "(" + ("-" if c.im < 0 else "") + body + ")"


def _monomial(a: int, b: int) -> str:
    parts = []
    for name, k in (("x", a), ("z", b)):
        if k == 1:
            parts.append(name)
        elif k > 1:
            parts.append(f"{name}^{k}")
    return "*".join(parts)


def format_bipoly(p: BiPoly) -> str:
    if not p.terms:
        return "0"
    out = []
    for (a, b), c in p.sorted_terms():
        mono = _monomial(a, b)
        neg = not c.im and c.re < 0
        mag = -c if neg else c
        if not mono:
            body = format_scalar(mag)
        elif mag == ONE:
            body = mono
        else:
            body = f"{format_scalar(mag)}*{mono}"
        if not out:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


def format_ratfun(r: RatFun) -> str:
    if not any(r.den):
        return format_bipoly(r.num)
    dens = []
    for e, f in zip(r.den, r.basis.factors):
        if not e:
            continue
        fs = format_bipoly(f.poly)
        if len(f.poly.terms) > 1:
            fs = f"({fs})"
        dens.append(fs if e == 1 else f"{fs}^{e}")
    return f"({format_bipoly(r.num)})/({'*'.join(dens)})"


def format_matrf(m: MatRF) -> list[list[str]]:
    return [[format_ratfun(m[r, c]) for c in range(m.cols)] for r in range(m.rows)]


# -- problem files --------------------------------------------------------------

_KEYS = {"n", "factors", "convention", "psi", "left_op", "right_op", "theta", "f", "bounds",
         "side", "assignment", "id", "source", "note"}


@dataclass
class ProblemFile:
    n: int
    basis: FactorBasis
    convention: GaussianRational
    psi: MatRF
    left_op: dict[int, MatRF] | None = None
    right_op: dict[int, MatRF] | None = None
    theta: MatPoly | None = None
    f: MatPoly | None = None
    bounds: dict | None = None
    side: str | None = None
    assignment: dict[str, MatPoly] | None = None
    meta: dict = field(default_factory=dict)


def parse_grid(grid, n: int, basis: FactorBasis, where: str) -> MatRF:
    if not isinstance(grid, list) or len(grid) != n or any(not isinstance(r, list) or len(r) != n for r in grid):
        raise SchemaError(f"{where}: expected a {n}x{n} grid of expression strings")
    entries = []
    for r, row in enumerate(grid):
        for c, text in enumerate(row):
            if not isinstance(text, (str, int)):
                raise SchemaError(f"{where}[{r}][{c}]: expected an expression string")
            try:
                entries.append(parse_expr(str(text), basis))
            except ParseError as e:
                raise ParseError(f"{where}[{r}][{c}]: {e}") from None
    return MatRF(n, n, entries, basis)


def parse_matpoly(grid, n: int, var: str, basis: FactorBasis, where: str) -> MatPoly:
    m = parse_grid(grid, n, basis, where)
    other = "z" if var == "x" else "x"
    cols = []
    for r in range(n):
        row = []
        for c in range(n):
            e = m[r, c]
            if any(e.den) or e.num.depends_on(other):
                raise SchemaError(f"{where}[{r}][{c}]: must be a polynomial in {var} only")
            deg = e.num.degree(var)
            row.append([e.num.coefficient(k, 0) if var == "x" else e.num.coefficient(0, k)
                        for k in range(deg + 1)])
        cols.append(row)
    return MatPoly.from_grid(var, cols)


def _parse_operator(doc, n, basis, where) -> dict[int, MatRF]:
    if not isinstance(doc, dict):
        raise SchemaError(f"{where}: expected a map from order to grid")
    out = {}
    for key, grid in doc.items():
        if not str(key).isdigit():
            raise SchemaError(f"{where}: order keys must be nonnegative integers, got {key!r}")
        out[int(key)] = parse_grid(grid, n, basis, f"{where}[{key}]")
    return out


def problem_from_dict(doc: dict) -> ProblemFile:
    if not isinstance(doc, dict):
        raise SchemaError("problem document must be a map")
    unknown = set(doc) - _KEYS
    if unknown:
        raise SchemaError(f"unknown keys: {sorted(unknown)}")
    if "psi" not in doc:
        raise SchemaError("missing psi")
    n = doc.get("n")
    if not isinstance(n, int) or n <= 0:
        raise SchemaError("n must be a positive integer")
    basis = make_basis(doc.get("factors", []))
    conv = str(doc.get("convention", "1"))
    if conv not in ("1", "i"):
        raise SchemaError("convention must be \"1\" or \"i\"")
    convention = GaussianRational(0, 1) if conv == "i" else GaussianRational(1)
    psi = parse_grid(doc["psi"], n, basis, "psi")
    prob = ProblemFile(n=n, basis=basis, convention=convention, psi=psi)
    if "left_op" in doc:
        prob.left_op = _parse_operator(doc["left_op"], n, basis, "left_op")
    if "right_op" in doc:
        prob.right_op = _parse_operator(doc["right_op"], n, basis, "right_op")
    if "theta" in doc:
        prob.theta = parse_matpoly(doc["theta"], n, "x", basis, "theta")
    if "f" in doc:
        prob.f = parse_matpoly(doc["f"], n, "z", basis, "f")
    if "bounds" in doc:
        if not isinstance(doc["bounds"], dict):
            raise SchemaError("bounds must be a map")
        prob.bounds = dict(doc["bounds"])
    if "side" in doc:
        if doc["side"] not in ("theta", "f"):
            raise SchemaError("side must be \"theta\" or \"f\"")
        prob.side = doc["side"]
    if "assignment" in doc:
        a = doc["assignment"]
        if not isinstance(a, dict):
            raise SchemaError("assignment must map generator names to grids")
        var = a.get("var", "x") if isinstance(a.get("var"), str) else "x"
        prob.assignment = {name: parse_matpoly(g, n, var, basis, f"assignment[{name}]")
                           for name, g in a.items() if name != "var"}
    prob.meta = {k: doc[k] for k in ("id", "source", "note") if k in doc}
    return prob


def load_problem(path) -> ProblemFile:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path}: not valid JSON ({e})") from None
    return problem_from_dict(doc)


def problem_to_dict(prob: ProblemFile) -> dict:
    doc: dict[str, Any] = dict(prob.meta)
    doc["n"] = prob.n
    doc["factors"] = [format_bipoly(f.poly) for f in prob.basis.factors]
    doc["convention"] = "i" if prob.convention.im else "1"
    doc["psi"] = format_matrf(prob.psi)
    if prob.left_op is not None:
        doc["left_op"] = {str(k): format_matrf(v) for k, v in sorted(prob.left_op.items())}
    if prob.right_op is not None:
        doc["right_op"] = {str(k): format_matrf(v) for k, v in sorted(prob.right_op.items())}
    if prob.theta is not None:
        doc["theta"] = prob.theta.grid()
    if prob.f is not None:
        doc["f"] = prob.f.grid()
    if prob.bounds is not None:
        doc["bounds"] = prob.bounds
    if prob.side is not None:
        doc["side"] = prob.side
    if prob.assignment is not None:
        doc["assignment"] = {name: p.grid() for name, p in prob.assignment.items()}
        first = next(iter(prob.assignment.values()), None)
        if first is not None and first.var != "x":
            doc["assignment"]["var"] = first.var
    return doc


# -- reports ------------------------------------------------------------------

REPORT_KEYS = ("verdict", "details", "bases", "dimensions", "residuals")


def _jsonable(obj):
    if hasattr(obj, "to_dict"):
        return _jsonable(obj.to_dict())
    if isinstance(obj, GaussianRational):
        return str(obj)
    if isinstance(obj, MatPoly):
        return obj.grid()
    if isinstance(obj, MatRF):
        return format_matrf(obj)
    if isinstance(obj, RatFun):
        return format_ratfun(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    return obj


def dump_report(results: dict) -> str:
    """Serialize a result map as a JSON report carrying every required top-level key."""
    doc = {k: None for k in REPORT_KEYS}
    doc.update({"details": {}, "bases": {}, "dimensions": {}, "residuals": {}})
    doc.update(results)
    return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"


def load_report(text: str) -> dict:
    doc = json.loads(text)
    missing = [k for k in REPORT_KEYS if k not in doc]
    if missing:
        raise SchemaError(f"report missing keys: {missing}")
    return doc
