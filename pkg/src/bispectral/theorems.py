"""Catalog of the three worked examples and their closed-form eigenvalue algebras.

Each algebra ``Gamma`` is stored as data: one grid of linear forms per
coefficient degree below a threshold ``T``, in named free parameters, plus
"everything free" from degree ``T`` on.  Membership, slices and the
comparison against the ansatz solver are all driven by these grids.
"""

from __future__ import annotations

import ast
import time
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources

from gmpy2 import mpq

from .ansatz import AlgebraSlice, StabilizationError, truncated_slice
from .exact import exact_nullspace
from .exact.scalar import ZERO, GaussianRational, as_gr
from .exprio import ProblemFile, load_problem, problem_to_dict
from .matpoly import MatPoly
from .operators import LeftOperator, RightOperator, TripleVerdict, WaveFunction, check_triple

__all__ = [
    "GammaSpec", "GAMMA", "ExampleCatalogEntry", "load_example", "example_ids", "export_problem",
    "gamma_membership", "gamma_slice", "gamma_subspace", "validate_theorem", "MembershipVerdict",
]


# -- linear forms -------------------------------------------------------------

def linear_form(text: str) -> dict[str, mpq]:
    """Parse ``"r2_22+r2_11-r1_12"``, ``"(a-b-c)/2"``, ``"0"`` into ``{param: coeff}``."""

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return {"": mpq(node.value)}
        if isinstance(node, ast.Name):
            return {node.id: mpq(1)}
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            inner = walk(node.operand)
            return {k: -v for k, v in inner.items()} if isinstance(node.op, ast.USub) else inner
        if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Add, ast.Sub)):
            a, b = walk(node.left), walk(node.right)
            sign = 1 if isinstance(node.op, ast.Add) else -1
            out = dict(a)
            for k, v in b.items():
                out[k] = out.get(k, 0) + sign * v
            return out
        if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Mult, ast.Div)):
            a, b = walk(node.left), walk(node.right)
            if isinstance(node.op, ast.Div):
                if set(b) != {""} or not b[""]:
                    raise ValueError(f"division by a non-constant in {text!r}")
                return {k: v / b[""] for k, v in a.items()}
            if set(a) == {""}:
                a, b = b, a
            if set(b) != {""}:
                raise ValueError(f"non-linear product in {text!r}")
            return {k: v * b[""] for k, v in a.items()}
        raise ValueError(f"unsupported syntax in linear form {text!r}")

    form = walk(ast.parse(text, mode="eval"))
    form = {k: v for k, v in form.items() if v}
    if "" in form:
        raise ValueError(f"linear form {text!r} has a constant term")
    return form


# -- Gamma specifications -----------------------------------------------------

@dataclass(frozen=True)
class GammaSpec:
    """Affine description of an eigenvalue algebra: grids[k][r][c] is the entry of the x^k (z^k) coefficient."""

    id: str
    var: str
    n: int
    threshold: int
    grids: tuple
    aliases: tuple = ()
    note: str = ""

    @cached_property
    def forms(self) -> list:
        """``forms[k][r*n+c]`` as ``{param: coeff}`` with aliases applied."""
        alias = dict(self.aliases)
        out = []
        for grid in self.grids:
            row = []
            for r in range(self.n):
                for c in range(self.n):
                    f = {}
                    for k, v in linear_form(grid[r][c]).items():
                        k = alias.get(k, k)
                        f[k] = f.get(k, 0) + v
                    row.append({k: v for k, v in f.items() if v})
            out.append(row)
        return out

    @cached_property
    def params(self) -> list[str]:
        seen = []
        for row in self.forms:
            for f in row:
                for k in f:
                    if k not in seen:
                        seen.append(k)
        return seen

    @cached_property
    def defining_entries(self) -> dict:
        """First entry (degree, row, col) equal to ``c * param`` for each parameter."""
        out = {}
        for k, row in enumerate(self.forms):
            for idx, f in enumerate(row):
                if len(f) == 1:
                    (p, c), = f.items()
                    if p not in out:
                        out[p] = (k, idx // self.n, idx % self.n, c)
        missing = [p for p in self.params if p not in out]
        if missing:
            raise ValueError(f"{self.id}: parameters without a defining entry: {missing}")
        return out

    def constraint_count(self) -> int:
        """Number of entries below the threshold that are not free parameters."""
        return sum(self.n * self.n for _ in self.forms) - len(self.params)

    def param_poly(self, name: str) -> MatPoly:
        coeffs = []
        for row in self.forms:
            coeffs.append(tuple(as_gr(f.get(name, 0)) for f in row))
        return MatPoly(self.var, self.n, coeffs)

    def free_dim(self, d: int) -> int:
        """Dimension of the degree-<=d truncation."""
        return self.gamma_slice(d).dim

    def gamma_slice(self, d: int) -> AlgebraSlice:
        polys = [self.param_poly(p).truncate(d) for p in self.params]
        polys += _free_block(self.var, self.n, self.threshold, d)
        return AlgebraSlice.span(self.var, self.n, d, polys, {"source": self.id, "kind": "truncation"})

    def gamma_subspace(self, d: int) -> AlgebraSlice:
        """Members of degree <= d (entries above d forced to vanish)."""
        T, nn = self.threshold, self.n * self.n
        polys = [self.param_poly(p) for p in self.params]
        high = [[p.entry(k, idx // self.n, idx % self.n) for p in polys]
                for k in range(d + 1, T) for idx in range(nn)]
        combos = exact_nullspace(high) if high else [[as_gr(int(i == j)) for j in range(len(polys))]
                                                      for i in range(len(polys))]
        members = []
        for vec in combos:
            acc = MatPoly.zero(self.var, self.n)
            for c, p in zip(vec, polys):
                if c:
                    acc = acc + p.scale(c)
            members.append(acc.truncate(d))
        members += _free_block(self.var, self.n, T, d)
        return AlgebraSlice.span(self.var, self.n, d, members, {"source": self.id, "kind": "subspace"})


def _free_block(var, n, T, d):
    return [MatPoly.unit(var, n, k, (r, c)) for k in range(T, d + 1) for r in range(n) for c in range(n)]


_EX1 = (
    [["r0_11", "r0_12"], ["0", "r0_11"]],
    [["r1_11", "r1_12"], ["0", "r1_11"]],
    [["r2_11", "r2_12"], ["r1_11", "r2_22"]],
    [["r3_11", "r3_12"], ["r2_22+r2_11-r1_12", "r3_22"]],
)

_EX2_LOW = (
    [["r0_11", "r0_12", "r0_13"], ["0", "r0_22", "r0_23"], ["0", "0", "r0_11"]],
    [["r1_11", "r1_12", "r1_13"], ["r0_22-r0_11", "r1_22", "r1_23"],
     ["0", "r0_22-r0_11", "r1_11+r0_23-r0_12"]],
    [["r2_11", "r2_12", "r2_13"], ["r1_22-r1_11-r0_23+r0_12", "r2_22", "r2_23"],
     ["r0_22-r0_11", "r1_22-r1_11", "r2_11+r1_23-r1_12"]],
    [["r3_11", "r3_12", "r3_13"], ["r3_21", "r3_22", "r3_23"],
     ["r1_22-2*r1_11-r0_23+r0_12", "r3_32", "r3_33"]],
)


def _ex2_grids(entry_32: str):
    deg4 = [["r4_11", "r4_12", "r4_13"], ["r4_21", "r4_22", "r4_23"],
            ["r3_32+r3_21-r2_22-r2_11+r1_12", entry_32, "r4_33"]]
    deg5 = [["r5_11", "r5_12", "r5_13"], ["r5_21", "r5_22", "r5_23"],
            ["r4_32+r4_21-r3_33-r3_22-r3_11+r2_23+r2_12-r1_13", "r5_32", "r5_33"]]
    return _EX2_LOW + (deg4, deg5)


_EX3 = (
    [["a", "0"], ["b-a", "b"]],
    [["c", "c"], ["a-b-c", "-c"]],
    [["(a-b-c)/2", "(c+a-b)/2"], ["d/2", "e/2"]],
)

GAMMA: dict[str, GammaSpec] = {
    "ex1": GammaSpec("ex1", "x", 2, 4, _EX1),
    # the degree-4 (3,2) entry is displayed as r4_22; the degree-5 (3,1) entry still
    # names r4_32, read here as that same displayed entry
    "ex2": GammaSpec("ex2", "x", 3, 6, _ex2_grids("r4_22"), (("r4_32", "r4_22"),),
                     "degree-4 (3,2) entry tied to the (2,2) entry as displayed"),
    "ex2-free32": GammaSpec("ex2-free32", "x", 3, 6, _ex2_grids("r4_32"), (),
                            "degree-4 (3,2) entry is its own free parameter"),
    "ex3": GammaSpec("ex3", "z", 2, 3, _EX3),
}

FALLBACK = {"ex2": "ex2-free32"}


def _spec(id_: str) -> GammaSpec:
    try:
        return GAMMA[id_]
    except KeyError:
        raise KeyError(f"unknown example id {id_!r}; expected one of {sorted(GAMMA)}") from None


# -- membership ---------------------------------------------------------------

@dataclass
class MembershipVerdict:
    ok: bool
    params: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    def __bool__(self):
        return self.ok

    def to_dict(self):
        return {"ok": self.ok, "params": {k: str(v) for k, v in self.params.items()},
                "violations": self.violations}


def gamma_membership(id_: str, p: MatPoly) -> MembershipVerdict:
    """Read off the free parameters from their defining entries, then check every other entry.

    Violations are reported 1-based as ``(degree, row, col)`` with the value
    the constraint demands and the actual entry.
    """
    spec = _spec(id_)
    if p.n != spec.n:
        raise ValueError(f"{id_} needs {spec.n}x{spec.n} matrices, got {p.n}x{p.n}")
    if p.var != spec.var:
        raise ValueError(f"{id_} is an algebra of polynomials in {spec.var}")
    n = spec.n
    params = {}
    for name, (k, r, c, coef) in spec.defining_entries.items():
        params[name] = p.entry(k, r, c) / as_gr(coef)
    violations = []
    for k, row in enumerate(spec.forms):
        for idx, form in enumerate(row):
            r, c = divmod(idx, n)
            want = ZERO
            for name, coef in form.items():
                want = want + params[name] * as_gr(coef)
            got = p.entry(k, r, c)
            if want != got:
                violations.append({"degree": k, "entry": [r + 1, c + 1], "expected": str(want), "actual": str(got)})
    return MembershipVerdict(not violations, params, violations)


def gamma_slice(id_: str, d: int) -> AlgebraSlice:
    """Degree-<=d truncation of Gamma."""
    if d < 0:
        raise ValueError("degree must be nonnegative")
    return _spec(id_).gamma_slice(d)


def gamma_subspace(id_: str, d: int) -> AlgebraSlice:
    """Elements of Gamma of degree <= d."""
    if d < 0:
        raise ValueError("degree must be nonnegative")
    return _spec(id_).gamma_subspace(d)


# -- catalog ------------------------------------------------------------------

@dataclass
class ExampleCatalogEntry:
    id: str
    problem: ProblemFile
    side: str
    gamma: GammaSpec

    @property
    def psi(self) -> WaveFunction:
        return WaveFunction(self.problem.psi, self.problem.convention)

    @property
    def L(self) -> LeftOperator:
        return LeftOperator(self.problem.left_op)

    @property
    def B(self) -> RightOperator:
        return RightOperator(self.problem.right_op)

    @property
    def F(self) -> MatPoly:
        return self.problem.f

    @property
    def theta(self) -> MatPoly:
        return self.problem.theta

    def check(self) -> TripleVerdict:
        return check_triple(self.L, self.psi, self.B, self.F, self.theta)


_FILES = {"ex1": "example1.json", "ex2": "example2.json", "ex3": "example3.json"}
_LOADED: dict[str, ExampleCatalogEntry] = {}


def example_ids() -> list[str]:
    return sorted(_FILES)


def bundled_path(name: str):
    return resources.files("bispectral") / "problems" / name


def load_example(id_: str) -> ExampleCatalogEntry:
    if id_ not in _FILES:
        raise KeyError(f"unknown example id {id_!r}; expected one of {example_ids()}")
    entry = _LOADED.get(id_)
    if entry is None:
        prob = load_problem(bundled_path(_FILES[id_]))
        entry = ExampleCatalogEntry(id_, prob, prob.side, GAMMA[id_])
        _LOADED[id_] = entry
    return entry


def export_problem(id_: str) -> dict:
    """Problem-file document for a catalog entry."""
    return problem_to_dict(load_example(id_).problem)


# -- cross-validation ----------------------------------------------------------

def _compare(solver: AlgebraSlice, gamma: AlgebraSlice, id_: str) -> dict:
    missing = next((p for p in gamma.basis if not solver.contains(p)), None)
    extra = next((p for p in solver.basis if not gamma.contains(p)), None)
    row = {"degree": solver.degree, "solver_dim": solver.dim, "gamma_dim": gamma.dim,
           "gamma_in_solver": missing is None, "solver_in_gamma": extra is None}
    row["equal"] = missing is None and extra is None
    if extra is not None:
        row["witness"] = {"in": "solver only", "element": extra.grid(),
                          "violations": gamma_membership(id_, extra).violations}
    elif missing is not None:
        row["witness"] = {"in": "gamma only", "element": missing.grid()}
    return row


def _validate_variant(id_: str, solver_slices: list) -> dict:
    table = [_compare(S, gamma_slice(id_, S.degree), id_) for S in solver_slices]
    bad = [r["degree"] for r in table if not r["equal"]]
    return {"gamma": id_, "ok": not bad, "differ_at": bad, "table": table}


def validate_theorem(id_: str, d: int) -> dict:
    """Compare solver truncations with Gamma truncations at degrees 0..d.

    For an id with a registered alternative reading (ex2) the alternative is
    run as well whenever the displayed form fails, and both outcomes are reported.
    """
    entry = load_example(id_)
    t0 = time.perf_counter()
    slices, reports = [], []
    try:
        for k in range(d + 1):
            S, rep = truncated_slice(entry.psi, k, side=entry.side)
            slices.append(S)
            reports.append(rep.to_dict())
    except StabilizationError:
        return {"id": id_, "ok": False, "verdict": "solver did not stabilize", "degree": d,
                "reports": reports}
    literal = _validate_variant(id_, slices)
    out = {"id": id_, "degree": d, "side": entry.side, "literal": literal, "reports": reports,
           "scope": f"degree-bounded check: truncations of degree 0..{d} only",
           "schedule_extended": any(r.get("schedule_extended") for r in reports)}
    verdict = "equal" if literal["ok"] else "slices differ"
    ok = literal["ok"]
    alt = FALLBACK.get(id_)
    if alt is not None and not literal["ok"]:
        fb = _validate_variant(alt, slices)
        out["fallback"] = fb
        if fb["ok"]:
            verdict = f"slices differ from the displayed form; equal under {alt} ({GAMMA[alt].note})"
    out["ok"] = ok
    out["verdict"] = verdict
    out["dimensions"] = {"solver": [S.dim for S in slices],
                         "gamma": [r["gamma_dim"] for r in literal["table"]]}
    if "fallback" in out:
        out["dimensions"]["gamma_fallback"] = [r["gamma_dim"] for r in out["fallback"]["table"]]
    out["seconds"] = round(time.perf_counter() - t0, 3)
    return out
