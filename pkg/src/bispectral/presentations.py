"""Free noncommutative algebras, relation checking and generator search.

Elements of the free algebra are maps ``word -> coefficient`` where a word is a
tuple of generator names; products concatenate words left to right.  An
assignment sends each generator to a matrix polynomial, and evaluation is the
induced unital homomorphism.
"""

from __future__ import annotations

import ast
import itertools
import time
from dataclasses import dataclass, field

from .ansatz import AlgebraSlice
from .exact import Echelon, exact_nullspace
from .exact.scalar import ONE, GaussianRational, as_gr
from .matpoly import MatPoly
from .theorems import FALLBACK, gamma_slice, gamma_subspace

__all__ = [
    "FreeElement", "parse_relation", "PresentationSpec", "PRESENTATIONS", "eval_element",
    "check_relations", "generated_slice", "surjectivity_check", "find_generators", "SearchResult",
    "gamma_characters", "character_obstruction",
]


class FreeElement:
    __slots__ = ("terms",)

    def __init__(self, terms=None):
        out = {}
        for w, c in (terms or {}).items():
            c = as_gr(c)
            if c:
                out[tuple(w)] = c
        self.terms = out

    @classmethod
    def one(cls) -> "FreeElement":
        return cls({(): ONE})

    @classmethod
    def gen(cls, name: str) -> "FreeElement":
        return cls({(name,): ONE})

    def __add__(self, other):
        other = _coerce(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return FreeElement(out)

    __radd__ = __add__

    def __neg__(self):
        return FreeElement({w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        out: dict = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 + w2
                out[w] = out.get(w, 0) + c1 * c2
        return FreeElement(out)

    def __rmul__(self, other):
        return _coerce(other) * self

    def __truediv__(self, c):
        inv = 1 / as_gr(c)
        return FreeElement({w: v * inv for w, v in self.terms.items()})

    def __pow__(self, k: int):
        out = FreeElement.one()
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, FreeElement) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def generators(self) -> set:
        return {g for w in self.terms for g in w}

    def degree(self) -> int:
        return max((len(w) for w in self.terms), default=-1)

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for w, c in sorted(self.terms.items(), key=lambda t: (len(t[0]), t[0])):
            word = "*".join(w) if w else "1"
            parts.append(f"({c})*{word}" if w else f"({c})")
        return " + ".join(parts)

    def __repr__(self):
        return f"FreeElement({self})"


def _coerce(x) -> FreeElement:
    if isinstance(x, FreeElement):
        return x
    return FreeElement({(): x})


def parse_relation(text: str, generators) -> FreeElement:
    """Parse a relation such as ``"(a3*a2)^2*a3 - 4*a3*a2^2*a3"`` or ``"t3*t1 - 1/2*t4*t1"``."""
    gens = set(generators)
    tree = ast.parse(text.replace("^", "**"), mode="eval")

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, int):
            return as_gr(node.value)
        if isinstance(node, ast.Name):
            if node.id not in gens:
                raise ValueError(f"unknown generator {node.id!r} in {text!r}")
            return FreeElement.gen(node.id)
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, ast.USub):
            return -walk(node.operand)
        if isinstance(node, ast.BinOp):
            a, b = walk(node.left), walk(node.right)
            if isinstance(node.op, ast.Add):
                return _coerce(a) + b if isinstance(a, FreeElement) or isinstance(b, FreeElement) else a + b
            if isinstance(node.op, ast.Sub):
                return _coerce(a) - b if isinstance(a, FreeElement) or isinstance(b, FreeElement) else a - b
            if isinstance(node.op, ast.Mult):
                if isinstance(a, FreeElement) or isinstance(b, FreeElement):
                    return _coerce(a) * _coerce(b)
                return a * b
            if isinstance(node.op, ast.Div):
                if isinstance(b, FreeElement):
                    raise ValueError(f"division by a generator in {text!r}")
                return a / b
            if isinstance(node.op, ast.Pow):
                if not isinstance(node.right, ast.Constant) or not isinstance(node.right.value, int):
                    raise ValueError(f"exponent must be a nonnegative integer in {text!r}")
                return _coerce(a) ** node.right.value
        raise ValueError(f"unsupported syntax in relation {text!r}")

    return _coerce(walk(tree))


@dataclass(frozen=True)
class PresentationSpec:
    id: str
    generators: tuple
    relation_texts: tuple
    # (generator, kind) pairs used to prefilter candidates; kind is "nilpotent:k" or "idempotent"
    unary: tuple = ()
    search_order: tuple = ()

    @property
    def relations(self) -> list[FreeElement]:
        return [parse_relation(t, self.generators) for t in self.relation_texts]


PRESENTATIONS = {
    "ex1": PresentationSpec(
        "ex1", ("a0", "a1"),
        ("a0^2", "a1^3 + a0*a1*a0 - 3*a1*a0*a1 + a0*a1^2 + a1^2*a0"),
        (("a0", "nilpotent:2"),), ("a0", "a1")),
    "ex2": PresentationSpec(
        "ex2", ("a2", "a3"),
        ("a2^3", "a3^2 - a3", "(a3*a2)^2*a3 - 4*a3*a2^2*a3"),
        (("a2", "nilpotent:3"), ("a3", "idempotent")), ("a3", "a2")),
    "ex3": PresentationSpec(
        "ex3", ("t1", "t3", "t4", "t5"),
        (
            "t1^2 - t1",
            "t4^2",
            "t4*t5",
            "t4*t1 + t4*t3 - 2*t4 - t5*t4 - t5^2",
            "t3^2 - t3 + t5 - 3*t3*t4*t3*t5 - t1*t4 - t5*t1",
            "t3*t1 - t1 - t4 - 1/2*t4*t1 + 1/2*t4*t3 + t5*t1 - 1/2*t5*t4 + 1/2*t5^2 + t3*t4"
            " - t1*t5 - t3*t5",
            "t1*t3 - t3 + t4 + t5 - 3/2*t4*t1 + 3/2*t4*t3 - 2*t5*t1 - 3/2*t5*t4 + 3/2*t5^2"
            " + 3*t3*t4 + t3*t5",
            "t5*t3 - t4*t1 + t4*t3 - t5*t1 - t5*t4 + t5^2",
            "t5*t1*t5 - t5^2*t1 - t5*t4",
            "t5*t4*t1 - t5^3 + t5*t1*t4 + t5^2*t1",
            "t4*t1*t5 + t4*t3*t5 - t3^3",
            "t5*t3*t4 + t5*t1*t4",
        ),
        (("t1", "idempotent"), ("t4", "nilpotent:2")), ("t1", "t4", "t5", "t3")),
}


def _spec(id_: str) -> PresentationSpec:
    try:
        return PRESENTATIONS[id_]
    except KeyError:
        raise KeyError(f"unknown example id {id_!r}; expected one of {sorted(PRESENTATIONS)}") from None


# -- evaluation ---------------------------------------------------------------

class _WordCache:
    """Products of generator words under one assignment, built from cached prefixes."""

    def __init__(self, assignment: dict, var: str | None = None, n: int | None = None):
        self.a = assignment
        if var is None:
            first = next(iter(assignment.values()))
            var, n = first.var, first.n
        self.var, self.n = var, n
        self.memo = {(): MatPoly.identity(var, n)}

    def word(self, w: tuple) -> MatPoly:
        p = self.memo.get(w)
        if p is None:
            g = w[-1]
            if g not in self.a:
                raise KeyError(f"generator {g!r} is not assigned")
            p = self.word(w[:-1]) * self.a[g]
            self.memo[w] = p
        return p

    def eval(self, e: FreeElement) -> MatPoly:
        acc = MatPoly.zero(self.var, self.n)
        for w, c in e.terms.items():
            acc = acc + self.word(w).scale(c)
        return acc


def eval_element(e: FreeElement, assignment: dict) -> MatPoly:
    """Image of ``e`` under the homomorphism fixed by ``assignment``; the empty word maps to I."""
    missing = e.generators() - set(assignment)
    if missing:
        raise KeyError(f"unassigned generator(s): {sorted(missing)}")
    if not assignment:
        raise ValueError("empty assignment")
    return _WordCache(assignment).eval(e)


@dataclass
class RelationReport:
    id: str
    results: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r["zero"] for r in self.results)

    @property
    def failing(self) -> list:
        return [r for r in self.results if not r["zero"]]

    def __bool__(self):
        return self.ok

    def to_dict(self):
        return {"ok": self.ok, "relations": self.results}


def check_relations(id_: str, assignment: dict) -> RelationReport:
    """Evaluate every ideal generator; nonzero results carry their residual."""
    spec = _spec(id_)
    missing = set(spec.generators) - set(assignment)
    if missing:
        raise KeyError(f"unassigned generator(s): {sorted(missing)}")
    cache = _WordCache(assignment)
    rep = RelationReport(id_)
    for idx, (text, rel) in enumerate(zip(spec.relation_texts, spec.relations)):
        val = cache.eval(rel)
        row = {"index": idx + 1, "relation": text, "zero": val.is_zero()}
        if not val.is_zero():
            row["residual"] = val.grid()
            row["residual_degree"] = val.degree
        rep.results.append(row)
    return rep


# -- generated subalgebra -----------------------------------------------------

def _vec(p: MatPoly, d: int) -> dict:
    return {k: v for k, v in enumerate(p.to_vector(d)) if v}


def generated_slice(assignment: dict, d: int, lookahead: int = 0) -> AlgebraSlice:
    """Span of the unit and all generator words whose product has degree <= d.

    Breadth-first: each new independent product is multiplied on the right by
    every generator, keeping products of degree <= d + lookahead, until a pass
    adds nothing.  With ``lookahead > 0`` the span is intersected back down to
    degree <= d, which also catches cancellations through higher degrees.
    """
    if d < 0:
        raise ValueError("degree must be nonnegative")
    gens = [assignment[k] for k in sorted(assignment)]
    if not gens:
        raise ValueError("empty assignment")
    var, n = gens[0].var, gens[0].n
    D = d + lookahead
    ech = Echelon()
    one = MatPoly.identity(var, n)
    ech.add(_vec(one, D))
    found = [one]
    frontier = [one]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = p * g
                if q.degree > D:
                    continue
                if ech.add(_vec(q, D)) is not None:
                    found.append(q)
                    nxt.append(q)
        frontier = nxt
    if lookahead == 0:
        return AlgebraSlice.span(var, n, d, found, {"words": len(found)})
    # keep the combinations whose coefficients above degree d vanish
    high = [[q.entry(k, idx // n, idx % n) for q in found] for k in range(d + 1, D + 1) for idx in range(n * n)]
    low = []
    for combo in exact_nullspace(high):
        acc = MatPoly.zero(var, n)
        for c, q in zip(combo, found):
            if c:
                acc = acc + q.scale(c)
        low.append(acc)
    return AlgebraSlice.span(var, n, d, low, {"words": len(found), "lookahead": lookahead})


def surjectivity_check(id_: str, assignment: dict, d: int, lookahead: int = 0) -> dict:
    """Compare the generated degree-<=d span with the elements of Gamma of degree <= d.

    Only surjectivity up to degree d is tested; injectivity of the presentation
    map is out of reach without normal forms and is not claimed.  For an id with
    a registered alternative reading of Gamma both comparisons are reported.
    """
    gen = generated_slice(assignment, d, lookahead)
    out = _against(gen, id_, d)
    alt = FALLBACK.get(id_)
    if alt is not None:
        out["fallback"] = _against(gen, alt, d)
        out["fallback"]["gamma"] = alt
    out["scope"] = "degree-bounded surjectivity only; injectivity not checked"
    return out


def _against(gen: AlgebraSlice, id_: str, d: int) -> dict:
    target = gamma_subspace(id_, d)
    outside = next((p for p in target.basis if not gen.contains(p)), None)
    stray = next((p for p in gen.basis if not target.contains(p)), None)
    out = {"ok": outside is None and stray is None, "degree": d, "generated_dim": gen.dim,
           "gamma_dim": target.dim}
    if outside is not None:
        out["missing_element"] = outside.grid()
    if stray is not None:
        out["element_outside_gamma"] = stray.grid()
    return out


def _surjective(report: dict) -> str | None:
    """Name of the Gamma reading matched by a surjectivity report, if any."""
    if report["ok"]:
        return "displayed"
    fb = report.get("fallback")
    if fb is not None and fb["ok"]:
        return fb["gamma"]
    return None


# -- character obstruction ----------------------------------------------------

def gamma_characters(id_: str) -> list:
    """Distinct characters ``p -> p(0)[i][i]`` of Gamma, as diagonal indices.

    Evaluation at 0 is a homomorphism; when every constant term of Gamma is
    lower (or every one upper) triangular the diagonal entries are characters.
    Returns [] when the constant terms are not triangular.
    """
    S = gamma_slice(id_, 0)
    n = S.n
    mats = [p.coefficient(0) for p in S.basis]
    lower = all(not m[r * n + c] for m in mats for r in range(n) for c in range(r + 1, n))
    upper = all(not m[r * n + c] for m in mats for r in range(n) for c in range(r))
    if not (lower or upper):
        return []
    reps, seen = [], []
    for i in range(n):
        f = tuple(m[i * n + i] for m in mats)
        if f not in seen:
            seen.append(f)
            reps.append(i)
    return reps


def _sympy_scalar(c: GaussianRational):
    import sympy as sp

    return sp.Rational(int(c.re.numerator), int(c.re.denominator)) + sp.I * sp.Rational(
        int(c.im.numerator), int(c.im.denominator))


def _abelianize(e: FreeElement, syms: dict):
    """Commutative image of a free-algebra element as a sympy expression."""
    import sympy as sp

    out = sp.Integer(0)
    for w, c in e.terms.items():
        term = _sympy_scalar(c)
        for g in w:
            term = term * syms[g]
        out += term
    return sp.expand(out)


def _points(polys, gens):
    """Points of the variety of ``polys``, or None when it is not zero-dimensional."""
    import sympy as sp

    G = sp.groebner(polys, *gens, order="grevlex")
    if list(G.exprs) == [1]:
        return []
    if not G.is_zero_dimensional:
        return None
    return sp.solve(list(G.fglm("lex").exprs), gens, dict=True)


def character_obstruction(id_: str) -> dict:
    """Exact test that no assignment satisfying the relations can be surjective.

    Every character of Gamma sends the generators to a point of the commutative
    variety V cut out by the abelianized relations.  Characters that agree on
    the generators agree on the whole generated algebra, so when V has fewer
    points than Gamma has distinct characters, the generated algebra misses
    Gamma at every degree.  A minimal set of relations already forcing this is
    found by greedy deletion.
    """
    import sympy as sp

    spec = _spec(id_)
    chars = gamma_characters(id_)
    syms = {g: sp.Symbol(g) for g in spec.generators}
    gens = [syms[g] for g in spec.generators]
    polys = [_abelianize(r, syms) for r in spec.relations]
    out = {"id": id_, "characters": [f"p(0)[{i + 1},{i + 1}]" for i in chars]}
    pts = _points([p for p in polys if p != 0], gens)
    if pts is None:
        out.update(obstructed=False, reason="abelianized relations do not cut out finitely many points")
        return out
    out["points"] = [{str(k): str(v) for k, v in sorted(pt.items(), key=lambda t: str(t[0]))} for pt in pts]
    out["obstructed"] = len(chars) > 1 and len(pts) < len(chars)
    if not out["obstructed"]:
        out["reason"] = "the generators can separate the characters"
        return out
    keep = list(range(len(polys)))
    for i in range(len(polys)):
        trial = [j for j in keep if j != i]
        sub = _points([polys[j] for j in trial if polys[j] != 0], gens)
        if sub is not None and len(sub) < len(chars):
            keep = trial
    out["forcing_relations"] = [{"index": j + 1, "relation": spec.relation_texts[j]} for j in keep]
    out["reason"] = (f"{len(chars)} distinct characters but only {len(pts)} point(s) for the generators; "
                     "no assignment satisfying the relations generates Gamma at any degree")
    return out


# -- generator search ---------------------------------------------------------

def _unary_ok(kind: str, p: MatPoly) -> bool:
    if kind == "idempotent":
        return p * p == p
    if kind.startswith("nilpotent:"):
        return (p ** int(kind.split(":")[1])).is_zero()
    raise ValueError(kind)


def _candidates(basis, max_terms: int, coeffs) -> list[MatPoly]:
    """Sparse combinations of echelon basis elements, in a fixed order."""
    out = []
    seen = set()
    for k in range(1, max_terms + 1):
        for idx in itertools.combinations(range(len(basis)), k):
            for cs in itertools.product(coeffs, repeat=k):
                p = basis[idx[0]].scale(cs[0])
                for i, c in zip(idx[1:], cs[1:]):
                    p = p + basis[i].scale(c)
                if p not in seen:
                    seen.add(p)
                    out.append(p)
    return out


@dataclass
class SearchResult:
    id: str
    survivors: list = field(default_factory=list)
    stats: dict = field(default_factory=dict)
    closest: dict | None = None
    obstruction: dict | None = None

    @property
    def ok(self) -> bool:
        return bool(self.survivors)

    def to_dict(self):
        d = {"ok": self.ok, "stats": self.stats,
             "survivors": [{"assignment": {g: p.grid() for g, p in a.items()}, "surjectivity": s}
                           for a, s in self.survivors]}
        if self.closest is not None:
            d["closest"] = self.closest
        if self.obstruction is not None:
            d["obstruction"] = self.obstruction
        return d


class _Search:
    def __init__(self, spec: PresentationSpec, pools: dict, var: str, n: int):
        self.spec, self.pools, self.var, self.n = spec, pools, var, n
        self.order = spec.search_order or spec.generators
        # a relation is checked as soon as its last generator (in search order) is assigned
        self.stage = {g: [] for g in self.order}
        for rel in spec.relations:
            gs = rel.generators()
            last = max(gs, key=self.order.index) if gs else self.order[0]
            self.stage[last].append(rel)
        self.nodes = 0

    def _extend(self, assignment, cache, g, p):
        assignment[g] = p
        c = _WordCache(assignment, self.var, self.n)
        c.memo.update({w: v for w, v in cache.memo.items() if g not in w})
        return c

    def exact(self, limit=None, node_budget=None):
        hits = []

        def rec(i, assignment, cache):
            if i == len(self.order):
                hits.append(dict(assignment))
                return
            g = self.order[i]
            for p in self.pools[g]:
                if (limit is not None and len(hits) >= limit) or (node_budget is not None and self.nodes >= node_budget):
                    return
                self.nodes += 1
                c = self._extend(assignment, cache, g, p)
                if all(c.eval(rel).is_zero() for rel in self.stage[g]):
                    rec(i + 1, assignment, c)
                del assignment[g]

        rec(0, {}, _WordCache({}, self.var, self.n))
        return hits

    def closest(self, node_budget: int):
        """Branch and bound on the number of nonzero relations."""
        best = {"fails": len(self.spec.relation_texts) + 1, "assignment": None}

        def rec(i, assignment, cache, fails):
            if i == len(self.order):
                if fails < best["fails"]:
                    best["fails"], best["assignment"] = fails, dict(assignment)
                return
            g = self.order[i]
            for p in self.pools[g]:
                if self.nodes >= node_budget or best["fails"] == 0:
                    return
                self.nodes += 1
                c = self._extend(assignment, cache, g, p)
                f = fails + sum(1 for rel in self.stage[g] if not c.eval(rel).is_zero())
                if f < best["fails"]:
                    rec(i + 1, assignment, c, f)
                del assignment[g]

        rec(0, {}, _WordCache({}, self.var, self.n), 0)
        return best["assignment"]


def find_generators(id_: str, d_search: int = 2, surj_degree: int | None = None, max_terms: int = 3,
                    coeffs=(1, -1, 2, -2), limit: int | None = None, node_budget: int | None = None,
                    diagnose_budget: int = 200000) -> SearchResult:
    """Search generator assignments among Gamma's elements of degree <= d_search.

    Candidates are sparse combinations (at most ``max_terms`` terms, weights in
    ``coeffs``) of the echelon basis, the unit included.  Generators with a
    nilpotency or idempotency relation are prefiltered by it; the rest of the
    search backtracks in the presentation's search order, checking every relation whose
    generators are all assigned.  Survivors of all relations are then tested for
    surjectivity at ``surj_degree`` (default ``d_search + 2``).  When nothing
    survives the relations, a bounded branch and bound reports the assignment
    with the fewest nonzero relations together with their residuals; when
    nothing survives at all, the character obstruction is attached.
    """
    spec = _spec(id_)
    t0 = time.perf_counter()
    surj_degree = d_search + 2 if surj_degree is None else surj_degree
    space = gamma_subspace(id_, d_search)
    coeffs = tuple(as_gr(c) for c in coeffs)
    pool = _candidates(list(space.basis), max_terms, coeffs)
    unary = dict(spec.unary)
    pools = {g: [p for p in pool if unary.get(g) is None or _unary_ok(unary[g], p)] for g in spec.generators}
    search = _Search(spec, pools, space.var, space.n)
    hits = search.exact(limit, node_budget)
    stats = {"basis_dim": space.dim, "pool": len(pool), "pools": {g: len(v) for g, v in pools.items()},
             "relation_survivors": len(hits), "nodes": search.nodes, "d_search": d_search,
             "surj_degree": surj_degree}
    result = SearchResult(id_, [], stats)
    for a in hits:
        s = surjectivity_check(id_, a, surj_degree)
        matched = _surjective(s)
        if matched is not None:
            s["matched"] = matched
            result.survivors.append(({g: a[g] for g in spec.generators}, s))
    result.survivors.sort(key=lambda t: (sum(p.degree for p in t[0].values()),
                                         [repr(p.grid()) for p in t[0].values()]))
    stats["surjective"] = len(result.survivors)
    if not result.survivors:
        stats["verdict"] = "no candidate found"
        if not hits:
            search.nodes = 0
            best = search.closest(diagnose_budget)
            if best is not None:
                rep = check_relations(id_, best)
                result.closest = {"assignment": {g: best[g].grid() for g in spec.generators},
                                  "failing": len(rep.failing), "relations": rep.results,
                                  "nodes": search.nodes}
        result.obstruction = character_obstruction(id_)
    stats["seconds"] = round(time.perf_counter() - t0, 3)
    return result
