import pytest

from bispectral.matpoly import MatPoly
from bispectral.presentations import (PRESENTATIONS, FreeElement, character_obstruction, check_relations,
                                      eval_element, gamma_characters, generated_slice, parse_relation,
                                      surjectivity_check)
from bispectral.theorems import gamma_slice, gamma_subspace

E12 = MatPoly.unit("x", 2, 0, (0, 1))
# a1 = x I + x^2 E21
A1 = MatPoly.unit("x", 2, 1) + MatPoly.unit("x", 2, 2, (1, 0))
EX1 = {"a0": E12, "a1": A1}
# a2 = E12 + E23, a3 = E22 + x (E21 + E32) + x^2 E31
EX2 = {"a2": MatPoly.unit("x", 3, 0, (0, 1)) + MatPoly.unit("x", 3, 0, (1, 2)),
       "a3": (MatPoly.unit("x", 3, 0, (1, 1)) + MatPoly.unit("x", 3, 1, (1, 0))
              + MatPoly.unit("x", 3, 1, (2, 1)) + MatPoly.unit("x", 3, 2, (2, 0)))}


def test_parse_relation():
    e = parse_relation("a0*a1 - 1/2*a1^2 + 3", ("a0", "a1"))
    a0, a1 = FreeElement.gen("a0"), FreeElement.gen("a1")
    assert e == a0 * a1 - a1 * a1 / 2 + FreeElement.one() * 3
    with pytest.raises(ValueError):
        parse_relation("a0*b", ("a0",))


def test_empty_word_is_identity():
    assert eval_element(FreeElement.one(), EX1) == MatPoly.identity("x", 2)


def test_nilpotent_square():
    assert eval_element(FreeElement.gen("a0") ** 2, {"a0": E12}).is_zero()


def test_idempotent_in_example3():
    # constant term [[a, 0], [b - a, b]] with a = 1, b = 0
    P = MatPoly("z", 2, [(1, 0, -1, 0)])
    assert gamma_slice("ex3", 0).contains(P)
    assert eval_element(parse_relation("t1^2 - t1", ("t1",)), {"t1": P}).is_zero()


def test_unassigned_generator():
    with pytest.raises(KeyError):
        eval_element(FreeElement.gen("a1"), {"a0": E12})
    with pytest.raises(KeyError):
        check_relations("ex1", {"a0": E12})


def test_example1_candidate_relations():
    rep = check_relations("ex1", EX1)
    assert rep.ok and len(rep.results) == 2


def test_example1_identity_violates_nilpotency():
    rep = check_relations("ex1", {"a0": MatPoly.identity("x", 2), "a1": A1})
    first = rep.failing[0]
    assert first["index"] == 1 and first["residual_degree"] == 0
    assert first["residual"] == MatPoly.identity("x", 2).grid()


def test_example2_non_idempotent():
    a = dict(EX2, a3=MatPoly.identity("x", 3).scale(2))
    assert 2 in [r["index"] for r in check_relations("ex2", a).failing]


def test_example2_candidate_relations():
    assert check_relations("ex2", EX2).ok


def test_generated_by_identity():
    assert generated_slice({"g": MatPoly.identity("x", 2)}, 2).dim == 1


def test_generated_by_diagonal_unit():
    S = generated_slice({"g": MatPoly.unit("x", 2, 1, (0, 0))}, 2)
    want = [MatPoly.identity("x", 2), MatPoly.unit("x", 2, 1, (0, 0)), MatPoly.unit("x", 2, 2, (0, 0))]
    assert S == type(S).span("x", 2, 2, want)


def test_example1_generated_degree4():
    assert generated_slice(EX1, 4) == gamma_subspace("ex1", 4)
    assert generated_slice(EX1, 4).dim == 14


def test_example1_surjective_degree5():
    r = surjectivity_check("ex1", EX1, 5)
    assert r["ok"] and r["generated_dim"] == 18 == r["gamma_dim"]


def test_example1_single_generator_not_surjective():
    assert generated_slice({"a0": E12}, 5).dim == 2


def test_example2_surjective_only_onto_free_entry_reading():
    r = surjectivity_check("ex2", EX2, 8)
    assert not r["ok"] and r["fallback"]["ok"]
    assert r["fallback"]["generated_dim"] == 66 and r["gamma_dim"] == 65


def test_characters():
    assert gamma_characters("ex1") == [0]
    assert gamma_characters("ex3") == [0, 1]


def test_example3_obstruction():
    ob = character_obstruction("ex3")
    assert ob["obstructed"]
    assert [r["index"] for r in ob["forcing_relations"]] == [5, 6, 10, 11]
    assert not character_obstruction("ex1")["obstructed"]


def test_presentation_tables():
    assert len(PRESENTATIONS["ex3"].relations) == 12
    assert PRESENTATIONS["ex1"].generators == ("a0", "a1")
