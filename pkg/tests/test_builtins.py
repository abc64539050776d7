from fractions import Fraction

import pytest

from assets.operads.builtin_operads import builtin_names, resolve_name
from utils.classes import InputError, StructureError
from utils.operad_core import builtin, check_operad_axioms, check_unitary_multiplication, validate_operad


@pytest.mark.parametrize("name", ["Ass", "Ass+", "Com", "Com+", "I", "I+"])
def test_builtins_are_operads(name):
    p = builtin(name, 4)
    assert validate_operad(p).ok


@pytest.mark.parametrize(
    "name, dims",
    [
        ("Ass", [0, 1, 2, 6, 24]),
        ("Ass+", [1, 1, 2, 6, 24]),
        ("Com", [0, 1, 1, 1, 1]),
        ("Com+", [1, 1, 1, 1, 1]),
        ("I", [0, 1, 0, 0, 0]),
        ("I+", [1, 1, 0, 0, 0]),
    ],
)
def test_builtin_dimensions(name, dims):
    p = builtin(name, 4)
    assert [p.dim(n) for n in range(5)] == dims


def test_aliases_and_spellings():
    assert resolve_name("I0") == "I"
    assert resolve_name("I0+") == "I+"
    assert resolve_name("Ass₊") == "Ass+"
    assert resolve_name("Com_plus") == "Com+"
    assert builtin("I0", 3).name == "I"


def test_unknown_builtin():
    with pytest.raises(InputError):
        resolve_name("Lie")
    assert "Lie" not in builtin_names()


def test_associative_words():
    ass = builtin("Ass", 3)
    # x1x2 ∘_1 x1x2 = x1x2x3 and x2x1 ∘_1 x1x2 = x3x1x2
    assert ass.compose({(1, 2): Fraction(1)}, 1, {(1, 2): Fraction(1)}) == {(1, 2, 3): Fraction(1)}
    assert ass.compose({(2, 1): Fraction(1)}, 1, {(1, 2): Fraction(1)}) == {(3, 1, 2): Fraction(1)}
    assert ass.act({(1, 2): Fraction(1)}, (2, 1)) == {(2, 1): Fraction(1)}


def test_restrictions_of_unitary_builtins(ass_plus, com_plus):
    assert ass_plus.restriction({(2, 3, 1): Fraction(1)}, 1) == {(1, 2): Fraction(1)}
    assert ass_plus.restriction({(1,): Fraction(1)}, 1) == ass_plus.cork()
    assert com_plus.restriction({"c3": Fraction(1)}, 2) == {"c2": Fraction(1)}


def test_multiplications(ass_plus, com_plus):
    assert check_unitary_multiplication(ass_plus).ok
    assert check_unitary_multiplication(com_plus).ok
    m = ass_plus.multiplication
    assert ass_plus.compose(m, 1, m) == ass_plus.compose(m, 2, m) == {(1, 2, 3): Fraction(1)}


def test_multiplication_checker_reports_a_bad_element():
    bad = builtin("Ass+", 3)
    bad.multiplication = {(2, 1): Fraction(1), (1, 2): Fraction(1)}
    report = check_unitary_multiplication(bad)
    assert {v.check for v in report.violations} == {"associativity", "unit"}


def test_initial_operad_has_no_multiplication():
    p = builtin("I+", 3)
    assert p.multiplication is None
    assert check_operad_axioms(p).ok
    with pytest.raises(StructureError):
        builtin("I", 3).cork()
