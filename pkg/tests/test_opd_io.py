import json
from fractions import Fraction

import pytest

from scripts.sullivan import strict_unit_report, verify_quis
from utils.classes import InputError, ValidationError, fraction_to_str, to_fraction
from utils.opd_io import (
    describe_label,
    diff_operads,
    emit,
    emit_model,
    model_to_json,
    operad_from_json,
    operad_to_json,
    parse,
    parse_generator_spec,
    parse_model,
)
from utils.operad_core import FreeOperad, builtin
from utils.qlinalg import QMatrix
from utils.trees import CORK


# OPERAD FILES
@pytest.mark.parametrize("name", ["Ass+", "Com"])
def test_emitted_operads_read_back_identically(tmp_path, name):
    p = builtin(name, 4)
    path = emit(p, tmp_path / "nested" / f"{name}.opd")
    loaded = parse(path)
    assert loaded.unitary == p.unitary
    assert diff_operads(loaded, p).ok


def test_rationals_are_written_as_strings(ass):
    doc = operad_to_json(ass)
    assert doc["unit"] == [["1", [1]]]
    assert doc["augmentation"] == [[0, 0, "1"]]
    assert json.loads(json.dumps(doc)) == doc


def test_broken_braid_relation_is_rejected(ass):
    doc = operad_to_json(ass)
    cycle = ass.module.group_action(3).matrix((2, 3, 1))
    doc["arities"][3]["actions"][1] = [[i, j, str(v)] for (i, j), v in cycle.items()]
    with pytest.raises(ValidationError) as err:
        operad_from_json(doc)
    assert "coxeter" in {v.check for v in err.value.violations}
    # unchecked loading still works
    assert operad_from_json(doc, check=False).dim(3) == 6


def test_diff_finds_a_changed_composition(com):
    doc = operad_to_json(com)
    doc["compositions"][0][3] = [["2", doc["compositions"][0][3][0][1]]]
    changed = operad_from_json(doc, check=False)
    report = diff_operads(changed, com)
    assert [v.check for v in report.violations] == ["compositions"]


@pytest.mark.parametrize(
    "edit, message",
    [
        (lambda doc: doc.pop("arities"), "Missing field"),
        (lambda doc: doc.update(max_arity=0), "max_arity"),
        (lambda doc: doc["arities"][2]["actions"].append([]), "transposition matrices"),
        (lambda doc: doc["arities"][2]["differential"].append([5, 0, "1"]), "outside"),
        (lambda doc: doc["arities"][2]["differential"].append([0, 0, "x"]), "exact rational"),
        (lambda doc: doc["compositions"].append([1, "c9", "c1", [["1", "c9"]]]), "unknown basis label"),
    ],
)
def test_malformed_operad_documents(com, edit, message):
    doc = operad_to_json(com)
    edit(doc)
    with pytest.raises(InputError, match=message):
        operad_from_json(doc)


def test_unreadable_files(tmp_path):
    with pytest.raises(InputError, match="No such file"):
        parse(tmp_path / "missing.opd")
    broken = tmp_path / "broken.opd"
    broken.write_text('{"name": "P",\n "max_arity": }')
    with pytest.raises(InputError, match="line 2"):
        parse(broken)


# MODEL FILES
def test_model_files(tmp_path, ass_model, com):
    path = emit_model(ass_model, tmp_path / "ass.model.opd")
    loaded = parse_model(path)
    assert loaded.dimension_table() == ass_model.dimension_table()
    assert loaded.strategy == ass_model.strategy
    assert verify_quis(loaded.morphism, 3).ok
    with pytest.raises(InputError, match="minimal model"):
        parse(path)
    with pytest.raises(InputError, match="does not live in"):
        parse_model(path, target=com)


def test_unitary_model_files(tmp_path, ass_plus_model):
    path = emit_model(ass_plus_model, tmp_path / "ass_plus.model.opd")
    loaded = parse_model(path)
    assert loaded.unitary
    assert loaded.multiplication == ass_plus_model.multiplication
    assert strict_unit_report(loaded).ok


def test_operad_file_is_not_a_model(tmp_path, com):
    path = emit(com, tmp_path / "com.opd")
    with pytest.raises(InputError, match="no generators"):
        parse_model(path)


# GENERATOR SPECIFICATIONS
def test_generator_spec():
    spaces = parse_generator_spec("2:0:reg, 3:-1*2")
    assert spaces[2].dim == 2 and spaces[2].degrees == (0, 0)
    assert spaces[3].dim == 2 and spaces[3].degrees == (-1, -1)
    assert spaces[3].actions[0] == QMatrix.eye(2)
    free = FreeOperad(spaces, 4)
    assert free.dim(3) == 12 + 2


def test_unitary_generator_spec_carries_zero_restrictions():
    spaces = parse_generator_spec("2:0", "+1")
    assert spaces[2].delta_values == (({}, {}),)
    assert FreeOperad(spaces, 3, "+1").dim(0) == 1


@pytest.mark.parametrize("text", ["1:0", "2", "2:x", "2:0:sign", ""])
def test_bad_generator_specs(text):
    with pytest.raises(InputError):
        parse_generator_spec(text)


def test_describe_label():
    assert describe_label(1) == "id"
    assert describe_label(CORK) == "cork"
    assert describe_label(FreeOperad(parse_generator_spec("2:0"), 2).basis(2)[0]) == "e2_0(1,2)"


def _edited_model(tmp_path, result, edit):
    doc = model_to_json(result)
    edit(doc)
    path = tmp_path / "edited.model.opd"
    path.write_text(json.dumps(doc))
    return path


def _block(doc, n):
    return next(b for b in doc["generators"] if b["arity"] == n)


def _double_first_image(doc):
    block = _block(doc, 2)
    block["f"][0] = [[fraction_to_str(2 * Fraction(c)), label] for c, label in block["f"][0]]


@pytest.mark.parametrize(
    "fixture, edit, located",
    [
        ("com_model", lambda doc: _block(doc, 3)["d"].__setitem__(0, {}), ("d-equivariance", 3)),
        ("com_plus_model", lambda doc: _block(doc, 2)["delta"][0].__setitem__(0, {}), ("delta-equivariance", 2)),
        ("com_plus_model", _double_first_image, ("restriction", 2)),
        ("com_model", lambda doc: doc["target"].update(compositions=[]), ("unit", 1)),
    ],
)
def test_hand_edited_models_are_rejected(request, tmp_path, fixture, edit, located):
    path = _edited_model(tmp_path, request.getfixturevalue(fixture), edit)
    with pytest.raises(ValidationError) as err:
        parse_model(path)
    assert located in {(v.check, v.arity) for v in err.value.violations}


# RATIONALS
def test_only_exact_rationals_are_read():
    assert to_fraction(" -3/4 ") == Fraction(-3, 4)
    assert to_fraction("7") == 7
    for value in ["1.5", "1e3", "3/-4", "", 0.5]:
        with pytest.raises(InputError):
            to_fraction(value)


@pytest.mark.parametrize("value", ["1.5", "0.25", "1e3", "1/2.0"])
def test_decimal_coefficients_name_their_field(com, value):
    doc = operad_to_json(com)
    doc["compositions"][0][3][0][0] = value
    with pytest.raises(InputError, match=r"compositions\[0\]\[0\]: .* is not an exact rational"):
        operad_from_json(doc)
