import dataclasses
from fractions import Fraction

import pytest
import sympy

from scripts.sullivan import (
    check_hypotheses,
    cohomology_table,
    compare_models,
    construct_section,
    decomposability_report,
    lift_through_extension,
    minimal_model,
    strict_unit_report,
    unitary_compatibility_check,
    verify_quis,
)
from utils.classes import HypothesisError, InputError, WindowError
from utils.operad_core import (
    FreeMorphism,
    FreeOperad,
    GeneratorSpace,
    MatrixMorphism,
    adjoin_acyclic_pair,
    builtin,
    check_extension,
    check_unitary_multiplication,
    cohomology_operad,
    combine,
    empty_free_operad,
    identity_morphism,
    principal_extend,
    scale_generators,
    unitary_extension,
    validate_operad,
)
from utils.qlinalg import QMatrix
from utils.sigma_lambda import cone, relative_cohomology
from utils.symmetric import all_permutations, permutation_sign

ASS_TABLE = {2: {0: 2}, 3: {-1: 6}, 4: {-2: 24}}
COM_TABLE = {2: {0: 1}, 3: {-1: 2}, 4: {-2: 6}}


def _truncated(free: FreeOperad, below: int) -> FreeOperad:
    """The sub-free operad on the generators of arity < below."""

    return FreeOperad(
        {r: s for r, s in free.generators.items() if r < below},
        free.max_arity,
        free.flavor,
        multiplication=free.multiplication,
    )


def _scaled_images(source: FreeOperad, target: FreeOperad, factor) -> dict:
    factor = Fraction(factor)
    return {key: {target.corolla_of(key): factor ** (key[0] - 1)} for key in source.generator_keys()}


@pytest.fixture(scope="module")
def ass_model_3():
    return minimal_model(builtin("Ass", 3), 3)


@pytest.fixture(scope="module")
def small_models(ass_model_3):
    return {
        "Ass": ass_model_3,
        "Com": minimal_model(builtin("Com", 3), 3),
        "Ass+": minimal_model(builtin("Ass+", 3), 3, "unitary"),
        "Com+": minimal_model(builtin("Com+", 3), 3, "unitary"),
    }


# DIMENSION TABLES
def test_associative_model(ass_model):
    assert ass_model.dimension_table() == ASS_TABLE
    assert ass_model.stages[3].source_basis_size == 12
    assert ass_model.stages[3].target_basis_size == 6


def test_commutative_model(com_model):
    assert com_model.dimension_table() == COM_TABLE


@pytest.mark.parametrize("fixture, table", [("ass_plus_model", ASS_TABLE), ("com_plus_model", COM_TABLE)])
def test_unitary_models_have_the_same_generators(request, fixture, table):
    model = request.getfixturevalue(fixture)
    assert model.unitary
    assert model.dimension_table() == table


def test_model_of_the_initial_operad_is_empty():
    model = minimal_model(builtin("I", 3), 3)
    assert model.dimension_table() == {2: {}, 3: {}}
    assert not model.operad.generator_keys()


def test_record_is_json_ready(ass_model):
    record = ass_model.record(strict_units=None)
    assert record["dimension_table"]["3"] == {"-1": 6}
    assert [s["arity"] for s in record["stages"]] == [2, 3, 4]
    assert all(s["quis"] for s in record["stages"])


def test_strategies_give_the_same_dimensions(ass_model_3):
    other = minimal_model(builtin("Ass", 3), 3, strategy="last-pivot")
    assert compare_models(ass_model_3, other).ok


def test_bad_arguments(ass):
    with pytest.raises(InputError):
        minimal_model(ass, 3, flavor="semi-unitary")
    with pytest.raises(WindowError):
        minimal_model(ass, 5)


# HYPOTHESES
def test_cohomology_table(ass):
    table, _ = cohomology_table(ass, 3)
    assert table == {0: {}, 1: {0: 1}, 2: {0: 2}, 3: {0: 6}}


def test_hypotheses_of_the_flavors(ass, ass_plus):
    assert check_hypotheses(ass, unitary=False)[1] == {0: 1}
    assert check_hypotheses(ass_plus, unitary=True)[0] == {0: 1}
    with pytest.raises(HypothesisError) as err:
        check_hypotheses(ass_plus, unitary=False)
    assert err.value.table[0] == {0: 1}
    with pytest.raises(HypothesisError):
        check_hypotheses(ass, unitary=True)


def test_unitary_flavor_needs_a_multiplication():
    with pytest.raises(HypothesisError):
        minimal_model(builtin("I+", 3), 3, "unitary")


# QUASI-ISOMORPHISMS
@pytest.mark.parametrize("fixture", ["ass_model", "com_model", "ass_plus_model", "com_plus_model"])
def test_models_map_quasi_isomorphically(request, fixture):
    model = request.getfixturevalue(fixture)
    report = verify_quis(model.morphism, 4)
    assert report.ok
    assert report.details["cone"] == {}
    assert model.morphism.check().ok


def test_identity_is_a_quasi_isomorphism(com_plus):
    rho = identity_morphism(com_plus)
    assert rho.check().ok
    assert verify_quis(rho, 4).ok


def test_verify_quis_reports_missing_generators(ass_model, ass):
    lower = _truncated(ass_model.operad, 3)
    rho = FreeMorphism(lower, ass, {k: ass_model.morphism.images[k] for k in lower.generator_keys()})
    report = verify_quis(rho, 3)
    assert not report.ok
    assert report.details["cone"] == {3: {-1: 6}}


def test_relative_cohomology_against_dense_ranks(ass_model, ass):
    # before arity-3 generators exist: Γ(E(2))(3) has 12 trees over Ass(3) of dimension 6
    lower = _truncated(ass_model.operad, 3)
    rho = FreeMorphism(lower, ass, {k: ass_model.morphism.images[k] for k in lower.generator_keys()})
    c = cone(rho.module_morphism([3]), [3])
    d = c.module.arity(3).differential
    # D² = 0, so the total cohomology is dim - 2·rank D
    assert relative_cohomology(c, 3).h.dim == d.rows - 2 * sympy.Matrix(d.to_rows()).rank() == 6
    assert sympy.Matrix(rho.component(3).to_rows()).rank() == 6


@pytest.mark.slow
def test_relative_cohomology_against_dense_ranks_in_arity_four(ass_model, ass):
    lower = _truncated(ass_model.operad, 4)
    rho = FreeMorphism(lower, ass, {k: ass_model.morphism.images[k] for k in lower.generator_keys()})
    c = cone(rho.module_morphism([4]), [4])
    d = c.module.arity(4).differential
    h = relative_cohomology(c, 4).h
    assert h.dim == d.rows - 2 * sympy.Matrix(d.to_rows()).rank() == 24


@pytest.mark.slow
def test_associative_model_in_arity_five():
    model = minimal_model(builtin("Ass", 5), 5)
    assert model.dimension_table()[5] == {-3: 120}


# UNITS AND COMPARISONS
def test_strict_units(ass_plus_model, ass_model):
    report = strict_unit_report(ass_plus_model)
    assert report.ok
    assert report.details["restrictions"]["e3_0"] == ["0", "0", "0"]
    assert [v.check for v in strict_unit_report(ass_model).violations] == ["flavor"]


def test_lifted_multiplication_is_unital(ass_plus_model):
    free = ass_plus_model.operad
    m = ass_plus_model.multiplication
    assert m
    assert free.restriction(m, 1) == free.restriction(m, 2) == free.unit()
    assert ass_plus_model.morphism(m) == builtin("Ass+", 4).multiplication


@pytest.mark.parametrize("plain, plus", [("ass_model", "ass_plus_model"), ("com_model", "com_plus_model")])
def test_unitary_compatibility(request, plain, plus):
    model, model_plus = request.getfixturevalue(plain), request.getfixturevalue(plus)
    assert unitary_compatibility_check(model, model_plus).ok
    swapped = unitary_compatibility_check(model_plus, model)
    assert [v.check for v in swapped.violations] == ["precondition"]


def test_different_operads_compare_unequal(ass_model, com_model):
    report = compare_models(ass_model, com_model)
    assert {(v.arity, v.degree) for v in report.violations} == {(2, 0), (3, -1), (4, -2)}


@pytest.mark.parametrize("fixture", ["ass_model", "com_plus_model"])
def test_models_are_minimal(request, fixture):
    model = request.getfixturevalue(fixture)
    report = decomposability_report(model)
    assert report.ok
    assert report.details["monomials"]["e2_0"] == 0


# FORMALITY
@pytest.mark.parametrize("name", ["Ass", "Com", "Ass+", "Com+"])
def test_cohomology_operads_have_the_same_model(small_models, name):
    p, model = builtin(name, 3), small_models[name]
    assert compare_models(minimal_model(cohomology_operad(p), 3, model.flavor), model).ok
    h_model = cohomology_operad(model.operad)
    assert [h_model.dim(n) for n in range(4)] == [p.dim(n) for n in range(4)]
    assert compare_models(minimal_model(h_model, 3, model.flavor), model).ok


@pytest.mark.parametrize("name", ["Ass", "Com"])
def test_a_model_has_the_model_of_its_target(small_models, name):
    model = small_models[name]
    assert compare_models(minimal_model(model.operad, 3), model).ok


@pytest.mark.parametrize("name", ["Ass", "Com"])
def test_cohomology_commutes_with_the_unitary_extension(name):
    p = builtin(name, 4)
    left = cohomology_operad(unitary_extension(p))
    right = unitary_extension(cohomology_operad(p))
    assert left.dim(0) == right.dim(0) == 1
    for n in range(1, 5):
        a, b = left.arity_data(n), right.arity_data(n)
        assert (a.labels, a.degrees, a.actions) == (b.labels, b.degrees, b.actions)
        assert left.restriction_matrices(n) == right.restriction_matrices(n)
    assert left.compositions == right.compositions
    assert left.unit() == right.unit()


# VALIDATION OF THE TOWER
@pytest.mark.parametrize("name", ["Ass", "Com", "Ass+", "Com+"])
def test_every_stage_of_the_tower_is_an_operad(small_models, name):
    model = small_models[name]
    free = model.operad
    for n, stage in sorted(model.stages.items()):
        below = FreeOperad({r: s for r, s in free.generators.items() if r < n}, free.max_arity, free.flavor)
        assert check_extension(below, stage.space).ok
        stage_operad = principal_extend(below, stage.space)
        report = validate_operad(stage_operad)
        assert report.ok, report.summary()
    if model.unitary:
        # m̃ is only associative up to homotopy in the free operad
        assert [v.check for v in check_unitary_multiplication(free).violations] == ["associativity"]


def _located(report):
    return {(v.check, v.arity) for v in report.violations}


def test_corrupted_d_value_is_located(small_models):
    model = small_models["Com"]
    free = model.operad
    space = free.generators[3]
    tree = next(t for t in free.basis(3) if free.degree_of(t) == 0)
    d_values = (combine((space.d_values[0], 1), ({tree: Fraction(1)}, 1)),) + space.d_values[1:]
    corrupted = dataclasses.replace(space, d_values=d_values)
    assert ("d-equivariance", 3) in _located(check_extension(_truncated(free, 3), corrupted))
    tampered = FreeOperad({**free.generators, 3: corrupted}, free.max_arity, free.flavor)
    assert ("chain-map", 3) in _located(FreeMorphism(tampered, model.target, model.morphism.images).check())


def test_corrupted_delta_value_is_located(small_models):
    model = small_models["Com+"]
    free = model.operad
    space = free.generators[2]
    (c,) = space.delta_values[0][0].values()
    deltas = (({1: c + 1},) + space.delta_values[0][1:],) + space.delta_values[1:]
    corrupted = dataclasses.replace(space, delta_values=deltas)
    assert ("delta-equivariance", 2) in _located(check_extension(empty_free_operad(3, "+1"), corrupted))
    tampered = FreeOperad({**free.generators, 2: corrupted}, free.max_arity, free.flavor)
    assert ("restriction", 2) in _located(FreeMorphism(tampered, model.target, model.morphism.images).check())


def test_corrupted_action_is_located(small_models):
    free = small_models["Com"].operad
    space = free.generators[3]
    bump = QMatrix.from_entries({(0, 0): Fraction(1)}, space.dim, space.dim)
    corrupted = dataclasses.replace(space, actions=(space.actions[0] + bump,) + space.actions[1:])
    assert ("d-equivariance", 3) in _located(check_extension(_truncated(free, 3), corrupted))
    tampered = FreeOperad({**free.generators, 3: corrupted}, free.max_arity, free.flavor)
    assert ("coxeter", 3) in _located(validate_operad(tampered))


# LIFTING THROUGH EXTENSIONS
@pytest.mark.parametrize("arity, degree", [(3, -1), (3, 0), (4, -2), (4, -1)])
@pytest.mark.parametrize("factor", [1, 2, Fraction(-1, 3)])
def test_lift_through_extension(ass_model, arity, degree, factor):
    r = ass_model.operad
    q, projection = adjoin_acyclic_pair(r, arity, degree)
    base = _truncated(r, 3)
    extension = _truncated(r, 4)
    phi = FreeMorphism(base, q, _scaled_images(base, q, factor))
    psi = FreeMorphism(extension, r, _scaled_images(extension, r, factor))
    lifted = lift_through_extension(phi, extension, psi, projection)
    assert lifted.check().ok
    for key in base.generator_keys():
        assert lifted.images[key] == phi.images[key]
    for key in extension.generator_keys(3):
        e = {extension.corolla_of(key): Fraction(1)}
        assert projection(lifted(e)) == psi(e)
        assert q.differential(lifted(e)) == phi(extension.d_value(key))


def test_lift_in_the_unitary_flavor(ass_plus_model):
    r = ass_plus_model.operad
    q, projection = adjoin_acyclic_pair(r, 3, -1)
    base, extension = _truncated(r, 3), _truncated(r, 4)
    phi = FreeMorphism(base, q, _scaled_images(base, q, 1))
    psi = FreeMorphism(extension, r, _scaled_images(extension, r, 1))
    lifted = lift_through_extension(phi, extension, psi, projection, multiplication=r.multiplication)
    assert lifted.check().ok
    for key in extension.generator_keys(3):
        e = {extension.corolla_of(key): Fraction(1)}
        for i in range(1, 4):
            assert q.restriction(lifted(e), i) == {}


def test_lift_needs_a_commuting_square(ass_model):
    r = ass_model.operad
    q, projection = adjoin_acyclic_pair(r, 3, -1)
    base, extension = _truncated(r, 3), _truncated(r, 4)
    phi = FreeMorphism(base, q, _scaled_images(base, q, 1))
    with pytest.raises(InputError):
        lift_through_extension(phi, extension, FreeMorphism(extension, r, _scaled_images(extension, r, 2)), projection)


def _orbit_sum(r: FreeOperad, x, n: int, signed: bool = False):
    return combine(*[(r.act(x, p), permutation_sign(p) if signed else 1) for p in all_permutations(n)])


def _first_orbit_sum(r: FreeOperad, candidates, n: int, signed: bool = False):
    return next(s for s in (_orbit_sum(r, x, n, signed) for x in candidates) if s)


def _hand_built_extension(base: FreeOperad, r: FreeOperad, n: int, kinds):
    """One-dimensional generators in arity n, each with the invariant (or sign) image x it is meant to hit in r.

    d(e) = ∂x and δ_i(e) = δ_i x, read in base.
    """

    corollas = [{r.corolla_of(key): Fraction(1)} for key in r.generator_keys(n)]
    values = {"trivial": _first_orbit_sum(r, corollas, n), "sign": _first_orbit_sum(r, corollas, n, signed=True)}
    if n == 3:
        trees = [{t: Fraction(1)} for t in r.basis(3) if r.degree_of(t) == 0]
        values["closed"] = _first_orbit_sum(r, trees, 3)
    xs = [values[k] for k in kinds]
    signs = [-1 if k == "sign" else 1 for k in kinds]
    diagonal = QMatrix.from_rows([[s if i == j else 0 for j in range(len(kinds))] for i, s in enumerate(signs)])
    deltas = tuple(tuple(r.restriction(x, i) for i in range(1, n + 1)) for x in xs) if r.unitary else None
    space = GeneratorSpace(
        n,
        tuple(r.element_degree(x) for x in xs),
        (diagonal,) * (n - 1),
        tuple(r.differential(x) for x in xs),
        deltas,
    )
    return principal_extend(base, space), xs


LIFT_CASES = [
    (2, ["trivial"]),
    (2, ["sign"]),
    (2, ["trivial", "sign"]),
    (3, ["trivial"]),
    (3, ["sign"]),
    (3, ["trivial", "closed"]),
    (3, ["trivial", "sign", "closed"]),
]


@pytest.mark.parametrize("fixture, factor", [("ass_model", 2), ("ass_plus_model", 1)])
@pytest.mark.parametrize("arity, kinds", LIFT_CASES)
@pytest.mark.parametrize("pair", [(3, -1), (2, 0)])
def test_lift_of_hand_built_generators(request, fixture, factor, arity, kinds, pair):
    r = request.getfixturevalue(fixture).operad
    q, projection = adjoin_acyclic_pair(r, *pair)
    base = _truncated(r, 3) if arity == 3 else empty_free_operad(r.max_arity, r.flavor)
    extension, xs = _hand_built_extension(base, r, arity, kinds)
    new_keys = extension.generator_keys(arity)
    assert len(new_keys) == len(kinds)
    images = _scaled_images(base, r, factor)
    images.update({key: combine((x, Fraction(factor) ** (arity - 1))) for key, x in zip(new_keys, xs)})
    psi = FreeMorphism(extension, r, images)
    assert psi.check().ok
    phi = FreeMorphism(base, q, _scaled_images(base, q, factor))

    lifted = lift_through_extension(phi, extension, psi, projection, multiplication=r.multiplication)
    assert lifted.check().ok
    for key in base.generator_keys():
        assert lifted.images[key] == phi.images[key]
    for key in new_keys:
        e = {extension.corolla_of(key): Fraction(1)}
        assert projection(lifted(e)) == psi(e)
        assert q.differential(lifted(e)) == phi(extension.d_value(key))
    if r.unitary:
        for key in extension.generator_keys():
            for i in range(1, key[0] + 1):
                assert q.restriction(lifted.images[key], i) == lifted(extension.delta_value(key, i))


# SECTIONS
@pytest.mark.parametrize("factor", [1, 3])
def test_section_of_a_projection(ass_model_3, factor):
    r = ass_model_3.operad
    q, _ = adjoin_acyclic_pair(r, 3, -1)
    images = _scaled_images(r, r, factor)
    images.update({key: {} for key in q.generator_keys() if key not in images})
    rho = FreeMorphism(q, r, images)
    section = construct_section(rho)
    assert section.check().ok
    for key in r.generator_keys():
        assert section.images[key] == {q.corolla_of(key): Fraction(1, factor ** (key[0] - 1))}
        assert rho(section.images[key]) == {r.corolla_of(key): Fraction(1)}


def test_section_in_the_unitary_flavor():
    model = minimal_model(builtin("Ass+", 3), 3, "unitary")
    r = model.operad
    q, projection = adjoin_acyclic_pair(r, 3, 0)
    section = construct_section(projection, multiplication=r.multiplication)
    assert section.check().ok


SECTION_CASES = [
    (name, pair, factor)
    for name in ("Ass", "Com")
    for pair in ((2, 0), (3, -1), (3, 0))
    for factor in (1, 3, Fraction(-1, 2))
] + [(name, pair, 1) for name in ("Ass+", "Com+") for pair in ((2, 0), (2, -1), (3, -1), (3, 0))]


@pytest.mark.parametrize("name, pair, factor", SECTION_CASES)
def test_sections_of_twisted_projections(small_models, name, pair, factor):
    r = small_models[name].operad
    q, projection = adjoin_acyclic_pair(r, *pair)
    if r.unitary:
        rho = projection
    else:
        twist = scale_generators(r, factor)
        rho = FreeMorphism(q, r, {key: twist(x) for key, x in projection.images.items()})
    section = construct_section(rho, multiplication=r.multiplication)
    assert section.check().ok
    for key in r.generator_keys():
        assert rho(section.images[key]) == {r.corolla_of(key): Fraction(1)}
    for n in range(r.max_arity + 1):
        sigma = section.component(n)
        assert rho.component(n) @ sigma == QMatrix.eye(r.dim(n))
        for act_r, act_q in zip(r.arity_data(n).actions, q.arity_data(n).actions):
            assert sigma @ act_r == act_q @ sigma


def test_section_needs_a_quasi_isomorphism_onto_a_free_operad(ass_model_3, ass_plus, com_plus):
    r = ass_model_3.operad
    zero = FreeMorphism(r, r, {key: {} for key in r.generator_keys()})
    with pytest.raises(InputError):
        construct_section(zero)
    components = {n: QMatrix.from_rows([[1] * ass_plus.dim(n)]) for n in range(5)}
    with pytest.raises(InputError):
        construct_section(MatrixMorphism(ass_plus, com_plus, components))


def test_unitary_compatibility_sees_the_structure_constants(com_model, com_plus_model):
    plain = com_model.operad
    wiped = dataclasses.replace(plain.generators[3], d_values=tuple({} for _ in plain.generator_keys(3)))
    tampered = dataclasses.replace(
        com_model, operad=FreeOperad({**plain.generators, 3: wiped}, plain.max_arity, plain.flavor, plain.name)
    )
    report = unitary_compatibility_check(tampered, com_plus_model)
    assert not report.ok
    assert {("d-value", 3), ("differential", 3)} <= {(v.check, v.arity) for v in report.violations}
