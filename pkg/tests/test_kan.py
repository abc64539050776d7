from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scripts.kan import (
    ConeHost,
    KanFamily,
    OperadHost,
    SubmoduleWitness,
    check_simplicial,
    fill,
    fill_equivariant,
)
from utils.classes import InputError, KanConditionError, StructureError
from utils.operad_core import MatrixMorphism, builtin, combine, regular_representation
from utils.qlinalg import GroupAction, QMatrix, column_space, kernel_basis, trivial_action
from utils.symmetric import all_permutations


def _faces(host, chi, n):
    return [host.face(chi, i) for i in range(1, n + 1)]


def _ass_to_com(ass_plus, com_plus) -> MatrixMorphism:
    components = {0: QMatrix.eye(1)}
    for n in range(1, ass_plus.max_arity + 1):
        components[n] = QMatrix.from_rows([[1] * ass_plus.dim(n)])
    return MatrixMorphism(ass_plus, com_plus, components)


# HOSTS
def test_operad_hosts_are_simplicial(ass_plus, com_plus):
    assert check_simplicial(OperadHost(ass_plus), 3).ok
    assert check_simplicial(OperadHost(com_plus), 4).ok


def test_cone_host_is_simplicial(ass_plus, com_plus):
    cone = ConeHost(OperadHost(ass_plus), OperadHost(com_plus))
    assert check_simplicial(cone, 3).ok


def test_host_needs_unitary_structure(ass):
    with pytest.raises(StructureError):
        OperadHost(ass)
    with pytest.raises(StructureError):
        OperadHost(builtin("I+", 3))


def test_host_rejects_a_non_unital_multiplication(ass_plus):
    with pytest.raises(StructureError):
        OperadHost(ass_plus, {(1, 2): Fraction(2)})


def test_degeneracies(ass_plus):
    host = OperadHost(ass_plus)
    w = {(2, 1): Fraction(1)}
    # s_1 doubles the first input, s_3 puts the product in front
    assert host.degeneracy(w, 1) == {(3, 1, 2): Fraction(1)}
    assert host.degeneracy(w, 3) == {(2, 1, 3): Fraction(1)}


# FILLING
@given(st.lists(st.integers(-3, 3), min_size=6, max_size=6))
def test_fill_matches_the_faces_of_a_random_element(coefficients):
    ass_plus = builtin("Ass+", 4)
    host = OperadHost(ass_plus)
    chi = {w: Fraction(c) for w, c in zip(all_permutations(3), coefficients) if c}
    family = KanFamily(host, 3, _faces(host, chi, 3))
    assert family.is_kan()
    u = fill(family)
    assert _faces(host, u, 3) == family.members


def test_fill_in_the_commutative_operad(com_plus):
    host = OperadHost(com_plus)
    family = KanFamily(host, 4, [{"c3": Fraction(2)}] * 4)
    assert fill(family) == {"c4": Fraction(2)}


def test_fill_rejects_a_broken_family(ass_plus):
    host = OperadHost(ass_plus)
    chi = {(1, 2, 3): Fraction(1), (3, 1, 2): Fraction(-1)}
    members = _faces(host, chi, 3)
    members[0] = combine((members[0], 1), ({(1, 2): Fraction(1)}, 1))
    family = KanFamily(host, 3, members)
    assert family.first_failure() == (1, 2)
    with pytest.raises(KanConditionError) as err:
        fill(family)
    assert err.value.pair == (1, 2)


def test_family_shape_is_checked(ass_plus):
    host = OperadHost(ass_plus)
    with pytest.raises(InputError):
        KanFamily(host, 3, [{(1, 2): Fraction(1)}] * 2)
    with pytest.raises(InputError):
        KanFamily(host, 3, [{(1, 2): Fraction(1)}, {(1, 2, 3): Fraction(1)}, {}])


def test_fill_in_a_cone(ass_plus, com_plus):
    host = ConeHost(OperadHost(ass_plus), OperadHost(com_plus))
    chi = ({(2, 1, 3): Fraction(1)}, {"c3": Fraction(3)})
    family = KanFamily(host, 3, _faces(host, chi, 3))
    u = fill(family)
    assert _faces(host, u, 3) == family.members


# EQUIVARIANT FILLING
def test_equivariant_fill_on_the_regular_representation(ass_plus):
    host = OperadHost(ass_plus)
    chi = {(1, 2, 3): Fraction(1), (2, 3, 1): Fraction(2)}
    family_map = [_faces(host, host.act(chi, p), 3) for p in all_permutations(3)]
    action = GroupAction(3, 6, regular_representation(3))
    fillers = fill_equivariant(host, 3, family_map, action)
    for k in range(len(family_map)):
        assert _faces(host, fillers[k], 3) == family_map[k]
    # the filler of e_p is the filler of e_id moved by p
    assert fillers[3] == host.act(fillers[0], all_permutations(3)[3])


def test_equivariant_fill_of_an_invariant_family(ass_plus):
    host = OperadHost(ass_plus)
    total = {w: Fraction(1) for w in all_permutations(2)}
    fillers = fill_equivariant(host, 3, [[total] * 3], trivial_action(3, 1))
    assert fillers == [{w: Fraction(1, 3) for w in all_permutations(3)}]


# SUBMODULES
def test_kernel_of_ass_to_com_is_a_submodule(ass_plus, com_plus):
    rho = _ass_to_com(ass_plus, com_plus)
    assert rho.check(up_to=3).ok
    host = OperadHost(ass_plus)
    kernel = kernel_basis(rho.component(3))
    elements = [ass_plus.from_vector(v, 3) for v in kernel.vectors()]
    witness = SubmoduleWitness.generated_by(host, elements, 3)
    assert witness.check_closed().ok
    for n, space in witness.subspaces.items():
        for v in space.vectors():
            assert not rho(ass_plus.from_vector(v, n))


def test_fillers_stay_in_the_submodule(ass_plus):
    host = OperadHost(ass_plus)
    chi = {(1, 2, 3): Fraction(1), (3, 2, 1): Fraction(-1)}
    members = _faces(host, chi, 3)
    witness = SubmoduleWitness.generated_by(host, members, 3)
    assert witness.contains(fill(KanFamily(host, 3, members)))
    assert not witness.contains({(1, 2, 3): Fraction(1)})


# HIGHER ARITIES AND RANDOM FAMILIES
@pytest.mark.parametrize("name", ["Ass+", "Com+"])
def test_simplicial_identities_in_arity_five(name):
    assert check_simplicial(OperadHost(builtin(name, 5)), 5).ok


@pytest.fixture(scope="module")
def hosts(ass_plus, com_plus):
    return {
        "Ass+": OperadHost(ass_plus),
        "Com+": OperadHost(com_plus),
        "cone": ConeHost(OperadHost(ass_plus), OperadHost(com_plus)),
    }


def _random_element(host, n, coefficients, source_side=False):
    basis = host.basis_elements(n)
    if isinstance(host, ConeHost):
        basis = [b for b in basis if bool(b[0]) == source_side]
    element = host.zero()
    for b, c in zip(basis, coefficients):
        element = host.add(element, b, c)
    return element


coefficient_lists = st.lists(st.integers(-3, 3), min_size=24, max_size=24)


@settings(max_examples=200)
@given(st.sampled_from(["Ass+", "Com+", "cone"]), st.integers(2, 4), coefficient_lists, st.booleans())
def test_random_kan_families_fill(hosts, name, n, coefficients, source_side):
    host = hosts[name]
    chi = _random_element(host, n, coefficients, source_side)
    family = KanFamily(host, n, _faces(host, chi, n))
    assert family.is_kan()
    u = fill(family)
    assert _faces(host, u, n) == family.members
    # two fillers differ by an element with vanishing faces
    assert all(host.is_zero(f) for f in _faces(host, host.add(u, chi, -1), n))


@settings(max_examples=200)
@given(st.sampled_from(["Ass+", "Com+"]), st.integers(2, 4), st.lists(coefficient_lists, min_size=4, max_size=4))
def test_random_families_fill_exactly_when_kan(hosts, name, n, rows):
    host = hosts[name]
    family = KanFamily(host, n, [_random_element(host, n - 1, rows[i]) for i in range(n)])
    failure = family.first_failure()
    if failure is None:
        assert _faces(host, fill(family), n) == family.members
    else:
        with pytest.raises(KanConditionError) as err:
            fill(family)
        assert err.value.pair == failure


@settings(max_examples=50)
@given(st.integers(2, 3), coefficient_lists, coefficient_lists)
def test_kan_closure_of_a_random_element(hosts, n, generator, coefficients):
    host = hosts["Ass+"]
    x = _random_element(host, n, generator)
    witness = SubmoduleWitness.generated_by(host, [x], 4)
    assert witness.check_closed().ok
    assert witness.contains(x)
    space = witness.subspaces.get(n + 1)
    y = host.zero()
    for v, c in zip(space.vectors() if space else [], coefficients):
        y = host.add(y, host.from_vector(v, n + 1), c)
    assert witness.contains(fill(KanFamily(host, n + 1, _faces(host, y, n + 1))))


# SUBMODULES OF A MODEL
def _graded_part(free, y):
    if not y:
        return y
    d = free.degree_of(next(iter(y)))
    return {x: c for x, c in y.items() if free.degree_of(x) == d}


@pytest.fixture(scope="module")
def model_submodules(ass_plus_model):
    """Kernel of ρ and the coboundaries of the unitary A∞ model, as witnesses with their defining spaces."""

    free, rho = ass_plus_model.operad, ass_plus_model.morphism
    host = OperadHost(free)
    spaces = {
        "kernel": {n: kernel_basis(rho.component(n)) for n in range(5)},
        "coboundaries": {n: column_space(free.arity_data(n).differential) for n in range(5)},
    }
    witnesses = {}
    for kind, by_arity in spaces.items():
        elements = [free.from_vector(v, n) for n in range(2, 5) for v in by_arity[n].vectors()]
        witnesses[kind] = SubmoduleWitness.generated_by(host, elements, 4)
    return host, spaces, witnesses


@pytest.mark.parametrize("kind", ["kernel", "coboundaries"])
def test_model_submodules_are_closed(model_submodules, kind):
    host, spaces, witnesses = model_submodules
    witness = witnesses[kind]
    assert witness.check_closed().ok
    for n, space in witness.subspaces.items():
        assert all(spaces[kind][n].contains(v) for v in space.vectors())


@settings(max_examples=60)
@given(st.sampled_from(["kernel", "coboundaries"]), st.integers(2, 4), st.lists(st.integers(-2, 2), min_size=1, max_size=8))
def test_fillers_preserve_model_submodules(model_submodules, kind, n, coefficients):
    host, spaces, witnesses = model_submodules
    free = host.operad
    space = witnesses[kind].subspaces.get(n)
    y = {}
    for v, c in zip(space.vectors() if space else [], coefficients):
        y = combine((y, 1), (free.from_vector(v, n), c))
    y = _graded_part(free, y)
    u = fill(KanFamily(host, n, _faces(host, y, n)))
    assert witnesses[kind].contains(u)
    assert spaces[kind][n].contains(free.to_vector(u, n))
