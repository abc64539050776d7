from fractions import Fraction
from typing import Callable, Dict, Hashable, List, Sequence, Tuple

from utils.classes import Element, InputError, Permutation
from utils.operad_core import DgOperad, unitary_extension
from utils.qlinalg import QMatrix
from utils.sigma_lambda import ArityData, DgLambdaModule
from utils.symmetric import adjacent, all_permutations, inverse


# Ass(n) has the permutation words w of {1..n} as basis: w is the operation x_{w1}···x_{wn}.
# Com(n) has one basis element "c{n}", I has "id" in arity 1 only.


def _assemble(
    name: str,
    max_arity: int,
    labels: Dict[int, Sequence[Hashable]],
    act: Callable[[Hashable, Permutation], Hashable],
    restrict: Callable[[Hashable, int], Hashable],
    compose: Callable[[Hashable, int, Hashable], Hashable],
    unit: Hashable,
    multiplication: Element = None,
) -> DgOperad:
    """Builds a Λ-flavored non-unitary operad, degree 0, zero differential, whose structure maps
    send basis labels to basis labels."""

    arities: Dict[int, ArityData] = {}
    restrictions: Dict[int, Tuple[QMatrix, ...]] = {}
    for n in range(max_arity + 1):
        basis = tuple(labels.get(n, ()))
        pos = {x: k for k, x in enumerate(basis)}
        dim = len(basis)
        actions = tuple(
            QMatrix.from_entries({(pos[act(x, adjacent(n, k))], j): Fraction(1) for j, x in enumerate(basis)}, dim, dim)
            for k in range(1, n)
        )
        arities[n] = ArityData(n, basis, (0,) * dim, actions, QMatrix.zeros(dim, dim))
        if n >= 2:
            lower = {x: k for k, x in enumerate(labels.get(n - 1, ()))}
            restrictions[n] = tuple(
                QMatrix.from_entries({(lower[restrict(x, i)], j): Fraction(1) for j, x in enumerate(basis)}, len(lower), dim)
                for i in range(1, n + 1)
            )
        elif n == 1:
            restrictions[n] = (QMatrix.zeros(0, dim),)

    compositions = {}
    for m in range(1, max_arity + 1):
        for n in range(1, max_arity + 2 - m):
            for a in labels.get(m, ()):
                for b in labels.get(n, ()):
                    for i in range(1, m + 1):
                        compositions[(i, a, b)] = {compose(a, i, b): Fraction(1)}

    augmentation = QMatrix.from_rows([[1] * len(labels.get(1, ()))])
    return DgOperad(
        name,
        DgLambdaModule(max_arity, arities, restrictions),
        compositions,
        {unit: Fraction(1)},
        multiplication=multiplication,
        augmentation_matrix=augmentation,
    )


###############
# ASSOCIATIVE #
###############
def _ass_act(w: Permutation, sigma: Permutation) -> Permutation:
    inv = inverse(sigma)
    return tuple(inv[x - 1] for x in w)


def _ass_restrict(w: Permutation, i: int) -> Permutation:
    return tuple(x - 1 if x > i else x for x in w if x != i)


def _ass_compose(w: Permutation, i: int, u: Permutation) -> Permutation:
    n = len(u)
    out: List[int] = []
    for x in w:
        if x == i:
            out.extend(i - 1 + y for y in u)
        else:
            out.append(x if x < i else x + n - 1)
    return tuple(out)


def associative(max_arity: int) -> DgOperad:
    labels = {n: all_permutations(n) for n in range(1, max_arity + 1)}
    mult = {(1, 2): Fraction(1)} if max_arity >= 2 else None
    return _assemble("Ass", max_arity, labels, _ass_act, _ass_restrict, _ass_compose, (1,), mult)


def associative_unitary(max_arity: int) -> DgOperad:
    return unitary_extension(associative(max_arity), "Ass+")


###############
# COMMUTATIVE #
###############
def commutative(max_arity: int) -> DgOperad:
    labels = {n: (f"c{n}",) for n in range(1, max_arity + 1)}
    arity = lambda c: int(c[1:])  # noqa: E731
    mult = {"c2": Fraction(1)} if max_arity >= 2 else None
    return _assemble(
        "Com",
        max_arity,
        labels,
        lambda c, sigma: c,
        lambda c, i: f"c{arity(c) - 1}",
        lambda a, i, b: f"c{arity(a) + arity(b) - 1}",
        "c1",
        mult,
    )


def commutative_unitary(max_arity: int) -> DgOperad:
    return unitary_extension(commutative(max_arity), "Com+")


############
# IDENTITY #
############
def initial(max_arity: int) -> DgOperad:
    return _assemble("I", max_arity, {1: ("id",)}, lambda x, s: x, lambda x, i: x, lambda a, i, b: "id", "id")


def initial_unitary(max_arity: int) -> DgOperad:
    return unitary_extension(initial(max_arity), "I+")


# I0 is the initial operad under its other usual name
ALIASES = {"I0": "I", "I0+": "I+"}

BUILTINS: Dict[str, Callable[[int], DgOperad]] = {
    "Ass": associative,
    "Ass+": associative_unitary,
    "Com": commutative,
    "Com+": commutative_unitary,
    "I": initial,
    "I+": initial_unitary,
}


def builtin_names() -> List[str]:
    return list(BUILTINS)


def resolve_name(name: str) -> str:
    key = name.replace("₊", "+").replace("_plus", "+")
    key = ALIASES.get(key, key)
    if key not in BUILTINS:
        raise InputError(f"Unknown builtin operad {name!r}; choose from {', '.join(BUILTINS)}")
    return key
