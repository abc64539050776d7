import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Dict, List, Optional, Sequence, Tuple

from tqdm import tqdm

from utils.classes import (
    Element,
    InputError,
    KanConditionError,
    Report,
    StructureError,
    VerificationError,
    WindowError,
)
from utils.operad_core import OperadBase, combine
from utils.qlinalg import GroupAction, QMatrix, Subspace, column_space
from utils.symmetric import adjacent, all_permutations, inverse

LOGGER = logging.getLogger(__name__)


#########
# HOSTS #
#########
class OperadHost:
    """An operad seen as an augmented simplicial object: faces δ_i ω = ω ∘_i 1, degeneracies s_i ω = ω ∘_i m.

    The filler only needs m closed of degree 0 with δ_1 m = δ_2 m = id; associativity of m is only
    used by the identity s_i s_j = s_{j+1} s_i.

    """

    def __init__(self, operad: OperadBase, multiplication: Optional[Element] = None):
        if not operad.unitary:
            raise StructureError(f"{operad.name} has no arity-0 unit; faces are undefined")
        m = multiplication if multiplication is not None else operad.multiplication
        if not m:
            raise StructureError(f"{operad.name} carries no multiplication")
        if operad.element_arity(m) != 2 or any(operad.degree_of(x) for x in m):
            raise StructureError("The multiplication must have arity 2 and degree 0")
        if operad.differential(m):
            raise StructureError("The multiplication must be a cocycle")
        for i in (1, 2):
            if operad.restriction(m, i) != operad.unit():
                raise StructureError(f"δ_{i} of the multiplication is not the identity")
        self.operad = operad
        self.multiplication = m

    @property
    def max_arity(self) -> int:
        return self.operad.max_arity

    # LINEAR STRUCTURE
    def zero(self) -> Element:
        return {}

    def add(self, a: Element, b: Element, c=1) -> Element:
        return combine((a, 1), (b, c))

    def scale(self, a: Element, c) -> Element:
        return combine((a, c))

    def is_zero(self, a: Element) -> bool:
        return not a

    def degree(self, a: Element) -> Optional[int]:
        return self.operad.element_degree(a)

    def arity(self, a: Element) -> Optional[int]:
        return self.operad.element_arity(a)

    # SIMPLICIAL STRUCTURE
    def face(self, a: Element, i: int) -> Element:
        return self.operad.restriction(a, i)

    def degeneracy(self, a: Element, i: int, n: Optional[int] = None) -> Element:
        """s_i a for a of arity n; s_{n+1} a = m ∘_1 a."""

        if not a:
            return {}
        n = self.arity(a) if n is None else n
        if n + 1 > self.max_arity:
            raise WindowError(f"Degeneracy from arity {n} leaves the window {self.max_arity}")
        if 1 <= i <= n:
            return self.operad.compose(a, i, self.multiplication)
        if i == n + 1:
            return self.operad.compose(self.multiplication, 1, a)
        raise WindowError(f"Degeneracy s_{i} undefined in arity {n}")

    def act(self, a: Element, sigma) -> Element:
        return self.operad.act(a, sigma)

    def differential(self, a: Element) -> Element:
        return self.operad.differential(a)

    # COORDINATES
    def dim(self, n: int) -> int:
        return self.operad.dim(n)

    def basis_elements(self, n: int) -> List[Element]:
        return [{x: Fraction(1)} for x in self.operad.basis(n)]

    def to_vector(self, a: Element, n: int) -> Dict[int, Fraction]:
        return self.operad.to_vector(a, n)

    def from_vector(self, v: Dict[int, Fraction], n: int) -> Element:
        return self.operad.from_vector(v, n)


Pair = Tuple[Element, Element]


class ConeHost:
    """The mapping cone of a unitary morphism ρ: A → B, elements (x, y) with componentwise faces.

    Degeneracies use a multiplication m̃ of A in the first component and ρ(m̃) in the second.
    `source` may be None when every first component vanishes.

    """

    def __init__(self, source: Optional[OperadHost], target: OperadHost):
        self.source = source
        self.target = target

    @property
    def max_arity(self) -> int:
        tops = [self.target.max_arity] + ([self.source.max_arity] if self.source else [])
        return min(tops)

    def _check(self, a: Pair):
        if self.source is None and a[0]:
            raise StructureError("This cone has no source component")

    def zero(self) -> Pair:
        return ({}, {})

    def add(self, a: Pair, b: Pair, c=1) -> Pair:
        return (combine((a[0], 1), (b[0], c)), combine((a[1], 1), (b[1], c)))

    def scale(self, a: Pair, c) -> Pair:
        return (combine((a[0], c)), combine((a[1], c)))

    def is_zero(self, a: Pair) -> bool:
        return not a[0] and not a[1]

    def degree(self, a: Pair) -> Optional[int]:
        if a[1]:
            return self.target.degree(a[1])
        if a[0] and self.source is not None:
            return self.source.degree(a[0]) - 1
        return None

    def arity(self, a: Pair) -> Optional[int]:
        if a[1]:
            return self.target.arity(a[1])
        if a[0] and self.source is not None:
            return self.source.arity(a[0])
        return None

    def face(self, a: Pair, i: int) -> Pair:
        self._check(a)
        x = self.source.face(a[0], i) if self.source is not None else {}
        return (x, self.target.face(a[1], i))

    def degeneracy(self, a: Pair, i: int, n: Optional[int] = None) -> Pair:
        self._check(a)
        n = self.arity(a) if n is None else n
        if n is None:
            return ({}, {})
        x = self.source.degeneracy(a[0], i, n) if self.source is not None else {}
        return (x, self.target.degeneracy(a[1], i, n))

    def act(self, a: Pair, sigma) -> Pair:
        x = self.source.act(a[0], sigma) if self.source is not None else {}
        return (x, self.target.act(a[1], sigma))

    def dim(self, n: int) -> int:
        return (self.source.dim(n) if self.source else 0) + self.target.dim(n)

    def to_vector(self, a: Pair, n: int) -> Dict[int, Fraction]:
        offset = self.source.dim(n) if self.source else 0
        out = dict(self.source.to_vector(a[0], n)) if self.source else {}
        out.update({k + offset: v for k, v in self.target.to_vector(a[1], n).items()})
        return out

    def from_vector(self, v: Dict[int, Fraction], n: int) -> Pair:
        offset = self.source.dim(n) if self.source else 0
        x = self.source.from_vector({k: c for k, c in v.items() if k < offset}, n) if self.source else {}
        y = self.target.from_vector({k - offset: c for k, c in v.items() if k >= offset}, n)
        return (x, y)

    def basis_elements(self, n: int):
        out = []
        if self.source is not None:
            out.extend((e, {}) for e in self.source.basis_elements(n))
        out.extend(({}, e) for e in self.target.basis_elements(n))
        return out


#########################
# SIMPLICIAL IDENTITIES #
#########################
def face(p: OperadBase, omega: Element, i: int) -> Element:
    return OperadHost(p).face(omega, i)


def degeneracy(p: OperadBase, omega: Element, i: int) -> Element:
    return OperadHost(p).degeneracy(omega, i)


def check_simplicial(host, up_to_arity: int) -> Report:
    """Checks the face/degeneracy identities on every basis element of arity <= up_to_arity.

    Args:
        - host: an OperadHost (or any host with faces, degeneracies and basis_elements).
        - up_to_arity: highest arity of the elements the identities are evaluated on.

    Returns:
        - Report with the failing identity family, arity and indices.

    """

    report = Report("simplicial identities")
    top = min(up_to_arity, host.max_arity)

    def eq(a, b) -> bool:
        return host.is_zero(host.add(a, b, -1))

    for n in range(0, top + 1):
        for omega in host.basis_elements(n):
            if host.is_zero(omega):
                continue
            # δ_i δ_j = δ_{j-1} δ_i, i < j
            for j in range(2, n + 1):
                for i in range(1, j):
                    if not eq(host.face(host.face(omega, j), i), host.face(host.face(omega, i), j - 1)):
                        report.add("faces", n, host.degree(omega), f"δ_{i}δ_{j} ≠ δ_{j - 1}δ_{i}")
            if n + 1 > host.max_arity:
                continue
            for j in range(1, n + 2):
                s_j = host.degeneracy(omega, j, n)
                # s_i s_j = s_{j+1} s_i, i <= j
                if n + 2 <= host.max_arity:
                    for i in range(1, j + 1):
                        lhs = host.degeneracy(s_j, i, n + 1)
                        rhs = host.degeneracy(host.degeneracy(omega, i, n), j + 1, n + 1)
                        if not eq(lhs, rhs):
                            report.add("degeneracies", n, host.degree(omega), f"s_{i}s_{j} ≠ s_{j + 1}s_{i}")
                for i in range(1, n + 2):
                    lhs = host.face(s_j, i)
                    if i < j:
                        rhs = host.degeneracy(host.face(omega, i), j - 1, n - 1)
                        family = "face-degeneracy-below"
                    elif i in (j, j + 1):
                        rhs = omega
                        family = "face-degeneracy-unit"
                    else:
                        rhs = host.degeneracy(host.face(omega, i - 1), j, n - 1)
                        family = "face-degeneracy-above"
                    if not eq(lhs, rhs):
                        report.add(family, n, host.degree(omega), f"δ_{i}s_{j}")
    return report


###############
# KAN FILLING #
###############
@dataclass
class KanFamily:
    """Members ω_1..ω_n of arity n - 1, one common degree, meant as the faces of an arity-n element."""

    host: object
    n: int
    members: List[object] = field(default_factory=list)

    def __post_init__(self):
        if len(self.members) != self.n:
            raise InputError(f"A family for arity {self.n} needs {self.n} members, got {len(self.members)}")
        degrees = {self.host.degree(w) for w in self.members if not self.host.is_zero(w)}
        if len(degrees) > 1:
            raise InputError(f"Family members have different degrees {sorted(degrees)}")
        arities = {self.host.arity(w) for w in self.members if not self.host.is_zero(w)}
        if arities - {self.n - 1}:
            raise InputError(f"Family members must have arity {self.n - 1}, found {sorted(arities)}")

    @property
    def degree(self) -> Optional[int]:
        for w in self.members:
            if not self.host.is_zero(w):
                return self.host.degree(w)
        return None

    def first_failure(self) -> Optional[Tuple[int, int]]:
        """First (i, j), i < j, with δ_i ω_j ≠ δ_{j-1} ω_i."""

        host = self.host
        for j in range(2, self.n + 1):
            for i in range(1, j):
                lhs = host.face(self.members[j - 1], i)
                rhs = host.face(self.members[i - 1], j - 1)
                if not host.is_zero(host.add(lhs, rhs, -1)):
                    return (i, j)
        return None

    def is_kan(self) -> bool:
        return self.first_failure() is None


def fill(family: KanFamily, verify: bool = True):
    """Builds ω of arity n with δ_i ω = ω_i for every i.

    Starts from u_1 = s_1 ω_1 and corrects one face at a time with u_r = u_{r-1} + s_r(ω_r - δ_r u_{r-1});
    the last step uses the extra degeneracy s_n on arity n - 1.

    """

    failure = family.first_failure()
    if failure is not None:
        raise KanConditionError(*failure)
    host, n = family.host, family.n
    w = family.members
    u = host.degeneracy(w[0], 1, n - 1)
    for r in range(2, n + 1):
        correction = host.add(w[r - 1], host.face(u, r), -1)
        u = host.add(u, host.degeneracy(correction, r, n - 1))
    if verify:
        for i in range(1, n + 1):
            if not host.is_zero(host.add(host.face(u, i), w[i - 1], -1)):
                raise VerificationError(f"Filler fails its face equation δ_{i}")
    return u


def fill_equivariant(
    host,
    n: int,
    family_map: Sequence[Sequence[object]],
    action: GroupAction,
    verify: bool = True,
    progress: bool = False,
) -> List[object]:
    """Σ_n-equivariant filler on a Σ_n-module E.

    Args:
        - host: the simplicial host.
        - n: arity of the fillers.
        - family_map: for each basis vector e_k of E, the faces ω_1(e_k)..ω_n(e_k).
        - action: Σ_n action on E.
        - verify: re-check faces and equivariance of the result.
        - progress: show a bar over Σ_n.

    Returns:
        - ω̃(e_k) for every k, with ω̃(e·σ) = ω̃(e)·σ and δ_i ω̃(e_k) = ω_i(e_k).

    """

    dim = action.dim
    raw = [fill(KanFamily(host, n, list(family_map[k])), verify=False) for k in range(dim)]
    if n <= 1 or dim == 0:
        result = raw
    else:
        result = [host.zero() for _ in range(dim)]
        perms = all_permutations(n)
        for sigma in tqdm(perms, desc=f"averaging Σ_{n}", disable=not progress, leave=False):
            inv_matrix = action.matrix(inverse(sigma))
            for k in range(dim):
                combo = host.zero()
                for j, c in inv_matrix.column(k).items():
                    combo = host.add(combo, raw[j], c)
                result[k] = host.add(result[k], host.act(combo, sigma))
        result = [host.scale(r, Fraction(1, factorial(n))) for r in result]

    if verify:
        for k in range(dim):
            for i in range(1, n + 1):
                if not host.is_zero(host.add(host.face(result[k], i), family_map[k][i - 1], -1)):
                    raise VerificationError(f"Equivariant filler of e_{k} fails δ_{i}")
        for s, matrix in enumerate(action.generators, start=1):
            sigma = adjacent(n, s)
            for k in range(dim):
                lhs = host.zero()
                for j, c in matrix.column(k).items():
                    lhs = host.add(lhs, result[j], c)
                if not host.is_zero(host.add(lhs, host.act(result[k], sigma), -1)):
                    raise VerificationError(f"Equivariant filler is not equivariant for s_{s}")
    LOGGER.debug("fill_equivariant: arity %d, %d generators", n, dim)
    return result


#####################
# SUBMODULE WITNESS #
#####################
class SubmoduleWitness:
    """A graded subspace B(n) of a host, per arity, closed under faces, degeneracies and addition."""

    def __init__(self, host, subspaces: Dict[int, Subspace], max_arity: int):
        self.host = host
        self.subspaces = subspaces
        self.max_arity = max_arity

    @classmethod
    def generated_by(cls, host, elements: Sequence[object], max_arity: int) -> "SubmoduleWitness":
        """Smallest family of subspaces in arities <= max_arity containing `elements` and closed
        under the faces and degeneracies that stay in that range."""

        vectors: Dict[int, List[Dict[int, Fraction]]] = {}
        for e in elements:
            if host.is_zero(e):
                continue
            n = host.arity(e)
            vectors.setdefault(n, []).append(host.to_vector(e, n))
        spaces = {n: _span(vs, host.dim(n)) for n, vs in vectors.items()}
        changed = True
        while changed:
            changed = False
            new: Dict[int, List[Dict[int, Fraction]]] = {}
            for n, space in list(spaces.items()):
                for v in space.vectors():
                    e = host.from_vector(v, n)
                    if n >= 1:
                        for i in range(1, n + 1):
                            new.setdefault(n - 1, []).append(host.to_vector(host.face(e, i), n - 1))
                    if n + 1 <= max_arity:
                        for i in range(1, n + 2):
                            new.setdefault(n + 1, []).append(host.to_vector(host.degeneracy(e, i, n), n + 1))
            for n, vs in new.items():
                old = spaces.get(n)
                merged = _span((old.vectors() if old else []) + vs, host.dim(n))
                if old is None or merged.dim > old.dim:
                    spaces[n] = merged
                    changed = True
        return cls(host, spaces, max_arity)

    def contains(self, element) -> bool:
        if self.host.is_zero(element):
            return True
        n = self.host.arity(element)
        space = self.subspaces.get(n)
        return space is not None and space.contains(self.host.to_vector(element, n))

    def check_closed(self) -> Report:
        report = Report("submodule witness")
        for n, space in self.subspaces.items():
            for v in space.vectors():
                e = self.host.from_vector(v, n)
                for i in range(1, n + 1):
                    if not self.contains(self.host.face(e, i)):
                        report.add("face-closure", n, detail=f"δ_{i} leaves the subspace")
                if n + 1 <= self.max_arity:
                    for i in range(1, n + 2):
                        if not self.contains(self.host.degeneracy(e, i, n)):
                            report.add("degeneracy-closure", n, detail=f"s_{i} leaves the subspace")
        return report


def _span(vectors: Sequence[Dict[int, Fraction]], ambient: int) -> Subspace:
    nonzero = [v for v in vectors if v]
    if not nonzero:
        return Subspace(ambient)
    return column_space(QMatrix.from_columns(nonzero, ambient))
