import itertools
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

from utils import trees
from utils.classes import (
    Element,
    GeneratorKey,
    InputError,
    Permutation,
    Report,
    StructureError,
    ValidationError,
    Violation,
    WindowError,
)
from utils.qlinalg import GroupAction, QMatrix
from utils.sigma_lambda import (
    ArityData,
    DgLambdaModule,
    DgSigmaModule,
    ModuleMorphism,
    cohomology_module,
    validate,
)
from utils.symmetric import (
    adjacent,
    all_permutations,
    block_permutation,
    compose as compose_permutations,
    delete_strand,
    identity,
    insert_block,
    inverse,
    koszul_sign,
)
from utils.trees import CORK, Tree

LOGGER = logging.getLogger(__name__)


############################
# LINEAR COMBINATION TOOLS #
############################
def combine(*terms: Tuple[Element, object]) -> Element:
    """Σ c·x over (x, c) pairs, zero coefficients dropped."""

    out: Dict[Hashable, Fraction] = {}
    for element, c in terms:
        c = Fraction(c)
        if not c:
            continue
        for label, v in element.items():
            out[label] = out.get(label, Fraction(0)) + c * v
    return {label: v for label, v in out.items() if v}


def scale(element: Element, c) -> Element:
    return combine((element, c))


def subtract(a: Element, b: Element) -> Element:
    return combine((a, 1), (b, -1))


#################
# OPERAD (BASE) #
#################
class OperadBase(ABC):
    """Shared interface of concrete and free dg operads.

    Elements are sparse linear combinations {basis label: coefficient}, homogeneous in arity.
    Subclasses provide the basis and the structure on basis labels; everything else is extended
    linearly here.

    """

    name: str
    max_arity: int
    unitary: bool
    multiplication: Optional[Element]

    # STRUCTURE ON BASIS LABELS
    @abstractmethod
    def arity_of(self, label: Hashable) -> int: ...

    @abstractmethod
    def degree_of(self, label: Hashable) -> int: ...

    @abstractmethod
    def basis(self, n: int) -> Tuple[Hashable, ...]: ...

    @abstractmethod
    def compose_basis(self, a: Hashable, i: int, b: Hashable) -> Element: ...

    @abstractmethod
    def act_basis(self, a: Hashable, sigma: Permutation) -> Element: ...

    @abstractmethod
    def differential_basis(self, a: Hashable) -> Element: ...

    @abstractmethod
    def restriction_basis(self, a: Hashable, i: int) -> Element: ...

    @abstractmethod
    def unit(self) -> Element: ...

    @property
    @abstractmethod
    def has_lambda(self) -> bool: ...

    @abstractmethod
    def augmentation(self, alpha: Element) -> Fraction: ...

    # LINEAR EXTENSIONS
    def element_arity(self, alpha: Element) -> Optional[int]:
        return self.arity_of(next(iter(alpha))) if alpha else None

    def element_degree(self, alpha: Element) -> Optional[int]:
        return self.degree_of(next(iter(alpha))) if alpha else None

    def compose(self, alpha: Element, i: int, beta: Element) -> Element:
        """Partial composition α ∘_i β, bilinear in α and β."""

        if not alpha or not beta:
            return {}
        m, n = self.element_arity(alpha), self.element_arity(beta)
        if not 1 <= i <= m:
            raise WindowError(f"Slot {i} out of range for arity {m}")
        if m + n - 1 > self.max_arity:
            raise WindowError(f"∘_{i} of arities {m} and {n} exceeds the arity window {self.max_arity}")
        terms = []
        for a, ca in alpha.items():
            for b, cb in beta.items():
                terms.append((self.compose_basis(a, i, b), ca * cb))
        return combine(*terms)

    def act(self, alpha: Element, sigma: Permutation) -> Element:
        """Right action α·σ."""

        if not alpha or sigma == identity(len(sigma)):
            return dict(alpha)
        return combine(*[(self.act_basis(a, sigma), c) for a, c in alpha.items()])

    def differential(self, alpha: Element) -> Element:
        return combine(*[(self.differential_basis(a), c) for a, c in alpha.items()])

    def restriction(self, alpha: Element, i: int) -> Element:
        """δ_i α = α ∘_i (the arity-0 unit), 1 <= i <= arity."""

        if not alpha:
            return {}
        n = self.element_arity(alpha)
        if not 1 <= i <= n:
            raise WindowError(f"Restriction δ_{i} undefined in arity {n}")
        return combine(*[(self.restriction_basis(a, i), c) for a, c in alpha.items()])

    def cork(self) -> Element:
        if not self.unitary:
            raise StructureError(f"{self.name} has no arity-0 operation")
        return {self.basis(0)[0]: Fraction(1)}

    # COORDINATES
    def dim(self, n: int) -> int:
        return len(self.basis(n))

    def position(self, n: int) -> Dict[Hashable, int]:
        return {label: k for k, label in enumerate(self.basis(n))}

    def to_vector(self, alpha: Element, n: int) -> Dict[int, Fraction]:
        pos = self.position(n)
        try:
            return {pos[label]: c for label, c in alpha.items() if c}
        except KeyError as e:
            raise InputError(f"{e.args[0]!r} is not a basis label of {self.name}({n})") from e

    def from_vector(self, vector: Dict[int, Fraction], n: int) -> Element:
        labels = self.basis(n)
        return {labels[k]: Fraction(c) for k, c in vector.items() if c}

    def arity_data(self, n: int) -> ArityData:
        labels = self.basis(n)
        degrees = tuple(self.degree_of(x) for x in labels)
        columns_d = [self.to_vector(self.differential_basis(x), n) for x in labels]
        actions = []
        for k in range(1, n):
            s = adjacent(n, k)
            actions.append(
                QMatrix.from_columns([self.to_vector(self.act_basis(x, s), n) for x in labels], len(labels))
            )
        return ArityData(n, labels, degrees, tuple(actions), QMatrix.from_columns(columns_d, len(labels)))

    def restriction_matrices(self, n: int) -> Tuple[QMatrix, ...]:
        labels = self.basis(n)
        lower = self.dim(n - 1)
        return tuple(
            QMatrix.from_columns([self.to_vector(self.restriction_basis(x, i), n - 1) for x in labels], lower)
            for i in range(1, n + 1)
        )

    def materialize(self, up_to: Optional[int] = None) -> DgSigmaModule:
        """Materializes the underlying dg Σ-module (a Λ-module when restrictions exist)."""

        top = self.max_arity if up_to is None else min(up_to, self.max_arity)
        data = {n: self.arity_data(n) for n in range(top + 1)}
        if self.has_lambda:
            restrictions = {}
            for n in range(1, top + 1):
                if n == 1 and not self.unitary:
                    restrictions[n] = (QMatrix.zeros(0, data[1].dim),)
                else:
                    restrictions[n] = self.restriction_matrices(n)
            return DgLambdaModule(top, data, restrictions)
        return DgSigmaModule(top, data)


###################
# CONCRETE OPERAD #
###################
@dataclass(eq=False)
class DgOperad(OperadBase):
    """A dg operad given by its underlying module and composition structure constants.

    Args:
        - name: display name.
        - module: underlying dg Σ-module, or Λ-module when restriction operations are present.
        - compositions: (i, a, b) → a ∘_i b for basis labels a, b of positive arity.
        - unit: the operadic unit in arity 1.
        - unitary: True when P(0) is the ground field; restrictions then land in arity 0.
        - multiplication: optional degree-0 element m₂ of arity 2.
        - augmentation: 1 × dim P(1) matrix of ε for Λ-flavored non-unitary operads.

    """

    name: str
    module: DgSigmaModule
    compositions: Dict[Tuple[int, Hashable, Hashable], Element]
    unit_element: Element
    unitary: bool = False
    multiplication: Optional[Element] = None
    augmentation_matrix: Optional[QMatrix] = None

    def __post_init__(self):
        self.max_arity = self.module.max_arity
        self._where: Dict[Hashable, Tuple[int, int]] = {}
        for n in range(self.max_arity + 1):
            for k, label in enumerate(self.module.arity(n).labels):
                if label in self._where:
                    raise InputError(f"{self.name}: basis label {label!r} used twice")
                self._where[label] = (n, k)
        if self.unitary:
            if not isinstance(self.module, DgLambdaModule):
                raise StructureError(f"{self.name}: a unitary operad needs restriction operations")
            if self.module.dim(0) != 1 or self.module.arity(0).degrees != (0,):
                raise StructureError(f"{self.name}: a unitary operad has P(0) = ground field in degree 0")
        elif self.module.dim(0):
            raise StructureError(f"{self.name}: a non-unitary operad has P(0) = 0")

    def _locate(self, label: Hashable) -> Tuple[int, int]:
        try:
            return self._where[label]
        except KeyError as e:
            raise InputError(f"{label!r} is not a basis label of {self.name}") from e

    def arity_of(self, label):
        return self._locate(label)[0]

    def degree_of(self, label):
        n, k = self._locate(label)
        return self.module.arity(n).degrees[k]

    def basis(self, n):
        return self.module.arity(n).labels

    def unit(self):
        return dict(self.unit_element)

    @property
    def has_lambda(self) -> bool:
        return isinstance(self.module, DgLambdaModule)

    def compose_basis(self, a, i, b):
        if self.arity_of(b) == 0:
            if not self.unitary:
                raise StructureError(f"{self.name} has no arity-0 operations")
            return self.restriction_basis(a, i)
        return dict(self.compositions.get((i, a, b), {}))

    def _column(self, matrix: QMatrix, label, target_arity: int) -> Element:
        _, k = self._locate(label)
        return self.from_vector(matrix.column(k), target_arity)

    def act_basis(self, a, sigma):
        n = self.arity_of(a)
        return self._column(self.module.group_action(n).matrix(sigma), a, n)

    def differential_basis(self, a):
        n = self.arity_of(a)
        return self._column(self.module.arity(n).differential, a, n)

    def restriction_basis(self, a, i):
        if not self.has_lambda:
            raise StructureError(f"{self.name} carries no restriction operations")
        n = self.arity_of(a)
        if n == 1 and not self.unitary:
            return {}
        return self._column(self.module.restriction(n, i), a, n - 1)  # type: ignore[attr-defined]

    def augmentation(self, alpha: Element) -> Fraction:
        if self.unitary:
            return sum(self.restriction(alpha, 1).values(), Fraction(0))
        if self.augmentation_matrix is None:
            raise StructureError(f"{self.name} carries no augmentation")
        vec = self.to_vector(alpha, 1)
        image = self.augmentation_matrix.apply(vec)
        return image.get(0, Fraction(0))

    def arity_data(self, n):
        return self.module.arity(n)

    def materialize(self, up_to: Optional[int] = None) -> DgSigmaModule:
        if up_to is None or up_to >= self.max_arity:
            return self.module
        return super().materialize(up_to)


############################
# FREE OPERADS: GENERATORS #
############################
@dataclass(frozen=True, eq=False)
class GeneratorSpace:
    """The generators of one arity: a homogeneous Σ_n-module E(n) with zero differential.

    Args:
        - arity: n >= 2.
        - degrees: degree of each basis generator.
        - actions: matrices of s_1..s_{n-1} on E(n).
        - d_values: d(e_k), elements of the operad the generators are attached to.
        - delta_values: δ_i(e_k) for i = 1..n (unitary flavor only), elements of arity n - 1.
        - names: display names, "e{n}_{k}" by default.

    """

    arity: int
    degrees: Tuple[int, ...]
    actions: Tuple[QMatrix, ...]
    d_values: Tuple[Element, ...]
    delta_values: Optional[Tuple[Tuple[Element, ...], ...]] = None
    names: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.arity < 2:
            raise InputError(f"Generators of arity {self.arity}: free operads take generators of arity >= 2")
        dim = len(self.degrees)
        if len(self.d_values) != dim:
            raise InputError(f"E({self.arity}): {dim} generators, {len(self.d_values)} d-values")
        if len(self.actions) != self.arity - 1 or any(a.shape != (dim, dim) for a in self.actions):
            raise InputError(f"E({self.arity}): action matrices of the wrong shape")
        if self.delta_values is not None and (
            len(self.delta_values) != dim or any(len(v) != self.arity for v in self.delta_values)
        ):
            raise InputError(f"E({self.arity}): expected {self.arity} restriction values per generator")
        if not self.names:
            object.__setattr__(self, "names", tuple(f"e{self.arity}_{k}" for k in range(dim)))

    @property
    def dim(self) -> int:
        return len(self.degrees)

    @cached_property
    def group_action(self) -> GroupAction:
        return GroupAction(self.arity, self.dim, self.actions)

    def act(self, k: int, sigma: Permutation) -> Dict[GeneratorKey, Fraction]:
        column = self.group_action.matrix(sigma).column(k)
        return {(self.arity, j): v for j, v in column.items()}

    def concat(self, other: "GeneratorSpace") -> "GeneratorSpace":
        if other.arity != self.arity:
            raise InputError("Only generator spaces of one arity can be concatenated")
        delta = None
        if (self.delta_values is None) != (other.delta_values is None):
            raise InputError("Cannot mix generators with and without restriction values")
        if self.delta_values is not None:
            delta = self.delta_values + other.delta_values  # type: ignore[operator]
        return GeneratorSpace(
            self.arity,
            self.degrees + other.degrees,
            tuple(QMatrix.block_diagonal([a, b]) for a, b in zip(self.actions, other.actions)),
            self.d_values + other.d_values,
            delta,
            self.names + other.names,
        )


def regular_representation(n: int) -> Tuple[QMatrix, ...]:
    """Matrices of s_1..s_{n-1} on k[Σ_n] with basis Σ_n in lexicographic order, acting by p ↦ p·s."""

    perms = all_permutations(n)
    pos = {p: k for k, p in enumerate(perms)}
    return tuple(
        QMatrix.from_entries({(pos[compose_permutations(p, adjacent(n, k))], j): Fraction(1) for j, p in enumerate(perms)}, len(perms), len(perms))
        for k in range(1, n)
    )


def trivial_representation(n: int, dim: int) -> Tuple[QMatrix, ...]:
    return tuple(QMatrix.eye(dim) for _ in range(n - 1))


def free_basis(
    gens: Dict[int, GeneratorSpace], l: int, flavor: str = "01"
) -> List[Tuple[Tree, int]]:
    """Canonical decorated trees spanning Γ(E)(l), with their degrees.

    Args:
        - gens: generator spaces by arity, all arities >= 2.
        - l: the arity.
        - flavor: "01" (nothing in arity 0) or "+1" (ground field in arity 0).

    Returns:
        - (tree, degree) pairs sorted by degree, then shape order, then decorations.

    """

    if flavor not in ("01", "+1"):
        raise InputError(f"Unknown free operad flavor {flavor!r}")
    if any(r < 2 for r in gens):
        raise InputError("Free operads take generators of arity >= 2 only")
    if l == 0:
        return [(CORK, 0)] if flavor == "+1" else []
    if l == 1:
        return [(1, 0)]
    allowed = [r for r, space in gens.items() if space.dim and r <= l]
    if not allowed:
        return []
    found = []
    for shape_index, shape in enumerate(trees.enumerate_shapes(l, allowed)):
        arities = trees.vertex_arities(shape)
        choices = [range(gens[r].dim) for r in arities]
        for pick in itertools.product(*choices):
            keys = tuple((r, k) for r, k in zip(arities, pick))
            degree = sum(gens[r].degrees[k] for r, k in keys)
            found.append((degree, shape_index, pick, trees.redecorate(shape, keys)))
    found.sort(key=lambda item: item[:3])
    return [(tree, degree) for degree, _, _, tree in found]


################
# FREE OPERADS #
################
Tag = Tuple[str, int]


class FreeOperad(OperadBase):
    """Γ₀₁(E) or Γ₊₁(E) on generators of arities >= 2, truncated at an arity window.

    Basis labels are canonical decorated trees (decorations are generator keys (n, k)), the
    bare leaf 1 for the identity and CORK for the arity-0 unit of the "+1" flavor. A tree stands
    for the tensor product of its decorations taken in pre-order.

    """

    def __init__(
        self,
        generators: Dict[int, GeneratorSpace],
        max_arity: int,
        flavor: str = "01",
        name: str = "free",
        multiplication: Optional[Element] = None,
    ):
        if flavor not in ("01", "+1"):
            raise InputError(f"Unknown free operad flavor {flavor!r}")
        for r, space in generators.items():
            if space.arity != r:
                raise InputError(f"Generator space of arity {space.arity} filed under arity {r}")
            if flavor == "+1" and space.delta_values is None:
                raise StructureError(f"Unitary generators of arity {r} need restriction values")
        self.generators = {r: s for r, s in sorted(generators.items()) if s.dim}
        self.max_arity = max_arity
        self.flavor = flavor
        self.unitary = flavor == "+1"
        self.name = name
        self.multiplication = multiplication
        self._basis: Dict[int, Tuple[Tree, ...]] = {}
        self._degrees: Dict[int, Tuple[int, ...]] = {}
        self._arity_data: Dict[int, ArityData] = {}
        self._positions: Dict[int, Dict[Hashable, int]] = {}
        self._differentials: Dict[Hashable, Element] = {}

    def __repr__(self) -> str:
        dims = {r: s.dim for r, s in self.generators.items()}
        return f"FreeOperad({self.name}, flavor={self.flavor}, generators={dims}, max_arity={self.max_arity})"

    @property
    def has_lambda(self) -> bool:
        return self.unitary

    # GENERATORS
    def generator_keys(self, n: Optional[int] = None) -> List[GeneratorKey]:
        arities = [n] if n is not None else list(self.generators)
        return [(r, k) for r in arities if r in self.generators for k in range(self.generators[r].dim)]

    def generator_degree(self, key: GeneratorKey) -> int:
        return self.generators[key[0]].degrees[key[1]]

    def generator_name(self, key: GeneratorKey) -> str:
        return self.generators[key[0]].names[key[1]]

    def d_value(self, key: GeneratorKey) -> Element:
        return self.generators[key[0]].d_values[key[1]]

    def delta_value(self, key: GeneratorKey, i: int) -> Element:
        space = self.generators[key[0]]
        if space.delta_values is None:
            raise StructureError(f"Generator {key} has no restriction values")
        return space.delta_values[key[1]][i - 1]

    def corolla_of(self, key: GeneratorKey) -> Tree:
        return trees.corolla(key[0], key)

    # BASIS
    def arity_of(self, label):
        return trees.arity(label)

    def degree_of(self, label):
        if label == CORK or trees.is_leaf(label):
            return 0
        return sum(self.generator_degree(k) for k in trees.decorations(label))

    def basis(self, n):
        if n not in self._basis:
            pairs = free_basis(self.generators, n, self.flavor)
            self._basis[n] = tuple(t for t, _ in pairs)
            self._degrees[n] = tuple(d for _, d in pairs)
        return self._basis[n]

    def position(self, n):
        if n not in self._positions:
            self._positions[n] = {label: k for k, label in enumerate(self.basis(n))}
        return self._positions[n]

    def unit(self):
        return {1: Fraction(1)}

    def augmentation(self, alpha: Element) -> Fraction:
        return alpha.get(1, Fraction(0))

    def arity_data(self, n):
        if n not in self._arity_data:
            self._arity_data[n] = super().arity_data(n)
        return self._arity_data[n]

    # NORMALIZATION
    def _act_on_value(self, value: Dict[GeneratorKey, Fraction], pi: Permutation) -> Dict[GeneratorKey, Fraction]:
        if pi == identity(len(pi)):
            return value
        out: Dict[GeneratorKey, Fraction] = {}
        for (r, k), c in value.items():
            for key, v in self.generators[r].act(k, pi).items():
                out[key] = out.get(key, Fraction(0)) + c * v
        return {key: v for key, v in out.items() if v}

    def _normalize(
        self,
        planar: Tree,
        values: Dict[Tag, Dict[GeneratorKey, Fraction]],
        order: Sequence[Tag],
        coefficient: Fraction,
    ) -> Element:
        """Turns a planar tree with tagged vertices into a combination of canonical basis trees.

        Args:
            - planar: tree whose vertex decorations are tags.
            - values: tag → combination of generators of the vertex arity, homogeneous in degree.
            - order: the order in which the tags' factors appear in the tensor product.
            - coefficient: scalar in front.

        Returns:
            - the element of the free operad.

        """

        if trees.is_leaf(planar) or planar == CORK:
            return {planar: Fraction(coefficient)} if coefficient else {}
        canonical, transforms = trees.canonical_form(planar)
        pre = trees.decorations(canonical)
        position = {tag: k for k, tag in enumerate(pre)}
        degrees = [self.generator_degree(next(iter(values[t]))) if values[t] else 0 for t in order]
        sign = koszul_sign([position[t] for t in order], degrees)

        factors = [list(self._act_on_value(values[tag], pi).items()) for tag, pi in zip(pre, transforms)]
        out: Dict[Hashable, Fraction] = {}
        for choice in itertools.product(*factors):
            c = Fraction(coefficient) * sign
            for _, v in choice:
                c *= v
            label = trees.redecorate(canonical, [key for key, _ in choice])
            out[label] = out.get(label, Fraction(0)) + c
        return {label: v for label, v in out.items() if v}

    @staticmethod
    def _tag(t: Tree, prefix: str) -> Tuple[Tree, List[Tag], Dict[Tag, Dict[GeneratorKey, Fraction]]]:
        decos = trees.decorations(t)
        tags = [(prefix, k) for k in range(len(decos))]
        return trees.redecorate(t, tags), tags, {tag: {d: Fraction(1)} for tag, d in zip(tags, decos)}

    # STRUCTURE ON BASIS TREES
    def compose_basis(self, a, i, b):
        if a == CORK:
            raise WindowError("The arity-0 operation has no inputs")
        if b == 1:
            return {a: Fraction(1)}
        if a == 1:
            return {b: Fraction(1)}
        if b == CORK:
            return self.restriction_basis(a, i)
        ta, tags_a, values = self._tag(a, "a")
        tb, tags_b, values_b = self._tag(b, "b")
        values.update(values_b)
        planar, _ = trees.graft(ta, i, tb)
        return self._normalize(planar, values, tags_a + tags_b, Fraction(1))

    def act_basis(self, a, sigma):
        if a == CORK or a == 1:
            return {a: Fraction(1)}
        inv = inverse(sigma)
        tagged, tags, values = self._tag(a, "t")
        planar = trees.relabel(tagged, lambda j: inv[j - 1])
        return self._normalize(planar, values, tags, Fraction(1))

    def differential_basis(self, a):
        if a == CORK or a == 1:
            return {}
        if a in self._differentials:
            return self._differentials[a]
        tagged, tags, values = self._tag(a, "t")
        nodes = trees.vertices(tagged)
        terms = []
        sign = 1
        for j, (tag, node) in enumerate(zip(tags, nodes)):
            key = next(iter(values[tag]))
            for s_tree, c in self.d_value(key).items():
                ts, tags_s, values_s = self._tag(s_tree, "s")
                planar = trees.substitute_vertex(tagged, j, ts, node.children)
                merged = dict(values)
                merged.update(values_s)
                order = tags[:j] + tags_s + tags[j + 1:]
                terms.append((self._normalize(planar, merged, order, Fraction(c)), sign))
            if self.generator_degree(key) % 2:
                sign = -sign
        result = combine(*terms)
        self._differentials[a] = result
        return result

    def restriction_basis(self, a, i):
        if not self.unitary:
            raise StructureError("Restrictions are defined on the unitary flavor Γ₊₁ only")
        if a == 1:
            return {CORK: Fraction(1)}
        if a == CORK:
            raise WindowError("The arity-0 operation has no inputs to restrict")
        tagged, tags, values = self._tag(a, "t")
        nodes = trees.vertices(tagged)
        for j, node in enumerate(nodes):
            if i in node.children:
                slot = node.children.index(i) + 1
                break
        else:
            raise WindowError(f"Leaf {i} not found in {trees.serialize(a)}")
        key = next(iter(values[tags[j]]))
        remaining = [c for k, c in enumerate(node.children, start=1) if k != slot]
        terms = []
        for s_tree, c in self.delta_value(key, slot).items():
            ts, tags_s, values_s = self._tag(s_tree, "s")
            planar = trees.substitute_vertex(tagged, j, ts, remaining)
            planar = trees.relabel(planar, lambda x: x - 1 if x > i else x)
            merged = dict(values)
            merged.update(values_s)
            order = tags[:j] + tags_s + tags[j + 1:]
            terms.append((self._normalize(planar, merged, order, Fraction(c)), 1))
        return combine(*terms)


#############
# MORPHISMS #
#############
class FreeMorphism:
    """Operad morphism out of a free operad, fixed by the images of the generators."""

    def __init__(self, source: FreeOperad, target: OperadBase, images: Dict[GeneratorKey, Element]):
        missing = [k for k in source.generator_keys() if k not in images]
        if missing:
            raise InputError(f"No image given for generators {missing[:5]}")
        self.source = source
        self.target = target
        self.images = images
        self._cache: Dict[Hashable, Element] = {}

    def image_of_label(self, label: Hashable) -> Element:
        if label in self._cache:
            return self._cache[label]
        if label == 1:
            result = self.target.unit()
        elif label == CORK:
            result = self.target.cork()
        else:
            planar = self._planar(label)
            b = tuple(trees.leaves(label))
            result = self.target.act(planar, inverse(b))
        self._cache[label] = result
        return result

    def _planar(self, node: Tree) -> Element:
        g = dict(self.images[node.decoration])
        offset = 0
        for child in node.children:
            if trees.is_leaf(child):
                offset += 1
                continue
            g = self.target.compose(g, offset + 1, self._planar(child))
            offset += trees.arity(child)
        return g

    def __call__(self, alpha: Element) -> Element:
        return combine(*[(self.image_of_label(x), c) for x, c in alpha.items()])

    def component(self, n: int) -> QMatrix:
        columns = [self.target.to_vector(self.image_of_label(x), n) for x in self.source.basis(n)]
        return QMatrix.from_columns(columns, self.target.dim(n))

    def module_morphism(self, arities: Iterable[int], check: bool = False) -> ModuleMorphism:
        """The components in the given arities as a morphism of the materialized modules."""

        arities = list(arities)
        top = max(arities)
        src = DgSigmaModule(top, {n: self.source.arity_data(n) for n in arities})
        tgt = DgSigmaModule(top, {n: self.target.arity_data(n) for n in arities})
        return ModuleMorphism(src, tgt, {n: self.component(n) for n in arities}, check=check)

    def check(self) -> Report:
        """Chain-map, equivariance and restriction compatibility on the generators."""

        report = Report(f"morphism {self.source.name} → {self.target.name}")
        for key in self.source.generator_keys():
            n, k = key
            e = {self.source.corolla_of(key): Fraction(1)}
            image = self.images[key]
            expected_degree = self.source.generator_degree(key)
            if any(self.target.degree_of(x) != expected_degree for x in image):
                report.add("degree", n, expected_degree, f"image of {self.source.generator_name(key)}")
            if self(self.source.d_value(key)) != self.target.differential(image):
                report.add("chain-map", n, expected_degree, f"φ(d {self.source.generator_name(key)}) ≠ ∂φ")
            for s in range(1, n):
                sigma = adjacent(n, s)
                if self(self.source.act(e, sigma)) != self.target.act(image, sigma):
                    report.add("equivariance", n, expected_degree, f"{self.source.generator_name(key)}·s_{s}")
            if self.source.unitary and self.target.unitary:
                for i in range(1, n + 1):
                    if self(self.source.delta_value(key, i)) != self.target.restriction(image, i):
                        report.add("restriction", n, expected_degree, f"δ_{i} {self.source.generator_name(key)}")
        return report


class MatrixMorphism:
    """Operad morphism given by explicit matrices on the bases, arity by arity."""

    def __init__(self, source: OperadBase, target: OperadBase, components: Dict[int, QMatrix]):
        self.source = source
        self.target = target
        self.components = components

    def component(self, n: int) -> QMatrix:
        if n in self.components:
            return self.components[n]
        return QMatrix.zeros(self.target.dim(n), self.source.dim(n))

    def __call__(self, alpha: Element) -> Element:
        if not alpha:
            return {}
        n = self.source.element_arity(alpha)
        vec = self.component(n).apply(self.source.to_vector(alpha, n))
        return self.target.from_vector(vec, n)

    def check(self, up_to: Optional[int] = None) -> Report:
        top = min(self.source.max_arity, self.target.max_arity) if up_to is None else up_to
        report = Report(f"morphism {self.source.name} → {self.target.name}")
        for n in range(top + 1):
            for x in self.source.basis(n):
                ex = {x: Fraction(1)}
                if self(self.source.differential(ex)) != self.target.differential(self(ex)):
                    report.add("chain-map", n, self.source.degree_of(x), repr(x))
                for s in range(1, n):
                    sigma = adjacent(n, s)
                    if self(self.source.act(ex, sigma)) != self.target.act(self(ex), sigma):
                        report.add("equivariance", n, self.source.degree_of(x), f"{x!r}·s_{s}")
        for m in range(1, top + 1):
            for n in range(1, top + 2 - m):
                for a in self.source.basis(m):
                    for b in self.source.basis(n):
                        ea, eb = {a: Fraction(1)}, {b: Fraction(1)}
                        for i in range(1, m + 1):
                            if self(self.source.compose(ea, i, eb)) != self.target.compose(self(ea), i, self(eb)):
                                report.add("composition", m + n - 1, detail=f"{a!r} ∘_{i} {b!r}")
        return report


def identity_morphism(p: OperadBase) -> MatrixMorphism:
    return MatrixMorphism(p, p, {n: QMatrix.eye(p.dim(n)) for n in range(p.max_arity + 1)})


########################
# PRINCIPAL EXTENSIONS #
########################
def check_extension(base: FreeOperad, space: GeneratorSpace) -> Report:
    """Hypotheses of a (unitary) principal extension of `base` by `space`."""

    n = space.arity
    report = Report(f"principal extension in arity {n}")
    for k in range(space.dim):
        name = space.names[k]
        d = space.d_values[k]
        if d:
            if any(base.arity_of(x) != n or base.degree_of(x) != space.degrees[k] + 1 for x in d):
                report.add("d-target", n, space.degrees[k], f"d({name}) is not in arity {n}, degree {space.degrees[k] + 1}")
                continue
            if base.differential(d):
                report.add("d-cocycle", n, space.degrees[k], f"d({name}) is not a cocycle")
        for s in range(1, n):
            sigma = adjacent(n, s)
            lhs = combine(*[(space.d_values[j], c) for (_, j), c in space.act(k, sigma).items()])
            if lhs != base.act(d, sigma):
                report.add("d-equivariance", n, space.degrees[k], f"d({name}·s_{s}) ≠ d({name})·s_{s}")
        if space.delta_values is None:
            continue
        for i in range(1, n + 1):
            delta = space.delta_values[k][i - 1]
            if any(base.arity_of(x) != n - 1 or base.degree_of(x) != space.degrees[k] for x in delta):
                report.add("delta-target", n, space.degrees[k], f"δ_{i}({name}) has the wrong arity or degree")
                continue
            if base.differential(delta) != base.restriction(d, i):
                report.add("delta-differential", n, space.degrees[k], f"∂δ_{i}({name}) ≠ δ_{i}d({name})")
            for j in range(i + 1, n + 1):
                lhs = base.restriction(space.delta_values[k][j - 1], i)
                rhs = base.restriction(delta, j - 1)
                if lhs != rhs:
                    report.add("delta-relation", n, space.degrees[k], f"δ_{i}δ_{j}({name}) ≠ δ_{j - 1}δ_{i}({name})")
            for s in range(1, n):
                sigma = adjacent(n, s)
                lhs = combine(*[(space.delta_values[j][i - 1], c) for (_, j), c in space.act(k, sigma).items()])
                rhs = base.act(space.delta_values[k][sigma[i - 1] - 1], delete_strand(sigma, i))
                if lhs != rhs:
                    report.add("delta-equivariance", n, space.degrees[k], f"δ_{i}({name}·s_{s})")
    return report


def principal_extend(base: FreeOperad, space: GeneratorSpace, check: bool = True) -> FreeOperad:
    """P ⊔_d Γ(E): adds the generators of `space` to `base` with the prescribed d (and δ) values.

    Args:
        - base: the free operad being extended.
        - space: homogeneous generators of one arity with their d-values (and δ-values).
        - check: verify the extension hypotheses first.

    Returns:
        - the extended free operad; arities below space.arity are unchanged.

    """

    if space.dim == 0:
        return base
    if base.unitary != (space.delta_values is not None):
        raise StructureError("Unitary extensions need restriction values, plain ones must not carry them")
    if check:
        report = check_extension(base, space)
        if not report.ok:
            raise ValidationError("Principal extension hypotheses fail", report.violations)
    generators = dict(base.generators)
    n = space.arity
    generators[n] = generators[n].concat(space) if n in generators else space
    extended = FreeOperad(generators, base.max_arity, base.flavor, base.name, base.multiplication)
    LOGGER.debug("principal extension: arity %d gains %d generators", n, space.dim)
    return extended


def leibniz_differential(f: FreeOperad, n: int) -> QMatrix:
    """Whole-arity matrix of the differential of Γ(E)(n) induced by the d-values and the Leibniz rule."""

    d = f.arity_data(n).differential
    if not (d @ d).is_zero():
        raise ValidationError(
            "Leibniz differential does not square to zero", [Violation("d-squared", n, detail=f.name)]
        )
    return d


######################
# UNITARY EXTENSIONS #
######################
def unitary_extension(p: DgOperad, name: Optional[str] = None) -> DgOperad:
    """P₊: adds P(0) = k with compositions against it given by the restrictions and ε."""

    if p.unitary:
        raise StructureError(f"{p.name} is already unitary")
    if not p.has_lambda or p.augmentation_matrix is None:
        raise StructureError(f"{p.name} carries no restriction data to extend with")
    module: DgLambdaModule = p.module  # type: ignore[assignment]
    arities = dict(module.arities)
    arities[0] = ArityData(0, (CORK,), (0,), (), QMatrix.zeros(1, 1))
    restrictions = dict(module.restrictions)
    restrictions[1] = (p.augmentation_matrix,)
    extended = DgLambdaModule(module.max_arity, arities, restrictions)
    return DgOperad(
        name or f"{p.name}+",
        extended,
        p.compositions,
        p.unit_element,
        unitary=True,
        multiplication=p.multiplication,
    )


def truncate(p: DgOperad, name: Optional[str] = None) -> DgOperad:
    """Drops P(0) and keeps the restrictions (and ε = δ_1 on P(1)) as Λ-data."""

    if not p.unitary:
        raise StructureError(f"{p.name} is not unitary")
    module: DgLambdaModule = p.module  # type: ignore[assignment]
    arities = dict(module.arities)
    arities.pop(0, None)
    restrictions = dict(module.restrictions)
    augmentation = restrictions.pop(1)[0]
    restrictions[1] = (QMatrix.zeros(0, module.dim(1)),)
    truncated = DgLambdaModule(module.max_arity, arities, restrictions)
    base = name or (p.name[:-1] if p.name.endswith("+") else f"{p.name}-")
    return DgOperad(
        base,
        truncated,
        p.compositions,
        p.unit_element,
        unitary=False,
        multiplication=p.multiplication,
        augmentation_matrix=augmentation,
    )


############
# CHECKERS #
############
def check_unitary_multiplication(p: OperadBase) -> Report:
    """m₂∘₁m₂ = m₂∘₂m₂, δ₁m₂ = id = δ₂m₂ and ∂m₂ = 0, with m₂ of arity 2 and degree 0."""

    report = Report(f"unitary multiplication of {p.name}")
    m = p.multiplication
    if not m:
        report.add("multiplication-missing", 2, detail="no multiplication element")
        return report
    if p.element_arity(m) != 2 or any(p.degree_of(x) != 0 for x in m):
        report.add("multiplication-shape", 2, detail="m₂ must have arity 2 and degree 0")
        return report
    if p.max_arity >= 3 and p.compose(m, 1, m) != p.compose(m, 2, m):
        report.add("associativity", 3, 0, "m₂∘₁m₂ ≠ m₂∘₂m₂")
    try:
        for i in (1, 2):
            if p.restriction(m, i) != p.unit():
                report.add("unit", 2, 0, f"δ_{i}m₂ ≠ id")
    except StructureError as e:
        report.add("unit", 2, 0, str(e))
    if p.differential(m):
        report.add("cocycle", 2, 0, "∂m₂ ≠ 0")
    return report


def check_operad_axioms(p: OperadBase, up_to: Optional[int] = None) -> Report:
    """Unit, equivariance, associativity, Leibniz and restriction axioms on basis triples.

    Args:
        - p: any operad.
        - up_to: highest arity touched (defaults to the window).

    Returns:
        - a Report of located violations.

    """

    top = p.max_arity if up_to is None else min(up_to, p.max_arity)
    report = Report(f"operad axioms of {p.name}")
    unit = p.unit()
    basis = {n: [{x: Fraction(1)} for x in p.basis(n)] for n in range(1, top + 1)}

    for m in range(1, top + 1):
        for a in basis[m]:
            if p.compose(unit, 1, a) != a:
                report.add("unit", m, detail=f"id ∘₁ {a}")
            for i in range(1, m + 1):
                if p.compose(a, i, unit) != a:
                    report.add("unit", m, detail=f"{a} ∘_{i} id")

    for m in range(1, top + 1):
        for n in range(1, top + 2 - m):
            for a in basis[m]:
                da = p.element_degree(a)
                for b in basis[n]:
                    for i in range(1, m + 1):
                        ab = p.compose(a, i, b)
                        # Leibniz
                        lhs = p.differential(ab)
                        rhs = combine(
                            (p.compose(p.differential(a), i, b), 1),
                            (p.compose(a, i, p.differential(b)), (-1) ** (da % 2)),
                        )
                        if lhs != rhs:
                            report.add("leibniz", m + n - 1, detail=f"{a} ∘_{i} {b}")
                        # EQUIVARIANCE
                        for s in range(1, m):
                            sigma = adjacent(m, s)
                            lhs = p.compose(p.act(a, sigma), i, b)
                            rhs = p.act(p.compose(a, sigma[i - 1], b), block_permutation(sigma, i, n))
                            if lhs != rhs:
                                report.add("equivariance", m + n - 1, detail=f"({a}·s_{s}) ∘_{i} {b}")
                        for s in range(1, n):
                            sigma = adjacent(n, s)
                            lhs = p.compose(a, i, p.act(b, sigma))
                            rhs = p.act(ab, insert_block(sigma, i, m))
                            if lhs != rhs:
                                report.add("equivariance", m + n - 1, detail=f"{a} ∘_{i} ({b}·s_{s})")
                        if p.has_lambda:
                            _check_restriction_compatibility(p, report, a, i, b, ab)

    for m in range(1, top + 1):
        for n in range(1, top + 1):
            for k in range(1, top + 1):
                if m + n + k - 2 > top:
                    continue
                for a in basis[m]:
                    for b in basis[n]:
                        for c in basis[k]:
                            _check_associativity(p, report, a, b, c, m, n)
    return report


def _check_associativity(p: OperadBase, report: Report, a, b, c, m: int, n: int):
    total = m + n + p.element_arity(c) - 2
    for i in range(1, m + 1):
        ab = p.compose(a, i, b)
        for j in range(1, n + 1):
            if p.compose(ab, i + j - 1, c) != p.compose(a, i, p.compose(b, j, c)):
                report.add("sequential", total, detail=f"({a} ∘_{i} {b}) ∘_{i + j - 1} {c}")
        for k in range(i + 1, m + 1):
            sign = (-1) ** ((p.element_degree(b) * p.element_degree(c)) % 2)
            lhs = p.compose(ab, k + n - 1, c)
            rhs = scale(p.compose(p.compose(a, k, c), i, b), sign)
            if lhs != rhs:
                report.add("parallel", total, detail=f"({a} ∘_{i} {b}) ∘_{k + n - 1} {c}")


def _check_restriction_compatibility(p: OperadBase, report: Report, a: Element, i: int, b: Element, ab: Element):
    m, n = p.element_arity(a), p.element_arity(b)
    for k in range(1, m + n):
        lhs = p.restriction(ab, k)
        if k < i:
            rhs = p.compose(p.restriction(a, k), i - 1, b)
        elif k < i + n:
            if n == 1:
                rhs = scale(p.restriction(a, i), p.augmentation(b))
            else:
                rhs = p.compose(a, i, p.restriction(b, k - i + 1))
        else:
            rhs = p.compose(p.restriction(a, k - n + 1), i, b)
        if lhs != rhs:
            report.add("restriction-composition", m + n - 1, detail=f"δ_{k}({a} ∘_{i} {b})")


def validate_operad(p: OperadBase, up_to: Optional[int] = None) -> Report:
    report = validate(p.materialize(up_to))
    report.title = f"validation of {p.name}"
    report.extend(check_operad_axioms(p, up_to))
    if p.multiplication:
        report.extend(check_unitary_multiplication(p))
    return report


#####################
# COHOMOLOGY OPERAD #
#####################
def cohomology_operad(p: OperadBase, strategy: str = "first-pivot", up_to: Optional[int] = None) -> DgOperad:
    """HP with zero differential and the induced compositions, action, unit and restrictions."""

    module = p.materialize(up_to)
    h_module, parts = cohomology_module(module, strategy)
    top = module.max_arity

    def rep(n: int, k: int) -> Element:
        return p.from_vector(parts[n].inclusion.column(k), n)

    def cls(element: Element, n: int) -> Element:
        column = QMatrix.from_columns([p.to_vector(element, n)], p.dim(n))
        return {h_module.arity(n).labels[j]: v for j, v in parts[n].project(column).column(0).items()}

    compositions = {}
    for m in range(1, top + 1):
        for n in range(1, top + 2 - m):
            for ka, a in enumerate(h_module.arity(m).labels):
                for kb, b in enumerate(h_module.arity(n).labels):
                    for i in range(1, m + 1):
                        value = cls(p.compose(rep(m, ka), i, rep(n, kb)), m + n - 1)
                        if value:
                            compositions[(i, a, b)] = value

    augmentation = None
    if p.has_lambda and not p.unitary:
        row = [p.augmentation(rep(1, k)) for k in range(h_module.dim(1))]
        augmentation = QMatrix.from_rows([row], cols=len(row))
    multiplication = cls(p.multiplication, 2) if p.multiplication else None
    return DgOperad(
        f"H({p.name})",
        h_module,
        compositions,
        cls(p.unit(), 1),
        unitary=p.unitary,
        multiplication=multiplication,
        augmentation_matrix=augmentation,
    )


############
# FIXTURES #
############
def _closed_space(arity: int, degree: int, d_value: Element, unitary: bool) -> GeneratorSpace:
    delta = (tuple({} for _ in range(arity)),) if unitary else None
    return GeneratorSpace(arity, (degree,), trivial_representation(arity, 1), (d_value,), delta)


def adjoin_acyclic_pair(free: FreeOperad, arity: int, degree: int) -> Tuple[FreeOperad, FreeMorphism]:
    """Γ(M ⊕ {x, y = ∂x}) with x of the given degree, and its projection back onto Γ(M).

    x and y carry the trivial action and vanishing restrictions; the projection kills both and is
    a surjective quasi-isomorphism.

    """

    k_y = free.generators[arity].dim if arity in free.generators else 0
    with_y = principal_extend(free, _closed_space(arity, degree + 1, {}, free.unitary))
    y = {trees.corolla(arity, (arity, k_y)): Fraction(1)}
    with_pair = principal_extend(with_y, _closed_space(arity, degree, y, free.unitary))
    with_pair.name = f"{free.name}+pair"
    images = {key: {free.corolla_of(key): Fraction(1)} for key in free.generator_keys()}
    images[(arity, k_y)] = {}
    images[(arity, k_y + 1)] = {}
    return with_pair, FreeMorphism(with_pair, free, images)


def scale_generators(free: FreeOperad, factor) -> FreeMorphism:
    """The grading automorphism e ↦ λ^{n-1}·e on generators of arity n (non-unitary flavor)."""

    if free.unitary:
        raise StructureError("Scaling generators does not respect non-trivial restriction values")
    factor = Fraction(factor)
    images = {key: {free.corolla_of(key): factor ** (key[0] - 1)} for key in free.generator_keys()}
    return FreeMorphism(free, free, images)


def empty_free_operad(max_arity: int, flavor: str = "01", name: str = "free") -> FreeOperad:
    return FreeOperad({}, max_arity, flavor, name)


def builtin(name: str, max_arity: int) -> DgOperad:
    from assets.operads.builtin_operads import BUILTINS, resolve_name

    return BUILTINS[resolve_name(name)](max_arity)
