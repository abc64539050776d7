from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Callable, Dict, Hashable, List, Optional, Sequence, Tuple, Union

import networkx as nx
from lark import Lark, Transformer
from lark.exceptions import LarkError
from sympy.utilities.iterables import multiset_partitions

from utils.classes import InputError, Permutation, ValidationError, Violation, WindowError
from utils.symmetric import sorting_permutation

# A tree is either a leaf (its int label) or a Vertex.
# The identity operation of arity 1 is the bare leaf 1.
# CORK stands for the single basis element of arity 0 (unitary flavor only).
CORK = "cork"


@dataclass(frozen=True)
class Vertex:
    children: Tuple["Tree", ...]
    decoration: Optional[Hashable] = None

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValidationError(
                "Reduced trees need at least two children per vertex",
                [Violation("reduced", len(self.children), detail=repr(self))],
            )

    @property
    def arity(self) -> int:
        return len(self.children)


Tree = Union[int, Vertex]


#################
# BASIC QUERIES #
#################
def is_leaf(t: Tree) -> bool:
    return isinstance(t, int)


def leaves(t: Tree) -> List[int]:
    """Leaf labels in planar order."""

    if is_leaf(t):
        return [t]  # type: ignore[list-item]
    out: List[int] = []
    for c in t.children:  # type: ignore[union-attr]
        out.extend(leaves(c))
    return out


def arity(t: Tree) -> int:
    if t == CORK:
        return 0
    return len(leaves(t))


def min_leaf(t: Tree) -> int:
    return t if is_leaf(t) else min(min_leaf(c) for c in t.children)  # type: ignore[union-attr,return-value]


def vertices(t: Tree) -> List[Vertex]:
    """Internal vertices in pre-order (parent before children, children left to right)."""

    if is_leaf(t):
        return []
    out = [t]
    for c in t.children:  # type: ignore[union-attr]
        out.extend(vertices(c))
    return out  # type: ignore[return-value]


def decorations(t: Tree) -> Tuple[Hashable, ...]:
    return tuple(v.decoration for v in vertices(t))


def vertex_arities(t: Tree) -> Tuple[int, ...]:
    return tuple(v.arity for v in vertices(t))


def relabel(t: Tree, mapping: Union[Dict[int, int], Callable[[int], int]]) -> Tree:
    lookup = mapping.__getitem__ if isinstance(mapping, dict) else mapping
    if is_leaf(t):
        return lookup(t)
    return Vertex(tuple(relabel(c, lookup) for c in t.children), t.decoration)  # type: ignore[union-attr]


def redecorate(t: Tree, new: Sequence[Hashable]) -> Tree:
    """Replaces decorations in pre-order by the items of `new`."""

    it = iter(new)

    def walk(node: Tree) -> Tree:
        if is_leaf(node):
            return node
        deco = next(it)
        return Vertex(tuple(walk(c) for c in node.children), deco)  # type: ignore[union-attr]

    return walk(t)


def corolla(n: int, decoration: Optional[Hashable] = None) -> Tree:
    if n == 1:
        return 1
    return Vertex(tuple(range(1, n + 1)), decoration)


######################
# VALIDATION (GRAPH) #
######################
def to_graph(t: Tree) -> nx.DiGraph:
    """Directed graph view: edges point from parent to child; leaves are ("leaf", label)."""

    graph = nx.DiGraph()
    counter = [0]

    def add(node: Tree) -> Hashable:
        if is_leaf(node):
            key = ("leaf", node)
            graph.add_node(key)
            return key
        key = ("vertex", counter[0])
        counter[0] += 1
        graph.add_node(key, decoration=node.decoration)  # type: ignore[union-attr]
        for c in node.children:  # type: ignore[union-attr]
            graph.add_edge(key, add(c))
        return key

    add(t)
    return graph


def check_tree(t: Tree) -> List[Violation]:
    """Returns the ways t fails to be a reduced tree with leaves labeled bijectively by 1..l."""

    problems: List[Violation] = []
    labels = leaves(t)
    n = len(labels)
    if sorted(labels) != list(range(1, n + 1)):
        problems.append(Violation("leaf-labels", n, detail=f"labels {labels} are not 1..{n}"))
    graph = to_graph(t)
    if not nx.is_arborescence(graph):
        problems.append(Violation("rooted-tree", n, detail="not a rooted tree"))
    for node, out_degree in graph.out_degree():
        if node[0] == "vertex" and out_degree < 2:
            problems.append(Violation("reduced", n, detail=f"vertex with {out_degree} children"))
    return problems


##################
# CANONICAL FORM #
##################
def canonical_form(t: Tree) -> Tuple[Tree, List[Permutation]]:
    """Orders the children of every vertex by their smallest leaf label.

    Args:
        - t: a tree in an arbitrary planar order.

    Returns:
        - canonical: the canonical planar representative.
        - transforms: one permutation per vertex of `canonical`, in pre-order; π(k) is the original
            position of the child now in position k. A decoration e must become e·π to keep the
            operation unchanged.

    """

    transforms: List[Permutation] = []

    def walk(node: Tree) -> Tree:
        if is_leaf(node):
            return node
        keys = [min_leaf(c) for c in node.children]  # type: ignore[union-attr]
        pi = sorting_permutation(keys)
        transforms.append(pi)
        ordered = [node.children[k - 1] for k in pi]  # type: ignore[union-attr]
        return Vertex(tuple(walk(c) for c in ordered), node.decoration)  # type: ignore[union-attr]

    canonical = walk(t)
    return canonical, transforms


def is_canonical(t: Tree) -> bool:
    return all(
        [min_leaf(c) for c in v.children] == sorted(min_leaf(c) for c in v.children)
        for v in vertices(t)
    )


###############
# ENUMERATION #
###############
@lru_cache(maxsize=None)
def _shapes_on(labels: Tuple[int, ...], allowed: Tuple[int, ...]) -> Tuple[Tree, ...]:
    if len(labels) == 1:
        return (labels[0],)
    found: List[Tree] = []
    for r in allowed:
        if r > len(labels):
            continue
        for partition in multiset_partitions(list(labels), m=r):
            blocks = sorted((tuple(sorted(b)) for b in partition), key=lambda b: b[0])
            options: List[List[Tree]] = [[]]
            for block in blocks:
                options = [prefix + [sub] for prefix in options for sub in _shapes_on(block, allowed)]
            found.extend(Vertex(tuple(children)) for children in options)
    return tuple(found)


def enumerate_shapes(l: int, allowed_vertex_arities) -> List[Tree]:
    """All canonical reduced trees with leaves 1..l whose vertex arities lie in the allowed set.

    Ordered by number of vertices, then by serialization.

    """

    if l < 2:
        raise InputError(f"Tree shapes are enumerated from arity 2 on, got {l}")
    allowed = tuple(sorted(set(allowed_vertex_arities)))
    if any(r < 2 for r in allowed):
        raise InputError(f"Vertex arities must be at least 2, got {allowed}")
    shapes = _shapes_on(tuple(range(1, l + 1)), allowed)
    return sorted(shapes, key=lambda t: (len(vertices(t)), serialize(t)))


############
# GRAFTING #
############
def graft(outer: Tree, slot: int, inner: Tree) -> Tuple[Tree, Dict[Tuple[str, int], int]]:
    """Plugs `inner` into leaf `slot` of `outer`.

    Args:
        - outer: tree of arity m.
        - slot: the leaf label i of outer receiving inner, 1 <= i <= m.
        - inner: tree of arity n.

    Returns:
        - result: tree of arity m + n - 1. Inner leaves become i..i+n-1, outer leaves after i move up by n-1.
        - leaf_relabeling: ("outer", j) and ("inner", k) mapped to their new labels.

    """

    m = arity(outer)
    n = arity(inner)
    if not 1 <= slot <= m:
        raise WindowError(f"Slot {slot} out of range for a tree of arity {m}")

    mapping: Dict[Tuple[str, int], int] = {}
    for j in range(1, m + 1):
        if j != slot:
            mapping[("outer", j)] = j if j < slot else j + n - 1
    for k in range(1, n + 1):
        mapping[("inner", k)] = k + slot - 1

    shifted_inner = relabel(inner, lambda k: k + slot - 1)

    def walk(node: Tree) -> Tree:
        if is_leaf(node):
            return shifted_inner if node == slot else mapping[("outer", node)]  # type: ignore[index]
        return Vertex(tuple(walk(c) for c in node.children), node.decoration)  # type: ignore[union-attr]

    return walk(outer), mapping


def substitute_vertex(t: Tree, position: int, replacement: Tree, children: Sequence[Tree]) -> Tree:
    """Replaces the vertex at pre-order `position` by `replacement`, whose leaf p receives children[p-1]."""

    counter = [0]

    def fill(node: Tree) -> Tree:
        if is_leaf(node):
            return children[node - 1]  # type: ignore[operator]
        return Vertex(tuple(fill(c) for c in node.children), node.decoration)  # type: ignore[union-attr]

    def walk(node: Tree) -> Tree:
        if is_leaf(node):
            return node
        here = counter[0]
        counter[0] += 1
        if here == position:
            # Vertices below are consumed by the walk so that pre-order numbering stays aligned.
            for c in node.children:  # type: ignore[union-attr]
                counter[0] += len(vertices(c))
            return fill(replacement)
        return Vertex(tuple(walk(c) for c in node.children), node.decoration)  # type: ignore[union-attr]

    return walk(t)


#################
# SERIALIZATION #
#################
def default_decoration_name(decoration: Hashable) -> str:
    if isinstance(decoration, tuple) and len(decoration) == 2:
        return f"e{decoration[0]}_{decoration[1]}"
    return str(decoration)


def serialize(t: Any, name: Callable[[Hashable], str] = default_decoration_name) -> str:
    """Nested-parenthesis form, e.g. "(1,(2,3))" or, with decorations, "e3_0(1,e2_1(2,3))"."""

    if t == CORK:
        return CORK
    if is_leaf(t):
        return str(t)
    inner = ",".join(serialize(c, name) for c in t.children)
    prefix = name(t.decoration) if t.decoration is not None else ""
    return f"{prefix}({inner})"


TREE_GRAMMAR = r"""
    start: tree | CORK
    ?tree: leaf | vertex
    vertex: [DECORATION] "(" tree ("," tree)+ ")"
    leaf: INT
    DECORATION: /e[0-9]+_[0-9]+/
    CORK: "cork"
    %import common.INT
    %import common.WS
    %ignore WS
"""


class _TreeBuilder(Transformer):
    def start(self, items):
        item = items[0]
        return CORK if str(item) == CORK else item

    def leaf(self, items):
        return int(items[0])

    def vertex(self, items):
        label, *children = items
        decoration = None
        if label is not None:
            a, k = str(label)[1:].split("_")
            decoration = (int(a), int(k))
        return Vertex(tuple(children), decoration)


_PARSER = Lark(TREE_GRAMMAR, parser="lalr", maybe_placeholders=True)


def parse_tree(text: str) -> Tree:
    """Reads a serialization produced by `serialize`."""

    try:
        tree = _TreeBuilder().transform(_PARSER.parse(text))
    except (LarkError, ValidationError) as e:
        raise InputError(f"Cannot read tree {text!r}: {e}") from e
    if tree != CORK:
        problems = check_tree(tree)
        if problems:
            raise InputError(f"Tree {text!r} is not a reduced labeled tree: {problems[0]}")
    return tree
