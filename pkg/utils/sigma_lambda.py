import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

from utils.classes import InputError, LinearAlgebraError, Report, ValidationError
from utils.qlinalg import CohomologyData, GroupAction, QMatrix, cohomology
from utils.symmetric import adjacent, delete_strand

LOGGER = logging.getLogger(__name__)


###############
# ARITY SLICE #
###############
@dataclass(frozen=True, eq=False)
class ArityData:
    """Everything a dg Σ-module holds in one arity.

    Args:
        - labels: basis labels (tree monomials, permutation words, ...), one per basis vector.
        - degrees: degree of each basis vector.
        - actions: matrices of the adjacent transpositions s_1..s_{n-1} acting on the right.
        - differential: matrix of ∂ on the whole arity, raising degree by one.

    """

    n: int
    labels: Tuple[Hashable, ...]
    degrees: Tuple[int, ...]
    actions: Tuple[QMatrix, ...]
    differential: QMatrix

    def __post_init__(self):
        dim = len(self.labels)
        if len(self.degrees) != dim:
            raise InputError(f"Arity {self.n}: {dim} labels but {len(self.degrees)} degrees")
        if len(self.actions) != max(self.n - 1, 0):
            raise InputError(f"Arity {self.n}: expected {max(self.n - 1, 0)} action matrices")
        for a in self.actions:
            if a.shape != (dim, dim):
                raise InputError(f"Arity {self.n}: action matrix of shape {a.shape}, expected {dim}x{dim}")
        if self.differential.shape != (dim, dim):
            raise InputError(f"Arity {self.n}: differential of shape {self.differential.shape}")

    @property
    def dim(self) -> int:
        return len(self.labels)

    @cached_property
    def degree_list(self) -> List[int]:
        return sorted(set(self.degrees))

    @cached_property
    def _indices(self) -> Dict[int, List[int]]:
        table: Dict[int, List[int]] = {}
        for k, d in enumerate(self.degrees):
            table.setdefault(d, []).append(k)
        return table

    def indices(self, d: int) -> List[int]:
        return self._indices.get(d, [])

    @cached_property
    def position(self) -> Dict[Hashable, int]:
        return {label: k for k, label in enumerate(self.labels)}

    @cached_property
    def group_action(self) -> GroupAction:
        return GroupAction(self.n, self.dim, self.actions)

    @classmethod
    def empty(cls, n: int) -> "ArityData":
        return cls(n, (), (), tuple(QMatrix.zeros(0, 0) for _ in range(max(n - 1, 0))), QMatrix.zeros(0, 0))


################
# DG Σ-MODULES #
################
@dataclass(frozen=True, eq=False)
class DgSigmaModule:
    """A dg Σ-module bounded in arity, finite-dimensional in every arity."""

    max_arity: int
    arities: Dict[int, ArityData] = field(default_factory=dict)

    def arity(self, n: int) -> ArityData:
        if n in self.arities:
            return self.arities[n]
        return ArityData.empty(n)

    def dim(self, n: int, d: Optional[int] = None) -> int:
        data = self.arity(n)
        return data.dim if d is None else len(data.indices(d))

    def window(self, n: int) -> Optional[Tuple[int, int]]:
        degrees = self.arity(n).degree_list
        return (degrees[0], degrees[-1]) if degrees else None

    def differential_block(self, n: int, d: int) -> QMatrix:
        """∂ restricted to degree d of arity n, landing in degree d + 1."""

        data = self.arity(n)
        return data.differential.submatrix(data.indices(d + 1), data.indices(d))

    def action_block(self, n: int, d: int, k: int) -> QMatrix:
        data = self.arity(n)
        idx = data.indices(d)
        return data.actions[k - 1].submatrix(idx, idx)

    def group_action(self, n: int) -> GroupAction:
        return self.arity(n).group_action

    def dimension_table(self) -> Dict[int, Dict[int, int]]:
        return {
            n: {d: self.dim(n, d) for d in self.arity(n).degree_list}
            for n in range(self.max_arity + 1)
        }


@dataclass(frozen=True, eq=False)
class DgLambdaModule(DgSigmaModule):
    """A dg Σ-module with restriction operations δ_i: M(n) → M(n-1), i = 1..n.

    restrictions[n][i - 1] is the whole-arity matrix of δ_i, dim M(n-1) × dim M(n).

    """

    restrictions: Dict[int, Tuple[QMatrix, ...]] = field(default_factory=dict)

    def restriction(self, n: int, i: int) -> QMatrix:
        if n in self.restrictions:
            return self.restrictions[n][i - 1]
        return QMatrix.zeros(self.dim(n - 1), self.dim(n))

    def restriction_block(self, n: int, i: int, d: int) -> QMatrix:
        return self.restriction(n, i).submatrix(self.arity(n - 1).indices(d), self.arity(n).indices(d))


#############
# VALIDATOR #
#############
def _check_homogeneous(report: Report, check: str, n: int, matrix: QMatrix, src: Sequence[int], tgt: Sequence[int], shift: int):
    for (i, j), _ in matrix.items():
        if tgt[i] != src[j] + shift:
            report.add(check, n, src[j], f"entry ({i}, {j}) maps degree {src[j]} to {tgt[i]}")
            return


def validate(m: DgSigmaModule) -> Report:
    """Checks every structural invariant of a dg Σ- or Λ-module, reporting located violations.

    Args:
        - m: the module.

    Returns:
        - a Report; empty violations when the module is valid.

    """

    report = Report("dg module validation")
    for n in range(m.max_arity + 1):
        data = m.arity(n)
        degrees = list(data.degrees)
        dd = data.differential
        _check_homogeneous(report, "differential-degree", n, dd, degrees, degrees, 1)
        if not (dd @ dd).is_zero():
            bad = sorted({degrees[j] for (_, j), _ in (dd @ dd).items()})
            report.add("d-squared", n, bad[0], "∂∘∂ ≠ 0")

        # COXETER RELATIONS
        acts = data.actions
        eye = QMatrix.eye(data.dim)
        for k, a in enumerate(acts, start=1):
            _check_homogeneous(report, "action-degree", n, a, degrees, degrees, 0)
            if a @ a != eye:
                report.add("coxeter", n, detail=f"s_{k}² ≠ 1")
            if a @ dd != dd @ a:
                report.add("equivariant-differential", n, detail=f"∂ does not commute with s_{k}")
        for k in range(1, len(acts)):
            a, b = acts[k - 1], acts[k]
            if a @ b @ a != b @ a @ b:
                report.add("coxeter", n, detail=f"braid relation fails for s_{k}, s_{k + 1}")
        for k in range(1, len(acts) + 1):
            for j in range(k + 2, len(acts) + 1):
                if acts[k - 1] @ acts[j - 1] != acts[j - 1] @ acts[k - 1]:
                    report.add("coxeter", n, detail=f"s_{k} and s_{j} do not commute")

    if isinstance(m, DgLambdaModule):
        report.extend(_validate_lambda(m))
    LOGGER.debug("validate: %d violations", len(report.violations))
    return report


def _validate_lambda(m: DgLambdaModule) -> Report:
    report = Report("Λ-structure")
    for n in range(1, m.max_arity + 1):
        data = m.arity(n)
        lower = m.arity(n - 1)
        for i in range(1, n + 1):
            delta = m.restriction(n, i)
            if delta.shape != (lower.dim, data.dim):
                report.add("restriction-shape", n, detail=f"δ_{i} has shape {delta.shape}")
                return report
            _check_homogeneous(report, "restriction-degree", n, delta, list(data.degrees), list(lower.degrees), 0)
            if delta @ data.differential != lower.differential @ delta:
                report.add("restriction-differential", n, detail=f"δ_{i} does not commute with ∂")
        if n >= 2:
            lowest = m.arity(n - 2)
            for i in range(1, n + 1):
                for j in range(i + 1, n + 1):
                    lhs = m.restriction(n - 1, i) @ m.restriction(n, j)
                    rhs = m.restriction(n - 1, j - 1) @ m.restriction(n, i)
                    if lhs.shape == (lowest.dim, data.dim) and lhs != rhs:
                        report.add("restriction-relation", n, detail=f"δ_{i}δ_{j} ≠ δ_{j - 1}δ_{i}")
        # δ_i(ν·σ) = (δ_{σ(i)}ν)·(σ with strand i deleted), checked on the generators s_k
        for k in range(1, n):
            s = adjacent(n, k)
            for i in range(1, n + 1):
                lhs = m.restriction(n, i) @ data.actions[k - 1]
                rhs = lower.group_action.matrix(delete_strand(s, i)) @ m.restriction(n, s[i - 1])
                if lhs != rhs:
                    report.add("restriction-equivariance", n, detail=f"δ_{i} against s_{k}")
    return report


#############
# MORPHISMS #
#############
@dataclass(frozen=True, eq=False)
class ModuleMorphism:
    """Degree-0 map of dg Σ-modules; components[n] is the whole-arity matrix dim N(n) × dim M(n)."""

    source: DgSigmaModule
    target: DgSigmaModule
    components: Dict[int, QMatrix]
    check: bool = True

    def __post_init__(self):
        if self.check:
            report = check_morphism(self)
            if not report.ok:
                raise ValidationError("Not a morphism of dg modules", report.violations)

    def component(self, n: int) -> QMatrix:
        if n in self.components:
            return self.components[n]
        return QMatrix.zeros(self.target.dim(n), self.source.dim(n))

    @property
    def is_lambda(self) -> bool:
        return isinstance(self.source, DgLambdaModule) and isinstance(self.target, DgLambdaModule)

    @property
    def max_arity(self) -> int:
        return min(self.source.max_arity, self.target.max_arity)


def check_morphism(phi: ModuleMorphism) -> Report:
    report = Report("module morphism")
    for n in range(phi.max_arity + 1):
        src, tgt = phi.source.arity(n), phi.target.arity(n)
        f = phi.component(n)
        if f.shape != (tgt.dim, src.dim):
            report.add("morphism-shape", n, detail=f"component of shape {f.shape}")
            continue
        _check_homogeneous(report, "morphism-degree", n, f, list(src.degrees), list(tgt.degrees), 0)
        if f @ src.differential != tgt.differential @ f:
            report.add("chain-map", n, detail="φ∂ ≠ ∂φ")
        for k in range(1, n):
            if f @ src.actions[k - 1] != tgt.actions[k - 1] @ f:
                report.add("equivariance", n, detail=f"φ does not commute with s_{k}")
        if phi.is_lambda and n >= 1:
            f_lower = phi.component(n - 1)
            for i in range(1, n + 1):
                lhs = phi.target.restriction(n, i) @ f  # type: ignore[attr-defined]
                rhs = f_lower @ phi.source.restriction(n, i)  # type: ignore[attr-defined]
                if lhs != rhs:
                    report.add("restriction-compatibility", n, detail=f"φ does not commute with δ_{i}")
    return report


#########
# CONES #
#########
@dataclass(frozen=True, eq=False)
class ConeComplex:
    """The cone Cφ of φ: M → N. Degree d holds M^{d+1} ⊕ N^d; D = [[-∂_M, 0], [-φ, ∂_N]].

    In every arity the basis is the source basis (labels ("src", label)) followed by the target
    basis (labels ("tgt", label)).

    """

    phi: ModuleMorphism
    module: DgSigmaModule

    def split(self, n: int, vector: Dict[int, object]) -> Tuple[Dict[int, object], Dict[int, object]]:
        """Separates a whole-arity cone vector into its source and target parts."""

        offset = self.phi.source.dim(n)
        src = {k: v for k, v in vector.items() if k < offset}
        tgt = {k - offset: v for k, v in vector.items() if k >= offset}
        return src, tgt

    def join(self, n: int, src: Dict[int, object], tgt: Dict[int, object]) -> Dict[int, object]:
        offset = self.phi.source.dim(n)
        out = dict(src)
        out.update({k + offset: v for k, v in tgt.items()})
        return out


def _cone_arity(phi: ModuleMorphism, n: int) -> ArityData:
    src, tgt = phi.source.arity(n), phi.target.arity(n)
    a, b = src.dim, tgt.dim
    entries = {}
    for (i, j), v in src.differential.items():
        entries[(i, j)] = -v
    for (i, j), v in phi.component(n).items():
        entries[(a + i, j)] = -v
    for (i, j), v in tgt.differential.items():
        entries[(a + i, a + j)] = v
    differential = QMatrix.from_entries(entries, a + b, a + b)
    actions = tuple(QMatrix.block_diagonal([src.actions[k], tgt.actions[k]]) for k in range(max(n - 1, 0)))
    labels = tuple(("src", x) for x in src.labels) + tuple(("tgt", y) for y in tgt.labels)
    degrees = tuple(d - 1 for d in src.degrees) + tuple(tgt.degrees)
    return ArityData(n, labels, degrees, actions, differential)


def cone(phi: ModuleMorphism, arities: Optional[Sequence[int]] = None) -> ConeComplex:
    """Mapping cone of φ, built in the requested arities (all arities by default).

    Args:
        - phi: a valid morphism of dg Σ- or Λ-modules.
        - arities: optional subset of arities to materialize.

    Returns:
        - ConeComplex whose module is a dg Λ-module (block-diagonal δ_i ⊕ δ_i) when φ is a Λ-morphism.

    """

    wanted = list(range(phi.max_arity + 1)) if arities is None else list(arities)
    data = {n: _cone_arity(phi, n) for n in wanted}
    if phi.is_lambda:
        restrictions = {}
        for n in wanted:
            if n >= 1 and (n - 1) in data:
                restrictions[n] = tuple(
                    QMatrix.block_diagonal(
                        [phi.source.restriction(n, i), phi.target.restriction(n, i)]  # type: ignore[attr-defined]
                    )
                    for i in range(1, n + 1)
                )
        module: DgSigmaModule = DgLambdaModule(phi.max_arity, data, restrictions)
    else:
        module = DgSigmaModule(phi.max_arity, data)
    return ConeComplex(phi, module)


##############
# COHOMOLOGY #
##############
@dataclass(frozen=True, eq=False)
class ArityCohomology:
    """Cohomology of one arity of a dg module, all degrees at once.

    Args:
        - n: the arity.
        - per_degree: CohomologyData of every degree carrying cocycles.
        - ambient_degrees: degrees of the ambient basis.

    """

    n: int
    per_degree: Dict[int, CohomologyData]
    ambient_degrees: Tuple[int, ...]

    @cached_property
    def degrees(self) -> Tuple[int, ...]:
        return tuple(d for d in sorted(self.per_degree) for _ in range(self.per_degree[d].h_dim))

    @property
    def dim(self) -> int:
        return len(self.degrees)

    def h_dim(self, d: int) -> int:
        return self.per_degree[d].h_dim if d in self.per_degree else 0

    @cached_property
    def _ambient_indices(self) -> Dict[int, List[int]]:
        table: Dict[int, List[int]] = {}
        for k, d in enumerate(self.ambient_degrees):
            table.setdefault(d, []).append(k)
        return table

    @cached_property
    def inclusion(self) -> QMatrix:
        """Ambient dim × H dim: column k is the representative cocycle of the k-th class."""

        columns = []
        for d in sorted(self.per_degree):
            idx = self._ambient_indices.get(d, [])
            for vec in self.per_degree[d].representatives.vectors():
                columns.append({idx[i]: v for i, v in vec.items()})
        return QMatrix.from_columns(columns, len(self.ambient_degrees))

    def project(self, columns: QMatrix) -> QMatrix:
        """Classes of cocycle columns (ambient coordinates) in H coordinates."""

        entries = {}
        offset = 0
        for d in sorted(self.per_degree):
            data = self.per_degree[d]
            idx = self._ambient_indices.get(d, [])
            if data.h_dim:
                block = columns.submatrix(idx, list(range(columns.cols)))
                for (i, j), v in data.project(block).items():
                    entries[(offset + i, j)] = v
            offset += data.h_dim
        return QMatrix.from_entries(entries, self.dim, columns.cols)

    def induced(self, matrix: QMatrix, target: "ArityCohomology") -> QMatrix:
        """Map induced on cohomology by a chain map `matrix` from this arity to `target`."""

        if self.dim == 0:
            return QMatrix.zeros(target.dim, 0)
        return target.project(matrix @ self.inclusion)

    def induced_actions(self, module: DgSigmaModule) -> List[QMatrix]:
        return [self.induced(a, self) for a in module.arity(self.n).actions]


def arity_cohomology(m: DgSigmaModule, n: int, strategy: str = "first-pivot") -> ArityCohomology:
    data = m.arity(n)
    per_degree = {}
    for d in data.degree_list:
        d_in = m.differential_block(n, d - 1)
        d_out = m.differential_block(n, d)
        per_degree[d] = cohomology(d_in, d_out, strategy)
    return ArityCohomology(n, per_degree, tuple(data.degrees))


@dataclass(frozen=True, eq=False)
class RelativeCohomology:
    """H(M, N) in one arity: cohomology of the cone of φ(n), with representatives split as (q, r)."""

    cone: ConeComplex
    h: ArityCohomology

    @property
    def n(self) -> int:
        return self.h.n

    def pairs(self, d: int) -> List[Tuple[Dict[int, object], Dict[int, object]]]:
        idx = self.h._ambient_indices.get(d, [])
        out = []
        if d not in self.h.per_degree:
            return out
        for vec in self.h.per_degree[d].representatives.vectors():
            out.append(self.cone.split(self.n, {idx[i]: v for i, v in vec.items()}))
        return out

    def projection(self, d: int) -> CohomologyData:
        return self.h.per_degree[d]


def relative_cohomology(c: ConeComplex, n: int, strategy: str = "first-pivot") -> RelativeCohomology:
    """Relative cohomology H(M, N)(n) read off the cone, all degrees."""

    h = arity_cohomology(c.module, n, strategy)
    LOGGER.debug("relative cohomology arity %d: dims %s", n, {d: h.h_dim(d) for d in h.per_degree})
    return RelativeCohomology(c, h)


def cohomology_module(m: DgSigmaModule, strategy: str = "first-pivot") -> Tuple[DgSigmaModule, Dict[int, ArityCohomology]]:
    """The cohomology HM as a module with zero differential, with the induced Σ- and Λ-structure."""

    parts = {n: arity_cohomology(m, n, strategy) for n in range(m.max_arity + 1)}
    data = {}
    for n, h in parts.items():
        labels = tuple(("H", n, k) for k in range(h.dim))
        data[n] = ArityData(n, labels, h.degrees, tuple(h.induced_actions(m)), QMatrix.zeros(h.dim, h.dim))
    if isinstance(m, DgLambdaModule):
        restrictions = induced_lambda_on_H(m, parts)
        return DgLambdaModule(m.max_arity, data, restrictions), parts
    return DgSigmaModule(m.max_arity, data), parts


def induced_lambda_on_H(
    m: DgLambdaModule, parts: Optional[Dict[int, ArityCohomology]] = None, strategy: str = "first-pivot"
) -> Dict[int, Tuple[QMatrix, ...]]:
    """Restriction operations induced on cohomology, per arity n >= 1 and i = 1..n.

    Raises LinearAlgebraError when some δ_i fails to send coboundaries to coboundaries.

    """

    if parts is None:
        parts = {n: arity_cohomology(m, n, strategy) for n in range(m.max_arity + 1)}
    result: Dict[int, Tuple[QMatrix, ...]] = {}
    for n in range(1, m.max_arity + 1):
        upper, lower = parts[n], parts[n - 1]
        maps = []
        for i in range(1, n + 1):
            delta = m.restriction(n, i)
            for d, data in upper.per_degree.items():
                b = data.coboundaries
                if b.dim:
                    idx = upper._ambient_indices[d]
                    lifted = QMatrix.from_columns(
                        [{idx[k]: v for k, v in vec.items()} for vec in b.vectors()], m.dim(n)
                    )
                    image = delta @ lifted
                    if not lower.project(image).is_zero():
                        raise LinearAlgebraError(f"δ_{i} does not preserve coboundaries in arity {n}, degree {d}")
            maps.append(upper.induced(delta, lower))
        result[n] = tuple(maps)
    return result
