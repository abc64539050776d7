import logging
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple, Union

from tqdm import tqdm

from scripts.kan import ConeHost, OperadHost, fill_equivariant
from utils.classes import (
    DimensionTable,
    Element,
    GeneratorKey,
    HypothesisError,
    InputError,
    ModelReport,
    Permutation,
    Report,
    StageRecord,
    VerificationError,
    WindowError,
    fraction_to_str,
)
from utils.operad_core import (
    FreeMorphism,
    FreeOperad,
    GeneratorSpace,
    MatrixMorphism,
    OperadBase,
    check_unitary_multiplication,
    combine,
    empty_free_operad,
    principal_extend,
    subtract,
)
from utils.qlinalg import GroupAction, QMatrix, average, linear_section, solve_many
from utils.sigma_lambda import (
    ArityCohomology,
    ConeComplex,
    DgSigmaModule,
    ModuleMorphism,
    arity_cohomology,
    cone,
    relative_cohomology,
)
from utils.trees import Vertex, corolla, is_leaf, serialize

LOGGER = logging.getLogger(__name__)

Morphism = Union[FreeMorphism, MatrixMorphism]

FLAVORS = {"non-unitary": False, "unitary": True}


#########
# TYPES #
#########
@dataclass
class Stage:
    """One principal extension of the tower: the generators E(n) and their data."""

    arity: int
    space: GeneratorSpace
    images: List[Element]
    quis: Report
    seconds: float
    source_basis_size: int
    target_basis_size: int

    @property
    def dimensions(self) -> Dict[int, int]:
        dims: Dict[int, int] = {}
        for d in self.space.degrees:
            dims[d] = dims.get(d, 0) + 1
        return dims


@dataclass
class MinimalModelResult:
    """The tower P_1 ⊂ P_2 ⊂ ... ⊂ P_N = P∞ together with ρ: P∞ → P."""

    target: OperadBase
    flavor: str
    max_arity: int
    strategy: str
    stages: Dict[int, Stage]
    operad: FreeOperad
    morphism: FreeMorphism
    multiplication: Optional[Element] = None
    hypotheses: DimensionTable = field(default_factory=dict)
    seconds: float = 0.0

    @property
    def unitary(self) -> bool:
        return FLAVORS[self.flavor]

    def dimension_table(self) -> DimensionTable:
        """dim E(n)^d for every arity 2..N (empty dict where E(n) = 0)."""

        return {n: self.stages[n].dimensions if n in self.stages else {} for n in range(2, self.max_arity + 1)}

    def record(self, strict_units: Optional[bool] = None) -> ModelReport:
        stages: List[StageRecord] = [
            {
                "arity": n,
                "generators": {int(d): c for d, c in stage.dimensions.items()},
                "source_basis_size": stage.source_basis_size,
                "target_basis_size": stage.target_basis_size,
                "quis": stage.quis.ok,
                "seconds": round(stage.seconds, 3),
            }
            for n, stage in sorted(self.stages.items())
        ]
        return {
            "name": self.target.name,
            "flavor": self.flavor,
            "max_arity": self.max_arity,
            "section_strategy": self.strategy,
            "dimension_table": {
                str(n): {str(d): c for d, c in sorted(dims.items())} for n, dims in self.dimension_table().items()
            },
            "stages": stages,
            "strict_units": strict_units,
            "seconds": round(self.seconds, 3),
        }


###########
# HELPERS #
###########
def _single_arity_cone(rho: Morphism, n: int) -> ConeComplex:
    src = DgSigmaModule(n, {n: rho.source.arity_data(n)})
    tgt = DgSigmaModule(n, {n: rho.target.arity_data(n)})
    return cone(ModuleMorphism(src, tgt, {n: rho.component(n)}, check=False), [n])


def cohomology_table(p: OperadBase, up_to: int, start: int = 0) -> Tuple[DimensionTable, Dict[int, ArityCohomology]]:
    table: DimensionTable = {}
    parts: Dict[int, ArityCohomology] = {}
    for n in range(start, up_to + 1):
        module = DgSigmaModule(n, {n: p.arity_data(n)})
        parts[n] = arity_cohomology(module, n)
        table[n] = {d: parts[n].h_dim(d) for d in parts[n].per_degree if parts[n].h_dim(d)}
    return table, parts


def check_hypotheses(p: OperadBase, unitary: bool) -> DimensionTable:
    """Cohomological connectivity: HP(1) = k spanned by [id], HP(0) = 0 or k; unitary multiplication.

    Raises:
        - HypothesisError naming the failing arity, with the cohomology table of arities 0 and 1.

    """

    table, parts = cohomology_table(p, 1)
    h1 = parts[1]
    if table[1] != {0: 1}:
        raise HypothesisError(f"HP(1) must be the ground field in degree 0, found dimensions {table[1]}", table)
    id_class = h1.project(QMatrix.from_columns([p.to_vector(p.unit(), 1)], p.dim(1)))
    if id_class.is_zero():
        raise HypothesisError("HP(1) is not spanned by the class of the identity", table)
    if unitary:
        if not p.unitary or table[0] != {0: 1}:
            raise HypothesisError(f"The unitary flavor needs HP(0) = k in degree 0, found {table[0]}", table)
        report = check_unitary_multiplication(p)
        if not report.ok:
            raise HypothesisError("No unitary multiplication: " + "; ".join(map(str, report.violations)), table)
    elif table[0]:
        raise HypothesisError(f"The non-unitary flavor needs HP(0) = 0, found {table[0]}", table)
    return table


def _section(rel_h: ArityCohomology, cone_dim: int, strategy: str) -> QMatrix:
    """Cocycle representatives of H, one column per class, through a linear section of Z → H."""

    columns: List[Dict[int, Fraction]] = []
    for d in sorted(rel_h.per_degree):
        data = rel_h.per_degree[d]
        if not data.h_dim:
            continue
        idx = rel_h._ambient_indices[d]
        z = data.cocycles.as_columns()
        s = linear_section(data.project(z), strategy)
        block = z @ s
        for k in range(block.cols):
            columns.append({idx[i]: v for i, v in block.column(k).items()})
    return QMatrix.from_columns(columns, cone_dim)


def _column_elements(p: OperadBase, matrix: QMatrix, n: int) -> List[Element]:
    return [p.from_vector(matrix.column(k), n) for k in range(matrix.cols)]


def _elements_matrix(p: OperadBase, elements: Sequence[Element], n: int) -> QMatrix:
    return QMatrix.from_columns([p.to_vector(e, n) for e in elements], p.dim(n))


def _average_elements(p: OperadBase, elements: Sequence[Element], n: int, action: GroupAction) -> List[Element]:
    raw = _elements_matrix(p, elements, n)
    return _column_elements(p, average(action, p.arity_data(n).group_action, raw), n)


##################
# MINIMAL MODELS #
##################
def minimal_model(
    p: OperadBase,
    max_arity: int,
    flavor: str = "non-unitary",
    strategy: str = "first-pivot",
    progress: bool = False,
) -> MinimalModelResult:
    """Sullivan minimal model P∞ → P built arity by arity.

    Args:
        - p: the operad to model; cohomologically connected.
        - max_arity: the arity N where the tower stops.
        - flavor:
            - non-unitary: P∞ = Γ₀₁(E),
            - unitary: P∞ = Γ₊₁(E) with δ-values, p must carry a unitary multiplication.
        - strategy: "first-pivot" or "last-pivot" choice of cocycle representatives.
        - progress: show a progress bar over the stages.

    Returns:
        - MinimalModelResult with ρ a quasi-isomorphism in every arity <= N.

    """

    if flavor not in FLAVORS:
        raise InputError(f"Unknown flavor {flavor!r}; use one of {', '.join(FLAVORS)}")
    if max_arity > p.max_arity:
        raise WindowError(f"{p.name} is only known up to arity {p.max_arity}, asked for {max_arity}")
    unitary = FLAVORS[flavor]
    start = time.time()
    hypotheses = check_hypotheses(p, unitary)

    free = empty_free_operad(max_arity, "+1" if unitary else "01", name=f"{p.name}_inf")
    images: Dict[GeneratorKey, Element] = {}
    rho = FreeMorphism(free, p, images)
    stages: Dict[int, Stage] = {}
    m_tilde: Optional[Element] = None

    for n in tqdm(range(2, max_arity + 1), desc=f"{p.name} stages", disable=not progress):
        t0 = time.time()
        c = _single_arity_cone(rho, n)
        rel = relative_cohomology(c, n, strategy)
        h = rel.h
        actions = h.induced_actions(c.module)
        h_action = GroupAction(n, h.dim, actions)
        cone_dim = c.module.dim(n)
        section = average(h_action, c.module.group_action(n), _section(h, cone_dim, strategy))

        pairs: List[Tuple[Element, Element]] = []
        for k in range(h.dim):
            src, tgt = c.split(n, section.column(k))
            pairs.append((free.from_vector(src, n), p.from_vector(tgt, n)))

        deltas = None
        if unitary and h.dim:
            if n == 2:
                pairs, deltas = _rectify_arity_two(p, pairs, h_action)
            else:
                pairs, deltas = _rectify_higher(free, p, rho, m_tilde, pairs, n, h_action)
        elif unitary:
            deltas = ()

        space = GeneratorSpace(n, h.degrees, tuple(actions), tuple(q for q, _ in pairs), deltas)
        free = principal_extend(free, space)
        images = dict(images)
        images.update({(n, k): pairs[k][1] for k in range(h.dim)})
        rho = FreeMorphism(free, p, images)

        if unitary and n == 2:
            m_tilde = _lift_multiplication(p, c, h, free)
            free.multiplication = m_tilde

        report = verify_quis(rho, n, arities=[n])
        if not report.ok:
            raise VerificationError(f"ρ is not a quasi-isomorphism in arity {n}:\n{report.summary()}")
        stages[n] = Stage(n, space, [pairs[k][1] for k in range(h.dim)], report, time.time() - t0, cone_dim - p.dim(n), p.dim(n))
        LOGGER.info("stage %d: E(%d) dimensions %s (%.2fs)", n, n, stages[n].dimensions, stages[n].seconds)

    check = rho.check()
    if not check.ok:
        raise VerificationError(f"ρ is not a morphism of operads:\n{check.summary()}")
    return MinimalModelResult(
        p, flavor, max_arity, strategy, stages, free, rho, m_tilde, hypotheses, time.time() - start
    )


def _unit_coefficients(p: OperadBase, elements: Sequence[Element]) -> List[Tuple[Fraction, ...]]:
    """(c_1, c_2) per arity-2 cocycle x, with [δ_i x] = c_i [id] in HP(1)."""

    _, parts = cohomology_table(p, 1, start=1)
    h1 = parts[1]
    unit_class = h1.project(QMatrix.from_columns([p.to_vector(p.unit(), 1)], p.dim(1))).column(0)[0]
    out = []
    for element in elements:
        faces = [p.to_vector(p.restriction(element, i), 1) for i in (1, 2)]
        classes = h1.project(QMatrix.from_columns(faces, p.dim(1)))
        out.append(tuple(classes.column(j).get(0, Fraction(0)) / unit_class for j in range(2)))
    return out


def _rectify_arity_two(p: OperadBase, pairs, h_action: GroupAction):
    """Makes δ_i f(e) = c_i(e)·id exactly, c_i the map induced by δ_i on HP(2) → HP(1)."""

    host = OperadHost(p)
    coefficients = _unit_coefficients(p, [r for _, r in pairs])
    family = [
        [subtract(p.restriction(r, i), {x: c * coefficients[k][i - 1] for x, c in p.unit().items()}) for i in (1, 2)]
        for k, (_, r) in enumerate(pairs)
    ]
    correction = fill_equivariant(host, 2, family, h_action)
    fixed = [(q, subtract(r, correction[k])) for k, (q, r) in enumerate(pairs)]
    deltas = tuple(tuple({1: c} if c else {} for c in coefficients[k]) for k in range(len(pairs)))
    for k, (_, r) in enumerate(fixed):
        for i in (1, 2):
            if p.restriction(r, i) != combine((p.unit(), coefficients[k][i - 1])):
                raise VerificationError(f"Arity-2 section still fails δ_{i} on generator {k}")
    return fixed, deltas


def _rectify_higher(free: FreeOperad, p: OperadBase, rho: FreeMorphism, m_tilde: Element, pairs, n: int, h_action: GroupAction):
    """Subtracts an equivariant cone coboundary so that every face of the section vanishes."""

    if m_tilde is None:
        raise VerificationError("Unitary stages above arity 2 need the lifted multiplication")
    host = ConeHost(OperadHost(free, m_tilde), OperadHost(p, rho(m_tilde)))
    family = [[host.face(pair, i) for i in range(1, n + 1)] for pair in pairs]
    correction = fill_equivariant(host, n, family, h_action)
    fixed = [host.add(pair, correction[k], -1) for k, pair in enumerate(pairs)]
    for k, pair in enumerate(fixed):
        for i in range(1, n + 1):
            if not host.is_zero(host.face(pair, i)):
                raise VerificationError(f"Section of arity {n} keeps a nonzero face δ_{i} on generator {k}")
    deltas = tuple(tuple({} for _ in range(n)) for _ in pairs)
    return fixed, deltas


def _lift_multiplication(p: OperadBase, c: ConeComplex, h: ArityCohomology, free: FreeOperad) -> Element:
    """m̃ ∈ E(2): the generator combination whose class is [m₂]."""

    column = QMatrix.from_columns([c.join(2, {}, p.to_vector(p.multiplication, 2))], c.module.dim(2))
    coords = h.project(column).column(0)
    return {corolla(2, (2, k)): v for k, v in coords.items()}


######################
# QUASI-ISOMORPHISMS #
######################
def verify_quis(rho: Morphism, up_to: int, arities: Optional[Sequence[int]] = None) -> Report:
    """Relative cohomology of ρ per arity and degree; passes when all of it vanishes.

    Args:
        - rho: a FreeMorphism or MatrixMorphism.
        - up_to: highest arity checked.
        - arities: explicit arities to check instead of 0..up_to.

    Returns:
        - Report; details["cone"] holds the nonzero dimensions found.

    """

    report = Report("quasi-isomorphism")
    found: Dict[int, Dict[int, int]] = {}
    for n in (arities if arities is not None else range(up_to + 1)):
        c = _single_arity_cone(rho, n)
        h = arity_cohomology(c.module, n)
        dims = {d: h.h_dim(d) for d in h.per_degree if h.h_dim(d)}
        if dims:
            found[n] = dims
            for d, k in sorted(dims.items()):
                report.add("quis", n, d, f"relative cohomology of dimension {k}")
    report.details["cone"] = found
    return report


###########
# LIFTING #
###########
def _new_keys(base: FreeOperad, extension: FreeOperad) -> List[GeneratorKey]:
    old = set(base.generator_keys())
    return [k for k in extension.generator_keys() if k not in old]


def _sub_action(space: GeneratorSpace, indices: Sequence[int]) -> GroupAction:
    return GroupAction(space.arity, len(indices), [a.submatrix(indices, indices) for a in space.actions])


def lift_through_extension(
    phi: FreeMorphism,
    extension: FreeOperad,
    psi: Morphism,
    rho: Morphism,
    multiplication: Optional[Element] = None,
) -> FreeMorphism:
    """ψ': P ⊔ Γ(E) → Q with ψ' = φ on P and ρψ' = ψ, for ρ: Q → R a surjective quasi-isomorphism.

    For each new generator e the cone cocycle (φ(de), ψ(e)) of ρ is written as -D(a, b); then ρc = b
    and f(e) = a - ∂c. The unitary flavor then removes the defect δ_i f(e) - φ(δ_i e), which lies in
    ZQ ∩ ker ρ, with an equivariant Kan filler.

    """

    base, q_operad = phi.source, phi.target
    keys = _new_keys(base, extension)
    if not keys:
        return FreeMorphism(extension, q_operad, dict(phi.images))
    arities = {k[0] for k in keys}
    if len(arities) != 1:
        raise InputError(f"Lifting handles one arity of new generators at a time, got {sorted(arities)}")
    n = arities.pop()
    for key in base.generator_keys():
        if rho(phi.images[key]) != psi({base.corolla_of(key): Fraction(1)}):
            raise InputError(f"The square does not commute on generator {base.generator_name(key)}")
    if rho.component(n).rank() != rho.target.dim(n):
        raise InputError(f"ρ is not surjective in arity {n}")

    c = _single_arity_cone(rho, n)
    module = c.module
    data = module.arity(n)
    raw: List[Element] = []
    for key in keys:
        d = extension.generator_degree(key)
        q = phi(extension.d_value(key))
        r = psi({extension.corolla_of(key): Fraction(1)})
        v = c.join(n, q_operad.to_vector(q, n), rho.target.to_vector(r, n))
        rows, cols = data.indices(d), data.indices(d - 1)
        block = module.differential_block(n, d - 1)
        rhs = QMatrix.from_columns([{rows.index(i): -x for i, x in v.items()}], len(rows))
        z = solve_many(block, rhs) if cols else None
        if z is None:
            if not v:
                raw.append({})
                continue
            raise VerificationError(f"ρ is not a quasi-isomorphism in arity {n}: no primitive for generator {key}")
        whole = {cols[i]: x for i, x in z.column(0).items()}
        a_vec, b_vec = c.split(n, whole)
        a = q_operad.from_vector(a_vec, n)
        solution = solve_many(rho.component(n), QMatrix.from_columns([b_vec], rho.target.dim(n)))
        if solution is None:
            raise InputError(f"ρ is not surjective in arity {n}")
        c_elem = q_operad.from_vector(solution.column(0), n)
        raw.append(subtract(a, q_operad.differential(c_elem)))

    space = extension.generators[n]
    indices = [k for (_, k) in keys]
    action = _sub_action(space, indices)
    images = _average_elements(q_operad, raw, n, action)

    if extension.unitary:
        host = OperadHost(q_operad, multiplication)
        family = [
            [subtract(q_operad.restriction(images[j], i), phi(extension.delta_value(key, i))) for i in range(1, n + 1)]
            for j, key in enumerate(keys)
        ]
        correction = fill_equivariant(host, n, family, action)
        images = [subtract(x, w) for x, w in zip(images, correction)]

    result = dict(phi.images)
    result.update(dict(zip(keys, images)))
    lifted = FreeMorphism(extension, q_operad, result)
    for key, x in zip(keys, images):
        if q_operad.differential(x) != phi(extension.d_value(key)):
            raise VerificationError(f"Lift of {extension.generator_name(key)} is not compatible with d")
        if rho(x) != psi({extension.corolla_of(key): Fraction(1)}):
            raise VerificationError(f"Lift of {extension.generator_name(key)} does not cover ψ")
    return lifted


def construct_section(
    rho: Morphism,
    multiplication: Optional[Element] = None,
    check_quis: bool = True,
) -> FreeMorphism:
    """σ: P∞ → Q with ρσ = id for a quasi-isomorphism ρ: Q → P∞ onto a minimal operad.

    Generators are handled by increasing arity: f(e) solves ∂f(e) = σ(de) and ρf(e) = e at once,
    is averaged over Σ_n, and in the unitary flavor corrected by a filler of δ_i f(e) - σ(δ_i e).

    """

    q_operad = rho.source
    model = rho.target
    if not isinstance(model, FreeOperad):
        raise InputError("The target of ρ must be a minimal free operad")
    if check_quis:
        report = verify_quis(rho, model.max_arity)
        if not report.ok:
            raise InputError(f"ρ is not a quasi-isomorphism:\n{report.summary()}")
    images: Dict[GeneratorKey, Element] = {}
    for n in sorted(model.generators):
        lower = FreeOperad({r: s for r, s in model.generators.items() if r < n}, model.max_arity, model.flavor)
        sigma = FreeMorphism(lower, q_operad, images)
        keys = model.generator_keys(n)
        q_data = q_operad.arity_data(n)
        raw: List[Element] = []
        for key in keys:
            d = model.generator_degree(key)
            src_idx = q_data.indices(d)
            up_idx = q_data.indices(d + 1)
            target_idx = model.arity_data(n).indices(d)
            stacked = q_data.differential.submatrix(up_idx, src_idx).vstack(
                rho.component(n).submatrix(target_idx, src_idx)
            )
            de = q_operad.to_vector(sigma(model.d_value(key)), n)
            e = model.to_vector({model.corolla_of(key): Fraction(1)}, n)
            rhs = {up_idx.index(i): v for i, v in de.items()}
            rhs.update({len(up_idx) + target_idx.index(i): v for i, v in e.items()})
            solution = solve_many(stacked, QMatrix.from_columns([rhs], stacked.rows)) if src_idx else None
            if solution is None:
                raise VerificationError(f"No preimage for generator {model.generator_name(key)}")
            raw.append(q_operad.from_vector({src_idx[i]: v for i, v in solution.column(0).items()}, n))
        action = model.generators[n].group_action
        new = _average_elements(q_operad, raw, n, action)

        if model.unitary:
            host = OperadHost(q_operad, multiplication)
            family = [
                [subtract(q_operad.restriction(new[j], i), sigma(model.delta_value(key, i))) for i in range(1, n + 1)]
                for j, key in enumerate(keys)
            ]
            correction = fill_equivariant(host, n, family, action)
            new = [subtract(x, w) for x, w in zip(new, correction)]

        for key, x in zip(keys, new):
            if q_operad.differential(x) != sigma(model.d_value(key)):
                raise VerificationError(f"σ fails ∂σ(e) = σ(de) on {model.generator_name(key)}")
            images[key] = x

    section = FreeMorphism(model, q_operad, images)
    for key in model.generator_keys():
        if rho(images[key]) != {model.corolla_of(key): Fraction(1)}:
            raise VerificationError(f"ρσ ≠ id on generator {model.generator_name(key)}")
    return section


###############
# COMPARISONS #
###############
def compare_models(a: MinimalModelResult, b: MinimalModelResult) -> Report:
    """Generator dimension tables side by side; passes when they coincide."""

    report = Report("model comparison")
    ta, tb = a.dimension_table(), b.dimension_table()
    report.details["tables"] = (ta, tb)
    for n in sorted(set(ta) | set(tb)):
        da, db = ta.get(n, {}), tb.get(n, {})
        for d in sorted(set(da) | set(db)):
            if da.get(d, 0) != db.get(d, 0):
                report.add("dimension", n, d, f"{da.get(d, 0)} ≠ {db.get(d, 0)}")
    return report


def unitary_compatibility_check(model: MinimalModelResult, model_plus: MinimalModelResult) -> Report:
    """(P₊)∞ against (P∞)₊: same generators, restriction data, and structure as graded operads."""

    report = Report("unitary compatibility")
    p, p_plus = model.target, model_plus.target
    if model.unitary or not model_plus.unitary:
        report.add("precondition", 0, detail="expects a non-unitary model and a unitary model")
        return report
    top = min(model.max_arity, model_plus.max_arity)
    for n in range(1, top + 1):
        if p.basis(n) != p_plus.basis(n):
            report.add("precondition", n, detail=f"{p.name}({n}) and {p_plus.name}({n}) differ")
            return report
    report.extend(compare_models(model, model_plus))

    # Generator modules must agree as Σ-modules: same character in every degree
    for n in range(2, top + 1):
        a, b = model.operad.generators.get(n), model_plus.operad.generators.get(n)
        if (a is None) != (b is None):
            report.add("generators", n, detail="generator space missing on one side")
            continue
        if a is not None and _characters(a) != _characters(b):
            report.add("generator-action", n, detail="Σ_n characters of E(n) differ")

    # Restriction data: induced from HP(2) → HP(1) in arity 2, zero above
    plus = model_plus.operad
    binary = plus.generator_keys(2)
    induced = dict(zip(binary, _unit_coefficients(p_plus, [model_plus.morphism.images[k] for k in binary])))
    for key in plus.generator_keys():
        n = key[0]
        for i in range(1, n + 1):
            value = plus.delta_value(key, i)
            if n == 2:
                expected = induced[key][i - 1]
                if value != ({1: expected} if expected else {}):
                    report.add("restriction-data", n, plus.generator_degree(key), f"δ_{i} of {plus.generator_name(key)}")
            elif value:
                report.add("restriction-data", n, plus.generator_degree(key), f"δ_{i} of {plus.generator_name(key)} ≠ 0")

    if not report.ok:
        return report

    # (P∞)₊: the plain generators with the restriction data above must give the operad of (P₊)∞
    plain = model.operad
    for key in plain.generator_keys():
        if key[0] <= top and plain.d_value(key) != plus.d_value(key):
            report.add("d-value", key[0], plain.generator_degree(key), f"d{plain.generator_name(key)} differs")
    rebuilt = _unitary_rebuild(plain, plus, top)
    for n in range(1, top + 1):
        a, b = rebuilt.arity_data(n), plus.arity_data(n)
        if a.labels != b.labels:
            report.add("basis", n, detail=f"Γ(E)({n}) has different trees in the two flavors")
            continue
        if a.differential != b.differential:
            report.add("differential", n, detail=f"∂ on Γ(E)({n}) differs")
        if a.actions != b.actions:
            report.add("action", n, detail=f"Σ_{n} acts differently on Γ(E)({n})")
        if rebuilt.restriction_matrices(n) != plus.restriction_matrices(n):
            report.add("restriction", n, detail=f"restrictions out of Γ(E)({n}) differ")
    return report


def _unitary_rebuild(plain: FreeOperad, plus: FreeOperad, top: int) -> FreeOperad:
    """Γ₊₁ on the generators of a non-unitary model, restricted like the arity-2 generators of plus."""

    spaces: Dict[int, GeneratorSpace] = {}
    for n, space in plain.generators.items():
        if n > top:
            continue
        if n == 2:
            deltas = plus.generators[2].delta_values
        else:
            deltas = tuple(tuple({} for _ in range(n)) for _ in range(space.dim))
        spaces[n] = GeneratorSpace(n, space.degrees, space.actions, space.d_values, deltas, space.names)
    return FreeOperad(spaces, top, "+1", name=f"{plain.name}_plus", multiplication=plus.multiplication)


def _characters(space: GeneratorSpace) -> Dict[int, Dict[Permutation, Fraction]]:
    characters: Dict[int, Dict[Permutation, Fraction]] = {}
    for d in sorted(set(space.degrees)):
        idx = [k for k, x in enumerate(space.degrees) if x == d]
        characters[d] = {
            p: sum((m.column(k).get(k, Fraction(0)) for k in idx), Fraction(0))
            for p, m in space.group_action.all_matrices().items()
        }
    return characters


def _describe(x: Element) -> str:
    if not x:
        return "0"
    return " + ".join(f"{fraction_to_str(c)}*{serialize(label)}" for label, c in sorted(x.items(), key=lambda t: str(t[0])))


def strict_unit_report(model: MinimalModelResult) -> Report:
    """δ_i m̃ = id for the lift of [m₂], δ_i(corolla e) = 0 for every generator of arity > 2."""

    report = Report("strict units")
    if not model.unitary:
        report.add("flavor", 0, detail="strict units are a property of unitary models")
        return report
    free = model.operad
    values: Dict[str, List[str]] = {}
    if model.multiplication:
        for i in (1, 2):
            if free.restriction(model.multiplication, i) != free.unit():
                report.add("unit", 2, 0, f"δ_{i} m̃ ≠ id")
    for key in free.generator_keys():
        n = key[0]
        e = {free.corolla_of(key): Fraction(1)}
        images = [free.restriction(e, i) for i in range(1, n + 1)]
        values[free.generator_name(key)] = [_describe(x) for x in images]
        if n > 2 and any(images):
            report.add("unit", n, free.generator_degree(key), f"{free.generator_name(key)} ∘_i 1 ≠ 0")
    report.details["restrictions"] = values
    return report


def decomposability_report(model: MinimalModelResult) -> Report:
    """∂ of every generator has no corolla term; details count the tree monomials of ∂e."""

    report = Report("decomposability")
    free = model.operad
    counts: Dict[str, int] = {}
    for key in free.generator_keys():
        d = free.d_value(key)
        counts[free.generator_name(key)] = len(d)
        linear = [x for x in d if isinstance(x, Vertex) and all(is_leaf(c) for c in x.children)]
        if linear:
            report.add("linear-term", key[0], free.generator_degree(key), f"d{free.generator_name(key)} has a corolla term")
    report.details["monomials"] = counts
    return report
