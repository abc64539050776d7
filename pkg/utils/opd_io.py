import json
import logging
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Hashable, List, Optional, Tuple, Union

from lark import Lark, Transformer
from lark.exceptions import LarkError

from utils.classes import (
    Element,
    InputError,
    OperadiqError,
    Report,
    ValidationError,
    fraction_to_str,
    to_fraction,
)
from utils.operad_core import (
    DgOperad,
    FreeMorphism,
    FreeOperad,
    GeneratorSpace,
    check_extension,
    check_operad_axioms,
    empty_free_operad,
    principal_extend,
    regular_representation,
    trivial_representation,
)
from utils.qlinalg import QMatrix
from utils.sigma_lambda import ArityData, DgLambdaModule, DgSigmaModule, validate
from utils.trees import CORK, parse_tree, serialize

LOGGER = logging.getLogger(__name__)

FORMAT_VERSION = 1


##########
# LABELS #
##########
def label_to_json(label: Hashable) -> Any:
    """Tuples become lists, everything else must already be a JSON scalar."""

    if isinstance(label, tuple):
        return [label_to_json(x) for x in label]
    if isinstance(label, (str, int)):
        return label
    raise InputError(f"Basis label {label!r} cannot be written to a .opd file")


def label_from_json(value: Any) -> Hashable:
    if isinstance(value, list):
        return tuple(label_from_json(x) for x in value)
    return value


def _rational(value: Any, where: str) -> Fraction:
    try:
        return to_fraction(value)
    except (ValueError, ZeroDivisionError, InputError) as e:
        raise InputError(f"{where}: {value!r} is not an exact rational") from e


############
# MATRICES #
############
def matrix_to_json(m: QMatrix) -> List[List[Any]]:
    return [[i, j, fraction_to_str(v)] for (i, j), v in sorted(m.items())]


def matrix_from_json(entries: Any, rows: int, cols: int, where: str) -> QMatrix:
    if not isinstance(entries, list):
        raise InputError(f"{where}: expected a list of [row, col, value] entries")
    out: Dict[Tuple[int, int], Fraction] = {}
    for k, entry in enumerate(entries):
        if not isinstance(entry, list) or len(entry) != 3:
            raise InputError(f"{where}[{k}]: expected [row, col, value]")
        i, j, v = entry
        if not (isinstance(i, int) and isinstance(j, int) and 0 <= i < rows and 0 <= j < cols):
            raise InputError(f"{where}[{k}]: position ({i}, {j}) outside a {rows}×{cols} matrix")
        out[(i, j)] = _rational(v, f"{where}[{k}]")
    return QMatrix.from_entries(out, rows, cols)


def _element_to_json(alpha: Element) -> List[List[Any]]:
    return [[fraction_to_str(c), label_to_json(x)] for x, c in sorted(alpha.items(), key=lambda t: repr(t[0]))]


def _element_from_json(value: Any, labels: set, where: str) -> Element:
    if value is None:
        return {}
    out: Element = {}
    for k, entry in enumerate(value):
        if not isinstance(entry, list) or len(entry) != 2:
            raise InputError(f"{where}[{k}]: expected [coefficient, label]")
        label = label_from_json(entry[1])
        if label not in labels:
            raise InputError(f"{where}[{k}]: unknown basis label {entry[1]!r}")
        out[label] = out.get(label, Fraction(0)) + _rational(entry[0], f"{where}[{k}]")
    return {x: c for x, c in out.items() if c}


###########
# OPERADS #
###########
def operad_to_json(p: DgOperad) -> Dict[str, Any]:
    """JSON-compatible form of a concrete operad; rationals are "p/q" strings."""

    module = p.module
    arities = []
    for n in range(p.max_arity + 1):
        data = module.arity(n)
        entry: Dict[str, Any] = {
            "arity": n,
            "basis": [{"label": label_to_json(x), "degree": d} for x, d in zip(data.labels, data.degrees)],
            "actions": [matrix_to_json(a) for a in data.actions],
            "differential": matrix_to_json(data.differential),
        }
        if isinstance(module, DgLambdaModule) and n in module.restrictions:
            entry["restrictions"] = [matrix_to_json(r) for r in module.restrictions[n]]
        arities.append(entry)
    compositions = []
    for (i, a, b), value in sorted(p.compositions.items(), key=lambda t: repr(t[0])):
        if value:
            compositions.append([i, label_to_json(a), label_to_json(b), _element_to_json(value)])
    return {
        "format": FORMAT_VERSION,
        "name": p.name,
        "max_arity": p.max_arity,
        "unitary": p.unitary,
        "arities": arities,
        "compositions": compositions,
        "unit": _element_to_json(p.unit_element),
        "multiplication": _element_to_json(p.multiplication) if p.multiplication else None,
        "augmentation": matrix_to_json(p.augmentation_matrix) if p.augmentation_matrix is not None else None,
    }


def operad_from_json(doc: Dict[str, Any], check: bool = True) -> DgOperad:
    """Inverse of operad_to_json; validates the module and the operad axioms unless told not to."""

    if not isinstance(doc, dict):
        raise InputError("An operad file holds one JSON object")
    for key in ("name", "max_arity", "arities"):
        if key not in doc:
            raise InputError(f"Missing field {key!r}")
    max_arity = doc["max_arity"]
    if not isinstance(max_arity, int) or max_arity < 1:
        raise InputError(f"max_arity: expected a positive integer, got {max_arity!r}")
    arity_docs = {a.get("arity"): a for a in doc["arities"] if isinstance(a, dict)}
    arities: Dict[int, ArityData] = {}
    restrictions: Dict[int, Tuple[QMatrix, ...]] = {}
    has_lambda = False
    for n in range(max_arity + 1):
        where = f"arities[{n}]"
        entry = arity_docs.get(n, {"basis": [], "actions": [], "differential": []})
        basis = entry.get("basis", [])
        labels = tuple(label_from_json(b["label"]) for b in basis)
        degrees = tuple(int(b["degree"]) for b in basis)
        dim = len(labels)
        actions_doc = entry.get("actions", [])
        if len(actions_doc) != max(n - 1, 0):
            raise InputError(f"{where}.actions: arity {n} needs {max(n - 1, 0)} transposition matrices")
        actions = tuple(matrix_from_json(a, dim, dim, f"{where}.actions[{k}]") for k, a in enumerate(actions_doc))
        differential = matrix_from_json(entry.get("differential", []), dim, dim, f"{where}.differential")
        try:
            arities[n] = ArityData(n, labels, degrees, actions, differential)
        except OperadiqError as e:
            raise InputError(f"{where}: {e}") from e
        if "restrictions" in entry:
            has_lambda = True
    for n in range(1, max_arity + 1):
        entry = arity_docs.get(n, {})
        if "restrictions" not in entry:
            continue
        mats = entry["restrictions"]
        if len(mats) != n:
            raise InputError(f"arities[{n}].restrictions: expected {n} matrices")
        restrictions[n] = tuple(
            matrix_from_json(r, arities[n - 1].dim, arities[n].dim, f"arities[{n}].restrictions[{i}]")
            for i, r in enumerate(mats)
        )

    module: DgSigmaModule = (
        DgLambdaModule(max_arity, arities, restrictions) if has_lambda else DgSigmaModule(max_arity, arities)
    )
    all_labels = {x for data in arities.values() for x in data.labels}
    compositions: Dict[Tuple[int, Hashable, Hashable], Element] = {}
    for k, entry in enumerate(doc.get("compositions", [])):
        if not isinstance(entry, list) or len(entry) != 4:
            raise InputError(f"compositions[{k}]: expected [i, left, right, value]")
        i, a, b, value = entry
        compositions[(i, label_from_json(a), label_from_json(b))] = _element_from_json(
            value, all_labels, f"compositions[{k}]"
        )
    augmentation = None
    if doc.get("augmentation") is not None:
        augmentation = matrix_from_json(doc["augmentation"], 1, arities[1].dim, "augmentation")
    p = DgOperad(
        str(doc["name"]),
        module,
        compositions,
        _element_from_json(doc.get("unit"), all_labels, "unit"),
        unitary=bool(doc.get("unitary", False)),
        multiplication=_element_from_json(doc.get("multiplication"), all_labels, "multiplication") or None,
        augmentation_matrix=augmentation,
    )
    if check:
        report = validate(module)
        report.extend(check_operad_axioms(p))
        if not report.ok:
            raise ValidationError(f"{p.name} is not a valid dg operad", report.violations)
    else:
        LOGGER.warning("%s loaded without structural checks", p.name)
    return p


def emit(p: DgOperad, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(operad_to_json(p), indent=1, ensure_ascii=False))
    LOGGER.info("wrote %s to %s", p.name, path)
    return path


def _load_json(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"No such file: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: line {e.lineno}, column {e.colno}: {e.msg}") from e


def parse(path: Union[str, Path], check: bool = True) -> DgOperad:
    """Reads a .opd file into a validated DgOperad."""

    doc = _load_json(path)
    if "generators" in doc:
        raise InputError(f"{path} holds a minimal model; read it with parse_model")
    return operad_from_json(doc, check)


def diff_operads(a: DgOperad, b: DgOperad) -> Report:
    """Field-by-field comparison of two concrete operads."""

    report = Report(f"{a.name} against {b.name}")
    if (a.max_arity, a.unitary) != (b.max_arity, b.unitary):
        report.add("shape", 0, detail="arity window or unitarity differ")
        return report
    for n in range(a.max_arity + 1):
        da, db = a.arity_data(n), b.arity_data(n)
        if (da.labels, da.degrees) != (db.labels, db.degrees):
            report.add("basis", n)
        elif da.differential != db.differential or any(x != y for x, y in zip(da.actions, db.actions)):
            report.add("module", n)
        elif a.has_lambda != b.has_lambda or (
            a.has_lambda and n >= 1 and a.restriction_matrices(n) != b.restriction_matrices(n)
        ):
            report.add("restriction", n)
    clean = lambda c: {k: v for k, v in c.items() if v}  # noqa: E731
    if clean(a.compositions) != clean(b.compositions):
        report.add("compositions", a.max_arity)
    if a.unit_element != b.unit_element or (a.multiplication or {}) != (b.multiplication or {}):
        report.add("unit", 1)
    if (a.augmentation_matrix is None) != (b.augmentation_matrix is None) or (
        a.augmentation_matrix is not None and a.augmentation_matrix != b.augmentation_matrix
    ):
        report.add("augmentation", 1)
    return report


##########
# MODELS #
##########
def _tree_element_to_json(alpha: Element) -> Dict[str, str]:
    return {serialize(t): fraction_to_str(c) for t, c in sorted(alpha.items(), key=lambda x: serialize(x[0]))}


def _tree_element_from_json(value: Dict[str, Any], where: str) -> Element:
    out = {parse_tree(t): _rational(c, f"{where}[{t!r}]") for t, c in value.items()}
    return {t: c for t, c in out.items() if c}


def model_to_json(result) -> Dict[str, Any]:
    """A MinimalModelResult as JSON: the target operad plus one block of generators per arity."""

    free: FreeOperad = result.operad
    generators = []
    for n, space in free.generators.items():
        keys = free.generator_keys(n)
        generators.append(
            {
                "arity": n,
                "names": list(space.names),
                "degrees": list(space.degrees),
                "actions": [matrix_to_json(a) for a in space.actions],
                "d": [_tree_element_to_json(v) for v in space.d_values],
                "delta": [[_tree_element_to_json(x) for x in row] for row in space.delta_values]
                if space.delta_values is not None
                else None,
                "f": [_element_to_json(result.morphism.images[k]) for k in keys],
            }
        )
    return {
        "format": FORMAT_VERSION,
        "name": free.name,
        "flavor": free.flavor,
        "max_arity": free.max_arity,
        "section_strategy": result.strategy,
        "multiplication": _tree_element_to_json(result.multiplication) if result.multiplication else None,
        "target": operad_to_json(result.target),
        "generators": generators,
    }


def emit_model(result, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(model_to_json(result), indent=1, ensure_ascii=False))
    LOGGER.info("wrote model %s to %s", result.operad.name, path)
    return path


def parse_model(path: Union[str, Path], target: Optional[DgOperad] = None):
    """Reads an emitted model back into a MinimalModelResult.

    Args:
        - path: a file written by emit_model.
        - target: the operad ρ lands in; the embedded copy is used when omitted.

    Returns:
        - MinimalModelResult whose stages carry empty quis reports (nothing was recomputed).

    Raises:
        - ValidationError, with located violations, when the embedded target is not an operad, when some
          arity of generators fails the extension hypotheses, or when ρ is not a morphism.

    """

    from scripts.sullivan import FLAVORS, MinimalModelResult, Stage

    doc = _load_json(path)
    if "generators" not in doc:
        raise InputError(f"{path} holds no generators section")
    target = target if target is not None else operad_from_json(doc["target"])
    flavor = doc.get("flavor", "01")
    max_arity = int(doc["max_arity"])
    target_labels = {x for n in range(min(max_arity, target.max_arity) + 1) for x in target.basis(n)}
    spaces: Dict[int, GeneratorSpace] = {}
    images: Dict[Tuple[int, int], Element] = {}
    for block in doc["generators"]:
        n = int(block["arity"])
        where = f"generators[arity {n}]"
        dim = len(block["degrees"])
        actions = tuple(matrix_from_json(a, dim, dim, f"{where}.actions[{k}]") for k, a in enumerate(block["actions"]))
        d_values = tuple(_tree_element_from_json(v, f"{where}.d[{k}]") for k, v in enumerate(block["d"]))
        delta = None
        if block.get("delta") is not None:
            delta = tuple(
                tuple(_tree_element_from_json(x, f"{where}.delta[{k}]") for x in row)
                for k, row in enumerate(block["delta"])
            )
        spaces[n] = GeneratorSpace(n, tuple(block["degrees"]), actions, d_values, delta, tuple(block.get("names", ())))
        for k, value in enumerate(block["f"]):
            try:
                images[(n, k)] = _element_from_json(value, target_labels, f"{where}.f[{k}]")
            except InputError as e:
                raise InputError(f"Image of e{n}_{k} (arity {n}) does not live in {target.name}: {e}") from e
    free = empty_free_operad(max_arity, flavor, str(doc.get("name", "model")))
    for n in sorted(spaces):
        report = check_extension(free, spaces[n])
        if not report.ok:
            raise ValidationError(f"{path}: the generators of arity {n} do not extend the lower ones", report.violations)
        free = principal_extend(free, spaces[n], check=False)
    multiplication = _tree_element_from_json(doc["multiplication"], "multiplication") if doc.get("multiplication") else None
    free.multiplication = multiplication
    rho = FreeMorphism(free, target, images)
    report = rho.check()
    if not report.ok:
        raise ValidationError(f"{path}: ρ is not a morphism of operads into {target.name}", report.violations)
    stages = {}
    for n, space in spaces.items():
        quis = Report("quasi-isomorphism", details={"loaded": True})
        stages[n] = Stage(n, space, [images[(n, k)] for k in range(space.dim)], quis, 0.0, free.dim(n), target.dim(n))
    name = "unitary" if flavor == "+1" else "non-unitary"
    if name not in FLAVORS:
        raise InputError(f"Unknown flavor {flavor!r}")
    return MinimalModelResult(
        target, name, max_arity, doc.get("section_strategy", "first-pivot"), stages, free, rho, multiplication
    )


############################
# GENERATOR SPECIFICATIONS #
############################
GENS_GRAMMAR = r"""
    start: gen ("," gen)*
    gen: INT ":" SIGNED_INT [":" REP] ["*" INT]
    REP: "triv" | "reg"
    %import common.INT
    %import common.SIGNED_INT
    %import common.WS
    %ignore WS
"""


class _GensBuilder(Transformer):
    def start(self, items):
        return list(items)

    def gen(self, items):
        arity, degree, rep, count = items
        return int(arity), int(degree), str(rep) if rep is not None else "triv", int(count) if count is not None else 1


_GENS_PARSER = Lark(GENS_GRAMMAR, parser="lalr", maybe_placeholders=True)


def parse_generator_spec(text: str, flavor: str = "01") -> Dict[int, GeneratorSpace]:
    """Generators with zero differential from "arity:degree[:triv|reg][*copies]" entries.

    "2:0:reg,3:-1*2" is the regular Σ_2-module in degree 0 plus two trivial Σ_3-lines in degree -1.

    """

    try:
        entries = _GensBuilder().transform(_GENS_PARSER.parse(text))
    except LarkError as e:
        raise InputError(f"Cannot read generator spec {text!r}: {e}") from e
    spaces: Dict[int, GeneratorSpace] = {}
    for arity, degree, rep, count in entries:
        if arity < 2:
            raise InputError(f"Generator spec entry of arity {arity}: generators need arity >= 2")
        for _ in range(count):
            if rep == "reg":
                actions = regular_representation(arity)
            else:
                actions = trivial_representation(arity, 1)
            dim = actions[0].rows
            delta = tuple(tuple({} for _ in range(arity)) for _ in range(dim)) if flavor == "+1" else None
            space = GeneratorSpace(arity, (degree,) * dim, actions, ({},) * dim, delta)
            spaces[arity] = spaces[arity].concat(space) if arity in spaces else space
    return spaces


def describe_label(label: Hashable) -> str:
    if label == 1:
        return "id"
    if label == CORK:
        return CORK
    return serialize(label)
