import json
import time
from pathlib import Path
from typing import List, Optional, Tuple

from scripts.sullivan import (
    MinimalModelResult,
    decomposability_report,
    minimal_model,
    strict_unit_report,
)
from utils.classes import Colors, ModelReport, Report
from utils.opd_io import emit_model
from utils.operad_core import OperadBase
from run_hyperparams import (
    DEFAULT_SECTION_STRATEGY,
    JSON_SUBFOLDER,
    OUTPUT_FOLDER,
    SHOW_PROGRESS,
    TXT_SUBFOLDER,
)


####################
# MAIN RUN MANAGER #
####################
def runner(
    p: OperadBase,
    max_arity: int,
    unitary: bool = False,
    section_strategy: str = DEFAULT_SECTION_STRATEGY,
    out: Optional[str] = None,
    emit_model_path: Optional[str] = None,
    show_progress: bool = SHOW_PROGRESS,
) -> Tuple[MinimalModelResult, ModelReport]:
    """Computes the minimal model of an operad and saves the results.

    Args:
        - p: the operad to model.
        - max_arity: arity where the tower stops.
        - unitary:
            - true: unitary model Γ₊₁(E) → p (p needs P(0) = k and a unitary multiplication),
            - false: non-unitary model Γ₀₁(E) → p.
        - section_strategy: "first-pivot" or "last-pivot" cocycle representatives.
        - out: path of the JSON report (defaults to outputs/json/<name>.json).
        - emit_model_path: optional path where the model is written as a .opd file.
        - show_progress: progress bar over the stages.

    Returns:
        - result: the MinimalModelResult.
        - report: the machine-readable report that was written to disk.

    """

    # PRELIMINARIES
    t1 = time.time()
    repository_root: Path = Path(__file__).resolve().parent.parent
    txt_folder_path = repository_root / OUTPUT_FOLDER / TXT_SUBFOLDER
    json_folder_path = repository_root / OUTPUT_FOLDER / JSON_SUBFOLDER
    txt_folder_path.mkdir(parents=True, exist_ok=True)
    json_folder_path.mkdir(parents=True, exist_ok=True)
    flavor = "unitary" if unitary else "non-unitary"

    print(
        Colors.BLUE,
        "\n####################################################",
        f"\nMINIMAL MODEL OF {p.name}. Flavor: {flavor}. Arities 2..{max_arity}",
        "\n####################################################",
        Colors.RESET,
    )

    # CALL ALGORITHM
    result = minimal_model(p, max_arity, flavor, section_strategy, progress=show_progress)
    strict: Optional[Report] = strict_unit_report(result) if unitary else None
    decomposable = decomposability_report(result)

    # UPDATE USER
    for n, stage in sorted(result.stages.items()):
        dims = ", ".join(f"degree {d}: {c}" for d, c in sorted(stage.dimensions.items())) or "none"
        print(f"Arity {n}. Generators: {dims}. Quis: {'yes' if stage.quis.ok else 'NO'}. Took {stage.seconds:.2f}s")
    if strict is not None:
        colour = Colors.GREEN if strict.ok else Colors.RED
        print(colour, f"\nStrict units: {'hold' if strict.ok else 'FAIL'}", Colors.RESET)
    duration_total = time.time() - t1
    print(Colors.GREEN, f"\n\nMODEL COMPUTED! Total run time: {duration_total:.2f} s", Colors.RESET)

    # SAVE RESULTS
    report = result.record(strict.ok if strict is not None else None)
    json_path = Path(out) if out else json_folder_path / f"{p.name}.json"
    json_path.parent.mkdir(parents=True, exist_ok=True)
    json_path.write_text(json.dumps(report, indent=1, ensure_ascii=False))

    lines = result_sheet(result, strict, decomposable)
    txt_path = txt_folder_path / f"{p.name}{'_unitary' if unitary else ''}.txt"
    with open(txt_path, "w") as f:
        f.writelines(lines)

    print(f"Result saved to: {txt_path}")
    print(f"Report saved to: {json_path}")

    if emit_model_path:
        emit_model(result, emit_model_path)
        print(f"Model saved to: {emit_model_path}")

    return result, report


def result_sheet(result: MinimalModelResult, strict: Optional[Report], decomposable: Report) -> List[str]:
    """Human-readable summary of a run: tables, per-stage checks, generators."""

    lines: List[str] = []
    lines.append(f"RESULT SHEET. OPERAD: {result.target.name}. FLAVOR: {result.flavor}\n")
    lines.append(f"Section strategy: {result.strategy}. Run time: {result.seconds:.2f} s\n")

    lines.append("\n__________________________\nCOHOMOLOGY IN ARITIES 0 AND 1\n")
    for n, dims in sorted(result.hypotheses.items()):
        lines.append(f"Arity {n}: {dims}\n")

    lines.append("\n__________________________\nGENERATORS dim E(n)^d\n")
    for n, dims in result.dimension_table().items():
        lines.append(f"Arity {n}: {dict(sorted(dims.items()))}\n")

    lines.append("\n__________________________\nSTAGES\n")
    for n, stage in sorted(result.stages.items()):
        lines.append(
            f"Arity {n}. Quis: {stage.quis.ok}. Basis sizes: model {stage.source_basis_size}, "
            f"target {stage.target_basis_size}. Time: {stage.seconds:.2f} s\n"
        )

    lines.append("\n__________________________\nDIFFERENTIALS (number of tree monomials)\n")
    for name, count in decomposable.details.get("monomials", {}).items():
        lines.append(f"d {name}: {count}\n")
    if not decomposable.ok:
        lines.append(decomposable.summary() + "\n")

    if strict is not None:
        lines.append("\n__________________________\nSTRICT UNITS (restrictions of each generator)\n")
        for name, values in strict.details.get("restrictions", {}).items():
            lines.append(f"{name}: {values}\n")
        lines.append(strict.summary() + "\n")
    return lines
