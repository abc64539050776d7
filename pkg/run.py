# This file is the main runner script for computations ran via the command line.
#
# It picks up the command and its flags from the command line and
# calls the matching computation with defaults from run_hyperparams.py.
#
# Operads come either from the builtins in `assets/operads/builtin_operads.py` (--builtin)
# or from a `.opd` file (--input), for example one written by the `export` command.
#

import logging
import sys
from fractions import Fraction
from typing import Dict, List, Optional

from colorama import just_fix_windows_console

from scripts.kan import KanFamily, OperadHost, fill
from scripts.runner import runner
from scripts.sullivan import compare_models, unitary_compatibility_check, verify_quis
from utils.classes import Colors, HypothesisError, InputError, KanConditionError, OperadiqError, WindowError, to_fraction
from utils.opd_io import describe_label, emit, parse, parse_generator_spec, parse_model
from utils.operad_core import DgOperad, FreeOperad, builtin
from run_hyperparams import DEFAULT_MAX_ARITY, DEFAULT_SECTION_STRATEGY, LOG_FORMAT, SHOW_PROGRESS

COMMANDS = ("minimal-model", "verify", "kan-fill", "free", "compare", "export")
BOOLEAN_FLAGS = ("--unitary", "--verbose", "--no-progress")


##################
# ARGUMENT TOOLS #
##################
def parse_flags(args: List[str]) -> Dict[str, str]:
    """Reads `--flag value`, `--flag:value` and bare boolean flags into a dict keyed by flag name."""

    flags: Dict[str, str] = {}
    i = 0
    while i < len(args):
        arg = args[i]
        if not arg.startswith("--"):
            raise InputError(f"Unexpected argument {arg!r}")
        if ":" in arg:
            name, value = arg.split(":", 1)
            flags[name] = value
        elif arg in BOOLEAN_FLAGS:
            flags[arg] = "true"
        elif i + 1 < len(args) and not args[i + 1].startswith("--"):
            flags[arg] = args[i + 1]
            i += 1
        else:
            raise InputError(f"Flag {arg} needs a value")
        i += 1
    return flags


def _int_flag(flags: Dict[str, str], name: str, default: Optional[int] = None) -> int:
    if name not in flags:
        if default is None:
            raise InputError(f"Missing flag {name}")
        return default
    try:
        return int(flags[name])
    except ValueError as e:
        raise InputError(f"{name} expects an integer, got {flags[name]!r}") from e


def _operad(flags: Dict[str, str], builtin_flag: str = "--builtin", input_flag: str = "--input", max_arity: Optional[int] = None) -> DgOperad:
    if builtin_flag in flags:
        return builtin(flags[builtin_flag], max_arity or DEFAULT_MAX_ARITY)
    if input_flag in flags:
        return parse(flags[input_flag])
    raise InputError(f"Give an operad with {builtin_flag} NAME or {input_flag} FILE")


def _coordinates(text: str) -> List[Fraction]:
    try:
        return [to_fraction(x) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError) as e:
        raise InputError(f"Cannot read coordinates {text!r}") from e


############
# COMMANDS #
############
def cmd_minimal_model(flags: Dict[str, str]) -> int:
    max_arity = _int_flag(flags, "--max-arity", DEFAULT_MAX_ARITY)
    p = _operad(flags, max_arity=max_arity)
    unitary = "--unitary" in flags
    try:
        result, _ = runner(
            p,
            max_arity,
            unitary=unitary,
            section_strategy=flags.get("--section-strategy", DEFAULT_SECTION_STRATEGY),
            out=flags.get("--out"),
            emit_model_path=flags.get("--emit-model"),
            show_progress=SHOW_PROGRESS and "--no-progress" not in flags,
        )
    except HypothesisError as e:
        print(Colors.RED, f"\nHYPOTHESIS FAILS: {e}", Colors.RESET)
        for n, dims in sorted(e.table.items()):
            print(f"H{p.name}({n}): {dims}")
        raise
    return 0


def cmd_verify(flags: Dict[str, str]) -> int:
    up_to = _int_flag(flags, "--up-to")
    target = None
    if "--target" in flags or "--target-builtin" in flags:
        target = _operad(flags, "--target-builtin", "--target", max_arity=up_to)
    model = parse_model(flags.get("--model") or _missing("--model"), target)
    if up_to > model.max_arity or up_to > model.target.max_arity:
        raise WindowError(f"The model is known up to arity {model.max_arity}, asked for {up_to}")
    report = verify_quis(model.morphism, up_to)
    for n in range(up_to + 1):
        dims = report.details["cone"].get(n, {})
        print(f"Arity {n}: relative cohomology {dims if dims else 0}")
    if report.ok:
        print(Colors.GREEN, f"\nρ is a quasi-isomorphism through arity {up_to}", Colors.RESET)
        return 0
    first = min(v.arity for v in report.violations)
    print(Colors.RED, f"\nρ is not a quasi-isomorphism; first failing arity {first}", Colors.RESET)
    return 1


def cmd_kan_fill(flags: Dict[str, str]) -> int:
    n = _int_flag(flags, "--arity")
    p = _operad(flags, max_arity=max(n, DEFAULT_MAX_ARITY))
    host = OperadHost(p)
    if "--from-element" in flags:
        chi = p.from_vector(dict(enumerate(_coordinates(flags["--from-element"]))), n)
        members = [host.face(chi, i) for i in range(1, n + 1)]
    elif "--family" in flags:
        with open(flags["--family"]) as f:
            rows = [line.strip() for line in f if line.strip()]
        if len(rows) != n:
            raise InputError(f"A family for arity {n} has {n} lines of coordinates, found {len(rows)}")
        members = [p.from_vector(dict(enumerate(_coordinates(row))), n - 1) for row in rows]
    else:
        raise InputError("Give the family with --family FILE or --from-element COORDS")

    try:
        omega = fill(KanFamily(host, n, members))
    except KanConditionError as e:
        i, j = e.pair
        print(Colors.RED, f"\nNOT A KAN FAMILY: δ_{i} ω_{j} ≠ δ_{j - 1} ω_{i}", Colors.RESET)
        raise
    vector = p.to_vector(omega, n)
    print("ω =", [str(vector.get(k, 0)) for k in range(p.dim(n))])
    for i in range(1, n + 1):
        ok = host.face(omega, i) == members[i - 1]
        print(f"δ_{i} ω = ω_{i}: {'yes' if ok else 'NO'}")
    return 0


def cmd_free(flags: Dict[str, str]) -> int:
    flavor = flags.get("--flavor", "01")
    arity = _int_flag(flags, "--arity")
    spaces = parse_generator_spec(flags.get("--gens") or _missing("--gens"), flavor)
    f = FreeOperad(spaces, max(arity, 1), flavor, "free")
    basis = f.basis(arity)
    for label in basis:
        print(f"{describe_label(label)}  (degree {f.degree_of(label)})")
    dims: Dict[int, int] = {}
    for label in basis:
        dims[f.degree_of(label)] = dims.get(f.degree_of(label), 0) + 1
    print(Colors.BLUE, f"\ndim Γ(E)({arity}) = {len(basis)}; per degree {dict(sorted(dims.items()))}", Colors.RESET)
    return 0


def cmd_compare(flags: Dict[str, str]) -> int:
    a = parse_model(flags.get("--model-a") or _missing("--model-a"))
    b = parse_model(flags.get("--model-b") or _missing("--model-b"))
    if a.unitary == b.unitary:
        report = compare_models(a, b)
    else:
        plain, plus = (a, b) if b.unitary else (b, a)
        report = unitary_compatibility_check(plain, plus)
    ta, tb = a.dimension_table(), b.dimension_table()
    for n in sorted(set(ta) | set(tb)):
        print(f"Arity {n}: {dict(sorted(ta.get(n, {}).items()))}  |  {dict(sorted(tb.get(n, {}).items()))}")
    if report.ok:
        print(Colors.GREEN, "\nThe models agree", Colors.RESET)
        return 0
    print(Colors.RED, "\n" + report.summary(), Colors.RESET)
    return 1


def cmd_export(flags: Dict[str, str]) -> int:
    max_arity = _int_flag(flags, "--max-arity", DEFAULT_MAX_ARITY)
    p = builtin(flags.get("--builtin") or _missing("--builtin"), max_arity)
    path = emit(p, flags.get("--out") or _missing("--out"))
    print(f"{p.name} saved to: {path}")
    return 0


def _missing(flag: str) -> str:
    raise InputError(f"Missing flag {flag}")


####################
# MAIN RUN MANAGER #
####################
def run(argv: Optional[List[str]] = None) -> int:
    """Runs a command given from the command line and returns its exit code.

    Args (function reads them from the command line unless argv is given):
        - `minimal-model (--builtin NAME | --input FILE) [--max-arity N] [--unitary]
          [--section-strategy first-pivot|last-pivot] [--out REPORT.json] [--emit-model MODEL.opd]`
        - `verify --model MODEL.opd (--target FILE | --target-builtin NAME) --up-to N`
        - `kan-fill (--input FILE | --builtin NAME) --arity n (--family FILE | --from-element COORDS)`
        - `free --gens SPEC --arity l [--flavor 01|+1]`, SPEC like "2:0:reg,3:-1*2"
        - `compare --model-a A.opd --model-b B.opd`
        - `export --builtin NAME --max-arity N --out FILE.opd`
        - `--verbose` on any command switches logging to DEBUG, `--no-progress` hides progress bars.
        - Flags are written `--flag value` or `--flag:value`.

    Returns:
        - 0 on success, 1 when a verification fails, 2 on bad input, 3 when a hypothesis fails.

    """

    argv = sys.argv[1:] if argv is None else argv
    just_fix_windows_console()
    if not argv or argv[0] not in COMMANDS:
        print(Colors.RED, f"Choose a command: {', '.join(COMMANDS)}", Colors.RESET)
        return InputError.exit_code

    command, rest = argv[0], argv[1:]
    try:
        flags = parse_flags(rest)
        logging.basicConfig(level=logging.DEBUG if "--verbose" in flags else logging.WARNING, format=LOG_FORMAT)
        handler = {
            "minimal-model": cmd_minimal_model,
            "verify": cmd_verify,
            "kan-fill": cmd_kan_fill,
            "free": cmd_free,
            "compare": cmd_compare,
            "export": cmd_export,
        }[command]
        return handler(flags)
    except OperadiqError as e:
        print(Colors.RED, f"\n{type(e).__name__}: {e}", Colors.RESET)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(run())
