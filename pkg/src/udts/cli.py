"""Command-line front end.

Exit codes: 0 pass, 1 violation (a witness is reported), 2 bad input,
3 enumeration cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from udts.builtins import BUILTINS, builtin_family, retype
from udts.error_classes import ClassContext
from udts.errors import BoundExceeded, FormatError, IllFormedProgram, UdtsError
from udts.interp import (
    build_case_study,
    case_study_families,
    case_study_memory,
    program_from_json,
    program_to_json,
    run,
    verify,
)
from udts.memory import fresh_memory, memory_from_json, memory_to_json
from udts.sensitivity import (
    check_lemma1,
    check_lemma2,
    check_lemma3,
    check_lemma4,
    replay_witness,
    type_sensitive_bruteforce,
)
from udts.structures import (
    StructureChoice,
    StructureFamily,
    check_wellformed,
    family_from_json,
    family_to_json,
    structure_from_json,
    structure_to_json,
)

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3


class InputError(Exception):
    pass


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if out:
        Path(out).write_text(text + "\n")


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _family(name: str, args: argparse.Namespace) -> StructureFamily:
    """A builtin family name or the path of a family file."""
    if name in BUILTINS:
        return builtin_family(name, args.radix, seed=args.seed, mem=args.mem)
    if Path(name).exists():
        return family_from_json(_load_json(name))
    raise InputError(f"{name!r} is neither a builtin family ({', '.join(sorted(BUILTINS))}) nor a file")


# --------------------------------------------------------------------- family


def cmd_family(args: argparse.Namespace) -> int:
    if args.builtin:
        fam = builtin_family(args.builtin, args.radix, seed=args.seed, mem=args.mem)
        members = list(fam.members)
        type_name = fam.type_name
    else:
        doc = _load_json(args.file)
        # validate member by member so a malformed member is a violation, not a crash
        try:
            defaults = {k: doc[k] for k in ("radix", "size", "values", "addresses", "variant") if k in doc}
            members = [structure_from_json(m, defaults) for m in doc["members"]]
            type_name = str(doc["type"])
        except (KeyError, TypeError, AttributeError) as exc:
            raise FormatError(f"bad family document: {exc!r}") from exc
    rows = []
    ok = True
    for s in members:
        violations = check_wellformed(s)
        ok = ok and not violations
        rows.append({"id": s.id, "ok": not violations, "violations": [v.to_json() for v in violations]})
    report = {"command": "family", "type": type_name, "members": rows, "count": len(rows), "ok": ok}
    if args.tables and ok:
        report["family"] = family_to_json(StructureFamily(type_name, tuple(members)))
    _emit(report, args.json)
    return EXIT_OK if ok else EXIT_VIOLATION


# ---------------------------------------------------------------- sensitivity


def _context(fam: StructureFamily, args: argparse.Namespace, foreign: list[StructureFamily]) -> ClassContext:
    reader = next((s for s in fam.sorted_members() if s.admits(args.addr)), None)
    if reader is None:
        raise InputError(f"no member of {fam.type_name!r} admits address {args.addr}")
    sources = None if args.source is None else tuple(args.source)
    return ClassContext(
        reader,
        args.addr,
        tuple(foreign),
        reader_type=fam.type_name,
        copy_sources=sources,
        slice_bound=args.slice_bound,
    )


def cmd_sensitivity(args: argparse.Namespace) -> int:
    if not args.lemma and not args.klass:
        raise InputError("request at least one --lemma or --class")
    fam = _family(args.family, args)
    foreign = [_family(n, args) for n in args.foreign]
    report: dict = {"command": "sensitivity", "family": fam.type_name, "members": len(fam), "lemmas": [], "classes": []}
    ok = True
    for n in args.lemma:
        if n == 1:
            r = check_lemma1(fam, args.addr_bound)
        elif n == 2:
            r = check_lemma2(fam, args.addr_bound)
        elif n == 3:
            r = check_lemma3(fam, foreign, args.addr_bound, slices=args.slices, slice_bound=args.slice_bound)
        else:
            r = check_lemma4(fam, args.addr_bound)
        ok = ok and r.holds
        report["lemmas"].append(r.to_json())
    for c in args.klass:
        ctx = _context(fam, args, foreign)
        v = type_sensitive_bruteforce([fam], c, ctx, args.cap)
        doc = v.to_json()
        doc["read_address"] = args.addr
        doc["reader"] = ctx.reader_structure.id
        if v.witness is not None:
            runs = replay_witness(v.witness)
            doc["replay"] = [
                {"read": e.to_json(), "outcome": "Terminated" if o.terminated else "Stuck"} for e, o in runs
            ]
        ok = ok and v.sensitive
        report["classes"].append(doc)
    report["ok"] = ok
    _emit(report, args.json)
    return EXIT_OK if ok else EXIT_VIOLATION


# --------------------------------------------------------------------- verify


def _verify_inputs(args: argparse.Namespace):
    if args.case_study:
        prog = build_case_study(args.buggy, same_address=args.same_address)
        return prog, case_study_families(plain_tcb=args.plain_tcb), case_study_memory()
    if not args.program:
        raise InputError("give a program file or --case-study")
    doc = _load_json(args.program)
    prog = program_from_json(doc)
    families = {f["type"]: family_from_json(f) for f in doc.get("families", [])}
    for spec in args.family:
        type_name, sep, name = spec.partition("=")
        if not sep:
            raise InputError(f"--family expects TYPE=NAME, got {spec!r}")
        families[type_name] = retype(_family(name, args), type_name)
    if "memory" in doc:
        m0 = memory_from_json(doc["memory"])
    else:
        m0 = fresh_memory(args.mem, args.radix)
    return prog, list(families.values()), m0


def cmd_verify(args: argparse.Namespace) -> int:
    if args.replay:
        return _replay(args)
    prog, families, m0 = _verify_inputs(args)
    verdict = verify(prog, families, m0, args.cap)
    report = {"command": "verify", **verdict.to_json(prog)}
    if not verdict.verified:
        assert verdict.choice is not None
        # everything a replay needs, with structure tables inline
        report["witness"] = {
            "program": program_to_json(prog),
            "memory": memory_to_json(m0),
            "structures": {t: structure_to_json(s) for t, s in sorted(verdict.choice.assignment.items())},
        }
    _emit(report, args.json)
    return EXIT_OK if verdict.verified else EXIT_VIOLATION


def _replay(args: argparse.Namespace) -> int:
    doc = _load_json(args.replay)
    try:
        w = doc["witness"]
        prog = program_from_json(w["program"])
        m0 = memory_from_json(w["memory"])
        choice = StructureChoice({t: structure_from_json(s) for t, s in w["structures"].items()})
        expected = doc.get("step")
    except KeyError as exc:
        raise FormatError(f"replay file lacks {exc}") from exc
    outcome, _ = run(prog, choice, m0)
    report = {"command": "replay", **outcome.to_json(), "expected_step": expected}
    report["reproduced"] = outcome.stuck and outcome.step == expected
    _emit(report, args.json)
    return EXIT_VIOLATION if outcome.stuck else EXIT_OK


# ----------------------------------------------------------------------- main


def _positive(text: str) -> int:
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--radix", type=int, default=4, help="distinct byte values (default 4)")
    common.add_argument("--mem", type=_positive, default=8, help="memory size in cells")
    common.add_argument("--cap", type=_positive, default=4096, help="enumeration cap")
    common.add_argument("--addr-bound", type=_positive, default=8, help="addresses checked by the lemmas")
    common.add_argument("--slice-bound", type=_positive, default=2, help="representations per class-4 slice")
    common.add_argument("--seed", type=int, default=0, help="seed for the address builtin")
    common.add_argument("--json", metavar="OUT", help="also write the report to OUT")

    parser = argparse.ArgumentParser(prog="udts", description="Underspecified data-type semantics toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("family", parents=[common], help="check a family for well-formedness")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--builtin", choices=sorted(BUILTINS), metavar="NAME")
    src.add_argument("file", nargs="?", help="family JSON file")
    p.add_argument("--tables", action="store_true", help="include encoder/decoder tables")
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("sensitivity", parents=[common], help="lemma checks and the sensitivity oracle")
    p.add_argument("--family", required=True, help="builtin name or family file")
    p.add_argument("--lemma", type=int, choices=range(1, 5), action="append", default=[])
    p.add_argument("--class", dest="klass", type=int, choices=range(1, 6), action="append", default=[])
    p.add_argument("--foreign", action="append", help="foreign family for classes 3/4 (default uint)")
    p.add_argument("--addr", type=int, default=0, help="read address of the oracle context")
    p.add_argument("--source", type=int, action="append", help="class-5 copy source address")
    p.add_argument("--slices", action="store_true", help="lemma 3 over class-4 slices")
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("verify", parents=[common], help="verify a program under every structure choice")
    p.add_argument("program", nargs="?", help="program JSON file")
    p.add_argument("--family", action="append", default=[], metavar="TYPE=NAME")
    p.add_argument("--case-study", action="store_true", help="the scheduler/IPC case study")
    p.add_argument("--buggy", action="store_true", help="case study with the erroneous memcpy")
    p.add_argument("--same-address", action="store_true", help="buggy variant re-writing a stale copy in place")
    p.add_argument("--plain-tcb", action="store_true", help="plain TCB family instead of protected bits")
    p.add_argument("--replay", metavar="FILE", help="re-run the witness of a verify report")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "sensitivity" and args.foreign is None:
        args.foreign = ["uint"]
    try:
        return args.func(args)
    except BoundExceeded as exc:
        print(f"udts: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (InputError, FormatError, IllFormedProgram, KeyError, ValueError, UdtsError) as exc:
        print(f"udts: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
