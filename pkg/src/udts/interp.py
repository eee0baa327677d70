"""A toy typed imperative language run against one fixed structure choice.

A program declares typed variables at addresses and executes straight-line
statements.  ``run`` executes it under one ``StructureChoice``; ``verify``
runs it under every admissible choice and only succeeds when every run
terminates normally.

Reads over unknown bytes (or an unknown protected bit) consider every
completion: if any completion is outside the decoder domain the run is stuck,
otherwise the read yields ``UNKNOWN_VALUE``, which poisons ``AssertValue``.
"""

from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from udts.errors import CapExceeded, FormatError, IllFormedProgram
from udts.memory import UNKNOWN, BitAddress, Memory, bit_rw, fresh_memory, install_protected_bit
from udts.modification import (
    BitCopy,
    MemoryModification,
    apply_modification,
    modification_from_json,
    modification_to_json,
)
from udts.structures import (
    UNDEFINED,
    SemanticStructure,
    StructureChoice,
    StructureFamily,
    choice_admissible,
    decode,
    encode,
    make_bool_pair,
    make_protected_family,
    make_uint,
    undefined_somewhere,
)


class _UnknownValue:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __reduce__(self):
        return (_UnknownValue, ())

    def __repr__(self) -> str:
        return "UNKNOWN_VALUE"


UNKNOWN_VALUE = _UnknownValue()

UNDEFINED_DECODE = "UndefinedDecode"
ASSERT_FAILED = "AssertFailed"
UNKNOWN_VALUE_USED = "UnknownValueUsed"
MISALIGNED = "Misaligned"


@dataclass(frozen=True)
class Decl:
    var: str
    type_name: str
    addr: int
    # placement candidates: the object lives at the first one the chosen structure admits
    candidates: tuple[int, ...] | None = None


@dataclass(frozen=True)
class WriteTyped:
    var: str
    value: str
    op = "write"


@dataclass(frozen=True)
class ReadTyped:
    var: str
    op = "read"


@dataclass(frozen=True)
class ReadAs:
    var: str
    other_type: str
    op = "read_as"


@dataclass(frozen=True)
class ByteCopy:
    dst: int
    src: int
    n: int
    op = "bytecopy"


@dataclass(frozen=True)
class HardwareEffect:
    mod: MemoryModification
    op = "hw"


@dataclass(frozen=True)
class AssertValue:
    var: str
    value: str
    op = "assert"


Statement = Union[WriteTyped, ReadTyped, ReadAs, ByteCopy, HardwareEffect, AssertValue]


@dataclass(frozen=True)
class Program:
    decls: tuple[Decl, ...]
    stmts: tuple[Statement, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "decls", tuple(self.decls))
        object.__setattr__(self, "stmts", tuple(self.stmts))
        names = [d.var for d in self.decls]
        if len(set(names)) != len(names):
            raise IllFormedProgram("duplicate variable declaration")

    def decl(self, var: str) -> Decl:
        for d in self.decls:
            if d.var == var:
                return d
        raise IllFormedProgram(f"unbound variable {var!r}")

    def types(self) -> list[str]:
        used = {d.type_name for d in self.decls}
        used |= {st.other_type for st in self.stmts if isinstance(st, ReadAs)}
        return sorted(used)


@dataclass(frozen=True)
class Outcome:
    terminated: bool
    step: int | None = None
    reason: str | None = None
    choice: StructureChoice | None = None
    culprit: int | None = None  # last statement that modified the stuck read window
    reads: tuple = ()

    @property
    def stuck(self) -> bool:
        return not self.terminated

    def to_json(self) -> dict:
        doc: dict = {"outcome": "Terminated" if self.terminated else "Stuck"}
        if not self.terminated:
            doc.update(step=self.step, reason=self.reason, culprit=self.culprit)
        if self.choice is not None:
            doc["choice"] = self.choice.to_json()
        doc["reads"] = [[i, var, _value_json(v)] for i, var, v in self.reads]
        return doc


def _value_json(v) -> str:
    return "?" if v is UNKNOWN_VALUE else str(v)


def _placement(d: Decl, s: SemanticStructure) -> int | None:
    if d.candidates is None:
        return d.addr if s.admits(d.addr) else None
    for c in d.candidates:
        if s.admits(c):
            return c
    return None


def typed_read(m: Memory, s: SemanticStructure, addr: int):
    """Decode the window at ``addr``: a value, ``UNKNOWN_VALUE`` or ``UNDEFINED``."""
    if addr + s.size > m.size:
        raise IllFormedProgram(f"read of {s.size} bytes at {addr} leaves memory")
    cells = m.cells[addr : addr + s.size]
    key = None if s.is_plain else addr
    b = s.protected_at(addr)
    pbits: Sequence = [None]
    if b is not None:
        bit, _ = bit_rw(m, b)
        pbits = (0, 1) if bit is None else (bit,)
    if UNKNOWN not in cells and len(pbits) == 1:
        return decode(s, cells, key, pbits[0])
    if undefined_somewhere(s, cells, key, pbits):
        return UNDEFINED
    return UNKNOWN_VALUE


def _materialize(mod: MemoryModification, choice: StructureChoice) -> tuple[int, ...] | None:
    p = mod.payload
    if not isinstance(p, BitCopy) or p.type_name not in choice:
        return None
    s = choice[p.type_name]
    if not s.admits(p.source_addr) or s.size != len(mod):
        return None
    return encode(s, p.value, None if s.is_plain else p.source_addr)[0]


def run(p: Program, choice: StructureChoice, m0: Memory) -> tuple[Outcome, Memory]:
    """Execute ``p`` under one structure choice, starting from ``m0``."""
    for t in p.types():
        if t not in choice:
            raise IllFormedProgram(f"no structure chosen for type {t!r}")
    m = m0
    prot = choice.protected()
    if prot is not None:
        ((_, b),) = prot[1].protected_bit.items()
        m = install_protected_bit(m, b)
    places: dict[str, int | None] = {}
    for d in p.decls:
        s = choice[d.type_name]
        places[d.var] = _placement(d, s)
        if places[d.var] is not None and places[d.var] + s.size > m.size:
            raise IllFormedProgram(f"{d.var} at {places[d.var]} does not fit in memory")
    last_writer: dict[int, int] = {}
    reads: list = []

    def stuck(i: int, reason: str, window: range | None = None, own: str | None = None) -> tuple[Outcome, Memory]:
        culprit = None
        if window is not None:
            writers = [last_writer[x] for x in window if x in last_writer]
            if writers:
                w = max(writers)
                st = p.stmts[w]
                if not (isinstance(st, WriteTyped) and st.var == own):
                    culprit = w
        return Outcome(False, i, reason, choice, culprit, tuple(reads)), m

    def touch(i: int, a: int, n: int) -> None:
        for x in range(a, a + n):
            last_writer[x] = i

    for i, st in enumerate(p.stmts):
        if isinstance(st, WriteTyped):
            d = p.decl(st.var)
            s = choice[d.type_name]
            addr = places[st.var]
            if addr is None:
                return stuck(i, MISALIGNED)
            if st.value not in s.values:
                raise IllFormedProgram(f"{st.value!r} is not a value of type {d.type_name!r} under {s.id}")
            bl, bit = encode(s, st.value, None if s.is_plain else addr)
            cells = list(m.cells)
            cells[addr : addr + s.size] = bl
            m = Memory(m.radix, tuple(cells), m.free_bits, m.reserve_bit, m.overlay, m.redirect)
            pb = s.protected_at(addr)
            if pb is not None:
                _, m = bit_rw(m, pb, bit)
            touch(i, addr, s.size)
        elif isinstance(st, (ReadTyped, AssertValue, ReadAs)):
            d = p.decl(st.var)
            if isinstance(st, ReadAs):
                if st.other_type not in choice:
                    raise IllFormedProgram(f"no structure chosen for type {st.other_type!r}")
                s = choice[st.other_type]
                base = places[st.var]
                addr = base if base is not None and s.admits(base) else None
            else:
                s = choice[d.type_name]
                addr = places[st.var]
            if addr is None:
                return stuck(i, MISALIGNED)
            v = typed_read(m, s, addr)
            window = range(addr, addr + s.size)
            if v is UNDEFINED:
                return stuck(i, UNDEFINED_DECODE, window, st.var)
            reads.append((i, st.var, v))
            if isinstance(st, AssertValue):
                if v is UNKNOWN_VALUE:
                    return stuck(i, UNKNOWN_VALUE_USED, window, st.var)
                if v != st.value:
                    return stuck(i, ASSERT_FAILED, window, st.var)
        elif isinstance(st, ByteCopy):
            if min(st.dst, st.src) < 0 or max(st.dst, st.src) + st.n > m.size:
                raise IllFormedProgram(f"byte copy of {st.n} bytes {st.src}->{st.dst} leaves memory")
            cells = list(m.cells)
            cells[st.dst : st.dst + st.n] = m.cells[st.src : st.src + st.n]
            m = Memory(m.radix, tuple(cells), m.free_bits, m.reserve_bit, m.overlay, m.redirect)
            touch(i, st.dst, st.n)
        elif isinstance(st, HardwareEffect):
            m = apply_modification(m, st.mod, _materialize(st.mod, choice))
            touch(i, st.mod.start, len(st.mod))
        else:
            raise IllFormedProgram(f"unknown statement {st!r}")
    return Outcome(True, choice=choice, reads=tuple(reads)), m


@dataclass(frozen=True)
class Verdict:
    verified: bool
    choice: StructureChoice | None = None
    step: int | None = None
    reason: str | None = None
    culprit: int | None = None
    checked: int = 0
    skipped: int = 0  # inadmissible choices (two protected bits)

    def to_json(self, program: Program | None = None) -> dict:
        doc: dict = {"verdict": "Verified" if self.verified else "Fails", "checked": self.checked}
        doc["skipped"] = self.skipped
        if not self.verified:
            assert self.choice is not None
            doc.update(choice=self.choice.to_json(), step=self.step, reason=self.reason, culprit=self.culprit)
            if program is not None:
                doc["stuck_op"] = program.stmts[self.step].op
                if self.culprit is not None:
                    doc["culprit_op"] = program.stmts[self.culprit].op
        return doc


def _family_index(families: Sequence[StructureFamily], types: Sequence[str]) -> list[StructureFamily]:
    by_type = {f.type_name: f for f in families}
    missing = [t for t in types if t not in by_type]
    if missing:
        raise IllFormedProgram(f"no family for type(s) {', '.join(missing)}")
    return [by_type[t] for t in sorted(types)]


def choices(p: Program, families: Sequence[StructureFamily], cap: int = 4096) -> tuple[list[str], list[list]]:
    types = p.types()
    fams = _family_index(families, types)
    total = 1
    for f in fams:
        total *= len(f)
    if total > cap:
        raise CapExceeded(f"{total} structure choices exceed cap {cap}")
    return [f.type_name for f in fams], [f.sorted_members() for f in fams]


def _run_chunk(args) -> tuple[int, int, Outcome | None, int]:
    p, names, combos, start, m0 = args
    checked = skipped = 0
    for k, combo in enumerate(combos):
        if not choice_admissible(combo):
            skipped += 1
            continue
        checked += 1
        out, _ = run(p, StructureChoice(dict(zip(names, combo))), m0)
        if out.stuck:
            return checked, skipped, out, start + k
    return checked, skipped, None, -1


def _workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, workers)
    try:
        return max(1, int(os.environ.get("UDTS_WORKERS", "1")))
    except ValueError:
        return 1


def verify(
    p: Program,
    families: Sequence[StructureFamily],
    m0: Memory | None = None,
    cap: int = 4096,
    *,
    workers: int | None = None,
) -> Verdict:
    """Verified iff ``p`` terminates under every admissible structure choice.

    Choices are enumerated lexicographically by (type name, member id); a
    failure reports the least failing choice.
    """
    names, pools = choices(p, families, cap)
    if m0 is None:
        radix = families[0].members[0].radix if families else 256
        top = max((d.addr for d in p.decls), default=0)
        m0 = fresh_memory(top + max((s.size for f in families for s in f), default=1), radix)
    combos = list(itertools.product(*pools))
    n = _workers(workers)
    if n == 1 or len(combos) < 2 * n:
        checked, skipped, out, _ = _run_chunk((p, names, combos, 0, m0))
        results = [(checked, skipped, out)]
    else:
        step = -(-len(combos) // n)
        chunks = [(p, names, combos[i : i + step], i, m0) for i in range(0, len(combos), step)]
        with ProcessPoolExecutor(max_workers=n) as pool:
            parts = list(pool.map(_run_chunk, chunks))
        # chunks are in choice order: the first failing chunk holds the least failing choice
        results = []
        for checked, skipped, out, _ in parts:
            results.append((checked, skipped, out))
            if out is not None:
                break
    checked = sum(r[0] for r in results)
    skipped = sum(r[1] for r in results)
    out = results[-1][2]
    if out is None:
        return Verdict(True, checked=checked, skipped=skipped)
    return Verdict(False, out.choice, out.step, out.reason, out.culprit, checked, skipped)


def replay(p: Program, verdict: Verdict, m0: Memory) -> Outcome:
    """Re-run a failing verdict's choice; the result must be stuck at the same step."""
    if verdict.verified or verdict.choice is None:
        raise ValueError("only failing verdicts can be replayed")
    out, _ = run(p, verdict.choice, m0)
    return out


# ------------------------------------------------------------------- JSON io


def stmt_to_json(st: Statement) -> dict:
    if isinstance(st, WriteTyped):
        return {"op": "write", "var": st.var, "value": st.value}
    if isinstance(st, ReadTyped):
        return {"op": "read", "var": st.var}
    if isinstance(st, ReadAs):
        return {"op": "read_as", "var": st.var, "type": st.other_type}
    if isinstance(st, ByteCopy):
        return {"op": "bytecopy", "dst": st.dst, "src": st.src, "n": st.n}
    if isinstance(st, HardwareEffect):
        return {"op": "hw", "mod": modification_to_json(st.mod)}
    if isinstance(st, AssertValue):
        return {"op": "assert", "var": st.var, "value": st.value}
    raise TypeError(st)


def program_to_json(p: Program) -> dict:
    decls = []
    for d in p.decls:
        doc: dict = {"var": d.var, "type": d.type_name, "addr": d.addr}
        if d.candidates is not None:
            doc["candidates"] = list(d.candidates)
        decls.append(doc)
    return {"decls": decls, "stmts": [stmt_to_json(st) for st in p.stmts]}


def _stmt_from_json(doc: Mapping) -> Statement:
    op = doc["op"]
    if op == "write":
        return WriteTyped(doc["var"], str(doc["value"]))
    if op == "read":
        return ReadTyped(doc["var"])
    if op == "read_as":
        return ReadAs(doc["var"], doc["type"])
    if op == "bytecopy":
        return ByteCopy(int(doc["dst"]), int(doc["src"]), int(doc["n"]))
    if op == "hw":
        return HardwareEffect(modification_from_json(doc["mod"]))
    if op == "assert":
        return AssertValue(doc["var"], str(doc["value"]))
    raise FormatError(f"unknown statement op {op!r}")


def program_from_json(doc: Mapping) -> Program:
    try:
        decls = []
        for d in doc["decls"]:
            cands = d.get("candidates")
            addr = d["addr"] if "addr" in d else cands[0]
            decls.append(Decl(d["var"], d["type"], int(addr), None if cands is None else tuple(map(int, cands))))
        stmts = [_stmt_from_json(s) for s in doc["stmts"]]
        return Program(tuple(decls), tuple(stmts))
    except (FormatError, IllFormedProgram):
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise FormatError(f"bad program document: {exc!r}") from exc


# ---------------------------------------------------------------- case study

CASE_RADIX = 4
CASE_MEMORY = 8
# protected bits live outside the 8 program cells; (2, 1) is a bit of a used
# cell and therefore always reached through the reserve-bit swap
CASE_FREE_BITS = (BitAddress(8, 0), BitAddress(8, 1))
CASE_RESERVE = BitAddress(8, 1)
CASE_BIT_TARGETS = (BitAddress(8, 0), BitAddress(2, 1))

# layout: current pointer, sender TCB (links, priority, message buffer),
# receiver TCB (same fields), local p
CUR, LINK_A, PRIO_A, MR_A, LINK_B, PRIO_B, MR_B, P = range(8)


def case_study_memory() -> Memory:
    return fresh_memory(CASE_MEMORY, CASE_RADIX, free_bits=CASE_FREE_BITS, reserve_bit=CASE_RESERVE)


def case_study_families(*, plain_tcb: bool = False) -> list[StructureFamily]:
    """Families for TCB (list links), TCB* and unsigned char."""
    if plain_tcb:
        tcb = StructureFamily(
            "TCB",
            (
                make_bool_pair(0, 1, CASE_RADIX, addresses=(LINK_A, LINK_B), sid="tcb_plain_01"),
                make_bool_pair(2, 3, CASE_RADIX, addresses=(LINK_A, LINK_B), sid="tcb_plain_23"),
            ),
        )
        tcb = _rename_values(tcb, {"true": "linked", "false": "unlinked"})
    else:
        tcb = make_protected_family(
            ("linked", "unlinked"),
            (LINK_A, LINK_B),
            CASE_BIT_TARGETS,
            radix=CASE_RADIX,
            type_name="TCB",
        )
    ptr = StructureFamily(
        "TCB*",
        (
            make_bool_pair(0, 1, CASE_RADIX, addresses=(CUR,), sid="ptr_01"),
            make_bool_pair(2, 3, CASE_RADIX, addresses=(CUR,), sid="ptr_23"),
        ),
    )
    ptr = _rename_values(ptr, {"true": "tcb_a", "false": "tcb_b"})
    uchar = StructureFamily("uchar", (make_uint(CASE_RADIX, sid="uchar"),))
    return [tcb, ptr, uchar]


def _rename_values(f: StructureFamily, names: Mapping[str, str]) -> StructureFamily:
    members = []
    for s in f.members:
        members.append(
            SemanticStructure(
                id=s.id,
                values=tuple(names[v] for v in s.values),
                addresses=s.addresses,
                size=s.size,
                radix=s.radix,
                variant=s.variant,
                encoder={names[v]: bl for v, bl in s.encoder.items()},
                decoder={bl: names[v] for bl, v in s.decoder.items()},
            )
        )
    return StructureFamily(f.type_name, tuple(members))


def build_case_study(buggy: bool = False, *, same_address: bool = False) -> Program:
    """Toy scheduler fragment: IPC copy, then preempting the receiver thread.

    The fixed program copies the sender's message buffer into the receiver's.
    The buggy one copies from the start of the sender TCB (its list links)
    onto the receiver's links instead.  With ``same_address`` the bug is a
    stale re-write: the receiver's own links are stashed in its message buffer
    and copied back after the thread was linked.
    """
    decls = (
        Decl("current", "TCB*", CUR),
        Decl("links_a", "TCB", LINK_A),
        Decl("prio_a", "uchar", PRIO_A),
        Decl("mr_a", "uchar", MR_A),
        Decl("links_b", "TCB", LINK_B),
        Decl("prio_b", "uchar", PRIO_B),
        Decl("mr_b", "uchar", MR_B),
        Decl("p", "uchar", P),
    )
    setup: list[Statement] = [
        WriteTyped("links_a", "linked"),
        WriteTyped("prio_a", "1"),
        WriteTyped("mr_a", "3"),
        WriteTyped("links_b", "unlinked"),
        WriteTyped("prio_b", "2"),
        WriteTyped("mr_b", "0"),
    ]
    if not buggy:
        ipc: list[Statement] = [ByteCopy(MR_B, MR_A, 1)]
    elif not same_address:
        ipc = [ByteCopy(LINK_B, LINK_A, 1)]
    else:
        ipc = [
            ByteCopy(MR_B, LINK_B, 1),
            WriteTyped("links_b", "linked"),
            ByteCopy(LINK_B, MR_B, 1),
        ]
    preempt: list[Statement] = [
        WriteTyped("current", "tcb_b"),
        ReadTyped("current"),
        ReadTyped("prio_b"),
        WriteTyped("p", "2"),
        # push_back reads the list links of the current TCB
        ReadTyped("links_b"),
        WriteTyped("links_b", "linked"),
    ]
    return Program(decls, tuple(setup + ipc + preempt))
