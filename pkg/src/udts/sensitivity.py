"""Visibility, the sufficient lemma conditions, and a brute-force sensitivity oracle.

The oracle works per generated modification.  Modifications sit at fixed
addresses chosen before any structure is; the bytes around the modified range
and any stale protected bits form the *context*.  A modification is detected
when, for every context, some read event (a family member together with an
address whose window overlaps the modified range) gets stuck.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from udts.error_classes import ClassContext, foreign_slices, gen_modifications
from udts.errors import BoundExceeded, SizeMismatch
from udts.memory import UNKNOWN, BitAddress, Memory, bits_per_byte
from udts.modification import (
    BitCopy,
    MemoryModification,
    merge_bits,
    modification_to_json,
    written_cells,
)
from udts.structures import (
    SemanticStructure,
    StructureChoice,
    StructureFamily,
    encode,
    equivalent,
    structure_to_json,
    undefined_somewhere,
)

Members = Union[StructureFamily, Iterable[SemanticStructure]]

UNIVERSE_BOUND = 4096


def _members(f: Members) -> list[SemanticStructure]:
    if isinstance(f, StructureFamily):
        return f.sorted_members()
    return sorted(f, key=lambda s: s.id)


def _check_universe(members: Sequence[SemanticStructure], bound: int = UNIVERSE_BOUND) -> None:
    for s in members:
        if s.radix**s.size > bound:
            raise BoundExceeded(f"{s.id}: {s.radix}^{s.size} byte lists exceed bound {bound}")


def _key(s: SemanticStructure, a: int) -> int | None:
    return None if s.is_plain else a


def _pbits(s: SemanticStructure, a: int) -> tuple[int | None, ...]:
    return (0, 1) if s.protected_at(a) is not None else (None,)


def visible(a: int, s: SemanticStructure) -> bool:
    return any(x <= a < x + s.size for x in s.addresses)


def visible_in_family(a: int, f: Members) -> bool:
    return any(visible(a, s) for s in _members(f))


def _covering(members: Sequence[SemanticStructure], lo: int, hi: int, addr_bound: int):
    """(structure, window start) pairs whose window overlaps ``[lo, hi)``."""
    for s in members:
        for x in s.addresses:
            if x < addr_bound and x < hi and lo < x + s.size:
                yield s, x


def _always_undefined(s: SemanticStructure, x: int, fixed: dict[int, int]) -> bool:
    """Undefined at window ``x`` for every filling of the unfixed positions and every bit."""
    free = [i for i in range(s.size) if i not in fixed]
    window = [fixed.get(i, 0) for i in range(s.size)]
    for fill in itertools.product(range(s.radix), repeat=len(free)):
        for i, b in zip(free, fill):
            window[i] = b
        for pb in _pbits(s, x):
            if not undefined_somewhere(s, window, _key(s, x), (pb,)):
                return False
    return True


@dataclass(frozen=True)
class LemmaReport:
    lemma: int
    holds: bool
    counterexample: dict | None = None
    checked: int = 0

    def to_json(self) -> dict:
        return {
            "lemma": self.lemma,
            "holds": self.holds,
            "counterexample": self.counterexample,
            "checked": self.checked,
        }


def _lemma12(f: Members, addr_bound: int, lemma: int) -> LemmaReport:
    members = _members(f)
    _check_universe(members)
    checked = 0
    for a in range(addr_bound):
        if not any(visible(a, s) for s in members):
            continue
        checked += 1
        covers = list(_covering(members, a, a + 1, addr_bound))
        if lemma == 1:
            ok = any(_some_byte_always(s, x, a - x) for s, x in covers)
            if not ok:
                return LemmaReport(1, False, {"address": a}, checked)
        else:
            radix = members[0].radix
            for b in range(radix):
                if not any(_always_undefined(s, x, {a - x: b}) for s, x in covers if b < s.radix):
                    return LemmaReport(2, False, {"address": a, "byte": b}, checked)
    return LemmaReport(lemma, True, None, checked)


def _some_byte_always(s: SemanticStructure, x: int, pos: int) -> bool:
    """For all other bytes and bits, some byte at ``pos`` leaves the window undefined."""
    others = [i for i in range(s.size) if i != pos]
    window = [0] * s.size
    for fill in itertools.product(range(s.radix), repeat=len(others)):
        for i, b in zip(others, fill):
            window[i] = b
        for pb in _pbits(s, x):
            hit = False
            for b in range(s.radix):
                window[pos] = b
                if undefined_somewhere(s, window, _key(s, x), (pb,)):
                    hit = True
                    break
            if not hit:
                return False
    return True


def check_lemma1(f: Members, addr_bound: int = 8) -> LemmaReport:
    """Every visible address has a covering window that some byte there makes undefined."""
    return _lemma12(f, addr_bound, 1)


def check_lemma2(f: Members, addr_bound: int = 8) -> LemmaReport:
    """Every byte value at every visible address is rejected by some covering window."""
    return _lemma12(f, addr_bound, 2)


def _foreign_list(fu) -> list[StructureFamily]:
    if isinstance(fu, StructureFamily):
        return [fu]
    return list(fu)


def _foreign_reps(sT: SemanticStructure, a: int, fams: Sequence[StructureFamily], reader_type: str):
    for f in fams:
        if f.type_name == reader_type:
            continue
        for su in f.sorted_members():
            if su.size != sT.size:
                continue
            for v in su.values:
                if su.is_plain:
                    yield f"{f.type_name}:{su.id}:{v}", encode(su, v)[0]
                elif su.admits(a):
                    yield f"{f.type_name}:{su.id}:{v}@{a}", encode(su, v, a)[0]


def check_lemma3(
    ft: StructureFamily,
    fu: StructureFamily | Sequence[StructureFamily],
    addr_bound: int = 8,
    *,
    slices: bool = False,
    slice_bound: int = 2,
) -> LemmaReport:
    """Every foreign representation placed at an admissible T address is rejected.

    With ``slices`` the foreign representations widen to slices of up to
    ``slice_bound`` consecutive representations.
    """
    members = _members(ft)
    fams = _foreign_list(fu)
    _check_universe(members)
    t_sizes = {s.size for s in members}
    if not slices:
        for f in fams:
            for su in f:
                if su.size not in t_sizes:
                    raise SizeMismatch(f"{su.id} has size {su.size}, no member of {ft.type_name} does")
    checked = 0
    for sT in members:
        for a in sT.addresses:
            if a >= addr_bound:
                continue
            if slices:
                reps = (
                    (_slice_label(p), p.data)
                    for p in foreign_slices(fams, sT.size, a, reader_type=ft.type_name, slice_bound=slice_bound)
                )
            else:
                reps = _foreign_reps(sT, a, fams, ft.type_name)
            for label, u in reps:
                checked += 1
                lo, hi = a, a + len(u)
                ok = False
                for s, x in _covering(members, lo, hi, addr_bound):
                    fixed = {i - x: u[i - lo] for i in range(max(lo, x), min(hi, x + s.size))}
                    if _always_undefined(s, x, fixed):
                        ok = True
                        break
                if not ok:
                    cex = {"structure": sT.id, "address": a, "representation": label, "bytes": list(u)}
                    return LemmaReport(3, False, cex, checked)
    return LemmaReport(3, True, None, checked)


def _slice_label(p) -> str:
    parts = [f"{f.type_name}:{f.structure_id}:{f.value}" for f in p.fragments]
    return "+".join(parts) + f"[{p.offset}:]"


def check_lemma4(f: Members, addr_bound: int = 8) -> LemmaReport:
    """Every bit copy of a T representation is rejected by some equivalent member.

    The copied bits are re-encoded by the detecting member; bits not copied
    keep their old (arbitrary) value, and the detecting member's protected
    bit holds an arbitrary stale value.
    """
    members = _members(f)
    _check_universe(members)
    checked = 0
    for s in members:
        width = bits_per_byte(s.radix)
        if s.radix != 1 << width:
            raise ValueError("bit copies need a power-of-two radix")
        positions = [(o, i) for o in range(s.size) for i in range(width)]
        subsets = [c for k in range(len(positions), 0, -1) for c in itertools.combinations(positions, k)]
        peers = [t for t in members if equivalent(s, t)]
        sources: list[int | None] = [None] if s.is_plain else list(s.addresses)
        for a in s.addresses:
            if a >= addr_bound:
                continue
            locs = sorted({b for t in peers if (b := t.protected_at(a)) is not None})
            for v in s.values:
                for src in sources:
                    reps = {t.id: encode(t, v, src)[0] for t in peers}
                    for subset in subsets:
                        for old in itertools.product(range(s.radix), repeat=s.size):
                            for stale in itertools.product((0, 1), repeat=len(locs)):
                                checked += 1
                                bits = dict(zip(locs, stale))
                                if not _some_peer_rejects(peers, a, reps, subset, old, bits, width):
                                    cex = {
                                        "structure": s.id,
                                        "address": a,
                                        "value": v,
                                        "source": src,
                                        "positions": [list(p) for p in subset],
                                        "old": list(old),
                                        "stale_bits": [[list(b), x] for b, x in bits.items()],
                                    }
                                    return LemmaReport(4, False, cex, checked)
    return LemmaReport(4, True, None, checked)


def _some_peer_rejects(peers, a, reps, subset, old, bits, width) -> bool:
    for t in peers:
        rep = reps[t.id]
        window = [
            merge_bits(old[o], rep[o], [i for (q, i) in subset if q == o], width)
            if any(q == o for q, _ in subset)
            else old[o]
            for o in range(t.size)
        ]
        b = t.protected_at(a)
        pb = bits[b] if b is not None else None
        if undefined_somewhere(t, window, _key(t, a), (pb,)):
            return True
    return False


# --------------------------------------------------------------------- oracle


@dataclass(frozen=True)
class ReadEvent:
    structure: SemanticStructure
    address: int

    def to_json(self) -> dict:
        return {"structure": self.structure.id, "address": self.address}


@dataclass(frozen=True)
class Witness:
    mod_index: int
    mod: MemoryModification
    cells: dict[int, int]
    bits: dict[BitAddress, int]
    events: tuple[ReadEvent, ...]
    type_name: str

    @property
    def read(self) -> ReadEvent:
        return self.events[0]

    def choice(self, event: ReadEvent | None = None) -> StructureChoice:
        return StructureChoice({self.type_name: (event or self.read).structure})

    def to_json(self) -> dict:
        seen: dict[str, SemanticStructure] = {}
        for e in self.events:
            seen.setdefault(e.structure.id, e.structure)
        return {
            "mod_index": self.mod_index,
            "modification": modification_to_json(self.mod),
            "context": {
                "cells": [[a, b] for a, b in sorted(self.cells.items())],
                "bits": [[list(b), x] for b, x in sorted(self.bits.items())],
            },
            "read": self.read.to_json(),
            "choice": self.choice().to_json(),
            "events": [e.to_json() for e in self.events],
            "structures": [structure_to_json(seen[k]) for k in sorted(seen)],
        }


@dataclass(frozen=True)
class SensitivityVerdict:
    sensitive: bool
    cls: int
    witness: Witness | None = None
    modifications: int = 0
    vacuous: int = 0  # modifications no read event can see

    def __post_init__(self) -> None:
        if self.sensitive == (self.witness is not None):
            raise ValueError("a witness is present exactly when the result is NotSensitive")

    def to_json(self) -> dict:
        doc: dict = {
            "result": "Sensitive" if self.sensitive else "NotSensitive",
            "class": self.cls,
            "modifications": self.modifications,
            "vacuous": self.vacuous,
        }
        if self.witness is not None:
            doc["witness"] = self.witness.to_json()
        return doc


def _reader_family(families: Sequence[StructureFamily], ctx: ClassContext) -> StructureFamily:
    for f in families:
        if f.type_name == ctx.reader_type:
            return f
    if len(families) == 1:
        return families[0]
    raise ValueError(f"no family for reader type {ctx.reader_type!r}")


def read_events(family: StructureFamily, mod: MemoryModification) -> list[ReadEvent]:
    """Reads of the family's type whose window overlaps the modified range, least first."""
    out = []
    p = mod.payload
    for s in family.sorted_members():
        if isinstance(p, BitCopy) and (not s.admits(p.source_addr) or s.size != len(mod)):
            continue
        for x in s.addresses:
            if mod.overlaps(x, s.size):
                out.append(ReadEvent(s, x))
    out.sort(key=lambda e: (e.address, e.structure.id))
    return out


def _context_space(mod: MemoryModification, events: Sequence[ReadEvent]):
    addrs: set[int] = set()
    for e in events:
        addrs.update(range(e.address, e.address + e.structure.size))
    if not isinstance(mod.payload, BitCopy):
        addrs -= set(mod.target_range)
    else:
        addrs |= set(mod.target_range)
    locs = sorted({b for e in events if (b := e.structure.protected_at(e.address)) is not None})
    return sorted(addrs), locs


def _event_stuck(e: ReadEvent, mod: MemoryModification, cells: dict[int, int], bits: dict) -> bool:
    s, x = e.structure, e.address
    hi = max(x + s.size, mod.stop)
    m = Memory(s.radix, tuple(cells.get(i, UNKNOWN) for i in range(hi)))
    source = None
    p = mod.payload
    if isinstance(p, BitCopy):
        source = encode(s, p.value, None if s.is_plain else p.source_addr)[0]
    written = written_cells(mod, m, source)
    window = []
    for i in range(x, x + s.size):
        window.append(written[i - mod.start] if mod.start <= i < mod.stop else cells[i])
    b = s.protected_at(x)
    pb = bits[b] if b is not None else None
    return undefined_somewhere(s, window, _key(s, x), (pb,))


def type_sensitive_bruteforce(
    families: Sequence[StructureFamily] | StructureFamily,
    cls: int,
    ctx: ClassContext,
    bound: int = 4096,
) -> SensitivityVerdict:
    """Sensitive iff every generated modification of ``cls`` is detected in every context.

    Returns the least undetected modification (by generation index) with its
    context and read events otherwise.
    """
    if isinstance(families, StructureFamily):
        families = [families]
    fam = _reader_family(list(families), ctx)
    _check_universe(fam.members)
    mods = gen_modifications(cls, ctx, bound)
    vacuous = 0
    budget = bound * 64
    for k, mod in enumerate(mods):
        events = read_events(fam, mod)
        if not events:
            vacuous += 1
            continue
        addrs, locs = _context_space(mod, events)
        radix = events[0].structure.radix
        if radix ** len(addrs) * 2 ** len(locs) > budget:
            raise BoundExceeded(f"{radix}^{len(addrs)} contexts for modification {k} exceed the bound")
        for fill in itertools.product(range(radix), repeat=len(addrs)):
            cells = dict(zip(addrs, fill))
            for stale in itertools.product((0, 1), repeat=len(locs)):
                bits = dict(zip(locs, stale))
                if not any(_event_stuck(e, mod, cells, bits) for e in events):
                    w = Witness(k, mod, cells, bits, tuple(events), fam.type_name)
                    return SensitivityVerdict(False, cls, w, len(mods), vacuous)
    return SensitivityVerdict(True, cls, None, len(mods), vacuous)


# --------------------------------------------------------------------- replay


def witness_memory(w: Witness) -> Memory:
    """Concrete context around the modification; stale protected bits live in the overlay."""
    s0 = w.events[0].structure
    top = max([w.mod.stop] + [e.address + e.structure.size for e in w.events])
    cells = tuple(w.cells.get(i, UNKNOWN) for i in range(top))
    locs = set(w.bits)
    for e in w.events:
        locs.update(e.structure.protected_bit.values())
    free = frozenset(locs)
    return Memory(s0.radix, cells, free, min(free) if free else None, dict(w.bits))


def replay_witness(w: Witness):
    """Run every read event of the witness through the interpreter.

    Each run writes the modification as a hardware effect and reads the
    window; an undetected modification terminates normally in every run.
    """
    from udts.interp import Decl, HardwareEffect, Program, ReadTyped, run

    m0 = witness_memory(w)
    out = []
    for e in w.events:
        prog = Program((Decl("x", w.type_name, e.address),), (HardwareEffect(w.mod), ReadTyped("x")))
        outcome, _ = run(prog, w.choice(e), m0)
        out.append((e, outcome))
    return out
