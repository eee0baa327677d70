"""The five type-error classes as finite generators of memory modifications.

Each class is relative to one typed read: a reader structure for type T and
the address it reads at.  Generated modifications always target exactly the
read window ``[a, a + size)``.

1. unknown contents     4. slices of consecutive foreign representations
2. constant bytes       5. bit copies of T representations
3. a whole foreign representation (of a different type, same size)
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator, Sequence

from udts.errors import BoundExceeded
from udts.memory import bits_per_byte
from udts.modification import (
    BitCopy,
    ConstantFill,
    Fragment,
    MemoryModification,
    RepresentationWrite,
    SliceWrite,
    UnknownFill,
)
from udts.structures import SemanticStructure, StructureFamily, encode

CLASS_NAMES = {
    1: "unspecified memory contents",
    2: "constant byte values",
    3: "object representation of a different type",
    4: "parts of valid object representation(s)",
    5: "bitwise copy of valid object representations",
}


@dataclass(frozen=True)
class ClassContext:
    reader_structure: SemanticStructure
    read_address: int
    foreign_families: tuple[StructureFamily, ...] = ()
    reader_type: str = "T"
    # class 5: where the copied T objects live (default: every admissible address, read address first)
    copy_sources: tuple[int, ...] | None = None
    # class 4: most representations concatenated into one slice
    slice_bound: int = 2

    def __post_init__(self) -> None:
        if not self.reader_structure.admits(self.read_address):
            raise ValueError(f"{self.reader_structure.id} cannot read at address {self.read_address}")
        object.__setattr__(self, "foreign_families", tuple(self.foreign_families))

    @property
    def size(self) -> int:
        return self.reader_structure.size

    def sources(self) -> tuple[int, ...]:
        if self.copy_sources is not None:
            return tuple(self.copy_sources)
        a = self.read_address
        return (a,) + tuple(x for x in self.reader_structure.addresses if x != a)


def _place(s: SemanticStructure, v: str, addr: int) -> tuple[int, ...] | None:
    if not s.is_plain and (addr < 0 or not s.admits(addr)):
        return None
    return encode(s, v, None if s.is_plain else addr)[0]


def _representations(families: Sequence[StructureFamily]) -> list[tuple[str, SemanticStructure, str]]:
    return [(f.type_name, s, v) for f in families for s in f.sorted_members() for v in s.values]


def foreign_slices(
    families: Sequence[StructureFamily],
    size: int,
    a: int,
    *,
    reader_type: str,
    slice_bound: int,
) -> Iterator[SliceWrite]:
    """Slices of ``size`` bytes, placed at ``a``, of 1..slice_bound consecutive representations.

    Each slice starts inside its first representation and ends inside its last,
    so every concatenation is counted once.  A single representation must come
    from a type other than ``reader_type``.
    """
    reps = _representations(families)
    for k in range(1, slice_bound + 1):
        for seq in itertools.product(reps, repeat=k):
            if k == 1 and seq[0][0] == reader_type:
                continue
            sizes = [s.size for _, s, _ in seq]
            total = sum(sizes)
            for offset in range(sizes[0]):
                if offset + size > total or offset + size <= total - sizes[-1]:
                    continue
                frags = []
                addr = a - offset
                for t, s, v in seq:
                    data = _place(s, v, addr)
                    if data is None:
                        break
                    frags.append(Fragment(t, s.id, v, None if s.is_plain else addr, data))
                    addr += s.size
                else:
                    flat = tuple(x for f in frags for x in f.data)
                    yield SliceWrite(tuple(frags), offset, flat[offset : offset + size])


def bit_subsets(size: int, width: int) -> list[tuple[tuple[int, int], ...]]:
    """Non-empty sets of (byte offset, bit) positions, the full copy first."""
    positions = [(o, i) for o in range(size) for i in range(width)]
    out = []
    for k in range(len(positions), 0, -1):
        out.extend(itertools.combinations(positions, k))
    return out


def gen_modifications(cls: int, ctx: ClassContext, bound: int = 4096) -> list[MemoryModification]:
    """All modifications of class ``cls`` relative to the context's read."""
    s = ctx.reader_structure
    a, n = ctx.read_address, s.size
    out: list[MemoryModification] = []

    def emit(payload) -> None:
        out.append(MemoryModification(a, a + n, payload, cls))
        if len(out) > bound:
            raise BoundExceeded(f"class {cls} yields more than {bound} modifications")

    if cls == 1:
        emit(UnknownFill())
    elif cls == 2:
        for b in range(s.radix):
            emit(ConstantFill(b))
    elif cls == 3:
        for f in ctx.foreign_families:
            if f.type_name == ctx.reader_type:
                continue
            for su in f.sorted_members():
                if su.size != n:
                    continue
                for v in su.values:
                    data = _place(su, v, a)
                    if data is not None:
                        emit(RepresentationWrite(f.type_name, su.id, v, None if su.is_plain else a, data))
    elif cls == 4:
        for p in foreign_slices(
            ctx.foreign_families, n, a, reader_type=ctx.reader_type, slice_bound=ctx.slice_bound
        ):
            emit(p)
    elif cls == 5:
        width = bits_per_byte(s.radix)
        if s.radix != 1 << width:
            raise ValueError("bit copies need a power-of-two radix")
        subsets = bit_subsets(n, width)
        for src in ctx.sources():
            if not s.admits(src):
                continue
            for v in s.values:
                data = encode(s, v, None if s.is_plain else src)[0]
                for positions in subsets:
                    emit(BitCopy(ctx.reader_type, s.id, v, src, positions, data))
    else:
        raise ValueError(f"class {cls} not in 1..5")
    return out


def classify(mod: MemoryModification, ctx: ClassContext) -> set[int]:
    """Classes whose (unbounded) generator would produce ``mod``, judged by payload provenance."""
    p = mod.payload
    window = (mod.start, mod.stop) == (ctx.read_address, ctx.read_address + ctx.size)
    if isinstance(p, UnknownFill):
        return {1}
    if isinstance(p, ConstantFill):
        return {2}
    if isinstance(p, BitCopy):
        return {5}
    if isinstance(p, RepresentationWrite):
        if p.type_name == ctx.reader_type:
            return {5}
        if window and len(p.data) == ctx.size:
            return {3, 4}
        return {4}
    if isinstance(p, SliceWrite):
        out = {4}
        if len(p.fragments) == 1 and p.offset == 0 and window:
            (f,) = p.fragments
            if f.type_name != ctx.reader_type and len(f.data) == ctx.size:
                out.add(3)
        return out
    raise TypeError(f"unknown payload {p!r}")
