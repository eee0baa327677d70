"""Byte-granular memory with unknown cells and a protected-bit overlay.

Memories are immutable snapshots: every write returns a new ``Memory``.  A
cell is either a concrete byte (an ``int`` in ``[0, radix)``) or ``UNKNOWN``.

Bit-level accesses go through the overlay.  Writes to a bit address never
touch the byte cells, so a bytewise copy cannot see or carry a protected bit.
A read of a bit that was never written falls through to the underlying cell.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterable, NamedTuple, Sequence, Union

from udts.errors import FormatError, NoFreeBits, OutOfRange


class _Unknown(enum.Enum):
    UNKNOWN = "U"

    def __repr__(self) -> str:
        return "U"


UNKNOWN = _Unknown.UNKNOWN
Cell = Union[int, _Unknown]


def bits_per_byte(radix: int) -> int:
    if radix < 2:
        raise ValueError(f"radix must be >= 2, got {radix}")
    return (radix - 1).bit_length()


@dataclass(frozen=True)
class ByteSpace:
    radix: int = 256

    def __post_init__(self) -> None:
        bits_per_byte(self.radix)

    @property
    def bits_per_byte(self) -> int:
        return bits_per_byte(self.radix)

    def byte_values(self) -> range:
        return range(self.radix)

    def check(self, value: int) -> int:
        if not isinstance(value, int) or not 0 <= value < self.radix:
            raise ValueError(f"byte value {value!r} outside [0, {self.radix})")
        return value


class BitAddress(NamedTuple):
    byte_addr: int
    bit_index: int

    def __str__(self) -> str:
        return f"{self.byte_addr}.{self.bit_index}"


def as_bit_address(obj: Sequence[int]) -> BitAddress:
    byte_addr, bit_index = obj
    return BitAddress(int(byte_addr), int(bit_index))


@dataclass(frozen=True)
class Memory:
    radix: int
    cells: tuple[Cell, ...]
    free_bits: frozenset[BitAddress] = frozenset()
    reserve_bit: BitAddress | None = None
    overlay: dict[BitAddress, int] = field(default_factory=dict)
    # logical bit address -> physical bit address, installed by a reserve-bit swap
    redirect: dict[BitAddress, BitAddress] = field(default_factory=dict)

    def __post_init__(self) -> None:
        space = ByteSpace(self.radix)
        if not self.cells:
            raise ValueError("memory size must be positive")
        for c in self.cells:
            if c is not UNKNOWN:
                space.check(c)
        width = space.bits_per_byte
        for b in self.free_bits:
            if not 0 <= b.bit_index < width:
                raise ValueError(f"bit address {b} outside a {width}-bit byte")
        if self.free_bits and self.reserve_bit is None:
            object.__setattr__(self, "reserve_bit", min(self.free_bits))
        if self.free_bits and self.reserve_bit not in self.free_bits:
            raise ValueError("reserve bit must be one of the free bits")

    @property
    def size(self) -> int:
        return len(self.cells)

    @property
    def space(self) -> ByteSpace:
        return ByteSpace(self.radix)

    def __str__(self) -> str:
        return "[" + " ".join("U" if c is UNKNOWN else str(c) for c in self.cells) + "]"


def fresh_memory(
    size: int,
    radix: int = 256,
    *,
    free_bits: Iterable[BitAddress] = (),
    reserve_bit: BitAddress | None = None,
) -> Memory:
    """All-unknown memory: the 'arbitrary initial contents' starting state."""
    return Memory(
        radix=radix,
        cells=(UNKNOWN,) * size,
        free_bits=frozenset(as_bit_address(b) for b in free_bits),
        reserve_bit=None if reserve_bit is None else as_bit_address(reserve_bit),
    )


def _check_range(m: Memory, a: int, n: int) -> None:
    if a < 0 or n < 0 or a + n > m.size:
        raise OutOfRange(f"[{a}, {a + n}) outside memory of size {m.size}")


def mem_read(m: Memory, a: int, n: int) -> list[Cell]:
    if n < 1:
        raise ValueError("read length must be positive")
    _check_range(m, a, n)
    return list(m.cells[a : a + n])


def mem_write(m: Memory, a: int, bl: Sequence[Cell]) -> Memory:
    _check_range(m, a, len(bl))
    if a >= m.size:
        raise OutOfRange(f"address {a} outside memory of size {m.size}")
    if not bl:
        return m
    cells = list(m.cells)
    cells[a : a + len(bl)] = bl
    return replace(m, cells=tuple(cells))


def modified_at(m: Memory, m2: Memory, a: int) -> bool:
    """True unless both cells at ``a`` are concrete and equal."""
    if m.size != m2.size:
        raise ValueError("memories differ in size")
    if not 0 <= a < m.size:
        raise OutOfRange(f"address {a} outside memory of size {m.size}")
    x, y = m.cells[a], m2.cells[a]
    return x is UNKNOWN or y is UNKNOWN or x != y


def _physical(m: Memory, b: BitAddress) -> BitAddress:
    return m.redirect.get(b, b)


def bit_rw(m: Memory, b: BitAddress, new: int | None = None) -> tuple[int | None, Memory]:
    """Read the bit at ``b`` and optionally store ``new`` there.

    Returns the bit as it was before the write (``None`` when unknown) and the
    resulting memory.
    """
    b = as_bit_address(b)
    width = bits_per_byte(m.radix)
    if not 0 <= b.bit_index < width:
        raise OutOfRange(f"bit index {b.bit_index} outside a {width}-bit byte")
    phys = _physical(m, b)
    if phys in m.overlay:
        old = m.overlay[phys]
    elif 0 <= phys.byte_addr < m.size:
        cell = m.cells[phys.byte_addr]
        old = None if cell is UNKNOWN else (cell >> phys.bit_index) & 1
    elif phys in m.free_bits:
        old = None
    else:
        raise OutOfRange(f"bit address {phys} is neither in memory nor free")
    if new is None:
        return old, m
    if new not in (0, 1):
        raise ValueError(f"bit must be 0 or 1, got {new!r}")
    overlay = dict(m.overlay)
    overlay[phys] = new
    return old, replace(m, overlay=overlay)


def resolve_protected_bit(m: Memory, requested: BitAddress) -> BitAddress:
    """Where a protected bit requested at ``requested`` physically lives."""
    if not m.free_bits:
        raise NoFreeBits("no free bit addresses configured")
    requested = as_bit_address(requested)
    if requested in m.free_bits:
        return requested
    assert m.reserve_bit is not None
    return m.reserve_bit


def install_protected_bit(m: Memory, requested: BitAddress) -> Memory:
    """Fix the reserve-bit swap for ``requested`` for the rest of a session.

    When ``requested`` is already free nothing changes.  Otherwise accesses to
    ``requested`` and to the reserve bit are exchanged from now on, which makes
    the swap invisible to every client using logical bit addresses.
    """
    phys = resolve_protected_bit(m, requested)
    requested = as_bit_address(requested)
    if phys == requested:
        return m
    redirect = dict(m.redirect)
    redirect[requested] = phys
    redirect[phys] = requested
    return replace(m, redirect=redirect)


def memory_to_json(m: Memory) -> dict:
    doc: dict = {
        "radix": m.radix,
        "size": m.size,
        "cells": ["U" if c is UNKNOWN else c for c in m.cells],
        "overlay": [[b.byte_addr, b.bit_index, v] for b, v in sorted(m.overlay.items())],
        "reserve": None if m.reserve_bit is None else list(m.reserve_bit),
        "free_bits": [list(b) for b in sorted(m.free_bits)],
    }
    if m.redirect:
        doc["redirect"] = [[list(k), list(v)] for k, v in sorted(m.redirect.items())]
    return doc


def memory_from_json(doc: dict) -> Memory:
    try:
        cells = tuple(UNKNOWN if c == "U" else int(c) for c in doc["cells"])
        if "size" in doc and doc["size"] != len(cells):
            raise FormatError("size does not match the number of cells")
        reserve = doc.get("reserve")
        return Memory(
            radix=int(doc["radix"]),
            cells=cells,
            free_bits=frozenset(as_bit_address(b) for b in doc.get("free_bits", [])),
            reserve_bit=None if reserve is None else as_bit_address(reserve),
            overlay={BitAddress(int(x), int(i)): int(v) for x, i, v in doc.get("overlay", [])},
            redirect={as_bit_address(k): as_bit_address(v) for k, v in doc.get("redirect", [])},
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"bad memory document: {exc}") from exc
