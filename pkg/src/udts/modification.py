"""Memory modifications: state transitions that overwrite an address range.

The payload records *how* the range was overwritten; the class tag records
which type-error class generated it.  Payloads carry the resulting byte data
so a modification replays without access to the structures it came from.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import ClassVar, Sequence, Union

from udts.errors import FormatError, OutOfRange
from udts.memory import UNKNOWN, Memory, bits_per_byte

Bytes = tuple[int, ...]
BitPos = tuple[int, int]  # (byte offset inside the range, bit index)


@dataclass(frozen=True)
class UnknownFill:
    kind: ClassVar[str] = "unknown"


@dataclass(frozen=True)
class ConstantFill:
    byte: int
    kind: ClassVar[str] = "constant"


@dataclass(frozen=True)
class RepresentationWrite:
    type_name: str
    structure_id: str
    value: str
    source_addr: int | None
    data: Bytes
    kind: ClassVar[str] = "representation"


@dataclass(frozen=True)
class Fragment:
    """One whole object representation inside a slice."""

    type_name: str
    structure_id: str
    value: str
    addr: int | None
    data: Bytes


@dataclass(frozen=True)
class SliceWrite:
    fragments: tuple[Fragment, ...]
    offset: int
    data: Bytes
    kind: ClassVar[str] = "slice"


@dataclass(frozen=True)
class BitCopy:
    """Some bits of a T representation stored at ``source_addr``.

    ``source`` is the representation under the structure that generated the
    copy; a run under another structure re-encodes ``value`` instead.
    """

    type_name: str
    structure_id: str
    value: str
    source_addr: int
    positions: tuple[BitPos, ...]
    source: Bytes
    kind: ClassVar[str] = "bitcopy"


Payload = Union[UnknownFill, ConstantFill, RepresentationWrite, SliceWrite, BitCopy]

_CLASS_PAYLOADS = {
    1: (UnknownFill,),
    2: (ConstantFill,),
    3: (RepresentationWrite,),
    4: (SliceWrite, RepresentationWrite),
    5: (BitCopy,),
}


@dataclass(frozen=True)
class MemoryModification:
    start: int
    stop: int
    payload: Payload
    class_tag: int

    def __post_init__(self) -> None:
        if self.class_tag not in _CLASS_PAYLOADS:
            raise ValueError(f"class tag {self.class_tag} not in 1..5")
        if not isinstance(self.payload, _CLASS_PAYLOADS[self.class_tag]):
            raise ValueError(f"class {self.class_tag} cannot carry a {self.payload.kind} payload")
        if not 0 <= self.start < self.stop:
            raise ValueError(f"bad target range [{self.start}, {self.stop})")
        data = getattr(self.payload, "data", None) or getattr(self.payload, "source", None)
        if data is not None and len(data) != len(self):
            raise ValueError("payload data does not match the target range")

    def __len__(self) -> int:
        return self.stop - self.start

    @property
    def target_range(self) -> range:
        return range(self.start, self.stop)

    def overlaps(self, a: int, n: int) -> bool:
        return a < self.stop and self.start < a + n


def merge_bits(old: int | object, new: int, bits: Sequence[int], width: int):
    """``old`` with the listed bit indices taken from ``new``.

    Returns ``UNKNOWN`` when some kept bit comes from an unknown byte.
    """
    if len(set(bits)) == width:
        return new
    if old is UNKNOWN:
        return UNKNOWN
    out = old
    for i in bits:
        out = (out & ~(1 << i)) | (new & (1 << i))
    return out


def written_cells(mod: MemoryModification, m: Memory, source: Bytes | None = None) -> list:
    """The cells the modification leaves in its target range of ``m``."""
    p = mod.payload
    n = len(mod)
    if isinstance(p, UnknownFill):
        return [UNKNOWN] * n
    if isinstance(p, ConstantFill):
        return [p.byte] * n
    if isinstance(p, (RepresentationWrite, SliceWrite)):
        return list(p.data)
    src = p.source if source is None else source
    width = bits_per_byte(m.radix)
    out = []
    for off in range(n):
        bits = [i for (o, i) in p.positions if o == off]
        old = m.cells[mod.start + off]
        out.append(merge_bits(old, src[off], bits, width) if bits else old)
    return out


def apply_modification(m: Memory, mod: MemoryModification, source: Bytes | None = None) -> Memory:
    if mod.stop > m.size:
        raise OutOfRange(f"modification [{mod.start}, {mod.stop}) outside memory of size {m.size}")
    cells = list(m.cells)
    new = written_cells(mod, m, source)
    for x in new:
        if x is not UNKNOWN and not 0 <= x < m.radix:
            raise ValueError(f"modification writes byte {x} outside [0, {m.radix})")
    cells[mod.start : mod.stop] = new
    return replace(m, cells=tuple(cells))


# ------------------------------------------------------------------- JSON io


def _frag_json(f: Fragment) -> dict:
    return {"type": f.type_name, "structure": f.structure_id, "value": f.value, "addr": f.addr, "data": list(f.data)}


def modification_to_json(mod: MemoryModification) -> dict:
    p = mod.payload
    body: dict = {"kind": p.kind}
    if isinstance(p, ConstantFill):
        body["byte"] = p.byte
    elif isinstance(p, RepresentationWrite):
        body.update(
            type=p.type_name, structure=p.structure_id, value=p.value, source_addr=p.source_addr, data=list(p.data)
        )
    elif isinstance(p, SliceWrite):
        body.update(fragments=[_frag_json(f) for f in p.fragments], offset=p.offset, data=list(p.data))
    elif isinstance(p, BitCopy):
        body.update(
            type=p.type_name,
            structure=p.structure_id,
            value=p.value,
            source_addr=p.source_addr,
            positions=[list(x) for x in p.positions],
            source=list(p.source),
        )
    return {"class": mod.class_tag, "range": [mod.start, mod.stop], "payload": body}


def modification_from_json(doc: dict) -> MemoryModification:
    try:
        start, stop = doc["range"]
        body = doc["payload"]
        kind = body["kind"]
        if kind == "unknown":
            p: Payload = UnknownFill()
        elif kind == "constant":
            p = ConstantFill(int(body["byte"]))
        elif kind == "representation":
            p = RepresentationWrite(
                body["type"], body["structure"], body["value"], body.get("source_addr"), tuple(body["data"])
            )
        elif kind == "slice":
            frags = tuple(
                Fragment(f["type"], f["structure"], f["value"], f.get("addr"), tuple(f["data"]))
                for f in body["fragments"]
            )
            p = SliceWrite(frags, int(body["offset"]), tuple(body["data"]))
        elif kind == "bitcopy":
            p = BitCopy(
                body["type"],
                body["structure"],
                body["value"],
                int(body["source_addr"]),
                tuple((int(o), int(i)) for o, i in body["positions"]),
                tuple(body["source"]),
            )
        else:
            raise FormatError(f"unknown payload kind {kind!r}")
        return MemoryModification(int(start), int(stop), p, int(doc["class"]))
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad modification document: {exc!r}") from exc
