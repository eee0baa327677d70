"""Semantic structures: one admissible compiler encoding of a type's values.

A structure bundles a value set, the addresses an object may live at, the
encoding size, an encoder and a *partial* decoder.  Three variants exist:

``plain``
    encoding independent of the address.
``address_dependent``
    encoder and decoder take the object address.
``external_state``
    like ``address_dependent``, plus at most one address whose objects carry
    an extra bit stored outside the object bytes (see ``protected_bit``).

Tables are extensional: the encoder maps ``value`` (plain) or
``(addr, value)`` to a byte tuple, the decoder maps ``bytes`` or
``(addr, bytes)`` back to a value.  A missing decoder key means the decoder is
undefined there.  For large radices the decoder may instead be a callable
``(bytes, addr) -> value | None``.
"""

from __future__ import annotations

import enum
import itertools
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence, Union

from udts.errors import (
    AddressNotAligned,
    BoundExceeded,
    EmptyInput,
    EqualPair,
    FormatError,
    LengthMismatch,
    NoUndefinedRep,
    ValueNotInV,
)
from udts.memory import UNKNOWN, BitAddress, as_bit_address, bits_per_byte

PLAIN = "plain"
ADDRESS_DEPENDENT = "address_dependent"
EXTERNAL_STATE = "external_state"
VARIANTS = (PLAIN, ADDRESS_DEPENDENT, EXTERNAL_STATE)

DEFAULT_ADDRESSES = tuple(range(8))

Bytes = tuple[int, ...]


class _Undefined(enum.Enum):
    UNDEFINED = "undefined"

    def __repr__(self) -> str:
        return "UNDEFINED"

    def __bool__(self) -> bool:
        return False


UNDEFINED = _Undefined.UNDEFINED

DecoderFn = Callable[[Bytes, Union[int, None]], Union[str, None]]


@dataclass(frozen=True, eq=False)
class SemanticStructure:
    id: str
    values: tuple[str, ...]
    addresses: tuple[int, ...]
    size: int
    radix: int
    variant: str
    encoder: Mapping
    decoder: Union[Mapping, DecoderFn]
    protected_bit: Mapping[int, BitAddress] = field(default_factory=dict)
    # bit returned by the encoder at a protected address, keyed (addr, value)
    protected_bits: Mapping[tuple[int, str], int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        object.__setattr__(self, "addresses", tuple(sorted(set(self.addresses))))
        object.__setattr__(self, "values", tuple(self.values))

    # identity is by id; families may hold extensionally equal members
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SemanticStructure):
            return NotImplemented
        return self.id == other.id

    def __hash__(self) -> int:
        return hash(self.id)

    def __repr__(self) -> str:
        return f"<{self.variant} structure {self.id} size={self.size} A={list(self.addresses)}>"

    @property
    def is_plain(self) -> bool:
        return self.variant == PLAIN

    @property
    def extensional(self) -> bool:
        return not callable(self.decoder)

    def admits(self, a: int) -> bool:
        return a in self._address_set

    @property
    def _address_set(self) -> frozenset[int]:
        cached = self.__dict__.get("_aset")
        if cached is None:
            cached = frozenset(self.addresses)
            object.__setattr__(self, "_aset", cached)
        return cached

    def protected_at(self, a: int) -> BitAddress | None:
        return self.protected_bit.get(a)

    def domain(self, a: int | None = None) -> list[Bytes]:
        """Byte lists the decoder accepts (at ``a``), in lexicographic order."""
        key = None if self.is_plain else a
        return [bl for bl in all_byte_lists(self.radix, self.size) if _lookup(self, bl, key) is not None]


def all_byte_lists(radix: int, size: int) -> Iterator[Bytes]:
    return itertools.product(range(radix), repeat=size)


def _lookup(s: SemanticStructure, bl: Bytes, a: int | None) -> str | None:
    if callable(s.decoder):
        return s.decoder(bl, a)
    return s.decoder.get(bl if a is None else (a, bl))


def encode(s: SemanticStructure, v: str, a: int | None = None) -> tuple[Bytes, int]:
    """Object representation of ``v`` (at ``a``) and the protected bit.

    The bit is a dummy 0 unless ``s`` protects address ``a``.
    """
    if v not in s.values:
        raise ValueNotInV(f"{v!r} is not a value of {s.id}")
    if s.is_plain:
        return tuple(s.encoder[v]), 0
    if a is None or not s.admits(a):
        raise AddressNotAligned(f"{s.id} cannot hold objects at address {a}")
    bl = tuple(s.encoder[(a, v)])
    bit = s.protected_bits.get((a, v), 0) if a in s.protected_bit else 0
    return bl, bit


def decode(
    s: SemanticStructure,
    bl: Sequence[int],
    a: int | None = None,
    pbit: int | None = None,
):
    """Decoded value, or ``UNDEFINED`` outside the decoder's domain."""
    bl = tuple(bl)
    if len(bl) != s.size:
        raise LengthMismatch(f"{s.id} decodes {s.size} bytes, got {len(bl)}")
    if s.is_plain:
        v = _lookup(s, bl, None)
        return UNDEFINED if v is None else v
    if a is None or not s.admits(a):
        raise AddressNotAligned(f"{s.id} cannot hold objects at address {a}")
    v = _lookup(s, bl, a)
    if v is None:
        return UNDEFINED
    if a in s.protected_bit:
        if pbit is None:
            raise ValueError(f"{s.id} needs the protected bit to decode at {a}")
        if pbit != s.protected_bits.get((a, v), 0):
            return UNDEFINED
    return v


def undefined_somewhere(
    s: SemanticStructure,
    cells: Sequence,
    a: int | None = None,
    pbits: Sequence[int | None] = (None,),
) -> bool:
    """True when some completion of the unknown cells (with some bit in ``pbits``) decodes to ``UNDEFINED``."""
    holes = [i for i, c in enumerate(cells) if c is UNKNOWN]
    window = list(cells)
    for fill in itertools.product(range(s.radix), repeat=len(holes)):
        for i, x in zip(holes, fill):
            window[i] = x
        for pb in pbits:
            if decode(s, window, a, pb) is UNDEFINED:
                return True
    return False


@dataclass(frozen=True)
class Violation:
    kind: str
    detail: str

    def to_json(self) -> dict:
        return {"kind": self.kind, "detail": self.detail}


def check_wellformed(s: SemanticStructure) -> list[Violation]:
    """Every violated side condition of a semantic structure (empty when ok).

    Checks positivity of size, non-empty values, the length law, the
    left-inverse law (with address and protected bit where applicable) and the
    at-most-one-protected-address rule, by exhausting values x addresses.
    """
    out: list[Violation] = []
    if s.size < 1:
        out.append(Violation("size", f"size {s.size} is not positive"))
    if not s.values:
        out.append(Violation("values", "value set is empty"))
    if len(set(s.values)) != len(s.values):
        out.append(Violation("values", "duplicate values"))
    if len(s.protected_bit) > 1:
        out.append(Violation("protected_bit", f"defined for {len(s.protected_bit)} addresses"))
    if s.protected_bit and s.variant != EXTERNAL_STATE:
        out.append(Violation("protected_bit", f"{s.variant} structure declares a protected bit"))
    for a in s.protected_bit:
        if not s.admits(a):
            out.append(Violation("protected_bit", f"protected address {a} is not in A"))
    width = bits_per_byte(s.radix)
    for b in s.protected_bit.values():
        if not 0 <= b.bit_index < width:
            out.append(Violation("protected_bit", f"bit address {b} outside a {width}-bit byte"))
    if out and any(v.kind == "size" for v in out):
        return out
    keys: list[int | None] = [None] if s.is_plain else list(s.addresses)
    for a in keys:
        for v in s.values:
            where = f"{v!r}" if a is None else f"{v!r} at {a}"
            try:
                bl, bit = encode(s, v, a)
            except (KeyError, ValueNotInV, AddressNotAligned):
                out.append(Violation("encode", f"no encoding for {where}"))
                continue
            if len(bl) != s.size:
                out.append(Violation("length", f"encoding of {where} has length {len(bl)}"))
                continue
            if any(not 0 <= x < s.radix for x in bl):
                out.append(Violation("radix", f"encoding of {where} leaves [0, {s.radix})"))
                continue
            back = decode(s, bl, a, bit)
            if back != v:
                out.append(Violation("left-inverse", f"decode(encode({where})) = {back!r}"))
    return out


@dataclass(frozen=True)
class StructureFamily:
    """The admissible structures for one type; verification quantifies over them."""

    type_name: str
    members: tuple[SemanticStructure, ...]
    common_values: tuple[str, ...] | None = None

    def __post_init__(self) -> None:
        members = tuple(self.members)
        if not members:
            raise EmptyInput(f"family {self.type_name!r} has no members")
        ids = [s.id for s in members]
        if len(set(ids)) != len(ids):
            raise ValueError(f"family {self.type_name!r} has duplicate member ids")
        object.__setattr__(self, "members", members)
        common = set(members[0].values).intersection(*(s.values for s in members[1:]))
        if self.common_values is None:
            object.__setattr__(self, "common_values", tuple(v for v in members[0].values if v in common))
        elif not set(self.common_values) <= common:
            raise ValueError("common values must be representable by every member")

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[SemanticStructure]:
        return iter(self.members)

    def sorted_members(self) -> list[SemanticStructure]:
        return sorted(self.members, key=lambda s: s.id)

    def member(self, sid: str) -> SemanticStructure:
        for s in self.members:
            if s.id == sid:
                return s
        raise KeyError(sid)

    def violations(self) -> dict[str, list[Violation]]:
        return {s.id: v for s in self.members if (v := check_wellformed(s))}


@dataclass(frozen=True)
class StructureChoice:
    """One fixed structure per type; at most one of them may use a protected bit."""

    assignment: Mapping[str, SemanticStructure]

    def __post_init__(self) -> None:
        if not choice_admissible(self.assignment.values()):
            raise ValueError("at most one chosen structure may define a protected bit")

    def __getitem__(self, type_name: str) -> SemanticStructure:
        return self.assignment[type_name]

    def __contains__(self, type_name: str) -> bool:
        return type_name in self.assignment

    def protected(self) -> tuple[str, SemanticStructure] | None:
        for t, s in self.assignment.items():
            if s.protected_bit:
                return t, s
        return None

    def to_json(self) -> dict[str, str]:
        return {t: s.id for t, s in sorted(self.assignment.items())}


def choice_admissible(structures: Iterable[SemanticStructure]) -> bool:
    return sum(1 for s in structures if s.protected_bit) <= 1


def equivalent(s1: SemanticStructure, s2: SemanticStructure) -> bool:
    """Structures differing at most in their conversion functions."""
    return (
        set(s1.values) == set(s2.values)
        and s1.addresses == s2.addresses
        and s1.size == s2.size
        and s1.variant == s2.variant
    )


# ---------------------------------------------------------------- constructors


def _int_to_bytes(n: int, radix: int, size: int) -> Bytes:
    out = []
    for _ in range(size):
        n, r = divmod(n, radix)
        out.append(r)
    return tuple(reversed(out))


def make_plain(
    sid: str,
    encoding: Mapping[str, Sequence[int]],
    *,
    radix: int,
    addresses: Iterable[int] = DEFAULT_ADDRESSES,
    decoding: Mapping[Bytes, str] | DecoderFn | None = None,
    size: int | None = None,
) -> SemanticStructure:
    """Plain structure; the decoder defaults to the inverse of ``encoding``."""
    enc = {v: tuple(bl) for v, bl in encoding.items()}
    if size is None:
        size = len(next(iter(enc.values()))) if enc else 0
    if decoding is None:
        decoding = {bl: v for v, bl in enc.items()}
    elif not callable(decoding):
        decoding = {tuple(bl): v for bl, v in decoding.items()}
    return SemanticStructure(
        id=sid,
        values=tuple(enc),
        addresses=tuple(addresses),
        size=size,
        radix=radix,
        variant=PLAIN,
        encoder=enc,
        decoder=decoding,
    )


def make_bool_total(radix: int = 256, *, addresses: Iterable[int] = DEFAULT_ADDRESSES) -> SemanticStructure:
    """GCC-style bool: false is [0], true is [1], every other byte reads as true."""
    bits_per_byte(radix)

    def dec(bl: Bytes, _a: int | None) -> str:
        return "false" if bl == (0,) else "true"

    decoding = {(b,): dec((b,), None) for b in range(radix)}
    return make_plain(
        "bool_gcc",
        {"false": (0,), "true": (1,)},
        radix=radix,
        addresses=addresses,
        decoding=decoding,
    )


def make_bool_pair(
    x: int,
    y: int,
    radix: int = 256,
    *,
    addresses: Iterable[int] = DEFAULT_ADDRESSES,
    sid: str | None = None,
) -> SemanticStructure:
    """Bool encoded as true -> [x], false -> [y], undefined on every other byte."""
    if x == y:
        raise EqualPair(f"true and false both encoded as {x}")
    for b in (x, y):
        if not 0 <= b < radix:
            raise ValueError(f"byte {b} outside [0, {radix})")
    return make_plain(
        sid or f"bool_t{x}_f{y}",
        {"false": (y,), "true": (x,)},
        radix=radix,
        addresses=addresses,
    )


def make_s01(radix: int = 256, **kw) -> SemanticStructure:
    """The gcc encoding (false [0], true [1]) with its decoder cut down to those two bytes."""
    return make_bool_pair(1, 0, radix, sid=kw.pop("sid", "bool_01"), **kw)


def make_s23(radix: int = 256, **kw) -> SemanticStructure:
    return make_bool_pair(2, 3, radix, sid=kw.pop("sid", "bool_23"), **kw)


def make_uint(
    radix: int = 256,
    size: int = 1,
    *,
    addresses: Iterable[int] = DEFAULT_ADDRESSES,
    sid: str | None = None,
    offset: int = 0,
) -> SemanticStructure:
    """Pure binary unsigned integer (total decoder); values are decimal strings.

    ``offset`` rotates the byte lists, giving a different but still total
    encoding of the same values.
    """
    n = radix**size
    enc = {str(i): _int_to_bytes((i + offset) % n, radix, size) for i in range(n)}
    return make_plain(sid or f"uint{size}_r{radix}_o{offset}", enc, radix=radix, addresses=addresses)


def _transpose(bl: Bytes, x: Bytes, y: Bytes) -> Bytes:
    if bl == x:
        return y
    if bl == y:
        return x
    return bl


def permutation_closure(
    s: SemanticStructure,
    universe_bound: int = 4096,
    *,
    type_name: str = "bool",
) -> StructureFamily:
    """Close a partial plain structure under swapping an undefined byte list in.

    For every byte list ``bl`` outside the decoder domain and every byte list
    ``bl2`` the member ``s'`` decodes ``x`` as ``s`` decodes ``swap(x)`` and
    encodes through ``swap``.  Swaps between two undefined lists reproduce
    ``s`` itself, so ``s`` appears once and every other member has a
    different decoder domain.
    """
    if not s.is_plain or not s.extensional:
        raise ValueError("permutation closure needs a plain structure with a table decoder")
    if check_wellformed(s):
        raise ValueError(f"{s.id} is not well formed")
    if s.radix**s.size > universe_bound:
        raise BoundExceeded(f"{s.radix}^{s.size} byte lists exceed bound {universe_bound}")
    universe = list(all_byte_lists(s.radix, s.size))
    undefined = [bl for bl in universe if bl not in s.decoder]
    if not undefined:
        raise NoUndefinedRep(f"{s.id} has a total decoder")
    defined = [bl for bl in universe if bl in s.decoder]
    members = [s]
    for bl in undefined:
        for bl2 in defined:
            enc = {v: _transpose(tuple(e), bl, bl2) for v, e in s.encoder.items()}
            dec = {_transpose(x, bl, bl2): v for x, v in s.decoder.items()}
            members.append(
                SemanticStructure(
                    id=f"{s.id}~{_fmt(bl)}<>{_fmt(bl2)}",
                    values=s.values,
                    addresses=s.addresses,
                    size=s.size,
                    radix=s.radix,
                    variant=PLAIN,
                    encoder=enc,
                    decoder=dec,
                )
            )
    return StructureFamily(type_name, tuple(members))


def _fmt(bl: Bytes) -> str:
    return ",".join(map(str, bl))


def make_address_family(
    base: SemanticStructure,
    scramble_seed: int = 0,
    *,
    addresses: Iterable[int] | None = None,
    type_name: str = "bool",
    max_members: int = 64,
) -> StructureFamily:
    """Address-dependent variants of ``base``.

    A seeded random relabelling ``sigma`` of all byte lists turns them into a
    cyclic group; every member picks a distinct rotation per address and
    encodes ``v`` at ``a`` as ``rotate[a](base.encode(v))``.  Distinct
    rotations have no fixed points, so within one member the encodings of
    every value differ between any two addresses.  Assignments under which
    one address's decoder accepts every representation placed for another
    are dropped; the rest are all included (a seeded sample when there are
    more than ``max_members``).
    """
    if not base.is_plain or not base.extensional:
        raise ValueError("address family needs a plain structure with a table decoder")
    if check_wellformed(base):
        raise ValueError(f"{base.id} is not well formed")
    addrs = sorted(set(base.addresses if addresses is None else addresses))
    universe = list(all_byte_lists(base.radix, base.size))
    n = len(universe)
    if len(addrs) > n:
        raise ValueError(f"{len(addrs)} addresses need more than {n} distinct rotations")
    rng = random.Random(scramble_seed)
    sigma = list(range(n))
    rng.shuffle(sigma)
    index = {bl: i for i, bl in enumerate(universe)}
    unsigma = {c: i for i, c in enumerate(sigma)}

    def rotate(bl: Bytes, k: int) -> Bytes:
        return universe[unsigma[(sigma[index[bl]] + k) % n]]

    domain = {index[bl] for bl in base.decoder}

    def separates(k: int, k2: int) -> bool:
        # some representation placed for one address is rejected at the other
        return any(unsigma[(sigma[i] + k - k2) % n] not in domain for i in domain)

    assignments = [
        ks
        for ks in itertools.permutations(range(n), len(addrs))
        if all(separates(k, k2) for k, k2 in itertools.permutations(ks, 2))
    ]
    if not assignments:
        raise ValueError(f"no rotation assignment separates the addresses of {base.id}")
    if len(assignments) > max_members:
        assignments = sorted(rng.sample(assignments, max_members))
    members = []
    for ks in assignments:
        enc = {}
        dec = {}
        for a, k in zip(addrs, ks):
            for v, bl in base.encoder.items():
                enc[(a, v)] = rotate(tuple(bl), k)
            for bl, v in base.decoder.items():
                dec[(a, rotate(bl, k))] = v
        members.append(
            SemanticStructure(
                id=f"{base.id}@rot[{','.join(map(str, ks))}]",
                values=base.values,
                addresses=tuple(addrs),
                size=base.size,
                radix=base.radix,
                variant=ADDRESS_DEPENDENT,
                encoder=enc,
                decoder=dec,
            )
        )
    return StructureFamily(type_name, tuple(members))


def make_protected_family(
    values: Sequence[str],
    addresses: Iterable[int],
    bit_targets: Iterable[BitAddress],
    *,
    radix: int = 4,
    size: int = 1,
    encoding: Mapping[str, Sequence[int]] | None = None,
    type_name: str = "T",
) -> StructureFamily:
    """Protected-bit structures ``s[a, v]`` for every bit target, address and value.

    All members share one byte encoding.  ``s[a, v]`` keeps an extra bit for
    objects at ``a`` only: it is 1 exactly when the stored value is ``v``, and
    decoding at ``a`` fails when the presented bit disagrees.
    """
    values = tuple(values)
    addrs = tuple(sorted(set(addresses)))
    targets = sorted({as_bit_address(b) for b in bit_targets})
    if not values or not addrs or not targets:
        raise EmptyInput("values, addresses and bit targets must be non-empty")
    if encoding is None:
        if len(values) > radix**size:
            raise ValueError(f"{len(values)} values do not fit in {size} byte(s) of radix {radix}")
        encoding = {v: _int_to_bytes(i, radix, size) for i, v in enumerate(values)}
    enc_base = {v: tuple(encoding[v]) for v in values}
    if len(set(enc_base.values())) != len(values):
        raise ValueError("shared encoding must be injective")
    members = []
    for b in targets:
        for a in addrs:
            for v in values:
                enc = {(x, w): enc_base[w] for x in addrs for w in values}
                dec = {(x, enc_base[w]): w for x in addrs for w in values}
                members.append(
                    SemanticStructure(
                        id=f"{type_name}.prot[a={a},v={v},b={b}]",
                        values=values,
                        addresses=addrs,
                        size=size,
                        radix=radix,
                        variant=EXTERNAL_STATE,
                        encoder=enc,
                        decoder=dec,
                        protected_bit={a: b},
                        protected_bits={(a, w): int(w == v) for w in values},
                    )
                )
    return StructureFamily(type_name, tuple(members))


# ------------------------------------------------------------------- JSON io


def _key(a: int | None, rest: str) -> str:
    return rest if a is None else f"{a}:{rest}"


def structure_to_json(s: SemanticStructure, *, decode_bound: int = 1 << 16) -> dict:
    """Self-contained member document (all fields explicit)."""
    doc: dict = {
        "id": s.id,
        "radix": s.radix,
        "size": s.size,
        "values": list(s.values),
        "addresses": list(s.addresses),
        "variant": s.variant,
    }
    if s.is_plain:
        doc["encode"] = {v: list(s.encoder[v]) for v in s.values if v in s.encoder}
    else:
        doc["encode"] = {
            _key(a, v): list(s.encoder[(a, v)]) for a in s.addresses for v in s.values if (a, v) in s.encoder
        }
    if s.radix**s.size > decode_bound:
        raise BoundExceeded(f"cannot tabulate the decoder of {s.id}")
    keys: list[int | None] = [None] if s.is_plain else list(s.addresses)
    doc["decode"] = {
        _key(a, _fmt(bl)): v
        for a in keys
        for bl in all_byte_lists(s.radix, s.size)
        if (v := _lookup(s, bl, a)) is not None
    }
    if s.protected_bit:
        ((a, b),) = s.protected_bit.items()
        doc["protected_bit"] = {
            "addr": a,
            "bit": list(b),
            "bits": {v: s.protected_bits.get((a, v), 0) for v in s.values},
        }
    return doc


def family_to_json(f: StructureFamily) -> dict:
    members = [structure_to_json(s) for s in f.members]
    first = members[0]
    doc = {"type": f.type_name}
    for k in ("radix", "size", "values", "addresses", "variant"):
        doc[k] = first[k]
    for m in members:
        for k in ("radix", "size", "values", "addresses", "variant"):
            if m[k] == doc[k]:
                del m[k]
    doc["members"] = members
    return doc


def _parse_bytes(text: str) -> Bytes:
    text = text.strip()
    return tuple(int(x) for x in text.split(",")) if text else ()


def _split_key(key: str, keyed: bool) -> tuple[int | None, str]:
    if not keyed:
        return None, key
    a, _, rest = key.partition(":")
    return int(a), rest


def structure_from_json(doc: Mapping, defaults: Mapping | None = None) -> SemanticStructure:
    merged = dict(defaults or {})
    merged.update(doc)
    try:
        variant = merged.get("variant", PLAIN)
        keyed = variant != PLAIN
        enc: dict = {}
        for key, bl in merged["encode"].items():
            a, v = _split_key(key, keyed)
            enc[v if a is None else (a, v)] = tuple(int(x) for x in bl)
        if "decode" in merged:
            dec = {}
            for key, v in merged["decode"].items():
                a, rest = _split_key(key, keyed)
                bl = _parse_bytes(rest)
                dec[bl if a is None else (a, bl)] = v
        else:
            dec = {}
            for k, bl in enc.items():
                dec[bl if not keyed else (k[0], bl)] = k if not keyed else k[1]
            if "decode_domain" in merged:
                allowed = set()
                for entry in merged["decode_domain"]:
                    if isinstance(entry, str):
                        a, rest = _split_key(entry, keyed)
                        bl = _parse_bytes(rest)
                    else:
                        a, bl = None, tuple(entry)
                    allowed.add(bl if a is None else (a, bl))
                dec = {k: v for k, v in dec.items() if k in allowed}
        values = merged.get("values")
        if values is None:
            values = list(dict.fromkeys(k if not keyed else k[1] for k in enc))
        protected_bit: dict = {}
        protected_bits: dict = {}
        if merged.get("protected_bit"):
            pb = merged["protected_bit"]
            a = int(pb["addr"])
            protected_bit[a] = as_bit_address(pb["bit"])
            if "bits" in pb:
                protected_bits = {(a, v): int(bit) for v, bit in pb["bits"].items()}
            else:
                protected_bits = {(a, v): int(v == pb.get("value")) for v in values}
        return SemanticStructure(
            id=str(merged["id"]),
            values=tuple(values),
            addresses=tuple(int(a) for a in merged.get("addresses", DEFAULT_ADDRESSES)),
            size=int(merged["size"]),
            radix=int(merged["radix"]),
            variant=variant,
            encoder=enc,
            decoder=dec,
            protected_bit=protected_bit,
            protected_bits=protected_bits,
        )
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise FormatError(f"bad structure document: {exc!r}") from exc


def family_from_json(doc: Mapping) -> StructureFamily:
    try:
        defaults = {k: doc[k] for k in ("radix", "size", "values", "addresses", "variant") if k in doc}
        members = tuple(structure_from_json(m, defaults) for m in doc["members"])
        return StructureFamily(str(doc["type"]), members)
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise FormatError(f"bad family document: {exc!r}") from exc
