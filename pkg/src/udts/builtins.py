"""Named families reachable from the command line without a family file."""

from __future__ import annotations

from typing import Callable

from udts.memory import BitAddress
from udts.structures import (
    StructureFamily,
    make_address_family,
    make_bool_total,
    make_protected_family,
    make_s01,
    make_s23,
    make_uint,
    permutation_closure,
)


def _gcc(radix: int, seed: int, mem: int) -> StructureFamily:
    return StructureFamily("bool", (make_bool_total(radix),))


def _bool01(radix: int, seed: int, mem: int) -> StructureFamily:
    return StructureFamily("bool", (make_s01(radix),))


def _pairs(radix: int, seed: int, mem: int) -> StructureFamily:
    return StructureFamily("bool", (make_s01(radix), make_s23(radix)))


def _closure(radix: int, seed: int, mem: int) -> StructureFamily:
    return permutation_closure(make_s01(radix), type_name="bool")


def _address(radix: int, seed: int, mem: int) -> StructureFamily:
    return make_address_family(make_s01(radix, addresses=(0, 1)), seed, type_name="bool")


def _protected(radix: int, seed: int, mem: int) -> StructureFamily:
    # the protected bit sits just past the last memory cell
    return make_protected_family(
        ("false", "true"), (0, 1), [BitAddress(mem, 0)], radix=radix, type_name="bool"
    )


def _uint(radix: int, seed: int, mem: int) -> StructureFamily:
    return StructureFamily("uint", (make_uint(radix),))


BUILTINS: dict[str, Callable[[int, int, int], StructureFamily]] = {
    "gcc-bool": _gcc,
    "bool01": _bool01,
    "bool-pairs": _pairs,
    "plain-closure": _closure,
    "address": _address,
    "protected": _protected,
    "uint": _uint,
}


def builtin_family(name: str, radix: int = 4, *, seed: int = 0, mem: int = 8) -> StructureFamily:
    try:
        make = BUILTINS[name]
    except KeyError:
        raise KeyError(f"unknown builtin family {name!r} (choose from {', '.join(sorted(BUILTINS))})") from None
    return make(radix, seed, mem)


def retype(f: StructureFamily, type_name: str) -> StructureFamily:
    return StructureFamily(type_name, f.members, f.common_values)
