"""Underspecified data-type semantics: partial decoders, structure families and sensitivity checks."""

from udts.error_classes import ClassContext, classify, gen_modifications
from udts.errors import (
    AddressNotAligned,
    BoundExceeded,
    CapExceeded,
    EmptyInput,
    EqualPair,
    FormatError,
    IllFormedProgram,
    LengthMismatch,
    NoFreeBits,
    NoUndefinedRep,
    OutOfRange,
    SizeMismatch,
    UdtsError,
    ValueNotInV,
)
from udts.interp import (
    UNKNOWN_VALUE,
    AssertValue,
    ByteCopy,
    Decl,
    HardwareEffect,
    Outcome,
    Program,
    ReadAs,
    ReadTyped,
    Verdict,
    WriteTyped,
    build_case_study,
    run,
    verify,
)
from udts.memory import (
    UNKNOWN,
    BitAddress,
    ByteSpace,
    Memory,
    bit_rw,
    fresh_memory,
    mem_read,
    mem_write,
    modified_at,
    resolve_protected_bit,
)
from udts.modification import MemoryModification, apply_modification
from udts.sensitivity import (
    LemmaReport,
    SensitivityVerdict,
    check_lemma1,
    check_lemma2,
    check_lemma3,
    check_lemma4,
    type_sensitive_bruteforce,
    visible,
    visible_in_family,
)
from udts.structures import (
    UNDEFINED,
    SemanticStructure,
    StructureChoice,
    StructureFamily,
    check_wellformed,
    decode,
    encode,
    equivalent,
    make_address_family,
    make_bool_pair,
    make_bool_total,
    make_protected_family,
    make_s01,
    make_s23,
    make_uint,
    permutation_closure,
)

__all__ = [
    "AddressNotAligned",
    "AssertValue",
    "BitAddress",
    "BoundExceeded",
    "ByteCopy",
    "ByteSpace",
    "CapExceeded",
    "ClassContext",
    "Decl",
    "EmptyInput",
    "EqualPair",
    "FormatError",
    "HardwareEffect",
    "IllFormedProgram",
    "LemmaReport",
    "LengthMismatch",
    "Memory",
    "MemoryModification",
    "NoFreeBits",
    "NoUndefinedRep",
    "OutOfRange",
    "Outcome",
    "Program",
    "ReadAs",
    "ReadTyped",
    "SemanticStructure",
    "SensitivityVerdict",
    "SizeMismatch",
    "StructureChoice",
    "StructureFamily",
    "UNDEFINED",
    "UNKNOWN",
    "UNKNOWN_VALUE",
    "UdtsError",
    "ValueNotInV",
    "Verdict",
    "WriteTyped",
    "apply_modification",
    "bit_rw",
    "build_case_study",
    "check_lemma1",
    "check_lemma2",
    "check_lemma3",
    "check_lemma4",
    "check_wellformed",
    "classify",
    "decode",
    "encode",
    "equivalent",
    "fresh_memory",
    "gen_modifications",
    "make_address_family",
    "make_bool_pair",
    "make_bool_total",
    "make_protected_family",
    "make_s01",
    "make_s23",
    "make_uint",
    "mem_read",
    "mem_write",
    "modified_at",
    "permutation_closure",
    "resolve_protected_bit",
    "run",
    "type_sensitive_bruteforce",
    "verify",
    "visible",
    "visible_in_family",
]

__version__ = "0.1.0"
