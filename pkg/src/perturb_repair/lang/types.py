"""MJ static types and the assignability relation."""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass

PRIMITIVE_NAMES = ("int", "long", "float", "double", "bool")


@dataclass(frozen=True)
class MjType:
    kind: str  # int long float double bool string array class null void
    elem: "MjType | None" = None
    name: str | None = None

    def __str__(self) -> str:
        if self.kind == "array":
            return f"{self.elem}[]"
        if self.kind == "class":
            return self.name
        return self.kind

    @property
    def is_numeric(self) -> bool:
        return self.kind in ("int", "long", "float", "double")

    @property
    def is_integral(self) -> bool:
        return self.kind in ("int", "long")

    @property
    def is_floating(self) -> bool:
        return self.kind in ("float", "double")

    @property
    def is_reference(self) -> bool:
        return self.kind in ("string", "array", "class", "null")


INT = MjType("int")
LONG = MjType("long")
FLOAT = MjType("float")
DOUBLE = MjType("double")
BOOL = MjType("bool")
STRING = MjType("string")
NULL = MjType("null")
VOID = MjType("void")

_BY_NAME = {t.kind: t for t in (INT, LONG, FLOAT, DOUBLE, BOOL, STRING, VOID)}


def array_of(elem: MjType) -> MjType:
    return MjType("array", elem=elem)


def class_type(name: str) -> MjType:
    return MjType("class", name=name)


def named(name: str) -> MjType:
    """Map a base type name to its type; unknown names are class types."""
    return _BY_NAME.get(name) or class_type(name)


def parse_type_name(text: str) -> MjType:
    """Parse `int[][]`-style text into a type."""
    text = text.strip()
    dims = 0
    while text.endswith("[]"):
        text = text[:-2].rstrip()
        dims += 1
    t = named(text)
    for _ in range(dims):
        t = array_of(t)
    return t


def assignable(src: MjType, dst: MjType) -> bool:
    # identical; int->long; float->double; null->any reference. Nothing else.
    if src == dst:
        return src.kind != "void"
    if src.kind == "int" and dst.kind == "long":
        return True
    if src.kind == "float" and dst.kind == "double":
        return True
    if src.kind == "null" and dst.kind in ("string", "array", "class"):
        return True
    return False


def numeric_join(a: MjType, b: MjType) -> MjType | None:
    """Result type of arithmetic on a and b, or None when the operands mix families."""
    if a.is_integral and b.is_integral:
        return LONG if LONG in (a, b) else INT
    if a.is_floating and b.is_floating:
        return DOUBLE if DOUBLE in (a, b) else FLOAT
    return None


def comparable(a: MjType, b: MjType) -> bool:
    """Whether `a == b` is well typed."""
    if a.is_numeric and b.is_numeric:
        return numeric_join(a, b) is not None
    if a.kind == "bool" and b.kind == "bool":
        return True
    if a.is_reference and b.is_reference:
        return assignable(a, b) or assignable(b, a)
    return False


def f32(value: float) -> float:
    """Round a Python float to single precision."""
    try:
        return struct.unpack("<f", struct.pack("<f", value))[0]
    except OverflowError:
        return math.copysign(math.inf, value)
