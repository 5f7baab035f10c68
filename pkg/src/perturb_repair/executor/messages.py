"""Fixed catalog of checker and runtime message templates.

Every message the executor emits is produced by `render` from one of these
templates; nothing is formatted free-form.
"""
from __future__ import annotations

import re
from dataclasses import dataclass


@dataclass(frozen=True)
class Template:
    code: str
    key: str  # short category label used in histograms
    text: str

    def render(self, **values) -> str:
        return self.text.format(**values)

    @property
    def pattern(self) -> re.Pattern:
        parts = re.split(r"(\{\w+\})", self.text)
        rx = "".join("(.+?)" if p.startswith("{") else re.escape(p) for p in parts)
        return re.compile(rx + r"\Z", re.S)


CHECK_TEMPLATES = {
    "cannot_find_symbol": Template("CannotFindSymbol", "cannot find symbol", "cannot find symbol: {name}"),
    "incompatible": Template("IncompatibleTypes", "incompatible types",
                             "incompatible types: {found} cannot be converted to {expected}"),
    "unexpected_return": Template("IncompatibleTypes", "unexpected return value",
                                  "incompatible types: unexpected return value"),
    "missing_return_value": Template("IncompatibleTypes", "missing return value",
                                     "incompatible types: missing return value"),
    "missing_return": Template("MissingReturn", "missing return statement", "missing return statement"),
    "wrong_arity": Template("WrongArity", "wrong number of arguments",
                            "{what} {name} cannot be applied to given types: expected {expected} but found {found}"),
    "not_a_function": Template("NotAFunction", "not a method", "{name} is not a method"),
    "duplicate": Template("DuplicateDeclaration", "already defined",
                          "{what} {name} is already defined in {where}"),
    "bad_operands": Template("BadOperandType", "bad operand types",
                             "bad operand types for binary operator '{op}': {left} and {right}"),
    "bad_operand": Template("BadOperandType", "bad operand type",
                            "bad operand type {type} for unary operator '{op}'"),
}

RUNTIME_TEMPLATES = {
    "comparison": Template("ComparisonFailure", "ComparisonFailure", "expected:{e} but was:{a}"),
    "assertion": Template("AssertionFailure", "AssertionFailure", "assertion failed"),
    "null": Template("NullDereference", "NullDereference", "null dereference"),
    "index": Template("IndexOutOfBounds", "IndexOutOfBounds", "index {i} out of bounds for length {n}"),
    "negative_size": Template("IndexOutOfBounds", "IndexOutOfBounds", "negative array size {n}"),
    "division": Template("DivisionByZero", "DivisionByZero", "division by zero"),
    "steps": Template("StepLimitExceeded", "StepLimitExceeded", "step limit of {n} exceeded"),
    "depth": Template("StepLimitExceeded", "StepLimitExceeded", "call depth limit of {n} exceeded"),
}

CHECK_CODES = ("CannotFindSymbol", "IncompatibleTypes", "MissingReturn", "WrongArity",
               "NotAFunction", "DuplicateDeclaration", "BadOperandType")
ERROR_TYPES = ("AssertionFailure", "ComparisonFailure", "NullDereference", "IndexOutOfBounds",
               "DivisionByZero", "StepLimitExceeded")


def match_template(message: str, catalog: dict | None = None) -> Template | None:
    """The catalog template a message was rendered from."""
    for t in (catalog or {**CHECK_TEMPLATES, **RUNTIME_TEMPLATES}).values():
        if t.pattern.match(message):
            return t
    return None
