"""Diagnostics: the failure evidence appended to the model input.

A compile error renders as `[CE] <message>`; a failing test renders as
`[FE] <error type> <message> <failing assertion>` with empty parts left out.
"""
from __future__ import annotations

import csv
import io
import re
from collections import Counter
from dataclasses import dataclass, field

from .executor.checker import CheckError
from .executor.interpreter import TestOutcome
from .executor.messages import CHECK_TEMPLATES, ERROR_TYPES, match_template

CE_TOKEN = "[CE]"
FE_TOKEN = "[FE]"


_ASSERT_RX = re.compile(r"(?:(?<= )|^)assert(?:Equals|True)\(")


class EmptyEvidence(ValueError):
    pass


class NotAFailure(ValueError):
    pass


@dataclass(frozen=True)
class Diagnostic:
    kind: str  # CE | FE
    error_type: str
    message: str
    failing_assertion: str = ""

    @property
    def rendered(self) -> str:
        if self.kind == "CE":
            return f"{CE_TOKEN} {self.message}"
        parts = [FE_TOKEN, self.error_type, self.message, self.failing_assertion]
        return " ".join(p for p in parts if p)

    @property
    def key(self) -> str:
        """Histogram category: the message template for CE, the error type for FE."""
        if self.kind == "FE":
            return self.error_type
        t = match_template(self.message, CHECK_TEMPLATES)
        return t.key if t else self.message


def from_check_errors(errors: list[CheckError]) -> Diagnostic:
    if not errors:
        raise EmptyEvidence("no check errors")
    return Diagnostic("CE", "", errors[0].message)


def from_test_failure(outcome: TestOutcome) -> Diagnostic:
    if not outcome.failed:
        raise NotAFailure(outcome.test_name)
    return Diagnostic("FE", outcome.error_type, outcome.error_message, outcome.failing_assertion_source)


def from_evidence(errors: list[CheckError], outcome: TestOutcome | None) -> Diagnostic:
    if errors:
        return from_check_errors(errors)
    if outcome is None:
        raise EmptyEvidence("program checks and passes its tests")
    return from_test_failure(outcome)


def parse_rendered(text: str) -> Diagnostic:
    """Recover kind, error type and message from a rendered diagnostic.

    The message and failing assertion are split at the first assertion call,
    which is exact for every message the executor produces.
    """
    if text.startswith(CE_TOKEN + " "):
        return Diagnostic("CE", "", text[len(CE_TOKEN) + 1:])
    if not text.startswith(FE_TOKEN + " "):
        raise ValueError(f"not a diagnostic: {text!r}")
    error_type, _, rest = text[len(FE_TOKEN) + 1:].partition(" ")
    if error_type not in ERROR_TYPES:
        raise ValueError(f"unknown error type {error_type!r}")
    m = _ASSERT_RX.search(rest)
    if m is None:
        return Diagnostic("FE", error_type, rest)
    return Diagnostic("FE", error_type, rest[:m.start()].rstrip(" "), rest[m.start():])


@dataclass
class ErrorHistogram:
    ce: Counter = field(default_factory=Counter)
    fe: Counter = field(default_factory=Counter)

    @property
    def totals(self) -> dict:
        return {"CE": sum(self.ce.values()), "FE": sum(self.fe.values())}

    def rows(self) -> list[tuple[str, int]]:
        """(category, count) rows, CE categories first, each panel by descending count."""
        ordered = lambda c: sorted(c.items(), key=lambda kv: (-kv[1], kv[0]))
        return ordered(self.ce) + ordered(self.fe)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["error_type", "count"])
        w.writerows(self.rows())
        return buf.getvalue()


def distribution_report(diagnostics) -> ErrorHistogram:
    """Counts per CE message template and per FE error type.

    Accepts Diagnostic objects or rendered diagnostic strings.
    """
    hist = ErrorHistogram()
    for d in diagnostics:
        if isinstance(d, str):
            d = parse_rendered(d)
        (hist.ce if d.kind == "CE" else hist.fe)[d.key] += 1
    return hist
