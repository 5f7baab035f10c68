"""Repairing a statement: build the input, decode candidates, validate each."""
from __future__ import annotations

from dataclasses import dataclass

from ..corpus import build_context
from ..diagnostics import Diagnostic, from_evidence
from ..executor.interpreter import ExecLimits
from ..lang import ast as A
from ..lang.edit import Region, SpliceError, region_text, splice
from ..lang.lexer import ParseError
from ..lang.scope import UnknownNode, iter_statements
from ..perturber.generate import GEN_MAX_STEPS, evaluate
from ..tokenizer import Tokenizer
from .beam import beam_search
from .data import input_ids
from .transformer import Seq2Seq


class NoDiagnostic(ValueError):
    """The program already checks and passes its tests."""


@dataclass(frozen=True)
class RepairCandidate:
    text: str
    score: float
    plausible: bool


@dataclass
class RepairReport:
    diagnostic: Diagnostic
    region: Region
    buggy: str
    candidates: list


def default_limits() -> ExecLimits:
    return ExecLimits(max_steps=GEN_MAX_STEPS)


class Validator:
    """Plausibility checks for candidate texts at one region, memoized by text."""

    def __init__(self, prog: A.Program, region: Region, limits: ExecLimits | None = None):
        self.prog, self.region = prog, region
        self.limits = limits or default_limits()
        self.cache: dict[str, bool] = {}

    def __call__(self, text: str) -> bool:
        if text not in self.cache:
            self.cache[text] = self._check(text)
        return self.cache[text]

    def _check(self, text: str) -> bool:
        try:
            patched = splice(self.prog, self.region, text)
        except (SpliceError, ParseError, ValueError):
            return False
        errors, failure = evaluate(patched, self.limits)
        return not errors and failure is None


def decode_candidates(model: Seq2Seq, tok: Tokenizer, src: list, beam: int, n: int) -> list[tuple[str, float]]:
    """Distinct candidate texts with their beam scores, best first."""
    out, seen = [], set()
    for c in beam_search(model, src, beam, min(n, beam)):
        text = tok.decode_fix(c.tokens)
        if text not in seen:
            seen.add(text)
            out.append((text, c.score))
    return out


def statement_region(prog: A.Program, stmt_id: int) -> Region:
    for loc in iter_statements(prog, include_tests=False):
        if loc.stmt.id == stmt_id:
            return Region(loc.block_path, loc.index, loc.index + 1, loc.index + 1,
                          elide=A.is_compound(loc.stmt))
    raise UnknownNode(stmt_id)


def statement_at_line(prog: A.Program, line: int) -> int:
    """NodeId of the innermost non-test statement starting on `line`."""
    found = None
    for loc in iter_statements(prog, include_tests=False):
        if loc.stmt.span.line == line:
            found = loc.stmt.id
    if found is None:
        raise UnknownNode(f"no statement starts on line {line}")
    return found


def repair(prog: A.Program, stmt_id: int, model: Seq2Seq, tok: Tokenizer, beam: int = 10,
           n: int = 10, variant: str = "full", limits: ExecLimits | None = None,
           region: Region | None = None) -> RepairReport:
    errors, failure = evaluate(prog, limits or default_limits())
    if not errors and failure is None:
        raise NoDiagnostic("program checks and passes all tests")
    diag = from_evidence(errors, failure)
    region = region or statement_region(prog, stmt_id)
    buggy = region_text(prog, region)
    src = input_ids(tok, buggy, build_context(prog, region), diag.rendered,
                    model.cfg.max_input_tokens, variant)
    check = Validator(prog, region, limits)
    cands = [RepairCandidate(t, s, check(t)) for t, s in decode_candidates(model, tok, src, beam, n)]
    return RepairReport(diag, region, buggy, cands)
