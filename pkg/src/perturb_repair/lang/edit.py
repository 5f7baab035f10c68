"""Statement regions: rendering them as text and splicing text back in."""
from __future__ import annotations

import copy
from dataclasses import dataclass

from . import ast as A
from .lexer import ParseError
from .parser import parse, parse_statements
from .printer import pretty_print, render_stmts
from .scope import block_at


class SpliceError(ValueError):
    pass


@dataclass(frozen=True)
class Region:
    """A run of statements `[start, end)` in one block.

    `fix_end` is the end of the corresponding run in the unperturbed program.
    When `elide` is set the statements are rendered with their own blocks
    shown as `{ ... }`, and splicing refills those holes from the program.
    """

    block_path: tuple
    start: int
    end: int
    fix_end: int
    elide: bool = False

    def to_json(self) -> dict:
        return {"block_path": _path_to_json(self.block_path), "start": self.start,
                "end": self.end, "fix_end": self.fix_end, "elide": self.elide}

    @classmethod
    def from_json(cls, d: dict) -> "Region":
        return cls(_path_from_json(d["block_path"]), d["start"], d["end"], d["fix_end"], d["elide"])


def _path_to_json(path: tuple) -> list:
    return list(path[:3]) + [[i, f] for i, f in path[3:]]


def _path_from_json(items: list) -> tuple:
    return tuple(items[:3]) + tuple((i, f) for i, f in items[3:])


def region_stmts(prog: A.Program, region: Region, original: bool = False) -> list:
    block = block_at(prog, region.block_path)
    return block.stmts[region.start:region.fix_end if original else region.end]


def region_text(prog: A.Program, region: Region, original: bool = False) -> str:
    return render_stmts(region_stmts(prog, region, original), region.elide)


def _holes(stmts) -> list:
    out = []
    for s in stmts:
        for n in A.walk(s):
            if isinstance(n, A.Stmt):
                for fname, b in A.stmt_blocks(n):
                    if isinstance(b, A.Hole):
                        out.append((n, fname))
    return out


def splice(prog: A.Program, region: Region, text: str) -> A.Program:
    """Replace the region's statements with `text`, filling `{ ... }` holes in order."""
    try:
        new = parse_statements(text, allow_holes=True)
    except ParseError as exc:
        raise SpliceError(str(exc)) from exc
    holes = _holes(new)
    if holes:
        bodies = [b for s in region_stmts(prog, region) for _, b in A.stmt_blocks(s)]
        if len(bodies) != len(holes):
            raise SpliceError(f"{len(holes)} elided blocks but {len(bodies)} available")
        for (stmt, fname), body in zip(holes, bodies):
            setattr(stmt, fname, copy.deepcopy(body))
    work = copy.deepcopy(prog)
    block = block_at(work, region.block_path)
    block.stmts[region.start:region.end] = new
    try:
        return parse(pretty_print(work))
    except ParseError as exc:
        raise SpliceError(str(exc)) from exc
