"""Canonical pretty printer and single-line statement rendering."""
from __future__ import annotations

import math

import numpy as np

from . import ast as A

INDENT = "    "

_PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4,
         "+": 5, "-": 5, "*": 6, "/": 6, "%": 6}
_UNARY_PREC = 7
_POSTFIX_PREC = 8


def format_double(v: float) -> str:
    if math.isnan(v) or math.isinf(v):
        raise ValueError(f"non-finite literal {v}")
    return repr(float(v))


def format_float(v: float) -> str:
    if math.isnan(v) or math.isinf(v):
        raise ValueError(f"non-finite literal {v}")
    return str(np.float32(v))


def quote(s: str) -> str:
    body = s.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")
    return f'"{body}"'


def literal_text(lit: A.Literal) -> str:
    k, v = lit.kind, lit.value
    if k == "int":
        return str(v)
    if k == "long":
        return f"{v}L"
    if k == "double":
        return format_double(v)
    if k == "float":
        return format_float(v) + "f"
    if k == "bool":
        return "true" if v else "false"
    if k == "string":
        return quote(v)
    return "null"


def _prec(e: A.Expr) -> int:
    if isinstance(e, A.Cond):
        return 0
    if isinstance(e, A.Binary):
        return _PREC[e.op]
    if isinstance(e, A.Unary):
        return _UNARY_PREC
    return _POSTFIX_PREC


def _wrap(e: A.Expr, min_prec: int) -> str:
    s = expr_text(e)
    return f"({s})" if _prec(e) < min_prec else s


def expr_text(e: A.Expr) -> str:
    if isinstance(e, A.Literal):
        return literal_text(e)
    if isinstance(e, A.Name):
        return e.name
    if isinstance(e, A.This):
        return "this"
    if isinstance(e, A.Binary):
        p = _PREC[e.op]
        return f"{_wrap(e.left, p)} {e.op} {_wrap(e.right, p + 1)}"
    if isinstance(e, A.Unary):
        inner = _wrap(e.operand, _UNARY_PREC)
        # keep `- -x` from lexing as a different token stream
        sep = " " if inner.startswith(e.op) else ""
        return f"{e.op}{sep}{inner}"
    if isinstance(e, A.Cond):
        return f"{_wrap(e.cond, 1)} ? {_wrap(e.then, 1)} : {expr_text(e.orelse)}"
    if isinstance(e, A.FieldAccess):
        return f"{_target(e.obj)}.{e.name}"
    if isinstance(e, A.Index):
        return f"{_target(e.array)}[{expr_text(e.index)}]"
    if isinstance(e, A.Call):
        args = ", ".join(expr_text(a) for a in e.args)
        if e.obj is None:
            return f"{e.name}({args})"
        return f"{_target(e.obj)}.{e.name}({args})"
    if isinstance(e, A.New):
        return f"new {e.cls}({', '.join(expr_text(a) for a in e.args)})"
    if isinstance(e, A.NewArray):
        if e.elems is not None:
            inner = ", ".join(expr_text(a) for a in e.elems)
            return f"new {e.elem}[] {{{inner}}}" if inner else f"new {e.elem}[] {{}}"
        return f"new {e.elem}[{expr_text(e.size)}]"
    raise TypeError(f"not an expression: {e!r}")


def _target(e: A.Expr) -> str:
    if isinstance(e, A.NewArray) or _prec(e) < _POSTFIX_PREC:
        return f"({expr_text(e)})"
    return expr_text(e)


def simple_text(s: A.Stmt) -> str:
    """A simple statement without its terminating semicolon."""
    if isinstance(s, A.VarDecl):
        if s.init is None:
            return f"{s.type} {s.name}"
        return f"{s.type} {s.name} = {expr_text(s.init)}"
    if isinstance(s, A.Assign):
        return f"{expr_text(s.target)} = {expr_text(s.value)}"
    if isinstance(s, A.ExprStmt):
        return expr_text(s.expr)
    if isinstance(s, A.Return):
        return "return" if s.value is None else f"return {expr_text(s.value)}"
    if isinstance(s, A.Assert):
        return f"{s.kind}({', '.join(expr_text(a) for a in s.args)})"
    raise TypeError(f"not a simple statement: {s!r}")


def header_text(s: A.Stmt) -> str:
    if isinstance(s, A.If):
        return f"if ({expr_text(s.cond)})"
    if isinstance(s, A.While):
        return f"while ({expr_text(s.cond)})"
    if isinstance(s, A.For):
        init = simple_text(s.init) if s.init is not None else ""
        update = simple_text(s.update) if s.update is not None else ""
        return f"for ({init}; {expr_text(s.cond)}; {update})"
    raise TypeError(f"not a compound statement: {s!r}")


# ---- multi-line canonical form ---------------------------------------

def _block_lines(block, depth: int) -> list[str]:
    if isinstance(block, A.Hole):
        return ["{ ... }"]
    if not block.stmts:
        return ["{", INDENT * depth + "}"]
    lines = ["{"]
    for st in block.stmts:
        lines.extend(_stmt_lines(st, depth + 1))
    lines.append(INDENT * depth + "}")
    return lines


def _attach(head: str, block_lines: list[str], depth: int) -> list[str]:
    first = INDENT * depth + head + " " + block_lines[0]
    return [first] + block_lines[1:]


def _stmt_lines(s: A.Stmt, depth: int) -> list[str]:
    pad = INDENT * depth
    if not A.is_compound(s):
        return [pad + simple_text(s) + ";"]
    lines = _attach(header_text(s), _block_lines(s.then if isinstance(s, A.If) else s.body, depth), depth)
    if isinstance(s, A.If) and s.orelse is not None:
        orelse = s.orelse
        if isinstance(orelse, A.Block) and len(orelse.stmts) == 1 and isinstance(orelse.stmts[0], A.If):
            nested = _stmt_lines(orelse.stmts[0], depth)
            lines[-1] = lines[-1] + " else " + nested[0].lstrip()
            lines.extend(nested[1:])
        else:
            blk = _block_lines(orelse, depth)
            lines[-1] = lines[-1] + " else " + blk[0]
            lines.extend(blk[1:])
    return lines


def _params(params) -> str:
    return ", ".join(f"{p.type} {p.name}" for p in params)


def pretty_print(prog: A.Program) -> str:
    out: list[str] = []
    for ci, cls in enumerate(prog.classes):
        if ci:
            out.append("")
        out.append(f"class {cls.name} {{")
        groups = []
        if cls.fields:
            groups.append([INDENT + f"{f.type} {f.name};" for f in cls.fields])
        for c in cls.ctors:
            groups.append(_attach(f"{cls.name}({_params(c.params)})", _block_lines(c.body, 1), 1))
        for m in cls.methods:
            groups.append(_attach(f"{m.ret} {m.name}({_params(m.params)})", _block_lines(m.body, 1), 1))
        for gi, g in enumerate(groups):
            if gi:
                out.append("")
            out.extend(g)
        out.append("}")
    return "\n".join(out) + "\n"


def stmt_source(s: A.Stmt, depth: int = 0) -> str:
    return "\n".join(_stmt_lines(s, depth))


# ---- single-line rendering used for model text ---------------------------

def render_block(block, elide: bool) -> str:
    if elide or isinstance(block, A.Hole):
        return "{ ... }"
    if not block.stmts:
        return "{ }"
    return "{ " + " ".join(render_stmt(s) for s in block.stmts) + " }"


def render_stmt(s: A.Stmt, elide: bool = False) -> str:
    """One-line form; `elide` replaces the statement's own blocks with `{ ... }`."""
    if not A.is_compound(s):
        return simple_text(s) + ";"
    body = s.then if isinstance(s, A.If) else s.body
    text = f"{header_text(s)} {render_block(body, elide)}"
    if isinstance(s, A.If) and s.orelse is not None:
        text += f" else {render_block(s.orelse, elide)}"
    return text


def render_stmts(stmts, elide: bool = False) -> str:
    return " ".join(render_stmt(s, elide) for s in stmts)
