"""The MJ mini-language: syntax tree, parser, printer and scopes."""
from .ast import Program, Span
from .edit import Region, SpliceError, region_text, splice
from .lexer import ParseError
from .parser import parse, parse_expression, parse_statements, parse_type
from .printer import pretty_print, render_stmt, render_stmts
from .scope import ScopeInfo, UnknownNode, iter_statements, locate, resolve_scope, scope_at
from .types import MjType, assignable

__all__ = [
    "Program", "Span", "Region", "SpliceError", "region_text", "splice", "ParseError",
    "parse", "parse_expression", "parse_statements", "parse_type", "pretty_print",
    "render_stmt", "render_stmts", "ScopeInfo", "UnknownNode", "iter_statements", "locate",
    "resolve_scope", "scope_at", "MjType", "assignable",
]
