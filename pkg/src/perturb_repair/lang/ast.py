"""Syntax tree node classes for MJ programs.

Every node carries a NodeId (`id`, assigned in preorder by the parser) and a
source `span`.  Both are excluded from equality, so `==` on two trees is
structural equality.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Iterator, Optional

from .types import MjType


@dataclass(frozen=True)
class Span:
    line: int
    column: int
    start: int  # byte offsets into the UTF-8 source
    end: int


NO_SPAN = Span(0, 0, 0, 0)


@dataclass(eq=True)
class Node:
    id: int = field(default=-1, compare=False, kw_only=True, repr=False)
    span: Span = field(default=NO_SPAN, compare=False, kw_only=True, repr=False)

    def children(self) -> Iterator["Node"]:
        for f in fields(self):
            if f.name in ("id", "span"):
                continue
            value = getattr(self, f.name)
            if isinstance(value, Node):
                yield value
            elif isinstance(value, list):
                for item in value:
                    if isinstance(item, Node):
                        yield item


# ---- expressions -------------------------------------------------------

class Expr(Node):
    pass


@dataclass(eq=True)
class Literal(Expr):
    kind: str  # int long float double bool string null
    value: object


@dataclass(eq=True)
class Name(Expr):
    name: str


@dataclass(eq=True)
class This(Expr):
    pass


@dataclass(eq=True)
class FieldAccess(Expr):
    obj: Expr
    name: str


@dataclass(eq=True)
class Index(Expr):
    array: Expr
    index: Expr


@dataclass(eq=True)
class Call(Expr):
    obj: Optional[Expr]
    name: str
    args: list


@dataclass(eq=True)
class New(Expr):
    cls: str
    args: list


@dataclass(eq=True)
class NewArray(Expr):
    elem: MjType
    size: Optional[Expr]
    elems: Optional[list]


@dataclass(eq=True)
class Unary(Expr):
    op: str
    operand: Expr


@dataclass(eq=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(eq=True)
class Cond(Expr):
    cond: Expr
    then: Expr
    orelse: Expr


# ---- statements --------------------------------------------------------

class Stmt(Node):
    pass


@dataclass(eq=True)
class Block(Node):
    stmts: list


@dataclass(eq=True)
class Hole(Node):
    """Elided block `{ ... }`; only legal in statement fragments."""


@dataclass(eq=True)
class VarDecl(Stmt):
    type: MjType
    name: str
    init: Optional[Expr]


@dataclass(eq=True)
class Assign(Stmt):
    target: Expr
    value: Expr


@dataclass(eq=True)
class If(Stmt):
    cond: Expr
    then: Block
    orelse: Optional[Block]


@dataclass(eq=True)
class While(Stmt):
    cond: Expr
    body: Block


@dataclass(eq=True)
class For(Stmt):
    init: Optional[Stmt]
    cond: Expr
    update: Optional[Stmt]
    body: Block


@dataclass(eq=True)
class Return(Stmt):
    value: Optional[Expr]


@dataclass(eq=True)
class ExprStmt(Stmt):
    expr: Expr


@dataclass(eq=True)
class Assert(Stmt):
    kind: str  # assertTrue | assertEquals
    args: list


COMPOUND = (If, While, For)


def is_compound(stmt: Stmt) -> bool:
    return isinstance(stmt, COMPOUND)


def stmt_blocks(stmt: Stmt) -> list[tuple[str, Block]]:
    """Nested blocks of a statement as (field name, block) pairs."""
    if isinstance(stmt, If):
        out = [("then", stmt.then)]
        if stmt.orelse is not None:
            out.append(("orelse", stmt.orelse))
        return out
    if isinstance(stmt, (While, For)):
        return [("body", stmt.body)]
    return []


# ---- declarations ------------------------------------------------------

@dataclass(eq=True)
class Param(Node):
    type: MjType
    name: str


@dataclass(eq=True)
class FieldDecl(Node):
    type: MjType
    name: str


@dataclass(eq=True)
class Ctor(Node):
    name: str
    params: list
    body: Block


@dataclass(eq=True)
class Method(Node):
    ret: MjType  # VOID for void methods
    name: str
    params: list
    body: Block

    @property
    def is_test(self) -> bool:
        return self.name.startswith("test_")


@dataclass(eq=True)
class ClassDecl(Node):
    name: str
    fields: list
    ctors: list
    methods: list

    @property
    def is_test_class(self) -> bool:
        return any(m.is_test for m in self.methods)


@dataclass(eq=True)
class Program(Node):
    classes: list

    def __post_init__(self):
        self.bindings: dict[int, int] = {}
        self.unresolved: list[int] = []
        self._index: dict[int, Node] | None = None

    def node(self, node_id: int) -> Node:
        if self._index is None:
            self._index = {n.id: n for n in walk(self)}
        return self._index[node_id]

    def class_named(self, name: str) -> ClassDecl | None:
        for c in self.classes:
            if c.name == name:
                return c
        return None

    @property
    def resolved(self) -> bool:
        return not self.unresolved


def walk(node: Node) -> Iterator[Node]:
    """Preorder traversal."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(list(n.children())))


def number_nodes(root: Node) -> int:
    n = 0
    for n, node in enumerate(walk(root)):
        node.id = n
    return n + 1
