"""Name binding, statement locations and scope queries."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from . import ast as A
from .types import MjType, class_type

# A block path addresses a Block inside a program:
#   (class index, "ctor" | "method", member index, (stmt index, block field), ...)
BlockPath = tuple


class UnknownNode(KeyError):
    pass


@dataclass
class StmtLoc:
    block_path: BlockPath
    index: int
    stmt: A.Stmt
    cls: A.ClassDecl
    member: A.Node  # Ctor or Method

    @property
    def in_test(self) -> bool:
        """Test methods and anything else declared in a test class."""
        return self.cls.is_test_class or isinstance(self.member, A.Method) and self.member.is_test


@dataclass
class ScopeInfo:
    class_name: str
    method_name: str
    variables: dict  # name -> MjType, fields first then params and locals
    methods: dict  # declaring type name -> list of Method
    block: list  # statements of the enclosing block
    index: int  # position of the query point in `block`
    locals: dict = field(default_factory=dict)


def member_at(prog: A.Program, path: BlockPath):
    cls = prog.classes[path[0]]
    members = cls.ctors if path[1] == "ctor" else cls.methods
    return cls, members[path[2]]


def block_at(prog: A.Program, path: BlockPath) -> A.Block:
    _, member = member_at(prog, path)
    block = member.body
    for idx, fname in path[3:]:
        block = getattr(block.stmts[idx], fname)
    return block


def child_path(path: BlockPath, index: int, fname: str) -> BlockPath:
    return path + ((index, fname),)


def iter_statements(prog: A.Program, include_tests: bool = False) -> Iterator[StmtLoc]:
    """Block-level statements in preorder (For init/update are part of their For)."""
    for ci, cls in enumerate(prog.classes):
        members = [("ctor", i, c) for i, c in enumerate(cls.ctors)]
        members += [("method", i, m) for i, m in enumerate(cls.methods)]
        for kind, mi, member in members:
            if not include_tests and (cls.is_test_class or isinstance(member, A.Method) and member.is_test):
                continue
            yield from _iter_block(member.body, (ci, kind, mi), cls, member)


def _iter_block(block: A.Block, path, cls, member):
    for i, st in enumerate(block.stmts):
        yield StmtLoc(path, i, st, cls, member)
        for fname, sub in A.stmt_blocks(st):
            if isinstance(sub, A.Block):
                yield from _iter_block(sub, child_path(path, i, fname), cls, member)


def locate(prog: A.Program, node_id: int) -> StmtLoc:
    """The innermost block-level statement containing `node_id`."""
    best = None
    for loc in iter_statements(prog, include_tests=True):
        if loc.stmt.id == node_id:
            return loc
        if any(n.id == node_id for n in _own_nodes(loc.stmt)):
            best = loc
    if best is None:
        raise UnknownNode(node_id)
    return best


def _own_nodes(stmt: A.Stmt):
    """Nodes of a statement excluding its nested blocks."""
    blocks = {id(b) for _, b in A.stmt_blocks(stmt)}
    stack = [stmt]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(c for c in n.children() if id(c) not in blocks)


def own_nodes(stmt: A.Stmt) -> list:
    return list(_own_nodes(stmt))


def class_methods(prog: A.Program) -> dict:
    return {c.name: list(c.methods) for c in prog.classes}


def scope_at(prog: A.Program, path: BlockPath, index: int) -> ScopeInfo:
    """Variables visible just before statement `index` of the block at `path`."""
    cls, member = member_at(prog, path)
    variables: dict[str, MjType] = {f.name: f.type for f in cls.fields}
    local: dict[str, MjType] = {}
    for p in member.params:
        local[p.name] = p.type
    block = member.body
    for idx, fname in path[3:]:
        _add_decls(block.stmts[:idx], local)
        st = block.stmts[idx]
        if isinstance(st, A.For) and isinstance(st.init, A.VarDecl):
            local[st.init.name] = st.init.type
        block = getattr(st, fname)
    _add_decls(block.stmts[:index], local)
    variables.update(local)
    name = member.name if isinstance(member, A.Method) else cls.name
    return ScopeInfo(cls.name, name, variables, class_methods(prog), list(block.stmts), index, local)


def _add_decls(stmts, into: dict):
    for st in stmts:
        if isinstance(st, A.VarDecl):
            into[st.name] = st.type


def resolve_scope(prog: A.Program, node_id: int) -> ScopeInfo:
    loc = locate(prog, node_id)
    info = scope_at(prog, loc.block_path, loc.index)
    st = loc.stmt
    if isinstance(st, A.For) and isinstance(st.init, A.VarDecl) and node_id != st.id:
        init_ids = {n.id for n in A.walk(st.init)}
        if node_id not in init_ids:
            info.variables[st.init.name] = st.init.type
            info.locals[st.init.name] = st.init.type
    return info


# ---- binding -----------------------------------------------------------

def bind_names(prog: A.Program) -> None:
    """Record declaration NodeIds for names, `this.f`, unqualified calls and `new C`."""
    bindings: dict[int, int] = {}
    unresolved: list[int] = []
    classes = {c.name: c for c in prog.classes}

    def bind(node_id, decl):
        if decl is None:
            unresolved.append(node_id)
        else:
            bindings[node_id] = decl.id

    for cls in prog.classes:
        fields = {f.name: f for f in cls.fields}
        methods = {m.name: m for m in cls.methods}

        def expr(e, scopes):
            if isinstance(e, A.Name):
                for sc in reversed(scopes):
                    if e.name in sc:
                        bind(e.id, sc[e.name])
                        return
                bind(e.id, fields.get(e.name))
                return
            if isinstance(e, A.FieldAccess) and isinstance(e.obj, A.This):
                bind(e.id, fields.get(e.name))
            elif isinstance(e, A.Call) and e.obj is None:
                bind(e.id, methods.get(e.name))
            elif isinstance(e, A.New):
                bind(e.id, classes.get(e.cls))
            for c in e.children():
                expr(c, scopes)

        def stmt(s, scopes):
            if isinstance(s, A.VarDecl):
                if s.init is not None:
                    expr(s.init, scopes)
                scopes[-1][s.name] = s
            elif isinstance(s, A.For):
                scopes.append({})
                if s.init is not None:
                    stmt(s.init, scopes)
                expr(s.cond, scopes)
                if s.update is not None:
                    stmt(s.update, scopes)
                block(s.body, scopes)
                scopes.pop()
            elif A.is_compound(s):
                expr(s.cond, scopes)
                for _, b in A.stmt_blocks(s):
                    block(b, scopes)
            else:
                for c in s.children():
                    expr(c, scopes)

        def block(b, scopes):
            if not isinstance(b, A.Block):
                return
            scopes.append({})
            for s in b.stmts:
                stmt(s, scopes)
            scopes.pop()

        for member in list(cls.ctors) + list(cls.methods):
            block(member.body, [{p.name: p for p in member.params}])
    prog.bindings = bindings
    prog.unresolved = unresolved


def this_type(cls: A.ClassDecl) -> MjType:
    return class_type(cls.name)
