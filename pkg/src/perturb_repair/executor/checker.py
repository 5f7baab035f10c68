"""Static checker for MJ: name resolution, typing and return analysis."""
from __future__ import annotations

from dataclasses import dataclass

from ..lang import ast as A
from ..lang.ast import Span
from ..lang.types import (BOOL, DOUBLE, FLOAT, INT, LONG, NULL, STRING, VOID, MjType,
                          array_of, assignable, class_type, comparable, numeric_join)
from .messages import CHECK_TEMPLATES

_LITERAL_TYPES = {"int": INT, "long": LONG, "float": FLOAT, "double": DOUBLE,
                  "bool": BOOL, "string": STRING, "null": NULL}

# builtin methods on string values: name -> (param types, return type)
STRING_METHODS = {
    "length": ([], INT),
    "charAt": ([INT], STRING),
    "substring": ([INT, INT], STRING),
}


@dataclass(frozen=True)
class CheckError:
    code: str
    key: str
    message: str
    span: Span


@dataclass
class _ClassInfo:
    decl: A.ClassDecl
    fields: dict
    methods: dict
    ctor_arities: list


class Checker:
    def __init__(self, prog: A.Program):
        self.prog = prog
        self.errors: list[CheckError] = []
        self.types: dict[int, MjType] = {}
        self.classes: dict[str, _ClassInfo] = {}

    def error(self, template: str, span: Span, **values):
        t = CHECK_TEMPLATES[template]
        self.errors.append(CheckError(t.code, t.key, t.render(**values), span))

    # ---- driver -------------------------------------------------------

    def run(self) -> list[CheckError]:
        for cls in self.prog.classes:
            if cls.name in self.classes:
                self.error("duplicate", cls.span, what="class", name=cls.name, where="program")
                continue
            info = _ClassInfo(cls, {}, {}, [len(c.params) for c in cls.ctors] or [0])
            for f in cls.fields:
                if f.name in info.fields:
                    self.error("duplicate", f.span, what="variable", name=f.name, where=f"class {cls.name}")
                else:
                    info.fields[f.name] = f.type
            for m in cls.methods:
                if m.name in info.methods:
                    self.error("duplicate", m.span, what="method", name=m.name, where=f"class {cls.name}")
                else:
                    info.methods[m.name] = m
            self.classes[cls.name] = info
        for cls in self.prog.classes:
            for f in cls.fields:
                self.check_type(f.type, f.span)
            for c in cls.ctors:
                self.member(cls, c, VOID, cls.name)
            for m in cls.methods:
                self.check_type(m.ret, m.span)
                self.member(cls, m, m.ret, m.name)
        self.errors.sort(key=lambda e: e.span.start)
        return self.errors

    def check_type(self, t: MjType, span: Span) -> bool:
        while t.kind == "array":
            t = t.elem
        if t.kind == "class" and t.name not in self.classes:
            self.error("cannot_find_symbol", span, name=t.name)
            return False
        return True

    def member(self, cls: A.ClassDecl, member, ret: MjType, where: str):
        self.cls = self.classes[cls.name]
        self.ret = ret
        self.where = where
        scope: dict[str, MjType] = {}
        for p in member.params:
            self.check_type(p.type, p.span)
            if p.name in scope:
                self.error("duplicate", p.span, what="variable", name=p.name, where=f"method {where}")
            scope[p.name] = p.type
        self.scopes = [scope]
        self.block(member.body)
        if ret != VOID and completes_normally(member.body):
            end = member.span
            self.error("missing_return", Span(end.line, end.column, end.end - 1, end.end))

    # ---- statements ---------------------------------------------------

    def lookup_local(self, name: str) -> MjType | None:
        for sc in reversed(self.scopes):
            if name in sc:
                return sc[name]
        return None

    def declare(self, name: str, t: MjType, span: Span):
        if self.lookup_local(name) is not None:
            self.error("duplicate", span, what="variable", name=name, where=f"method {self.where}")
        self.scopes[-1][name] = t

    def block(self, b: A.Block):
        self.scopes.append({})
        for s in b.stmts:
            self.stmt(s)
        self.scopes.pop()

    def expect(self, e: A.Expr, want: MjType):
        got = self.expr(e)
        if got is not None and not assignable(got, want):
            self.error("incompatible", e.span, found=got, expected=want)

    def stmt(self, s: A.Stmt):
        if isinstance(s, A.VarDecl):
            ok = self.check_type(s.type, s.span)
            if s.init is not None:
                if ok:
                    self.expect(s.init, s.type)
                else:
                    self.expr(s.init)
            self.declare(s.name, s.type, s.span)
        elif isinstance(s, A.Assign):
            target = self.expr(s.target)
            if isinstance(s.target, A.FieldAccess) and self.types.get(s.target.obj.id, VOID).kind == "array":
                self.error("cannot_find_symbol", s.target.span, name=f"variable {s.target.name}")
                self.expr(s.value)
            elif target is not None:
                self.expect(s.value, target)
            else:
                self.expr(s.value)
        elif isinstance(s, (A.If, A.While)):
            self.expect(s.cond, BOOL)
            for _, b in A.stmt_blocks(s):
                self.block(b)
        elif isinstance(s, A.For):
            self.scopes.append({})
            if s.init is not None:
                self.stmt(s.init)
            self.expect(s.cond, BOOL)
            if s.update is not None:
                self.stmt(s.update)
            self.block(s.body)
            self.scopes.pop()
        elif isinstance(s, A.Return):
            if s.value is None:
                if self.ret != VOID:
                    self.error("missing_return_value", s.span)
            elif self.ret == VOID:
                self.expr(s.value)
                self.error("unexpected_return", s.value.span)
            else:
                self.expect(s.value, self.ret)
        elif isinstance(s, A.ExprStmt):
            self.expr(s.expr)
        elif isinstance(s, A.Assert):
            if s.kind == "assertTrue":
                self.expect(s.args[0], BOOL)
            else:
                a, b = (self.expr(x) for x in s.args)
                if a is not None and b is not None and not comparable(a, b):
                    self.error("incompatible", s.args[1].span, found=b, expected=a)
        else:
            raise TypeError(s)

    # ---- expressions --------------------------------------------------

    def expr(self, e: A.Expr) -> MjType | None:
        t = self._expr(e)
        if t is not None:
            self.types[e.id] = t
        return t

    def _expr(self, e: A.Expr) -> MjType | None:
        if isinstance(e, A.Literal):
            return _LITERAL_TYPES[e.kind]
        if isinstance(e, A.Name):
            t = self.lookup_local(e.name)
            if t is None:
                t = self.cls.fields.get(e.name)
            if t is None:
                self.error("cannot_find_symbol", e.span, name=e.name)
            return t
        if isinstance(e, A.This):
            return class_type(self.cls.decl.name)
        if isinstance(e, A.FieldAccess):
            obj = self.expr(e.obj)
            if obj is None:
                return None
            if obj.kind == "array" and e.name == "length":
                return INT
            if obj.kind == "class":
                t = self.classes[obj.name].fields.get(e.name) if obj.name in self.classes else None
                if t is not None:
                    return t
            self.error("cannot_find_symbol", e.span, name=e.name)
            return None
        if isinstance(e, A.Index):
            arr = self.expr(e.array)
            idx = self.expr(e.index)
            if idx is not None and idx != INT:
                self.error("incompatible", e.index.span, found=idx, expected=INT)
            if arr is None:
                return None
            if arr.kind != "array":
                self.error("incompatible", e.array.span, found=arr, expected="array")
                return None
            return arr.elem
        if isinstance(e, A.Call):
            return self.call(e)
        if isinstance(e, A.New):
            arg_types = [self.expr(a) for a in e.args]
            info = self.classes.get(e.cls)
            if info is None:
                self.error("cannot_find_symbol", e.span, name=e.cls)
                return None
            ctors = info.decl.ctors
            matching = [c for c in ctors if len(c.params) == len(e.args)]
            if not ctors and not e.args:
                return class_type(e.cls)
            if not matching:
                arities = " or ".join(str(n) for n in info.ctor_arities)
                self.error("wrong_arity", e.span, what="constructor", name=e.cls,
                           expected=f"{arities} arguments", found=len(e.args))
                return class_type(e.cls)
            self.args(matching[0].params, e.args, arg_types)
            return class_type(e.cls)
        if isinstance(e, A.NewArray):
            self.check_type(e.elem, e.span)
            if e.size is not None:
                self.expect(e.size, INT)
            else:
                for x in e.elems:
                    self.expect(x, e.elem)
            return array_of(e.elem)
        if isinstance(e, A.Unary):
            t = self.expr(e.operand)
            if t is None:
                return None
            if e.op == "-" and t.is_numeric:
                return t
            if e.op == "!" and t == BOOL:
                return BOOL
            self.error("bad_operand", e.span, type=t, op=e.op)
            return None
        if isinstance(e, A.Binary):
            return self.binary(e)
        if isinstance(e, A.Cond):
            self.expect(e.cond, BOOL)
            a, b = self.expr(e.then), self.expr(e.orelse)
            if a is None or b is None:
                return None
            if assignable(b, a):
                return a
            if assignable(a, b):
                return b
            self.error("incompatible", e.orelse.span, found=b, expected=a)
            return None
        raise TypeError(e)

    def binary(self, e: A.Binary) -> MjType | None:
        a, b = self.expr(e.left), self.expr(e.right)
        if a is None or b is None:
            return None
        op = e.op
        if op == "+" and STRING in (a, b) and VOID not in (a, b):
            return STRING
        if op in ("+", "-", "*", "/", "%"):
            t = numeric_join(a, b) if a.is_numeric and b.is_numeric else None
            if t is not None:
                return t
        elif op in ("<", "<=", ">", ">="):
            if a.is_numeric and b.is_numeric and numeric_join(a, b) is not None:
                return BOOL
        elif op in ("==", "!="):
            if comparable(a, b):
                return BOOL
        elif op in ("&&", "||"):
            if a == BOOL and b == BOOL:
                return BOOL
        self.error("bad_operands", e.span, op=op, left=a, right=b)
        return None

    def call(self, e: A.Call) -> MjType | None:
        if e.obj is None:
            recv = self.cls
            if e.name not in recv.methods and (self.lookup_local(e.name) or e.name in recv.fields):
                for a in e.args:
                    self.expr(a)
                self.error("not_a_function", e.span, name=e.name)
                return None
        else:
            obj = self.expr(e.obj)
            if obj is None:
                for a in e.args:
                    self.expr(a)
                return None
            if obj == STRING and e.name in STRING_METHODS:
                params, ret = STRING_METHODS[e.name]
                arg_types = [self.expr(a) for a in e.args]
                if len(params) != len(e.args):
                    self.error("wrong_arity", e.span, what="method", name=e.name,
                               expected=f"{len(params)} arguments", found=len(e.args))
                else:
                    for p, a, t in zip(params, e.args, arg_types):
                        if t is not None and not assignable(t, p):
                            self.error("incompatible", a.span, found=t, expected=p)
                return ret
            recv = self.classes.get(obj.name) if obj.kind == "class" else None
            if recv is None or e.name not in recv.methods:
                if recv is not None and e.name in recv.fields:
                    for a in e.args:
                        self.expr(a)
                    self.error("not_a_function", e.span, name=e.name)
                    return None
        arg_types = [self.expr(a) for a in e.args]
        if recv is None or e.name not in recv.methods:
            self.error("cannot_find_symbol", e.span, name=e.name)
            return None
        m = recv.methods[e.name]
        if len(m.params) != len(e.args):
            self.error("wrong_arity", e.span, what="method", name=e.name,
                       expected=f"{len(m.params)} arguments", found=len(e.args))
        else:
            self.args(m.params, e.args, arg_types)
        return m.ret

    def args(self, params, args, arg_types):
        for p, a, t in zip(params, args, arg_types):
            if t is not None and not assignable(t, p.type):
                self.error("incompatible", a.span, found=t, expected=p.type)


def completes_normally(node) -> bool:
    """Whether execution can fall off the end of a block or statement."""
    if isinstance(node, A.Block):
        return all(completes_normally(s) for s in node.stmts)
    if isinstance(node, A.Return):
        return False
    if isinstance(node, A.If):
        if node.orelse is None:
            return True
        return completes_normally(node.then) or completes_normally(node.orelse)
    if isinstance(node, A.While):
        return not (isinstance(node.cond, A.Literal) and node.cond.value is True)
    return True


def check(prog: A.Program) -> list[CheckError]:
    """Static errors ordered by source position; empty iff the program is well typed."""
    return Checker(prog).run()


def check_with_types(prog: A.Program) -> tuple[list[CheckError], dict]:
    c = Checker(prog)
    errors = c.run()
    return errors, c.types
