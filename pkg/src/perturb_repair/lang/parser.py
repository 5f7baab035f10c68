"""Recursive-descent parser for MJ."""
from __future__ import annotations

from . import ast as A
from .lexer import ParseError, Token, tokenize
from .types import MjType, array_of, f32, named

TYPE_KEYWORDS = {"int", "long", "float", "double", "bool", "string"}

BINARY_LEVELS = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]


class Parser:
    def __init__(self, source: str, allow_holes: bool = False):
        self.tokens = tokenize(source)
        self.pos = 0
        self.allow_holes = allow_holes
        self.in_test = False

    # ---- token helpers ------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.pos + k, len(self.tokens) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("op", "keyword") and t.text == text

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.error(f"'{text}' expected")
        return self.advance()

    def ident(self) -> str:
        if self.tok.kind != "ident":
            self.error("<identifier> expected")
        return self.advance().text

    def error(self, message: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else f"'{t.text}'"
        raise ParseError(f"{message}, found {found}", t.span)

    def done(self, node: A.Node, start: Token) -> A.Node:
        end = self.tokens[self.pos - 1].span if self.pos > 0 else start.span
        node.span = A.Span(start.span.line, start.span.column, start.span.start, end.end)
        return node

    # ---- declarations -------------------------------------------------

    def program(self) -> A.Program:
        start = self.tok
        classes = []
        while self.tok.kind != "eof":
            classes.append(self.class_decl())
        return self.done(A.Program(classes), start)

    def class_decl(self) -> A.ClassDecl:
        start = self.expect("class")
        name = self.ident()
        self.expect("{")
        fields, ctors, methods = [], [], []
        while not self.at("}"):
            mstart = self.tok
            if self.tok.kind == "ident" and self.tok.text == name and self.peek().text == "(":
                self.advance()
                params = self.params()
                self.in_test = False
                ctors.append(self.done(A.Ctor(name, params, self.block()), mstart))
                continue
            if self.at("void"):
                self.advance()
                ret = named("void")
            else:
                ret = self.type_()
            mname = self.ident()
            if self.at("("):
                params = self.params()
                self.in_test = mname.startswith("test_")
                body = self.block()
                self.in_test = False
                methods.append(self.done(A.Method(ret, mname, params, body), mstart))
            else:
                if ret.kind == "void":
                    self.error("'(' expected")
                self.expect(";")
                fields.append(self.done(A.FieldDecl(ret, mname), mstart))
        self.expect("}")
        return self.done(A.ClassDecl(name, fields, ctors, methods), start)

    def params(self) -> list:
        self.expect("(")
        out = []
        if not self.at(")"):
            while True:
                pstart = self.tok
                t = self.type_()
                out.append(self.done(A.Param(t, self.ident()), pstart))
                if not self.at(","):
                    break
                self.advance()
        self.expect(")")
        return out

    def starts_type(self) -> bool:
        t = self.tok
        if t.kind == "keyword" and t.text in TYPE_KEYWORDS:
            return True
        if t.kind == "ident":
            nxt = self.peek()
            if nxt.kind == "ident":
                return True
            if nxt.text == "[" and self.peek(2).text == "]":
                return True
        return False

    def type_(self) -> MjType:
        t = self.tok
        if (t.kind == "keyword" and t.text in TYPE_KEYWORDS) or t.kind == "ident":
            self.advance()
            result = named(t.text)
        else:
            self.error("<type> expected")
        while self.at("[") and self.peek().text == "]":
            self.advance()
            self.advance()
            result = array_of(result)
        return result

    # ---- statements ---------------------------------------------------

    def block(self):
        start = self.expect("{")
        if self.allow_holes and self.at("..."):
            self.advance()
            self.expect("}")
            return self.done(A.Hole(), start)
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("'}' expected")
            stmts.append(self.statement())
        self.expect("}")
        return self.done(A.Block(stmts), start)

    def statement(self) -> A.Stmt:
        start = self.tok
        if self.at("if"):
            return self.if_stmt()
        if self.at("while"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            return self.done(A.While(cond, self.block()), start)
        if self.at("for"):
            self.advance()
            self.expect("(")
            init = None if self.at(";") else self.simple()
            self.expect(";")
            cond = self.expr()
            self.expect(";")
            update = None if self.at(")") else self.simple()
            if isinstance(update, A.VarDecl):
                raise ParseError("illegal start of expression", update.span)
            self.expect(")")
            return self.done(A.For(init, cond, update, self.block()), start)
        if self.at("return"):
            self.advance()
            value = None if self.at(";") else self.expr()
            self.expect(";")
            return self.done(A.Return(value), start)
        if self.at("assertTrue") or self.at("assertEquals"):
            if not self.in_test:
                raise ParseError("assertion outside test method", start.span)
            kind = self.advance().text
            self.expect("(")
            args = [self.expr()]
            if kind == "assertEquals":
                self.expect(",")
                args.append(self.expr())
            self.expect(")")
            self.expect(";")
            return self.done(A.Assert(kind, args), start)
        stmt = self.simple()
        self.expect(";")
        stmt.span = A.Span(stmt.span.line, stmt.span.column, stmt.span.start, self.tokens[self.pos - 1].span.end)
        return stmt

    def if_stmt(self) -> A.If:
        start = self.expect("if")
        self.expect("(")
        cond = self.expr()
        self.expect(")")
        then = self.block()
        orelse = None
        if self.at("else"):
            self.advance()
            if self.at("if"):
                estart = self.tok
                inner = self.if_stmt()
                orelse = self.done(A.Block([inner]), estart)
            else:
                orelse = self.block()
        return self.done(A.If(cond, then, orelse), start)

    def simple(self) -> A.Stmt:
        """VarDecl, Assign or ExprStmt without the trailing semicolon."""
        start = self.tok
        if self.starts_type():
            t = self.type_()
            name = self.ident()
            init = None
            if self.at("="):
                self.advance()
                init = self.expr()
            return self.done(A.VarDecl(t, name, init), start)
        e = self.expr()
        if self.at("="):
            if not isinstance(e, (A.Name, A.FieldAccess, A.Index)):
                raise ParseError("unexpected type: required variable", e.span)
            self.advance()
            return self.done(A.Assign(e, self.expr()), start)
        if not isinstance(e, (A.Call, A.New)):
            raise ParseError("not a statement", e.span)
        return self.done(A.ExprStmt(e), start)

    # ---- expressions --------------------------------------------------

    def expr(self) -> A.Expr:
        start = self.tok
        cond = self.binary(0)
        if self.at("?"):
            self.advance()
            then = self.expr()
            self.expect(":")
            orelse = self.expr()
            return self.done(A.Cond(cond, then, orelse), start)
        return cond

    def binary(self, level: int) -> A.Expr:
        if level == len(BINARY_LEVELS):
            return self.unary()
        start = self.tok
        left = self.binary(level + 1)
        while self.tok.kind == "op" and self.tok.text in BINARY_LEVELS[level]:
            op = self.advance().text
            right = self.binary(level + 1)
            left = self.done(A.Binary(op, left, right), start)
        return left

    def unary(self) -> A.Expr:
        start = self.tok
        if self.at("-") or self.at("!"):
            op = self.advance().text
            return self.done(A.Unary(op, self.unary()), start)
        return self.postfix()

    def postfix(self) -> A.Expr:
        start = self.tok
        e = self.primary()
        while True:
            if self.at("."):
                self.advance()
                name = self.ident()
                if self.at("("):
                    e = self.done(A.Call(e, name, self.args()), start)
                else:
                    e = self.done(A.FieldAccess(e, name), start)
            elif self.at("["):
                if isinstance(e, A.NewArray):
                    self.error("';' expected")
                self.advance()
                idx = self.expr()
                self.expect("]")
                e = self.done(A.Index(e, idx), start)
            else:
                return e

    def args(self) -> list:
        self.expect("(")
        out = []
        if not self.at(")"):
            out.append(self.expr())
            while self.at(","):
                self.advance()
                out.append(self.expr())
        self.expect(")")
        return out

    def primary(self) -> A.Expr:
        t = self.tok
        if t.kind in ("int", "long", "double", "string"):
            self.advance()
            return self.done(A.Literal(t.kind, t.value), t)
        if t.kind == "float":
            self.advance()
            return self.done(A.Literal("float", f32(t.value)), t)
        if t.kind == "keyword":
            if t.text in ("true", "false"):
                self.advance()
                return self.done(A.Literal("bool", t.text == "true"), t)
            if t.text == "null":
                self.advance()
                return self.done(A.Literal("null", None), t)
            if t.text == "this":
                self.advance()
                return self.done(A.This(), t)
            if t.text == "new":
                return self.new_expr()
        if t.kind == "ident":
            self.advance()
            if self.at("("):
                return self.done(A.Call(None, t.text, self.args()), t)
            return self.done(A.Name(t.text), t)
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        self.error("illegal start of expression")

    def new_expr(self) -> A.Expr:
        start = self.expect("new")
        t = self.tok
        if not ((t.kind == "keyword" and t.text in TYPE_KEYWORDS) or t.kind == "ident"):
            self.error("<identifier> expected")
        self.advance()
        if self.at("("):
            if t.kind != "ident":
                self.error("'[' expected")
            return self.done(A.New(t.text, self.args()), start)
        self.expect("[")
        elem = named(t.text)
        if self.at("]"):
            self.advance()
            self.expect("{")
            elems = []
            if not self.at("}"):
                elems.append(self.expr())
                while self.at(","):
                    self.advance()
                    elems.append(self.expr())
            self.expect("}")
            return self.done(A.NewArray(elem, None, elems), start)
        size = self.expr()
        self.expect("]")
        return self.done(A.NewArray(elem, size, None), start)

    def expect_eof(self):
        if self.tok.kind != "eof":
            self.error("end of input expected")


def parse(source: str) -> A.Program:
    """Parse a whole MJ compilation unit; NodeIds are numbered in preorder."""
    from .scope import bind_names

    prog = Parser(source).program()
    A.number_nodes(prog)
    bind_names(prog)
    return prog


def parse_statements(text: str, allow_holes: bool = True, in_test: bool = False) -> list:
    p = Parser(text, allow_holes=allow_holes)
    p.in_test = in_test
    out = []
    while p.tok.kind != "eof":
        out.append(p.statement())
    return out


def parse_expression(text: str) -> A.Expr:
    p = Parser(text)
    e = p.expr()
    p.expect_eof()
    return e


def parse_type(text: str) -> MjType:
    p = Parser(text)
    t = p.type_()
    p.expect_eof()
    return t
