"""Tree-walking interpreter and xUnit-style test harness for MJ."""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass

from ..lang import ast as A
from ..lang.printer import format_double, format_float, simple_text
from ..lang.types import f32
from .checker import check_with_types
from .messages import RUNTIME_TEMPLATES


class NotChecked(Exception):
    """run_tests was called on a program that has check errors."""


class MjFault(Exception):
    def __init__(self, template: str, **values):
        t = RUNTIME_TEMPLATES[template]
        self.error_type = t.code
        self.message = t.render(**values)
        super().__init__(f"{self.error_type}: {self.message}")


@dataclass(frozen=True)
class ExecLimits:
    max_steps: int = 1_000_000
    max_depth: int = 200

    def __post_init__(self):
        if self.max_steps <= 0 or self.max_depth <= 0:
            raise ValueError("execution limits must be positive")


@dataclass(frozen=True)
class TestOutcome:
    __test__ = False  # not a pytest class
    test_name: str
    status: str  # pass | fail
    error_type: str = ""
    error_message: str = ""
    failing_assertion_source: str = ""

    @property
    def failed(self) -> bool:
        return self.status == "fail"


class ArrayVal:
    __slots__ = ("elems", "elem", "oid")

    def __init__(self, elems, elem, oid):
        self.elems = elems
        self.elem = elem
        self.oid = oid


class ObjVal:
    __slots__ = ("cls", "fields", "oid")

    def __init__(self, cls, fields, oid):
        self.cls = cls
        self.fields = fields
        self.oid = oid


_INT_MOD = 1 << 32
_LONG_MOD = 1 << 64


def wrap(value: int, kind: str) -> int:
    if kind == "int":
        return (value + (1 << 31)) % _INT_MOD - (1 << 31)
    return (value + (1 << 63)) % _LONG_MOD - (1 << 63)


def default_value(t) -> object:
    if t.kind in ("int", "long"):
        return 0
    if t.kind in ("float", "double"):
        return 0.0
    if t.kind == "bool":
        return False
    return None


def format_value(v, kind: str | None = None) -> str:
    """Java-flavoured rendering of a runtime value."""
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "NaN"
        if math.isinf(v):
            return "Infinity" if v > 0 else "-Infinity"
        return format_float(v) if kind == "float" else format_double(v)
    if isinstance(v, str):
        return v
    if isinstance(v, ArrayVal):
        return f"{v.elem}[]@{v.oid}"
    return f"{v.cls}@{v.oid}"


class _Return(Exception):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value


class Interpreter:
    def __init__(self, prog: A.Program, types: dict, limits: ExecLimits):
        self.prog = prog
        self.types = types
        self.limits = limits
        self.classes = {c.name: c for c in prog.classes}
        self.methods = {c.name: {m.name: m for m in c.methods} for c in prog.classes}
        self.steps = 0
        self.depth = 0
        self.next_oid = 1
        self.current_assert = None

    def tick(self):
        self.steps += 1
        if self.steps > self.limits.max_steps:
            raise MjFault("steps", n=self.limits.max_steps)

    def alloc(self) -> int:
        oid = self.next_oid
        self.next_oid += 1
        return oid

    # ---- objects and calls ------------------------------------------------

    def instantiate(self, cls_name: str, args: list) -> ObjVal:
        cls = self.classes[cls_name]
        obj = ObjVal(cls_name, {f.name: default_value(f.type) for f in cls.fields}, self.alloc())
        ctor = next((c for c in cls.ctors if len(c.params) == len(args)), None)
        if ctor is not None:
            self.invoke(obj, ctor, args)
        return obj

    def invoke(self, this: ObjVal, member, args: list):
        self.depth += 1
        if self.depth > self.limits.max_depth:
            raise MjFault("depth", n=self.limits.max_depth)
        self.tick()
        env = {p.name: v for p, v in zip(member.params, args)}
        try:
            self.block(member.body.stmts, env, this)
        except _Return as r:
            return r.value
        finally:
            self.depth -= 1
        return None

    # ---- statements -----------------------------------------------------

    def block(self, stmts, env, this):
        for s in stmts:
            self.stmt(s, env, this)

    def stmt(self, s, env, this):
        self.tick()
        t = type(s)
        if t is A.Assign:
            self.assign(s.target, self.eval(s.value, env, this), env, this)
        elif t is A.VarDecl:
            env[s.name] = default_value(s.type) if s.init is None else self.eval(s.init, env, this)
        elif t is A.ExprStmt:
            self.eval(s.expr, env, this)
        elif t is A.If:
            if self.eval(s.cond, env, this):
                self.block(s.then.stmts, env, this)
            elif s.orelse is not None:
                self.block(s.orelse.stmts, env, this)
        elif t is A.While:
            while self.eval(s.cond, env, this):
                self.tick()
                self.block(s.body.stmts, env, this)
        elif t is A.For:
            if s.init is not None:
                self.stmt(s.init, env, this)
            while self.eval(s.cond, env, this):
                self.tick()
                self.block(s.body.stmts, env, this)
                if s.update is not None:
                    self.stmt(s.update, env, this)
        elif t is A.Return:
            raise _Return(None if s.value is None else self.eval(s.value, env, this))
        elif t is A.Assert:
            self.assertion(s, env, this)
        else:
            raise TypeError(s)

    def assertion(self, s, env, this):
        self.current_assert = s
        if s.kind == "assertTrue":
            if not self.eval(s.args[0], env, this):
                raise MjFault("assertion")
        else:
            expected = self.eval(s.args[0], env, this)
            actual = self.eval(s.args[1], env, this)
            if not self.equal(expected, actual):
                raise MjFault("comparison",
                              e=format_value(expected, self.kind_of(s.args[0])),
                              a=format_value(actual, self.kind_of(s.args[1])))
        self.current_assert = None

    def kind_of(self, e) -> str | None:
        t = self.types.get(e.id)
        return t.kind if t is not None else None

    def assign(self, target, value, env, this):
        t = type(target)
        if t is A.Name:
            if target.name in env:
                env[target.name] = value
            else:
                this.fields[target.name] = value
        elif t is A.FieldAccess:
            obj = self.eval(target.obj, env, this)
            if obj is None:
                raise MjFault("null")
            obj.fields[target.name] = value
        else:
            arr = self.eval(target.array, env, this)
            idx = self.eval(target.index, env, this)
            if arr is None:
                raise MjFault("null")
            if not 0 <= idx < len(arr.elems):
                raise MjFault("index", i=idx, n=len(arr.elems))
            arr.elems[idx] = value

    # ---- expressions ----------------------------------------------------

    def eval(self, e, env, this):
        t = type(e)
        if t is A.Literal:
            return e.value
        if t is A.Name:
            if e.name in env:
                return env[e.name]
            return this.fields[e.name]
        if t is A.Binary:
            return self.binary(e, env, this)
        if t is A.This:
            return this
        if t is A.FieldAccess:
            obj = self.eval(e.obj, env, this)
            if obj is None:
                raise MjFault("null")
            if type(obj) is ArrayVal:
                return len(obj.elems)
            return obj.fields[e.name]
        if t is A.Index:
            arr = self.eval(e.array, env, this)
            idx = self.eval(e.index, env, this)
            if arr is None:
                raise MjFault("null")
            if not 0 <= idx < len(arr.elems):
                raise MjFault("index", i=idx, n=len(arr.elems))
            return arr.elems[idx]
        if t is A.Call:
            return self.call(e, env, this)
        if t is A.Unary:
            v = self.eval(e.operand, env, this)
            if e.op == "!":
                return not v
            kind = self.types[e.id].kind
            if kind in ("int", "long"):
                return wrap(-v, kind)
            return -v
        if t is A.Cond:
            return self.eval(e.then if self.eval(e.cond, env, this) else e.orelse, env, this)
        if t is A.New:
            args = [self.eval(a, env, this) for a in e.args]
            return self.instantiate(e.cls, args)
        if t is A.NewArray:
            if e.elems is not None:
                return ArrayVal([self.eval(x, env, this) for x in e.elems], e.elem, self.alloc())
            n = self.eval(e.size, env, this)
            if n < 0:
                raise MjFault("negative_size", n=n)
            if n > self.limits.max_steps:
                raise MjFault("steps", n=self.limits.max_steps)
            self.steps += n
            return ArrayVal([default_value(e.elem)] * n, e.elem, self.alloc())
        raise TypeError(e)

    def call(self, e, env, this):
        if e.obj is None:
            recv = this
        else:
            recv = self.eval(e.obj, env, this)
        args = [self.eval(a, env, this) for a in e.args]
        if recv is None:
            raise MjFault("null")
        if type(recv) is str:
            return self.string_method(recv, e.name, args)
        return self.invoke(recv, self.methods[recv.cls][e.name], args)

    def string_method(self, s: str, name: str, args: list):
        if name == "length":
            return len(s)
        if name == "charAt":
            i = args[0]
            if not 0 <= i < len(s):
                raise MjFault("index", i=i, n=len(s))
            return s[i]
        lo, hi = args
        if not 0 <= lo <= len(s):
            raise MjFault("index", i=lo, n=len(s))
        if not lo <= hi <= len(s):
            raise MjFault("index", i=hi, n=len(s))
        return s[lo:hi]

    def equal(self, a, b) -> bool:
        if a is None or b is None:
            return a is b
        if isinstance(a, (ArrayVal, ObjVal)) or isinstance(b, (ArrayVal, ObjVal)):
            return a is b
        return a == b

    def binary(self, e, env, this):
        op = e.op
        if op == "&&":
            return bool(self.eval(e.left, env, this)) and bool(self.eval(e.right, env, this))
        if op == "||":
            return bool(self.eval(e.left, env, this)) or bool(self.eval(e.right, env, this))
        a = self.eval(e.left, env, this)
        b = self.eval(e.right, env, this)
        if op == "==":
            return self.equal(a, b)
        if op == "!=":
            return not self.equal(a, b)
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        kind = self.types[e.id].kind
        if kind == "string":
            r = format_value(a, self.kind_of(e.left)) + format_value(b, self.kind_of(e.right))
            self.steps += len(r) >> 4
            if self.steps > self.limits.max_steps:
                raise MjFault("steps", n=self.limits.max_steps)
            return r
        if kind in ("int", "long"):
            if op == "+":
                r = a + b
            elif op == "-":
                r = a - b
            elif op == "*":
                r = a * b
            else:
                if b == 0:
                    raise MjFault("division")
                q = abs(a) // abs(b)
                if (a < 0) != (b < 0):
                    q = -q
                r = q if op == "/" else a - b * q
            return wrap(r, kind)
        if op == "+":
            r = a + b
        elif op == "-":
            r = a - b
        elif op == "*":
            r = a * b
        elif op == "/":
            if b == 0:
                r = math.nan if a == 0 or math.isnan(a) else math.copysign(math.inf, a) * math.copysign(1.0, b)
            else:
                r = a / b
        else:
            r = math.fmod(a, b) if b != 0 else math.nan
        return f32(r) if kind == "float" else r


def test_methods(prog: A.Program):
    for cls in prog.classes:
        for m in cls.methods:
            if m.is_test:
                yield cls, m


def run_tests(prog: A.Program, limits: ExecLimits | None = None,
              stop_at_first_failure: bool = False, types: dict | None = None) -> list[TestOutcome]:
    """Run every `test_*` method in declaration order, each on a fresh instance."""
    limits = limits or ExecLimits()
    if types is None:
        errors, types = check_with_types(prog)
        if errors:
            raise NotChecked(errors[0].message)
    outcomes = []
    old_limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(old_limit, 40 * limits.max_depth + 2000))
    try:
        for cls, m in test_methods(prog):
            outcomes.append(_run_one(prog, types, limits, cls, m))
            if stop_at_first_failure and outcomes[-1].failed:
                break
    finally:
        sys.setrecursionlimit(old_limit)
    return outcomes


def _run_one(prog, types, limits, cls, method) -> TestOutcome:
    name = f"{cls.name}.{method.name}"
    interp = Interpreter(prog, types, limits)
    try:
        obj = interp.instantiate(cls.name, [])
        interp.invoke(obj, method, [])
    except MjFault as fault:
        src = simple_text(interp.current_assert) + ";" if interp.current_assert is not None else ""
        return TestOutcome(name, "fail", fault.error_type, fault.message, src)
    except RecursionError:
        return TestOutcome(name, "fail", "StepLimitExceeded",
                           RUNTIME_TEMPLATES["depth"].render(n=limits.max_depth), "")
    return TestOutcome(name, "pass")


def first_failure(outcomes: list[TestOutcome]) -> TestOutcome | None:
    for o in outcomes:
        if o.failed:
            return o
    return None
