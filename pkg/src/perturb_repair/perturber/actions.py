"""The fourteen perturbation actions: candidate enumeration and application.

P1-P8 replace one element of a statement, P9-P11 remove code, P12-P14 insert
code copied from elsewhere in the same program.
"""
from __future__ import annotations

import copy
from dataclasses import dataclass

from ..executor.checker import STRING_METHODS, check_with_types
from ..lang import ast as A
from ..lang.edit import Region
from ..lang.parser import parse, parse_expression, parse_statements, parse_type
from ..lang.printer import expr_text, literal_text, pretty_print, render_stmt
from ..lang.scope import StmtLoc, UnknownNode, iter_statements, own_nodes, scope_at
from ..lang.types import BOOL, DOUBLE, FLOAT, INT, LONG, STRING, VOID, MjType, array_of, class_type, f32

TAGS = tuple(f"P{i}" for i in range(1, 15))
REPLACEMENTS = TAGS[:8]
NAMES = {
    "P1": "ReplaceType", "P2": "ReplaceOperator", "P3": "ReplaceLiteral",
    "P4": "ReplaceConstructor", "P5": "ReplaceVariable", "P6": "ReplaceExpression",
    "P7": "ReplaceInvocation", "P8": "ReplaceStatement", "P9": "RemoveStatement",
    "P10": "UnwrapIf", "P11": "RemoveBlock", "P12": "InsertStatement",
    "P13": "WrapWithCondition", "P14": "InsertBlock",
}

OP_GROUPS = [("+", "-", "*", "/", "%"), ("<", "<=", ">", ">=", "==", "!="), ("&&", "||")]
BASE_TYPES = [INT, LONG, FLOAT, DOUBLE, BOOL, STRING]


class IllegalAction(ValueError):
    pass


@dataclass(frozen=True)
class PerturbationAction:
    tag: str
    target: int  # NodeId of the perturbed statement
    element: int | None = None  # NodeId of the replaced sub-element
    new: str | None = None  # source text of the replacement / inserted code
    donor: int | None = None  # NodeId the inserted code was copied from

    @property
    def name(self) -> str:
        return NAMES[self.tag]

    def to_json(self) -> dict:
        return {"tag": self.tag, "target": self.target, "element": self.element,
                "new": self.new, "donor": self.donor}

    @classmethod
    def from_json(cls, d: dict) -> "PerturbationAction":
        return cls(d["tag"], d["target"], d.get("element"), d.get("new"), d.get("donor"))


def default_literal(t: MjType) -> str:
    return {"int": "0", "long": "0L", "float": "0.0f", "double": "0.0",
            "bool": "false", "string": '""'}.get(t.kind, "null")


class CandidateIndex:
    """Per-program tables shared by candidate enumeration for every statement."""

    def __init__(self, prog: A.Program):
        self.prog = prog
        _, self.types = check_with_types(prog)
        self.locs: dict[int, StmtLoc] = {loc.stmt.id: loc for loc in iter_statements(prog, include_tests=True)}
        self.classes = {c.name: c for c in prog.classes}
        self.app_classes = [c for c in prog.classes if not c.is_test_class]
        self.type_pool = BASE_TYPES + [class_type(c.name) for c in self.app_classes]
        code = [loc for loc in self.locs.values() if not loc.in_test]
        self.simple_donors = _by_text((render_stmt(l.stmt), l.stmt.id) for l in code if not A.is_compound(l.stmt))
        self.block_donors = _by_text((render_stmt(l.stmt), l.stmt.id) for l in code if A.is_compound(l.stmt))
        self.cond_donors = _distinct((expr_text(l.stmt.cond), l.stmt.cond.id) for l in code
                                     if isinstance(l.stmt, (A.If, A.While)))
        self.string_literals = sorted({n.value for n in A.walk(prog)
                                       if isinstance(n, A.Literal) and n.kind == "string"})
        self._member_exprs: dict[int, list] = {}

    def member_exprs(self, member) -> list:
        if member.id not in self._member_exprs:
            self._member_exprs[member.id] = [n for n in A.walk(member.body) if isinstance(n, A.Expr)]
        return self._member_exprs[member.id]

    def loc(self, stmt_id: int) -> StmtLoc:
        try:
            return self.locs[stmt_id]
        except KeyError:
            raise UnknownNode(stmt_id) from None

    def scope_vars(self, loc: StmtLoc) -> dict:
        info = scope_at(self.prog, loc.block_path, loc.index)
        st = loc.stmt
        if isinstance(st, A.For) and isinstance(st.init, A.VarDecl):
            info.variables[st.init.name] = st.init.type
        return info.variables

    # ---- enumeration --------------------------------------------------

    def candidates(self, stmt_id: int) -> list[PerturbationAction]:
        loc = self.loc(stmt_id)
        st = loc.stmt
        own = own_nodes(st)
        scope = self.scope_vars(loc)
        out: list[PerturbationAction] = []
        out += self._p1(st, own)
        out += self._p2(st, own)
        out += self._p3(st, own)
        out += self._p4(st, own, scope)
        out += self._p5(st, own, scope, loc)
        out += self._p6(st, own, loc)
        out += self._p7(st, own, scope, loc)
        out += self._p8(st, loc)
        if not A.is_compound(st):
            out.append(PerturbationAction("P9", st.id))
        if isinstance(st, A.If) and st.then.stmts:
            out.append(PerturbationAction("P10", st.id))
        if A.is_compound(st):
            out.append(PerturbationAction("P11", st.id))
        out += _insertions("P12", st.id, self.simple_donors)
        out += [PerturbationAction("P13", st.id, new=t, donor=d) for t, d in self.cond_donors]
        out += _insertions("P14", st.id, self.block_donors)
        return out

    def _p1(self, st, own):
        out = []
        for n in own:
            if not isinstance(n, A.VarDecl):
                continue
            dims, base = 0, n.type
            while base.kind == "array":
                dims, base = dims + 1, base.elem
            for u in self.type_pool:
                if u == base:
                    continue
                for _ in range(dims):
                    u = array_of(u)
                out.append(PerturbationAction("P1", st.id, n.id, str(u)))
        return out

    def _p2(self, st, own):
        out = []
        for n in own:
            if isinstance(n, A.Binary):
                group = next(g for g in OP_GROUPS if n.op in g)
                out += [PerturbationAction("P2", st.id, n.id, op) for op in group if op != n.op]
        return out

    def _p3(self, st, own):
        out = []
        for n in own:
            if not isinstance(n, A.Literal) or n.kind == "null":
                continue
            for v in literal_alternatives(n, self.string_literals):
                out.append(PerturbationAction("P3", st.id, n.id, literal_text(A.Literal(n.kind, v))))
        return out

    def _p4(self, st, own, scope):
        out = []
        for n in own:
            if not isinstance(n, A.New):
                continue
            for cls in self.app_classes:
                sigs = [[p.type for p in c.params] for c in cls.ctors] or [[]]
                for params in sigs:
                    if cls.name == n.cls and len(params) == len(n.args):
                        if len(n.args) < 2:
                            continue
                        args = [expr_text(a) for a in n.args]
                        args[0], args[1] = args[1], args[0]
                        if args == [expr_text(a) for a in n.args]:
                            continue
                    else:
                        args = adapt_args(n.args, params, scope)
                    out.append(PerturbationAction("P4", st.id, n.id, f"new {cls.name}({', '.join(args)})"))
        return _dedupe(out)

    def _p5(self, st, own, scope, loc):
        out = []
        fields = {f.name: f.type for f in loc.cls.fields}
        for n in own:
            if isinstance(n, A.Name):
                decl = self.prog.bindings.get(n.id)
                if decl is None or n.name not in scope:
                    continue
                t = scope[n.name]
                out += [PerturbationAction("P5", st.id, n.id, v) for v, vt in scope.items() if vt == t and v != n.name]
            elif isinstance(n, A.FieldAccess) and isinstance(n.obj, A.This) and n.name in fields:
                t = fields[n.name]
                out += [PerturbationAction("P5", st.id, n.id, v) for v, vt in fields.items() if vt == t and v != n.name]
        return out

    def _p6(self, st, own, loc):
        out = []
        fixed_roots = set()
        if isinstance(st, A.ExprStmt):
            fixed_roots.add(st.expr.id)
        for n in own:
            if isinstance(n, A.Assign):
                fixed_roots.add(n.target.id)
            if isinstance(n, A.ExprStmt):
                fixed_roots.add(n.expr.id)
        donors = [d for d in self.member_exprs(loc.member) if isinstance(d, _COMPOSITE)]
        for n in own:
            if isinstance(n, A.Binary) and n.op in ("&&", "||"):
                out.append(PerturbationAction("P6", st.id, n.id, expr_text(n.left)))
                out.append(PerturbationAction("P6", st.id, n.id, expr_text(n.right)))
            if not isinstance(n, _COMPOSITE) or n.id in fixed_roots and not isinstance(n, A.Call):
                continue
            t = self.types.get(n.id)
            if t is None:
                continue
            text = expr_text(n)
            for d in donors:
                if self.types.get(d.id) != t:
                    continue
                if n.id in fixed_roots and not isinstance(d, (A.Call, A.New)):
                    continue
                dt = expr_text(d)
                if dt != text:
                    out.append(PerturbationAction("P6", st.id, n.id, dt))
        return _dedupe(out)

    def _p7(self, st, own, scope, loc):
        out = []
        for n in own:
            if not isinstance(n, A.Call):
                continue
            if n.obj is None:
                decl, prefix = loc.cls.name, ""
            else:
                recv = self.types.get(n.obj.id)
                if recv is None:
                    continue
                decl, prefix = (recv.name if recv.kind == "class" else str(recv)), expr_text_target(n.obj) + "."
            if decl == "string":
                sigs = {k: v[0] for k, v in STRING_METHODS.items()}
            elif decl in self.classes:
                sigs = {m.name: [p.type for p in m.params] for m in self.classes[decl].methods if not m.is_test}
            else:
                continue
            for name, params in sigs.items():
                if name == n.name:
                    continue
                args = adapt_args(n.args, params, scope)
                out.append(PerturbationAction("P7", st.id, n.id, f"{prefix}{name}({', '.join(args)})"))
        return out

    def _p8(self, st, loc):
        if A.is_compound(st):
            return []
        member = loc.member
        value_return = (isinstance(st, A.Return) and st.value is not None
                        and isinstance(member, A.Method) and member.ret != VOID)
        text = render_stmt(st)
        out, seen = [], set()
        for other in self.locs.values():
            if other.in_test or other.cls is not loc.cls or A.is_compound(other.stmt):
                continue
            o = other.stmt
            if value_return != (isinstance(o, A.Return) and o.value is not None):
                continue
            if not value_return and isinstance(o, A.Return):
                continue
            t = render_stmt(o)
            if t != text and t not in seen:
                seen.add(t)
                out.append(PerturbationAction("P8", st.id, new=t, donor=o.id))
        return out


_COMPOSITE = (A.Binary, A.Unary, A.Call, A.Cond)


def expr_text_target(e: A.Expr) -> str:
    text = expr_text(e)
    if isinstance(e, (A.Binary, A.Unary, A.Cond, A.NewArray)):
        return f"({text})"
    return text


def _distinct(pairs) -> list:
    seen, out = set(), []
    for text, node_id in pairs:
        if text not in seen:
            seen.add(text)
            out.append((text, node_id))
    return out


def _by_text(pairs) -> dict:
    """Rendered statement text -> NodeIds of the statements with that text."""
    out: dict = {}
    for text, node_id in pairs:
        out.setdefault(text, []).append(node_id)
    return out


def _insertions(tag: str, target: int, donors: dict) -> list:
    """One insertion per distinct text found in some statement other than the target."""
    out = []
    for text, ids in donors.items():
        donor = next((i for i in ids if i != target), None)
        if donor is not None:
            out.append(PerturbationAction(tag, target, new=text, donor=donor))
    return out


def _dedupe(actions: list) -> list:
    seen, out = set(), []
    for a in actions:
        key = (a.element, a.new)
        if key not in seen:
            seen.add(key)
            out.append(a)
    return out


def literal_alternatives(lit: A.Literal, strings: list) -> list:
    v = lit.value
    if lit.kind in ("int", "long"):
        return [x for x in dict.fromkeys([0, 1, v - 1, v + 1]) if x >= 0 and x != v]
    if lit.kind in ("float", "double"):
        rnd = f32 if lit.kind == "float" else float
        return [x for x in dict.fromkeys(rnd(y) for y in (0.0, 1.0, v - 1.0, v + 1.0)) if x >= 0 and x != v]
    if lit.kind == "bool":
        return [not v]
    if lit.kind == "string":
        return [s for s in [""] + strings if s != v]
    return []


def adapt_args(old_args: list, params: list, scope: dict) -> list[str]:
    """Argument texts for a call with `params`, reusing old arguments positionally."""
    out = []
    for i, p in enumerate(params):
        if i < len(old_args):
            out.append(expr_text(old_args[i]))
            continue
        var = next((name for name, t in scope.items() if t == p), None)
        out.append(var if var is not None else default_literal(p))
    return out


def enumerate_candidates(prog: A.Program, stmt_id: int, index: CandidateIndex | None = None) -> list:
    """Every legal perturbation of the statement `stmt_id`."""
    return (index or CandidateIndex(prog)).candidates(stmt_id)


# ---- application --------------------------------------------------------

def _replace_child(root: A.Node, old: A.Node, new: A.Node) -> None:
    for parent in A.walk(root):
        for fname, value in vars(parent).items():
            if value is old:
                setattr(parent, fname, new)
                return
            if isinstance(value, list):
                for i, item in enumerate(value):
                    if item is old:
                        value[i] = new
                        return
    raise IllegalAction("element not found under target")


def _own_element(stmt: A.Stmt, element_id: int | None, kind) -> A.Node:
    for n in own_nodes(stmt):
        if n.id == element_id and isinstance(n, kind):
            return n
    raise IllegalAction(f"element {element_id} is not a {getattr(kind, '__name__', kind)} of the target")


def apply_with_region(prog: A.Program, action: PerturbationAction) -> tuple[A.Program, Region]:
    """Apply `action` to a copy of `prog`; also return the edited region of the result."""
    work = copy.deepcopy(prog)
    locs = {loc.stmt.id: loc for loc in iter_statements(work, include_tests=True)}
    if action.target not in locs:
        raise IllegalAction(f"no statement with NodeId {action.target}")
    loc = locs[action.target]
    if loc.in_test:
        raise IllegalAction("test code is not perturbed")
    st = loc.stmt
    stmts = _block(work, loc).stmts
    i = loc.index
    tag = action.tag
    try:
        if tag == "P1":
            _own_element(st, action.element, A.VarDecl).type = parse_type(action.new)
        elif tag == "P2":
            node = _own_element(st, action.element, A.Binary)
            if not any(node.op in g and action.new in g for g in OP_GROUPS):
                raise IllegalAction(f"operator {action.new} cannot replace {node.op}")
            node.op = action.new
        elif tag in ("P3", "P4", "P6", "P7"):
            kind = {"P3": A.Literal, "P4": A.New, "P6": A.Expr, "P7": A.Call}[tag]
            _replace_child(st, _own_element(st, action.element, kind), parse_expression(action.new))
        elif tag == "P5":
            _own_element(st, action.element, (A.Name, A.FieldAccess)).name = action.new
        elif tag == "P8":
            if A.is_compound(st):
                raise IllegalAction("P8 replaces simple statements")
            stmts[i] = _one_stmt(action.new)
        elif tag == "P9":
            if A.is_compound(st):
                raise IllegalAction("P9 removes simple statements")
            del stmts[i]
        elif tag == "P10":
            if not isinstance(st, A.If) or not st.then.stmts:
                raise IllegalAction("P10 unwraps a non-empty if")
            stmts[i:i + 1] = st.then.stmts
        elif tag == "P11":
            if not A.is_compound(st):
                raise IllegalAction("P11 removes block statements")
            del stmts[i]
        elif tag == "P12":
            new = _one_stmt(action.new)
            if A.is_compound(new):
                raise IllegalAction("P12 inserts a simple statement")
            stmts.insert(i, new)
        elif tag == "P13":
            cond = parse_expression(action.new)
            stmts[i] = A.If(cond, A.Block([st]), None)
        elif tag == "P14":
            new = _one_stmt(action.new)
            if not A.is_compound(new):
                raise IllegalAction("P14 inserts a block statement")
            stmts.insert(i, new)
        else:
            raise IllegalAction(f"unknown action {tag}")
    except IllegalAction:
        raise
    except Exception as exc:  # malformed replacement text
        raise IllegalAction(str(exc)) from exc
    out = parse(pretty_print(work))
    return out, _region(prog, loc, action, len(stmts))


def _one_stmt(text: str) -> A.Stmt:
    stmts = parse_statements(text, allow_holes=False)
    if len(stmts) != 1:
        raise IllegalAction("expected exactly one statement")
    return stmts[0]


def _block(prog, loc):
    from ..lang.scope import block_at
    return block_at(prog, loc.block_path)


def _region(prog: A.Program, loc: StmtLoc, action: PerturbationAction, new_len: int) -> Region:
    path, i, tag = loc.block_path, loc.index, action.tag
    if tag in REPLACEMENTS:
        return Region(path, i, i + 1, i + 1, elide=A.is_compound(loc.stmt) and tag != "P8")
    if tag in ("P9", "P11"):
        if len(path) > 3:
            # removal inside a nested block: the enclosing statement carries the change
            parent_idx, _ = path[-1]
            return Region(path[:-1], parent_idx, parent_idx + 1, parent_idx + 1)
        if new_len == 0:
            return Region(path, 0, 0, 1)
        if i > 0:
            return Region(path, i - 1, i, i + 1)
        return Region(path, 0, 1, 2)
    if tag == "P10":
        return Region(path, i, i + len(loc.stmt.then.stmts), i + 1)
    if tag in ("P12", "P14"):
        return Region(path, i, i + 2, i + 1)
    return Region(path, i, i + 1, i + 1)  # P13


def apply(prog: A.Program, action: PerturbationAction) -> A.Program:
    """A new program with `action` applied; `prog` is left untouched."""
    return apply_with_region(prog, action)[0]
