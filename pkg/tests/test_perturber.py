import copy

import pytest

from perturb_repair.executor.checker import STRING_METHODS, check, check_with_types
from perturb_repair.lang import ast as A
from perturb_repair.lang import parse, pretty_print
from perturb_repair.lang.printer import expr_text, render_stmt
from perturb_repair.lang.scope import iter_statements, own_nodes
from perturb_repair.perturber import (TAGS, CandidateIndex, IllegalAction, NotCorrectProgram,
                                      PerturbationAction, PerturbConfig, apply, apply_with_region,
                                      enumerate_candidates, evaluate, generate_samples)
from perturb_repair.perturber.actions import OP_GROUPS

SMALL = """class Box {
    int a;
    int x;
    string c;

    Box() {
        a = 1;
        x = 2;
        c = "k";
    }

    int pick(int b, bool p, bool q) {
        if (p && q) {
            x = a;
        }
        if (b > 0) {
            return b;
        }
        return x;
    }
}

class BoxTest {
    void test_pick() {
        Box box = new Box();
        assertEquals(3, box.pick(3, true, true));
        assertEquals(1, box.pick(0, true, true));
        assertEquals(2, box.pick(0, false, true));
        assertEquals(5, box.pick(5, false, false));
        assertEquals(2, box.pick(-1, true, false));
    }
}
"""


@pytest.fixture(scope="module")
def small():
    return parse(SMALL)


def stmt_with(prog, text):
    return next(l.stmt for l in iter_statements(prog) if render_stmt(l.stmt, elide=True) == text)


def test_fourteen_tags():
    assert TAGS == tuple(f"P{i}" for i in range(1, 15))


def test_variable_replacement_respects_declared_type(small):
    st = stmt_with(small, "x = a;")
    news = {(a.element, a.new) for a in enumerate_candidates(small, st.id) if a.tag == "P5"}
    a_node = st.value
    assert (a_node.id, "x") in news
    assert (a_node.id, "c") not in news  # string field never replaces an int


def test_if_gets_unwrap_and_block_removal(small):
    st = stmt_with(small, "if (p && q) { ... }")
    tags = {a.tag for a in enumerate_candidates(small, st.id)}
    assert {"P10", "P11"} <= tags and "P9" not in tags


def test_operator_replacement_example(small):
    st = stmt_with(small, "if (p && q) { ... }")
    action = next(a for a in enumerate_candidates(small, st.id) if a.tag == "P2" and a.new == "||")
    out = apply(small, action)
    assert "if (p || q) {" in pretty_print(out)
    assert "if (p && q) {" in pretty_print(small)


def test_removing_only_statement_leaves_empty_block(small):
    st = stmt_with(small, "x = a;")
    out = apply(small, PerturbationAction("P9", st.id))
    assert "if (p && q) {\n        }" in pretty_print(out)
    assert parse(pretty_print(out)) == out


def test_wrapping_return_causes_missing_return(small):
    st = stmt_with(small, "return x;")
    out = apply(small, PerturbationAction("P13", st.id, new="x > 0"))
    assert "if (x > 0) {\n            return x;\n        }" in pretty_print(out)
    assert [e.message for e in check(out)] == ["missing return statement"]


def test_apply_is_pure(small):
    before = copy.deepcopy(small)
    for loc in iter_statements(small):
        for action in enumerate_candidates(small, loc.stmt.id)[:15]:
            try:
                apply(small, action)
            except IllegalAction:
                pass
    assert small == before and pretty_print(small) == pretty_print(before)


def test_illegal_actions_rejected(small):
    iff = stmt_with(small, "if (p && q) { ... }")
    ret = stmt_with(small, "return x;")
    with pytest.raises(IllegalAction):
        apply(small, PerturbationAction("P9", iff.id))
    with pytest.raises(IllegalAction):
        apply(small, PerturbationAction("P10", ret.id))
    with pytest.raises(IllegalAction):
        apply(small, PerturbationAction("P2", iff.id, iff.cond.id, "+"))
    test_stmt = next(l.stmt for l in iter_statements(small, include_tests=True) if l.in_test)
    with pytest.raises(IllegalAction):
        apply(small, PerturbationAction("P9", test_stmt.id))


# ---- candidate sets against an independent brute-force generator ----------

def _visible(prog):
    """Statement NodeId -> {name: declared type} by a direct walk of each member."""
    out = {}
    for cls in prog.classes:
        if cls.is_test_class:
            continue
        fields = {f.name: f.type for f in cls.fields}
        for member in list(cls.ctors) + list(cls.methods):
            def block(stmts, visible):
                visible = dict(visible)
                for s in stmts:
                    here = dict(visible)
                    if isinstance(s, A.For) and isinstance(s.init, A.VarDecl):
                        here[s.init.name] = s.init.type
                    out[s.id] = here
                    for _, b in A.stmt_blocks(s):
                        if isinstance(b, A.Block):
                            block(b.stmts, here)
                    if isinstance(s, A.VarDecl):
                        visible[s.name] = s.type
            block(member.body.stmts, {**fields, **{p.name: p.type for p in member.params}})
    return out


def brute_force(prog):
    """Expected (tag, element, new) triples per statement for P2, P5, P7, P9-P14."""
    _, types = check_with_types(prog)
    visible = _visible(prog)
    code = [l for l in iter_statements(prog, include_tests=True) if not l.in_test]
    simple = {render_stmt(l.stmt): [] for l in code if not A.is_compound(l.stmt)}
    compound = {render_stmt(l.stmt): [] for l in code if A.is_compound(l.stmt)}
    for l in code:
        (compound if A.is_compound(l.stmt) else simple)[render_stmt(l.stmt)].append(l.stmt.id)
    conds = {expr_text(l.stmt.cond) for l in code if isinstance(l.stmt, (A.If, A.While))}
    classes = {c.name: c for c in prog.classes}
    expected = {}
    for l in code:
        st, got = l.stmt, set()
        scope = visible[st.id]
        for n in own_nodes(st):
            if isinstance(n, A.Binary):
                group = [g for g in OP_GROUPS if n.op in g][0]
                got |= {("P2", n.id, op) for op in group if op != n.op}
            if isinstance(n, A.Name) and n.name in scope:
                got |= {("P5", n.id, v) for v, t in scope.items() if t == scope[n.name] and v != n.name}
            if isinstance(n, A.Call):
                recv = l.cls.name if n.obj is None else str(types[n.obj.id])
                names = (set(STRING_METHODS) if recv == "string"
                         else {m.name for m in classes[recv].methods} if recv in classes else set())
                got |= {("P7", n.id, m) for m in names if m != n.name}
        if A.is_compound(st):
            got.add(("P11", None, None))
        else:
            got.add(("P9", None, None))
        if isinstance(st, A.If) and st.then.stmts:
            got.add(("P10", None, None))
        got |= {("P12", None, t) for t, ids in simple.items() if set(ids) - {st.id}}
        got |= {("P14", None, t) for t, ids in compound.items() if set(ids) - {st.id}}
        got |= {("P13", None, c) for c in conds}
        expected[st.id] = got
    return expected


def _key(a: PerturbationAction):
    if a.tag == "P7":
        return (a.tag, a.element, a.new.split("(")[0].split(".")[-1])
    if a.tag in ("P2", "P5"):
        return (a.tag, a.element, a.new)
    if a.tag in ("P12", "P13", "P14"):
        return (a.tag, None, a.new)
    return (a.tag, None, None)


@pytest.mark.parametrize("name", ["stats", "bank", "geometry", "cipher", "bst", "graph"])
def test_candidates_match_brute_force(seeds, name):
    prog = seeds[name]
    expected = brute_force(prog)
    index = CandidateIndex(prog)
    kinds = {"P2", "P5", "P7", "P9", "P10", "P11", "P12", "P13", "P14"}
    for stmt_id, want in expected.items():
        got = {_key(a) for a in index.candidates(stmt_id) if a.tag in kinds}
        assert got == want, render_stmt(prog.node(stmt_id), elide=True)


def test_other_candidates_are_well_typed(seeds):
    prog = seeds["bank"]
    index = CandidateIndex(prog)
    pool = {str(t) for t in index.type_pool}
    for loc in iter_statements(prog):
        for a in index.candidates(loc.stmt.id):
            if a.tag == "P1":
                assert a.new.rstrip("[]") in pool
            if a.tag == "P3":
                assert not a.new.startswith("-")
            if a.tag == "P8":
                assert not A.is_compound(loc.stmt)


# ---- the generator --------------------------------------------------------

def test_generated_samples_fail_and_are_local(seeds):
    prog = seeds["stack"]
    samples = generate_samples(prog, PerturbConfig(rng_seed=7), "stack")
    assert 0 < len(samples) <= len(list(iter_statements(prog)))
    for s in samples:
        errors, failure = evaluate(s.perturbed)
        assert errors or failure is not None
        assert s.kind == ("CE" if errors else "FE")
    assert prog == parse(pretty_print(prog))  # the input is untouched


def test_generation_is_deterministic(seeds):
    cfg = PerturbConfig(rng_seed=3)
    a = generate_samples(seeds["queue"], cfg, "queue")
    b = generate_samples(seeds["queue"], cfg, "queue")
    assert [pretty_print(s.perturbed) for s in a] == [pretty_print(s.perturbed) for s in b]
    assert [s.actions for s in a] == [s.actions for s in b]


def test_surviving_mutants_may_give_no_sample():
    src = """class D {
    int f() {
        int unused = 1;
        return 2;
    }
}

class DTest {
    void test_f() {
        assertEquals(2, new D().f());
    }
}
"""
    prog = parse(src)
    got = generate_samples(prog, PerturbConfig(max_attempts=1, rng_seed=0), "d")
    assert len(got) <= 2


def test_incorrect_program_rejected(small):
    broken = parse(SMALL.replace("return x;", "return a;"))
    with pytest.raises(NotCorrectProgram):
        generate_samples(broken, PerturbConfig(), "broken")


def test_config_validation():
    with pytest.raises(ValueError):
        PerturbConfig(max_attempts=0)
    with pytest.raises(ValueError):
        PerturbConfig(chain_probability=1.5)


def test_region_of_replacement_and_insertion(small):
    st = stmt_with(small, "x = a;")
    _, r = apply_with_region(small, PerturbationAction("P12", st.id, new="a = 5;"))
    assert (r.end - r.start, r.fix_end - r.start) == (2, 1)
    _, r = apply_with_region(small, PerturbationAction("P5", st.id, st.value.id, "x"))
    assert (r.end - r.start, r.fix_end - r.start) == (1, 1)
