import pytest
from hypothesis import given, settings, strategies as st

from tracefix.lang import parse_program, pretty_print, structurally_equal
from tracefix.lang.ast import stmt_locations
from tracefix.sketcher import (COEFF, CONST, DomainError, instantiate,
                               original_assignment, sketch)
from tracefix.tracer import RuntimeFault, execute

from conftest import CORPUS_PROGRAMS, corpus_program


def _sketch_line(sk, loc):
    text = sk.sketch_text()
    for line in text.splitlines():
        if line.strip() and str(loc) not in ():
            pass
    return text


def test_triple_sketch_shapes(triple):
    sk = sketch(triple, {2, 3, 4, 5})
    lines = [l.strip() for l in sk.sketch_text().splitlines()]
    assert "int y = 3*(??_b x+(??_b x+??))+(??_b x+??);" in lines
    assert "if(??_b x == 10+(??_b x+(??_b y+??))) {" in lines
    assert "return ??_b y+(??_b x+(??_b y+??));" in lines


def test_out_of_scope_statements_untouched(triple):
    sk = sketch(triple, {4})
    lines = [l.strip() for l in sk.sketch_text().splitlines()]
    assert "int y = 3*x;" in lines
    assert "return y;" in lines
    assert all(h.loc == 4 for h in sk.holes)


def test_original_assignment_values(triple):
    sk = sketch(triple, {2, 3, 4, 5})
    orig = original_assignment(sk)
    for h in sk.holes:
        assert orig[h.id] == h.original
        if h.kind == CONST:
            assert h.original == 0
        else:
            assert h.original in (0, 1)
    # empty scope gives an empty assignment
    empty = sketch(triple, set())
    assert original_assignment(empty) == {}


def test_identity_instantiation_structural(largestgap):
    sk = sketch(largestgap, set(stmt_locations(largestgap.entry_fn())))
    inst = instantiate(sk, original_assignment(sk))
    assert structurally_equal(largestgap, inst)


def test_identity_instantiation_trace_equal(largestgap):
    sk = sketch(largestgap, set(stmt_locations(largestgap.entry_fn())))
    inst = instantiate(sk, original_assignment(sk))
    a = execute(largestgap, {"x": [9, 5, 4]}, fuel=1000)
    b = execute(inst, {"x": [9, 5, 4]}, fuel=1000)
    assert a.locations() == b.locations()
    for ca, cb in zip(a.configs, b.configs):
        assert ca.valuation == cb.valuation


def test_fig1_repair_instantiates_to_i_equals_0(largestgap):
    sk = sketch(largestgap, {5})
    # the loop-init constant hole is the first hole of the header statement
    init_const = next(h for h in sk.holes if h.loc == 5 and h.kind == CONST)
    assignment = original_assignment(sk)
    assignment[init_const.id] = -1
    inst = instantiate(sk, assignment)
    lines = pretty_print(inst).splitlines()
    assert lines[4].strip() == "for(int i = 0; i < N-1; i++) {"


def test_added_variable_renders_cleanly():
    p = parse_program("int f(int x, int y) {\n    if(x < 0) {\n        return 1;\n    }\n    return 0;\n}")
    sk = sketch(p, {2})
    # turn x < 0 into x < 0 + y, which simplifies to x < y
    ycoeff = [h for h in sk.holes if h.kind == COEFF and h.original == 0]
    assignment = original_assignment(sk)
    # added coefficients are ordered with the constant innermost; find y's
    # by trying each and checking the rendering
    rendered = None
    for h in ycoeff:
        trial = dict(assignment)
        trial[h.id] = 1
        text = pretty_print(instantiate(sk, trial))
        if "if(x < y)" in text:
            rendered = text
            break
    assert rendered is not None


def test_coeff_domain_checked(triple):
    sk = sketch(triple, {2})
    assignment = original_assignment(sk)
    coeff = next(h for h in sk.holes if h.kind == COEFF)
    assignment[coeff.id] = 2
    with pytest.raises(DomainError):
        instantiate(sk, assignment)
    with pytest.raises(DomainError):
        instantiate(sk, {})


def test_resketching_is_deterministic(largestgap):
    locs = set(stmt_locations(largestgap.entry_fn()))
    a = sketch(largestgap, locs)
    b = sketch(largestgap, locs)
    assert [(h.id, h.kind, h.original, h.loc, h.seq) for h in a.holes] == \
           [(h.id, h.kind, h.original, h.loc, h.seq) for h in b.holes]


@settings(max_examples=220, deadline=None)
@given(st.sampled_from(CORPUS_PROGRAMS), st.data())
def test_sketch_identity_property(name, data):
    """Instantiating the original assignment never changes behavior."""
    program = corpus_program(name)
    fn = program.entry_fn()
    locs = stmt_locations(fn)
    scope = set(data.draw(st.lists(st.sampled_from(locs), max_size=len(locs),
                                   unique=True)))
    sk = sketch(program, scope)
    inst = instantiate(sk, original_assignment(sk))
    initial = {}
    for pname, ty in fn.params:
        if ty.is_array:
            initial[pname] = data.draw(st.lists(st.integers(-9, 9),
                                                min_size=1, max_size=5))
        elif ty.kind == "bool":
            initial[pname] = data.draw(st.booleans())
        elif ty.kind == "char":
            initial[pname] = data.draw(st.sampled_from("abcz"))
        else:
            initial[pname] = data.draw(st.integers(-6, 8))
    externals = {"Math.pow": lambda a, b: a ** max(b, 0),
                 "Math.max": max, "Math.min": min, "Math.abs": abs}
    try:
        a = execute(program, initial, fuel=400, externals=externals)
    except RuntimeFault as fault:
        with pytest.raises(RuntimeFault):
            execute(inst, initial, fuel=400, externals=externals)
        return
    b = execute(inst, initial, fuel=400, externals=externals)
    assert a.terminated == b.terminated
    assert a.locations() == b.locations()
    for ca, cb in zip(a.configs, b.configs):
        assert ca.valuation == cb.valuation
