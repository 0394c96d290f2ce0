"""The flat-encoded VM must agree with the tree-walking tracer
configuration-for-configuration, and its two backends must agree with each
other bit-for-bit."""

import pytest
from hypothesis import given, settings, strategies as st

from tracefix import engine
from tracefix.engine import (compile_function, decode_captured, make_runspec,
                             run)
from tracefix.engine import _vmpure
from tracefix.engine.encode import ST_TERMINATED, ST_FAULT
from tracefix.lang.ast import stmt_locations
from tracefix.sketcher import original_assignment, sketch
from tracefix.tracer import (RuntimeFault, UNDEF, WILDCARD, execute,
                             evaluate_call)

from conftest import CORPUS_PROGRAMS, corpus_program

BACKENDS = [engine.backend_module(n) for n in engine.available_backends()]


def _norm_value(v):
    if v is UNDEF:
        return UNDEF
    if isinstance(v, list):
        return [x if isinstance(x, int) else ord(x) for x in
                (int(e) if isinstance(e, bool) else e for e in v)]
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, str):
        return ord(v)
    return v


def _tracer_rows(program, initial, fuel, externals=None):
    trace = execute(program, initial, fuel, externals=externals)
    rows = []
    for c in trace.configs:
        rows.append((c.loc, {k: _norm_value(v) for k, v in c.valuation.items()}))
    return rows, trace.terminated


def _callbacks(prog, program, externals=None):
    out = []
    for kind, name, _ in prog.calls:
        if kind == "user":
            def user_cb(*args, _n=name):
                v = evaluate_call(program, _n, args, externals=externals)
                return ord(v) if isinstance(v, str) else int(v)
            out.append(user_cb)
        else:
            def ext_cb(*args, _n=name):
                return int(externals[_n](*args))
            out.append(ext_cb)
    return out


EXTS = {"Math.pow": lambda a, b: a ** max(b, 0), "Math.max": max,
        "Math.min": min, "Math.abs": abs}

CASES = [
    ("largestgap.mj", {"x": [9, 5, 4]}),
    ("largestgap_fix.mj", {"x": [9, 5, 4]}),
    ("largestgap_rev.mj", {"x": [9, 5, 4]}),
    ("sublargestgap.mj", {"a": [3, 2, 7]}),
    ("maxmin.mj", {"a": [5, 9, 1]}),
    ("triple.mj", {"x": 10}),
    ("id.mj", {"x": 7}),
    ("fact.mj", {"n": 6}),
    ("quad.mj", {"x": 3}),
    ("sumpow.mj", {"x": 3}),
    ("maxext.mj", {"a": [3, 7]}),
    ("straight.mj", {"x": 0}),
]


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.BACKEND)
@pytest.mark.parametrize("name,initial", CASES)
def test_vm_matches_tracer(backend, name, initial):
    program = corpus_program(name)
    prog = compile_function(program.entry_fn())
    spec = make_runspec(prog, initial, fuel=2000, reference=None, tracked=[])
    result = run(prog, spec, _callbacks(prog, program, EXTS), [], capture=True,
                 backend=backend)
    assert result.status == ST_TERMINATED
    rows = [(r["loc"], {k: _norm_value(v) for k, v in r["vars"].items()})
            for r in decode_captured(prog, result.captured)]
    expected, terminated = _tracer_rows(program, initial, 2000, externals=EXTS)
    assert terminated
    assert rows == expected


def test_both_backends_available_here():
    assert "pure" in engine.available_backends()


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([c for c in CASES if c[0] not in ("id.mj", "triple.mj",
                                                          "fact.mj", "quad.mj")]),
       st.data())
def test_vm_matches_tracer_random_inputs(case, data):
    name, shape = case
    program = corpus_program(name)
    initial = {}
    for pname, ty in program.entry_fn().params:
        if ty.is_array:
            initial[pname] = data.draw(st.lists(st.integers(-9, 9),
                                                min_size=1, max_size=5))
        else:
            initial[pname] = data.draw(st.integers(-5, 8))
    prog = compile_function(program.entry_fn())
    spec = make_runspec(prog, initial, fuel=300, reference=None, tracked=[])
    cbs = _callbacks(prog, program, EXTS)
    results = {}
    for backend in BACKENDS:
        try:
            r = run(prog, spec, cbs, [], capture=True, backend=backend)
            results[backend.BACKEND] = (r.status, r.emitted, r.captured)
        except RuntimeFault as f:
            results[backend.BACKEND] = ("call-fault", f.reason)
    # backends agree with each other
    vals = list(results.values())
    assert all(v == vals[0] for v in vals)
    # and with the tracer
    try:
        expected, terminated = _tracer_rows(program, initial, 300,
                                            externals=EXTS)
    except RuntimeFault:
        first = vals[0]
        assert first[0] in (ST_FAULT, "call-fault")
        return
    first = vals[0]
    if not terminated:
        assert first[0] != ST_TERMINATED
        return
    assert first[0] == ST_TERMINATED
    rows = [(r["loc"], {k: _norm_value(v) for k, v in r["vars"].items()})
            for r in decode_captured(prog, first[2])]
    assert rows == expected


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(["largestgap.mj", "sublargestgap.mj", "maxmin.mj"]),
       st.data())
def test_sketched_vm_matches_instantiated_tracer(name, data):
    """Evaluating a sketched program directly under an assignment must
    behave exactly like instantiating it and executing the result."""
    from tracefix.sketcher import instantiate

    program = corpus_program(name)
    locs = stmt_locations(program.entry_fn())
    scope = {data.draw(st.sampled_from(locs))}
    sk = sketch(program, scope)
    assignment = {}
    for h in sk.holes:
        if h.kind == "coeff":
            assignment[h.id] = data.draw(st.sampled_from([-1, 0, 1]))
        else:
            assignment[h.id] = data.draw(st.integers(-2, 2))
    initial = {}
    for pname, ty in program.entry_fn().params:
        if ty.is_array:
            initial[pname] = data.draw(st.lists(st.integers(-9, 9),
                                                min_size=1, max_size=4))
        else:
            initial[pname] = data.draw(st.integers(-5, 8))
    inst = instantiate(sk, assignment)
    prog = compile_function(sk.fn, n_holes=len(sk.holes))
    from array import array

    hv = array("q", [assignment[h.id] for h in sk.holes])
    spec = make_runspec(prog, initial, fuel=200, reference=None, tracked=[])
    cbs = _callbacks(prog, program, EXTS)
    for backend in BACKENDS:
        try:
            r = run(prog, spec, cbs, hv, capture=True, backend=backend)
        except RuntimeFault:
            r = None
        try:
            expected, terminated = _tracer_rows(inst, initial, 200,
                                                externals=EXTS)
        except RuntimeFault:
            assert r is None or r.status == ST_FAULT
            continue
        assert r is not None
        if not terminated:
            assert r.status != ST_TERMINATED
            continue
        assert r.status == ST_TERMINATED
        rows = [(row["loc"], {k: _norm_value(v) for k, v in row["vars"].items()})
                for row in decode_captured(prog, r.captured)]
        assert rows == expected
