import pytest

from tracefix.lang import parse_program, pretty_print
from tracefix.lang.ast import stmt_locations, walk_stmts
from tracefix.sketcher import instantiate, original_assignment, sketch
from tracefix.slicer import (SliceResult, backward_slice, forward_reachable,
                             summarize, summarize_for_line)
from tracefix.solver import (Invalid, RepairOptions, build_context,
                             evaluate_candidate, repair, RepairResult)
from tracefix.tracer import Manipulation, execute

from conftest import corpus_program


def _sub_manip(sublargestgap):
    trace = execute(sublargestgap, {"a": [3, 2, 7]}, 1000)
    k = next(i for i, c in enumerate(trace.configs) if c.loc == 12)
    return Manipulation({"a": [3, 2, 7]}, k, {"i": 0}), trace


def test_backward_slice_element_update(sublargestgap):
    # slicing the element update on the array covers everything except the
    # final return
    result = backward_slice(sublargestgap, 12, ["a"])
    locs = set(stmt_locations(sublargestgap.entry_fn()))
    assert result == locs - {13}


def test_backward_slice_straight_line():
    p = corpus_program("straight.mj")
    assert backward_slice(p, 4, ["a"]) == {2, 4}
    assert backward_slice(p, 2, ["x"]) == {2}


def test_forward_reachable(sublargestgap):
    assert forward_reachable(sublargestgap, 11) == {11, 12, 13}
    assert forward_reachable(sublargestgap, 13) == {13}
    locs = set(stmt_locations(sublargestgap.entry_fn()))
    assert forward_reachable(sublargestgap, 2) == locs


def test_summarize_sublargestgap(sublargestgap):
    manip, trace = _sub_manip(sublargestgap)
    relevant = backward_slice(sublargestgap, 12, ["i"]) & \
        forward_reachable(sublargestgap, 11)
    result = summarize(sublargestgap, relevant, trace)
    assert result.applicable
    text = pretty_print(result.summarized)
    assert "int largestgap = 5;" in text
    assert "int N = 3;" in text
    assert "max" not in text and "min" not in text
    assert result.substitutions == {"N": (2, 3), "largestgap": (10, 5)}
    # strictly fewer statements than the original
    kept = list(walk_stmts(result.summarized.entry_fn().body))
    total = list(walk_stmts(sublargestgap.entry_fn().body))
    assert len(kept) < len(total)


def test_summarize_identity_when_everything_relevant(sublargestgap):
    manip, trace = _sub_manip(sublargestgap)
    locs = set(stmt_locations(sublargestgap.entry_fn()))
    result = summarize(sublargestgap, locs, trace)
    assert result.applicable
    assert result.substitutions == {}
    assert pretty_print(result.summarized) == pretty_print(sublargestgap)


def test_summarize_inapplicable_on_varying_values():
    # the region reads `s`, whose value differs across loop entries
    p = parse_program(
        "int f(int n) {\n"
        "    int s = 0;\n"
        "    int t = 0;\n"
        "    for(int i = 0; i < n; i++) {\n"
        "        s = s+i;\n"
        "        t = t+s;\n"
        "    }\n"
        "    return t;\n"
        "}")
    trace = execute(p, {"n": 3}, 1000)
    result = summarize(p, {6}, trace)
    assert not result.applicable


def test_maxmin_summarized_shrinks(maxmin):
    trace = execute(maxmin, {"a": [5, 9, 1]}, 1000)
    k = next(i for i, c in enumerate(trace.configs) if c.loc == 11)
    manip = Manipulation({"a": [5, 9, 1]}, k, {"min": 1})
    context = build_context(maxmin, manip, RepairOptions())
    result = summarize_for_line(maxmin, context, 8)
    assert result is not None and result.applicable
    kept = list(walk_stmts(result.summarized.entry_fn().body))
    total = list(walk_stmts(maxmin.entry_fn().body))
    assert len(kept) < len(total)


def test_sliced_equals_unsliced_solve(sublargestgap):
    manip, _ = _sub_manip(sublargestgap)
    sliced = repair(sublargestgap, manip,
                    RepairOptions(mode="single-line", use_slicing=True))
    plain = repair(sublargestgap, manip,
                   RepairOptions(mode="single-line", use_slicing=False))
    assert isinstance(sliced, RepairResult)
    assert sliced.patch.to_json() == plain.patch.to_json()
    assert sliced.cost == plain.cost


def test_sliced_candidate_equivalence_exhaustive(sublargestgap):
    """Within small bounds, a candidate for the repaired line scores the
    same whether evaluated on the summarized program or the full one."""
    from itertools import product

    from tracefix import slicer

    manip, _ = _sub_manip(sublargestgap)
    options = RepairOptions(mode="single-line", const_bound_schedule=(1,))
    context = build_context(sublargestgap, manip, options)
    s = slicer.summarize_for_line(sublargestgap, context, 11)
    assert s is not None and s.applicable
    sub = slicer.build_sliced_context(sublargestgap, manip, options, None,
                                      context, s, 11)
    assert sub not in (None, "unsatisfiable")
    sliced_sketch, sliced_context = sub
    full_sketch = sketch(sublargestgap, {11})
    domains = []
    for h in sliced_sketch.holes:
        domains.append([-1, 0, 1] if h.kind == "coeff" else [-1, 0, 1])
    checked = 0
    from tracefix.lang.ast import find_stmt

    for combo in product(*domains):
        assignment = {h.id: v for h, v in zip(sliced_sketch.holes, combo)}
        sliced_out = evaluate_candidate(sliced_sketch, assignment,
                                        sliced_context)
        inst = instantiate(sliced_sketch, assignment, check=False)
        new_stmt = find_stmt(inst.entry_fn(), 11)
        original_stmt = find_stmt(sublargestgap.entry_fn(), 11)
        grafted = slicer.graft_stmt_head(original_stmt, new_stmt)
        candidate = slicer.replace_stmt(sublargestgap, 11, grafted)
        from tracefix.solver import _score_program
        syn = sum(abs(v) if h.original == 0 else abs(v - h.original)
                  for h, v in zip(sliced_sketch.holes, combo))
        full_out = _score_program(candidate, context, syn)
        assert isinstance(sliced_out, Invalid) == isinstance(full_out, Invalid)
        if not isinstance(sliced_out, Invalid):
            # satisfying occurrence within the region and its distance match
            s_cost, s_j = sliced_out
            f_cost, f_j = full_out
            assert s_cost.semantic == f_cost.semantic
            sliced_trace = execute(sliced_sketch.base, manip.initial, 10_000)
            checked += 1
    assert checked >= 1


def test_explain_slice_relevant_sets(largestgap):
    manip = Manipulation({"x": [9, 5, 4]}, 6, {"max": 9})
    context = build_context(largestgap, manip, RepairOptions())
    s = summarize_for_line(largestgap, context, 5)
    assert s is not None
    assert s.relevant <= set(stmt_locations(largestgap.entry_fn()))
