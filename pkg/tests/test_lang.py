import pytest

from tracefix.lang import (ParseError, ShapeMismatch, TypecheckError,
                           apply_patch, diff_programs, parse_program,
                           pretty_print, stmt_locations, structurally_equal)
from tracefix.lang.ast import For, IntLit, Var
from tracefix.lang.printer import head_text

from conftest import CORPUS_PROGRAMS, corpus_program, corpus_source


def test_largestgap_locations(largestgap):
    fn = largestgap.entry_fn()
    assert stmt_locations(fn) == [2, 3, 4, 5, 6, 7, 8, 9, 10, 11]
    loop = fn.body[3]
    assert isinstance(loop, For) and loop.loc == 5


def test_minimal_program_parses():
    p = parse_program("int id(int x) { return x; }")
    assert p.entry == "id"
    assert len(list(p.entry_fn().body)) == 1


def test_use_before_declare_rejected():
    with pytest.raises(TypecheckError):
        parse_program("int f() { return y; }")


def test_two_statements_on_one_line_rejected():
    with pytest.raises(ParseError):
        parse_program("int f(int x) {\n    int a = 1; int b = 2;\n    return a;\n}")


def test_redeclaration_rejected():
    with pytest.raises(TypecheckError):
        parse_program("int f(int x) {\n    int a = 1;\n    int a = 2;\n    return a;\n}")


def test_shadowing_parameter_rejected():
    with pytest.raises(TypecheckError):
        parse_program("int f(int x) {\n    int x = 1;\n    return x;\n}")


def test_bad_condition_type():
    with pytest.raises(TypecheckError):
        parse_program("int f(int x) {\n    if(x) {\n        return 1;\n    }\n    return 0;\n}")


def test_compound_assignment_desugars():
    p = parse_program("int f(int x) {\n    int s = 0;\n    s += x;\n    return s;\n}")
    assign = p.entry_fn().body[1]
    assert head_text(assign) == "s = s+x;"


@pytest.mark.parametrize("name", CORPUS_PROGRAMS)
def test_roundtrip_corpus(name):
    program = corpus_program(name)
    again = parse_program(pretty_print(program))
    assert structurally_equal(program, again)


def test_pretty_print_loop_header(largestgap):
    lines = pretty_print(largestgap).splitlines()
    assert lines[4].strip() == "for(int i = 1; i < N-1; i++) {"


def test_pretty_print_fixed_loop_header(largestgap_fix):
    lines = pretty_print(largestgap_fix).splitlines()
    assert lines[4].strip() == "for(int i = 0; i < N-1; i++) {"


def test_diff_fix_is_line_5(largestgap, largestgap_fix):
    patch = diff_programs(largestgap, largestgap_fix)
    assert patch.locations() == [5]
    entry = patch.entries[0]
    assert entry.before == "for(int i = 1; i < N-1; i++) {"
    assert entry.after == "for(int i = 0; i < N-1; i++) {"


def test_diff_identity_empty(largestgap):
    assert not diff_programs(largestgap, largestgap)


def test_diff_return_statement_variant(largestgap):
    source = corpus_source("largestgap.mj").replace("max - min", "max - min + 4")
    other = parse_program(source)
    patch = diff_programs(largestgap, other)
    assert patch.locations() == [10]


def test_diff_empty_iff_same_text(largestgap, largestgap_fix):
    assert bool(diff_programs(largestgap, largestgap_fix)) == (
        pretty_print(largestgap) != pretty_print(largestgap_fix))
    assert not diff_programs(largestgap, largestgap)


def test_diff_shape_mismatch(largestgap, sumpow):
    with pytest.raises(ShapeMismatch):
        diff_programs(largestgap, sumpow)


def test_apply_patch_preserves_layout(largestgap, largestgap_fix):
    source = corpus_source("largestgap.mj")
    patch = diff_programs(largestgap, largestgap_fix)
    patched = apply_patch(source, patch)
    expected = corpus_source("largestgap_fix.mj")
    assert patched == expected


def test_location_uniqueness_across_corpus():
    for name in CORPUS_PROGRAMS:
        program = corpus_program(name)
        for fn in program.functions:
            locs = stmt_locations(fn)
            assert len(locs) == len(set(locs)), name


def test_char_and_bool_literals_roundtrip():
    src = ("int f(char c) {\n"
           "    bool ok = c == 'a';\n"
           "    if(ok && !false) {\n"
           "        return 1;\n"
           "    }\n"
           "    return 0;\n"
           "}")
    p = parse_program(src)
    assert structurally_equal(p, parse_program(pretty_print(p)))


def test_array_literal_and_new():
    src = ("int f(int n) {\n"
           "    int[] a = {1, 2, 3};\n"
           "    int[] b = new int[n];\n"
           "    return a[0]+b.length;\n"
           "}")
    p = parse_program(src)
    assert structurally_equal(p, parse_program(pretty_print(p)))
