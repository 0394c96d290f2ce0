import pytest

from tracefix.extfun import (DEFAULT_REGISTRY, CegisResult,
                             PartialInterpretation, cegis_repair,
                             external_names, harvest_interpretation,
                             verify_guesses)
from tracefix.lang import parse_program
from tracefix.solver import NoRepair, RepairOptions, RepairResult
from tracefix.tracer import Test, execute, run_test

from conftest import corpus_program


def test_harvest_sumpow(sumpow):
    table = harvest_interpretation(sumpow, {"x": 3}, DEFAULT_REGISTRY)
    assert table.entries == {
        ("Math.pow", (2, 1)): (2, "harvested"),
        ("Math.pow", (2, 2)): (4, "harvested"),
    }


def test_harvest_no_externals(largestgap):
    table = harvest_interpretation(largestgap, {"x": [9, 5, 4]},
                                   DEFAULT_REGISTRY)
    assert len(table) == 0


def test_harvest_deduplicates():
    p = parse_program(
        "int f(int x) {\n"
        "    int a = Math.max(1, 2);\n"
        "    int b = Math.max(1, 2);\n"
        "    return a+b+x;\n"
        "}")
    table = harvest_interpretation(p, {"x": 0}, DEFAULT_REGISTRY)
    assert len(table) == 1


def test_verify_guesses_examples():
    assert verify_guesses({("Math.pow", (2, 3)): 14}, DEFAULT_REGISTRY) == [
        (("Math.pow", (2, 3)), 14, 8)]
    assert verify_guesses({}, DEFAULT_REGISTRY) == []
    assert verify_guesses({("Math.pow", (2, 3)): 8}, DEFAULT_REGISTRY) == []


def test_external_names(sumpow, largestgap):
    assert external_names(sumpow) == {"Math.pow"}
    assert external_names(largestgap) == set()


def test_cegis_sumpow(sumpow):
    opts = RepairOptions(tests=(Test({"x": 3}, 15),))
    out = cegis_repair(sumpow, None, opts)
    assert isinstance(out, CegisResult)
    # the delivered repair extends the loop bound by one
    patch = out.result.patch.to_json()
    assert len(patch) == 1 and patch[0]["line"] == 3
    assert patch[0]["after"] == "for(int i = 1; i < x+1; i++) {"
    # convergence took at least two rounds, with a wrong guess about
    # pow(2, 3) along the way
    assert 2 <= len(out.iterations) <= 10
    mismatch_keys = {key for it in out.iterations
                     for key, _, _ in it.mismatches}
    assert ("Math.pow", (2, 3)) in mismatch_keys
    assert out.iterations[-1].mismatches == []
    assert out.iterations[-1].guesses == {}
    # initial harvested entries are still in the final table
    assert out.table.get(("Math.pow", (2, 1))) == 2
    assert out.table.get(("Math.pow", (2, 2))) == 4
    # end to end: the repair passes the test with the real oracle
    assert run_test(out.result.program, Test({"x": 3}, 15), 1000,
                    externals=DEFAULT_REGISTRY)


def test_cegis_no_externals_single_iteration(largestgap):
    from tracefix.tracer import Manipulation

    manip = Manipulation({"x": [9, 5, 4]}, 6, {"max": 9})
    out = cegis_repair(largestgap, manip, RepairOptions(mode="full"))
    assert isinstance(out, CegisResult)
    assert len(out.iterations) == 1
    assert out.iterations[0].guesses == {}
    assert out.result.cost.total == 4


def test_cegis_max_family_converges():
    p = corpus_program("maxext.mj")
    opts = RepairOptions(tests=(Test({"a": [3, 7]}, 7),))
    out = cegis_repair(p, None, opts)
    assert isinstance(out, CegisResult)
    assert len(out.iterations) >= 2  # guesses about Math.max get refined
    assert run_test(out.result.program, Test({"a": [3, 7]}, 7), 1000,
                    externals=DEFAULT_REGISTRY)


def test_cegis_unregistered_external():
    p = parse_program(
        "int f(int x) {\n"
        "    int y = Weird.fn(x);\n"
        "    return y;\n"
        "}")
    with pytest.raises(KeyError):
        cegis_repair(p, None, RepairOptions(tests=(Test({"x": 1}, 2),)))


def test_cegis_iteration_log_shape(sumpow):
    opts = RepairOptions(tests=(Test({"x": 3}, 15),))
    out = cegis_repair(sumpow, None, opts)
    for it in out.iterations:
        doc = it.to_json()
        assert set(doc) >= {"iteration", "bound", "status", "patch",
                            "guesses", "mismatches", "table_size"}


def test_partial_interpretation_provenance():
    table = PartialInterpretation()
    table.add_harvested(("Math.pow", (2, 1)), 2)
    table.add_verified(("Math.pow", (2, 3)), 8)
    docs = table.to_json()
    assert {d["provenance"] for d in docs} == {"harvested", "verified"}
    # harvested entries never overwrite verified ones
    table.add_harvested(("Math.pow", (2, 3)), 99)
    assert table.get(("Math.pow", (2, 3))) == 8
