"""Compare the compiled and pure-Python candidate-evaluation backends.

The solver's inner loop executes one flat-encoded program run per
candidate assignment, folding trace distance and edit satisfaction online.
This benchmark times that kernel on realistic workloads (the bundled
fixtures) for both backends and reports the end-to-end effect on a full
repair search.

Run:  python benchmarks/bench_kernels.py
"""

from __future__ import annotations

import sys
import time
from array import array
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from tracefix import engine
from tracefix.engine import compile_function, make_runspec
from tracefix.lang import parse_program
from tracefix.lang.ast import stmt_locations
from tracefix.sketcher import original_assignment, sketch
from tracefix.solver import (RepairOptions, _FastEval, _LevelEnumerator,
                             build_context)
from tracefix.tracer import Manipulation, execute

CORPUS = Path(__file__).resolve().parent.parent / "src" / "tracefix" / "corpus"


def load(name):
    return parse_program((CORPUS / name).read_text())


def bench_kernel(name, program, manipulation, iterations):
    """Time raw evaluations of the original assignment for each backend."""
    context = build_context(program, manipulation, RepairOptions())
    sk = sketch(program, set(stmt_locations(program.entry_fn())))
    rows = {}
    for backend_name in engine.available_backends():
        backend = engine.backend_module(backend_name)
        fe = _FastEval.__new__(_FastEval)
        fe.sketched = sk
        fe.context = context
        fe.prog = compile_function(sk.fn, n_holes=len(sk.holes))
        fe.callbacks = [fe._make_callback(kind, nm)
                        for kind, nm, _ in fe.prog.calls]
        fe.specs = [make_runspec(fe.prog, manipulation.initial,
                                 context.manip_fuel,
                                 reference=context.prefix,
                                 tracked=context.tracked,
                                 manip_loc=context.manip_loc,
                                 manip_values=manipulation.values)]
        runner = backend.prepare(fe.prog, fe.specs[0], fe.callbacks)
        values = array("q", [h.original for h in sk.holes])
        start = time.perf_counter()
        for _ in range(iterations):
            runner(values, False)
        elapsed = time.perf_counter() - start
        rows[backend_name] = elapsed / iterations * 1e6
    return rows


def bench_search(name, program, manipulation):
    """Time the whole cost-ordered search under each backend."""
    import os
    import importlib

    rows = {}
    for backend_name in engine.available_backends():
        os.environ.pop("TRACEFIX_PURE", None)
        if backend_name == "pure":
            os.environ["TRACEFIX_PURE"] = "1"
        import tracefix.engine as eng
        importlib.reload(eng)
        import tracefix.solver as slv
        importlib.reload(slv)
        start = time.perf_counter()
        result = slv.repair(program, manipulation,
                            slv.RepairOptions(mode="full"))
        elapsed = time.perf_counter() - start
        rows[backend_name] = (elapsed, result.stats.candidates)
    os.environ.pop("TRACEFIX_PURE", None)
    import tracefix.engine as eng
    importlib.reload(eng)
    import tracefix.solver as slv
    importlib.reload(slv)
    return rows


def main():
    print(f"available backends: {', '.join(engine.available_backends())}\n")

    cases = [
        ("largestGap", load("largestgap.mj"),
         Manipulation({"x": [9, 5, 4]}, 6, {"max": 9}), 50_000),
        ("subLargestGap", load("sublargestgap.mj"),
         Manipulation({"a": [3, 2, 7]}, 18, {"i": 0}), 20_000),
        ("maxMin", load("maxmin.mj"),
         Manipulation({"a": [5, 9, 1]}, 12, {"min": 1}), 20_000),
    ]

    print("kernel: one candidate evaluation (original assignment), us/call")
    print(f"{'fixture':<16}" + "".join(f"{b:>12}" for b in
                                       engine.available_backends()) +
          f"{'speedup':>10}")
    for name, program, manip, iters in cases:
        rows = bench_kernel(name, program, manip, iters)
        speed = (f"{rows['pure'] / rows['compiled']:9.1f}x"
                 if "compiled" in rows and "pure" in rows else "       n/a")
        print(f"{name:<16}" +
              "".join(f"{rows[b]:>11.2f} " for b in engine.available_backends())
              + speed)

    print("\nsearch: full-mode repair wall time")
    name, program, manip, _ = cases[0]
    rows = bench_search(name, program, manip)
    for backend_name, (elapsed, candidates) in rows.items():
        print(f"{name:<16}{backend_name:>10}: {elapsed:8.2f} s "
              f"({candidates} candidates)")


if __name__ == "__main__":
    main()
