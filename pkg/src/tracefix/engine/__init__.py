"""Candidate-evaluation engine: flat program encoding plus two
interchangeable interpreter backends.

The compiled Cython core is used when present; set ``TRACEFIX_PURE=1`` to
force the pure-Python twin (``benchmarks/bench_kernels.py`` compares the
two).  Both expose the same ``run`` function and are property-tested to
agree with the tree-walking tracer configuration-for-configuration.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

from .encode import (CompiledProgram, RunSpec, RunResult, compile_function,
                     make_runspec, encode_reference, tracked_masks,
                     EncodingUnsupported, FAULT_NAMES, EXIT_CODE, NO_MANIP,
                     ST_TERMINATED, ST_FUEL, ST_FAULT)
from . import _vmpure

if os.environ.get("TRACEFIX_PURE"):
    _backend = _vmpure
else:
    try:
        from . import _vmcore as _backend  # type: ignore[attr-defined]
    except ImportError:
        _backend = _vmpure

BACKEND = _backend.BACKEND


def available_backends() -> list[str]:
    names = ["pure"]
    try:
        from . import _vmcore  # noqa: F401
        names.insert(0, "compiled")
    except ImportError:
        pass
    return names


def run(prog: CompiledProgram, spec: RunSpec, callbacks, hole_values,
        capture: bool = False, backend=None) -> RunResult:
    fn = (backend or _backend).run
    return RunResult(*fn(prog, spec, callbacks, hole_values, capture))


def backend_module(name: str):
    if name == "pure":
        return _vmpure
    from . import _vmcore
    return _vmcore


@dataclass(frozen=True)
class EvalOutcome:
    valid: bool
    reason: str
    sem: int
    best_j: int


def prepare(prog: CompiledProgram, spec: RunSpec, callbacks):
    """Bind one (program, run spec) pair into a reusable runner."""
    return _backend.prepare(prog, spec, callbacks)


def evaluate_prepared(prepared, hole_values) -> tuple:
    """(valid, sem, best_j) over prepared (spec, runner) pairs.

    A spec with state-edit constraints must be satisfied at some
    configuration; a spec with an expected output must terminate with it.
    Faults and fuel exhaustion on any run invalidate the candidate.
    """
    sem = 0
    best_j = -1
    for spec, runner in prepared:
        (status, emitted, satisfied, best_sem, run_j, pair_sum, out_ok,
         _floc, _fcode, _cap) = runner(hole_values, False)
        if status != ST_TERMINATED:
            return (False, 0, -1)
        if spec.manip_loc != NO_MANIP:
            if not satisfied:
                return (False, 0, -1)
            sem += best_sem
            best_j = run_j
        else:
            if not out_ok:
                return (False, 0, -1)
            if spec.k >= 0:
                sem += pair_sum + abs(emitted - (spec.k + 1))
    return (True, sem, best_j)


def evaluate_runs(prog: CompiledProgram, specs: list[RunSpec], callbacks,
                  hole_values) -> EvalOutcome:
    from ..tracer import RuntimeFault

    prepared = [(spec, prepare(prog, spec, callbacks)) for spec in specs]
    try:
        valid, sem, best_j = evaluate_prepared(prepared, hole_values)
    except RuntimeFault as f:
        return EvalOutcome(False, f"fault in call: {f.reason}", 0, -1)
    return EvalOutcome(valid, "" if valid else "invalid", sem, best_j)


def decode_captured(prog: CompiledProgram, captured) -> list[dict]:
    """Turn captured VM rows back into name-keyed valuations (for tests)."""
    from ..tracer import UNDEF
    from ..lang.ast import EXIT_LOC

    out = []
    for loc_code, scal, sdef, arrays in captured:
        vals = {}
        for name, (kind, slot) in prog.display.items():
            if kind == "s":
                if slot < prog.n_scalars and (sdef >> slot) & 1:
                    vals[name] = scal[slot]
                else:
                    vals[name] = UNDEF
            else:
                snap = arrays[slot]
                vals[name] = UNDEF if snap is None else list(snap)
        out.append({"loc": EXIT_LOC if loc_code == EXIT_CODE else loc_code,
                    "vars": vals})
    return out
