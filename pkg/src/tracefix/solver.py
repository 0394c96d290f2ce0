"""Cost-ordered bounded search for the cheapest repair.

Assignments are enumerated by increasing syntactic distance, with constant
holes limited by an iteratively-deepened bound schedule.  Because semantic
distance is non-negative, the search can stop as soon as the next level
reaches the best total found (branch and bound).  Ties break by smaller
syntactic distance, then smaller satisfying index, then earliest repaired
location, then lexicographically smallest assignment, so results are
reproducible.  The winner is always re-executed from scratch through the
tree-walking tracer; the reported costs come from that independent pass.
"""

from __future__ import annotations

import math
import time
import uuid
from array import array
from dataclasses import dataclass, field, replace
from typing import Callable

from . import distances, engine
from .distances import Cost, Unsatisfied
from .engine import EncodingUnsupported, compile_function, make_runspec
from .lang import Patch, diff_programs
from .lang.ast import Program
from .lang.typecheck import fn_info
from .sketcher import (SketchedProgram, check_assignment, instantiate,
                       original_assignment, sketch)
from .tracer import (Manipulation, RuntimeFault, Test, Trace, execute,
                     evaluate_call, values_equal)

_FAR_LOCATION = 10 ** 9


@dataclass(frozen=True)
class RepairOptions:
    mode: str = "full"  # "full" | "single-line"
    const_bound_schedule: tuple[int, ...] = (1, 2, 4, 8, 16)
    fuel_factor: float = 2.0
    allowed_locations: frozenset[int] | None = None
    disallowed_locations: frozenset[int] = frozenset()
    max_candidates: int = 2_000_000
    use_slicing: bool = True
    tests: tuple[Test, ...] = ()
    parallel: bool = False
    original_fuel: int = 200_000

    def __post_init__(self):
        if self.mode not in ("full", "single-line"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if list(self.const_bound_schedule) != sorted(set(self.const_bound_schedule)):
            raise ValueError("const bound schedule must be strictly increasing")
        if self.allowed_locations is not None and \
                set(self.allowed_locations) & set(self.disallowed_locations):
            raise ValueError("allowed and disallowed locations overlap")


@dataclass
class SearchStats:
    candidates: int = 0
    valid: int = 0
    wall_time: float = 0.0
    bound: int = 0
    levels: int = 0
    budget_exhausted: bool = False
    backend: str = engine.BACKEND
    lines: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"candidates": self.candidates, "valid": self.valid,
               "wall_time": round(self.wall_time, 6), "bound": self.bound,
               "levels": self.levels, "budget_exhausted": self.budget_exhausted,
               "backend": self.backend}
        if self.lines:
            out["lines"] = {str(k): v for k, v in sorted(self.lines.items())}
        return out


@dataclass
class RepairResult:
    program: Program
    patch: Patch
    cost: Cost
    satisfying_index: int | None
    assignment: dict[int, int]
    stats: SearchStats
    sliced: bool = False

    status = "repaired"

    def to_json(self) -> dict:
        return {"status": "repaired",
                "patch": self.patch.to_json(),
                **self.cost.to_json(),
                "satisfying_index": self.satisfying_index,
                "stats": self.stats.to_json()}


@dataclass
class NoRepair:
    reason: str
    stats: SearchStats

    status = "no_repair"

    def to_json(self) -> dict:
        return {"status": "no_repair", "reason": self.reason,
                "patch": [], "syntactic": None, "semantic": None,
                "cost": None, "satisfying_index": None,
                "stats": self.stats.to_json()}


# ---------------------------------------------------------------------------
# Evaluation context


@dataclass
class EvalContext:
    """Everything needed to score one candidate: the edit being satisfied,
    the reference traces, the tests, and the per-run fuel."""

    program: Program
    manipulation: Manipulation | None
    manip_loc: int | None
    original_trace: Trace | None
    prefix: list
    tracked: list[str]
    manip_fuel: int
    tests: tuple[Test, ...]
    test_refs: list[Trace | None]
    test_fuels: list[int]
    test_tracked: list[str]
    externals: dict[str, Callable] | None
    guess_driver: object | None = None


def build_context(program: Program, manipulation: Manipulation | None,
                  options: RepairOptions,
                  externals: dict[str, Callable] | None = None) -> EvalContext:
    info = fn_info(program)
    manip_loc = None
    original_trace = None
    prefix: list = []
    tracked: list[str] = []
    manip_fuel = options.original_fuel
    if manipulation is not None:
        for name in manipulation.values:
            if name in info.input_vars:
                raise ValueError(f"cannot edit input variable {name!r}")
            if name not in info.valuation_domain:
                raise ValueError(f"unknown variable {name!r}")
        original_trace = execute(program, manipulation.initial,
                                 options.original_fuel, externals=externals)
        if not original_trace.terminated:
            raise ValueError("original program did not terminate within the fuel limit")
        if not (0 <= manipulation.index < len(original_trace)):
            raise ValueError(
                f"edit index {manipulation.index} outside the trace "
                f"(length {len(original_trace)})")
        manip_loc = original_trace[manipulation.index].loc
        prefix = original_trace.configs[:manipulation.index + 1]
        tracked = distances.tracked_variables(
            info.valuation_domain, info.input_vars,
            distances.manipulated_variables(manipulation))
        manip_fuel = max(1, math.ceil(options.fuel_factor * len(original_trace)))
    test_refs: list[Trace | None] = []
    test_fuels: list[int] = []
    for t in options.tests:
        try:
            ref = execute(program, t.input, options.original_fuel,
                          externals=externals)
            if not ref.terminated:
                ref = None
        except RuntimeFault:
            ref = None
        test_refs.append(ref)
        test_fuels.append(max(1, math.ceil(options.fuel_factor * len(ref)))
                          if ref is not None else options.original_fuel)
    test_tracked = distances.tracked_variables(
        info.valuation_domain, info.input_vars, [])
    return EvalContext(program=program, manipulation=manipulation,
                       manip_loc=manip_loc, original_trace=original_trace,
                       prefix=prefix, tracked=tracked, manip_fuel=manip_fuel,
                       tests=tuple(options.tests), test_refs=test_refs,
                       test_fuels=test_fuels, test_tracked=test_tracked,
                       externals=externals)


@dataclass(frozen=True)
class Invalid:
    reason: str


def evaluate_candidate(sketched: SketchedProgram, assignment: dict[int, int],
                       context: EvalContext) -> Invalid | tuple[Cost, int | None]:
    """Instantiate an assignment and score it through the tracer.

    This is the reference evaluation path: it executes the instantiated
    program from scratch and uses the distances module directly.  The
    search uses the flat-encoded engine for speed, but every returned
    repair is re-checked through here.
    """
    check_assignment(sketched, assignment)
    candidate = instantiate(sketched, assignment, check=False)
    syn = distances.syntactic_distance(assignment, original_assignment(sketched))
    return _score_program(candidate, context, syn)


# ---------------------------------------------------------------------------
# Fast evaluation through the engine


class _FastEval:
    def __init__(self, sketched: SketchedProgram, context: EvalContext):
        self.sketched = sketched
        self.context = context
        self.prog = compile_function(sketched.fn, n_holes=len(sketched.holes))
        self.callbacks = [self._make_callback(kind, name)
                          for kind, name, _ in self.prog.calls]
        self.specs = []
        if context.manipulation is not None:
            self.specs.append(make_runspec(
                self.prog, context.manipulation.initial, context.manip_fuel,
                reference=context.prefix, tracked=context.tracked,
                manip_loc=context.manip_loc,
                manip_values=context.manipulation.values))
        for t, fuel in zip(context.tests, context.test_fuels):
            fn = sketched.base.entry_fn()
            self.specs.append(make_runspec(
                self.prog, t.input, fuel, reference=None, tracked=[],
                expected=t.output,
                expected_is_array=fn.return_type.is_array))
        self.prepared = [(spec, engine.prepare(self.prog, spec, self.callbacks))
                         for spec in self.specs]

    def _make_callback(self, kind: str, name: str):
        if kind == "user":
            program = self.sketched.base
            externals = self.context.externals

            def user_cb(*args):
                v = evaluate_call(program, name, args, externals=externals)
                if isinstance(v, str):
                    return ord(v)
                return int(v)
            return user_cb
        externals = self.context.externals or {}

        def ext_cb(*args, _name=name):
            fn = externals.get(_name)
            if fn is None:
                raise RuntimeFault(0, f"external function {_name!r} is not registered")
            return int(fn(*args))
        return ext_cb

    def evaluate(self, hole_values) -> tuple:
        """(valid, sem, best_j) for one assignment."""
        driver = self.context.guess_driver
        if driver is None:
            try:
                return engine.evaluate_prepared(self.prepared, hole_values)
            except RuntimeFault:
                return (False, 0, -1)
        out = driver.evaluate(
            lambda: engine.evaluate_runs(self.prog, self.specs,
                                         self.callbacks, hole_values),
            valid_of=lambda o: o.valid, sem_of=lambda o: o.sem)
        if out is None:
            return (False, 0, -1)
        return (out.valid, out.sem, out.best_j)


class _TreeEval:
    """Fallback candidate scorer for programs the flat encoding rejects."""

    def __init__(self, sketched: SketchedProgram, context: EvalContext):
        self.sketched = sketched
        self.context = context

    def evaluate(self, hole_values) -> tuple:
        assignment = {i: hole_values[i] for i in range(len(hole_values))}
        out = evaluate_candidate(self.sketched, assignment, self.context)
        if isinstance(out, Invalid):
            return (False, 0, -1)
        cost, j = out
        return (True, cost.semantic, j if j is not None else -1)


def _make_evaluator(sketched: SketchedProgram, context: EvalContext):
    try:
        return _FastEval(sketched, context)
    except EncodingUnsupported:
        return _TreeEval(sketched, context)


# ---------------------------------------------------------------------------
# Assignment enumeration, cheapest first


def _value_options(hole, bound: int) -> list[tuple[int, list[int]]]:
    """Per-hole (cost, values) options with cost >= 1, cost-ascending."""
    out = []
    if hole.kind == "coeff":
        by_cost: dict[int, list[int]] = {}
        for v in (-1, 0, 1):
            c = abs(v - hole.original)
            if c > 0:
                by_cost.setdefault(c, []).append(v)
        out = sorted((c, sorted(vs)) for c, vs in by_cost.items())
    else:
        for c in range(1, bound + 1):
            vals = sorted({hole.original - c, hole.original + c})
            out.append((c, vals))
    return out


class _LevelEnumerator:
    """Yields every assignment at an exact syntactic distance level by
    mutating a shared value buffer in place.

    Within a level, assignments touching fewer holes come first (a single
    large constant change before a pile of coefficient flips), so a budget
    truncation keeps the most plausible candidates."""

    def __init__(self, holes, bound: int, values):
        self.holes = holes
        self.options = [_value_options(h, bound) for h in holes]
        self.max_cost = [opts[-1][0] if opts else 0 for opts in self.options]
        # max level still achievable from hole i onward
        n = len(holes)
        self.suffix = [0] * (n + 1)
        self.suffix_top = [0] * (n + 1)  # largest per-hole cost in the suffix
        for i in range(n - 1, -1, -1):
            self.suffix[i] = self.suffix[i + 1] + self.max_cost[i]
            self.suffix_top[i] = max(self.suffix_top[i + 1], self.max_cost[i])
        self.values = values

    def max_level(self) -> int:
        return self.suffix[0]

    def at_level(self, level: int):
        if level == 0:
            yield self.values
            return
        for holes_touched in range(1, level + 1):
            yield from self._rec(0, level, holes_touched)

    def _rec(self, start: int, remaining: int, slots: int):
        if slots == 0:
            if remaining == 0:
                yield self.values
            return
        n = len(self.holes)
        for i in range(start, n):
            if self.suffix[i] < remaining or n - i < slots:
                break
            if self.suffix_top[i] * slots < remaining:
                break
            for cost, vals in self.options[i]:
                if cost > remaining - (slots - 1):
                    break
                original = self.values[i]
                for v in vals:
                    self.values[i] = v
                    yield from self._rec(i + 1, remaining - cost, slots - 1)
                self.values[i] = original


# ---------------------------------------------------------------------------
# Core search


@dataclass
class _Candidate:
    key: tuple
    assignment: dict[int, int]
    total: int
    syn: int
    sem: int
    best_j: int


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def spend(self) -> bool:
        self.used += 1
        return self.used <= self.limit


def _candidate_key(total, syn, best_j, changed, values) -> tuple:
    first_loc = changed[0] if changed else _FAR_LOCATION
    return (total, syn, best_j if best_j >= 0 else 0, first_loc, tuple(values))


def _record_bound(stats: SearchStats, options: RepairOptions,
                  cand: _Candidate | None, holes) -> None:
    """The smallest schedule step covering the winner's constants."""
    if cand is None:
        stats.bound = options.const_bound_schedule[-1]
        return
    biggest = max((abs(v) for h, v in zip(holes, cand.assignment.values())
                   if h.kind == "const"), default=0)
    for b in options.const_bound_schedule:
        if b >= biggest:
            stats.bound = b
            return
    stats.bound = options.const_bound_schedule[-1]


def _search_sketch(sketched: SketchedProgram, evaluator, options: RepairOptions,
                   budget: _Budget, excluded_patches: set | None,
                   stats: SearchStats) -> _Candidate | None:
    """Enumerate assignments in increasing syntactic distance and return
    the cheapest valid candidate.

    A constant of magnitude b has syntactic distance at least b, so
    level-ordered enumeration under the largest scheduled bound performs
    the schedule's iterative deepening implicitly while keeping results
    globally cost-ordered (rejection monotonicity depends on this)."""
    holes = sketched.holes
    originals = array("q", [h.original for h in holes])
    best: _Candidate | None = None
    cap = options.const_bound_schedule[-1]
    values = array("q", originals)
    enum = _LevelEnumerator(holes, cap, values)
    level = 0
    max_level = enum.max_level()
    evaluate = evaluator.evaluate
    while True:
        if best is not None and best.total <= level:
            break
        if level > max_level:
            break
        stats.levels = max(stats.levels, level)
        exhausted_here = False
        for vals in enum.at_level(level):
            if not budget.spend():
                stats.budget_exhausted = True
                exhausted_here = True
                break
            stats.candidates += 1
            valid, sem, best_j = evaluate(vals)
            if not valid:
                continue
            stats.valid += 1
            total = level + sem
            changed = [holes[i].loc for i in range(len(holes))
                       if vals[i] != originals[i]]
            key = _candidate_key(total, level, best_j,
                                 sorted(set(changed)), vals)
            if best is not None and key >= best.key:
                continue
            assignment = {h.id: vals[i] for i, h in enumerate(holes)}
            if excluded_patches:
                candidate = instantiate(sketched, assignment, check=False)
                patch = diff_programs(sketched.base, candidate)
                if _patch_fingerprint(patch) in excluded_patches:
                    continue
            best = _Candidate(key=key, assignment=assignment, total=total,
                              syn=level, sem=sem, best_j=best_j)
        if exhausted_here:
            break
        level += 1
    _record_bound(stats, options, best, holes)
    return best


def _patch_fingerprint(patch: Patch) -> tuple:
    return tuple((e.location, e.after) for e in patch.entries)


class SolverInternalError(Exception):
    """The fast search path and the reference evaluation disagreed."""


def _finalize(sketched: SketchedProgram, cand: _Candidate,
              context: EvalContext, stats: SearchStats,
              sliced: bool = False) -> RepairResult:
    out = evaluate_candidate(sketched, cand.assignment, context)
    if isinstance(out, Invalid):
        raise SolverInternalError(
            f"winning candidate failed re-verification: {out.reason}")
    cost, best_j = out
    if cost.syntactic != cand.syn or cost.semantic != cand.sem:
        raise SolverInternalError(
            f"cost mismatch on re-verification: search said "
            f"({cand.syn},{cand.sem}), tracer says "
            f"({cost.syntactic},{cost.semantic})")
    program = instantiate(sketched, cand.assignment, check=False)
    patch = diff_programs(sketched.base, program)
    return RepairResult(program=program, patch=patch, cost=cost,
                        satisfying_index=best_j, assignment=cand.assignment,
                        stats=stats, sliced=sliced)


def _scope_for(program: Program, options: RepairOptions) -> set[int]:
    from .lang.ast import stmt_locations

    locs = set(stmt_locations(program.entry_fn()))
    if options.allowed_locations is not None:
        locs &= set(options.allowed_locations)
    return locs - set(options.disallowed_locations)


def repair(program: Program, manipulation: Manipulation | None,
           options: RepairOptions | None = None,
           externals: dict[str, Callable] | None = None,
           excluded_patches: set | None = None,
           guess_driver=None) -> RepairResult | NoRepair:
    """Search the full repair space (or per-line spaces in single-line
    mode) for the cheapest program satisfying the state edit and tests."""
    options = options or RepairOptions()
    if manipulation is None and not options.tests:
        raise ValueError("nothing to repair against: no state edit and no tests")
    if options.mode == "single-line":
        return repair_single_line(program, manipulation, options, externals,
                                  excluded_patches, guess_driver=guess_driver)
    start = time.monotonic()
    stats = SearchStats()
    context = build_context(program, manipulation, options, externals)
    context.guess_driver = guess_driver
    scope = _scope_for(program, options)
    sketched = sketch(program, scope)
    evaluator = _make_evaluator(sketched, context)
    budget = _Budget(options.max_candidates)
    cand = _search_sketch(sketched, evaluator, options, budget,
                          _normalize_excluded(excluded_patches), stats)
    stats.wall_time = time.monotonic() - start
    if cand is None:
        reason = ("candidate budget exhausted" if stats.budget_exhausted
                  else "bounded repair space exhausted")
        return NoRepair(reason, stats)
    return _finalize(sketched, cand, context, stats)


def _normalize_excluded(excluded) -> set | None:
    if not excluded:
        return None
    out = set()
    for p in excluded:
        out.add(_patch_fingerprint(p) if isinstance(p, Patch) else tuple(p))
    return out


# ---------------------------------------------------------------------------
# Single-line mode


@dataclass
class _LineOutcome:
    location: int
    result: RepairResult | None
    stats: SearchStats
    sliced: bool = False


def _solve_line(program: Program, manipulation: Manipulation | None,
                options: RepairOptions, externals, context: EvalContext,
                excluded: set | None, loc: int) -> _LineOutcome:
    from . import slicer

    stats = SearchStats()
    start = time.monotonic()
    use_slicing = (options.use_slicing and manipulation is not None
                   and not options.tests)
    if use_slicing:
        sliced = slicer.summarize_for_line(program, context, loc)
        if sliced is not None and sliced.applicable:
            outcome = _solve_line_sliced(program, manipulation, options,
                                         externals, context, excluded, loc,
                                         sliced, stats)
            if outcome is not None:
                stats.wall_time = time.monotonic() - start
                outcome.stats = stats
                return outcome
    sketched = sketch(program, {loc})
    evaluator = _make_evaluator(sketched, context)
    budget = _Budget(options.max_candidates)
    cand = _search_sketch(sketched, evaluator, options, budget, excluded, stats)
    stats.wall_time = time.monotonic() - start
    result = None
    if cand is not None:
        result = _finalize(sketched, cand, context, stats)
    return _LineOutcome(location=loc, result=result, stats=stats)


def _score_program(candidate: Program, context: EvalContext,
                   syn: int) -> Invalid | tuple[Cost, int | None]:
    """Score a concrete program against the session's edit and tests."""
    driver = context.guess_driver
    if driver is not None:
        out = driver.evaluate(
            lambda: _score_program_concrete(candidate, context, syn),
            valid_of=lambda o: not isinstance(o, Invalid),
            sem_of=lambda o: o[0].semantic)
        return Invalid("no guess assignment validates") if out is None else out
    return _score_program_concrete(candidate, context, syn)


def _score_program_concrete(candidate: Program, context: EvalContext,
                            syn: int) -> Invalid | tuple[Cost, int | None]:
    sem = 0
    best_j: int | None = None
    if context.manipulation is not None:
        try:
            trace = execute(candidate, context.manipulation.initial,
                            context.manip_fuel, externals=context.externals)
        except RuntimeFault as f:
            return Invalid(f"fault: {f.reason}")
        if not trace.terminated:
            return Invalid("fuel exhausted")
        try:
            d, best_j = distances.semantic_distance(
                context.prefix, context.manipulation, trace,
                context.manip_loc, context.tracked)
        except Unsatisfied:
            return Invalid("unsatisfied")
        sem += d
    for t, fuel in zip(context.tests, context.test_fuels):
        try:
            trace = execute(candidate, t.input, fuel, externals=context.externals)
        except RuntimeFault as f:
            return Invalid(f"fault: {f.reason}")
        if not trace.terminated:
            return Invalid("fuel exhausted")
        if not values_equal(trace.output(), t.output):
            return Invalid("test failed")
    return Cost(syn, sem), best_j


def _solve_line_sliced(program, manipulation, options, externals, context,
                       excluded, loc, sliced, stats) -> _LineOutcome | None:
    """Search over the summarized program, then transplant the repaired
    statement into the full program and rescore it there, so reported
    costs are slice-independent.  Returns None to fall back to the
    unsliced solve."""
    from . import slicer

    sub = slicer.build_sliced_context(program, manipulation, options,
                                      externals, context, sliced, loc)
    if sub is None:
        return None
    if sub == "unsatisfiable":
        return _LineOutcome(location=loc, result=None, stats=stats, sliced=True)
    sliced_sketch, sliced_context = sub
    evaluator = _make_evaluator(sliced_sketch, sliced_context)
    budget = _Budget(options.max_candidates)
    cand = _search_sketch(sliced_sketch, evaluator, options, budget,
                          excluded, stats)
    if cand is None:
        return _LineOutcome(location=loc, result=None, stats=stats, sliced=True)
    inst = instantiate(sliced_sketch, cand.assignment, check=False)
    from .lang.ast import find_stmt
    repaired_stmt = find_stmt(inst.entry_fn(), loc)
    original_stmt = find_stmt(program.entry_fn(), loc)
    if repaired_stmt is None or original_stmt is None:
        return None
    new_stmt = slicer.graft_stmt_head(original_stmt, repaired_stmt)
    candidate = slicer.replace_stmt(program, loc, new_stmt)
    out = _score_program(candidate, context, cand.syn)
    if isinstance(out, Invalid):
        return None
    cost, best_j = out
    patch = diff_programs(program, candidate)
    if excluded and _patch_fingerprint(patch) in excluded:
        return None
    result = RepairResult(program=candidate, patch=patch, cost=cost,
                          satisfying_index=best_j, assignment=cand.assignment,
                          stats=stats, sliced=True)
    return _LineOutcome(location=loc, result=result, stats=stats, sliced=True)


class _LineSearch:
    """Per-line search state for the level-lockstep single-line solver."""

    def __init__(self, loc: int, program: Program, context: EvalContext,
                 options: RepairOptions, externals, excluded):
        from . import slicer

        self.loc = loc
        self.program = program
        self.context = context
        self.excluded = excluded
        self.dead = False
        self.sliced = False
        self.candidates = 0
        self._transplant = None
        use_slicing = (options.use_slicing and context.manipulation is not None
                       and not options.tests)
        if use_slicing:
            s = slicer.summarize_for_line(program, context, loc)
            if s is not None and s.applicable:
                sub = slicer.build_sliced_context(program, context.manipulation,
                                                  options, externals, context,
                                                  s, loc)
                if sub == "unsatisfiable":
                    self.dead = True
                    self.sliced = True
                    self.sketched = None
                    return
                if sub is not None:
                    self.sketched, self.eval_context = sub
                    self.sliced = True
                    self.evaluator = _make_evaluator(self.sketched,
                                                     self.eval_context)
                    self.holes = self.sketched.holes
                    self.originals = array("q", [h.original for h in self.holes])
                    return
        self.sketched = sketch(program, {loc})
        self.eval_context = context
        self.evaluator = _make_evaluator(self.sketched, context)
        self.holes = self.sketched.holes
        self.originals = array("q", [h.original for h in self.holes])

    def start(self, cap: int) -> None:
        if self.dead:
            self.enum = None
            self.max_level = -1
            return
        self.values = array("q", self.originals)
        self.enum = _LevelEnumerator(self.holes, cap, self.values)
        self.max_level = self.enum.max_level()

    def realize(self, assignment: dict[int, int]):
        """Full-program (cost, satisfying index, program, patch) for an
        assignment of this line's sketch, or None if it does not hold up."""
        from . import slicer
        from .lang.ast import find_stmt

        if not self.sliced:
            out = evaluate_candidate(self.sketched, assignment, self.context)
            if isinstance(out, Invalid):
                return None
            cost, best_j = out
            program = instantiate(self.sketched, assignment, check=False)
            patch = diff_programs(self.program, program)
            return cost, best_j, program, patch
        inst = instantiate(self.sketched, assignment, check=False)
        repaired_stmt = find_stmt(inst.entry_fn(), self.loc)
        original_stmt = find_stmt(self.program.entry_fn(), self.loc)
        if repaired_stmt is None or original_stmt is None:
            return None
        new_stmt = slicer.graft_stmt_head(original_stmt, repaired_stmt)
        candidate = slicer.replace_stmt(self.program, self.loc, new_stmt)
        syn = sum(abs(assignment[h.id] - h.original) for h in self.holes)
        out = _score_program(candidate, self.context, syn)
        if isinstance(out, Invalid):
            return None
        cost, best_j = out
        patch = diff_programs(self.program, candidate)
        return cost, best_j, candidate, patch


def _repair_single_line_lockstep(program, manipulation, options, externals,
                                 context, excluded,
                                 stats: SearchStats) -> RepairResult | NoRepair:
    lines = sorted(_scope_for(program, options))
    searches = [_LineSearch(loc, program, context, options, externals, excluded)
                for loc in lines]
    budget = _Budget(options.max_candidates)
    best = None  # (key, realized result pieces, loc, sliced)

    def consider(search: _LineSearch, level: int, vals) -> None:
        nonlocal best
        search.candidates += 1
        stats.candidates += 1
        valid, sem, best_j0 = search.evaluator.evaluate(vals)
        if not valid:
            return
        stats.valid += 1
        assignment = {h.id: vals[i] for i, h in enumerate(search.holes)}
        probe_key = (level + sem, level,
                     best_j0 if best_j0 >= 0 else 0, search.loc,
                     tuple(vals))
        if best is not None and probe_key >= best[0]:
            return
        realized = search.realize(assignment)
        if realized is None:
            return
        cost, best_j, cand_program, patch = realized
        if excluded and _patch_fingerprint(patch) in excluded:
            return
        key = (cost.total, cost.syntactic,
               best_j if best_j is not None else 0, search.loc, tuple(vals))
        if best is None or key < best[0]:
            best = (key, (cost, best_j, cand_program, patch, assignment),
                    search.loc, search.sliced)

    cap = options.const_bound_schedule[-1]
    stats.bound = cap
    for s in searches:
        s.start(cap)
    level = 0
    spent = False
    while not spent:
        if best is not None and best[0][0] <= level:
            break
        active = [s for s in searches if not s.dead and level <= s.max_level]
        if not active:
            break
        stats.levels = max(stats.levels, level)
        for s in active:
            for vals in s.enum.at_level(level):
                if not budget.spend():
                    stats.budget_exhausted = True
                    spent = True
                    break
                consider(s, level, vals)
            if spent:
                break
        level += 1
    return _conclude_single_line(best, searches, stats)


def _conclude_single_line(best, searches, stats) -> RepairResult | NoRepair:
    for s in searches:
        stats.lines[s.loc] = {"candidates": s.candidates, "sliced": s.sliced}
    if best is None:
        reason = ("candidate budget exhausted" if stats.budget_exhausted
                  else "no line admits a repair within the bounds")
        return NoRepair(reason, stats)
    key, (cost, best_j, program, patch, assignment), loc, sliced = best
    stats.lines[loc]["cost"] = cost.total
    return RepairResult(program=program, patch=patch, cost=cost,
                        satisfying_index=best_j, assignment=assignment,
                        stats=stats, sliced=sliced)


def repair_single_line(program: Program, manipulation: Manipulation | None,
                       options: RepairOptions | None = None,
                       externals: dict[str, Callable] | None = None,
                       excluded_patches: set | None = None,
                       guess_driver=None) -> RepairResult | NoRepair:
    """Solve an independent repair problem per statement and return the
    cheapest line's result.

    The default path interleaves the per-line searches level by level so
    one line's cheap repair prunes the others' deepening; with
    ``options.parallel`` the lines are solved independently in a thread
    pool.  Both produce identical results."""
    options = options or RepairOptions()
    start = time.monotonic()
    context = build_context(program, manipulation, options, externals)
    context.guess_driver = guess_driver
    excluded = _normalize_excluded(excluded_patches)
    stats = SearchStats()
    if not options.parallel:
        result = _repair_single_line_lockstep(program, manipulation, options,
                                              externals, context, excluded,
                                              stats)
        stats.wall_time = time.monotonic() - start
        return result
    lines = sorted(_scope_for(program, options))
    from concurrent.futures import ThreadPoolExecutor

    with ThreadPoolExecutor(max_workers=min(8, len(lines) or 1)) as pool:
        outcomes = list(pool.map(
            lambda loc: _solve_line(program, manipulation, options,
                                    externals, context, excluded, loc),
            lines))
    stats.wall_time = time.monotonic() - start
    best: RepairResult | None = None
    best_key = None
    for o in outcomes:
        stats.candidates += o.stats.candidates
        stats.valid += o.stats.valid
        stats.bound = max(stats.bound, o.stats.bound)
        stats.levels = max(stats.levels, o.stats.levels)
        stats.budget_exhausted |= o.stats.budget_exhausted
        stats.lines[o.location] = {
            "candidates": o.stats.candidates,
            "sliced": o.sliced,
            "cost": o.result.cost.total if o.result else None,
        }
        if o.result is None:
            continue
        r = o.result
        key = (r.cost.total, r.cost.syntactic,
               r.satisfying_index if r.satisfying_index is not None else 0,
               o.location)
        if best_key is None or key < best_key:
            best, best_key = r, key
    if best is None:
        reason = ("candidate budget exhausted" if stats.budget_exhausted
                  else "no line admits a repair within the bounds")
        return NoRepair(reason, stats)
    best.stats = stats
    return best


# ---------------------------------------------------------------------------
# Interactive sessions: propose, reject, propose again


@dataclass
class RejectPatch:
    pass


@dataclass
class DisallowLocation:
    location: int


@dataclass
class Session:
    program: Program
    manipulation: Manipulation | None
    options: RepairOptions
    externals: dict[str, Callable] | None = None
    id: str = field(default_factory=lambda: uuid.uuid4().hex)
    proposals: list = field(default_factory=list)
    rejected_patches: list = field(default_factory=list)
    disallowed: set = field(default_factory=set)

    def current(self):
        return self.proposals[-1] if self.proposals else None


def open_session(program: Program, manipulation: Manipulation | None,
                 options: RepairOptions | None = None,
                 externals: dict[str, Callable] | None = None) -> Session:
    session = Session(program=program, manipulation=manipulation,
                      options=options or RepairOptions(), externals=externals)
    session.proposals.append(_session_repair(session))
    return session


def _session_repair(session: Session) -> RepairResult | NoRepair:
    options = session.options
    if session.disallowed:
        options = replace(options, disallowed_locations=frozenset(
            set(options.disallowed_locations) | session.disallowed))
    return repair(session.program, session.manipulation, options,
                  externals=session.externals,
                  excluded_patches=set(session.rejected_patches))


def next_repair(session: Session,
                feedback: RejectPatch | DisallowLocation) -> RepairResult | NoRepair:
    """Reject the current proposal (by patch or by location) and search for
    the next-best distinct repair."""
    if not session.proposals:
        raise ValueError("session has no proposal to reject")
    current = session.current()
    if isinstance(feedback, DisallowLocation):
        session.disallowed.add(feedback.location)
    else:
        if isinstance(current, RepairResult):
            session.rejected_patches.append(_patch_fingerprint(current.patch))
    result = _session_repair(session)
    session.proposals.append(result)
    return result
