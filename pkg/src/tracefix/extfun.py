"""Repairing programs that call black-box external functions.

The search never encodes an external's semantics.  Instead it runs the
original program to harvest a partial input/output table, lets candidate
evaluation draw values for unseen argument tuples from a bounded guess
domain, and then checks the winning repair's guesses against the real
function.  Wrong guesses are merged back into the table as verified
entries and the search repeats, until a repair's guesses all check out.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable

from .lang.ast import ExtCall, Program, walk_expr, walk_stmts, stmt_exprs
from .solver import (NoRepair, RepairOptions, RepairResult, SearchStats,
                     build_context, repair, _score_program)
from .tracer import (Manipulation, RuntimeFault, UNDEF, execute,
                     wrap_i64)

MAX_ITERATIONS = 128
GUESS_BUDGET = 4096  # evaluation replays per candidate
MAX_GUESS_VARS = 4   # distinct unseen argument tuples per candidate

HARVESTED = "harvested"
VERIFIED = "verified"


def _int_pow(a: int, b: int) -> int:
    if b < 0:
        return 0
    return wrap_i64(a ** min(b, 128))


DEFAULT_REGISTRY: dict[str, Callable] = {
    "Math.pow": _int_pow,
    "Math.max": lambda a, b: max(a, b),
    "Math.min": lambda a, b: min(a, b),
    "Math.abs": lambda a: abs(a),
}


class NeedGuess(Exception):
    """A candidate evaluation called an external on unseen arguments."""

    def __init__(self, key):
        super().__init__(str(key))
        self.key = key  # (name, args tuple)


@dataclass
class PartialInterpretation:
    """Finite input/output table standing in for the real externals."""

    entries: dict = field(default_factory=dict)  # (name, args) -> (value, provenance)

    def get(self, key):
        hit = self.entries.get(key)
        return hit[0] if hit is not None else None

    def add_harvested(self, key, value: int) -> None:
        if key not in self.entries:
            self.entries[key] = (int(value), HARVESTED)

    def add_verified(self, key, value: int) -> None:
        self.entries[key] = (int(value), VERIFIED)

    def __len__(self) -> int:
        return len(self.entries)

    def to_json(self) -> list[dict]:
        out = []
        for (name, args), (value, provenance) in sorted(self.entries.items()):
            out.append({"function": name, "args": list(args), "value": value,
                        "provenance": provenance})
        return out


def external_names(program: Program) -> set[str]:
    names = set()
    for fn in program.functions:
        for s in walk_stmts(fn.body):
            for e in stmt_exprs(s):
                for node in walk_expr(e):
                    if isinstance(node, ExtCall):
                        names.add(node.name)
    return names


def harvest_interpretation(program: Program, initial: dict,
                           registry: dict[str, Callable],
                           fuel: int = 200_000,
                           table: PartialInterpretation | None = None
                           ) -> PartialInterpretation:
    """Run the original program with the real externals and record every
    observed (function, arguments) -> result."""
    table = table if table is not None else PartialInterpretation()

    def recorder(name, fn):
        def wrapped(*args):
            v = int(fn(*args))
            table.add_harvested((name, tuple(args)), v)
            return v
        return wrapped

    wrapped = {name: recorder(name, fn) for name, fn in registry.items()}
    execute(program, initial, fuel, externals=wrapped)
    return table


def verify_guesses(guesses: dict, registry: dict[str, Callable]) -> list[tuple]:
    """Mismatches between guessed and actual outputs: (key, guessed, actual)."""
    mismatches = []
    for (name, args), guessed in sorted(guesses.items()):
        fn = registry.get(name)
        if fn is None:
            raise KeyError(f"external function {name!r} is not registered")
        actual = int(fn(*args))
        if actual != guessed:
            mismatches.append(((name, args), guessed, actual))
    return mismatches


class GuessDriver:
    """Per-candidate search over values for unseen external calls.

    Candidate evaluations replay deterministically, so the driver re-runs
    the evaluation, extending a choice vector depth-first over the guess
    domain until the candidate is valid; among valid completions it keeps
    the one with the smallest semantic cost (ties: smallest值 vector).
    """

    def __init__(self, partial: PartialInterpretation, domain: list[int],
                 budget: int = GUESS_BUDGET, max_vars: int = MAX_GUESS_VARS):
        self.partial = partial
        self.domain = sorted(set(domain))
        self.budget = budget
        self.max_vars = max_vars
        self.choices: list[tuple] = []
        self.pos = 0
        self.last_choices: dict = {}

    # -- oracle side ------------------------------------------------------

    def external_table(self, names) -> dict[str, Callable]:
        table = {}
        for name in names:
            def fn(*args, _name=name):
                v = self.partial.get((_name, args))
                if v is not None:
                    return v
                return self._consume((_name, args))
            table[name] = fn
        return table

    def _consume(self, key):
        if self.pos < len(self.choices):
            k, v = self.choices[self.pos]
            self.pos += 1
            return v
        raise NeedGuess(key)

    # -- evaluation side -----------------------------------------------------

    def evaluate(self, fn, valid_of, sem_of):
        """Run ``fn`` (an evaluation closure) under the best guess vector."""
        spent = 0
        best = None  # (sem, values, outcome)

        def attempt(choices):
            nonlocal spent, best
            spent += 1
            if spent > self.budget:
                return
            self.choices = choices
            self.pos = 0
            try:
                out = fn()
            except NeedGuess as g:
                if len(choices) >= self.max_vars:
                    return
                for v in self.domain:
                    attempt(choices + [(g.key, v)])
                    if spent > self.budget:
                        return
                return
            if not valid_of(out):
                return
            key = (sem_of(out), tuple(v for _, v in choices))
            if best is None or key < (best[0], best[1]):
                best = (key[0], key[1], out, dict(choices))

        attempt([])
        self.choices = []
        self.pos = 0
        if best is None:
            self.last_choices = {}
            return None
        self.last_choices = best[3]
        return best[2]


@dataclass
class CegisIteration:
    number: int
    bound: int
    status: str  # "proposed" | "no_repair"
    patch: list
    guesses: dict
    mismatches: list
    table_size: int

    def to_json(self) -> dict:
        return {
            "iteration": self.number,
            "bound": self.bound,
            "status": self.status,
            "patch": self.patch,
            "guesses": [{"function": n, "args": list(a), "value": v}
                        for (n, a), v in sorted(self.guesses.items())],
            "mismatches": [{"function": n, "args": list(a), "guessed": g,
                            "actual": act}
                           for (n, a), g, act in self.mismatches],
            "table_size": self.table_size,
        }


@dataclass
class CegisResult:
    result: RepairResult
    iterations: list[CegisIteration]
    table: PartialInterpretation


def observed_integers(program: Program, inputs: list[dict],
                      registry: dict[str, Callable],
                      fuel: int = 200_000) -> set[int]:
    """Every integer value appearing in the original traces: scalars,
    array elements, and external results."""
    seen: set[int] = set()

    def note(v):
        if v is UNDEF or isinstance(v, bool):
            return
        if isinstance(v, list):
            for x in v:
                note(x)
        elif isinstance(v, str):
            seen.add(ord(v))
        else:
            seen.add(int(v))

    for initial in inputs:
        try:
            trace = execute(program, initial, fuel, externals=registry)
        except RuntimeFault:
            continue
        for c in trace.configs:
            for v in c.valuation.values():
                note(v)
    return seen


def cegis_repair(program: Program, manipulation: Manipulation | None,
                 options: RepairOptions | None = None,
                 registry: dict[str, Callable] | None = None,
                 max_iterations: int = MAX_ITERATIONS
                 ) -> CegisResult | NoRepair:
    """Search for a repair under a partial interpretation of the
    externals, verifying and refining guesses until they all match."""
    options = options or RepairOptions()
    registry = dict(DEFAULT_REGISTRY if registry is None else registry)
    names = external_names(program)
    for name in names:
        if name not in registry:
            raise KeyError(f"external function {name!r} is not registered")

    inputs = []
    if manipulation is not None:
        inputs.append(manipulation.initial)
    inputs.extend(t.input for t in options.tests)
    table = PartialInterpretation()
    for initial in inputs:
        harvest_interpretation(program, initial, registry,
                               fuel=options.original_fuel, table=table)
    observed = observed_integers(program, inputs, registry,
                                 fuel=options.original_fuel)
    observed |= {v for v, _ in table.entries.values()}

    iterations: list[CegisIteration] = []
    stats = SearchStats()
    start = time.monotonic()
    for number in range(1, max_iterations + 1):
        proposal = None
        bound_used = 0
        driver = None
        for bound in options.const_bound_schedule:
            domain = sorted(set(range(-bound, bound + 1)) | observed)
            driver = GuessDriver(table, domain)
            externals = driver.external_table(names)
            opts = replace(options, const_bound_schedule=(bound,))
            r = repair(program, manipulation, opts, externals=externals,
                       guess_driver=driver)
            stats.candidates += r.stats.candidates
            stats.valid += r.stats.valid
            if isinstance(r, RepairResult):
                proposal = r
                bound_used = bound
                break
        if proposal is None:
            stats.wall_time = time.monotonic() - start
            return NoRepair("no repair under the current interpretation", stats)
        guesses = _winning_guesses(proposal, program, manipulation, options,
                                   driver, names)
        mismatches = verify_guesses(guesses, registry)
        iterations.append(CegisIteration(
            number=number, bound=bound_used, status="proposed",
            patch=proposal.patch.to_json(), guesses=guesses,
            mismatches=mismatches, table_size=len(table)))
        if not mismatches:
            stats.wall_time = time.monotonic() - start
            proposal.stats.candidates = stats.candidates
            proposal.stats.valid = stats.valid
            proposal.stats.wall_time = stats.wall_time
            return CegisResult(result=proposal, iterations=iterations,
                               table=table)
        for key, _, actual in mismatches:
            table.add_verified(key, actual)
            observed.add(actual)
    stats.wall_time = time.monotonic() - start
    return NoRepair(f"no verified repair within {max_iterations} iterations",
                    stats)


def _winning_guesses(proposal: RepairResult, program: Program,
                     manipulation: Manipulation | None,
                     options: RepairOptions, driver: GuessDriver,
                     names) -> dict:
    """Re-evaluate the winning program to recover the guesses it used."""
    externals = driver.external_table(names)
    context = build_context(program, manipulation, options,
                            externals=externals)
    from .solver import Invalid

    out = driver.evaluate(
        lambda: _score_program(proposal.program, context, 0),
        valid_of=lambda o: not isinstance(o, Invalid),
        sem_of=lambda o: o[0].semantic)
    if out is None:
        raise RuntimeError("winning repair failed guess reconstruction")
    return dict(driver.last_choices)
