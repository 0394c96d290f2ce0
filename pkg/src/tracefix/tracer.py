"""Concrete execution of programs into configuration traces.

A configuration is emitted before each statement of the entry function
executes, and once more at ``exit``.  Valuations range over the entry
function's inputs, locals and the result slot; variables that are out of
scope or unassigned map to the undefined value.  Calls to other functions
in the program run inline without emitting configurations of their own.

Integer arithmetic wraps to 64-bit two's complement and division truncates
toward zero.  Fuel counts emitted configurations; exceeding it yields a
trace with ``terminated=False`` rather than an error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

from .lang import ast
from .lang.ast import (Assign, ArrayIndex, ArrayLen, ArrayLit, Binary,
                       BoolLit, Call, CharLit, Expr, ExprStmt, ExtCall, For,
                       FunctionDef, HoleRef, If, IntLit, NewArray, Program,
                       Return, Stmt, Unary, Var, VarDecl, While, EXIT_LOC,
                       RESULT_VAR)

_I64_MASK = (1 << 64) - 1
_I64_SIGN = 1 << 63

MAX_CALL_DEPTH = 256


def wrap_i64(v: int) -> int:
    v &= _I64_MASK
    return v - (1 << 64) if v & _I64_SIGN else v


class _Undefined:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNDEF"


UNDEF = _Undefined()


class Wildcard:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "?"


WILDCARD = Wildcard()

Value = Any  # int | bool | str (single char) | list | _Undefined


class RuntimeFault(Exception):
    def __init__(self, location, reason: str, trace: "Trace | None" = None):
        super().__init__(f"at {location}: {reason}")
        self.location = location
        self.reason = reason
        self.trace = trace


@dataclass(frozen=True)
class Configuration:
    loc: Any  # int or EXIT_LOC
    valuation: dict[str, Value]


@dataclass
class Trace:
    configs: list[Configuration]
    terminated: bool

    def __len__(self) -> int:
        return len(self.configs)

    def __getitem__(self, i):
        return self.configs[i]

    def locations(self) -> list:
        return [c.loc for c in self.configs]

    def exit_valuation(self) -> dict[str, Value]:
        if not self.terminated:
            raise ValueError("trace did not terminate")
        return self.configs[-1].valuation

    def output(self) -> Value:
        return self.exit_valuation()[RESULT_VAR]


@dataclass(frozen=True)
class Manipulation:
    """A state edit: on input ``initial``, at trace index ``index``, the
    variables in ``values`` should take the given values (``WILDCARD``
    entries are unconstrained).  Input variables may not appear."""

    initial: dict[str, Value]
    index: int
    values: dict[str, Value]


@dataclass(frozen=True)
class Test:
    __test__ = False  # keep pytest from collecting this dataclass

    input: dict[str, Value]
    output: Value


# ---------------------------------------------------------------------------
# Interpreter


class _ReturnSignal(Exception):
    def __init__(self, value):
        self.value = value


class _FuelStop(Exception):
    pass


def _copy_value(v: Value) -> Value:
    return list(v) if isinstance(v, list) else v


def _as_int(v: Value) -> int:
    if isinstance(v, bool):
        return 1 if v else 0
    if isinstance(v, str):
        return ord(v)
    return v


def collect_domain(fn: FunctionDef) -> list[str]:
    """Names of trace-visible variables: params, locals, result slot."""
    names = [n for n, _ in fn.params]
    for s in ast.walk_stmts(fn.body):
        if isinstance(s, VarDecl) and s.name not in names and s.name != RESULT_VAR:
            names.append(s.name)
        if isinstance(s, For) and isinstance(s.init, VarDecl):
            if s.init.name not in names and s.init.name != RESULT_VAR:
                names.append(s.init.name)
    names.append(RESULT_VAR)
    return names


class _Machine:
    def __init__(self, program: Program, fuel: int, externals, hole_values,
                 max_steps: int):
        self.program = program
        self.fuel = fuel
        self.externals = externals or {}
        self.hole_values = hole_values
        self.max_steps = max_steps
        self.steps = 0
        self.configs: list[Configuration] = []

    # -- frames -------------------------------------------------------------

    def run_entry(self, initial: dict[str, Value]) -> Trace:
        fn = self.program.entry_fn()
        vals: dict[str, Value] = {}
        for pname, _ in fn.params:
            vals[pname] = _copy_value(initial[pname])
        self.entry_fn = fn
        self.entry_vals = vals
        self.entry_domain = collect_domain(fn)
        self.entry_output: Value = UNDEF
        try:
            try:
                # Function-level locals stay visible in the exit configuration;
                # only block-scoped declarations are undefined on scope exit.
                self.exec_body(fn.body, vals, emit=True, depth=0, kill=False)
            except _ReturnSignal as r:
                self.entry_output = r.value
            else:
                if fn.return_type != ast.VOID:
                    raise RuntimeFault(
                        fn.body[-1].loc if fn.body else fn.line,
                        "control reached the end of a non-void function",
                        self.partial_trace())
            self.emit(EXIT_LOC)
        except _FuelStop:
            return Trace(self.configs, terminated=False)
        return Trace(self.configs, terminated=True)

    def partial_trace(self) -> Trace:
        return Trace(list(self.configs), terminated=False)

    def emit(self, loc) -> None:
        if len(self.configs) >= self.fuel:
            raise _FuelStop()
        snapshot = {}
        for name in self.entry_domain:
            if name == RESULT_VAR:
                snapshot[name] = _copy_value(self.entry_output)
            else:
                snapshot[name] = _copy_value(self.entry_vals.get(name, UNDEF))
        self.configs.append(Configuration(loc, snapshot))

    def tick(self, loc) -> None:
        self.steps += 1
        if self.steps > self.max_steps:
            raise _FuelStop()

    # -- statements -----------------------------------------------------------

    def exec_body(self, body: list[Stmt], vals, emit: bool, depth: int,
                  kill: bool = True) -> None:
        declared: list[str] = []
        try:
            for s in body:
                self.exec_stmt(s, vals, emit, depth, declared)
        finally:
            if kill:
                for name in declared:
                    vals[name] = UNDEF

    def exec_stmt(self, s: Stmt, vals, emit: bool, depth: int,
                  declared: list[str]) -> None:
        if emit:
            self.emit(s.loc)
        self.tick(s.loc)
        if isinstance(s, VarDecl):
            vals[s.name] = (self.eval(s.init, vals, s.loc, depth)
                            if s.init is not None else UNDEF)
            declared.append(s.name)
        elif isinstance(s, Assign):
            value = self.eval(s.value, vals, s.loc, depth)
            if s.index is None:
                if vals.get(s.name, UNDEF) is UNDEF and s.name not in vals:
                    raise RuntimeFault(s.loc, f"assignment to undeclared {s.name!r}",
                                       self.partial_trace())
                vals[s.name] = value
            else:
                arr = vals.get(s.name, UNDEF)
                if arr is UNDEF:
                    raise RuntimeFault(s.loc, f"array {s.name!r} has no value",
                                       self.partial_trace())
                idx = _as_int(self.eval(s.index, vals, s.loc, depth))
                if idx < 0 or idx >= len(arr):
                    raise RuntimeFault(
                        s.loc, f"index {idx} out of bounds for {s.name!r} "
                               f"(length {len(arr)})", self.partial_trace())
                arr[idx] = value
        elif isinstance(s, If):
            if self.eval(s.cond, vals, s.loc, depth):
                self.exec_body(s.then_body, vals, emit, depth)
            else:
                self.exec_body(s.else_body, vals, emit, depth)
        elif isinstance(s, For):
            loop_declared: list[str] = []
            try:
                if s.init is not None:
                    if isinstance(s.init, VarDecl):
                        vals[s.init.name] = (
                            self.eval(s.init.init, vals, s.loc, depth)
                            if s.init.init is not None else UNDEF)
                        loop_declared.append(s.init.name)
                    else:
                        self.exec_stmt(s.init, vals, False, depth, loop_declared)
                while self.eval(s.cond, vals, s.loc, depth):
                    self.exec_body(s.body, vals, emit, depth)
                    if emit:
                        self.emit(s.loc)
                    self.tick(s.loc)
                    if s.update is not None:
                        self.exec_stmt(s.update, vals, False, depth, loop_declared)
            finally:
                for name in loop_declared:
                    vals[name] = UNDEF
        elif isinstance(s, While):
            while True:
                cond = self.eval(s.cond, vals, s.loc, depth)
                if not cond:
                    break
                self.exec_body(s.body, vals, emit, depth)
                if emit:
                    self.emit(s.loc)
                self.tick(s.loc)
        elif isinstance(s, Return):
            value = (self.eval(s.value, vals, s.loc, depth)
                     if s.value is not None else UNDEF)
            raise _ReturnSignal(_copy_value(value))
        elif isinstance(s, ExprStmt):
            self.eval(s.call, vals, s.loc, depth)
        else:
            raise RuntimeFault(s.loc, f"unknown statement {s!r}", self.partial_trace())

    # -- expressions -----------------------------------------------------------

    def eval(self, e: Expr, vals, loc, depth: int) -> Value:
        if isinstance(e, IntLit):
            return e.value
        if isinstance(e, BoolLit):
            return e.value
        if isinstance(e, CharLit):
            return e.value
        if isinstance(e, HoleRef):
            if self.hole_values is None:
                raise RuntimeFault(loc, "cannot execute a sketched hole",
                                   self.partial_trace())
            return self.hole_values[e.hole_id]
        if isinstance(e, Var):
            v = vals.get(e.name, UNDEF)
            if v is UNDEF:
                raise RuntimeFault(loc, f"variable {e.name!r} has no value here",
                                   self.partial_trace())
            return v
        if isinstance(e, ArrayIndex):
            arr = vals.get(e.name, UNDEF)
            if arr is UNDEF:
                raise RuntimeFault(loc, f"array {e.name!r} has no value here",
                                   self.partial_trace())
            idx = _as_int(self.eval(e.index, vals, loc, depth))
            if idx < 0 or idx >= len(arr):
                raise RuntimeFault(
                    loc, f"index {idx} out of bounds for {e.name!r} "
                         f"(length {len(arr)})", self.partial_trace())
            return arr[idx]
        if isinstance(e, ArrayLen):
            arr = vals.get(e.name, UNDEF)
            if arr is UNDEF:
                raise RuntimeFault(loc, f"array {e.name!r} has no value here",
                                   self.partial_trace())
            return len(arr)
        if isinstance(e, Unary):
            if e.op == "-":
                return wrap_i64(-_as_int(self.eval(e.operand, vals, loc, depth)))
            return not self.eval(e.operand, vals, loc, depth)
        if isinstance(e, Binary):
            return self.eval_binary(e, vals, loc, depth)
        if isinstance(e, Call):
            return self.eval_call(e, vals, loc, depth)
        if isinstance(e, ExtCall):
            fn = self.externals.get(e.name)
            if fn is None:
                raise RuntimeFault(loc, f"external function {e.name!r} is not registered",
                                   self.partial_trace())
            args = tuple(_as_int(self.eval(a, vals, loc, depth)) for a in e.args)
            return wrap_i64(int(fn(*args)))
        if isinstance(e, ArrayLit):
            elems = [self.eval(x, vals, loc, depth) for x in e.elems]
            if all(isinstance(v, str) for v in elems):
                return elems
            return [_as_int(v) for v in elems]
        if isinstance(e, NewArray):
            n = _as_int(self.eval(e.size, vals, loc, depth))
            if n < 0:
                raise RuntimeFault(loc, f"negative array size {n}", self.partial_trace())
            if n > 1_000_000:
                raise RuntimeFault(loc, f"array size {n} too large", self.partial_trace())
            return ["\0"] * n if e.elem_type.kind == "char" else [0] * n
        raise RuntimeFault(loc, f"cannot evaluate {e!r}", self.partial_trace())

    def eval_binary(self, e: Binary, vals, loc, depth: int) -> Value:
        op = e.op
        if op == "&&":
            return bool(self.eval(e.left, vals, loc, depth)) and \
                bool(self.eval(e.right, vals, loc, depth))
        if op == "||":
            return bool(self.eval(e.left, vals, loc, depth)) or \
                bool(self.eval(e.right, vals, loc, depth))
        # coefficient-hole products skip the operand entirely when the
        # coefficient is 0, matching what instantiation-then-simplification
        # would execute
        if (op == "*" and isinstance(e.left, HoleRef)
                and e.left.kind == "coeff" and self.hole_values is not None):
            c = self.hole_values[e.left.hole_id]
            if c == 0:
                return 0
            return wrap_i64(c * _as_int(self.eval(e.right, vals, loc, depth)))
        left = self.eval(e.left, vals, loc, depth)
        right = self.eval(e.right, vals, loc, depth)
        if op in ("==", "!="):
            if isinstance(left, bool) or isinstance(right, bool):
                eq = bool(left) == bool(right)
            else:
                eq = _as_int(left) == _as_int(right)
            return eq if op == "==" else not eq
        a, b = _as_int(left), _as_int(right)
        if op == "+":
            return wrap_i64(a + b)
        if op == "-":
            return wrap_i64(a - b)
        if op == "*":
            return wrap_i64(a * b)
        if op == "/":
            if b == 0:
                raise RuntimeFault(loc, "division by zero", self.partial_trace())
            return wrap_i64(-(-a // b) if (a < 0) != (b < 0) else a // b)
        if op == "%":
            if b == 0:
                raise RuntimeFault(loc, "modulo by zero", self.partial_trace())
            q = -(-a // b) if (a < 0) != (b < 0) else a // b
            return wrap_i64(a - q * b)
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        if op == ">=":
            return a >= b
        raise RuntimeFault(loc, f"unknown operator {op!r}", self.partial_trace())

    def eval_call(self, e: Call, vals, loc, depth: int) -> Value:
        if depth >= MAX_CALL_DEPTH:
            raise RuntimeFault(loc, "call depth exceeded", self.partial_trace())
        try:
            fn = self.program.function(e.name)
        except KeyError:
            raise RuntimeFault(loc, f"call to undefined function {e.name!r}",
                               self.partial_trace()) from None
        frame = {}
        for arg, (pname, _) in zip(e.args, fn.params):
            frame[pname] = _copy_value(self.eval(arg, vals, loc, depth))
        try:
            self.exec_body(fn.body, frame, emit=False, depth=depth + 1)
        except _ReturnSignal as r:
            return r.value
        if fn.return_type != ast.VOID:
            raise RuntimeFault(loc, f"{e.name!r} ended without returning",
                               self.partial_trace())
        return UNDEF


def evaluate_call(program: Program, name: str, args: tuple,
                  externals: dict[str, Callable] | None = None,
                  max_steps: int = 10_000) -> Value:
    """Run one function of the program on concrete arguments, without
    emitting configurations.  Used when the flat-encoded engine needs to
    evaluate a call to a user-defined function."""
    machine = _Machine(program, fuel=1, externals=externals, hole_values=None,
                       max_steps=max_steps)
    machine.entry_domain = []
    machine.entry_vals = {}
    machine.entry_output = UNDEF
    fn = program.function(name)
    frame = {pname: _copy_value(a) for (pname, _), a in zip(fn.params, args)}
    try:
        machine.exec_body(fn.body, frame, emit=False, depth=1)
    except _ReturnSignal as r:
        return 0 if r.value is UNDEF else r.value
    except _FuelStop:
        raise RuntimeFault(0, f"call to {name!r} exceeded its work budget") from None
    if fn.return_type != ast.VOID:
        raise RuntimeFault(0, f"{name!r} ended without returning")
    return 0


def execute(program: Program, initial: dict[str, Value], fuel: int,
            externals: dict[str, Callable] | None = None,
            hole_values: dict[int, int] | None = None,
            max_steps: int | None = None) -> Trace:
    """Run the entry function on ``initial`` and record its trace.

    Raises RuntimeFault (with the partial trace attached) on array bounds
    violations, division/modulo by zero, reads of undefined variables and
    calls to unregistered externals.
    """
    if fuel < 1:
        raise ValueError("fuel must be at least 1")
    fn = program.entry_fn()
    for pname, _ in fn.params:
        if pname not in initial:
            raise ValueError(f"initial valuation is missing input {pname!r}")
    if max_steps is None:
        max_steps = max(fuel * 64, 10_000)
    machine = _Machine(program, fuel, externals, hole_values, max_steps)
    return machine.run_entry(initial)


# ---------------------------------------------------------------------------
# Satisfaction


def values_equal(a: Value, b: Value) -> bool:
    if a is UNDEF or b is UNDEF:
        return a is b
    if isinstance(a, list) or isinstance(b, list):
        return isinstance(a, list) and isinstance(b, list) and a == b
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    return _as_int(a) == _as_int(b)


def satisfies_partial(valuation: dict[str, Value], partial: dict[str, Value]) -> bool:
    """True iff every non-wildcard entry of ``partial`` matches ``valuation``."""
    for name, want in partial.items():
        if want is WILDCARD:
            continue
        if not values_equal(valuation.get(name, UNDEF), want):
            return False
    return True


def satisfying_indices(trace: Trace, location, partial: dict[str, Value]) -> list[int]:
    return [j for j, c in enumerate(trace.configs)
            if c.loc == location and satisfies_partial(c.valuation, partial)]


def run_test(program: Program, test: Test, fuel: int,
             externals: dict[str, Callable] | None = None) -> bool:
    try:
        trace = execute(program, test.input, fuel, externals=externals)
    except RuntimeFault:
        return False
    if not trace.terminated:
        return False
    return values_equal(trace.output(), test.output)


# ---------------------------------------------------------------------------
# JSON encoding (the wire format used by the CLI and the service)


def value_to_json(v: Value):
    if v is UNDEF:
        return None
    if isinstance(v, list):
        return [value_to_json(x) for x in v]
    return v


def trace_to_json(trace: Trace) -> dict:
    steps = []
    for i, c in enumerate(trace.configs):
        steps.append({
            "step": i,
            "loc": c.loc,
            "vars": {name: value_to_json(val) for name, val in c.valuation.items()},
        })
    return {"steps": steps, "terminated": trace.terminated}
