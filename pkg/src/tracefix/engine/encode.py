"""Flat encoding of (possibly sketched) entry functions for fast candidate
evaluation.

The solver evaluates many hole assignments against the same program shape,
so the entry function is compiled once into a small bytecode over int64
scalar slots and arena-allocated arrays.  Hole references read from an
assignment vector, and products whose coefficient hole is 0 skip their
operand entirely, matching what instantiation-then-simplification would
execute.  The VM also folds the per-step trace distance against a
pre-encoded reference trace and checks state-edit satisfaction online, so
a candidate evaluation allocates nothing per step.

Two interchangeable backends interpret this encoding: a compiled Cython
core and a pure-Python fallback (see ``tracefix.engine``).
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass, field
from ..lang import ast
from ..lang.ast import (Assign, ArrayIndex, ArrayLen, ArrayLit, Binary,
                        BoolLit, Call, CharLit, Expr, ExprStmt, ExtCall, For,
                        FunctionDef, HoleRef, If, IntLit, NewArray, Program,
                        Return, Stmt, Unary, Var, VarDecl, While, EXIT_LOC,
                        RESULT_VAR, VOID)
from ..tracer import (Configuration, UNDEF, WILDCARD, collect_domain,
                      wrap_i64)

# opcodes
OP_EMIT = 1
OP_PUSHC = 2
OP_PUSHH = 3
OP_LOAD = 4
OP_STORE = 5
OP_KILL = 6
OP_LOADELEM = 7
OP_STOREELEM = 8
OP_LEN = 9
OP_NEWARR = 10
OP_ARRLIT = 11
OP_ADD = 12
OP_SUB = 13
OP_MUL = 14
OP_DIV = 15
OP_MOD = 16
OP_NEG = 17
OP_LT = 18
OP_LE = 19
OP_GT = 20
OP_GE = 21
OP_EQ = 22
OP_NE = 23
OP_NOT = 24
OP_JMP = 25
OP_JZ = 26
OP_JZK = 27
OP_JNZK = 28
OP_CALL = 29
OP_POP = 30
OP_RET = 31
OP_RETA = 32
OP_RETV = 33
OP_END = 34
OP_JNZ = 35
OP_JZNP = 36  # jump if top == 0, never popping

# run statuses
ST_TERMINATED = 0
ST_FUEL = 1
ST_FAULT = 2

# fault codes
F_OOB = 1
F_DIV0 = 2
F_MOD0 = 3
F_UNDEF = 4
F_NEGSIZE = 5
F_ARENA = 6
F_MISSING_RETURN = 7
F_STACK = 8

FAULT_NAMES = {F_OOB: "index out of bounds", F_DIV0: "division by zero",
               F_MOD0: "modulo by zero", F_UNDEF: "read of undefined variable",
               F_NEGSIZE: "negative array size", F_ARENA: "array arena exhausted",
               F_MISSING_RETURN: "control reached the end of a non-void function",
               F_STACK: "expression stack overflow"}

EXIT_CODE = -1  # encoded location of the exit configuration
NO_MANIP = -2

MAX_SCALARS = 63
MAX_ARRAYS = 15


class EncodingUnsupported(Exception):
    """The program uses a construct the flat encoding cannot express."""


@dataclass
class CompiledProgram:
    code: array
    consts: array
    n_scalars: int
    n_arrays: int
    out_sslot: int   # -1 when the function returns an array or void
    out_aslot: int   # -1 unless the function returns an array
    calls: list[tuple[str, str, int]]  # (kind, name, nargs); kind "user"|"ext"
    display: dict[str, tuple[str, int]]  # name -> ("s"|"a", slot)
    param_layout: list[tuple[str, str, int]]  # (name, kind, slot)
    n_holes: int
    emit_locs: list[int]


class _Compiler:
    def __init__(self, fn: FunctionDef, n_holes: int):
        self.fn = fn
        self.code: list[int] = []
        self.consts: list[int] = []
        self.const_ids: dict[int, int] = {}
        self.calls: list[tuple[str, str, int]] = []
        self.call_ids: dict[tuple[str, str, int], int] = {}
        self.sslots: dict[str, int] = {}
        self.aslots: dict[str, int] = {}
        self.scopes: list[list[tuple[str, bool]]] = []  # (slotname, is_array)
        self.n_holes = n_holes
        self.emit_locs: list[int] = []

    # -- layout ---------------------------------------------------------------

    def build_layout(self):
        fn = self.fn
        self.param_layout = []
        for name, ty in fn.params:
            if ty.is_array:
                slot = self._new_aslot(name)
                self.param_layout.append((name, "a", slot))
            else:
                slot = self._new_sslot(name)
                self.param_layout.append((name, "s", slot))
        # locals (first-declaration order, including loop variables)
        for s in ast.walk_stmts(fn.body):
            decls = []
            if isinstance(s, VarDecl):
                decls.append(s)
            if isinstance(s, For) and isinstance(s.init, VarDecl):
                decls.append(s.init)
            for d in decls:
                if d.ty.is_array:
                    if d.name not in self.aslots:
                        self._new_aslot(d.name)
                elif d.name not in self.sslots:
                    self._new_sslot(d.name)
        self.out_sslot = -1
        self.out_aslot = -1
        if fn.return_type != VOID:
            if fn.return_type.is_array:
                self.out_aslot = self._new_aslot("__out__")
            else:
                self.out_sslot = self._new_sslot("__out__")
        self.ret_tmp_aslot = -1
        if len(self.sslots) > MAX_SCALARS or len(self.aslots) > MAX_ARRAYS:
            raise EncodingUnsupported("too many variables for the flat encoding")
        # trace-visible variables; a local shadowing the result name is
        # executed normally but the displayed slot is the result slot
        display: dict[str, tuple[str, int]] = {}
        for name in collect_domain(fn):
            if name == RESULT_VAR:
                if self.out_aslot >= 0:
                    display[name] = ("a", self.out_aslot)
                elif self.out_sslot >= 0:
                    display[name] = ("s", self.out_sslot)
                else:
                    display[name] = ("s", MAX_SCALARS)  # void: always undefined
            elif name in self.aslots:
                display[name] = ("a", self.aslots[name])
            else:
                display[name] = ("s", self.sslots[name])
        self.display = display

    def _new_sslot(self, name: str) -> int:
        slot = len(self.sslots)
        self.sslots[name] = slot
        return slot

    def _new_aslot(self, name: str) -> int:
        slot = len(self.aslots)
        self.aslots[name] = slot
        return slot

    # -- emission helpers -------------------------------------------------------

    def emit(self, *ops: int) -> None:
        self.code.extend(ops)

    def const(self, v: int) -> int:
        if v not in self.const_ids:
            self.const_ids[v] = len(self.consts)
            self.consts.append(wrap_i64(v))
        return self.const_ids[v]

    def call_id(self, kind: str, name: str, nargs: int) -> int:
        key = (kind, name, nargs)
        if key not in self.call_ids:
            self.call_ids[key] = len(self.calls)
            self.calls.append(key)
        return self.call_ids[key]

    def label(self) -> int:
        return len(self.code)

    def jump(self, op: int) -> int:
        """Emit a jump with a placeholder target; returns the patch site."""
        self.emit(op, -1)
        return len(self.code) - 1

    def patch(self, site: int) -> None:
        self.code[site] = len(self.code)

    # -- expressions -------------------------------------------------------------

    def expr(self, e: Expr) -> None:
        if isinstance(e, IntLit):
            self.emit(OP_PUSHC, self.const(e.value))
        elif isinstance(e, BoolLit):
            self.emit(OP_PUSHC, self.const(1 if e.value else 0))
        elif isinstance(e, CharLit):
            self.emit(OP_PUSHC, self.const(ord(e.value)))
        elif isinstance(e, HoleRef):
            self.emit(OP_PUSHH, e.hole_id)
        elif isinstance(e, Var):
            self.emit(OP_LOAD, self.sslots[e.name])
        elif isinstance(e, ArrayIndex):
            self.expr(e.index)
            self.emit(OP_LOADELEM, self.aslots[e.name])
        elif isinstance(e, ArrayLen):
            self.emit(OP_LEN, self.aslots[e.name])
        elif isinstance(e, Unary):
            self.expr(e.operand)
            self.emit(OP_NEG if e.op == "-" else OP_NOT)
        elif isinstance(e, Binary):
            self.binary(e)
        elif isinstance(e, Call):
            for a in e.args:
                self.expr(a)
            self.emit(OP_CALL, self.call_id("user", e.name, len(e.args)),
                      len(e.args))
        elif isinstance(e, ExtCall):
            for a in e.args:
                self.expr(a)
            self.emit(OP_CALL, self.call_id("ext", e.name, len(e.args)),
                      len(e.args))
        else:
            raise EncodingUnsupported(f"cannot encode expression {e!r}")

    def binary(self, e: Binary) -> None:
        if e.op == "&&":
            self.expr(e.left)
            site = self.jump(OP_JZK)
            self.expr(e.right)
            self.patch(site)
            return
        if e.op == "||":
            self.expr(e.left)
            site = self.jump(OP_JNZK)
            self.expr(e.right)
            self.patch(site)
            return
        if (e.op == "*" and isinstance(e.left, HoleRef)
                and e.left.kind == "coeff"):
            # a zero coefficient short-circuits the operand, like the
            # dropped term in a simplified instantiation
            self.emit(OP_PUSHH, e.left.hole_id)
            site = self.jump(OP_JZNP)
            self.expr(e.right)
            self.emit(OP_MUL)
            self.patch(site)
            return
        self.expr(e.left)
        self.expr(e.right)
        table = {"+": OP_ADD, "-": OP_SUB, "*": OP_MUL, "/": OP_DIV,
                 "%": OP_MOD, "<": OP_LT, "<=": OP_LE, ">": OP_GT,
                 ">=": OP_GE, "==": OP_EQ, "!=": OP_NE}
        self.emit(table[e.op])

    # -- statements -----------------------------------------------------------------

    def compile(self) -> CompiledProgram:
        self.build_layout()
        self.scopes = [[]]
        self.body(self.fn.body, top_level=True)
        self.emit(OP_END)
        return CompiledProgram(
            code=array("q", self.code), consts=array("q", self.consts),
            n_scalars=len(self.sslots), n_arrays=len(self.aslots),
            out_sslot=self.out_sslot, out_aslot=self.out_aslot,
            calls=self.calls, display=self.display,
            param_layout=self.param_layout, n_holes=self.n_holes,
            emit_locs=self.emit_locs)

    def body(self, stmts: list[Stmt], top_level: bool = False) -> None:
        self.scopes.append([])
        for s in stmts:
            self.stmt(s)
        declared = self.scopes.pop()
        if not top_level:
            self.kill(declared)

    def kill(self, declared: list[tuple[str, bool]]) -> None:
        for name, is_array in declared:
            self.emit(OP_KILL, (self.aslots[name] + MAX_SCALARS + 1) if is_array
                      else self.sslots[name])

    def kill_all_block_scopes(self) -> None:
        # scopes[0] is the sentinel, scopes[1] the function body
        for declared in self.scopes[2:]:
            self.kill(declared)

    def stmt(self, s: Stmt, emit: bool = True) -> None:
        if emit:
            self.emit(OP_EMIT, s.loc)
            self.emit_locs.append(s.loc)
        if isinstance(s, VarDecl):
            self.decl(s)
        elif isinstance(s, Assign):
            if s.index is None:
                self.expr(s.value)
                self.emit(OP_STORE, self.sslots[s.name])
            else:
                self.expr(s.value)
                self.expr(s.index)
                self.emit(OP_STOREELEM, self.aslots[s.name])
        elif isinstance(s, If):
            self.expr(s.cond)
            to_else = self.jump(OP_JZ)
            self.body(s.then_body)
            if s.else_body:
                to_end = self.jump(OP_JMP)
                self.patch(to_else)
                self.body(s.else_body)
                self.patch(to_end)
            else:
                self.patch(to_else)
        elif isinstance(s, For):
            # a configuration is emitted at the header before the init and
            # before every update/re-check, never for the final failed check
            self.scopes.append([])
            if s.init is not None:
                self.stmt(s.init, emit=False)
            self.expr(s.cond)
            to_exit = self.jump(OP_JZ)
            body_start = self.label()
            self.body(s.body)
            self.emit(OP_EMIT, s.loc)
            self.emit_locs.append(s.loc)
            if s.update is not None:
                self.stmt(s.update, emit=False)
            self.expr(s.cond)
            self.emit(OP_JNZ, body_start)
            self.patch(to_exit)
            declared = self.scopes.pop()
            self.kill(declared)
        elif isinstance(s, While):
            head = self.label()
            self.emit(OP_EMIT, s.loc)
            self.emit_locs.append(s.loc)
            self.expr(s.cond)
            to_exit = self.jump(OP_JZ)
            self.body(s.body)
            self.emit(OP_JMP, head)
            self.patch(to_exit)
        elif isinstance(s, Return):
            self.ret(s)
        elif isinstance(s, ExprStmt):
            self.expr(s.call)
            self.emit(OP_POP)
        else:
            raise EncodingUnsupported(f"cannot encode statement {s!r}")

    def decl(self, s: VarDecl) -> None:
        is_array = s.ty.is_array
        if is_array:
            if isinstance(s.init, ArrayLit):
                for el in s.init.elems:
                    self.expr(el)
                self.emit(OP_ARRLIT, self.aslots[s.name], len(s.init.elems))
            elif isinstance(s.init, NewArray):
                self.expr(s.init.size)
                self.emit(OP_NEWARR, self.aslots[s.name])
            else:
                raise EncodingUnsupported("array locals need literal/new initializers")
        elif s.init is not None:
            self.expr(s.init)
            self.emit(OP_STORE, self.sslots[s.name])
        else:
            self.emit(OP_KILL, self.sslots[s.name])
        self.scopes[-1].append((s.name, is_array))

    def ret(self, s: Return) -> None:
        self.kill_all_block_scopes()
        if s.value is None:
            self.emit(OP_RETV)
            return
        if self.out_aslot >= 0:
            if isinstance(s.value, Var):
                self.emit(OP_RETA, self.aslots[s.value.name])
            elif isinstance(s.value, (ArrayLit, NewArray)):
                if self.ret_tmp_aslot < 0:
                    self.ret_tmp_aslot = self._new_aslot("__ret_tmp__")
                    if len(self.aslots) > MAX_ARRAYS:
                        raise EncodingUnsupported("too many arrays")
                if isinstance(s.value, ArrayLit):
                    for el in s.value.elems:
                        self.expr(el)
                    self.emit(OP_ARRLIT, self.ret_tmp_aslot, len(s.value.elems))
                else:
                    self.expr(s.value.size)
                    self.emit(OP_NEWARR, self.ret_tmp_aslot)
                self.emit(OP_RETA, self.ret_tmp_aslot)
            else:
                raise EncodingUnsupported("array returns must name a variable")
            return
        self.expr(s.value)
        self.emit(OP_RET)


def compile_function(fn: FunctionDef, n_holes: int = 0) -> CompiledProgram:
    return _Compiler(fn, n_holes).compile()


# ---------------------------------------------------------------------------
# Run specifications


def _encode_value(v) -> int:
    if isinstance(v, bool):
        return 1 if v else 0
    if isinstance(v, str):
        return ord(v)
    return wrap_i64(int(v))


@dataclass
class RunSpec:
    """One execution of the compiled program: initial state, fuel, the
    reference trace to fold distances against, the state-edit constraints
    to watch for, and the expected output (for tests)."""

    init_scalars: array
    init_sdef: int
    init_arr_meta: array   # 2 slots per array: offset,len (-1,-1 undefined)
    init_arr_data: array
    fuel: int
    # reference trace (possibly empty: k = -1)
    k: int
    orig_loc: array
    orig_scal: array       # (k+1) * n_scalars
    orig_sdef: array
    orig_ameta: array      # (k+1) * n_arrays * 2
    orig_adata: array
    tracked_smask: int
    tracked_amask: int
    # state-edit constraints (applied at configurations of manip_loc)
    manip_loc: int = NO_MANIP
    mscal_slots: array = field(default_factory=lambda: array("q"))
    mscal_vals: array = field(default_factory=lambda: array("q"))
    mscal_undef: array = field(default_factory=lambda: array("q"))
    marr_slots: array = field(default_factory=lambda: array("q"))
    marr_off: array = field(default_factory=lambda: array("q"))
    marr_len: array = field(default_factory=lambda: array("q"))
    marr_undef: array = field(default_factory=lambda: array("q"))
    marr_data: array = field(default_factory=lambda: array("q"))
    # expected output: 0 none, 1 scalar, 2 array
    exp_mode: int = 0
    exp_scalar: int = 0
    exp_arr: array = field(default_factory=lambda: array("q"))
    arena_cap: int = 1 << 16


def encode_initial(prog: CompiledProgram, initial: dict) -> tuple[array, int, array, array]:
    scalars = array("q", [0] * prog.n_scalars)
    sdef = 0
    meta = array("q", [-1, -1] * prog.n_arrays if prog.n_arrays else [])
    data = array("q")
    for name, kind, slot in prog.param_layout:
        v = initial[name]
        if kind == "s":
            scalars[slot] = _encode_value(v)
            sdef |= 1 << slot
        else:
            meta[slot * 2] = len(data)
            meta[slot * 2 + 1] = len(v)
            data.extend(_encode_value(x) for x in v)
    return scalars, sdef, meta, data


def _loc_code(loc) -> int:
    return EXIT_CODE if loc == EXIT_LOC else int(loc)


def encode_reference(prog: CompiledProgram, configs: list[Configuration]):
    """Pack tree-walk configurations into slot-indexed int64 rows."""
    n, S, A = len(configs), prog.n_scalars, prog.n_arrays
    loc = array("q", [0] * n)
    scal = array("q", [0] * (n * S))
    sdef = array("q", [0] * n)
    ameta = array("q", [-1] * (n * A * 2))
    adata = array("q")
    for h, c in enumerate(configs):
        loc[h] = _loc_code(c.loc)
        mask = 0
        for name, (kind, slot) in prog.display.items():
            v = c.valuation.get(name, UNDEF)
            if kind == "s":
                if slot >= S:
                    continue  # void result slot: always undefined
                if v is not UNDEF:
                    scal[h * S + slot] = _encode_value(v)
                    mask |= 1 << slot
            else:
                if v is not UNDEF:
                    ameta[(h * A + slot) * 2] = len(adata)
                    ameta[(h * A + slot) * 2 + 1] = len(v)
                    adata.extend(_encode_value(x) for x in v)
        sdef[h] = mask
    return loc, scal, sdef, ameta, adata


def tracked_masks(prog: CompiledProgram, tracked: list[str]) -> tuple[int, int]:
    smask = amask = 0
    for name in tracked:
        kind, slot = prog.display[name]
        if kind == "s":
            if slot < prog.n_scalars:
                smask |= 1 << slot
        else:
            amask |= 1 << slot
    return smask, amask


def encode_partial(prog: CompiledProgram, values: dict) -> dict:
    """Encode a partial valuation (state-edit constraints) by slot."""
    out = {k: array("q") for k in ("mscal_slots", "mscal_vals", "mscal_undef",
                                   "marr_slots", "marr_off", "marr_len",
                                   "marr_undef", "marr_data")}
    for name, want in values.items():
        if want is WILDCARD:
            continue
        kind, slot = prog.display[name]
        if kind == "s":
            out["mscal_slots"].append(slot)
            out["mscal_vals"].append(0 if want is UNDEF else _encode_value(want))
            out["mscal_undef"].append(1 if want is UNDEF else 0)
        else:
            out["marr_slots"].append(slot)
            if want is UNDEF:
                out["marr_off"].append(-1)
                out["marr_len"].append(-1)
                out["marr_undef"].append(1)
            else:
                out["marr_off"].append(len(out["marr_data"]))
                out["marr_len"].append(len(want))
                out["marr_undef"].append(0)
                out["marr_data"].extend(_encode_value(x) for x in want)
    return out


def make_runspec(prog: CompiledProgram, initial: dict, fuel: int,
                 reference: list[Configuration] | None,
                 tracked: list[str],
                 manip_loc=None, manip_values: dict | None = None,
                 expected=None, expected_is_array: bool | None = None) -> RunSpec:
    scalars, sdef, ameta0, adata0 = encode_initial(prog, initial)
    if reference:
        loc, scal, rdef, ameta, adata = encode_reference(prog, reference)
        k = len(reference) - 1
    else:
        loc, scal, rdef, ameta, adata = (array("q"),) * 5
        k = -1
    smask, amask = tracked_masks(prog, tracked)
    spec = RunSpec(init_scalars=scalars, init_sdef=sdef, init_arr_meta=ameta0,
                   init_arr_data=adata0, fuel=fuel, k=k, orig_loc=loc,
                   orig_scal=scal, orig_sdef=rdef, orig_ameta=ameta,
                   orig_adata=adata, tracked_smask=smask, tracked_amask=amask)
    if manip_loc is not None:
        spec.manip_loc = _loc_code(manip_loc)
        enc = encode_partial(prog, manip_values or {})
        for key, arr in enc.items():
            setattr(spec, key, arr)
    if expected is not None:
        if expected_is_array is None:
            expected_is_array = isinstance(expected, list)
        if expected_is_array:
            spec.exp_mode = 2
            spec.exp_arr = array("q", [_encode_value(x) for x in expected])
        else:
            spec.exp_mode = 1
            spec.exp_scalar = _encode_value(expected)
    return spec


@dataclass
class RunResult:
    status: int
    emitted: int
    satisfied: bool
    best_sem: int
    best_j: int
    pair_sum: int
    out_ok: bool
    fault_loc: int
    fault_code: int
    captured: list | None

    @property
    def fault_reason(self) -> str:
        return FAULT_NAMES.get(self.fault_code, "fault")
