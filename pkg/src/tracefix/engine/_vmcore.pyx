# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled interpreter for the flat program encoding.

Semantics-identical twin of ``_vmpure.py``; keep the two in lockstep.
``prepare`` binds a program and run specification once into a Runner so
the per-candidate call does no buffer re-acquisition.
"""

from cpython.mem cimport PyMem_Malloc, PyMem_Free

from array import array as _array

from . import encode as _enc

BACKEND = "compiled"

# opcodes, statuses and fault codes as C constants; checked against the
# encoder's table at import so the twins cannot drift apart
cdef enum:
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
    OP_JZNP = 36

cdef enum:
    ST_TERMINATED = 0
    ST_FUEL = 1
    ST_FAULT = 2

cdef enum:
    F_OOB = 1
    F_DIV0 = 2
    F_MOD0 = 3
    F_UNDEF = 4
    F_NEGSIZE = 5
    F_ARENA = 6
    F_MISSING_RETURN = 7
    F_STACK = 8

cdef int EXIT_CODE = -1
cdef int NO_MANIP = -2
cdef int MAX_SCALARS = 63

if _enc.OP_EMIT != OP_EMIT:
    raise ImportError("opcode table drift: OP_EMIT")
if _enc.OP_PUSHC != OP_PUSHC:
    raise ImportError("opcode table drift: OP_PUSHC")
if _enc.OP_PUSHH != OP_PUSHH:
    raise ImportError("opcode table drift: OP_PUSHH")
if _enc.OP_LOAD != OP_LOAD:
    raise ImportError("opcode table drift: OP_LOAD")
if _enc.OP_STORE != OP_STORE:
    raise ImportError("opcode table drift: OP_STORE")
if _enc.OP_KILL != OP_KILL:
    raise ImportError("opcode table drift: OP_KILL")
if _enc.OP_LOADELEM != OP_LOADELEM:
    raise ImportError("opcode table drift: OP_LOADELEM")
if _enc.OP_STOREELEM != OP_STOREELEM:
    raise ImportError("opcode table drift: OP_STOREELEM")
if _enc.OP_LEN != OP_LEN:
    raise ImportError("opcode table drift: OP_LEN")
if _enc.OP_NEWARR != OP_NEWARR:
    raise ImportError("opcode table drift: OP_NEWARR")
if _enc.OP_ARRLIT != OP_ARRLIT:
    raise ImportError("opcode table drift: OP_ARRLIT")
if _enc.OP_ADD != OP_ADD:
    raise ImportError("opcode table drift: OP_ADD")
if _enc.OP_SUB != OP_SUB:
    raise ImportError("opcode table drift: OP_SUB")
if _enc.OP_MUL != OP_MUL:
    raise ImportError("opcode table drift: OP_MUL")
if _enc.OP_DIV != OP_DIV:
    raise ImportError("opcode table drift: OP_DIV")
if _enc.OP_MOD != OP_MOD:
    raise ImportError("opcode table drift: OP_MOD")
if _enc.OP_NEG != OP_NEG:
    raise ImportError("opcode table drift: OP_NEG")
if _enc.OP_LT != OP_LT:
    raise ImportError("opcode table drift: OP_LT")
if _enc.OP_LE != OP_LE:
    raise ImportError("opcode table drift: OP_LE")
if _enc.OP_GT != OP_GT:
    raise ImportError("opcode table drift: OP_GT")
if _enc.OP_GE != OP_GE:
    raise ImportError("opcode table drift: OP_GE")
if _enc.OP_EQ != OP_EQ:
    raise ImportError("opcode table drift: OP_EQ")
if _enc.OP_NE != OP_NE:
    raise ImportError("opcode table drift: OP_NE")
if _enc.OP_NOT != OP_NOT:
    raise ImportError("opcode table drift: OP_NOT")
if _enc.OP_JMP != OP_JMP:
    raise ImportError("opcode table drift: OP_JMP")
if _enc.OP_JZ != OP_JZ:
    raise ImportError("opcode table drift: OP_JZ")
if _enc.OP_JZK != OP_JZK:
    raise ImportError("opcode table drift: OP_JZK")
if _enc.OP_JNZK != OP_JNZK:
    raise ImportError("opcode table drift: OP_JNZK")
if _enc.OP_CALL != OP_CALL:
    raise ImportError("opcode table drift: OP_CALL")
if _enc.OP_POP != OP_POP:
    raise ImportError("opcode table drift: OP_POP")
if _enc.OP_RET != OP_RET:
    raise ImportError("opcode table drift: OP_RET")
if _enc.OP_RETA != OP_RETA:
    raise ImportError("opcode table drift: OP_RETA")
if _enc.OP_RETV != OP_RETV:
    raise ImportError("opcode table drift: OP_RETV")
if _enc.OP_END != OP_END:
    raise ImportError("opcode table drift: OP_END")
if _enc.OP_JNZ != OP_JNZ:
    raise ImportError("opcode table drift: OP_JNZ")
if _enc.OP_JZNP != OP_JZNP:
    raise ImportError("opcode table drift: OP_JZNP")
if _enc.ST_TERMINATED != ST_TERMINATED:
    raise ImportError("opcode table drift: ST_TERMINATED")
if _enc.ST_FUEL != ST_FUEL:
    raise ImportError("opcode table drift: ST_FUEL")
if _enc.ST_FAULT != ST_FAULT:
    raise ImportError("opcode table drift: ST_FAULT")
if _enc.F_OOB != F_OOB:
    raise ImportError("opcode table drift: F_OOB")
if _enc.F_DIV0 != F_DIV0:
    raise ImportError("opcode table drift: F_DIV0")
if _enc.F_MOD0 != F_MOD0:
    raise ImportError("opcode table drift: F_MOD0")
if _enc.F_UNDEF != F_UNDEF:
    raise ImportError("opcode table drift: F_UNDEF")
if _enc.F_NEGSIZE != F_NEGSIZE:
    raise ImportError("opcode table drift: F_NEGSIZE")
if _enc.F_ARENA != F_ARENA:
    raise ImportError("opcode table drift: F_ARENA")
if _enc.F_MISSING_RETURN != F_MISSING_RETURN:
    raise ImportError("opcode table drift: F_MISSING_RETURN")
if _enc.F_STACK != F_STACK:
    raise ImportError("opcode table drift: F_STACK")

# typed memoryviews reject zero-length buffers; swap in a dummy that is
# never dereferenced
_EMPTY1 = _array("q", [0])


def _nz(a):
    return a if len(a) else _EMPTY1

ctypedef long long i64
ctypedef unsigned long long u64

cdef i64 I64_MIN = <i64>(<u64>1 << 63)

DEF STACK_CAP = 1024
DEF MAX_ARR = 16

cdef inline i64 _wrap_add(i64 a, i64 b) noexcept:
    return <i64>(<u64>a + <u64>b)

cdef inline i64 _wrap_sub(i64 a, i64 b) noexcept:
    return <i64>(<u64>a - <u64>b)

cdef inline i64 _wrap_mul(i64 a, i64 b) noexcept:
    return <i64>(<u64>a * <u64>b)

cdef inline int _lowbit(u64 m) noexcept:
    cdef int i = 0
    while not (m & 1):
        m >>= 1
        i += 1
    return i


cdef class Runner:
    cdef const i64[:] code, consts, init_scalars
    cdef const i64[:] init_arr_meta, init_arr_data
    cdef const i64[:] orig_loc, orig_scal, orig_sdef, orig_ameta, orig_adata
    cdef const i64[:] mscal_slots, mscal_vals, mscal_undef
    cdef const i64[:] marr_slots, marr_off, marr_len, marr_undef, marr_data
    cdef const i64[:] exp_arr
    cdef int S, A, out_sslot, out_aslot, n_mscal, n_marr
    cdef int exp_mode, n_exp_arr
    cdef Py_ssize_t n_init_data, arena_cap
    cdef i64 k, manip_loc, fuel, exp_scalar
    cdef u64 init_sdef, tsmask, tamask
    cdef i64* arena_buf
    cdef list callbacks

    def __cinit__(self, prog, spec, callbacks):
        self.code = prog.code
        self.consts = _nz(prog.consts)
        self.S = prog.n_scalars
        self.A = prog.n_arrays
        self.out_sslot = prog.out_sslot
        self.out_aslot = prog.out_aslot
        self.callbacks = list(callbacks)
        self.init_scalars = _nz(spec.init_scalars)
        self.init_sdef = <u64>spec.init_sdef
        self.init_arr_meta = _nz(spec.init_arr_meta)
        self.init_arr_data = _nz(spec.init_arr_data)
        self.n_init_data = len(spec.init_arr_data)
        self.k = spec.k
        self.orig_loc = _nz(spec.orig_loc)
        self.orig_scal = _nz(spec.orig_scal)
        self.orig_sdef = _nz(spec.orig_sdef)
        self.orig_ameta = _nz(spec.orig_ameta)
        self.orig_adata = _nz(spec.orig_adata)
        self.tsmask = <u64>spec.tracked_smask
        self.tamask = <u64>spec.tracked_amask
        self.manip_loc = spec.manip_loc
        self.n_mscal = len(spec.mscal_slots)
        self.n_marr = len(spec.marr_slots)
        self.mscal_slots = _nz(spec.mscal_slots)
        self.mscal_vals = _nz(spec.mscal_vals)
        self.mscal_undef = _nz(spec.mscal_undef)
        self.marr_slots = _nz(spec.marr_slots)
        self.marr_off = _nz(spec.marr_off)
        self.marr_len = _nz(spec.marr_len)
        self.marr_undef = _nz(spec.marr_undef)
        self.marr_data = _nz(spec.marr_data)
        self.exp_mode = spec.exp_mode
        self.exp_scalar = spec.exp_scalar
        self.n_exp_arr = len(spec.exp_arr)
        self.exp_arr = _nz(spec.exp_arr)
        self.fuel = spec.fuel
        self.arena_cap = spec.arena_cap
        self.arena_buf = <i64*>PyMem_Malloc(self.arena_cap * sizeof(i64))
        if self.arena_buf == NULL:
            raise MemoryError()

    def __dealloc__(self):
        if self.arena_buf != NULL:
            PyMem_Free(self.arena_buf)

    def __call__(self, hole_values, capture=False):
        cdef const i64[:] code = self.code
        cdef const i64[:] consts = self.consts
        cdef int S = self.S
        cdef int A = self.A
        cdef int out_sslot = self.out_sslot
        cdef int out_aslot = self.out_aslot
        callbacks = self.callbacks

        cdef const i64[:] hv_mv = _nz(hole_values)

        cdef i64 scal[64]
        cdef u64 sdef = self.init_sdef
        cdef const i64[:] init_scalars = self.init_scalars
        cdef int i
        for i in range(S):
            scal[i] = init_scalars[i]

        cdef i64 ameta[2 * MAX_ARR]
        cdef const i64[:] init_meta
        cdef const i64[:] init_data
        cdef Py_ssize_t arena_cap = self.arena_cap
        cdef i64* arena = self.arena_buf
        cdef Py_ssize_t arena_len = 0
        cdef Py_ssize_t n_init_data = self.n_init_data
        if A:
            init_meta = self.init_arr_meta
            for i in range(2 * A):
                ameta[i] = init_meta[i]
            if n_init_data:
                init_data = self.init_arr_data
                for i in range(n_init_data):
                    arena[i] = init_data[i]
                arena_len = n_init_data

        cdef i64 k = self.k
        cdef const i64[:] orig_loc = self.orig_loc
        cdef const i64[:] orig_scal = self.orig_scal
        cdef const i64[:] orig_sdef = self.orig_sdef
        cdef const i64[:] orig_ameta = self.orig_ameta
        cdef const i64[:] orig_adata = self.orig_adata
        cdef u64 tsmask = self.tsmask
        cdef u64 tamask = self.tamask

        cdef i64 manip_loc = self.manip_loc
        cdef int n_mscal = self.n_mscal
        cdef int n_marr = self.n_marr
        cdef const i64[:] mscal_slots = self.mscal_slots
        cdef const i64[:] mscal_vals = self.mscal_vals
        cdef const i64[:] mscal_undef = self.mscal_undef
        cdef const i64[:] marr_slots = self.marr_slots
        cdef const i64[:] marr_off = self.marr_off
        cdef const i64[:] marr_len = self.marr_len
        cdef const i64[:] marr_undef = self.marr_undef
        cdef const i64[:] marr_data = self.marr_data

        cdef int exp_mode = self.exp_mode
        cdef i64 exp_scalar = self.exp_scalar
        cdef int n_exp_arr = self.n_exp_arr
        cdef const i64[:] exp_arr = self.exp_arr

        cdef i64 fuel = self.fuel
        cdef i64 stack[STACK_CAP]
        cdef int sp = 0
        cdef Py_ssize_t pc = 0
        cdef i64 emitted = 0
        cdef i64 pair_sum = 0
        cdef bint satisfied = 0
        cdef i64 best_sem = -1
        cdef i64 best_j = -1
        cdef bint out_ok = 1
        cdef i64 cur_loc = 0
        cdef int status = ST_TERMINATED
        cdef int fault_code = 0
        captured = [] if capture else None

        cdef i64 op, a, b, q, loc_code, h, d, cost, v, idx, n
        cdef int slot, aslot, off, ln, ooff, oln, x, base
        cdef u64 m
        cdef bint cd, od, match
        cdef i64 target

        while True:
            op = code[pc]
            pc += 1
            if op == OP_EMIT:
                loc_code = code[pc]
                pc += 1
                # ---- emit a configuration -------------------------------
                if emitted >= fuel:
                    status = ST_FUEL
                    break
                h = emitted
                emitted += 1
                cur_loc = loc_code
                if h <= k:
                    d = 1 if loc_code != orig_loc[h] else 0
                    m = tsmask
                    while m:
                        slot = _lowbit(m)
                        m &= m - 1
                        cd = (sdef >> slot) & 1
                        od = (<u64>orig_sdef[h] >> slot) & 1
                        if cd != od or (cd and scal[slot] != orig_scal[h * S + slot]):
                            d += 1
                    m = tamask
                    while m:
                        aslot = _lowbit(m)
                        m &= m - 1
                        off = <int>ameta[aslot * 2]
                        ln = <int>ameta[aslot * 2 + 1]
                        base = <int>((h * A + aslot) * 2)
                        ooff = <int>orig_ameta[base]
                        oln = <int>orig_ameta[base + 1]
                        if (off < 0) != (ooff < 0):
                            d += 1
                        elif off >= 0:
                            if ln != oln:
                                d += 1
                            else:
                                for x in range(ln):
                                    if arena[off + x] != orig_adata[ooff + x]:
                                        d += 1
                                        break
                    pair_sum += d
                if manip_loc != NO_MANIP and loc_code == manip_loc:
                    match = 1
                    for i in range(n_mscal):
                        slot = <int>mscal_slots[i]
                        if mscal_undef[i]:
                            if (sdef >> slot) & 1:
                                match = 0
                                break
                        else:
                            if not ((sdef >> slot) & 1) or scal[slot] != mscal_vals[i]:
                                match = 0
                                break
                    if match:
                        for i in range(n_marr):
                            aslot = <int>marr_slots[i]
                            off = <int>ameta[aslot * 2]
                            ln = <int>ameta[aslot * 2 + 1]
                            if marr_undef[i]:
                                if off >= 0:
                                    match = 0
                                    break
                                continue
                            if off < 0 or ln != marr_len[i]:
                                match = 0
                                break
                            base = <int>marr_off[i]
                            for x in range(ln):
                                if arena[off + x] != marr_data[base + x]:
                                    match = 0
                                    break
                            if not match:
                                break
                    if match:
                        satisfied = 1
                        if k >= 0:
                            cost = pair_sum + (k - h if h <= k else h - k)
                        else:
                            cost = 0
                        if best_sem < 0 or cost < best_sem:
                            best_sem = cost
                            best_j = h
                if captured is not None:
                    arrs = []
                    for aslot in range(A):
                        off = <int>ameta[aslot * 2]
                        ln = <int>ameta[aslot * 2 + 1]
                        if off < 0:
                            arrs.append(None)
                        else:
                            arrs.append(tuple([arena[off + x] for x in range(ln)]))
                    captured.append((loc_code,
                                     tuple([scal[i] for i in range(S)]),
                                     sdef, tuple(arrs)))
            elif op == OP_PUSHC:
                if sp >= STACK_CAP:
                    status = ST_FAULT
                    fault_code = F_STACK
                    break
                stack[sp] = consts[code[pc]]
                sp += 1
                pc += 1
            elif op == OP_PUSHH:
                if sp >= STACK_CAP:
                    status = ST_FAULT
                    fault_code = F_STACK
                    break
                stack[sp] = hv_mv[code[pc]]
                sp += 1
                pc += 1
            elif op == OP_LOAD:
                slot = <int>code[pc]
                pc += 1
                if not ((sdef >> slot) & 1):
                    status = ST_FAULT
                    fault_code = F_UNDEF
                    break
                if sp >= STACK_CAP:
                    status = ST_FAULT
                    fault_code = F_STACK
                    break
                stack[sp] = scal[slot]
                sp += 1
            elif op == OP_STORE:
                slot = <int>code[pc]
                pc += 1
                sp -= 1
                scal[slot] = stack[sp]
                sdef |= <u64>1 << slot
            elif op == OP_KILL:
                slot = <int>code[pc]
                pc += 1
                if slot > MAX_SCALARS:
                    aslot = slot - MAX_SCALARS - 1
                    ameta[aslot * 2] = -1
                    ameta[aslot * 2 + 1] = -1
                else:
                    sdef &= ~(<u64>1 << slot)
            elif op == OP_LOADELEM:
                aslot = <int>code[pc]
                pc += 1
                sp -= 1
                idx = stack[sp]
                off = <int>ameta[aslot * 2]
                ln = <int>ameta[aslot * 2 + 1]
                if off < 0:
                    status = ST_FAULT
                    fault_code = F_UNDEF
                    break
                if idx < 0 or idx >= ln:
                    status = ST_FAULT
                    fault_code = F_OOB
                    break
                stack[sp] = arena[off + idx]
                sp += 1
            elif op == OP_STOREELEM:
                aslot = <int>code[pc]
                pc += 1
                sp -= 1
                idx = stack[sp]
                sp -= 1
                v = stack[sp]
                off = <int>ameta[aslot * 2]
                ln = <int>ameta[aslot * 2 + 1]
                if off < 0:
                    status = ST_FAULT
                    fault_code = F_UNDEF
                    break
                if idx < 0 or idx >= ln:
                    status = ST_FAULT
                    fault_code = F_OOB
                    break
                arena[off + idx] = v
            elif op == OP_LEN:
                aslot = <int>code[pc]
                pc += 1
                off = <int>ameta[aslot * 2]
                ln = <int>ameta[aslot * 2 + 1]
                if off < 0:
                    status = ST_FAULT
                    fault_code = F_UNDEF
                    break
                if sp >= STACK_CAP:
                    status = ST_FAULT
                    fault_code = F_STACK
                    break
                stack[sp] = ln
                sp += 1
            elif op == OP_NEWARR:
                aslot = <int>code[pc]
                pc += 1
                sp -= 1
                n = stack[sp]
                if n < 0:
                    status = ST_FAULT
                    fault_code = F_NEGSIZE
                    break
                if arena_len + n > arena_cap:
                    status = ST_FAULT
                    fault_code = F_ARENA
                    break
                ameta[aslot * 2] = arena_len
                ameta[aslot * 2 + 1] = n
                for x in range(<int>n):
                    arena[arena_len + x] = 0
                arena_len += n
            elif op == OP_ARRLIT:
                aslot = <int>code[pc]
                n = code[pc + 1]
                pc += 2
                if arena_len + n > arena_cap:
                    status = ST_FAULT
                    fault_code = F_ARENA
                    break
                sp -= <int>n
                for x in range(<int>n):
                    arena[arena_len + x] = stack[sp + x]
                ameta[aslot * 2] = arena_len
                ameta[aslot * 2 + 1] = n
                arena_len += n
            elif op == OP_ADD:
                sp -= 1
                stack[sp - 1] = _wrap_add(stack[sp - 1], stack[sp])
            elif op == OP_SUB:
                sp -= 1
                stack[sp - 1] = _wrap_sub(stack[sp - 1], stack[sp])
            elif op == OP_MUL:
                sp -= 1
                stack[sp - 1] = _wrap_mul(stack[sp - 1], stack[sp])
            elif op == OP_DIV:
                sp -= 1
                b = stack[sp]
                a = stack[sp - 1]
                if b == 0:
                    status = ST_FAULT
                    fault_code = F_DIV0
                    break
                if a == I64_MIN and b == -1:
                    stack[sp - 1] = I64_MIN
                else:
                    stack[sp - 1] = a / b
            elif op == OP_MOD:
                sp -= 1
                b = stack[sp]
                a = stack[sp - 1]
                if b == 0:
                    status = ST_FAULT
                    fault_code = F_MOD0
                    break
                if a == I64_MIN and b == -1:
                    stack[sp - 1] = 0
                else:
                    stack[sp - 1] = a % b
            elif op == OP_NEG:
                stack[sp - 1] = _wrap_sub(0, stack[sp - 1])
            elif op == OP_LT:
                sp -= 1
                stack[sp - 1] = 1 if stack[sp - 1] < stack[sp] else 0
            elif op == OP_LE:
                sp -= 1
                stack[sp - 1] = 1 if stack[sp - 1] <= stack[sp] else 0
            elif op == OP_GT:
                sp -= 1
                stack[sp - 1] = 1 if stack[sp - 1] > stack[sp] else 0
            elif op == OP_GE:
                sp -= 1
                stack[sp - 1] = 1 if stack[sp - 1] >= stack[sp] else 0
            elif op == OP_EQ:
                sp -= 1
                stack[sp - 1] = 1 if stack[sp - 1] == stack[sp] else 0
            elif op == OP_NE:
                sp -= 1
                stack[sp - 1] = 1 if stack[sp - 1] != stack[sp] else 0
            elif op == OP_NOT:
                stack[sp - 1] = 0 if stack[sp - 1] else 1
            elif op == OP_JMP:
                pc = <Py_ssize_t>code[pc]
            elif op == OP_JZ:
                target = code[pc]
                pc += 1
                sp -= 1
                if stack[sp] == 0:
                    pc = <Py_ssize_t>target
            elif op == OP_JNZ:
                target = code[pc]
                pc += 1
                sp -= 1
                if stack[sp] != 0:
                    pc = <Py_ssize_t>target
            elif op == OP_JZK:
                target = code[pc]
                pc += 1
                if stack[sp - 1] == 0:
                    pc = <Py_ssize_t>target
                else:
                    sp -= 1
            elif op == OP_JNZK:
                target = code[pc]
                pc += 1
                if stack[sp - 1] != 0:
                    pc = <Py_ssize_t>target
                else:
                    sp -= 1
            elif op == OP_JZNP:
                target = code[pc]
                pc += 1
                if stack[sp - 1] == 0:
                    pc = <Py_ssize_t>target
            elif op == OP_CALL:
                idx = code[pc]
                n = code[pc + 1]
                pc += 2
                sp -= <int>n
                args = tuple([stack[sp + x] for x in range(<int>n)])
                res = int(callbacks[idx](*args)) & 0xFFFFFFFFFFFFFFFF
                if res >= (1 << 63):
                    res -= 1 << 64
                if sp >= STACK_CAP:
                    status = ST_FAULT
                    fault_code = F_STACK
                    break
                stack[sp] = res
                sp += 1
            elif op == OP_POP:
                sp -= 1
            elif op == OP_RET:
                sp -= 1
                scal[out_sslot] = stack[sp]
                sdef |= <u64>1 << out_sslot
                op = -100
            elif op == OP_RETA:
                aslot = <int>code[pc]
                pc += 1
                ameta[out_aslot * 2] = ameta[aslot * 2]
                ameta[out_aslot * 2 + 1] = ameta[aslot * 2 + 1]
                op = -100
            elif op == OP_RETV:
                op = -100
            elif op == OP_END:
                if out_sslot >= 0 or out_aslot >= 0:
                    status = ST_FAULT
                    fault_code = F_MISSING_RETURN
                    break
                op = -100
            else:
                raise RuntimeError(f"bad opcode {op} at {pc - 1}")

            if op == -100:
                # ---- exit configuration and expected-output check -------
                if emitted >= fuel:
                    status = ST_FUEL
                    break
                h = emitted
                emitted += 1
                cur_loc = EXIT_CODE
                if h <= k:
                    d = 1 if EXIT_CODE != orig_loc[h] else 0
                    m = tsmask
                    while m:
                        slot = _lowbit(m)
                        m &= m - 1
                        cd = (sdef >> slot) & 1
                        od = (<u64>orig_sdef[h] >> slot) & 1
                        if cd != od or (cd and scal[slot] != orig_scal[h * S + slot]):
                            d += 1
                    m = tamask
                    while m:
                        aslot = _lowbit(m)
                        m &= m - 1
                        off = <int>ameta[aslot * 2]
                        ln = <int>ameta[aslot * 2 + 1]
                        base = <int>((h * A + aslot) * 2)
                        ooff = <int>orig_ameta[base]
                        oln = <int>orig_ameta[base + 1]
                        if (off < 0) != (ooff < 0):
                            d += 1
                        elif off >= 0:
                            if ln != oln:
                                d += 1
                            else:
                                for x in range(ln):
                                    if arena[off + x] != orig_adata[ooff + x]:
                                        d += 1
                                        break
                    pair_sum += d
                if manip_loc == EXIT_CODE:
                    match = 1
                    for i in range(n_mscal):
                        slot = <int>mscal_slots[i]
                        if mscal_undef[i]:
                            if (sdef >> slot) & 1:
                                match = 0
                                break
                        else:
                            if not ((sdef >> slot) & 1) or scal[slot] != mscal_vals[i]:
                                match = 0
                                break
                    if match:
                        for i in range(n_marr):
                            aslot = <int>marr_slots[i]
                            off = <int>ameta[aslot * 2]
                            ln = <int>ameta[aslot * 2 + 1]
                            if marr_undef[i]:
                                if off >= 0:
                                    match = 0
                                    break
                                continue
                            if off < 0 or ln != marr_len[i]:
                                match = 0
                                break
                            base = <int>marr_off[i]
                            for x in range(ln):
                                if arena[off + x] != marr_data[base + x]:
                                    match = 0
                                    break
                            if not match:
                                break
                    if match:
                        satisfied = 1
                        if k >= 0:
                            cost = pair_sum + (k - h if h <= k else h - k)
                        else:
                            cost = 0
                        if best_sem < 0 or cost < best_sem:
                            best_sem = cost
                            best_j = h
                if captured is not None:
                    arrs = []
                    for aslot in range(A):
                        off = <int>ameta[aslot * 2]
                        ln = <int>ameta[aslot * 2 + 1]
                        if off < 0:
                            arrs.append(None)
                        else:
                            arrs.append(tuple([arena[off + x] for x in range(ln)]))
                    captured.append((EXIT_CODE,
                                     tuple([scal[i] for i in range(S)]),
                                     sdef, tuple(arrs)))
                # expected output
                if exp_mode == 1:
                    out_ok = bool((sdef >> out_sslot) & 1) and \
                        scal[out_sslot] == exp_scalar
                elif exp_mode == 2:
                    off = <int>ameta[out_aslot * 2]
                    ln = <int>ameta[out_aslot * 2 + 1]
                    if off < 0 or ln != n_exp_arr:
                        out_ok = 0
                    else:
                        out_ok = 1
                        for x in range(ln):
                            if arena[off + x] != exp_arr[x]:
                                out_ok = 0
                                break
                else:
                    out_ok = 1
                break
        return (status, emitted, bool(satisfied), best_sem, best_j, pair_sum,
                bool(out_ok), cur_loc, fault_code, captured)


def prepare(prog, spec, callbacks):
    return Runner(prog, spec, callbacks)


def run(prog, spec, callbacks, hole_values, capture=False):
    return Runner(prog, spec, callbacks)(hole_values, capture)
