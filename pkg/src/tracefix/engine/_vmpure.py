"""Pure-Python interpreter for the flat program encoding.

Semantics-identical twin of the compiled core in ``_vmcore.pyx``; keep the
two in lockstep.  Selected at import time by ``tracefix.engine`` when the
compiled core is unavailable or disabled.
"""

from __future__ import annotations

from .encode import (CompiledProgram, RunSpec, EXIT_CODE, NO_MANIP,
                     MAX_SCALARS,
                     OP_EMIT, OP_PUSHC, OP_PUSHH, OP_LOAD, OP_STORE, OP_KILL,
                     OP_LOADELEM, OP_STOREELEM, OP_LEN, OP_NEWARR, OP_ARRLIT,
                     OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_MOD, OP_NEG, OP_LT,
                     OP_LE, OP_GT, OP_GE, OP_EQ, OP_NE, OP_NOT, OP_JMP,
                     OP_JZ, OP_JNZ, OP_JZK, OP_JNZK, OP_JZNP, OP_CALL, OP_POP, OP_RET,
                     OP_RETA, OP_RETV, OP_END,
                     ST_TERMINATED, ST_FUEL, ST_FAULT,
                     F_OOB, F_DIV0, F_MOD0, F_UNDEF, F_NEGSIZE, F_ARENA,
                     F_MISSING_RETURN)

BACKEND = "pure"

_I64_MASK = (1 << 64) - 1
_I64_SIGN = 1 << 63
_I64_MIN = -(1 << 63)


def _wrap(v: int) -> int:
    v &= _I64_MASK
    return v - (1 << 64) if v & _I64_SIGN else v


def prepare(prog: CompiledProgram, spec: RunSpec, callbacks):
    """Bind the program and run specification once; the returned callable
    evaluates one hole assignment."""
    def runner(hole_values, capture: bool = False):
        return run(prog, spec, callbacks, hole_values, capture)
    return runner


def run(prog: CompiledProgram, spec: RunSpec, callbacks, hole_values,
        capture: bool = False):
    code = prog.code
    consts = prog.consts
    S = prog.n_scalars
    A = prog.n_arrays

    scal = list(spec.init_scalars)
    sdef = spec.init_sdef
    arena = list(spec.init_arr_data)
    arena_cap = spec.arena_cap
    ameta = list(spec.init_arr_meta)

    orig_loc = spec.orig_loc
    orig_scal = spec.orig_scal
    orig_sdef = spec.orig_sdef
    orig_ameta = spec.orig_ameta
    orig_adata = spec.orig_adata
    k = spec.k
    tsmask = spec.tracked_smask
    tamask = spec.tracked_amask

    manip_loc = spec.manip_loc
    n_mscal = len(spec.mscal_slots)
    n_marr = len(spec.marr_slots)

    fuel = spec.fuel
    stack: list[int] = []
    pc = 0
    emitted = 0
    pair_sum = 0
    satisfied = False
    best_sem = -1
    best_j = -1
    out_ok = True
    cur_loc = 0
    status = ST_TERMINATED
    fault_code = 0
    captured = [] if capture else None

    def config_matches(loc_code: int) -> bool:
        for i in range(n_mscal):
            slot = spec.mscal_slots[i]
            if spec.mscal_undef[i]:
                if sdef >> slot & 1:
                    return False
            else:
                if not (sdef >> slot & 1) or scal[slot] != spec.mscal_vals[i]:
                    return False
        for i in range(n_marr):
            slot = spec.marr_slots[i]
            off, ln = ameta[slot * 2], ameta[slot * 2 + 1]
            if spec.marr_undef[i]:
                if off >= 0:
                    return False
                continue
            if off < 0 or ln != spec.marr_len[i]:
                return False
            coff = spec.marr_off[i]
            for x in range(ln):
                if arena[off + x] != spec.marr_data[coff + x]:
                    return False
        return True

    def do_emit(loc_code: int) -> bool:
        """Returns False when fuel is exhausted."""
        nonlocal emitted, pair_sum, satisfied, best_sem, best_j, cur_loc
        if emitted >= fuel:
            return False
        h = emitted
        emitted += 1
        cur_loc = loc_code
        if h <= k:
            d = 1 if loc_code != orig_loc[h] else 0
            m = tsmask
            while m:
                slot = (m & -m).bit_length() - 1
                m &= m - 1
                cd = sdef >> slot & 1
                od = orig_sdef[h] >> slot & 1
                if cd != od or (cd and scal[slot] != orig_scal[h * S + slot]):
                    d += 1
            m = tamask
            while m:
                slot = (m & -m).bit_length() - 1
                m &= m - 1
                off, ln = ameta[slot * 2], ameta[slot * 2 + 1]
                base = (h * A + slot) * 2
                ooff, oln = orig_ameta[base], orig_ameta[base + 1]
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
        if manip_loc != NO_MANIP and loc_code == manip_loc and config_matches(loc_code):
            satisfied = True
            if k >= 0:
                cost = pair_sum + (k - h if h <= k else h - k)
            else:
                cost = 0
            if best_sem < 0 or cost < best_sem:
                best_sem = cost
                best_j = h
        if captured is not None:
            arrs = []
            for slot in range(A):
                off, ln = ameta[slot * 2], ameta[slot * 2 + 1]
                arrs.append(None if off < 0 else tuple(arena[off:off + ln]))
            captured.append((loc_code, tuple(scal), sdef, tuple(arrs)))
        return True

    def check_expected() -> bool:
        if spec.exp_mode == 1:
            slot = prog.out_sslot
            return bool(sdef >> slot & 1) and scal[slot] == spec.exp_scalar
        if spec.exp_mode == 2:
            slot = prog.out_aslot
            off, ln = ameta[slot * 2], ameta[slot * 2 + 1]
            if off < 0 or ln != len(spec.exp_arr):
                return False
            return all(arena[off + x] == spec.exp_arr[x] for x in range(ln))
        return True

    while True:
        op = code[pc]
        pc += 1
        if op == OP_EMIT:
            loc = code[pc]
            pc += 1
            if not do_emit(loc):
                status = ST_FUEL
                break
        elif op == OP_PUSHC:
            stack.append(consts[code[pc]])
            pc += 1
        elif op == OP_PUSHH:
            stack.append(hole_values[code[pc]])
            pc += 1
        elif op == OP_LOAD:
            slot = code[pc]
            pc += 1
            if not (sdef >> slot & 1):
                status, fault_code = ST_FAULT, F_UNDEF
                break
            stack.append(scal[slot])
        elif op == OP_STORE:
            slot = code[pc]
            pc += 1
            scal[slot] = stack.pop()
            sdef |= 1 << slot
        elif op == OP_KILL:
            slot = code[pc]
            pc += 1
            if slot > MAX_SCALARS:
                aslot = slot - MAX_SCALARS - 1
                ameta[aslot * 2] = -1
                ameta[aslot * 2 + 1] = -1
            else:
                sdef &= ~(1 << slot)
        elif op == OP_LOADELEM:
            aslot = code[pc]
            pc += 1
            idx = stack.pop()
            off, ln = ameta[aslot * 2], ameta[aslot * 2 + 1]
            if off < 0:
                status, fault_code = ST_FAULT, F_UNDEF
                break
            if idx < 0 or idx >= ln:
                status, fault_code = ST_FAULT, F_OOB
                break
            stack.append(arena[off + idx])
        elif op == OP_STOREELEM:
            aslot = code[pc]
            pc += 1
            idx = stack.pop()
            val = stack.pop()
            off, ln = ameta[aslot * 2], ameta[aslot * 2 + 1]
            if off < 0:
                status, fault_code = ST_FAULT, F_UNDEF
                break
            if idx < 0 or idx >= ln:
                status, fault_code = ST_FAULT, F_OOB
                break
            arena[off + idx] = val
        elif op == OP_LEN:
            aslot = code[pc]
            pc += 1
            off, ln = ameta[aslot * 2], ameta[aslot * 2 + 1]
            if off < 0:
                status, fault_code = ST_FAULT, F_UNDEF
                break
            stack.append(ln)
        elif op == OP_NEWARR:
            aslot = code[pc]
            pc += 1
            n = stack.pop()
            if n < 0:
                status, fault_code = ST_FAULT, F_NEGSIZE
                break
            if len(arena) + n > arena_cap:
                status, fault_code = ST_FAULT, F_ARENA
                break
            ameta[aslot * 2] = len(arena)
            ameta[aslot * 2 + 1] = n
            arena.extend([0] * n)
        elif op == OP_ARRLIT:
            aslot = code[pc]
            n = code[pc + 1]
            pc += 2
            if len(arena) + n > arena_cap:
                status, fault_code = ST_FAULT, F_ARENA
                break
            vals = stack[-n:] if n else []
            del stack[len(stack) - n:]
            ameta[aslot * 2] = len(arena)
            ameta[aslot * 2 + 1] = n
            arena.extend(vals)
        elif op == OP_ADD:
            b = stack.pop()
            stack[-1] = _wrap(stack[-1] + b)
        elif op == OP_SUB:
            b = stack.pop()
            stack[-1] = _wrap(stack[-1] - b)
        elif op == OP_MUL:
            b = stack.pop()
            stack[-1] = _wrap(stack[-1] * b)
        elif op == OP_DIV:
            b = stack.pop()
            a = stack[-1]
            if b == 0:
                status, fault_code = ST_FAULT, F_DIV0
                break
            if a == _I64_MIN and b == -1:
                stack[-1] = _I64_MIN
            else:
                q = abs(a) // abs(b)
                stack[-1] = -q if (a < 0) != (b < 0) else q
        elif op == OP_MOD:
            b = stack.pop()
            a = stack[-1]
            if b == 0:
                status, fault_code = ST_FAULT, F_MOD0
                break
            if a == _I64_MIN and b == -1:
                stack[-1] = 0
            else:
                q = abs(a) // abs(b)
                q = -q if (a < 0) != (b < 0) else q
                stack[-1] = _wrap(a - q * b)
        elif op == OP_NEG:
            stack[-1] = _wrap(-stack[-1])
        elif op == OP_LT:
            b = stack.pop()
            stack[-1] = 1 if stack[-1] < b else 0
        elif op == OP_LE:
            b = stack.pop()
            stack[-1] = 1 if stack[-1] <= b else 0
        elif op == OP_GT:
            b = stack.pop()
            stack[-1] = 1 if stack[-1] > b else 0
        elif op == OP_GE:
            b = stack.pop()
            stack[-1] = 1 if stack[-1] >= b else 0
        elif op == OP_EQ:
            b = stack.pop()
            stack[-1] = 1 if stack[-1] == b else 0
        elif op == OP_NE:
            b = stack.pop()
            stack[-1] = 1 if stack[-1] != b else 0
        elif op == OP_NOT:
            stack[-1] = 0 if stack[-1] else 1
        elif op == OP_JMP:
            pc = code[pc]
        elif op == OP_JZ:
            target = code[pc]
            pc += 1
            if stack.pop() == 0:
                pc = target
        elif op == OP_JNZ:
            target = code[pc]
            pc += 1
            if stack.pop() != 0:
                pc = target
        elif op == OP_JZK:
            target = code[pc]
            pc += 1
            if stack[-1] == 0:
                pc = target
            else:
                stack.pop()
        elif op == OP_JNZK:
            target = code[pc]
            pc += 1
            if stack[-1] != 0:
                pc = target
            else:
                stack.pop()
        elif op == OP_JZNP:
            target = code[pc]
            pc += 1
            if stack[-1] == 0:
                pc = target
        elif op == OP_CALL:
            idx = code[pc]
            n = code[pc + 1]
            pc += 2
            args = tuple(stack[len(stack) - n:]) if n else ()
            del stack[len(stack) - n:]
            stack.append(_wrap(int(callbacks[idx](*args))))
        elif op == OP_POP:
            stack.pop()
        elif op == OP_RET:
            v = stack.pop()
            scal[prog.out_sslot] = v
            sdef |= 1 << prog.out_sslot
            if not do_emit(EXIT_CODE):
                status = ST_FUEL
                break
            out_ok = check_expected()
            break
        elif op == OP_RETA:
            aslot = code[pc]
            pc += 1
            ameta[prog.out_aslot * 2] = ameta[aslot * 2]
            ameta[prog.out_aslot * 2 + 1] = ameta[aslot * 2 + 1]
            if not do_emit(EXIT_CODE):
                status = ST_FUEL
                break
            out_ok = check_expected()
            break
        elif op == OP_RETV:
            if not do_emit(EXIT_CODE):
                status = ST_FUEL
                break
            out_ok = check_expected()
            break
        elif op == OP_END:
            if prog.out_sslot >= 0 or prog.out_aslot >= 0:
                status, fault_code = ST_FAULT, F_MISSING_RETURN
                break
            if not do_emit(EXIT_CODE):
                status = ST_FUEL
                break
            out_ok = check_expected()
            break
        else:  # pragma: no cover
            raise RuntimeError(f"bad opcode {op} at {pc - 1}")

    return (status, emitted, satisfied, best_sem, best_j, pair_sum,
            out_ok, cur_loc, fault_code, captured)
