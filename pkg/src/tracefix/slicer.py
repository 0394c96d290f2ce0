"""Program slicing support for single-line repairs.

For a repair confined to one statement, only the statements that are both
(a) able to affect the edited variables at the edited location (backward
slice) and (b) reachable from the repaired statement (forward
reachability) can behave differently.  Everything else is removed, and
variables flowing into the kept region are frozen to the constant values
they had in the original trace when control first entered the region.
When any such value is not constant across region entries, the slice is
reported inapplicable and the caller falls back to the unsliced solve.
"""

from __future__ import annotations

from dataclasses import dataclass
from collections import deque

from .lang import ast
from .lang.ast import (Assign, ArrayIndex, ArrayLen, ArrayLit,
                       BoolLit, CharLit, Expr, ExprStmt, For, FunctionDef,
                       If, IntLit, Program, Return, Stmt, Var, VarDecl,
                       While, EXIT_LOC, RESULT_VAR, VOID, BOOL, CHAR)
from .lang.typecheck import fn_info
from .sketcher import copy_stmt
from .tracer import Trace, UNDEF, WILDCARD, execute, RuntimeFault


# ---------------------------------------------------------------------------
# Control-flow graph and dependence facts


def _expr_vars(e: Expr | None, out: set[str]) -> None:
    if e is None:
        return
    for node in ast.walk_expr(e):
        if isinstance(node, Var):
            out.add(node.name)
        elif isinstance(node, (ArrayIndex, ArrayLen)):
            out.add(node.name)


@dataclass
class _Facts:
    succ: dict  # loc -> set of locs (EXIT_LOC for function exit)
    uses: dict  # loc -> set of var names read by the statement head
    defs: dict  # loc -> set of var names written (weak for arrays)
    strong: dict  # loc -> set of var names whose previous defs are killed
    parents: dict  # loc -> list of enclosing guard locations
    stmts: dict  # loc -> Stmt
    order: list


def _stmt_facts(s: Stmt) -> tuple[set[str], set[str], set[str]]:
    uses: set[str] = set()
    defs: set[str] = set()
    strong: set[str] = set()
    if isinstance(s, VarDecl):
        _expr_vars(s.init, uses)
        defs.add(s.name)
        strong.add(s.name)
    elif isinstance(s, Assign):
        _expr_vars(s.value, uses)
        if s.index is not None:
            _expr_vars(s.index, uses)
            uses.add(s.name)  # other elements persist
            defs.add(s.name)
        else:
            defs.add(s.name)
            strong.add(s.name)
    elif isinstance(s, If):
        _expr_vars(s.cond, uses)
    elif isinstance(s, For):
        if s.init is not None:
            u, d, k = _stmt_facts(s.init)
            uses |= u
            defs |= d
        _expr_vars(s.cond, uses)
        if s.update is not None:
            u, d, k = _stmt_facts(s.update)
            uses |= u
            defs |= d
    elif isinstance(s, While):
        _expr_vars(s.cond, uses)
    elif isinstance(s, Return):
        _expr_vars(s.value, uses)
    elif isinstance(s, ExprStmt):
        _expr_vars(s.call, uses)
    return uses, defs, strong


def build_facts(fn: FunctionDef) -> _Facts:
    succ: dict = {}
    uses: dict = {}
    defs: dict = {}
    strong: dict = {}
    parents: dict = {}
    stmts: dict = {}
    order: list = []

    def visit(body: list[Stmt], parent_chain: list[int], follow) -> object:
        """Wire a body given the location that follows it; returns the
        body's entry (a loc or ``follow`` when empty)."""
        entry = follow
        for s in reversed(body):
            entry = wire(s, parent_chain, entry)
        return entry

    def wire(s: Stmt, parent_chain: list[int], follow) -> int:
        loc = s.loc
        stmts[loc] = s
        order.append(loc)
        parents[loc] = list(parent_chain)
        u, d, k = _stmt_facts(s)
        uses[loc], defs[loc], strong[loc] = u, d, k
        if isinstance(s, If):
            then_entry = visit(s.then_body, parent_chain + [loc], follow)
            else_entry = visit(s.else_body, parent_chain + [loc], follow)
            succ[loc] = {then_entry, else_entry}
        elif isinstance(s, (For, While)):
            body_entry = visit(s.body, parent_chain + [loc], loc)
            succ[loc] = {body_entry, follow}
        elif isinstance(s, Return):
            succ[loc] = {EXIT_LOC}
        else:
            succ[loc] = {follow}
        return loc

    visit(fn.body, [], EXIT_LOC)
    order.reverse()  # source order
    return _Facts(succ=succ, uses=uses, defs=defs, strong=strong,
                  parents=parents, stmts=stmts, order=order)


def forward_reachable(program: Program, location: int) -> set[int]:
    """Statement locations reachable from ``location`` in the CFG,
    including the statement itself."""
    facts = build_facts(program.entry_fn())
    if location not in facts.succ:
        raise ValueError(f"no statement at location {location}")
    seen = {location}
    frontier = deque([location])
    while frontier:
        loc = frontier.popleft()
        for nxt in facts.succ.get(loc, ()):
            if nxt != EXIT_LOC and nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def _reaching_definitions(facts: _Facts) -> dict:
    """For each location, the set of (def_loc, var) pairs reaching its
    entry; parameters reach as (None, var)."""
    preds: dict = {loc: set() for loc in facts.order}
    entry_loc = facts.order[0] if facts.order else None
    for loc, nexts in facts.succ.items():
        for nxt in nexts:
            if nxt != EXIT_LOC:
                preds[nxt].add(loc)
    IN = {loc: set() for loc in facts.order}
    changed = True
    while changed:
        changed = False
        for loc in facts.order:
            new_in = set()
            for p in preds[loc]:
                out = {pair for pair in IN[p]
                       if pair[1] not in facts.strong[p]}
                out |= {(p, v) for v in facts.defs[p]}
                new_in |= out
            if loc == entry_loc:
                pass  # parameters reach implicitly; no def site
            if new_in != IN[loc]:
                IN[loc] = new_in
                changed = True
    return IN


def backward_slice(program: Program, location: int, vars) -> set[int]:
    """Locations of statements that can affect the given variables at the
    given location, via data and control dependences.  The statement at the
    location itself is always included."""
    facts = build_facts(program.entry_fn())
    if location not in facts.stmts:
        raise ValueError(f"no statement at location {location}")
    reaching = _reaching_definitions(facts)
    result: set[int] = {location}
    traced: set[int] = set()  # statements whose own uses were followed
    worklist: deque = deque()
    seen_pairs: set = set()

    def want(loc: int, var: str) -> None:
        if (loc, var) not in seen_pairs:
            seen_pairs.add((loc, var))
            worklist.append((loc, var))

    def add_stmt(loc: int) -> None:
        result.add(loc)
        if loc in traced:
            return
        traced.add(loc)
        for u in facts.uses[loc]:
            want(loc, u)
        add_controls(loc)

    def add_controls(loc: int) -> None:
        for h in facts.parents[loc]:
            result.add(h)
            if h in traced:
                continue
            traced.add(h)
            for u in facts.uses[h]:
                want(h, u)
            add_controls(h)

    for v in vars:
        want(location, v)
    add_controls(location)
    while worklist:
        loc, var = worklist.popleft()
        for def_loc, def_var in reaching.get(loc, ()):
            if def_var == var:
                add_stmt(def_loc)
    return result


# ---------------------------------------------------------------------------
# Summarization


@dataclass
class SliceResult:
    relevant: set[int]
    summarized: Program
    substitutions: dict[str, tuple[int, object]]
    applicable: bool
    reason: str = ""


def _structural_closure(fn: FunctionDef, relevant: set[int],
                        facts: _Facts) -> set[int]:
    closed = set(relevant)
    for loc in relevant:
        closed.update(facts.parents.get(loc, ()))
    return closed


def _rebuild(body: list[Stmt], keep: set[int]) -> list[Stmt]:
    out = []
    for s in body:
        if s.loc not in keep:
            continue
        s = copy_stmt(s)
        if isinstance(s, If):
            s.then_body = _rebuild(s.then_body, keep)
            s.else_body = _rebuild(s.else_body, keep)
        elif isinstance(s, (For, While)):
            s.body = _rebuild(s.body, keep)
        out.append(s)
    return out


def _const_expr(value, ty) -> Expr:
    if ty == BOOL:
        return BoolLit(bool(value))
    if ty == CHAR:
        return CharLit(value if isinstance(value, str) else chr(value))
    if ty.is_array:
        elem = ast.elem_of(ty)
        return ArrayLit([_const_expr(v, elem) for v in value])
    return IntLit(int(value)) if not isinstance(value, str) else IntLit(ord(value))


def _region_entries(trace: Trace, region: set[int]) -> list[int]:
    """Indices of configurations where control enters the region from
    outside (or from the start of the trace)."""
    entries = []
    prev_in = False
    for h, c in enumerate(trace.configs):
        now_in = c.loc in region
        if now_in and not prev_in:
            entries.append(h)
        prev_in = now_in
    return entries


def summarize(program: Program, relevant: set[int],
              original_trace: Trace) -> SliceResult:
    """Drop statements outside the relevant set and freeze the variables
    flowing into it to their original-trace values at region entry."""
    fn = program.entry_fn()
    info = fn_info(program)
    facts = build_facts(fn)
    keep = _structural_closure(fn, set(relevant), facts)
    entries = _region_entries(original_trace, keep)
    if not entries:
        return SliceResult(set(relevant), program, {}, False,
                           "region never executes on this input")

    reads: set[str] = set()
    declared_inside: set[str] = set()
    returns_kept = False
    for loc in keep:
        reads |= facts.uses[loc]
        s = facts.stmts[loc]
        if isinstance(s, VarDecl):
            declared_inside.add(s.name)
        if isinstance(s, For) and isinstance(s.init, VarDecl):
            declared_inside.add(s.init.name)
        if isinstance(s, Return):
            returns_kept = True

    first_entry = original_trace.configs[entries[0]]
    params = set(info.input_vars)
    substitutions: dict[str, tuple[int, object]] = {}
    for var in sorted(reads):
        if var in declared_inside:
            # the region has its own declaration; same-named variables
            # outside are dead sibling-scope locals (shadowing is banned)
            continue
        outside_defs = [loc for loc in facts.defs
                        if var in facts.defs[loc] and loc not in keep]
        if var in params:
            # parameters stay parameters, provided nothing outside the
            # region has modified them before entry
            if outside_defs and not _entry_equals_initial(original_trace,
                                                          entries, var):
                return SliceResult(set(relevant), program, {}, False,
                                   f"parameter {var!r} modified before the region")
            continue
        if not outside_defs:
            continue  # defined only inside the region (or never)
        if not _values_const(original_trace, entries, var):
            return SliceResult(set(relevant), program, {}, False,
                               f"{var!r} varies across region entries")
        value = first_entry.valuation.get(var, UNDEF)
        if value is UNDEF:
            return SliceResult(set(relevant), program, {}, False,
                               f"{var!r} undefined at region entry")
        def_loc = min(loc for loc in outside_defs)
        substitutions[var] = (def_loc, value)

    decls = []
    for var, (loc, value) in sorted(substitutions.items(),
                                    key=lambda kv: kv[1][0]):
        ty = info.var_types[var]
        decls.append(VarDecl(loc=loc, ty=ty, name=var,
                             init=_const_expr(value, ty)))
    body = decls + _rebuild(fn.body, keep)
    new_fn = FunctionDef(name=fn.name, params=list(fn.params),
                         return_type=fn.return_type if returns_kept else VOID,
                         body=body, line=fn.line)
    fns = [new_fn if f.name == program.entry else f for f in program.functions]
    summarized = Program(functions=fns, entry=program.entry)
    return SliceResult(set(relevant), summarized, substitutions, True)


def _values_const(trace: Trace, entries: list[int], var: str) -> bool:
    vals = [trace.configs[h].valuation.get(var, UNDEF) for h in entries]
    first = vals[0]
    from .tracer import values_equal
    return all(values_equal(v, first) for v in vals)


def _entry_equals_initial(trace: Trace, entries: list[int], var: str) -> bool:
    from .tracer import values_equal
    initial = trace.configs[0].valuation.get(var, UNDEF)
    return all(values_equal(trace.configs[h].valuation.get(var, UNDEF), initial)
               for h in entries)


# ---------------------------------------------------------------------------
# Solver integration


def replace_stmt(program: Program, loc: int, new_stmt: Stmt) -> Program:
    """Program with the entry-function statement at ``loc`` replaced."""
    fn = program.entry_fn()

    def rebuild(body: list[Stmt]) -> list[Stmt]:
        out = []
        for s in body:
            if s.loc == loc:
                out.append(copy_stmt(new_stmt))
                continue
            s = copy_stmt(s)
            if isinstance(s, If):
                s.then_body = rebuild(s.then_body)
                s.else_body = rebuild(s.else_body)
            elif isinstance(s, (For, While)):
                s.body = rebuild(s.body)
            out.append(s)
        return out

    new_fn = FunctionDef(name=fn.name, params=list(fn.params),
                         return_type=fn.return_type, body=rebuild(fn.body),
                         line=fn.line)
    fns = [new_fn if f.name == program.entry else f for f in program.functions]
    return Program(functions=fns, entry=program.entry)


def summarize_for_line(program: Program, context, repair_loc: int) -> SliceResult | None:
    """Slice for a single-line repair at ``repair_loc`` under the session's
    state edit.  Returns None when slicing does not apply."""
    manipulation = context.manipulation
    if manipulation is None or context.manip_loc == EXIT_LOC:
        return None
    manip_loc = context.manip_loc
    manipulated = [v for v, val in manipulation.values.items()
                   if val is not WILDCARD]
    try:
        back = backward_slice(program, manip_loc, manipulated)
        fwd = forward_reachable(program, repair_loc)
    except ValueError:
        return None
    relevant = back & fwd
    if manip_loc not in relevant or repair_loc not in relevant:
        return None
    result = summarize(program, relevant, context.original_trace)
    return result


def build_sliced_context(program: Program, manipulation, options, externals,
                         context, sliced: SliceResult, repair_loc: int):
    """EvalContext over the summarized program, or None for fallback, or
    the string "unsatisfiable" when the edit can never hold on this line."""
    from .solver import build_context
    from .tracer import values_equal

    summarized = sliced.summarized
    try:
        info = fn_info(summarized)
    except Exception:
        return None
    # constraints on variables that were sliced away are decided against
    # their frozen values: they cannot vary under this line's candidates
    entries = _region_entries(context.original_trace,
                              set(_slice_region_locs(summarized)))
    values = {}
    for var, want in manipulation.values.items():
        if want is WILDCARD:
            continue
        if var in info.valuation_domain and _var_exists(summarized, info, var):
            values[var] = want
            continue
        occ_vals = [c.valuation.get(var, UNDEF)
                    for c in context.original_trace.configs
                    if c.loc == context.manip_loc]
        entry_vals = [context.original_trace.configs[h].valuation.get(var, UNDEF)
                      for h in entries]
        candidates_see = occ_vals + entry_vals
        if not candidates_see:
            return None
        first = candidates_see[0]
        if not all(values_equal(v, first) for v in candidates_see):
            return None
        if not values_equal(first, want):
            return "unsatisfiable"
        # constraint holds vacuously; drop it
    k_occurrence = _occurrence_of(context.original_trace, context.manip_loc,
                                  manipulation.index)
    from .tracer import Manipulation
    try:
        sliced_trace = execute(summarized, manipulation.initial,
                               options.original_fuel, externals=externals)
    except RuntimeFault:
        return None
    if not sliced_trace.terminated:
        return None
    sliced_k = _index_of_occurrence(sliced_trace, context.manip_loc,
                                    k_occurrence)
    if sliced_k is None:
        return None
    sliced_manip = Manipulation(initial=manipulation.initial, index=sliced_k,
                                values=values)
    try:
        sliced_context = build_context(summarized, sliced_manip, options,
                                       externals)
    except (ValueError, RuntimeFault):
        return None
    from .sketcher import sketch
    sliced_sketch = sketch(summarized, {repair_loc})
    return sliced_sketch, sliced_context


def _slice_region_locs(summarized: Program) -> list[int]:
    return ast.stmt_locations(summarized.entry_fn())


def _var_exists(summarized: Program, info, var: str) -> bool:
    if var == RESULT_VAR:
        return True
    return var in info.var_types or var in info.input_vars


def _occurrence_of(trace: Trace, loc, index: int) -> int:
    """1-based occurrence number of the configuration at ``index`` among
    the trace's visits of ``loc``."""
    count = 0
    for h, c in enumerate(trace.configs):
        if c.loc == loc:
            count += 1
        if h == index:
            return count
    return count


def _index_of_occurrence(trace: Trace, loc, occurrence: int) -> int | None:
    count = 0
    for h, c in enumerate(trace.configs):
        if c.loc == loc:
            count += 1
            if count == occurrence:
                return h
    return None


def graft_stmt_head(original: Stmt, repaired: Stmt) -> Stmt:
    """Copy of ``original`` whose head expressions (condition, init,
    update, assigned value, return value) come from ``repaired``.  Child
    statements stay as in the original: repairs rewrite expressions only."""
    out = copy_stmt(original)
    if isinstance(out, VarDecl):
        out.init = repaired.init
    elif isinstance(out, Assign):
        out.index = repaired.index
        out.value = repaired.value
    elif isinstance(out, If):
        out.cond = repaired.cond
    elif isinstance(out, For):
        out.init = repaired.init
        out.cond = repaired.cond
        out.update = repaired.update
    elif isinstance(out, While):
        out.cond = repaired.cond
    elif isinstance(out, Return):
        out.value = repaired.value
    return out
