"""Rewrites statements into sketches with integer holes.

Every pre-existing int/char variable occurrence, array read, length access
and call gets a coefficient hole over {-1,0,1}; assignment right-hand
sides, return expressions, constant-times-expression operands and the
right side of Boolean comparisons additionally gain an added term
``sum(??_b * v) + ??``.  On comparison sides and return expressions the
added term ranges over every in-scope scalar variable (new variable mixes
belong in conditions and results); on assignment right-hand sides and
inside constant products it ranges over scalar input variables only, so a
repair cannot cheaply re-route an assignment through unrelated local
state and perfectly mimic the edited value.  Array subscripts stay as
written.  Coefficient holes on pre-existing occurrences originally hold
1; every hole introduced inside an added term (and every constant hole)
originally holds 0.

Instantiating a hole assignment substitutes the integers and simplifies:
zero-coefficient terms and ``+ 0`` disappear, coefficient 1 is elided,
coefficient -1 renders as subtraction or negation, and literal constants
in an additive chain fold together.
"""

from __future__ import annotations

import copy as _copy
from dataclasses import dataclass

from .lang import ast
from .lang.ast import (Assign, ArrayIndex, ArrayLen, ArrayLit, Binary,
                       BoolLit, Call, CharLit, Expr, ExprStmt, ExtCall, For,
                       FunctionDef, HoleRef, If, IntLit, NewArray, Program,
                       Return, Stmt, Type, Unary, Var, VarDecl, While, INT,
                       CHAR, BOOL)
from .lang.printer import pretty_print
from .lang.typecheck import typecheck

COEFF = "coeff"
CONST = "const"

COEFF_DOMAIN = (-1, 0, 1)


class DomainError(Exception):
    pass


@dataclass(frozen=True)
class Hole:
    id: int
    kind: str  # COEFF | CONST
    original: int
    loc: int  # statement location the hole lives in
    seq: int  # ordinal within the statement, for stable sites

    @property
    def site(self) -> tuple[int, int]:
        return (self.loc, self.seq)


@dataclass
class SketchedProgram:
    base: Program
    scope: frozenset[int]
    fn: FunctionDef  # sketched copy of the entry function
    holes: list[Hole]

    @property
    def entry(self) -> str:
        return self.base.entry

    def program_with(self, fn: FunctionDef) -> Program:
        fns = [fn if f.name == self.base.entry else f
               for f in self.base.functions]
        return Program(functions=fns, entry=self.base.entry)

    def sketch_text(self) -> str:
        """Debug rendering with ??/??_b markers."""
        return pretty_print(self.program_with(self.fn))


# ---------------------------------------------------------------------------
# AST copying


def copy_expr(e: Expr) -> Expr:
    return _copy.deepcopy(e)


def copy_stmt(s: Stmt) -> Stmt:
    return _copy.deepcopy(s)


# ---------------------------------------------------------------------------
# Sketching


def _is_scalar_numeric(ty: Type | None) -> bool:
    return ty is not None and not ty.is_array and ty.kind in ("int", "char")


class _Sketcher:
    def __init__(self, scope: frozenset[int], input_vars: list[str]):
        self.scope = scope
        self.input_vars = input_vars
        self.holes: list[Hole] = []
        self.loc = 0
        self.seq = 0

    def new_hole(self, kind: str, original: int) -> HoleRef:
        h = Hole(id=len(self.holes), kind=kind, original=original,
                 loc=self.loc, seq=self.seq)
        self.seq += 1
        self.holes.append(h)
        return HoleRef(h.id, kind)

    def coeff_on(self, e: Expr) -> Expr:
        """??_b * e for a pre-existing occurrence (original value 1)."""
        return Binary("*", self.new_hole(COEFF, 1), e)

    def added_term(self, scope_vars: list[str]) -> Expr:
        """sum(??_b * v) + ?? over the in-scope scalar variables."""
        term: Expr = self.new_hole(CONST, 0)
        for name in reversed(scope_vars):
            term = Binary("+", Binary("*", self.new_hole(COEFF, 0), Var(name)), term)
        return term

    def plus_added(self, e: Expr, scope_vars: list[str]) -> Expr:
        return Binary("+", e, self.added_term(scope_vars))

    # -- expression rewriting ------------------------------------------------

    def rewrite(self, e: Expr, scope_vars: list[str]) -> Expr:
        """R for int/char-valued expressions."""
        if isinstance(e, (IntLit, CharLit)):
            return copy_expr(e)
        if isinstance(e, Var):
            if _is_scalar_numeric(getattr(e, "ty", None)):
                return self.coeff_on(copy_expr(e))
            return copy_expr(e)
        if isinstance(e, ArrayIndex):
            return self.coeff_on(copy_expr(e))
        if isinstance(e, ArrayLen):
            return self.coeff_on(copy_expr(e))
        if isinstance(e, (Call, ExtCall)):
            # arguments stay as written; only the call's weight is unknown
            if _is_scalar_numeric(getattr(e, "ty", INT)):
                return self.coeff_on(copy_expr(e))
            return copy_expr(e)
        if isinstance(e, Unary) and e.op == "-":
            return Unary("-", self.rewrite(e.operand, scope_vars))
        if isinstance(e, Binary):
            if e.op in ("+", "-"):
                return Binary(e.op, self.rewrite(e.left, scope_vars),
                              self.rewrite(e.right, scope_vars))
            if e.op == "*":
                if isinstance(e.left, IntLit) and not isinstance(e.right, IntLit):
                    return Binary("*", copy_expr(e.left),
                                  self.plus_added(self.rewrite(e.right, scope_vars),
                                                  self.input_vars))
                if isinstance(e.right, IntLit) and not isinstance(e.left, IntLit):
                    return Binary("*",
                                  self.plus_added(self.rewrite(e.left, scope_vars),
                                                  self.input_vars),
                                  copy_expr(e.right))
                if isinstance(e.left, IntLit) and isinstance(e.right, IntLit):
                    return copy_expr(e)
            if e.op in ("*", "/", "%"):
                return Binary(e.op, self.rewrite(e.left, scope_vars),
                              self.rewrite(e.right, scope_vars))
        # bool-valued or structural expressions keep their shape
        return copy_expr(e)

    def rewrite_bool(self, e: Expr, scope_vars: list[str]) -> Expr:
        if isinstance(e, Binary):
            if e.op in ast.CMP_OPS:
                left = self.rewrite(e.left, scope_vars)
                right = self.plus_added(self.rewrite(e.right, scope_vars), scope_vars)
                return Binary(e.op, left, right)
            if e.op in ast.LOGIC_OPS:
                return Binary(e.op, self.rewrite_bool(e.left, scope_vars),
                              self.rewrite_bool(e.right, scope_vars))
        if isinstance(e, Unary) and e.op == "!":
            return Unary("!", self.rewrite_bool(e.operand, scope_vars))
        return copy_expr(e)

    def rewrite_rhs(self, e: Expr, target_ty: Type, scope_vars: list[str]) -> Expr:
        if target_ty == INT:
            return self.plus_added(self.rewrite(e, scope_vars), self.input_vars)
        if target_ty == BOOL:
            return self.rewrite_bool(e, scope_vars)
        return copy_expr(e)

    # -- statement rewriting -------------------------------------------------

    def sketch_body(self, body: list[Stmt], scope_vars: list[str]) -> list[Stmt]:
        out = []
        local = list(scope_vars)
        for s in body:
            out.append(self.sketch_stmt(s, local))
            if isinstance(s, VarDecl) and _is_scalar_numeric(s.ty):
                local.append(s.name)
        return out

    def sketch_stmt(self, s: Stmt, scope_vars: list[str]) -> Stmt:
        in_scope = s.loc in self.scope
        self.loc = s.loc
        self.seq = 0
        if isinstance(s, VarDecl):
            if not in_scope or s.init is None:
                return copy_stmt(s)
            return VarDecl(loc=s.loc, ty=s.ty, name=s.name,
                           init=self.rewrite_rhs(s.init, s.ty, scope_vars))
        if isinstance(s, Assign):
            if not in_scope:
                return copy_stmt(s)
            target_ty = getattr(s.value, "ty", INT)
            if s.index is not None:
                value = self.plus_added(self.rewrite(s.value, scope_vars),
                                        self.input_vars)
                return Assign(loc=s.loc, name=s.name, index=copy_expr(s.index),
                              value=value)
            if target_ty == BOOL:
                return Assign(loc=s.loc, name=s.name, index=None,
                              value=self.rewrite_bool(s.value, scope_vars))
            if not _is_scalar_numeric(target_ty):
                return copy_stmt(s)
            return Assign(loc=s.loc, name=s.name, index=None,
                          value=self.plus_added(self.rewrite(s.value, scope_vars),
                                                self.input_vars))
        if isinstance(s, If):
            cond = (self.rewrite_bool(s.cond, scope_vars) if in_scope
                    else copy_expr(s.cond))
            then_body = self.sketch_body(s.then_body, scope_vars)
            self.loc, self.seq = s.loc, self.seq  # children reset these
            else_body = self.sketch_body(s.else_body, scope_vars)
            return If(loc=s.loc, cond=cond, then_body=then_body,
                      else_body=else_body)
        if isinstance(s, For):
            inner = list(scope_vars)
            init: Stmt | None = None
            if s.init is not None:
                if in_scope:
                    init = self.sketch_stmt(s.init, inner)
                else:
                    init = copy_stmt(s.init)
                if isinstance(s.init, VarDecl) and _is_scalar_numeric(s.init.ty):
                    inner.append(s.init.name)
            self.loc, self.seq = s.loc, self.seq
            if in_scope:
                cond = self.rewrite_bool(s.cond, inner)
                update = (self.sketch_stmt(s.update, inner) if s.update is not None
                          else None)
            else:
                cond = copy_expr(s.cond)
                update = copy_stmt(s.update) if s.update is not None else None
            body = self.sketch_body(s.body, inner)
            return For(loc=s.loc, init=init, cond=cond, update=update, body=body)
        if isinstance(s, While):
            cond = (self.rewrite_bool(s.cond, scope_vars) if in_scope
                    else copy_expr(s.cond))
            return While(loc=s.loc, cond=cond,
                         body=self.sketch_body(s.body, scope_vars))
        if isinstance(s, Return):
            if not in_scope or s.value is None:
                return copy_stmt(s)
            ty = getattr(s.value, "ty", INT)
            if ty == INT or ty == CHAR:
                value = self.plus_added(self.rewrite(s.value, scope_vars), scope_vars)
            elif ty == BOOL:
                value = self.rewrite_bool(s.value, scope_vars)
            else:
                value = copy_expr(s.value)
            return Return(loc=s.loc, value=value)
        if isinstance(s, ExprStmt):
            return copy_stmt(s)
        raise TypeError(f"cannot sketch {s!r}")


def sketch(program: Program, scope) -> SketchedProgram:
    """Sketch the entry function's statements at the given locations.

    Statement sequencing is deterministic, so re-sketching a program yields
    identical hole ids and sites.
    """
    typecheck(program)  # annotate expression types
    fn = program.entry_fn()
    locs = set(ast.stmt_locations(fn))
    scope = frozenset(scope) & frozenset(locs)
    input_vars = [n for n, t in fn.params if _is_scalar_numeric(t)]
    sk = _Sketcher(frozenset(scope), input_vars)
    scope_vars = list(input_vars)
    body = sk.sketch_body(fn.body, scope_vars)
    sketched_fn = FunctionDef(name=fn.name, params=list(fn.params),
                              return_type=fn.return_type, body=body,
                              line=fn.line)
    return SketchedProgram(base=program, scope=scope, fn=sketched_fn,
                           holes=sk.holes)


def original_assignment(sketched: SketchedProgram) -> dict[int, int]:
    return {h.id: h.original for h in sketched.holes}


# ---------------------------------------------------------------------------
# Instantiation


def _flatten_additive(e: Expr, sign: int, out: list[tuple[int, Expr]]) -> None:
    if isinstance(e, Binary) and e.op == "+":
        _flatten_additive(e.left, sign, out)
        _flatten_additive(e.right, sign, out)
    elif isinstance(e, Binary) and e.op == "-":
        _flatten_additive(e.left, sign, out)
        _flatten_additive(e.right, -sign, out)
    elif isinstance(e, Unary) and e.op == "-":
        _flatten_additive(e.operand, -sign, out)
    else:
        out.append((sign, e))


def _rebuild_additive(terms: list[tuple[int, Expr]]) -> Expr:
    # fold all literals into the first literal's position
    lit_total = 0
    lit_pos = None
    kept: list[tuple[int, Expr]] = []
    for sign, t in terms:
        if isinstance(t, IntLit):
            if lit_pos is None:
                lit_pos = len(kept)
                kept.append((1, IntLit(0)))  # placeholder
            lit_total += sign * t.value
        else:
            kept.append((sign, t))
    if lit_pos is not None:
        if lit_total == 0 and len(kept) > 1:
            kept.pop(lit_pos)
        else:
            kept[lit_pos] = (1 if lit_total >= 0 else -1, IntLit(abs(lit_total)))
    if not kept:
        return IntLit(0)
    sign0, first = kept[0]
    expr = Unary("-", first) if sign0 < 0 else first
    if sign0 < 0 and isinstance(first, IntLit):
        expr = IntLit(-first.value)
    for sign, t in kept[1:]:
        expr = Binary("+" if sign > 0 else "-", expr, t)
    return expr


def simplify_expr(e: Expr) -> Expr:
    if isinstance(e, Binary):
        if e.op in ("+", "-"):
            terms: list[tuple[int, Expr]] = []
            _flatten_additive(e, 1, terms)
            simplified = []
            for sign, t in terms:
                st = simplify_expr(t)
                if isinstance(st, Unary) and st.op == "-":
                    sign, st = -sign, st.operand
                if isinstance(st, IntLit) and st.value == 0:
                    continue
                simplified.append((sign, st))
            return _rebuild_additive(simplified)
        left = simplify_expr(e.left)
        right = simplify_expr(e.right)
        if e.op == "*":
            if isinstance(left, IntLit):
                if left.value == 0:
                    return IntLit(0)
                if left.value == 1:
                    return right
                if left.value == -1:
                    return simplify_expr(Unary("-", right))
            if isinstance(right, IntLit):
                if right.value == 0:
                    return IntLit(0)
                if right.value == 1:
                    return left
                if right.value == -1:
                    return simplify_expr(Unary("-", left))
        return Binary(e.op, left, right)
    if isinstance(e, Unary):
        inner = simplify_expr(e.operand)
        if e.op == "-":
            if isinstance(inner, IntLit):
                return IntLit(-inner.value)
            if isinstance(inner, Unary) and inner.op == "-":
                return inner.operand
        if e.op == "!" and isinstance(inner, BoolLit):
            return BoolLit(not inner.value)
        return Unary(e.op, inner)
    if isinstance(e, ArrayIndex):
        return ArrayIndex(e.name, simplify_expr(e.index))
    if isinstance(e, Call):
        return Call(e.name, [simplify_expr(a) for a in e.args])
    if isinstance(e, ExtCall):
        return ExtCall(e.name, [simplify_expr(a) for a in e.args])
    if isinstance(e, ArrayLit):
        return ArrayLit([simplify_expr(a) for a in e.elems])
    if isinstance(e, NewArray):
        return NewArray(e.elem_type, simplify_expr(e.size))
    return e


def _substitute(e: Expr, assignment: dict[int, int]) -> Expr:
    if isinstance(e, HoleRef):
        return IntLit(assignment[e.hole_id])
    if isinstance(e, Binary):
        return Binary(e.op, _substitute(e.left, assignment),
                      _substitute(e.right, assignment))
    if isinstance(e, Unary):
        return Unary(e.op, _substitute(e.operand, assignment))
    if isinstance(e, ArrayIndex):
        return ArrayIndex(e.name, _substitute(e.index, assignment))
    if isinstance(e, Call):
        return Call(e.name, [_substitute(a, assignment) for a in e.args])
    if isinstance(e, ExtCall):
        return ExtCall(e.name, [_substitute(a, assignment) for a in e.args])
    if isinstance(e, ArrayLit):
        return ArrayLit([_substitute(a, assignment) for a in e.elems])
    if isinstance(e, NewArray):
        return NewArray(e.elem_type, _substitute(e.size, assignment))
    return copy_expr(e)


def _instantiate_expr(e: Expr, assignment: dict[int, int]) -> Expr:
    return simplify_expr(_substitute(e, assignment))


def _instantiate_stmt(s: Stmt, assignment: dict[int, int]) -> Stmt:
    if isinstance(s, VarDecl):
        init = _instantiate_expr(s.init, assignment) if s.init is not None else None
        return VarDecl(loc=s.loc, ty=s.ty, name=s.name, init=init)
    if isinstance(s, Assign):
        idx = _instantiate_expr(s.index, assignment) if s.index is not None else None
        return Assign(loc=s.loc, name=s.name, index=idx,
                      value=_instantiate_expr(s.value, assignment))
    if isinstance(s, If):
        return If(loc=s.loc, cond=_instantiate_expr(s.cond, assignment),
                  then_body=[_instantiate_stmt(x, assignment) for x in s.then_body],
                  else_body=[_instantiate_stmt(x, assignment) for x in s.else_body])
    if isinstance(s, For):
        return For(loc=s.loc,
                   init=_instantiate_stmt(s.init, assignment) if s.init else None,
                   cond=_instantiate_expr(s.cond, assignment),
                   update=_instantiate_stmt(s.update, assignment) if s.update else None,
                   body=[_instantiate_stmt(x, assignment) for x in s.body])
    if isinstance(s, While):
        return While(loc=s.loc, cond=_instantiate_expr(s.cond, assignment),
                     body=[_instantiate_stmt(x, assignment) for x in s.body])
    if isinstance(s, Return):
        value = _instantiate_expr(s.value, assignment) if s.value is not None else None
        return Return(loc=s.loc, value=value)
    return copy_stmt(s)


def check_assignment(sketched: SketchedProgram, assignment: dict[int, int]) -> None:
    for h in sketched.holes:
        if h.id not in assignment:
            raise DomainError(f"assignment is missing hole {h.id}")
        if h.kind == COEFF and assignment[h.id] not in COEFF_DOMAIN:
            raise DomainError(
                f"coefficient hole {h.id} assigned {assignment[h.id]}, "
                f"allowed values are -1, 0, 1")


def instantiate(sketched: SketchedProgram, assignment: dict[int, int],
                check: bool = True) -> Program:
    if check:
        check_assignment(sketched, assignment)
    body = [_instantiate_stmt(s, assignment) for s in sketched.fn.body]
    fn = FunctionDef(name=sketched.fn.name, params=list(sketched.fn.params),
                     return_type=sketched.fn.return_type, body=body,
                     line=sketched.fn.line)
    return sketched.program_with(fn)


def changed_locations(sketched: SketchedProgram,
                      assignment: dict[int, int]) -> list[int]:
    locs = sorted({h.loc for h in sketched.holes
                   if assignment[h.id] != h.original})
    return locs
