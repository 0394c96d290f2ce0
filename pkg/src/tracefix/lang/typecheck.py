"""Static checks: declare-before-use, no redeclaration, simple typing.

Every expression node gets a ``ty`` attribute.  ``char`` widens to ``int``
in arithmetic, comparisons and int contexts; ``bool`` never mixes with
numbers; arrays are second-class (no whole-array assignment or equality).
"""

from __future__ import annotations

from . import ast
from .ast import (Assign, ArrayIndex, ArrayLen, ArrayLit, Binary, BoolLit,
                  Call, CharLit, Expr, ExprStmt, ExtCall, For, FunctionDef,
                  HoleRef, If, IntLit, NewArray, Program, Return, Stmt, Type,
                  Unary, Var, VarDecl, While, BOOL, CHAR, INT, VOID,
                  RESULT_VAR)
from .errors import TypecheckError


def _is_numeric(t: Type) -> bool:
    return not t.is_array and t.kind in ("int", "char")


def _accepts(target: Type, value: Type) -> bool:
    if target == value:
        return True
    # char widens to int
    return target == INT and value == CHAR


class FnInfo:
    """Variable layout of one function, derived during type checking.

    ``valuation_domain`` lists the names appearing in trace configurations:
    parameters, locals in first-declaration order, then the result slot.
    A local that happens to be named like the result slot is a normal
    variable for execution but is not separately displayed.
    """

    def __init__(self, fn: FunctionDef):
        self.fn = fn
        self.params: list[tuple[str, Type]] = list(fn.params)
        self.locals: list[tuple[str, Type]] = []  # first-declaration order
        self.var_types: dict[str, Type] = {n: t for n, t in fn.params}

    def add_local(self, name: str, ty: Type) -> None:
        if name not in {n for n, _ in self.locals}:
            self.locals.append((name, ty))
        self.var_types[name] = ty

    @property
    def valuation_domain(self) -> list[str]:
        names = [n for n, _ in self.params]
        names += [n for n, _ in self.locals if n != RESULT_VAR]
        names.append(RESULT_VAR)
        return names

    @property
    def input_vars(self) -> list[str]:
        return [n for n, _ in self.params]

    @property
    def tracked_vars(self) -> list[str]:
        """Locals plus the result slot; the variables distances range over."""
        return [n for n, _ in self.locals if n != RESULT_VAR] + [RESULT_VAR]


class _Checker:
    def __init__(self, program: Program):
        self.program = program
        self.signatures: dict[str, FunctionDef] = {}
        self.infos: dict[str, FnInfo] = {}

    def run(self) -> dict[str, FnInfo]:
        for fn in self.program.functions:
            if fn.name in self.signatures:
                raise TypecheckError(fn.line, f"duplicate function {fn.name!r}")
            self.signatures[fn.name] = fn
        entries = [f for f in self.program.functions if f.name == self.program.entry]
        if len(entries) != 1:
            raise TypecheckError(1, f"entry {self.program.entry!r} must match exactly one function")
        for fn in self.program.functions:
            self.infos[fn.name] = self.check_function(fn)
        return self.infos

    def check_function(self, fn: FunctionDef) -> FnInfo:
        info = FnInfo(fn)
        seen_params = set()
        for pname, pty in fn.params:
            if pname in seen_params:
                raise TypecheckError(fn.line, f"duplicate parameter {pname!r}")
            if pname == RESULT_VAR:
                raise TypecheckError(fn.line, f"{RESULT_VAR!r} is reserved for the result slot")
            if pty == VOID:
                raise TypecheckError(fn.line, "void parameter")
            seen_params.add(pname)
        self.info = info
        self.fn = fn
        scopes: list[dict[str, Type]] = [dict(fn.params)]
        self.check_body(fn.body, scopes)
        return info

    # -- scope helpers ------------------------------------------------------

    def lookup(self, scopes, name) -> Type | None:
        for frame in reversed(scopes):
            if name in frame:
                return frame[name]
        return None

    def declare(self, scopes, loc: int, name: str, ty: Type) -> None:
        if name in {n for n, _ in self.fn.params}:
            raise TypecheckError(loc, f"{name!r} shadows a parameter")
        if self.lookup(scopes, name) is not None:
            raise TypecheckError(loc, f"{name!r} is already declared")
        scopes[-1][name] = ty
        self.info.add_local(name, ty)

    # -- statements ----------------------------------------------------------

    def check_body(self, body: list[Stmt], scopes) -> None:
        scopes.append({})
        for s in body:
            self.check_stmt(s, scopes)
        scopes.pop()

    def check_stmt(self, s: Stmt, scopes) -> None:
        if isinstance(s, VarDecl):
            if s.ty == VOID:
                raise TypecheckError(s.loc, "cannot declare a void variable")
            if s.init is not None:
                ity = self.check_expr(s.init, scopes, s.loc)
                if s.ty.is_array:
                    if not isinstance(s.init, (ArrayLit, NewArray)) or ity != s.ty:
                        raise TypecheckError(
                            s.loc, f"array {s.name!r} must be initialized with a "
                                   f"{s.ty} literal or new-expression")
                elif not _accepts(s.ty, ity):
                    raise TypecheckError(s.loc, f"cannot initialize {s.ty} {s.name!r} from {ity}")
            elif s.ty.is_array:
                raise TypecheckError(s.loc, f"array {s.name!r} requires an initializer")
            self.declare(scopes, s.loc, s.name, s.ty)
        elif isinstance(s, Assign):
            vty = self.lookup(scopes, s.name)
            if vty is None:
                raise TypecheckError(s.loc, f"assignment to undeclared variable {s.name!r}")
            if s.index is not None:
                if not vty.is_array:
                    raise TypecheckError(s.loc, f"{s.name!r} is not an array")
                idx_ty = self.check_expr(s.index, scopes, s.loc)
                if not _is_numeric(idx_ty):
                    raise TypecheckError(s.loc, "array index must be an int")
                target_ty = ast.elem_of(vty)
            else:
                if vty.is_array:
                    raise TypecheckError(s.loc, f"cannot assign whole array {s.name!r}")
                target_ty = vty
            value_ty = self.check_expr(s.value, scopes, s.loc)
            if not _accepts(target_ty, value_ty):
                raise TypecheckError(s.loc, f"cannot assign {value_ty} to {target_ty} {s.name!r}")
        elif isinstance(s, If):
            if self.check_expr(s.cond, scopes, s.loc) != BOOL:
                raise TypecheckError(s.loc, "if-condition must be a bool")
            self.check_body(s.then_body, scopes)
            self.check_body(s.else_body, scopes)
        elif isinstance(s, For):
            scopes.append({})
            if s.init is not None:
                self.check_stmt(s.init, scopes)
            if self.check_expr(s.cond, scopes, s.loc) != BOOL:
                raise TypecheckError(s.loc, "loop condition must be a bool")
            if s.update is not None:
                self.check_stmt(s.update, scopes)
            self.check_body(s.body, scopes)
            scopes.pop()
        elif isinstance(s, While):
            if self.check_expr(s.cond, scopes, s.loc) != BOOL:
                raise TypecheckError(s.loc, "loop condition must be a bool")
            self.check_body(s.body, scopes)
        elif isinstance(s, Return):
            rt = self.fn.return_type
            if s.value is None:
                if rt != VOID:
                    raise TypecheckError(s.loc, f"return value required in {rt} function")
            else:
                if rt == VOID:
                    raise TypecheckError(s.loc, "void function cannot return a value")
                vty = self.check_expr(s.value, scopes, s.loc)
                if rt.is_array:
                    if vty != rt or not isinstance(s.value, (Var, ArrayLit, NewArray)):
                        raise TypecheckError(s.loc, f"must return a {rt} value")
                elif not _accepts(rt, vty):
                    raise TypecheckError(s.loc, f"cannot return {vty} from {rt} function")
        elif isinstance(s, ExprStmt):
            if not isinstance(s.call, (Call, ExtCall)):
                raise TypecheckError(s.loc, "expression statements must be calls")
            self.check_expr(s.call, scopes, s.loc)
        else:
            raise TypecheckError(s.loc, f"unknown statement {s!r}")

    # -- expressions --------------------------------------------------------

    def check_expr(self, e: Expr, scopes, loc: int) -> Type:
        ty = self._expr_type(e, scopes, loc)
        e.ty = ty
        return ty

    def _expr_type(self, e: Expr, scopes, loc: int) -> Type:
        if isinstance(e, IntLit):
            return INT
        if isinstance(e, BoolLit):
            return BOOL
        if isinstance(e, CharLit):
            return CHAR
        if isinstance(e, HoleRef):
            return INT
        if isinstance(e, Var):
            ty = self.lookup(scopes, e.name)
            if ty is None:
                raise TypecheckError(loc, f"use of undeclared variable {e.name!r}")
            return ty
        if isinstance(e, ArrayIndex):
            ty = self.lookup(scopes, e.name)
            if ty is None:
                raise TypecheckError(loc, f"use of undeclared variable {e.name!r}")
            if not ty.is_array:
                raise TypecheckError(loc, f"{e.name!r} is not an array")
            if not _is_numeric(self.check_expr(e.index, scopes, loc)):
                raise TypecheckError(loc, "array index must be an int")
            return ast.elem_of(ty)
        if isinstance(e, ArrayLen):
            ty = self.lookup(scopes, e.name)
            if ty is None:
                raise TypecheckError(loc, f"use of undeclared variable {e.name!r}")
            if not ty.is_array:
                raise TypecheckError(loc, f"{e.name!r} has no length; not an array")
            return INT
        if isinstance(e, Unary):
            oty = self.check_expr(e.operand, scopes, loc)
            if e.op == "-":
                if not _is_numeric(oty):
                    raise TypecheckError(loc, f"cannot negate {oty}")
                return INT
            if oty != BOOL:
                raise TypecheckError(loc, "! expects a bool")
            return BOOL
        if isinstance(e, Binary):
            lty = self.check_expr(e.left, scopes, loc)
            rty = self.check_expr(e.right, scopes, loc)
            if e.op in ast.ARITH_OPS:
                if not (_is_numeric(lty) and _is_numeric(rty)):
                    raise TypecheckError(loc, f"arithmetic on {lty} and {rty}")
                return INT
            if e.op in ("<", "<=", ">", ">="):
                if not (_is_numeric(lty) and _is_numeric(rty)):
                    raise TypecheckError(loc, f"cannot order {lty} and {rty}")
                return BOOL
            if e.op in ("==", "!="):
                ok = (_is_numeric(lty) and _is_numeric(rty)) or (lty == rty == BOOL)
                if not ok:
                    raise TypecheckError(loc, f"cannot compare {lty} and {rty}")
                return BOOL
            if e.op in ast.LOGIC_OPS:
                if lty != BOOL or rty != BOOL:
                    raise TypecheckError(loc, f"{e.op} expects bools")
                return BOOL
            raise TypecheckError(loc, f"unknown operator {e.op!r}")
        if isinstance(e, Call):
            target = self.signatures.get(e.name)
            if target is None:
                raise TypecheckError(loc, f"call to undefined function {e.name!r}")
            if len(e.args) != len(target.params):
                raise TypecheckError(loc, f"{e.name!r} expects {len(target.params)} arguments")
            for arg, (pname, pty) in zip(e.args, target.params):
                aty = self.check_expr(arg, scopes, loc)
                if pty.is_array:
                    if aty != pty or not isinstance(arg, Var):
                        raise TypecheckError(loc, f"argument {pname!r} must be a {pty} variable")
                elif not _accepts(pty, aty):
                    raise TypecheckError(loc, f"argument {pname!r} expects {pty}, got {aty}")
            if target.return_type.is_array:
                raise TypecheckError(loc, "calls returning arrays are not supported in expressions")
            return target.return_type
        if isinstance(e, ExtCall):
            for arg in e.args:
                aty = self.check_expr(arg, scopes, loc)
                if not _is_numeric(aty):
                    raise TypecheckError(loc, f"external {e.name!r} takes int arguments")
            return INT
        if isinstance(e, ArrayLit):
            if not e.elems:
                raise TypecheckError(loc, "empty array literal")
            etys = [self.check_expr(x, scopes, loc) for x in e.elems]
            if all(t == CHAR for t in etys):
                return ast.array_of(CHAR)
            if all(_is_numeric(t) for t in etys):
                return ast.array_of(INT)
            raise TypecheckError(loc, "array literal elements must all be int or all char")
        if isinstance(e, NewArray):
            if not _is_numeric(self.check_expr(e.size, scopes, loc)):
                raise TypecheckError(loc, "array size must be an int")
            return ast.array_of(e.elem_type)
        raise TypecheckError(loc, f"unknown expression {e!r}")


def typecheck(program: Program) -> dict[str, FnInfo]:
    return _Checker(program).run()


def fn_info(program: Program, name: str | None = None) -> FnInfo:
    """Variable layout for one function (default: the entry function)."""
    infos = typecheck(program)
    return infos[name or program.entry]
