"""Pretty-printer.

Rendering convention: assignments, comparisons and logical operators get
spaces (``i = 1``, ``i < N-1``); additive and multiplicative operators are
tight (``N-1``, ``max-min``).  For-loop updates of the form ``i = i + 1``
render as ``i++``.  Output always re-parses to a structurally identical
program.
"""

from __future__ import annotations

from .ast import (Assign, ArrayIndex, ArrayLen, ArrayLit, Binary, BoolLit,
                  Call, CharLit, Expr, ExprStmt, ExtCall, For, FunctionDef,
                  HoleRef, If, IntLit, NewArray, Program, Return, Stmt,
                  Unary, Var, VarDecl, While)

_PREC = {"||": 1, "&&": 2,
         "<": 3, "<=": 3, ">": 3, ">=": 3, "==": 3, "!=": 3,
         "+": 4, "-": 4,
         "*": 5, "/": 5, "%": 5}
_UNARY_PREC = 6

_CHAR_ESCAPES = {"\n": "\\n", "\t": "\\t", "\\": "\\\\", "'": "\\'", "\0": "\\0"}


def render_expr(e: Expr, parent_prec: int = 0) -> str:
    if isinstance(e, IntLit):
        return str(e.value) if e.value >= 0 else _paren(str(e.value), 0, parent_prec)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, CharLit):
        return f"'{_CHAR_ESCAPES.get(e.value, e.value)}'"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, ArrayIndex):
        return f"{e.name}[{render_expr(e.index)}]"
    if isinstance(e, ArrayLen):
        return f"{e.name}.length"
    if isinstance(e, Unary):
        inner = render_expr(e.operand, _UNARY_PREC)
        return _paren(f"{e.op}{inner}", _UNARY_PREC, parent_prec)
    if isinstance(e, Binary):
        # coefficient-hole products print in sketch notation
        if e.op == "*" and isinstance(e.left, HoleRef) and e.left.kind == "coeff":
            text = f"??_b {render_expr(e.right, _UNARY_PREC)}"
            return _paren(text, _PREC["*"], parent_prec)
        prec = _PREC[e.op]
        left = render_expr(e.left, prec)
        right = render_expr(e.right, prec + 1)
        sep = e.op if prec >= 4 else f" {e.op} "
        return _paren(f"{left}{sep}{right}", prec, parent_prec)
    if isinstance(e, Call):
        return f"{e.name}({', '.join(render_expr(a) for a in e.args)})"
    if isinstance(e, ExtCall):
        return f"{e.name}({', '.join(render_expr(a) for a in e.args)})"
    if isinstance(e, ArrayLit):
        return "{" + ", ".join(render_expr(a) for a in e.elems) + "}"
    if isinstance(e, NewArray):
        return f"new {e.elem_type.kind}[{render_expr(e.size)}]"
    if isinstance(e, HoleRef):
        return "??" if e.kind == "const" else "??_b"
    raise TypeError(f"cannot render {e!r}")


def _paren(text: str, prec: int, parent_prec: int) -> str:
    return f"({text})" if prec < parent_prec else text


def _render_assign(s: Assign, as_update: bool = False) -> str:
    target = s.name if s.index is None else f"{s.name}[{render_expr(s.index)}]"
    if as_update and s.index is None and isinstance(s.value, Binary):
        v = s.value
        if (isinstance(v.left, Var) and v.left.name == s.name
                and isinstance(v.right, IntLit) and v.right.value == 1
                and v.op in ("+", "-")):
            return f"{s.name}{v.op * 2}"
    return f"{target} = {render_expr(s.value)}"


def _render_decl(s: VarDecl) -> str:
    if s.init is None:
        return f"{s.ty} {s.name}"
    return f"{s.ty} {s.name} = {render_expr(s.init)}"


def head_text(s: Stmt) -> str:
    """The first line of a statement's rendering, used by diffs and patches."""
    if isinstance(s, VarDecl):
        return _render_decl(s) + ";"
    if isinstance(s, Assign):
        return _render_assign(s) + ";"
    if isinstance(s, If):
        return f"if({render_expr(s.cond)}) {{"
    if isinstance(s, For):
        init = ""
        if isinstance(s.init, VarDecl):
            init = _render_decl(s.init)
        elif isinstance(s.init, Assign):
            init = _render_assign(s.init)
        update = _render_assign(s.update, as_update=True) if s.update else ""
        return f"for({init}; {render_expr(s.cond)}; {update}) {{"
    if isinstance(s, While):
        return f"while({render_expr(s.cond)}) {{"
    if isinstance(s, Return):
        return f"return {render_expr(s.value)};" if s.value is not None else "return;"
    if isinstance(s, ExprStmt):
        return render_expr(s.call) + ";"
    raise TypeError(f"cannot render {s!r}")


def _emit_body(body: list[Stmt], out: list[str], depth: int) -> None:
    pad = "    " * depth
    for s in body:
        if isinstance(s, If):
            out.append(pad + head_text(s))
            _emit_body(s.then_body, out, depth + 1)
            if s.else_body:
                out.append(pad + "} else {")
                _emit_body(s.else_body, out, depth + 1)
            out.append(pad + "}")
        elif isinstance(s, (For, While)):
            out.append(pad + head_text(s))
            _emit_body(s.body, out, depth + 1)
            out.append(pad + "}")
        else:
            out.append(pad + head_text(s))


def render_function(fn: FunctionDef) -> str:
    params = ", ".join(f"{t} {n}" for n, t in fn.params)
    out = [f"{fn.return_type} {fn.name}({params}) {{"]
    _emit_body(fn.body, out, 1)
    out.append("}")
    return "\n".join(out)


def pretty_print(program: Program) -> str:
    return "\n\n".join(render_function(f) for f in program.functions) + "\n"
