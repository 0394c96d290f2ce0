"""AST for the mini imperative language.

Programs are collections of typed function definitions over ints, bools,
chars and fixed-length arrays of ints/chars.  Every statement carries a
location label equal to the 1-based source line of its head; location
uniqueness is enforced by the parser.  The label ``exit`` is reserved for
the synthetic end-of-function configuration and never labels a statement.
"""

from __future__ import annotations

from dataclasses import dataclass

EXIT_LOC = "exit"

# Name under which every function's result slot appears in valuations.
# It is set when a return statement executes and is undefined before that.
RESULT_VAR = "res"


@dataclass(frozen=True)
class Type:
    kind: str  # "int" | "bool" | "char" | "void"
    is_array: bool = False

    def __str__(self) -> str:
        return self.kind + ("[]" if self.is_array else "")


INT = Type("int")
BOOL = Type("bool")
CHAR = Type("char")
VOID = Type("void")
INT_ARRAY = Type("int", True)
CHAR_ARRAY = Type("char", True)


def array_of(t: Type) -> Type:
    return Type(t.kind, True)


def elem_of(t: Type) -> Type:
    return Type(t.kind, False)


# ---------------------------------------------------------------------------
# Expressions


@dataclass
class Expr:
    pass


@dataclass
class IntLit(Expr):
    value: int


@dataclass
class BoolLit(Expr):
    value: bool


@dataclass
class CharLit(Expr):
    value: str  # single character


@dataclass
class Var(Expr):
    name: str


@dataclass
class ArrayIndex(Expr):
    name: str
    index: Expr


@dataclass
class ArrayLen(Expr):
    name: str


@dataclass
class Unary(Expr):
    op: str  # "-" | "!"
    operand: Expr


@dataclass
class Binary(Expr):
    op: str  # + - * / % < <= > >= == != && ||
    left: Expr
    right: Expr


@dataclass
class Call(Expr):
    """Call to another function defined in the same program."""

    name: str
    args: list[Expr]


@dataclass
class ExtCall(Expr):
    """Call to a registered external function, e.g. ``Math.pow``."""

    name: str  # qualified, "Math.pow"
    args: list[Expr]


@dataclass
class ArrayLit(Expr):
    elems: list[Expr]


@dataclass
class NewArray(Expr):
    elem_type: Type
    size: Expr


@dataclass
class HoleRef(Expr):
    """Unknown integer inside a sketched expression tree.

    ``kind`` is "coeff" (domain {-1,0,1}) or "const" (bounded integer).
    Never produced by the parser; only by the sketcher.
    """

    hole_id: int
    kind: str


ARITH_OPS = {"+", "-", "*", "/", "%"}
CMP_OPS = {"<", "<=", ">", ">=", "==", "!="}
LOGIC_OPS = {"&&", "||"}


# ---------------------------------------------------------------------------
# Statements


@dataclass
class Stmt:
    loc: int


@dataclass
class VarDecl(Stmt):
    ty: Type
    name: str
    init: Expr | None


@dataclass
class Assign(Stmt):
    name: str
    index: Expr | None  # None for scalar target, expression for name[index]
    value: Expr


@dataclass
class If(Stmt):
    cond: Expr
    then_body: list[Stmt]
    else_body: list[Stmt]


@dataclass
class For(Stmt):
    init: Stmt | None  # VarDecl or Assign, sharing the header's location
    cond: Expr
    update: Assign | None
    body: list[Stmt]


@dataclass
class While(Stmt):
    cond: Expr
    body: list[Stmt]


@dataclass
class Return(Stmt):
    value: Expr | None


@dataclass
class ExprStmt(Stmt):
    call: Expr  # Call or ExtCall


@dataclass
class FunctionDef:
    name: str
    params: list[tuple[str, Type]]
    return_type: Type
    body: list[Stmt]
    line: int = 0


@dataclass
class Program:
    functions: list[FunctionDef]
    entry: str

    def entry_fn(self) -> FunctionDef:
        for f in self.functions:
            if f.name == self.entry:
                return f
        raise KeyError(f"no function named {self.entry!r}")

    def function(self, name: str) -> FunctionDef:
        for f in self.functions:
            if f.name == name:
                return f
        raise KeyError(f"no function named {name!r}")


# ---------------------------------------------------------------------------
# Traversal helpers


def walk_stmts(body: list[Stmt]):
    """Yield every statement in ``body``, depth-first, in source order."""
    for s in body:
        yield s
        if isinstance(s, If):
            yield from walk_stmts(s.then_body)
            yield from walk_stmts(s.else_body)
        elif isinstance(s, For):
            yield from walk_stmts(s.body)
        elif isinstance(s, While):
            yield from walk_stmts(s.body)


def stmt_locations(fn: FunctionDef) -> list[int]:
    return [s.loc for s in walk_stmts(fn.body)]


def find_stmt(fn: FunctionDef, loc: int) -> Stmt | None:
    for s in walk_stmts(fn.body):
        if s.loc == loc:
            return s
    return None


def expr_children(e: Expr) -> list[Expr]:
    if isinstance(e, ArrayIndex):
        return [e.index]
    if isinstance(e, Unary):
        return [e.operand]
    if isinstance(e, Binary):
        return [e.left, e.right]
    if isinstance(e, (Call, ExtCall)):
        return list(e.args)
    if isinstance(e, ArrayLit):
        return list(e.elems)
    if isinstance(e, NewArray):
        return [e.size]
    return []


def walk_expr(e: Expr):
    yield e
    for c in expr_children(e):
        yield from walk_expr(c)


def stmt_exprs(s: Stmt) -> list[Expr]:
    """Top-level expressions of a statement (not recursing into child stmts)."""
    if isinstance(s, VarDecl):
        return [s.init] if s.init is not None else []
    if isinstance(s, Assign):
        out = [s.value]
        if s.index is not None:
            out.append(s.index)
        return out
    if isinstance(s, If):
        return [s.cond]
    if isinstance(s, For):
        out = []
        if s.init is not None:
            out.extend(stmt_exprs(s.init))
        out.append(s.cond)
        if s.update is not None:
            out.extend(stmt_exprs(s.update))
        return out
    if isinstance(s, While):
        return [s.cond]
    if isinstance(s, Return):
        return [s.value] if s.value is not None else []
    if isinstance(s, ExprStmt):
        return [s.call]
    return []


def _expr_key(e: Expr):
    if isinstance(e, IntLit):
        return ("int", e.value)
    if isinstance(e, BoolLit):
        return ("bool", e.value)
    if isinstance(e, CharLit):
        return ("char", e.value)
    if isinstance(e, Var):
        return ("var", e.name)
    if isinstance(e, ArrayIndex):
        return ("index", e.name, _expr_key(e.index))
    if isinstance(e, ArrayLen):
        return ("len", e.name)
    if isinstance(e, Unary):
        return ("un", e.op, _expr_key(e.operand))
    if isinstance(e, Binary):
        return ("bin", e.op, _expr_key(e.left), _expr_key(e.right))
    if isinstance(e, Call):
        return ("call", e.name, tuple(_expr_key(a) for a in e.args))
    if isinstance(e, ExtCall):
        return ("ext", e.name, tuple(_expr_key(a) for a in e.args))
    if isinstance(e, ArrayLit):
        return ("arrlit", tuple(_expr_key(a) for a in e.elems))
    if isinstance(e, NewArray):
        return ("new", str(e.elem_type), _expr_key(e.size))
    if isinstance(e, HoleRef):
        return ("hole", e.hole_id, e.kind)
    raise TypeError(f"unknown expression {e!r}")


def _stmt_key(s: Stmt, with_locs: bool):
    loc = s.loc if with_locs else None
    if isinstance(s, VarDecl):
        return ("decl", loc, str(s.ty), s.name,
                _expr_key(s.init) if s.init is not None else None)
    if isinstance(s, Assign):
        return ("assign", loc, s.name,
                _expr_key(s.index) if s.index is not None else None,
                _expr_key(s.value))
    if isinstance(s, If):
        return ("if", loc, _expr_key(s.cond),
                tuple(_stmt_key(x, with_locs) for x in s.then_body),
                tuple(_stmt_key(x, with_locs) for x in s.else_body))
    if isinstance(s, For):
        return ("for", loc,
                _stmt_key(s.init, with_locs) if s.init is not None else None,
                _expr_key(s.cond),
                _stmt_key(s.update, with_locs) if s.update is not None else None,
                tuple(_stmt_key(x, with_locs) for x in s.body))
    if isinstance(s, While):
        return ("while", loc, _expr_key(s.cond),
                tuple(_stmt_key(x, with_locs) for x in s.body))
    if isinstance(s, Return):
        return ("return", loc,
                _expr_key(s.value) if s.value is not None else None)
    if isinstance(s, ExprStmt):
        return ("exprstmt", loc, _expr_key(s.call))
    raise TypeError(f"unknown statement {s!r}")


def structure_key(program: Program, with_locs: bool = False):
    """Hashable structural summary of a program.

    With ``with_locs=False`` two programs that differ only in statement
    location labels (e.g. a program and the re-parse of its pretty-print)
    compare equal.
    """
    fns = []
    for f in program.functions:
        fns.append((f.name,
                    tuple((n, str(t)) for n, t in f.params),
                    str(f.return_type),
                    tuple(_stmt_key(s, with_locs) for s in f.body)))
    return (tuple(fns), program.entry)


def structurally_equal(a: Program, b: Program) -> bool:
    return structure_key(a) == structure_key(b)
