"""Recursive-descent parser.

Location labels are 1-based source line numbers of statement heads, so the
parser rejects two statements starting on the same line.  ``x += e``,
``x++`` and ``x--`` are accepted and desugared into plain assignments.
"""

from __future__ import annotations

from . import ast
from .ast import (Assign, ArrayIndex, ArrayLen, ArrayLit, Binary, BoolLit,
                  Call, CharLit, Expr, ExprStmt, ExtCall, For, FunctionDef,
                  If, IntLit, NewArray, Program, Return, Stmt, Type, Unary,
                  Var, VarDecl, While)
from .errors import ParseError
from .lexer import Token, tokenize


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    # -- token helpers ----------------------------------------------------

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def at_sym(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "sym" and t.text == text

    def at_kw(self, text: str) -> bool:
        t = self.peek()
        return t.kind == "keyword" and t.text == text

    def expect_sym(self, text: str) -> Token:
        t = self.next()
        if t.kind != "sym" or t.text != text:
            raise ParseError(t.line, f"expected {text!r}, found {t.text!r}")
        return t

    def expect_ident(self) -> Token:
        t = self.next()
        if t.kind != "ident":
            raise ParseError(t.line, f"expected identifier, found {t.text!r}")
        return t

    # -- declarations ------------------------------------------------------

    def at_type(self) -> bool:
        return self.peek().kind == "keyword" and self.peek().text in (
            "int", "bool", "char", "void")

    def parse_type(self) -> Type:
        t = self.next()
        if t.kind != "keyword" or t.text not in ("int", "bool", "char", "void"):
            raise ParseError(t.line, f"expected a type, found {t.text!r}")
        ty = Type(t.text)
        if self.at_sym("["):
            self.next()
            self.expect_sym("]")
            if t.text == "void":
                raise ParseError(t.line, "void[] is not a type")
            ty = ast.array_of(ty)
        return ty

    def parse_program(self) -> Program:
        functions = []
        while not self.peek().kind == "eof":
            functions.append(self.parse_function())
        if not functions:
            raise ParseError(1, "no function definitions found")
        return Program(functions=functions, entry=functions[0].name)

    def parse_function(self) -> FunctionDef:
        line = self.peek().line
        ret = self.parse_type()
        name = self.expect_ident().text
        self.expect_sym("(")
        params: list[tuple[str, Type]] = []
        if not self.at_sym(")"):
            while True:
                pty = self.parse_type()
                pname = self.expect_ident().text
                params.append((pname, pty))
                if self.at_sym(","):
                    self.next()
                    continue
                break
        self.expect_sym(")")
        body = self.parse_block()
        return FunctionDef(name=name, params=params, return_type=ret,
                           body=body, line=line)

    def parse_block(self) -> list[Stmt]:
        self.expect_sym("{")
        stmts = []
        while not self.at_sym("}"):
            if self.peek().kind == "eof":
                raise ParseError(self.peek().line, "unexpected end of input in block")
            stmts.append(self.parse_stmt())
        self.next()
        return stmts

    def parse_stmt_or_block(self) -> list[Stmt]:
        if self.at_sym("{"):
            return self.parse_block()
        return [self.parse_stmt()]

    # -- statements --------------------------------------------------------

    def parse_stmt(self) -> Stmt:
        t = self.peek()
        if self.at_kw("if"):
            return self.parse_if()
        if self.at_kw("for"):
            return self.parse_for()
        if self.at_kw("while"):
            return self.parse_while()
        if self.at_kw("return"):
            self.next()
            value = None if self.at_sym(";") else self.parse_expr()
            self.expect_sym(";")
            return Return(loc=t.line, value=value)
        if self.at_type():
            decl = self.parse_decl(t.line)
            self.expect_sym(";")
            return decl
        stmt = self.parse_assign_or_call(t.line)
        self.expect_sym(";")
        return stmt

    def parse_decl(self, line: int) -> VarDecl:
        ty = self.parse_type()
        name = self.expect_ident().text
        init = None
        if self.at_sym("="):
            self.next()
            init = self.parse_expr()
        return VarDecl(loc=line, ty=ty, name=name, init=init)

    def parse_assign_or_call(self, line: int) -> Stmt:
        name_tok = self.expect_ident()
        name = name_tok.text
        if self.at_sym("."):
            self.next()
            member = self.expect_ident().text
            self.expect_sym("(")
            args = self.parse_args()
            return ExprStmt(loc=line, call=ExtCall(f"{name}.{member}", args))
        if self.at_sym("("):
            self.next()
            args = self.parse_args()
            return ExprStmt(loc=line, call=Call(name, args))
        index = None
        if self.at_sym("["):
            self.next()
            index = self.parse_expr()
            self.expect_sym("]")
        target = Var(name) if index is None else ArrayIndex(name, index)
        t = self.next()
        if t.kind != "sym":
            raise ParseError(t.line, f"expected assignment operator, found {t.text!r}")
        if t.text == "=":
            value = self.parse_expr()
        elif t.text in ("+=", "-=", "*="):
            value = Binary(t.text[0], target, self.parse_expr())
        elif t.text == "++":
            value = Binary("+", target, IntLit(1))
        elif t.text == "--":
            value = Binary("-", target, IntLit(1))
        else:
            raise ParseError(t.line, f"expected assignment operator, found {t.text!r}")
        return Assign(loc=line, name=name, index=index, value=value)

    def parse_if(self) -> If:
        t = self.next()
        self.expect_sym("(")
        cond = self.parse_expr()
        self.expect_sym(")")
        then_body = self.parse_stmt_or_block()
        else_body: list[Stmt] = []
        if self.at_kw("else"):
            self.next()
            if self.at_kw("if"):
                else_body = [self.parse_if()]
            else:
                else_body = self.parse_stmt_or_block()
        return If(loc=t.line, cond=cond, then_body=then_body, else_body=else_body)

    def parse_for(self) -> For:
        t = self.next()
        self.expect_sym("(")
        init: Stmt | None = None
        if not self.at_sym(";"):
            if self.at_type():
                init = self.parse_decl(t.line)
            else:
                init = self.parse_assign_or_call(t.line)
                if not isinstance(init, Assign):
                    raise ParseError(t.line, "for-init must be a declaration or assignment")
        self.expect_sym(";")
        cond = self.parse_expr()
        self.expect_sym(";")
        update: Assign | None = None
        if not self.at_sym(")"):
            upd = self.parse_assign_or_call(t.line)
            if not isinstance(upd, Assign):
                raise ParseError(t.line, "for-update must be an assignment")
            update = upd
        self.expect_sym(")")
        body = self.parse_stmt_or_block()
        return For(loc=t.line, init=init, cond=cond, update=update, body=body)

    def parse_while(self) -> While:
        t = self.next()
        self.expect_sym("(")
        cond = self.parse_expr()
        self.expect_sym(")")
        body = self.parse_stmt_or_block()
        return While(loc=t.line, cond=cond, body=body)

    # -- expressions ---------------------------------------------------------

    def parse_args(self) -> list[Expr]:
        args = []
        if not self.at_sym(")"):
            while True:
                args.append(self.parse_expr())
                if self.at_sym(","):
                    self.next()
                    continue
                break
        self.expect_sym(")")
        return args

    def parse_expr(self) -> Expr:
        return self.parse_or()

    def parse_or(self) -> Expr:
        left = self.parse_and()
        while self.at_sym("||"):
            self.next()
            left = Binary("||", left, self.parse_and())
        return left

    def parse_and(self) -> Expr:
        left = self.parse_cmp()
        while self.at_sym("&&"):
            self.next()
            left = Binary("&&", left, self.parse_cmp())
        return left

    def parse_cmp(self) -> Expr:
        left = self.parse_add()
        while self.peek().kind == "sym" and self.peek().text in ast.CMP_OPS:
            op = self.next().text
            left = Binary(op, left, self.parse_add())
        return left

    def parse_add(self) -> Expr:
        left = self.parse_mul()
        while self.peek().kind == "sym" and self.peek().text in ("+", "-"):
            op = self.next().text
            left = Binary(op, left, self.parse_mul())
        return left

    def parse_mul(self) -> Expr:
        left = self.parse_unary()
        while self.peek().kind == "sym" and self.peek().text in ("*", "/", "%"):
            op = self.next().text
            left = Binary(op, left, self.parse_unary())
        return left

    def parse_unary(self) -> Expr:
        if self.at_sym("-"):
            self.next()
            return Unary("-", self.parse_unary())
        if self.at_sym("!"):
            self.next()
            return Unary("!", self.parse_unary())
        return self.parse_primary()

    def parse_primary(self) -> Expr:
        t = self.peek()
        if t.kind == "num":
            self.next()
            return IntLit(int(t.text))
        if t.kind == "char":
            self.next()
            return CharLit(t.text)
        if self.at_kw("true"):
            self.next()
            return BoolLit(True)
        if self.at_kw("false"):
            self.next()
            return BoolLit(False)
        if self.at_kw("new"):
            self.next()
            base = self.next()
            if base.kind != "keyword" or base.text not in ("int", "char"):
                raise ParseError(base.line, "new T[...] supports int and char only")
            self.expect_sym("[")
            size = self.parse_expr()
            self.expect_sym("]")
            return NewArray(Type(base.text), size)
        if self.at_sym("("):
            self.next()
            e = self.parse_expr()
            self.expect_sym(")")
            return e
        if self.at_sym("{"):
            self.next()
            elems = [self.parse_expr()]
            while self.at_sym(","):
                self.next()
                elems.append(self.parse_expr())
            self.expect_sym("}")
            return ArrayLit(elems)
        if t.kind == "ident":
            self.next()
            if self.at_sym("."):
                self.next()
                member = self.expect_ident()
                if self.at_sym("("):
                    self.next()
                    args = self.parse_args()
                    return ExtCall(f"{t.text}.{member.text}", args)
                if member.text == "length":
                    return ArrayLen(t.text)
                raise ParseError(member.line,
                                 f"unknown member {member.text!r} (only .length and qualified calls)")
            if self.at_sym("("):
                self.next()
                args = self.parse_args()
                return Call(t.text, args)
            if self.at_sym("["):
                self.next()
                idx = self.parse_expr()
                self.expect_sym("]")
                return ArrayIndex(t.text, idx)
            return Var(t.text)
        raise ParseError(t.line, f"unexpected token {t.text!r}")


def _check_unique_locations(program: Program) -> None:
    for fn in program.functions:
        seen: dict[int, int] = {}
        for s in ast.walk_stmts(fn.body):
            if s.loc in seen:
                raise ParseError(
                    s.loc,
                    "two statements start on this line; one statement per line")
            seen[s.loc] = 1


def parse_program(source: str, entry: str | None = None) -> Program:
    """Parse and type-check a program.

    ``entry`` selects the function under repair; the default is the first
    function in the file.
    """
    from .typecheck import typecheck

    program = _Parser(tokenize(source)).parse_program()
    if entry is not None:
        names = [f.name for f in program.functions]
        if entry not in names:
            raise ParseError(1, f"entry function {entry!r} not defined")
        program.entry = entry
    _check_unique_locations(program)
    typecheck(program)
    return program
