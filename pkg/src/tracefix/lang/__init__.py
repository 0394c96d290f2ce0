from .ast import (Program, FunctionDef, Stmt, Expr, Type, EXIT_LOC,
                  RESULT_VAR, structurally_equal, structure_key,
                  walk_stmts, stmt_locations, find_stmt)
from .errors import ParseError, TypecheckError, ShapeMismatch
from .parser import parse_program
from .printer import pretty_print, head_text, render_expr
from .diff import Patch, PatchEntry, diff_programs, apply_patch
from .typecheck import typecheck, fn_info, FnInfo

__all__ = [
    "Program", "FunctionDef", "Stmt", "Expr", "Type", "EXIT_LOC", "RESULT_VAR",
    "structurally_equal", "structure_key", "walk_stmts", "stmt_locations",
    "find_stmt", "ParseError", "TypecheckError", "ShapeMismatch",
    "parse_program", "pretty_print", "head_text", "render_expr",
    "Patch", "PatchEntry", "diff_programs", "apply_patch",
    "typecheck", "fn_info", "FnInfo",
]
