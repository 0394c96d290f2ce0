"""Statement-level diffs between programs that share a statement skeleton.

Repairs only rewrite expressions, so two diffable programs have identical
statement kinds and locations; the patch lists the locations whose rendered
head lines differ."""

from __future__ import annotations

from dataclasses import dataclass

from .ast import For, If, Program, Stmt, While
from .errors import ShapeMismatch
from .printer import head_text


@dataclass(frozen=True)
class PatchEntry:
    location: int
    before: str
    after: str


@dataclass(frozen=True)
class Patch:
    entries: tuple[PatchEntry, ...]

    def __bool__(self) -> bool:
        return bool(self.entries)

    def locations(self) -> list[int]:
        return [e.location for e in self.entries]

    def to_json(self) -> list[dict]:
        return [{"line": e.location, "before": e.before, "after": e.after}
                for e in self.entries]


def _zip_stmts(a: list[Stmt], b: list[Stmt], out: list[tuple[Stmt, Stmt]]) -> None:
    if len(a) != len(b):
        raise ShapeMismatch("statement counts differ")
    for sa, sb in zip(a, b):
        if type(sa) is not type(sb) or sa.loc != sb.loc:
            raise ShapeMismatch(
                f"statement mismatch at locations {sa.loc} vs {sb.loc}")
        out.append((sa, sb))
        if isinstance(sa, If):
            _zip_stmts(sa.then_body, sb.then_body, out)
            _zip_stmts(sa.else_body, sb.else_body, out)
        elif isinstance(sa, (For, While)):
            _zip_stmts(sa.body, sb.body, out)


def diff_programs(original: Program, repaired: Program) -> Patch:
    if [f.name for f in original.functions] != [f.name for f in repaired.functions]:
        raise ShapeMismatch("function lists differ")
    pairs: list[tuple[Stmt, Stmt]] = []
    for fa, fb in zip(original.functions, repaired.functions):
        if fa.params != fb.params or fa.return_type != fb.return_type:
            raise ShapeMismatch(f"signature of {fa.name!r} differs")
        _zip_stmts(fa.body, fb.body, pairs)
    entries = []
    for sa, sb in pairs:
        before, after = head_text(sa), head_text(sb)
        if before != after:
            entries.append(PatchEntry(sa.loc, before, after))
    entries.sort(key=lambda e: e.location)
    return Patch(tuple(entries))


def apply_patch(source: str, patch: Patch) -> str:
    """Splice patched head lines into the original source text.

    Each patched statement head replaces its source line, keeping the line's
    original indentation and any trailing text after the statement head
    (e.g. a closing brace sharing the line).
    """
    lines = source.splitlines()
    for entry in patch.entries:
        i = entry.location - 1
        if i < 0 or i >= len(lines):
            raise ValueError(f"patch location {entry.location} outside source")
        old = lines[i]
        indent = old[:len(old) - len(old.lstrip())]
        lines[i] = indent + entry.after
    return "\n".join(lines) + ("\n" if source.endswith("\n") else "")
