from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError

KEYWORDS = {"int", "bool", "char", "void", "if", "else", "for", "while",
            "return", "true", "false", "new"}

# Longest first so the scanner never splits a two-character operator.
SYMBOLS = ["<=", ">=", "==", "!=", "&&", "||", "++", "--", "+=", "-=", "*=",
           "+", "-", "*", "/", "%", "<", ">", "!", "=", "(", ")", "{", "}",
           "[", "]", ",", ";", "."]

_ESCAPES = {"n": "\n", "t": "\t", "\\": "\\", "'": "'", "0": "\0"}


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "keyword" | "num" | "char" | "sym" | "eof"
    text: str
    line: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line = 1
    i = 0
    n = len(source)
    while i < n:
        c = source[i]
        if c == "\n":
            line += 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if source.startswith("/*", i):
            end = source.find("*/", i + 2)
            if end < 0:
                raise ParseError(line, "unterminated block comment")
            line += source.count("\n", i, end)
            i = end + 2
            continue
        if c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(Token("num", source[i:j], line))
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = "keyword" if text in KEYWORDS else "ident"
            tokens.append(Token(kind, text, line))
            i = j
            continue
        if c == "'":
            if i + 2 < n and source[i + 1] == "\\":
                esc = source[i + 2]
                if esc not in _ESCAPES or i + 3 >= n or source[i + 3] != "'":
                    raise ParseError(line, f"bad character literal near {source[i:i+4]!r}")
                tokens.append(Token("char", _ESCAPES[esc], line))
                i += 4
            elif i + 2 < n and source[i + 2] == "'":
                tokens.append(Token("char", source[i + 1], line))
                i += 3
            else:
                raise ParseError(line, "bad character literal")
            continue
        for sym in SYMBOLS:
            if source.startswith(sym, i):
                tokens.append(Token("sym", sym, line))
                i += len(sym)
                break
        else:
            raise ParseError(line, f"unexpected character {c!r}")
    tokens.append(Token("eof", "", line))
    return tokens
