"""Tokenizer for MJ source text."""
from __future__ import annotations

from dataclasses import dataclass

from .ast import Span

KEYWORDS = {
    "class", "void", "int", "long", "float", "double", "bool", "string",
    "if", "else", "while", "for", "return", "new", "true", "false", "null",
    "this", "assertTrue", "assertEquals",
}

# longest first
OPERATORS = [
    "...", "&&", "||", "==", "!=", "<=", ">=",
    "<", ">", "+", "-", "*", "/", "%", "!", "=", ".", ",", ";",
    "(", ")", "{", "}", "[", "]", "?", ":",
]

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


class ParseError(Exception):
    def __init__(self, message: str, span: Span):
        self.message = message
        self.span = span
        super().__init__(f"{span.line}:{span.column}: {message}")


@dataclass(frozen=True)
class Token:
    kind: str  # ident keyword op int long float double string eof
    text: str
    value: object
    span: Span


class _Offsets:
    """Maps character offsets to (line, column, byte offset)."""

    def __init__(self, source: str):
        self.source = source
        self.ascii = source.isascii()
        self.line_starts = [0]
        for i, ch in enumerate(source):
            if ch == "\n":
                self.line_starts.append(i + 1)

    def byte(self, pos: int) -> int:
        if self.ascii:
            return pos
        return len(self.source[:pos].encode("utf-8"))

    def span(self, start: int, end: int) -> Span:
        lo, hi = 0, len(self.line_starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self.line_starts[mid] <= start:
                lo = mid
            else:
                hi = mid - 1
        return Span(lo + 1, start - self.line_starts[lo] + 1, self.byte(start), self.byte(end))


def tokenize(source: str) -> list[Token]:
    offs = _Offsets(source)
    tokens: list[Token] = []
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            i += 1
            continue
        if source.startswith("//", i):
            j = source.find("\n", i)
            i = n if j < 0 else j + 1
            continue
        if source.startswith("/*", i):
            j = source.find("*/", i + 2)
            if j < 0:
                raise ParseError("unterminated comment", offs.span(i, n))
            i = j + 2
            continue
        start = i
        if ch.isalpha() or ch == "_":
            while i < n and (source[i].isalnum() or source[i] == "_"):
                i += 1
            word = source[start:i]
            kind = "keyword" if word in KEYWORDS else "ident"
            tokens.append(Token(kind, word, word, offs.span(start, i)))
            continue
        if ch.isdigit():
            tokens.append(_number(source, i, offs))
            i = start + len(tokens[-1].text)
            continue
        if ch == '"':
            i += 1
            chars = []
            while True:
                if i >= n or source[i] == "\n":
                    raise ParseError("unterminated string literal", offs.span(start, i))
                c = source[i]
                if c == '"':
                    i += 1
                    break
                if c == "\\":
                    if i + 1 >= n or source[i + 1] not in _ESCAPES:
                        raise ParseError("illegal escape character", offs.span(i, i + 2))
                    chars.append(_ESCAPES[source[i + 1]])
                    i += 2
                    continue
                chars.append(c)
                i += 1
            tokens.append(Token("string", source[start:i], "".join(chars), offs.span(start, i)))
            continue
        for op in OPERATORS:
            if source.startswith(op, i):
                i += len(op)
                tokens.append(Token("op", op, op, offs.span(start, i)))
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", offs.span(i, i + 1))
    tokens.append(Token("eof", "", None, offs.span(n, n)))
    return tokens


def _number(source: str, i: int, offs: _Offsets) -> Token:
    n = len(source)
    start = i
    while i < n and source[i].isdigit():
        i += 1
    is_real = False
    if i + 1 < n and source[i] == "." and source[i + 1].isdigit():
        is_real = True
        i += 1
        while i < n and source[i].isdigit():
            i += 1
    if i < n and source[i] in "eE":
        j = i + 1
        if j < n and source[j] in "+-":
            j += 1
        if j < n and source[j].isdigit():
            is_real = True
            i = j
            while i < n and source[i].isdigit():
                i += 1
    text = source[start:i]
    if i < n and source[i] in "fF":
        i += 1
        return Token("float", source[start:i], float(text), offs.span(start, i))
    if not is_real and i < n and source[i] in "lL":
        i += 1
        return Token("long", source[start:i], int(text), offs.span(start, i))
    if is_real:
        return Token("double", text, float(text), offs.span(start, i))
    return Token("int", text, int(text), offs.span(start, i))
