"""Turtle-subset reader and canonical writer.

Supported productions: ``@prefix`` directives, subject-predicate-object
statements with ``;`` and ``,`` lists, the ``a`` keyword, prefixed names,
absolute ``<IRI>`` refs, string literals with ``^^`` datatype or ``@`` tag,
integer/decimal/boolean shorthand, labeled blank nodes, and ``#`` comments.
Collections, anonymous blank nodes, and multi-line strings are rejected
with a positioned error.

The writer emits one canonical form: prefixes sorted by label, subjects by
canonical term order, predicates and objects sorted within their group.
Serializing the same graph twice is byte-identical, and the output parses
back to a graph isomorphic to the input.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

from aicards.errors import AICardsError
from aicards.graph import (
    RDF_TYPE,
    XSD_BOOLEAN,
    XSD_DECIMAL,
    XSD_INTEGER,
    XSD_STRING,
    BlankNode,
    Graph,
    Iri,
    Literal,
    MalformedTermError,
    Term,
    Triple,
    term_sort_key,
)

PREFIX_LABEL_RE = re.compile(r"^[A-Za-z][A-Za-z0-9_-]*$|^$")
LOCAL_RE = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_-]*$|^$")
BLANK_LABEL_RE = re.compile(r"^[A-Za-z0-9_][A-Za-z0-9_-]*$")
LANGTAG_RE = re.compile(r"^[A-Za-z]+(-[A-Za-z0-9]+)*$")
INTEGER_RE = re.compile(r"^[+-]?[0-9]+$")
DECIMAL_RE = re.compile(r"^[+-]?[0-9]*\.[0-9]+$")

_IRI_UNSAFE = set(' <>"{}|^`\\')


class TurtleParseError(AICardsError):
    """Syntax error with 1-based line and column."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class UndefinedPrefixError(TurtleParseError):
    def __init__(self, prefix: str, line: int, column: int):
        super().__init__(f"undefined prefix {prefix + ':'!r}", line, column)
        self.prefix = prefix


class RelativeIriError(TurtleParseError):
    def __init__(self, iri: str, line: int, column: int):
        super().__init__(f"relative IRI not allowed: <{iri}>", line, column)
        self.iri = iri


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    value: str
    line: int
    column: int


_PUNCT = {
    ".": "dot",
    ";": "semi",
    ",": "comma",
    "{": "lbrace",
    "}": "rbrace",
    "(": "lparen",
    ")": "rparen",
    "[": "lbracket",
    "]": "rbracket",
    "=": "eq",
}

_STRING_ESCAPES = {
    "t": "\t",
    "b": "\b",
    "n": "\n",
    "r": "\r",
    "f": "\f",
    '"': '"',
    "'": "'",
    "\\": "\\",
}


def tokenize(text: str) -> list[Token]:
    """Shared lexer for the Turtle subset and the query mini-language."""
    out: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    if text.startswith("﻿"):
        i, col = 1, 2

    def err(message: str, eline: Optional[int] = None, ecol: Optional[int] = None) -> TurtleParseError:
        return TurtleParseError(message, eline if eline is not None else line, ecol if ecol is not None else col)

    def read_unicode_escape(j: int, width: int) -> tuple[str, int]:
        hexdigits = text[j : j + width]
        if len(hexdigits) < width or any(c not in "0123456789abcdefABCDEF" for c in hexdigits):
            raise err(f"bad \\{'u' if width == 4 else 'U'} escape")
        code = int(hexdigits, 16)
        try:
            return chr(code), j + width
        except ValueError:
            raise err("escape out of unicode range") from None

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        tline, tcol = line, col

        if ch == "<":
            j = i + 1
            buf: list[str] = []
            while True:
                if j >= n or text[j] == "\n":
                    raise err("unterminated IRI", tline, tcol)
                c = text[j]
                if c == ">":
                    j += 1
                    break
                if c == "\\":
                    esc = text[j + 1 : j + 2]
                    if esc == "u":
                        decoded, j2 = read_unicode_escape(j + 2, 4)
                    elif esc == "U":
                        decoded, j2 = read_unicode_escape(j + 2, 8)
                    else:
                        raise err(f"bad escape in IRI: \\{esc}", tline, tcol)
                    buf.append(decoded)
                    j = j2
                    continue
                if c in _IRI_UNSAFE or ord(c) < 0x20:
                    raise err(f"character not allowed in IRI: {c!r}", tline, tcol)
                buf.append(c)
                j += 1
            out.append(Token("iriref", "".join(buf), tline, tcol))
            col += j - i
            i = j
            continue

        if ch == '"':
            if text[i : i + 3] == '"""':
                raise err("multi-line strings are not supported", tline, tcol)
            j = i + 1
            buf = []
            while True:
                if j >= n or text[j] == "\n":
                    raise err("unterminated string", tline, tcol)
                c = text[j]
                if c == '"':
                    j += 1
                    break
                if c == "\\":
                    esc = text[j + 1 : j + 2]
                    if esc in _STRING_ESCAPES:
                        buf.append(_STRING_ESCAPES[esc])
                        j += 2
                        continue
                    if esc == "u":
                        decoded, j = read_unicode_escape(j + 2, 4)
                        buf.append(decoded)
                        continue
                    if esc == "U":
                        decoded, j = read_unicode_escape(j + 2, 8)
                        buf.append(decoded)
                        continue
                    raise err(f"bad string escape: \\{esc}", tline, tcol)
                buf.append(c)
                j += 1
            out.append(Token("string", "".join(buf), tline, tcol))
            col += j - i
            i = j
            continue

        if ch == "@":
            m = re.match(r"[A-Za-z]+(-[A-Za-z0-9]+)*", text[i + 1 :])
            if not m:
                raise err("expected directive or language tag after '@'", tline, tcol)
            word = m.group(0)
            out.append(Token("atword", word, tline, tcol))
            i += 1 + len(word)
            col += 1 + len(word)
            continue

        if ch == "^":
            if text[i : i + 2] != "^^":
                raise err("expected '^^'", tline, tcol)
            out.append(Token("dcaret", "^^", tline, tcol))
            i += 2
            col += 2
            continue

        if ch == "_":
            if text[i : i + 2] != "_:":
                raise err("expected '_:' blank node label", tline, tcol)
            m = re.match(r"[A-Za-z0-9_][A-Za-z0-9_-]*", text[i + 2 :])
            if not m:
                raise err("bad blank node label", tline, tcol)
            out.append(Token("blank", m.group(0), tline, tcol))
            i += 2 + m.end()
            col += 2 + m.end()
            continue

        if ch == "?":
            m = re.match(r"[A-Za-z_][A-Za-z0-9_]*", text[i + 1 :])
            if not m:
                raise err("bad variable name", tline, tcol)
            out.append(Token("var", m.group(0), tline, tcol))
            i += 1 + m.end()
            col += 1 + m.end()
            continue

        if ch == "!":
            if text[i : i + 2] != "!=":
                raise err("expected '!='", tline, tcol)
            out.append(Token("neq", "!=", tline, tcol))
            i += 2
            col += 2
            continue

        if ch.isdigit() or ch in "+-" or ch == ".":
            m = re.match(r"[+-]?([0-9]*\.[0-9]+|[0-9]+)", text[i:])
            if m:
                value = m.group(0)
                kind = "decimal" if "." in value else "integer"
                out.append(Token(kind, value, tline, tcol))
                i += m.end()
                col += m.end()
                continue
            if ch == ".":
                out.append(Token("dot", ".", tline, tcol))
                i += 1
                col += 1
                continue
            raise err(f"unexpected character {ch!r}", tline, tcol)

        if ch in _PUNCT:
            out.append(Token(_PUNCT[ch], ch, tline, tcol))
            i += 1
            col += 1
            continue

        if ch == ":" or ch.isalpha():
            m = re.match(r"([A-Za-z][A-Za-z0-9_-]*)?:([A-Za-z0-9_][A-Za-z0-9_-]*)?", text[i:])
            if m and m.group(0) and ":" in m.group(0):
                prefix = m.group(1) or ""
                local = m.group(2) or ""
                out.append(Token("pname", f"{prefix}:{local}", tline, tcol))
                i += m.end()
                col += m.end()
                continue
            m = re.match(r"[A-Za-z][A-Za-z0-9_-]*", text[i:])
            if m:
                out.append(Token("word", m.group(0), tline, tcol))
                i += m.end()
                col += m.end()
                continue

        raise err(f"unexpected character {ch!r}", tline, tcol)

    out.append(Token("eof", "", line, col))
    return out


class _TurtleParser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.prefixes: dict[str, str] = {}
        self.triples: list[Triple] = []

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message: str, tok: Optional[Token] = None) -> TurtleParseError:
        tok = tok or self.peek()
        return TurtleParseError(message, tok.line, tok.column)

    def expect(self, kind: str, what: str) -> Token:
        tok = self.next()
        if tok.kind != kind:
            raise self.fail(f"expected {what}, got {tok.value!r}" if tok.kind != "eof" else f"expected {what}, got end of input", tok)
        return tok

    def parse(self) -> Graph:
        while True:
            tok = self.peek()
            if tok.kind == "eof":
                break
            if tok.kind == "atword":
                self.parse_directive()
            else:
                self.parse_statement()
        return Graph(self.triples, self.prefixes)

    def parse_directive(self) -> None:
        tok = self.next()
        if tok.value != "prefix":
            raise self.fail(f"unsupported directive '@{tok.value}'", tok)
        name = self.next()
        if name.kind != "pname" or not name.value.endswith(":"):
            raise self.fail("expected prefix label ending in ':'", name)
        label = name.value[:-1]
        iri = self.expect("iriref", "namespace IRI")
        _require_absolute(iri)
        self.expect("dot", "'.'")
        self.prefixes[label] = iri.value

    def resolve_pname(self, tok: Token) -> Iri:
        prefix, _, local = tok.value.partition(":")
        if prefix not in self.prefixes:
            raise UndefinedPrefixError(prefix, tok.line, tok.column)
        return Iri(self.prefixes[prefix] + local)

    def parse_subject(self) -> Union[Iri, BlankNode]:
        tok = self.next()
        if tok.kind == "iriref":
            _require_absolute(tok)
            return Iri(tok.value)
        if tok.kind == "pname":
            return self.resolve_pname(tok)
        if tok.kind == "blank":
            return BlankNode(tok.value)
        if tok.kind == "lbracket":
            raise self.fail("anonymous blank nodes are not supported", tok)
        if tok.kind == "lparen":
            raise self.fail("collections are not supported", tok)
        if tok.kind in ("string", "integer", "decimal"):
            raise self.fail("literal not allowed as subject", tok)
        raise self.fail(f"expected subject, got {tok.value!r}" if tok.kind != "eof" else "expected subject, got end of input", tok)

    def parse_predicate(self) -> Iri:
        tok = self.next()
        if tok.kind == "iriref":
            _require_absolute(tok)
            return Iri(tok.value)
        if tok.kind == "pname":
            return self.resolve_pname(tok)
        if tok.kind == "word" and tok.value == "a":
            return Iri(RDF_TYPE)
        if tok.kind == "blank":
            raise self.fail("blank node not allowed as predicate", tok)
        if tok.kind in ("string", "integer", "decimal"):
            raise self.fail("literal not allowed as predicate", tok)
        raise self.fail(f"expected predicate, got {tok.value!r}" if tok.kind != "eof" else "expected predicate, got end of input", tok)

    def parse_object(self) -> Term:
        tok = self.next()
        if tok.kind == "iriref":
            _require_absolute(tok)
            return Iri(tok.value)
        if tok.kind == "pname":
            return self.resolve_pname(tok)
        if tok.kind == "blank":
            return BlankNode(tok.value)
        if tok.kind == "integer":
            return Literal(tok.value, XSD_INTEGER)
        if tok.kind == "decimal":
            return Literal(tok.value, XSD_DECIMAL)
        if tok.kind == "word" and tok.value in ("true", "false"):
            return Literal(tok.value, XSD_BOOLEAN)
        if tok.kind == "string":
            nxt = self.peek()
            if nxt.kind == "atword":
                self.next()
                if not LANGTAG_RE.match(nxt.value):
                    raise self.fail(f"bad language tag '@{nxt.value}'", nxt)
                return Literal(tok.value, language=nxt.value)
            if nxt.kind == "dcaret":
                self.next()
                dt = self.next()
                if dt.kind == "iriref":
                    _require_absolute(dt)
                    return _typed_literal(tok.value, dt.value, dt)
                if dt.kind == "pname":
                    return _typed_literal(tok.value, self.resolve_pname(dt).value, dt)
                raise self.fail("expected datatype IRI after '^^'", dt)
            return Literal(tok.value)
        if tok.kind == "lbracket":
            raise self.fail("anonymous blank nodes are not supported", tok)
        if tok.kind == "lparen":
            raise self.fail("collections are not supported", tok)
        raise self.fail(f"expected object, got {tok.value!r}" if tok.kind != "eof" else "expected object, got end of input", tok)

    def parse_statement(self) -> None:
        subject = self.parse_subject()
        while True:
            predicate = self.parse_predicate()
            while True:
                obj = self.parse_object()
                self.triples.append(Triple(subject, predicate, obj))
                if self.peek().kind == "comma":
                    self.next()
                    continue
                break
            tok = self.next()
            if tok.kind == "semi":
                # trailing ';' before '.' is legal
                if self.peek().kind == "dot":
                    self.next()
                    return
                continue
            if tok.kind == "dot":
                return
            raise self.fail(f"expected '.', ';' or ',', got {tok.value!r}" if tok.kind != "eof" else "expected '.', got end of input", tok)


def _require_absolute(tok: Token) -> None:
    try:
        Iri(tok.value)
    except MalformedTermError:
        raise RelativeIriError(tok.value, tok.line, tok.column) from None


def _typed_literal(lexical: str, datatype: str, tok: Token) -> Literal:
    if datatype == RDF_TYPE:  # unreachable guard; kept for symmetry
        raise TurtleParseError("rdf:type is not a datatype", tok.line, tok.column)
    try:
        return Literal(lexical, datatype)
    except MalformedTermError as exc:
        raise TurtleParseError(str(exc), tok.line, tok.column) from None


def parse_turtle(text: Union[str, bytes]) -> Graph:
    """Parse a Turtle-subset document into a Graph.

    Accepts str or UTF-8 bytes. Every failure raises TurtleParseError (or a
    subclass) carrying line and column.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            prefix = text[: exc.start].decode("utf-8", errors="replace")
            line = prefix.count("\n") + 1
            col = len(prefix) - (prefix.rfind("\n") + 1) + 1
            raise TurtleParseError("invalid UTF-8", line, col) from None
    return _TurtleParser(tokenize(text)).parse()


# --- canonical writer ---------------------------------------------------


def _write_iri(value: str) -> str:
    out = []
    for ch in value:
        if ch in _IRI_UNSAFE or ord(ch) < 0x20:
            code = ord(ch)
            out.append(f"\\u{code:04X}" if code <= 0xFFFF else f"\\U{code:08X}")
        else:
            out.append(ch)
    return f"<{''.join(out)}>"


class _Compactor:
    def __init__(self, prefixes: dict[str, str]):
        # longest namespace wins; ties break on label so output is stable
        usable = [(label, ns) for label, ns in prefixes.items() if PREFIX_LABEL_RE.match(label) and ns]
        self.by_length = sorted(usable, key=lambda kv: (-len(kv[1]), kv[0]))
        self.used_labels = sorted(label for label, _ in usable)
        self.namespaces = {label: ns for label, ns in usable}

    def term(self, term: Term, rename: dict[str, str]) -> str:
        if isinstance(term, Iri):
            if term.value == RDF_TYPE:
                return "a"
            for label, ns in self.by_length:
                if term.value.startswith(ns) and LOCAL_RE.match(term.value[len(ns):]):
                    return f"{label}:{term.value[len(ns):]}"
            return _write_iri(term.value)
        if isinstance(term, BlankNode):
            return f"_:{rename.get(term.label, term.label)}"
        body = f'"{_escape_string(term.lexical)}"'
        if term.language is not None:
            return f"{body}@{term.language}"
        if term.datatype == XSD_STRING:
            return body
        if term.datatype == XSD_INTEGER and INTEGER_RE.match(term.lexical):
            return term.lexical
        if term.datatype == XSD_DECIMAL and DECIMAL_RE.match(term.lexical):
            return term.lexical
        if term.datatype == XSD_BOOLEAN and term.lexical in ("true", "false"):
            return term.lexical
        return f"{body}^^{self.term(Iri(term.datatype), rename)}"


def _escape_string(text: str) -> str:
    out = []
    for ch in text:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def _blank_renames(graph: Graph) -> dict[str, str]:
    """Deterministic fresh labels for blank labels the subset grammar cannot spell."""
    labels = graph.blank_labels()
    invalid = sorted(label for label in labels if not BLANK_LABEL_RE.match(label))
    if not invalid:
        return {}
    taken = {label for label in labels if BLANK_LABEL_RE.match(label)}
    rename: dict[str, str] = {}
    counter = 0
    for label in invalid:
        while f"r{counter}" in taken:
            counter += 1
        rename[label] = f"r{counter}"
        taken.add(f"r{counter}")
        counter += 1
    return rename


def serialize_turtle(graph: Graph) -> str:
    """Canonical Turtle-subset serialization; reparses to an isomorphic graph."""
    compactor = _Compactor(dict(graph.prefixes))
    rename = _blank_renames(graph)
    lines = [
        f"@prefix {label}: {_write_iri(compactor.namespaces[label])} ."
        for label in compactor.used_labels
    ]

    by_subject: dict[Term, dict[Term, list[Term]]] = {}
    for t in graph.triples:
        by_subject.setdefault(t.subject, {}).setdefault(t.predicate, []).append(t.object)

    body: list[str] = []
    for subject in sorted(by_subject, key=term_sort_key):
        stext = compactor.term(subject, rename)
        pred_lines = []
        preds = by_subject[subject]
        for predicate in sorted(preds, key=term_sort_key):
            objs = sorted(preds[predicate], key=term_sort_key)
            otext = ", ".join(compactor.term(o, rename) for o in objs)
            pred_lines.append(f"{compactor.term(predicate, rename)} {otext}")
        body.append(f"{stext} " + " ;\n    ".join(pred_lines) + " .")

    parts = []
    if lines:
        parts.append("\n".join(lines))
    if body:
        parts.append("\n".join(body))
    return "\n\n".join(parts) + ("\n" if parts else "")
