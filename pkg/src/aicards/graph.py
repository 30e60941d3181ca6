"""In-memory triple graph: terms, set semantics, indexed pattern matching, merge.

A Graph is an immutable value; ``insert``/``remove``/``merge`` return new
graphs. Three hash indexes (subject, predicate, object) back pattern
matching; the index with the smallest posting list among the bound
positions is scanned.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Optional, Union

from aicards.errors import AICardsError

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
XSD_NS = "http://www.w3.org/2001/XMLSchema#"
RDF_TYPE = RDF_NS + "type"
RDF_LANG_STRING = RDF_NS + "langString"
XSD_STRING = XSD_NS + "string"
XSD_INTEGER = XSD_NS + "integer"
XSD_DECIMAL = XSD_NS + "decimal"
XSD_BOOLEAN = XSD_NS + "boolean"
XSD_DATE = XSD_NS + "date"

# Absolute IRI means "has a scheme": letter followed by letters/digits/+/-/. then ':'
_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")
_VAR_NAME_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_LANGTAG_RE = re.compile(r"^[A-Za-z]+(-[A-Za-z0-9]+)*$")


class MalformedTermError(AICardsError):
    """A term violates its structural invariants (relative IRI, literal in a
    subject/predicate slot, bad language tag pairing, ...)."""


class PrefixConflictWarning(UserWarning):
    """Two merged graphs bind the same prefix label to different namespaces."""


@dataclass(frozen=True, slots=True)
class Iri:
    value: str

    def __post_init__(self) -> None:
        if not _SCHEME_RE.match(self.value):
            raise MalformedTermError(f"not an absolute IRI (no scheme): {self.value!r}")

    def __repr__(self) -> str:
        return f"Iri({self.value!r})"


@dataclass(frozen=True, slots=True)
class Literal:
    lexical: str
    datatype: str = XSD_STRING
    language: Optional[str] = None

    def __post_init__(self) -> None:
        # Convenience: Literal("x", language="en") implies the language-string datatype.
        if self.language is not None and self.datatype == XSD_STRING:
            object.__setattr__(self, "datatype", RDF_LANG_STRING)
        if (self.language is not None) != (self.datatype == RDF_LANG_STRING):
            raise MalformedTermError(
                "language tag present iff datatype is the language-string datatype"
            )
        if self.language is not None and not _LANGTAG_RE.match(self.language):
            raise MalformedTermError(f"bad language tag: {self.language!r}")

    def __repr__(self) -> str:
        return f"Literal({n3(self)})"


@dataclass(frozen=True, slots=True)
class BlankNode:
    label: str

    def __post_init__(self) -> None:
        if not self.label:
            raise MalformedTermError("blank node label must be nonempty")

    def __repr__(self) -> str:
        return f"BlankNode({self.label!r})"


Term = Union[Iri, Literal, BlankNode]

_ESCAPES = {"\\": "\\\\", '"': '\\"', "\n": "\\n", "\r": "\\r", "\t": "\\t"}


def _escape_lexical(text: str) -> str:
    out = []
    for ch in text:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def n3(term: Term) -> str:
    """Canonical single-line serialization of a term, used for ordering and messages."""
    if isinstance(term, Iri):
        return f"<{term.value}>"
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    if isinstance(term, Literal):
        body = f'"{_escape_lexical(term.lexical)}"'
        if term.language is not None:
            return f"{body}@{term.language}"
        if term.datatype == XSD_STRING:
            return body
        return f"{body}^^<{term.datatype}>"
    raise TypeError(f"not a term: {term!r}")


def term_sort_key(term: Term) -> tuple[int, str]:
    """IRIs before blank nodes before literals, lexicographic within each kind."""
    if isinstance(term, Iri):
        return (0, term.value)
    if isinstance(term, BlankNode):
        return (1, term.label)
    return (2, n3(term))


@dataclass(frozen=True, slots=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self) -> None:
        if not isinstance(self.subject, (Iri, BlankNode)):
            raise MalformedTermError(f"subject must be an IRI or blank node: {self.subject!r}")
        if not isinstance(self.predicate, Iri):
            raise MalformedTermError(f"predicate must be an IRI: {self.predicate!r}")
        if not isinstance(self.object, (Iri, Literal, BlankNode)):
            raise MalformedTermError(f"object is not a term: {self.object!r}")

    def sort_key(self) -> tuple:
        return (
            term_sort_key(self.subject),
            term_sort_key(self.predicate),
            term_sort_key(self.object),
        )

    def __repr__(self) -> str:
        return f"Triple({n3(self.subject)} {n3(self.predicate)} {n3(self.object)})"


@dataclass(frozen=True, slots=True)
class Variable:
    name: str

    def __post_init__(self) -> None:
        if not _VAR_NAME_RE.match(self.name):
            raise MalformedTermError(f"invalid variable name: {self.name!r}")

    def __repr__(self) -> str:
        return f"Variable(?{self.name})"


PatternTerm = Union[Term, Variable]


@dataclass(frozen=True, slots=True)
class TriplePattern:
    subject: PatternTerm
    predicate: PatternTerm
    object: PatternTerm

    def variables(self) -> set[str]:
        return {t.name for t in (self.subject, self.predicate, self.object) if isinstance(t, Variable)}

    def is_concrete(self) -> bool:
        return not self.variables()


def _match_one(pattern: TriplePattern, triple: Triple) -> bool:
    """True if the triple unifies with the pattern (repeated variables must agree)."""
    bindings: dict[str, Term] = {}
    for pt, ct in (
        (pattern.subject, triple.subject),
        (pattern.predicate, triple.predicate),
        (pattern.object, triple.object),
    ):
        if isinstance(pt, Variable):
            bound = bindings.get(pt.name)
            if bound is None:
                bindings[pt.name] = ct
            elif bound != ct:
                return False
        elif pt != ct:
            return False
    return True


class Graph:
    """Immutable set of triples plus a prefix map."""

    __slots__ = ("_triples", "_by_s", "_by_p", "_by_o", "_prefixes")

    def __init__(
        self,
        triples: Iterable[Triple] = (),
        prefixes: Optional[Mapping[str, str]] = None,
    ):
        tset = frozenset(triples)
        by_s: dict[Term, set[Triple]] = {}
        by_p: dict[Term, set[Triple]] = {}
        by_o: dict[Term, set[Triple]] = {}
        for t in tset:
            by_s.setdefault(t.subject, set()).add(t)
            by_p.setdefault(t.predicate, set()).add(t)
            by_o.setdefault(t.object, set()).add(t)
        self._triples = tset
        self._by_s = by_s
        self._by_p = by_p
        self._by_o = by_o
        self._prefixes = dict(prefixes or {})

    @property
    def triples(self) -> frozenset[Triple]:
        return self._triples

    @property
    def prefixes(self) -> Mapping[str, str]:
        return MappingProxyType(self._prefixes)

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._triples

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._triples == other._triples and self._prefixes == other._prefixes

    def __hash__(self) -> int:
        return hash(self._triples)

    def __repr__(self) -> str:
        return f"Graph({len(self._triples)} triples, {len(self._prefixes)} prefixes)"

    def _replace(self, triples: frozenset[Triple]) -> "Graph":
        g = Graph.__new__(Graph)
        by_s: dict[Term, set[Triple]] = {}
        by_p: dict[Term, set[Triple]] = {}
        by_o: dict[Term, set[Triple]] = {}
        for t in triples:
            by_s.setdefault(t.subject, set()).add(t)
            by_p.setdefault(t.predicate, set()).add(t)
            by_o.setdefault(t.object, set()).add(t)
        g._triples = triples
        g._by_s = by_s
        g._by_p = by_p
        g._by_o = by_o
        g._prefixes = dict(self._prefixes)
        return g

    def insert(self, triple: Triple) -> "Graph":
        if not isinstance(triple, Triple):
            raise MalformedTermError(f"not a triple: {triple!r}")
        if triple in self._triples:
            return self
        return self._replace(self._triples | {triple})

    def remove(self, triple: Triple) -> "Graph":
        if triple not in self._triples:
            return self
        return self._replace(self._triples - {triple})

    def insert_all(self, triples: Iterable[Triple]) -> "Graph":
        new = self._triples | frozenset(triples)
        return self if new == self._triples else self._replace(new)

    def remove_all(self, triples: Iterable[Triple]) -> "Graph":
        new = self._triples - frozenset(triples)
        return self if new == self._triples else self._replace(new)

    def with_prefix(self, label: str, namespace: str) -> "Graph":
        g = self._replace(self._triples)
        g._prefixes[label] = namespace
        return g

    def with_prefixes(self, prefixes: Mapping[str, str]) -> "Graph":
        g = self._replace(self._triples)
        g._prefixes.update(prefixes)
        return g

    def _candidates(self, pattern: TriplePattern) -> Iterable[Triple]:
        posting: Optional[set[Triple]] = None
        for pt, index in (
            (pattern.subject, self._by_s),
            (pattern.predicate, self._by_p),
            (pattern.object, self._by_o),
        ):
            if isinstance(pt, Variable):
                continue
            bucket = index.get(pt)
            if bucket is None:
                return ()
            if posting is None or len(bucket) < len(posting):
                posting = bucket
        return self._triples if posting is None else posting

    def match(self, pattern: TriplePattern) -> list[Triple]:
        """All triples unifying with the pattern, in canonical order."""
        found = [t for t in self._candidates(pattern) if _match_one(pattern, t)]
        found.sort(key=Triple.sort_key)
        return found

    def objects(self, subject: Term, predicate: Term) -> list[Term]:
        """Objects of (subject, predicate, ?), in canonical order."""
        hits = self.match(TriplePattern(subject, predicate, Variable("o")))
        return [t.object for t in hits]

    def value(self, subject: Term, predicate: Term) -> Optional[Term]:
        """The single object of (subject, predicate, ?), or None; first in canonical order if several."""
        objs = self.objects(subject, predicate)
        return objs[0] if objs else None

    def subjects(self, predicate: Term, obj: Term) -> list[Term]:
        """Subjects of (?, predicate, object), in canonical order."""
        hits = self.match(TriplePattern(Variable("s"), predicate, obj))
        return [t.subject for t in hits]

    def blank_labels(self) -> set[str]:
        labels = set()
        for t in self._triples:
            for term in (t.subject, t.object):
                if isinstance(term, BlankNode):
                    labels.add(term.label)
        return labels

    def merge(self, other: "Graph") -> "Graph":
        """Union of both graphs after renaming colliding blank-node labels in `other`.

        Blank nodes from `other` whose labels also occur here are renamed to
        fresh counter-based labels (m0, m1, ...) so nodes from different
        documents never fuse. Prefixes are merged; on a conflicting label this
        graph's binding wins and a PrefixConflictWarning is emitted.
        """
        mine = self.blank_labels()
        theirs = other.blank_labels()
        used = mine | theirs
        mapping: dict[str, str] = {}
        counter = 0
        for label in sorted(mine & theirs):
            while f"m{counter}" in used:
                counter += 1
            mapping[label] = f"m{counter}"
            used.add(f"m{counter}")

        def rename(term: Term) -> Term:
            if isinstance(term, BlankNode) and term.label in mapping:
                return BlankNode(mapping[term.label])
            return term

        renamed = (
            other._triples
            if not mapping
            else {Triple(rename(t.subject), t.predicate, rename(t.object)) for t in other._triples}
        )
        prefixes = dict(self._prefixes)
        for label, ns in other._prefixes.items():
            if label in prefixes and prefixes[label] != ns:
                warnings.warn(
                    f"prefix {label!r} bound to both <{prefixes[label]}> and <{ns}>; keeping the former",
                    PrefixConflictWarning,
                    stacklevel=2,
                )
            else:
                prefixes[label] = ns
        return Graph(self._triples | frozenset(renamed), prefixes)
