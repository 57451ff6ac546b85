"""Syllogistic statements, tasks and their plain-text syntax.

Task text has one statement per line, ``<mood> <subject> <object>`` with mood
one of ``all``, ``some``, ``no``, ``some-not``; the conclusion line is
prefixed with ``therefore:``.  Blank lines and ``#`` comments are ignored.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import ParseError


class Mood(str, Enum):
    All = "all"
    Some = "some"
    No = "no"
    SomeNot = "some-not"


_NEGATED = {Mood.All: Mood.SomeNot, Mood.SomeNot: Mood.All, Mood.No: Mood.Some, Mood.Some: Mood.No}
SYMMETRIC_MOODS = frozenset({Mood.Some, Mood.No})


def norm_term(term: str) -> str:
    """Terms are compared case-insensitively after trimming."""
    t = str(term).strip().casefold()
    if not t:
        raise ValueError("empty term")
    return t


@dataclass(frozen=True)
class Statement:
    mood: Mood
    subject: str
    object: str

    def __post_init__(self):
        object.__setattr__(self, "mood", Mood(self.mood))
        object.__setattr__(self, "subject", norm_term(self.subject))
        object.__setattr__(self, "object", norm_term(self.object))
        if self.subject == self.object:
            raise ValueError(f"statement relates {self.subject!r} to itself")

    @property
    def terms(self) -> tuple[str, str]:
        return self.subject, self.object

    def negate(self) -> "Statement":
        return Statement(_NEGATED[self.mood], self.subject, self.object)

    def to_text(self) -> str:
        return f"{self.mood.value} {self.subject} {self.object}"

    def __str__(self):
        words = {
            Mood.All: "all {} are {}", Mood.Some: "some {} are {}",
            Mood.No: "no {} are {}", Mood.SomeNot: "some {} are not {}",
        }
        return words[self.mood].format(self.subject, self.object)


def negate(s: Statement) -> Statement:
    """All <-> some-not, no <-> some; terms unchanged."""
    return s.negate()


@dataclass(frozen=True)
class Task:
    """Premises forming a chain X1..XN plus a conclusion about (X1, XN)."""

    premises: tuple
    conclusion: Statement

    def __post_init__(self):
        object.__setattr__(self, "premises", tuple(self.premises))
        self.chain_terms()  # validates

    def chain_terms(self) -> list[str]:
        """The chain X1..XN running from the conclusion's subject to its object.

        Premises may be listed in any order; together they must form a simple
        path between the two conclusion terms.
        """
        return self._walk()[0]

    def ordered_premises(self) -> list[Statement]:
        """Premises sorted along the chain, premise i relating X_i and X_i+1."""
        return self._walk()[1]

    def _walk(self):
        ps = list(self.premises)
        if not ps:
            raise ValueError("a task needs at least one premise")
        c = self.conclusion
        chain, ordered = [c.subject], []
        remaining = ps
        while remaining:
            here = chain[-1]
            nxt = [p for p in remaining if here in p.terms]
            if len(nxt) != 1:
                raise ValueError(f"premises do not form a chain at term {here!r}")
            p = nxt[0]
            remaining = [q for q in remaining if q is not p]
            other = p.object if p.subject == here else p.subject
            if other in chain:
                raise ValueError(f"term {other!r} repeats in the chain")
            chain.append(other)
            ordered.append(p)
        if chain[-1] != c.object:
            raise ValueError("the conclusion must relate the first and last chain terms")
        return chain, ordered

    def to_text(self) -> str:
        lines = [p.to_text() for p in self.premises]
        lines.append("therefore: " + self.conclusion.to_text())
        return "\n".join(lines) + "\n"


_MOOD_WORDS = {"all": Mood.All, "some": Mood.Some, "no": Mood.No, "some-not": Mood.SomeNot}


def parse_statement(line: str, offset: int = 0) -> Statement:
    parts = line.split()
    if len(parts) != 3:
        raise ParseError(f"expected '<mood> <term> <term>', got {line.strip()!r}", offset)
    mood = _MOOD_WORDS.get(parts[0].casefold())
    if mood is None:
        raise ParseError(f"unknown mood {parts[0]!r}", offset)
    try:
        return Statement(mood, parts[1], parts[2])
    except ValueError as exc:
        raise ParseError(str(exc), offset) from None


def parse_statements(text: str) -> tuple[list[Statement], Statement | None]:
    """Parse statement lines; returns (premises, conclusion or None)."""
    premises: list[Statement] = []
    conclusion = None
    offset = 0
    for raw in text.splitlines(keepends=True):
        line = raw.split("#", 1)[0].strip()
        if line:
            if line.casefold().startswith("therefore:"):
                if conclusion is not None:
                    raise ParseError("more than one conclusion", offset)
                body = line[len("therefore:"):]
                conclusion = parse_statement(body, offset + raw.find(":") + 1)
            else:
                if conclusion is not None:
                    raise ParseError("premise after the conclusion", offset)
                premises.append(parse_statement(line, offset + (len(raw) - len(raw.lstrip()))))
        offset += len(raw.encode())
    return premises, conclusion


def parse_task(text: str) -> Task:
    premises, conclusion = parse_statements(text)
    if conclusion is None:
        raise ParseError("missing 'therefore:' conclusion line", len(text.encode()))
    try:
        return Task(tuple(premises), conclusion)
    except ValueError as exc:
        raise ParseError(str(exc), 0) from None
