"""Checking circle-relation replies against syllogistic statements.

A reply either declines (``cannot``) or claims a configuration as triples
``(circle X, <verb>, circle Y)``.  ``check`` compares the decision with the
engine's own satisfiability verdict, tries to build the claimed
configuration, and records for every statement whether some claim explains
it.  ``classify_hallucination`` turns that report into one class, and
``feedback_line`` produces the correction line to append to a prompt.
"""
from __future__ import annotations

import json
import re
from collections import defaultdict, deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .config import OptimConfig
from .errors import ParseError
from .geometry import WITNESSES, BaseRel, TargetRel, holds, transpose
from .optimizer import coincided_spheres, realize
from .reasoner import Constraint, decide_satisfiability, sn
from .syllogism import Mood, Statement, norm_term, parse_statements

__all__ = [
    "VERBS", "Claim", "Decision", "Report", "HallucinationClass", "parse_reply",
    "construct_claims", "check", "classify_hallucination", "feedback_line",
    "parse_transcript", "verify_transcript",
]

# verb as written (lower case, single spaces) -> canonical verb
_VERB_FORMS = {
    "inside": "inside", "is inside": "inside", "inside of": "inside",
    "disconnects from": "disconnects-from", "disconnects": "disconnects-from",
    "disconnected from": "disconnects-from", "disconnecting from": "disconnects-from",
    "disconnects-from": "disconnects-from",
    "outside": "outside", "is outside": "outside", "outside of": "outside",
    "partially overlaps with": "partially-overlaps-with", "partially overlaps": "partially-overlaps-with",
    "partially overlapping with": "partially-overlaps-with", "overlaps": "partially-overlaps-with",
    "overlaps with": "partially-overlaps-with", "partially-overlaps-with": "partially-overlaps-with",
    "properly contains": "properly-contains", "properly-contains": "properly-contains",
    "contains": "properly-contains",
}

VERBS = {
    "inside": TargetRel.P,
    "disconnects-from": TargetRel.D,
    "outside": TargetRel.D,
    "partially-overlaps-with": TargetRel.PO,
    "properly-contains": TargetRel.Pbar,
}

# Relations of (X, Y) that explain a statement about (X, Y), as the prompt
# words them.
_STATEMENT_WITNESS = {
    Mood.All: frozenset({BaseRel.PP, BaseRel.EQ}),
    Mood.No: frozenset({BaseRel.D}),
    Mood.Some: frozenset({BaseRel.PP, BaseRel.EQ, BaseRel.PO, BaseRel.PPbar}),
    Mood.SomeNot: frozenset({BaseRel.D, BaseRel.PPbar, BaseRel.PO}),
}
_T = {BaseRel.PP: BaseRel.PPbar, BaseRel.PPbar: BaseRel.PP}


def _flip(rels) -> frozenset:
    return frozenset(_T.get(r, r) for r in rels)


@dataclass(frozen=True)
class Claim:
    subject: str
    verb: str
    object: str

    def __post_init__(self):
        if self.verb not in VERBS:
            raise ValueError(f"unknown verb {self.verb!r}")
        object.__setattr__(self, "subject", norm_term(self.subject))
        object.__setattr__(self, "object", norm_term(self.object))

    @property
    def relation(self) -> TargetRel:
        return VERBS[self.verb]

    def base_set(self) -> frozenset:
        """Base relations of (subject, object) the claim allows."""
        return WITNESSES[self.relation]

    def described_set(self) -> frozenset:
        """Base relations the verb describes; "properly contains" excludes
        coincidence."""
        if self.verb == "properly-contains":
            return frozenset({BaseRel.PPbar})
        return self.base_set()


@dataclass(frozen=True)
class Decision:
    """``yes`` with claims, or ``cannot``; ``fragment`` is the reply text the
    decision was read from, quoted verbatim in feedback."""

    answer: str  # "yes" or "cannot"
    claims: tuple = ()
    fragment: str = ""

    def __post_init__(self):
        if self.answer not in ("yes", "cannot"):
            raise ValueError("answer must be 'yes' or 'cannot'")
        if self.answer == "yes" and not self.claims:
            raise ValueError("a 'yes' decision carries at least one claim")
        if self.answer == "cannot" and self.claims:
            raise ValueError("a 'cannot' decision carries no claims")

    @property
    def says_satisfiable(self) -> bool:
        return self.answer == "yes"


_TRIPLE = re.compile(
    r"\(\s*circle\s+([^,()\s]+)\s*,\s*([^,()]*?)\s*,\s*circle\s+([^,()\s]+)\s*\)",
    re.IGNORECASE)
_CANNOT = re.compile(r"\bcannot\b", re.IGNORECASE)


def parse_reply(text: str) -> Decision:
    """Read a reply.  Triples anywhere in the text make it a ``yes``; only a
    reply without triples can be ``cannot``."""
    claims = []
    matches = list(_TRIPLE.finditer(text))
    for m in matches:
        verb = " ".join(m.group(2).casefold().split())
        canon = _VERB_FORMS.get(verb)
        if canon is None:
            offset = len(text[:m.start(2)].encode())
            raise ParseError(f"unrecognised relation {m.group(2)!r}", offset)
        claims.append(Claim(m.group(1), canon, m.group(3)))
    if claims:
        return Decision("yes", tuple(claims), text[matches[0].start():matches[-1].end()])
    m = _CANNOT.search(text)
    if m:
        return Decision("cannot", (), m.group(0))
    raise ParseError("reply has neither relation triples nor 'cannot'", 0)


# --------------------------------------------------------------------------
# Building a claimed configuration


class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        self.parent[self.find(a)] = self.find(b)


_BY_WITNESS = {v: k for k, v in WITNESSES.items()}


def construct_claims(claims: Sequence[Claim], cfg: OptimConfig = OptimConfig()) -> dict | None:
    """A configuration {term: Sphere} satisfying every claim, or None.

    Claims on the same pair are intersected.  A pair forced to coincide
    shares one sphere.  The remaining relation graph is built by the cycle
    decider when it has a cycle and by single-relation realisation along
    its tree edges.  Graphs with more than one independent cycle are not
    supported.
    """
    pair: dict = {}
    for c in claims:
        a, b, rels = c.subject, c.object, c.base_set()
        if a == b:
            if BaseRel.EQ not in rels:
                return None
            continue
        if a > b:
            a, b, rels = b, a, _flip(rels)
        pair[(a, b)] = pair.get((a, b), rels) & rels
    if any(not rels for rels in pair.values()):
        return None
    uf = _UnionFind()
    for (a, b), rels in pair.items():
        uf.find(a), uf.find(b)
        if rels == {BaseRel.EQ}:
            uf.union(a, b)
    merged: dict = {}
    for (a, b), rels in pair.items():
        ra, rb = uf.find(a), uf.find(b)
        if ra == rb:
            if BaseRel.EQ not in rels:
                return None
            continue
        if ra > rb:
            ra, rb, rels = rb, ra, _flip(rels)
        merged[(ra, rb)] = merged.get((ra, rb), rels) & rels
        if not merged[(ra, rb)]:
            return None
    edges = {}
    for (a, b), rels in merged.items():
        target = _BY_WITNESS.get(frozenset(rels))
        if target is None:
            raise ValueError(f"claims leave a relation set {sorted(r.value for r in rels)} "
                             "that no single target names")
        edges[(a, b)] = target
    nodes = sorted({uf.find(t) for c in claims for t in (c.subject, c.object)})
    spheres = _build_graph(nodes, edges, cfg)
    if spheres is None:
        return None
    config = {t: spheres[uf.find(t)] for c in claims for t in (c.subject, c.object)}
    if not all(holds(c.relation, config[c.subject], config[c.object]) for c in claims):
        return None
    return config


def _build_graph(nodes, edges, cfg) -> dict | None:
    adj = defaultdict(dict)
    for (a, b), t in edges.items():
        adj[a][b] = (t, True)
        adj[b][a] = (t, False)
    # peel leaves; whatever survives is the cycle part
    deg = {v: len(adj[v]) for v in nodes}
    core = set(nodes)
    queue = deque(v for v in nodes if deg[v] <= 1)
    while queue:
        v = queue.popleft()
        if v not in core:
            continue
        core.discard(v)
        for u in adj[v]:
            if u in core:
                deg[u] -= 1
                if deg[u] <= 1:
                    queue.append(u)
    placed: dict = {}
    if core:
        cyc = [Constraint(t, a, b) for (a, b), t in edges.items() if a in core and b in core]
        if len(cyc) != len(core):
            raise ValueError("claim graphs with more than one independent cycle are not supported")
        verdict, _ = sn(cyc, cfg)
        if not verdict.sat:
            return None
        placed.update(verdict.model)
    fresh = coincided_spheres(1, cfg)[0]

    def grow(frontier: deque) -> None:
        while frontier:
            v = frontier.popleft()
            for u, (t, forward) in adj[v].items():
                if u in placed:
                    continue
                # t relates (a, b) with a < b; orient it as target(u, v)
                target = transpose(t) if forward else t
                placed[u], _ = realize(target, fresh, placed[v], cfg)
                frontier.append(u)

    grow(deque(placed))
    for root in nodes:
        if root not in placed:
            placed[root] = fresh
            grow(deque([root]))
    return placed


# --------------------------------------------------------------------------
# Reports


class HallucinationClass(str, Enum):
    Correct = "Correct"
    H0 = "H0"
    H1 = "H1"
    H2 = "H2"
    IncorrectDecision = "IncorrectDecision"


@dataclass
class Report:
    """Outcome of checking one reply.

    ``coverage`` is order-strict: "all X are Y" is explained only by
    ``(circle X, inside, circle Y)``.  ``coverage_lenient`` also accepts a
    claim whose two circles are swapped.  The class is computed from the
    strict coverage; ``hallucination_class_lenient`` gives the other reading.
    """

    decision_matches_engine: bool
    claims_constructible: bool
    coverage: list = field(default_factory=list)  # [(statement text, status)]
    coverage_lenient: list = field(default_factory=list)
    engine_satisfiable: bool = False
    model: dict | None = field(default=None, repr=False)

    @property
    def hallucination_class(self) -> HallucinationClass:
        return _classify(self, self.coverage)

    @property
    def hallucination_class_lenient(self) -> HallucinationClass:
        return _classify(self, self.coverage_lenient)

    @property
    def correct(self) -> bool:
        return self.hallucination_class is HallucinationClass.Correct

    def to_dict(self, decision: Decision | None = None) -> dict:
        d = {
            "decisionMatchesEngine": self.decision_matches_engine,
            "claimsConstructible": self.claims_constructible,
            "coverage": [{"statement": s, "status": st} for s, st in self.coverage],
            "coverageLenient": [{"statement": s, "status": st} for s, st in self.coverage_lenient],
            "engineSatisfiable": self.engine_satisfiable,
            "class": self.hallucination_class.value,
            "classLenient": self.hallucination_class_lenient.value,
            "feedback": None,
        }
        if decision is not None and not self.correct:
            d["feedback"] = feedback_line(self, decision)
        return d


def _claim_rels_for(statement: Statement, claims: Sequence[Claim], lenient: bool) -> list:
    x, y = statement.subject, statement.object
    out = []
    for c in claims:
        if (c.subject, c.object) == (x, y):
            out.append(c.described_set())
        elif (c.subject, c.object) == (y, x):
            out.append(c.described_set() if lenient else _flip(c.described_set()))
    return out


def _coverage(statements, claims, lenient: bool) -> list:
    out = []
    for s in statements:
        rels = _claim_rels_for(s, claims, lenient)
        if not rels:
            status = "missing"
        elif any(r <= _STATEMENT_WITNESS[s.mood] for r in rels):
            status = "faithful"
        else:
            status = "mismatched"
        out.append((str(s), status))
    return out


def check(decision: Decision, statements: Sequence[Statement],
          cfg: OptimConfig = OptimConfig()) -> Report:
    """Compare a reply with the engine and with the statements it should explain.

    A ``cannot`` reply makes no claims, so its claim set is trivially
    constructible and it has no coverage entries.
    """
    statements = list(statements)
    engine_sat = decide_satisfiability(statements, cfg).sat
    matches = decision.says_satisfiable == engine_sat
    if not decision.says_satisfiable:
        return Report(matches, True, [], [], engine_sat)
    model = construct_claims(decision.claims, cfg)
    return Report(
        decision_matches_engine=matches,
        claims_constructible=model is not None,
        coverage=_coverage(statements, decision.claims, lenient=False),
        coverage_lenient=_coverage(statements, decision.claims, lenient=True),
        engine_satisfiable=engine_sat,
        model=model,
    )


def _classify(report: Report, coverage) -> HallucinationClass:
    if not report.decision_matches_engine:
        return HallucinationClass.IncorrectDecision
    statuses = [st for _, st in coverage]
    if "missing" in statuses:
        return HallucinationClass.H0
    if "mismatched" in statuses:
        return HallucinationClass.H1
    if not report.claims_constructible:
        return HallucinationClass.H2
    return HallucinationClass.Correct


def classify_hallucination(report: Report) -> HallucinationClass:
    """Wrong decision, then missing explanation (H0), wrong explanation of a
    statement (H1), jointly impossible explanation (H2), else Correct."""
    return report.hallucination_class


def feedback_line(report: Report, decision: Decision) -> str:
    """The line appended to the prompt after an unacceptable reply."""
    if report.correct:
        raise ValueError("no feedback for a correct reply")
    if decision.says_satisfiable:
        return f"It is not correct that '''{decision.fragment}'''"
    return f"It is not correct that '''{decision.fragment}'''."


# --------------------------------------------------------------------------
# Transcripts


def parse_transcript(text: str) -> list[tuple[list[Statement], str]]:
    """Split a transcript into (statements, reply text) rounds.

    ``STATEMENTS:`` opens a block in task syntax (a ``therefore:`` line counts
    as one more statement); each following ``REPLY:`` block is one round
    against the latest statements.
    """
    rounds = []
    statements = None
    mode, buf, start = None, [], 0
    offset = 0

    def flush():
        nonlocal statements
        body = "".join(buf)
        if mode == "statements":
            premises, conclusion = parse_statements(body)
            statements = premises + ([conclusion] if conclusion is not None else [])
            if not statements:
                raise ParseError("empty STATEMENTS block", start)
        elif mode == "reply":
            if statements is None:
                raise ParseError("REPLY before any STATEMENTS block", start)
            rounds.append((statements, body.strip()))

    for line in text.splitlines(keepends=True):
        head = line.strip()
        upper = head.upper()
        if upper.startswith("STATEMENTS:") or upper.startswith("REPLY:"):
            flush()
            mode = "statements" if upper.startswith("STATEMENTS:") else "reply"
            rest = head.split(":", 1)[1]
            buf, start = [rest + "\n"] if rest.strip() else [], offset
        elif mode is not None:
            buf.append(line)
        elif head and not head.startswith("#"):
            raise ParseError("text before the first STATEMENTS block", offset)
        offset += len(line.encode())
    flush()
    return rounds


def verify_transcript(text: str, cfg: OptimConfig = OptimConfig()) -> list[dict]:
    """Report (as JSON-ready dicts) for every round of a transcript."""
    out = []
    for statements, reply in parse_transcript(text):
        decision = parse_reply(reply)
        report = check(decision, statements, cfg)
        out.append(report.to_dict(decision))
    return out


def reports_to_json(reports: list[dict]) -> str:
    return json.dumps(reports, indent=1)
