"""Independent ground truth for tests and task generation.

Nothing here is used by the reasoning engine.  Relations between grid circles
are classified with exact integer arithmetic, separately from
:mod:`sphnn.geometry`, so the two can be checked against each other.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .geometry import BaseRel, TargetRel
from .syllogism import Mood, Statement, Task, parse_statement

D, PO, PP, PPbar, EQ = BaseRel.D, BaseRel.PO, BaseRel.PP, BaseRel.PPbar, BaseRel.EQ
_REL_ORDER = (D, PO, PP, PPbar, EQ)
_TRANSPOSE = {D: D, PO: PO, PP: PPbar, PPbar: PP, EQ: EQ}

MOOD_WITNESS = {
    Mood.All: frozenset({PP, EQ}),
    Mood.Some: frozenset({PP, PO, EQ, PPbar}),
    Mood.No: frozenset({D}),
    Mood.SomeNot: frozenset({D, PO, PPbar}),
}

TARGET_WITNESS = {
    TargetRel.D: frozenset({D}),
    TargetRel.P: frozenset({PP, EQ}),
    TargetRel.Pbar: frozenset({PPbar, EQ}),
    TargetRel.NotD: frozenset({PO, PP, PPbar, EQ}),
    TargetRel.NotP: frozenset({D, PO, PPbar}),
    TargetRel.NotPbar: frozenset({D, PO, PP}),
    TargetRel.PO: frozenset({PO}),
}


def transpose_set(rels: Iterable[BaseRel]) -> frozenset:
    return frozenset(_TRANSPOSE[r] for r in rels)


# --------------------------------------------------------------------------
# The 24 valid classic forms

_VALID_ROWS = [
    ("BARBARA", "all s m; all m p", "all s p"),
    ("BARBARI", "all s m; all m p", "some s p"),
    ("CELARENT", "no m p; all s m", "no s p"),
    ("CESARE", "no p m; all s m", "no s p"),
    ("CALEMES", "all p m; no m s", "no s p"),
    ("CAMESTRES", "all p m; no s m", "no s p"),
    ("DARII", "all m p; some s m", "some s p"),
    ("DATISI", "all m p; some m s", "some s p"),
    ("DARAPTI", "all m s; all m p", "some s p"),
    ("DISAMIS", "some m p; all m s", "some s p"),
    ("DIMATIS", "some p m; all m s", "some s p"),
    ("BAROCO", "all p m; some-not s m", "some-not s p"),
    ("CESARO", "no p m; all s m", "some-not s p"),
    ("CAMESTROS", "all s m; no m p", "some-not s p"),
    ("CELARONT", "no s m; all p m", "some-not s p"),
    ("CALEMOS", "all p m; no m s", "some-not s p"),
    ("BOCARDO", "some-not m p; all m s", "some-not s p"),
    ("BAMALIP", "all m s; all p m", "some s p"),
    ("FERIO", "some s m; no m p", "some-not s p"),
    ("FESTINO", "some s m; no p m", "some-not s p"),
    ("FERISON", "some m s; no m p", "some-not s p"),
    ("FRESISON", "some m s; no p m", "some-not s p"),
    ("FELAPTON", "all m s; no m p", "some-not s p"),
    ("FESAPO", "all m s; no p m", "some-not s p"),
]


def valid_classic_forms() -> list[Task]:
    """The 24 valid forms, premise order and moods as in the classic table."""
    return [_row_task(p, c) for _, p, c in _VALID_ROWS]


def valid_classic_names() -> list[str]:
    return [name for name, _, _ in _VALID_ROWS]


def _row_task(premises: str, conclusion: str) -> Task:
    ps = tuple(parse_statement(x) for x in premises.split(";"))
    return Task(ps, parse_statement(conclusion))


def _canonical_statement(s: Statement) -> tuple:
    if s.mood in (Mood.Some, Mood.No):
        return (s.mood, frozenset(s.terms))
    return (s.mood, s.subject, s.object)


def _canonical_task(task: Task) -> tuple:
    return (frozenset(_canonical_statement(p) for p in task.premises),
            _canonical_statement(task.conclusion))


@lru_cache(maxsize=1)
def _valid_keys() -> frozenset:
    return frozenset(_canonical_task(t) for t in valid_classic_forms())


def is_valid_classic(task: Task) -> bool:
    """Membership in the valid table, up to premise order and the term swap
    allowed for the symmetric moods ``some`` and ``no``."""
    if len(task.premises) != 2:
        raise ValueError("not a classic (three-term) task")
    return _canonical_task(task) in _valid_keys()


# --------------------------------------------------------------------------
# Grid search


@dataclass(frozen=True)
class GridSpec:
    bound: int = 6
    radius_bound: int = 6
    dim: int = 2

    def __post_init__(self):
        if self.bound < 3 or self.radius_bound < 3:
            raise ValueError("grid bounds must be at least 3")
        if self.dim not in (1, 2):
            raise ValueError("grid dimension must be 1 or 2")

    def spheres(self) -> tuple[np.ndarray, np.ndarray]:
        """All grid circles: integer centers in [-bound, bound]^dim, radii 1..radius_bound."""
        axis = np.arange(-self.bound, self.bound + 1)
        centers = np.array(list(itertools.product(axis, repeat=self.dim)), dtype=np.int64)
        radii = np.arange(1, self.radius_bound + 1, dtype=np.int64)
        c = np.repeat(centers, len(radii), axis=0)
        r = np.tile(radii, len(centers))
        return c, r


_CODE = {r: i for i, r in enumerate(_REL_ORDER)}


def relation_codes(ca, ra, cb, rb) -> np.ndarray:
    """Exact relation codes (index into D, PO, PP, PPbar, EQ) for integer circles.

    Arguments broadcast against each other; centers carry the coordinate axis
    last.
    """
    ca, cb = np.asarray(ca, dtype=np.int64), np.asarray(cb, dtype=np.int64)
    ra, rb = np.asarray(ra, dtype=np.int64), np.asarray(rb, dtype=np.int64)
    d2 = ((ca - cb) ** 2).sum(axis=-1)
    out = np.full(np.broadcast(d2, ra, rb).shape, _CODE[PO], dtype=np.int8)
    inside = (rb >= ra) & (d2 <= (rb - ra) ** 2)
    contains = (ra >= rb) & (d2 <= (ra - rb) ** 2)
    out[np.broadcast_to(inside, out.shape)] = _CODE[PP]
    out[np.broadcast_to(contains, out.shape)] = _CODE[PPbar]
    out[np.broadcast_to((d2 == 0) & (ra == rb), out.shape)] = _CODE[EQ]
    out[np.broadcast_to(d2 >= (ra + rb) ** 2, out.shape)] = _CODE[D]
    return out


def relation_of(ca, ra, cb, rb) -> BaseRel:
    return _REL_ORDER[int(relation_codes(ca, ra, cb, rb))]


class CompositionTable:
    """Map (R1, R2) -> set of R3 such that R1(A,B), R2(B,C) and R3(A,C) co-occur."""

    def __init__(self, entries: dict):
        self._entries = {k: frozenset(v) for k, v in entries.items()}

    def __getitem__(self, key) -> frozenset:
        return self._entries[key]

    def items(self):
        return self._entries.items()

    def compose(self, left: Iterable[BaseRel], right: Iterable[BaseRel]) -> frozenset:
        out = set()
        for a in left:
            for b in right:
                out |= self._entries[(a, b)]
        return frozenset(out)

    def to_json(self) -> str:
        rows = {f"{a.value},{b.value}": sorted(r.value for r in v)
                for (a, b), v in sorted(self._entries.items(), key=lambda kv: (
                    _CODE[kv[0][0]], _CODE[kv[0][1]]))}
        return json.dumps(rows, indent=2)


def build_composition_table(grid: GridSpec = GridSpec()) -> CompositionTable:
    """Exhaustive search over grid triples with A centred at the origin."""
    c, r = grid.spheres()
    bc = relation_codes(c[:, None, :], r[:, None], c[None, :, :], r[None, :]).astype(np.int64)
    seen = np.zeros(125, dtype=bool)
    origin = np.zeros(grid.dim, dtype=np.int64)
    for ra in range(1, grid.radius_bound + 1):
        ab = relation_codes(origin, ra, c, r).astype(np.int64)
        key = ab[:, None] * 25 + bc * 5 + ab[None, :]
        seen[np.unique(key)] = True
    entries = {(a, b): set() for a in _REL_ORDER for b in _REL_ORDER}
    for k in np.flatnonzero(seen):
        a, b, x = _REL_ORDER[k // 25], _REL_ORDER[(k // 5) % 5], _REL_ORDER[k % 5]
        entries[(a, b)].add(x)
    return CompositionTable(entries)


@lru_cache(maxsize=4)
def composition_table(grid: GridSpec = GridSpec()) -> CompositionTable:
    """Cached :func:`build_composition_table`."""
    return build_composition_table(grid)


# --------------------------------------------------------------------------
# Chain and cycle semantics


def premise_relations(task: Task) -> list[frozenset]:
    """Witness sets of the premises, each oriented as (X_i, X_i+1)."""
    chain = task.chain_terms()
    out = []
    for i, p in enumerate(task.ordered_premises()):
        w = MOOD_WITNESS[p.mood]
        out.append(w if p.subject == chain[i] else transpose_set(w))
    return out


def chain_relations(task: Task, table: CompositionTable | None = None) -> frozenset:
    """All relations between X1 and XN consistent with the premises."""
    table = composition_table() if table is None else table
    rels = premise_relations(task)
    acc = rels[0]
    for w in rels[1:]:
        acc = table.compose(acc, w)
    return acc


def chain_valid(task: Task, table: CompositionTable | None = None) -> bool:
    """Every relation the premises allow between X1 and XN satisfies the conclusion."""
    return chain_relations(task, table) <= MOOD_WITNESS[task.conclusion.mood]


def cycle_satisfiable(targets: Sequence[TargetRel], table: CompositionTable | None = None) -> bool:
    """Satisfiability of ``targets[k](O_k, O_k+1)`` for k = 0..N-1, indices mod N."""
    return _cycle_sets_satisfiable([TARGET_WITNESS[t] for t in targets], table)


def _cycle_sets_satisfiable(sets: Sequence[frozenset], table: CompositionTable | None) -> bool:
    table = composition_table() if table is None else table
    acc = sets[0]
    for w in sets[1:-1]:
        acc = table.compose(acc, w)
    return bool(acc & transpose_set(sets[-1]))


def coincidence_forced(targets: Sequence[TargetRel], table: CompositionTable | None = None) -> bool:
    """True when the cycle is satisfiable but only with coinciding spheres."""
    if not cycle_satisfiable(targets, table):
        return False
    strict = [TARGET_WITNESS[t] - {EQ} for t in targets]
    return not (all(strict) and _cycle_sets_satisfiable(strict, table))


# --------------------------------------------------------------------------
# Model search


def _holds_codes(target: TargetRel, codes: np.ndarray) -> np.ndarray:
    allowed = np.array([rel in TARGET_WITNESS[target] for rel in _REL_ORDER])
    return allowed[codes]


def brute_force_model(constraints: Sequence[tuple[TargetRel, int, int]],
                      grid: GridSpec = GridSpec(), max_terms: int = 4) -> dict | None:
    """Search grid circles for a configuration satisfying every constraint.

    Returns ``{term: (center, radius)}`` or None.  The first term sits at the
    origin.  Absence of a model is not a proof of unsatisfiability.
    """
    terms = sorted({t for _, i, j in constraints for t in (i, j)})
    if len(terms) > max_terms:
        raise ValueError(f"brute force search is limited to {max_terms} terms")
    c, r = grid.spheres()
    placed: dict = {}

    def candidates(term):
        mask = np.ones(len(r), dtype=bool)
        for t, i, j in constraints:
            if i == term and j in placed:
                pc, pr = placed[j]
                mask &= _holds_codes(t, relation_codes(c, r, pc, pr))
            elif j == term and i in placed:
                pc, pr = placed[i]
                mask &= _holds_codes(t, relation_codes(pc, pr, c, r))
            elif i == term and j == term:
                raise ValueError("a constraint relates a term to itself")
        return np.flatnonzero(mask)

    def search(k):
        if k == len(terms):
            return True
        term = terms[k]
        if k == 0:
            options = [(np.zeros(grid.dim, dtype=np.int64), rad)
                       for rad in range(1, grid.radius_bound + 1)]
        else:
            options = [(c[n], r[n]) for n in candidates(term)]
        for pc, pr in options:
            placed[term] = (pc, int(pr))
            if search(k + 1):
                return True
            del placed[term]
        return False

    if not search(0):
        return None
    return {t: (placed[t][0].astype(float), float(placed[t][1])) for t in terms}


def brute_force_third(x: tuple, y: tuple, t_zx: TargetRel, t_zy: TargetRel,
                      grid: GridSpec = GridSpec()) -> list:
    """All grid circles z with ``t_zx(z, x)`` and ``t_zy(z, y)``; x, y are
    integer (center, radius) pairs."""
    c, r = grid.spheres()
    ok = (_holds_codes(t_zx, relation_codes(c, r, x[0], x[1]))
          & _holds_codes(t_zy, relation_codes(c, r, y[0], y[1])))
    return [(c[n].astype(float), float(r[n])) for n in np.flatnonzero(ok)]
