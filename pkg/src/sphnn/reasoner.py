"""Syllogistic reasoning by sphere construction.

A statement set is spatialised into a cycle of sphere constraints
``T[k](O_k, O_k+1)`` (indices mod N).  The deciders try to build a
configuration satisfying all of them: success is a model (Sat), and exhausting
the control processes without one is Unsat.  A conclusion is valid exactly
when premises plus its negation are Unsat.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .config import OptimConfig
from .errors import NumericError
from .geometry import BaseRel, Sphere, TargetRel, classify, holds, target_loss, transpose
from .optimizer import StepTrace, check_deadline, coincided_spheres, cop, random_spheres, realize
from .syllogism import Mood, Statement, Task, negate
from .transitions import break_eq

__all__ = [
    "Constraint", "Configuration", "Verdict", "Sat", "Unsat", "Validity", "Valid", "Invalid",
    "spatialise", "negate", "s3", "sn", "back_update", "decide_satisfiability",
    "decide_validity", "check_model", "task_constraints",
]

_PSI = {Mood.All: TargetRel.P, Mood.Some: TargetRel.NotD, Mood.No: TargetRel.D,
        Mood.SomeNot: TargetRel.NotP}


@dataclass(frozen=True)
class Constraint:
    """``target(O_i, O_j)`` between two terms."""

    target: TargetRel
    i: Hashable
    j: Hashable

    def __post_init__(self):
        object.__setattr__(self, "target", TargetRel(self.target))
        if self.i == self.j:
            raise ValueError("a constraint needs two distinct terms")

    def transposed(self) -> "Constraint":
        return Constraint(transpose(self.target), self.j, self.i)


Configuration = dict  # term -> Sphere


@dataclass
class Verdict:
    trace: StepTrace = field(default_factory=StepTrace, repr=False, compare=False)

    @property
    def sat(self) -> bool:
        return isinstance(self, Sat)


@dataclass
class Sat(Verdict):
    model: Configuration = field(default_factory=dict)


@dataclass
class Unsat(Verdict):
    pass


@dataclass
class Validity:
    trace: StepTrace = field(default_factory=StepTrace, repr=False, compare=False)

    @property
    def valid(self) -> bool:
        return isinstance(self, Valid)


@dataclass
class Valid(Validity):
    pass


@dataclass
class Invalid(Validity):
    counter_model: Configuration = field(default_factory=dict)


def spatialise(s: Statement, orientation: str = "forward") -> Constraint:
    """all -> P, some -> NotD, no -> D, some-not -> NotP over (subject, object);
    the transposed orientation stores the pair as (object, subject)."""
    target = _PSI[s.mood]
    if orientation == "forward":
        return Constraint(target, s.subject, s.object)
    if orientation == "transposed":
        return Constraint(transpose(target), s.object, s.subject)
    raise ValueError(f"unknown orientation {orientation!r}")


def back_update(before: BaseRel, after: BaseRel) -> TargetRel:
    """Name the relation the tail of a chain forces on (O_1, O_i).

    ``before`` is a relation found impossible and ``after`` one found possible.
    A non-overlap ``after`` is kept as it is; an overlap ``after`` means
    everything except ``before`` is possible.
    """
    before, after = BaseRel(before), BaseRel(after)
    if before not in (BaseRel.D, BaseRel.PP, BaseRel.PPbar):
        raise ValueError(f"back_update: 'before' must be D, PP or PPbar, got {before.value}")
    keep = {BaseRel.D: TargetRel.D, BaseRel.PP: TargetRel.P, BaseRel.PPbar: TargetRel.Pbar}
    if after in keep:
        return keep[after]
    if after is BaseRel.PO:
        return {BaseRel.D: TargetRel.NotD, BaseRel.PP: TargetRel.NotP,
                BaseRel.PPbar: TargetRel.NotPbar}[before]
    raise ValueError(f"back_update: 'after' must be D, PO, PP or PPbar, got {after.value}")


def check_model(config: Configuration, constraints: Sequence[Constraint],
                tol=None) -> float:
    """Total inspection loss of ``config`` against ``constraints`` (0 means model)."""
    kw = {} if tol is None else {"tol": tol}
    total = 0.0
    for c in constraints:
        if c.i not in config or c.j not in config:
            missing = c.i if c.i not in config else c.j
            raise ValueError(f"configuration has no sphere for term {missing!r}")
        total += target_loss(c.target, config[c.i], config[c.j], **kw)
    return total


# --------------------------------------------------------------------------
# Engine


class _Universal:
    def __repr__(self):
        return "UNIVERSAL"


UNIVERSAL = _Universal()


class _Engine:
    """Shared state of one decider call: config, RNG, trace and deadline."""

    def __init__(self, cfg: OptimConfig, deadline: float | None):
        self.cfg = cfg
        self.rng = np.random.default_rng(cfg.seed)
        self.trace = StepTrace(record_gloss=False)
        self.deadline = deadline
        self._summaries: dict = {}
        check_deadline(deadline)

    def fresh(self, n: int) -> list[Sphere]:
        if self.cfg.random_init:
            return random_spheres(n, self.cfg, self.rng)
        return coincided_spheres(n, self.cfg)

    def realize(self, target, mov, fixed) -> Sphere:
        return realize(target, mov, fixed, self.cfg, self.rng, self.trace, self.deadline)[0]

    def cop(self, z, x, y, t_zx, t_zy, fine: bool = False) -> Sphere:
        if not fine:
            return cop(z, x, y, t_zx, t_zy, self.cfg, self.rng, self.trace, self.deadline)[1]
        lr = self.cfg.learning_rate
        return cop(z, x, y, t_zx, t_zy, self.cfg, self.rng, self.trace, self.deadline,
                   lr_floor=lr * _FINE_FLOOR, lr_cap=lr * _FINE_CAP)[1]

    def break_coincidences(self, spheres: list, movable) -> None:
        for k in movable:
            while any(j != k and classify(spheres[k], spheres[j]) is BaseRel.EQ
                      for j in range(len(spheres))):
                spheres[k] = break_eq(spheres[k], self.cfg, self.rng)
                self.trace.transitions += 1

    # -- three spheres -----------------------------------------------------

    def s3(self, T: Sequence[TargetRel], O: list, trivial: bool = True) -> tuple[bool, int]:
        """Construct ``T[0](O0,O1), T[1](O1,O2), T[2](O2,O0)``; returns (sat, restarts)."""
        if trivial and _all_hold(T, O):
            return True, 0
        self.break_coincidences(O, (1, 2))
        O[1] = self.realize(transpose(T[0]), O[1], O[0])
        O[2] = self.realize(T[2], O[2], O[0])
        O[2] = self.cop(O[2], O[1], O[0], transpose(T[1]), T[2])
        if _all_hold(T, O):
            return True, 0
        # restart with O1 as the anchor
        O[2] = self.realize(transpose(T[1]), O[2], O[1])
        O[0] = self.realize(T[0], O[0], O[1])
        O[0] = self.cop(O[0], O[2], O[1], transpose(T[2]), T[0])
        return _all_hold(T, O), 1

    # -- long chains -------------------------------------------------------

    def sn(self, T: Sequence[TargetRel], O: list) -> tuple[bool, int]:
        """Construct the cycle ``T[k](O_k, O_k+1)``; returns (sat, backward passes)."""
        N = len(T)
        if _all_hold(T, O):
            return True, 0
        if N == 3:
            return self.s3(T, O, trivial=False)
        self.break_coincidences(O, range(1, N))
        for k in range(N - 1):
            O[k + 1] = self.realize(transpose(T[k]), O[k + 1], O[k])
        O[N - 1] = self.cop(O[N - 1], O[0], O[N - 2], T[N - 1], transpose(T[N - 2]))
        if _all_hold(T, O):
            return True, 0
        # Backward pass: derived[i] is the relation (O_i, O_0) that the tail
        # O_i .. O_N-1 forces.  O_0 .. O_i still form the forward chain.
        derived = {N - 1: T[N - 1]}
        for i in range(N - 2, 1, -1):
            d = self.summarise(T[i], derived[i + 1])
            if d is None:
                return False, 1
            derived[i] = d
            if d is UNIVERSAL or holds(d, O[i], O[0]):
                O[:] = self.build_model(T, derived)
                return True, 1
        ok, _ = self.s3([T[0], T[1], derived[2]], self.fresh(3), trivial=False)
        if not ok:
            return False, 1
        O[:] = self.build_model(T, derived)
        return True, 1

    def summarise(self, t: TargetRel, tail) -> TargetRel | _Universal | None:
        """Relation forced on (A, C) by ``t(A, B)`` and ``tail(B, C)``.

        Each base relation other than EQ is tried by constructing the triangle
        with three fresh spheres.  None means no relation is possible.
        """
        if tail is UNIVERSAL:
            return UNIVERSAL
        key = (t, tail)
        if key in self._summaries:
            return self._summaries[key]
        probes = ((BaseRel.D, TargetRel.D), (BaseRel.PO, TargetRel.PO),
                  (BaseRel.PP, TargetRel.P), (BaseRel.PPbar, TargetRel.Pbar))
        possible = []
        for rel, probe in probes:
            ok, _ = self.s3([t, tail, transpose(probe)], self.fresh(3), trivial=False)
            if ok:
                possible.append(rel)
        self._summaries[key] = out = _name_relation(possible)
        return out

    # -- model construction after a backward pass ---------------------------

    def build_model(self, T, derived) -> list[Sphere]:
        """Lay out O_0 .. O_N-1 afresh, each against its predecessor and O_0.

        Sphere j must satisfy ``T[j-1]`` with O_j-1 and ``derived[j]`` with
        O_0.  Forward construction leaves relations exactly on their
        boundary, where such a two-sided placement can have no room at all;
        here every relation is instead made to hold against a proxy sphere
        whose radius is scaled by ``1 +- slack``, so later placements have
        room.  Each placement uses the largest slack it can reach.
        """
        N = len(T)
        derived = dict(derived)
        for i in range(min(derived) - 1, 0, -1):
            d = self.summarise(T[i], derived[i + 1])
            if d is None:
                raise NumericError("backward summaries contradict a satisfiable verdict")
            derived[i] = d
        O = self.fresh(1)
        for j in range(1, N):
            O.append(self.place(O[j - 1], O[j - 1], transpose(T[j - 1]), O[0], derived[j]))
        if not _all_hold(T, O):
            raise NumericError("laid-out model violates a constraint")
        return O

    def place(self, z: Sphere, y: Sphere, t_zy: TargetRel, x: Sphere, t_zx) -> Sphere:
        """Move z until ``t_zy(z, y)`` and ``t_zx(z, x)`` hold, with the largest
        relative slack from ``_SLACKS`` that can be reached."""
        tmp = [z, y, x]
        self.break_coincidences(tmp, (0,))
        for slack in _SLACKS:
            try:
                placed = self._place_with_slack(tmp[0], y, t_zy, x, t_zx, slack)
            except NumericError:
                # a stalled attempt only rules out this slack; TimeLimitExceeded propagates
                continue
            if placed is not None:
                return placed
        raise NumericError("two-sided placement failed")

    def _place_with_slack(self, z, y, t_zy, x, t_zx, slack):
        yp = _proxy(t_zy, y, slack)
        z = self.realize(t_zy, z, yp)
        if t_zx is UNIVERSAL:
            return z
        xp = _proxy(t_zx, x, slack)
        if not holds(t_zx, z, xp):
            z = self.cop(z, xp, yp, t_zx, t_zy, fine=True)
        if not holds(t_zx, z, xp):
            z = self.realize(t_zx, z, xp)
            z = self.cop(z, yp, xp, t_zy, t_zx, fine=True)
        if holds(t_zx, z, x) and holds(t_zy, z, y):
            return z
        return None


# The placement COP adapts its step between these multiples of the learning rate.
_FINE_FLOOR = 1e-6
_FINE_CAP = 2.0 ** 12
_SLACKS = (0.3, 0.1, 0.03, 0.01, 0.003, 0.001, 0.0)

# A relation holding against the proxy holds against the sphere itself with
# room to spare.  Shrink the sphere for: inside it, overlapping it, not
# containing it.  Grow it for: disjoint from it, containing it, not inside it.
_PROXY_SIGN = {TargetRel.P: -1, TargetRel.NotD: -1, TargetRel.NotPbar: -1,
               TargetRel.D: 1, TargetRel.Pbar: 1, TargetRel.NotP: 1, TargetRel.PO: 0}


def _proxy(target: TargetRel, s: Sphere, slack: float) -> Sphere:
    sign = _PROXY_SIGN[target]
    if not sign or not slack:
        return s
    return Sphere(s.center, s.log_radius + math.log1p(sign * slack))


def _name_relation(possible: list) -> TargetRel | _Universal | None:
    if not possible:
        return None
    if len(possible) == 4:
        return UNIVERSAL
    excluded = [r for r in (BaseRel.D, BaseRel.PP, BaseRel.PPbar) if r not in possible]
    if BaseRel.PO in possible and len(possible) == 3:
        return back_update(excluded[0], BaseRel.PO)
    if len(possible) == 1 and BaseRel.PO not in possible:
        return back_update(excluded[0], possible[0])
    names = ", ".join(r.value for r in possible)
    raise NumericError(f"relation set {{{names}}} is not expressible as a syllogistic relation")


def _all_hold(T, O) -> bool:
    n = len(T)
    return all(holds(T[k], O[k], O[(k + 1) % n]) for k in range(n))


# --------------------------------------------------------------------------
# Public deciders


def _order_cycle(constraints: Sequence[Constraint]) -> tuple[list, list]:
    """Orient and order constraints as a cycle; returns (terms, targets) with
    ``targets[k]`` relating ``terms[k]`` to ``terms[k+1]``."""
    cs = list(constraints)
    n = len(cs)
    if n < 3:
        raise ValueError("a cycle needs at least three constraints")
    degree: dict = {}
    for c in cs:
        for t in (c.i, c.j):
            degree[t] = degree.get(t, 0) + 1
    if len(degree) != n or any(d != 2 for d in degree.values()):
        raise ValueError("constraints do not form a single cycle")
    terms, targets = [cs[0].i], []
    used = [False] * n
    here = cs[0].i
    for _ in range(n):
        k = next((k for k, c in enumerate(cs) if not used[k] and here in (c.i, c.j)), None)
        if k is None:
            raise ValueError("constraints do not form a single cycle")
        used[k] = True
        c = cs[k] if cs[k].i == here else cs[k].transposed()
        targets.append(c.target)
        here = c.j
        terms.append(here)
    if terms[-1] != terms[0] or len(set(terms[:-1])) != n:
        raise ValueError("constraints do not form a single cycle")
    return terms[:-1], targets


def _deadline(time_limit: float | None) -> float | None:
    return None if time_limit is None else time.monotonic() + time_limit


def _finish(ok: bool, terms, T, O, eng: _Engine, start: float, constraints) -> Verdict:
    eng.trace.wall_time = time.monotonic() - start
    if not ok:
        return Unsat(trace=eng.trace)
    model = {t: s for t, s in zip(terms, O)}
    loss = check_model(model, constraints)
    if loss != 0.0:
        raise NumericError(f"constructed model has loss {loss!r}")
    return Sat(trace=eng.trace, model=model)


def s3(c12: Constraint, c23: Constraint, c31: Constraint, cfg: OptimConfig = OptimConfig(),
       time_limit: float | None = None) -> tuple[Verdict, StepTrace]:
    """Decide a three-term cycle with at most one restart."""
    start = time.monotonic()
    terms, T = _order_cycle([c12, c23, c31])
    eng = _Engine(cfg, _deadline(time_limit))
    O = eng.fresh(3)
    ok, restarts = eng.s3(T, O)
    eng.trace.restarts += restarts
    v = _finish(ok, terms, T, O, eng, start, [c12, c23, c31])
    return v, v.trace


def sn(constraints: Sequence[Constraint], cfg: OptimConfig = OptimConfig(),
       time_limit: float | None = None) -> tuple[Verdict, StepTrace]:
    """Decide an N-term cycle: forward construction, then at most one backward pass."""
    start = time.monotonic()
    terms, T = _order_cycle(constraints)
    eng = _Engine(cfg, _deadline(time_limit))
    O = eng.fresh(len(T))
    ok, passes = eng.sn(T, O)
    eng.trace.restarts += passes
    v = _finish(ok, terms, T, O, eng, start, constraints)
    return v, v.trace


def decide_satisfiability(statements: Sequence[Statement], cfg: OptimConfig = OptimConfig(),
                          time_limit: float | None = None) -> Verdict:
    """Sat with a model, or Unsat, for statements whose terms form one cycle."""
    constraints = [spatialise(s) for s in statements]
    return sn(constraints, cfg, time_limit)[0]


def task_constraints(task: Task) -> list[Constraint]:
    """Premises plus the negated conclusion, as a cycle X1 -> .. -> XN -> X1."""
    cs = [spatialise(p) for p in task.ordered_premises()]
    cs.append(spatialise(negate(task.conclusion)))
    return cs


def decide_validity(task: Task, cfg: OptimConfig = OptimConfig(),
                    time_limit: float | None = None) -> Validity:
    """Valid iff no configuration satisfies the premises and the negated conclusion."""
    v = decide_satisfiability(
        list(task.ordered_premises()) + [negate(task.conclusion)], cfg, time_limit)
    if v.sat:
        return Invalid(trace=v.trace, counter_model=v.model)
    return Valid(trace=v.trace)
