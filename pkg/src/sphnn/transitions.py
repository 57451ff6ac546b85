"""Target-oriented partitions, the neighbourhood transition table and the
clamped piecewise-linear transition losses (Delta functions).

Every Delta function has the shape ``max(0, a*dis + b*rx + c*rv + k*eps)``
where ``dis`` is the center distance, ``rx`` the radius of the moving sphere
and ``rv`` the radius of the fixed one.  A step moves the center along the
line joining the two centers and rescales the moving radius; parameters the
operation table does not allow are masked out.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Union

import numpy as np

from .config import OptimConfig
from .errors import NoDecrease, StepPrecondition
from .geometry import (
    DEFAULT_TOL,
    WITNESSES,
    BaseRel,
    PartRel,
    Sphere,
    TargetRel,
    Tolerances,
    base_of,
    classify,
    distance,
)

T = TargetRel
R = PartRel


# --------------------------------------------------------------------------
# Partitions

_TSP = {
    T.D: (R.D, R.EQ, R.PO1, R.PO2, R.PPbar, R.PP),
    T.P: (R.P, R.D, R.PO1, R.PO2, R.PPbar),
    T.Pbar: (R.Pbar, R.D, R.PO3, R.PO4, R.PP),
    T.NotD: (R.NotD, R.D),
    T.NotP: (R.NotP, R.P),
    T.NotPbar: (R.NotPbar, R.Pbar),
    T.PO: (R.PO, R.D, R.PP, R.PPbar, R.EQ),
}


def tsp(target: TargetRel) -> frozenset:
    """The partition members the pair can be in when aiming for ``target``."""
    return frozenset(_TSP[target])


# --------------------------------------------------------------------------
# Transition outcomes


class _Marker:
    __slots__ = ("name",)

    def __init__(self, name):
        self.name = name

    def __repr__(self):
        return self.name


Reached = _Marker("Reached")
Undefined = _Marker("Undefined")


@dataclass(frozen=True)
class Step:
    source: PartRel
    dest: PartRel
    target: TargetRel

    @property
    def breaks_eq(self) -> bool:
        return self.source is R.EQ


TransitionOutcome = Union[Step, _Marker]

_COLUMNS = (T.D, T.P, T.Pbar, T.NotD, T.NotP, T.NotPbar)
_o, _u = "o", "-"   # reached, undefined
_ROWS = {
    R.D:       (_o,     R.PO,   R.PO,     R.NotD, _o,     _o),
    R.PO1:     (R.D,    R.PO2,  _u,       _o,     _o,     _o),
    R.PO2:     (R.PO1,  R.P,    _u,       _o,     _o,     _o),
    R.PO3:     (_u,     _u,     R.PO4,    _o,     _o,     _o),
    R.PO4:     (_u,     _u,     R.Pbar,   _o,     _o,     _o),
    R.PP:      (R.PO,   _o,     R.PO,     _o,     _u,     _o),
    R.EQ:      (R.PO,   _o,     _o,       _o,     _u,     _u),
    R.PPbar:   (R.PO,   R.PO,   _o,       _o,     _o,     _u),
    R.P:       (_u,     _o,     _u,       _o,     R.NotP, _u),
    R.Pbar:    (_u,     _u,     _o,       _o,     _u,     R.NotPbar),
    R.NotD:    (_u,     _u,     _u,       _o,     _u,     _u),
    R.NotP:    (_u,     _u,     _u,       _u,     _o,     _u),
    R.NotPbar: (_u,     _u,     _u,       _u,     _u,     _o),
}


def _build_table():
    table = {}
    for row, cells in _ROWS.items():
        for target, cell in zip(_COLUMNS, cells):
            if cell == _o:
                table[(target, row)] = Reached
            elif cell == _u:
                table[(target, row)] = Undefined
            else:
                table[(target, row)] = Step(row, cell, target)
    # PO is an extension target: leave D, PP, PPbar or EQ for the overlap band.
    for row in R:
        table[(T.PO, row)] = Undefined
    table[(T.PO, R.PO)] = Reached
    for row in (R.D, R.PP, R.PPbar, R.EQ):
        table[(T.PO, row)] = Step(row, R.PO, T.PO)
    return table


_TABLE = _build_table()


def lookup(target: TargetRel, current: PartRel) -> TransitionOutcome:
    """Next neighbourhood transition from ``current`` towards ``target``."""
    return _TABLE.get((target, current), Undefined)


# --------------------------------------------------------------------------
# Operation sets


class Op(str, Enum):
    disUp = "disUp"
    disDown = "disDown"
    rUp = "rUp"
    rDown = "rDown"


@dataclass(frozen=True)
class OpSet:
    ops: frozenset
    fix_radius: bool = False
    fix_center: bool = False
    condition: str | None = None

    def __contains__(self, op):
        return op in self.ops


@dataclass(frozen=True)
class _DeltaSpec:
    a: int      # coefficient of dis
    b: int      # coefficient of rx (moving radius)
    c: int      # coefficient of rv (fixed radius)
    k: int      # coefficient of eps
    ops: OpSet


def _ops(*names, fix_radius=False, fix_center=False, condition=None):
    return OpSet(frozenset(Op(n) for n in names), fix_radius, fix_center, condition)


_SPECS = {
    # towards D
    (R.PO1, T.D): _DeltaSpec(-1, 1, 1, 0, _ops("disUp", "rDown")),
    (R.PO2, T.D): _DeltaSpec(-1, 0, 1, 0, _ops("disUp", fix_radius=True)),
    (R.PP, T.D): _DeltaSpec(-1, -1, 1, 0, _ops("disUp")),
    (R.PPbar, T.D): _DeltaSpec(-1, 1, -1, 0, _ops("disUp", "rDown")),
    # towards P
    (R.D, T.P): _DeltaSpec(1, -1, -1, 0, _ops("disDown")),
    (R.PO1, T.P): _DeltaSpec(1, 0, -1, 0, _ops("disDown", fix_radius=True,
                                                condition="rx < 2*rv")),
    (R.PO2, T.P): _DeltaSpec(1, 1, -1, 0, _ops("disDown", "rDown")),
    # The operation set also lists dis-down, which does not decrease this loss;
    # masking by descent direction leaves only the radius shrink.
    (R.PPbar, T.P): _DeltaSpec(-1, 1, -1, 0, _ops("disDown", "rDown")),
    # towards Pbar
    (R.D, T.Pbar): _DeltaSpec(1, -1, -1, 0, _ops("disDown", "rUp")),
    (R.PO3, T.Pbar): _DeltaSpec(0, -1, 1, 0, _ops("rUp", fix_center=True)),
    (R.PO4, T.Pbar): _DeltaSpec(1, -1, 1, 0, _ops("disDown", "rUp")),
    (R.PP, T.Pbar): _DeltaSpec(-1, -1, 1, 0, _ops("rUp")),
    # towards the negated targets
    (R.D, T.NotD): _DeltaSpec(1, -1, -1, 1, _ops("disDown", "rUp")),
    (R.P, T.NotP): _DeltaSpec(-1, -1, 1, 1, _ops("disUp", "rUp")),
    (R.Pbar, T.NotPbar): _DeltaSpec(-1, 1, -1, 1, _ops("disUp", "rDown")),
    # towards PO (extension target)
    (R.D, T.PO): _DeltaSpec(1, -1, -1, 0, _ops("disDown", "rUp")),
    (R.PP, T.PO): _DeltaSpec(-1, -1, 1, 0, _ops("disUp", "rUp")),
    (R.PPbar, T.PO): _DeltaSpec(-1, 1, -1, 0, _ops("disUp", "rDown")),
}

_EQ_OPS = _ops("disUp")


def _spec(step: Step) -> _DeltaSpec:
    try:
        return _SPECS[(step.source, step.target)]
    except KeyError:
        raise ValueError(f"no Delta function for {step}") from None


def allowed_ops(step: Step) -> OpSet:
    """Parameter moves the transition may use."""
    if not isinstance(step, Step):
        raise TypeError("allowed_ops needs a Step")
    if step.breaks_eq:
        return _EQ_OPS
    return _spec(step).ops


def _masked_coeffs(spec: _DeltaSpec):
    """Derivatives of the linear part w.r.t. dis and rx, zeroed when the
    descent direction is not an allowed operation."""
    a, b = spec.a, spec.b
    ops = spec.ops.ops
    ga = a if (a > 0 and Op.disDown in ops) or (a < 0 and Op.disUp in ops) else 0
    gb = b if (b > 0 and Op.rDown in ops) or (b < 0 and Op.rUp in ops) else 0
    return ga, gb


def delta_value(step: Step, dis: float, rx: float, rv: float, eps: float,
                margin: bool = False) -> float:
    """Scalar Delta value.  ``margin`` adds ``eps`` to forms that have no
    eps term, which is used to push off an exact boundary."""
    if step.breaks_eq:
        return 1.0 if base_of(dis, rx, rv) is BaseRel.EQ else 0.0
    s = _spec(step)
    k = s.k if (s.k or not margin) else 1
    return max(0.0, s.a * dis + s.b * rx + s.c * rv + k * eps)


@dataclass(frozen=True)
class DeltaEval:
    value: float
    grad_center: np.ndarray
    grad_log_radius: float


def _unit(mov: Sphere, fixed: Sphere, dis: float) -> np.ndarray:
    if dis > 0:
        return (mov.center - fixed.center) / dis
    u = np.zeros(mov.dim)
    u[0] = 1.0
    return u


def delta_eval(step: Step, mov: Sphere, fixed: Sphere, tol: Tolerances = DEFAULT_TOL,
               margin: bool = False) -> DeltaEval:
    """Value and masked analytic gradient of the transition's Delta function."""
    dis = distance(mov, fixed)
    rx, rv = mov.radius, fixed.radius
    value = delta_value(step, dis, rx, rv, tol.eps_strict, margin)
    zero = np.zeros(mov.dim)
    if value == 0.0 or step.breaks_eq:
        return DeltaEval(value, zero, 0.0)
    ga, gb = _masked_coeffs(_spec(step))
    grad_c = ga * _unit(mov, fixed, dis) if (ga and dis > 0) else zero
    return DeltaEval(value, grad_c, gb * rx)


# --------------------------------------------------------------------------
# Steps


def _allowed_landing(step: Step, rx: float, rv: float) -> frozenset:
    allowed = set(_witness(step.source)) | set(_witness(step.dest))
    if step.source is R.PO1 and step.target is T.P and not rx < 2 * rv:
        allowed.add(BaseRel.PPbar)
    return frozenset(allowed)


def _witness(part: PartRel) -> frozenset:
    name = part.value
    if name.startswith("PO"):
        return frozenset({BaseRel.PO})
    if name in ("D", "PP", "PPbar", "EQ"):
        return frozenset({BaseRel(name)})
    return WITNESSES[TargetRel(name)]


def scalar_step(step: Step, dis: float, log_r: float, rv: float, lr: float, eps: float,
                margin: bool = False) -> tuple[float, float]:
    """One masked gradient step on ``(dis, log_r)``.

    The center moves by ``lr * |dDelta/ddis|`` along the line of centers and
    the log-radius by ``lr * |dDelta/drx| * rx``.  If the move would land in a
    relation other than the step's source or destination, it is halved until
    it does not, so the transition stays between neighbours.  When no
    fraction of the joint move is admissible, the radius-only and then the
    center-only move are tried the same way.
    """
    rx = math.exp(log_r)
    value = delta_value(step, dis, rx, rv, eps, margin)
    if value <= 0.0:
        raise StepPrecondition(f"{step} is already satisfied")
    ga, gb = _masked_coeffs(_spec(step))
    if not ga and not gb:
        raise NoDecrease(f"{step}: every descent direction is masked")
    allowed = _allowed_landing(step, rx, rv)
    moves = [(1.0, 1.0)]
    if ga and gb:
        moves += [(0.0, 1.0), (1.0, 0.0)]
    for use_c, use_r in moves:
        d_dis = -lr * ga * use_c
        d_log = -lr * gb * rx * use_r
        for _ in range(64):
            new_dis = max(0.0, dis + d_dis)
            new_log = log_r + d_log
            new_rx = math.exp(new_log)
            if base_of(new_dis, new_rx, rv) in allowed:
                new_value = delta_value(step, new_dis, new_rx, rv, eps, margin)
                if new_value < value:
                    return new_dis, new_log
            d_dis *= 0.5
            d_log *= 0.5
    raise NoDecrease(f"{step}: no admissible step from dis={dis!r}, rx={rx!r}, rv={rv!r}")


def apply_step(step: Step, mov: Sphere, fixed: Sphere, cfg: OptimConfig,
               margin: bool = False) -> Sphere:
    """Move ``mov`` one gradient step along ``step``'s Delta function."""
    if step.breaks_eq:
        raise ValueError("EQ is left by break_eq, not by a gradient step")
    dis = distance(mov, fixed)
    new_dis, new_log = scalar_step(step, dis, mov.log_radius, fixed.radius,
                                   cfg.learning_rate, cfg.eps, margin)
    if new_dis == dis:
        center = mov.center
    else:
        center = fixed.center + new_dis * _unit(mov, fixed, dis)
    return Sphere(center, new_log)


def break_eq(mov: Sphere, cfg: OptimConfig, rng: np.random.Generator) -> Sphere:
    """Shift the center by a random vector of length ``cfg.eq_break_scale``."""
    v = rng.standard_normal(mov.dim)
    norm = float(np.linalg.norm(v))
    while norm == 0.0:
        v = rng.standard_normal(mov.dim)
        norm = float(np.linalg.norm(v))
    out = mov.moved(center=mov.center + (cfg.eq_break_scale / norm) * v)
    if classify(out, mov) is BaseRel.EQ:   # shift lost to rounding
        raise NoDecrease("eq_break_scale is too small for the center magnitude")
    return out
