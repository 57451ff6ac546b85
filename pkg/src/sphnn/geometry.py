"""Spheres, qualitative relations between them, and inspection losses.

A sphere is an open n-ball stored as a center vector plus a log-radius, so the
radius ``exp(log_radius)`` is positive by construction.  Every relation test in
this module is a function of three numbers only: the distance between the two
centers and the two radii.  That keeps classification deterministic and makes
the five base relations jointly exhaustive and pairwise disjoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

import numpy as np

from ._fastmath import dist as _dist


class BaseRel(str, Enum):
    """The five jointly exhaustive, pairwise disjoint relations."""

    D = "D"
    PO = "PO"
    PP = "PP"
    PPbar = "PPbar"
    EQ = "EQ"


class TargetRel(str, Enum):
    """Relations a reasoning step can aim for.  ``PO`` is an extension target
    used only when verifying circle-relation claims."""

    D = "D"
    P = "P"
    Pbar = "Pbar"
    NotD = "NotD"
    NotP = "NotP"
    NotPbar = "NotPbar"
    PO = "PO"


class PartRel(str, Enum):
    """Members of the target-oriented partitions (see ``transitions.tsp``)."""

    D = "D"
    PO1 = "PO1"
    PO2 = "PO2"
    PO3 = "PO3"
    PO4 = "PO4"
    PP = "PP"
    PPbar = "PPbar"
    EQ = "EQ"
    P = "P"
    Pbar = "Pbar"
    NotD = "NotD"
    NotP = "NotP"
    NotPbar = "NotPbar"
    PO = "PO"


POSITIVE_TARGETS = (TargetRel.D, TargetRel.P, TargetRel.Pbar)
NEGATIVE_TARGETS = (TargetRel.NotD, TargetRel.NotP, TargetRel.NotPbar)

_NEGATION = {
    TargetRel.D: TargetRel.NotD,
    TargetRel.P: TargetRel.NotP,
    TargetRel.Pbar: TargetRel.NotPbar,
    TargetRel.NotD: TargetRel.D,
    TargetRel.NotP: TargetRel.P,
    TargetRel.NotPbar: TargetRel.Pbar,
}

# Base relations that make each target (or partition member) true.
WITNESSES: dict = {
    TargetRel.D: frozenset({BaseRel.D}),
    TargetRel.P: frozenset({BaseRel.PP, BaseRel.EQ}),
    TargetRel.Pbar: frozenset({BaseRel.PPbar, BaseRel.EQ}),
    TargetRel.NotD: frozenset({BaseRel.PO, BaseRel.PP, BaseRel.PPbar, BaseRel.EQ}),
    TargetRel.NotP: frozenset({BaseRel.D, BaseRel.PO, BaseRel.PPbar}),
    TargetRel.NotPbar: frozenset({BaseRel.D, BaseRel.PO, BaseRel.PP}),
    TargetRel.PO: frozenset({BaseRel.PO}),
}


def negate_target(rel: TargetRel) -> TargetRel:
    """Exact complement of a syllogistic target (``PO`` has none)."""
    try:
        return _NEGATION[rel]
    except KeyError:
        raise ValueError(f"{rel} has no complement among the targets") from None


@dataclass(frozen=True)
class Tolerances:
    """Margin used by the loss forms that enforce a strict inequality."""

    eps_strict: float = 1e-4

    def __post_init__(self):
        if not self.eps_strict > 0:
            raise ValueError("eps_strict must be positive")


DEFAULT_TOL = Tolerances()


@dataclass(frozen=True, eq=False)
class Sphere:
    center: np.ndarray
    log_radius: float

    def __post_init__(self):
        c = np.array(self.center, dtype=float)
        if c.ndim != 1 or c.size < 1:
            raise ValueError("center must be a non-empty vector")
        if not np.all(np.isfinite(c)) or not math.isfinite(self.log_radius):
            raise ValueError("sphere parameters must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "log_radius", float(self.log_radius))

    @classmethod
    def from_radius(cls, center: Sequence[float], radius: float) -> "Sphere":
        if radius <= 0:
            raise ValueError("radius must be positive")
        return cls(np.asarray(center, dtype=float), math.log(radius))

    @property
    def radius(self) -> float:
        return math.exp(self.log_radius)

    @property
    def dim(self) -> int:
        return self.center.size

    def moved(self, center=None, log_radius=None) -> "Sphere":
        return Sphere(self.center if center is None else center,
                      self.log_radius if log_radius is None else log_radius)

    def __eq__(self, other):
        if not isinstance(other, Sphere):
            return NotImplemented
        return self.log_radius == other.log_radius and np.array_equal(self.center, other.center)

    def __hash__(self):
        return hash((self.log_radius, self.center.tobytes()))

    def __repr__(self):
        return f"Sphere(center={self.center.tolist()}, radius={self.radius!r})"


def _check_dims(a: Sphere, b: Sphere) -> None:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")


def distance(a: Sphere, b: Sphere) -> float:
    """Euclidean distance between the two centers."""
    _check_dims(a, b)
    return _dist(a.center, b.center)


def _params(a: Sphere, b: Sphere):
    return distance(a, b), a.radius, b.radius


# Relation predicates on (dis, rx, rv).  Tangency counts as D because spheres
# are open.  Containment compares dis with the radius difference: written as
# dis + rx <= rv, a tiny dis is absorbed by the sum and two equal spheres a
# hair apart would count as both PP and PPbar.

def _is_d(dis, rx, rv):
    return dis - (rx + rv) >= 0


def _is_p(dis, rx, rv):
    return dis <= rv - rx


def _is_pbar(dis, rx, rv):
    return dis <= rx - rv


def _is_eq(dis, rx, rv):
    return dis == 0.0 and rx == rv


def base_of(dis: float, rx: float, rv: float) -> BaseRel:
    if _is_d(dis, rx, rv):
        return BaseRel.D
    if _is_eq(dis, rx, rv):
        return BaseRel.EQ
    if _is_p(dis, rx, rv):
        return BaseRel.PP
    if _is_pbar(dis, rx, rv):
        return BaseRel.PPbar
    return BaseRel.PO


def classify(a: Sphere, b: Sphere) -> BaseRel:
    """The unique base relation holding between ``a`` and ``b``."""
    return base_of(*_params(a, b))


AnyRel = Union[BaseRel, TargetRel, PartRel]


def holds_params(rel: AnyRel, dis: float, rx: float, rv: float) -> bool:
    name = rel.value
    if name == "D":
        return _is_d(dis, rx, rv)
    if name == "P":
        return _is_p(dis, rx, rv)
    if name == "Pbar":
        return _is_pbar(dis, rx, rv)
    if name == "NotD":
        return not _is_d(dis, rx, rv)
    if name == "NotP":
        return not _is_p(dis, rx, rv)
    if name == "NotPbar":
        return not _is_pbar(dis, rx, rv)
    if name == "EQ":
        return _is_eq(dis, rx, rv)
    if name == "PP":
        return _is_p(dis, rx, rv) and not _is_eq(dis, rx, rv)
    if name == "PPbar":
        return _is_pbar(dis, rx, rv) and not _is_eq(dis, rx, rv)
    po = base_of(dis, rx, rv) is BaseRel.PO
    if name == "PO":
        return po
    if name == "PO1":
        return po and dis > rv
    if name == "PO2":
        return po and dis <= rv
    if name == "PO3":
        return po and rx < rv
    if name == "PO4":
        return po and rx >= rv
    raise ValueError(f"unknown relation {rel!r}")


def holds(rel: AnyRel, a: Sphere, b: Sphere) -> bool:
    """Exact truth of ``rel(a, b)`` under the definitional (in)equalities."""
    return holds_params(rel, *_params(a, b))


def po34_split(a: Sphere, b: Sphere, reading: str = "prose") -> PartRel | None:
    """Sub-split of a PO pair by radius.

    ``reading="prose"`` puts the smaller moving sphere in PO3 (it must grow to
    contain the other one); this is the split the transition table needs.
    ``reading="formula"`` is the literal alternative in which PO3 means the
    moving sphere is the larger one.  Returns None when the pair is not PO.
    """
    dis, rx, rv = _params(a, b)
    if base_of(dis, rx, rv) is not BaseRel.PO:
        return None
    if reading == "prose":
        return PartRel.PO3 if rx < rv else PartRel.PO4
    if reading == "formula":
        return PartRel.PO3 if rv < rx else PartRel.PO4
    raise ValueError(f"unknown reading {reading!r}")


def inspect_params(rel: AnyRel, dis: float, rx: float, rv: float, eps: float) -> float:
    name = rel.value
    if name == "D":
        return max(0.0, rx + rv - dis)
    if name == "NotD":
        return max(0.0, dis - rx - rv)
    if name == "P":
        return max(0.0, dis - (rv - rx))
    if name == "NotP":
        return max(0.0, (rv - rx) - dis)
    if name == "Pbar":
        return max(0.0, dis - (rx - rv))
    if name == "NotPbar":
        return max(0.0, (rx - rv) - dis)
    if name == "EQ":
        return abs(rx - rv) + dis
    if name == "PP":
        return max(0.0, dis - (rv - rx) + eps)
    if name == "PPbar":
        return max(0.0, dis - (rx - rv) + eps)
    po = max(0.0, abs(rx - rv) - dis + eps) + max(0.0, dis - rv - rx + eps)
    if name == "PO":
        return po
    if name == "PO1":
        return po + max(0.0, rv - dis + eps)
    if name == "PO2":
        return po + max(0.0, dis - rv)
    if name == "PO3":
        return po + max(0.0, rx - rv + eps)
    if name == "PO4":
        return po + max(0.0, rv - rx)
    raise ValueError(f"unknown relation {rel!r}")


def inspect(rel: AnyRel, a: Sphere, b: Sphere, tol: Tolerances = DEFAULT_TOL) -> float:
    """Non-negative inspection loss for ``rel(a, b)``.

    Zero certifies the relation.  The forms for strict relations (PO and its
    sub-splits, PP, PPbar) carry the margin ``tol.eps_strict``, so near their
    boundary they stay positive even though the relation already holds.
    """
    return inspect_params(rel, *_params(a, b), tol.eps_strict)


def target_loss_params(target: TargetRel, dis: float, rx: float, rv: float, eps: float) -> float:
    if holds_params(target, dis, rx, rv):
        return 0.0
    if target is TargetRel.PO:
        value = max(0.0, abs(rx - rv) - dis) + max(0.0, dis - rx - rv)
    else:
        value = inspect_params(target, dis, rx, rv, eps)
    if value == 0.0:
        # Exactly on the boundary of a strict relation: report the margin.
        value = eps
    return value


def target_loss(target: TargetRel, a: Sphere, b: Sphere, tol: Tolerances = DEFAULT_TOL) -> float:
    """Loss that is zero exactly when ``target(a, b)`` holds.

    Away from the boundary it equals the inspection loss of ``target``; a pair
    sitting exactly on the boundary of a strict target gets ``eps_strict``.
    """
    return target_loss_params(target, *_params(a, b), tol.eps_strict)


def classify_for_target_params(target: TargetRel, dis: float, rx: float, rv: float) -> PartRel:
    if holds_params(target, dis, rx, rv):
        return PartRel(target.value)
    if target in NEGATIVE_TARGETS:
        return PartRel(negate_target(target).value)
    base = base_of(dis, rx, rv)
    if base is BaseRel.PO:
        if target is TargetRel.Pbar:
            return PartRel.PO3 if rx < rv else PartRel.PO4
        if target in (TargetRel.D, TargetRel.P):
            return PartRel.PO1 if dis > rv else PartRel.PO2
    return PartRel(base.value)


def classify_for_target(target: TargetRel, a: Sphere, b: Sphere,
                        tol: Tolerances = DEFAULT_TOL) -> PartRel:
    """Which member of the partition for ``target`` the pair currently sits in."""
    return classify_for_target_params(target, *_params(a, b))


_TRANSPOSE = {
    "PP": "PPbar", "PPbar": "PP",
    "P": "Pbar", "Pbar": "P",
    "NotP": "NotPbar", "NotPbar": "NotP",
}


def transpose(rel):
    """Swap the argument order of a relation (P <-> Pbar, NotP <-> NotPbar)."""
    return type(rel)(_TRANSPOSE.get(rel.value, rel.value))


def rotate_about(mov: Sphere, pivot_center: Sequence[float], plane: tuple[int, int],
                 angle: float) -> Sphere:
    """Rotate ``mov``'s center about ``pivot_center`` within the given axis plane."""
    pivot = np.asarray(pivot_center, dtype=float)
    if pivot.shape != mov.center.shape:
        raise ValueError("pivot dimension does not match sphere")
    i, j = plane
    n = mov.dim
    if not (0 <= i < n and 0 <= j < n) or i == j:
        raise ValueError(f"invalid rotation plane {plane!r} for dimension {n}")
    rel = mov.center - pivot
    c, s = math.cos(angle), math.sin(angle)
    out = rel.copy()
    out[i] = c * rel[i] - s * rel[j]
    out[j] = s * rel[i] + c * rel[j]
    return mov.moved(center=pivot + out)
