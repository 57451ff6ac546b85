"""Control processes: realise a single relation, and optimise one relation of a
sphere while preserving another (COP).  Also the fixed-orientation variant in
which every center is confined to a prescribed ray."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels as K
from .config import OptimConfig
from .errors import NoDecrease, NumericError, StepCapExceeded, StepPrecondition, TimeLimitExceeded
from .geometry import Sphere, TargetRel, holds, target_loss, transpose
from .transitions import break_eq

__all__ = [
    "OptimConfig", "StepTrace", "realize", "cop", "realize_fixed_orientation",
    "coincided_spheres", "random_spheres", "check_deadline",
]

_COP_CHUNK = 20_000


@dataclass
class StepTrace:
    """Work counters for one decider call.  All counters only ever grow.

    ``gloss_history`` keeps one loss sequence per COP call while
    ``record_gloss`` is set; the deciders switch it off to bound memory.
    """

    steps: int = 0
    transitions: int = 0
    restarts: int = 0
    cop_calls: int = 0
    wall_time: float = 0.0
    record_gloss: bool = True
    gloss_history: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "stepsTaken": self.steps,
            "transitionsTaken": self.transitions,
            "restarts": self.restarts,
            "copCalls": self.cop_calls,
            "wallTimeMs": round(self.wall_time * 1000.0, 3),
        }


def check_deadline(deadline: float | None) -> None:
    if deadline is not None and time.monotonic() >= deadline:
        raise TimeLimitExceeded("time limit reached")


def _rng(cfg: OptimConfig, rng):
    return rng if rng is not None else np.random.default_rng(cfg.seed)


def _raise_for(status: int, what: str) -> None:
    if status == K.STEP_CAP:
        raise StepCapExceeded(f"{what}: step cap exceeded")
    if status == K.NO_DECREASE:
        raise NoDecrease(f"{what}: a step failed to decrease its loss")
    if status == K.UNDEFINED_CELL:
        raise NumericError(f"{what}: reached a relation outside the target's partition")
    raise NumericError(f"{what}: unexpected status {status}")


def _realize_arrays(target: TargetRel, c: np.ndarray, logr: float, fixed: Sphere,
                    cfg: OptimConfig, rng, trace: StepTrace, deadline) -> float:
    t = K.T_CODE[target]
    fc = np.ascontiguousarray(fixed.center, dtype=float)
    while True:
        check_deadline(deadline)
        status, logr, st, tn = K.realize(t, c, logr, fc, fixed.radius, cfg.learning_rate,
                                         cfg.eps, cfg.max_steps_per_transition, *K.TABLES)
        trace.steps += st
        trace.transitions += tn
        if status == K.OK:
            return logr
        if status == K.NEED_EQ_BREAK or (status == K.NO_DECREASE and np.array_equal(c, fc)):
            # Concentric spheres have no line of centers either: a radius-only
            # path would cross EQ, so shift the center as for a coincidence.
            c[:] = break_eq(Sphere(c, logr), cfg, rng).center
            trace.transitions += 1
            continue
        _raise_for(status, f"realize {target.value}")


def realize(target: TargetRel, mov: Sphere, fixed: Sphere, cfg: OptimConfig = OptimConfig(),
            rng: np.random.Generator | None = None, trace: StepTrace | None = None,
            deadline: float | None = None) -> tuple[Sphere, StepTrace]:
    """Move ``mov`` (``fixed`` stays put) until ``target(mov, fixed)`` holds.

    Repeats: inspect the pair against the target, look up the next
    neighbourhood transition, descend its Delta function until the pair
    leaves the current partition member.
    """
    trace = StepTrace() if trace is None else trace
    if holds(target, mov, fixed):
        return mov, trace
    c = np.array(mov.center, dtype=float)
    logr = _realize_arrays(target, c, mov.log_radius, fixed, cfg, _rng(cfg, rng), trace, deadline)
    out = Sphere(c, logr)
    if not holds(target, out, fixed):
        raise NumericError(f"realize {target.value}: finished without the target holding")
    return out, trace


def cop(z: Sphere, x: Sphere, y: Sphere, t_zx: TargetRel, t_zy: TargetRel,
        cfg: OptimConfig = OptimConfig(), rng: np.random.Generator | None = None,
        trace: StepTrace | None = None, deadline: float | None = None,
        lr_floor: float | None = None,
        lr_cap: float | None = None) -> tuple[float, Sphere, StepTrace]:
    """Improve ``t_zx(z, x)`` while keeping ``t_zy(z, y)``; x and y stay fixed.

    Each outer iteration takes one gradient step towards ``t_zx`` and then
    repairs ``t_zy``.  The loop stops as soon as the loss towards ``t_zx``
    fails to decrease (by more than ``cfg.cop_min_decrease``); an iteration
    that made the loss worse is rolled back.  Returns the final loss (zero
    means both relations hold) and the moved sphere.  The loss sequence is
    appended to ``trace.gloss_history``.

    With ``lr_floor`` below the learning rate, a failed iteration halves the
    step and tries again instead of stopping, down to ``lr_floor``.  With
    ``lr_cap`` above it, each successful iteration doubles the step up to
    ``lr_cap``.  Both default to the learning rate, which gives the plain
    fixed-step loop.
    """
    trace = StepTrace() if trace is None else trace
    if not holds(t_zy, z, y):
        raise StepPrecondition(f"cop needs {t_zy.value}(z, y) to hold on entry")
    rng = _rng(cfg, rng)
    trace.cop_calls += 1
    gl = target_loss(t_zx, z, x, cfg.tol)
    history = [gl]
    if trace.record_gloss:
        trace.gloss_history.append(history)
    c = np.array(z.center, dtype=float)
    logr = z.log_radius
    xc = np.ascontiguousarray(x.center, dtype=float)
    yc = np.ascontiguousarray(y.center, dtype=float)
    buf = np.empty(_COP_CHUNK)
    tzx, tzy = K.T_CODE[t_zx], K.T_CODE[t_zy]
    lr = cfg.learning_rate
    floor = lr if lr_floor is None else min(lr_floor, lr)
    top = lr if lr_cap is None else max(lr_cap, lr)
    iters = 0
    while gl > 0.0:
        check_deadline(deadline)
        status, logr, gl, n, st, tn, finished = K.cop(
            tzx, tzy, c, logr, xc, x.radius, yc, y.radius, lr, floor, top, cfg.eps,
            cfg.cop_min_decrease, _COP_CHUNK, cfg.max_steps_per_transition, gl, buf, *K.TABLES)
        if trace.record_gloss:
            history.extend(buf[:n].tolist())
        trace.steps += st
        trace.transitions += tn
        iters += n
        if status == K.NEED_EQ_BREAK:
            # Landed exactly on a coincidence: perturb, restore t_zy, go on.
            moved = break_eq(Sphere(c, logr), cfg, rng)
            moved, _ = realize(t_zy, moved, y, cfg, rng, trace, deadline)
            new = target_loss(t_zx, moved, x, cfg.tol)
            trace.transitions += 1
            if not new < gl:
                break
            c, logr, gl = np.array(moved.center), moved.log_radius, new
            history.append(gl)
            continue
        if status == K.STEP_CAP:
            _raise_for(status, "cop repair")
        if finished:
            break
        if iters >= cfg.max_steps_per_transition:
            raise StepCapExceeded("cop: outer iteration cap exceeded")
    out = Sphere(c, logr)
    if not holds(t_zy, out, y):
        raise NumericError("cop lost the preserved relation")
    return gl, out, trace


# --------------------------------------------------------------------------
# Initial configurations


def coincided_spheres(n: int, cfg: OptimConfig) -> list[Sphere]:
    """``n`` identical spheres: radius ``exp(init_log_radius)``, center of norm
    ``init_center_norm`` along the all-ones direction."""
    center = np.full(cfg.dim, cfg.init_center_norm / math.sqrt(cfg.dim))
    return [Sphere(center, cfg.init_log_radius) for _ in range(n)]


def random_spheres(n: int, cfg: OptimConfig, rng: np.random.Generator) -> list[Sphere]:
    """Random centers of norm ``init_center_norm`` and log-radii spread around
    ``init_log_radius``."""
    out = []
    for _ in range(n):
        v = rng.standard_normal(cfg.dim)
        v *= cfg.init_center_norm / np.linalg.norm(v)
        out.append(Sphere(v, cfg.init_log_radius + rng.uniform(-0.5, 0.5)))
    return out


# --------------------------------------------------------------------------
# Fixed orientation


@dataclass
class FixedOrientationResult:
    sat: bool
    spheres: dict
    sweeps: int
    trace: StepTrace


def _ray_realize(target: TargetRel, lam: float, logr: float, o: np.ndarray, fixed: Sphere,
                 cfg: OptimConfig, trace: StepTrace, deadline) -> tuple[float, float, bool]:
    """Realise ``target`` for a sphere whose center is ``lam * o`` (``lam >= 0``).

    Returns the new (lam, logr) and whether the target now holds.  Gives up
    when a full transition makes no progress, which happens when the ray
    cannot bring the center close enough (or far enough).
    """
    lam, logr, ok, st, tn = K.ray_realize(
        K.T_CODE[target], lam, logr, o, np.ascontiguousarray(fixed.center, dtype=float),
        fixed.radius, cfg.learning_rate, cfg.eps, cfg.max_steps_per_transition, *K.TABLES)
    trace.steps += st
    trace.transitions += tn
    check_deadline(deadline)
    return lam, logr, bool(ok)


def realize_fixed_orientation(constraints: Sequence[tuple[TargetRel, int, int]],
                              orientations: Sequence[Sequence[float]],
                              cfg: OptimConfig = OptimConfig(), max_outer_iters: int = 9,
                              deadline: float | None = None) -> FixedOrientationResult:
    """Satisfy ``constraints`` with every center confined to its ray.

    ``orientations[i]`` is the direction of sphere ``i``.  Each sweep walks the
    constraint list in order and realises every violated constraint by moving
    one sphere of the pair along its ray and rescaling it.  Both choices of
    mover are tried and the one leaving more constraints satisfied is kept.
    Ties alternate from sweep to sweep, so a containment the contained
    sphere cannot reach is achieved by enlarging the container in the next
    sweep.
    """
    if max_outer_iters < 1:
        raise ValueError("max_outer_iters must be positive")
    dirs = []
    for o in orientations:
        v = np.asarray(o, dtype=float)
        n = np.linalg.norm(v)
        if not n > 0:
            raise ValueError("orientations must be non-zero vectors")
        dirs.append(v / n)
    for i in range(len(dirs)):
        for j in range(i):
            if np.allclose(dirs[i], dirs[j], rtol=0, atol=1e-12):
                raise ValueError(f"orientations {j} and {i} coincide")
    trace = StepTrace()
    lam = [cfg.init_center_norm] * len(dirs)
    logr = [cfg.init_log_radius] * len(dirs)

    def sphere(i):
        return Sphere(lam[i] * dirs[i], logr[i])

    def all_hold():
        return all(holds(t, sphere(i), sphere(j)) for t, i, j in constraints)

    sweeps = 0
    start = time.monotonic()
    for sweep in range(max_outer_iters):
        if all_hold():
            break
        sweeps += 1
        for t, i, j in constraints:
            if holds(t, sphere(i), sphere(j)):
                continue
            # Try both spheres as the mover and keep the move that leaves
            # more constraints satisfied; on a tie even sweeps move the
            # first argument and odd sweeps the second.
            options = [(i, j, t), (j, i, transpose(t))]
            if sweep % 2:
                options.reverse()
            best = None
            for mov, fix, target in options:
                moved = _ray_realize(target, lam[mov], logr[mov], dirs[mov], sphere(fix),
                                     cfg, trace, deadline)
                saved = lam[mov], logr[mov]
                lam[mov], logr[mov] = moved[0], moved[1]
                score = sum(holds(c, sphere(a), sphere(b)) for c, a, b in constraints)
                lam[mov], logr[mov] = saved
                if best is None or score > best[0]:
                    best = (score, mov, moved)
            _, mov, moved = best
            lam[mov], logr[mov] = moved[0], moved[1]
    trace.wall_time = time.monotonic() - start
    spheres = {i: sphere(i) for i in range(len(dirs))}
    return FixedOrientationResult(all_hold(), spheres, sweeps, trace)
