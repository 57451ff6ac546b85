"""Compiled inner loops for realize and COP.

The relation logic here mirrors ``geometry`` and ``transitions`` on integer
codes so that numba can compile it.  All coefficient tables are generated
from the Python definitions in ``transitions``; nothing is entered twice.
The pure-Python ``transitions.apply_step`` is the reference the tests hold
these loops against.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

from . import transitions as tr
from ._fastmath import dist
from .geometry import BaseRel, PartRel, TargetRel

TARGETS = list(TargetRel)
PARTS = list(PartRel)
BASES = list(BaseRel)
T_CODE = {t: i for i, t in enumerate(TARGETS)}
P_CODE = {p: i for i, p in enumerate(PARTS)}
B_CODE = {b: i for i, b in enumerate(BASES)}

REACHED = -1
UNDEFINED = -2

# status codes
OK = 0
NEED_EQ_BREAK = 1
STEP_CAP = 2
NO_DECREASE = 3
UNDEFINED_CELL = 4


def _tables():
    steps = []
    lookup = np.full((len(TARGETS), len(PARTS)), UNDEFINED, dtype=np.int64)
    for t in TARGETS:
        for p in PARTS:
            out = tr.lookup(t, p)
            if out is tr.Reached:
                lookup[T_CODE[t], P_CODE[p]] = REACHED
            elif isinstance(out, tr.Step):
                lookup[T_CODE[t], P_CODE[p]] = len(steps)
                steps.append(out)
    n = len(steps)
    coef = np.zeros((n, 6))          # a, b, c, k, ga, gb
    allowed = np.zeros(n, dtype=np.int64)
    red = np.zeros(n, dtype=np.int64)
    eqb = np.zeros(n, dtype=np.int64)
    for i, s in enumerate(steps):
        if s.breaks_eq:
            eqb[i] = 1
            continue
        spec = tr._spec(s)
        ga, gb = tr._masked_coeffs(spec)
        coef[i] = (spec.a, spec.b, spec.c, spec.k, ga, gb)
        mask = 0
        for b in tr._witness(s.source) | tr._witness(s.dest):
            mask |= 1 << B_CODE[b]
        allowed[i] = mask
        red[i] = 1 if (s.source is PartRel.PO1 and s.target is TargetRel.P) else 0
    return steps, lookup, coef, allowed, red, eqb


STEPS, LOOKUP, COEF, ALLOWED, RED, EQB = _tables()
PPBAR_BIT = 1 << B_CODE[BaseRel.PPbar]

# target code -> part code when the target holds / when its complement holds
_HOLD_PART = np.array([P_CODE[PartRel(t.value)] for t in TARGETS], dtype=np.int64)
_NEG_PART = np.array(
    [P_CODE[PartRel(t.value[3:])] if t.value.startswith("Not") else -1 for t in TARGETS],
    dtype=np.int64)
_BASE_PART = np.array([P_CODE[PartRel(b.value)] for b in BASES], dtype=np.int64)

T_D, T_P, T_PBAR, T_NOTD, T_NOTP, T_NOTPBAR, T_PO = range(7)
B_D, B_PO, B_PP, B_PPBAR, B_EQ = range(5)


@njit(cache=True, nogil=True)
def base_code(dis, rx, rv):
    if dis - (rx + rv) >= 0:
        return B_D
    if dis == 0.0 and rx == rv:
        return B_EQ
    if dis <= rv - rx:
        return B_PP
    if dis <= rx - rv:
        return B_PPBAR
    return B_PO


@njit(cache=True, nogil=True)
def holds_t(t, dis, rx, rv):
    if t == T_D:
        return dis - (rx + rv) >= 0
    if t == T_P:
        return dis <= rv - rx
    if t == T_PBAR:
        return dis <= rx - rv
    if t == T_NOTD:
        return not (dis - (rx + rv) >= 0)
    if t == T_NOTP:
        return not (dis <= rv - rx)
    if t == T_NOTPBAR:
        return not (dis <= rx - rv)
    return base_code(dis, rx, rv) == B_PO


@njit(cache=True, nogil=True)
def classify_for_target(t, dis, rx, rv, hold_part, neg_part, base_part):
    if holds_t(t, dis, rx, rv):
        return hold_part[t]
    if neg_part[t] >= 0:
        return neg_part[t]
    b = base_code(dis, rx, rv)
    if b == B_PO:
        if t == T_PBAR:
            return 3 if rx < rv else 4
        if t == T_D or t == T_P:
            return 1 if dis > rv else 2
    return base_part[b]


@njit(cache=True, nogil=True)
def target_loss(t, dis, rx, rv, eps):
    if holds_t(t, dis, rx, rv):
        return 0.0
    if t == T_D:
        v = rx + rv - dis
    elif t == T_P:
        v = dis - (rv - rx)
    elif t == T_PBAR:
        v = dis - (rx - rv)
    elif t == T_NOTD:
        v = dis - rx - rv
    elif t == T_NOTP:
        v = (rv - rx) - dis
    elif t == T_NOTPBAR:
        v = (rx - rv) - dis
    else:
        v = max(0.0, abs(rx - rv) - dis) + max(0.0, dis - rx - rv)
    if v <= 0.0:
        v = eps
    return v


@njit(cache=True, nogil=True)
def delta_value(coef, s, dis, rx, rv, eps, margin):
    k = coef[s, 3]
    if margin and k == 0.0:
        k = 1.0
    v = coef[s, 0] * dis + coef[s, 1] * rx + coef[s, 2] * rv + k * eps
    return v if v > 0.0 else 0.0


@njit(cache=True, nogil=True)
def scalar_step(coef, allowed, red, s, dis, logr, rv, lr, eps, margin):
    """Mirror of ``transitions.scalar_step``; returns (status, dis, logr)."""
    rx = math.exp(logr)
    value = delta_value(coef, s, dis, rx, rv, eps, margin)
    if value <= 0.0:
        return NO_DECREASE, dis, logr
    ga = coef[s, 4]
    gb = coef[s, 5]
    if ga == 0.0 and gb == 0.0:
        return NO_DECREASE, dis, logr
    mask = allowed[s]
    if red[s] == 1 and not rx < 2.0 * rv:
        mask = mask | PPBAR_BIT
    # joint move first, then radius only, then center only
    for mode in range(3):
        use_c = 1.0 if mode != 1 else 0.0
        use_r = 1.0 if mode != 2 else 0.0
        if mode > 0 and ((ga == 0.0) or (gb == 0.0)):
            break
        d_dis = -lr * ga * use_c
        d_log = -lr * gb * rx * use_r
        for _ in range(64):
            nd = dis + d_dis
            if nd < 0.0:
                nd = 0.0
            nl = logr + d_log
            nrx = math.exp(nl)
            if (mask >> base_code(nd, nrx, rv)) & 1:
                if delta_value(coef, s, nd, nrx, rv, eps, margin) < value:
                    return OK, nd, nl
            d_dis *= 0.5
            d_log *= 0.5
    return NO_DECREASE, dis, logr


@njit(cache=True, nogil=True)
def _unit(c, fc):
    d = c - fc
    n = dist(c, fc)
    if n > 0.0:
        return d / n, n
    u = np.zeros(c.shape[0])
    u[0] = 1.0
    return u, 0.0


@njit(cache=True, nogil=True)
def realize(t, c, logr, fc, fr, lr, eps, cap,
            lookup, coef, allowed, red, eqb, hold_part, neg_part, base_part):
    """The realize loop on raw arrays.  ``c`` is updated in place.

    Returns (status, logr, steps, transitions).
    """
    steps = 0
    trans = 0
    while True:
        u, dis = _unit(c, fc)
        rx = math.exp(logr)
        p = classify_for_target(t, dis, rx, fr, hold_part, neg_part, base_part)
        s = lookup[t, p]
        if s == REACHED:
            return OK, logr, steps, trans
        if s == UNDEFINED:
            return UNDEFINED_CELL, logr, steps, trans
        if eqb[s] == 1:
            return NEED_EQ_BREAK, logr, steps, trans
        n = 0
        status = OK
        while True:
            margin = delta_value(coef, s, dis, math.exp(logr), fr, eps, False) <= 0.0
            status, dis, logr = scalar_step(coef, allowed, red, s, dis, logr, fr, lr, eps, margin)
            if status != OK:
                break
            n += 1
            if n >= cap:
                status = STEP_CAP
                break
            if classify_for_target(t, dis, math.exp(logr), fr,
                                   hold_part, neg_part, base_part) != p:
                break
        for i in range(c.shape[0]):
            c[i] = fc[i] + dis * u[i]
        steps += n
        if status != OK:
            return status, logr, steps, trans
        trans += 1


@njit(cache=True, nogil=True)
def one_step(t, c, logr, fc, fr, lr, eps,
             lookup, coef, allowed, red, eqb, hold_part, neg_part, base_part):
    """A single gradient step towards ``t``.  Returns (status, logr)."""
    u, dis = _unit(c, fc)
    rx = math.exp(logr)
    p = classify_for_target(t, dis, rx, fr, hold_part, neg_part, base_part)
    s = lookup[t, p]
    if s == REACHED:
        return OK, logr
    if s == UNDEFINED:
        return UNDEFINED_CELL, logr
    if eqb[s] == 1:
        return NEED_EQ_BREAK, logr
    margin = delta_value(coef, s, dis, rx, fr, eps, False) <= 0.0
    status, dis, logr = scalar_step(coef, allowed, red, s, dis, logr, fr, lr, eps, margin)
    for i in range(c.shape[0]):
        c[i] = fc[i] + dis * u[i]
    return status, logr


@njit(cache=True, nogil=True)
def cop(tzx, tzy, c, logr, xc, xr, yc, yr, lr, lr_floor, lr_cap, eps, min_dec, max_iters, cap,
        last, hist, lookup, coef, allowed, red, eqb, hold_part, neg_part, base_part):
    """Outer COP loop for at most ``max_iters`` iterations.

    ``c`` is updated in place; ``last`` is the loss before the first
    iteration.  An iteration that does not decrease the loss is rolled back;
    the loop then stops, unless ``lr_floor < lr``, in which case the step is
    halved and retried while it stays at or above ``lr_floor``.  A successful
    iteration doubles the step, up to ``lr_cap`` (which is ``lr`` for the
    fixed-step loop); with a variable step a failed repair is also rolled
    back and retried with a smaller step.  Returns (status, logr, gloss,
    n_hist, steps, transitions, finished).  ``finished`` is False only when
    the iteration budget ran out while the loss was still decreasing.
    """
    steps = 0
    trans = 0
    n_hist = 0
    gl = last
    prev = c.copy()
    step_lr = lr
    for _ in range(max_iters):
        if gl <= 0.0:
            return OK, logr, gl, n_hist, steps, trans, True
        prev[:] = c
        prev_logr = logr
        status, logr = one_step(tzx, c, logr, xc, xr, step_lr, eps,
                                lookup, coef, allowed, red, eqb, hold_part, neg_part, base_part)
        steps += 1
        if status != OK:
            c[:] = prev
            logr = prev_logr
            if step_lr * 0.5 >= lr_floor:
                step_lr *= 0.5
                continue
            return status, prev_logr, gl, n_hist, steps, trans, True
        status, logr, st, tn = realize(tzy, c, logr, yc, yr, step_lr, eps, cap,
                                       lookup, coef, allowed, red, eqb,
                                       hold_part, neg_part, base_part)
        steps += st
        trans += tn
        if status != OK:
            if status == NEED_EQ_BREAK:
                return status, logr, gl, n_hist, steps, trans, False
            c[:] = prev
            logr = prev_logr
            if status != STEP_CAP and step_lr * 0.5 >= lr_floor:
                step_lr *= 0.5
                continue
            return status, prev_logr, gl, n_hist, steps, trans, True
        new = target_loss(tzx, dist(c, xc), math.exp(logr), xr, eps)
        if not new < gl or gl - new <= min_dec * (step_lr / lr):
            if new < gl:
                gl = new
                hist[n_hist] = gl
                n_hist += 1
            else:
                c[:] = prev
                logr = prev_logr
            if step_lr * 0.5 >= lr_floor:
                step_lr *= 0.5
                continue
            return OK, logr, gl, n_hist, steps, trans, True
        gl = new
        hist[n_hist] = gl
        n_hist += 1
        if step_lr < lr_cap:
            step_lr = min(lr_cap, step_lr * 2.0)
    return OK, logr, gl, n_hist, steps, trans, False


TABLES = (LOOKUP, COEF, ALLOWED, RED, EQB, _HOLD_PART, _NEG_PART, _BASE_PART)


@njit(cache=True, nogil=True)
def ray_realize(t, lam, logr, o, fc, fr, lr, eps, cap,
                lookup, coef, allowed, red, eqb, hold_part, neg_part, base_part):
    """Realise ``t`` for a sphere centred at ``lam * o`` with ``lam >= 0``.

    Same loop as ``realize`` but the center can only slide along its ray, so
    the distance gradient is projected onto ``o``.  Returns (lam, logr, ok,
    steps, transitions); ``ok`` is False when progress stalls (the ray's
    closest approach, or the origin, blocks the move).
    """
    p = 0.0
    q = 0.0
    for i in range(o.shape[0]):
        p += o[i] * fc[i]
        q += fc[i] * fc[i]
    steps = 0
    trans = 0
    while True:
        dis = math.sqrt(max(lam * lam - 2.0 * lam * p + q, 0.0))
        rx = math.exp(logr)
        part = classify_for_target(t, dis, rx, fr, hold_part, neg_part, base_part)
        s = lookup[t, part]
        if s == REACHED:
            return lam, logr, True, steps, trans
        if s == UNDEFINED or eqb[s] == 1:
            return lam, logr, False, steps, trans
        n = 0
        while True:
            dis = math.sqrt(max(lam * lam - 2.0 * lam * p + q, 0.0))
            rx = math.exp(logr)
            margin = delta_value(coef, s, dis, rx, fr, eps, False) <= 0.0
            value = delta_value(coef, s, dis, rx, fr, eps, margin)
            ga = coef[s, 4]
            gb = coef[s, 5]
            slope = (lam - p) / dis if dis > 0.0 else 0.0
            d_lam = -lr * ga * slope
            if lam + d_lam < 0.0:
                d_lam = -lam
            d_log = -lr * gb * rx
            if abs(d_lam) < lr * 1e-6 and d_log == 0.0:
                return lam, logr, False, steps + n, trans
            mask = allowed[s]
            if red[s] == 1 and not rx < 2.0 * fr:
                mask = mask | PPBAR_BIT
            moved = False
            for _ in range(64):
                nl = lam + d_lam
                nlog = logr + d_log
                nd = math.sqrt(max(nl * nl - 2.0 * nl * p + q, 0.0))
                nrx = math.exp(nlog)
                if (mask >> base_code(nd, nrx, fr)) & 1:
                    if delta_value(coef, s, nd, nrx, fr, eps, margin) < value:
                        lam = nl
                        logr = nlog
                        moved = True
                        break
                d_lam *= 0.5
                d_log *= 0.5
            if not moved:
                return lam, logr, False, steps + n, trans
            n += 1
            if n >= cap:
                return lam, logr, False, steps + n, trans
            dis = math.sqrt(max(lam * lam - 2.0 * lam * p + q, 0.0))
            if classify_for_target(t, dis, math.exp(logr), fr,
                                   hold_part, neg_part, base_part) != part:
                break
        steps += n
        trans += 1
