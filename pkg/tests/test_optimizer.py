import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sphnn.config import OptimConfig
from sphnn.errors import StepPrecondition, TimeLimitExceeded
from sphnn.geometry import BaseRel, Sphere, TargetRel, classify, holds, inspect, target_loss
from sphnn.oracle import brute_force_third
from sphnn.optimizer import (
    StepTrace,
    check_deadline,
    coincided_spheres,
    cop,
    random_spheres,
    realize,
    realize_fixed_orientation,
)

CFG = OptimConfig()
SYLLOGISTIC = [t for t in TargetRel if t is not TargetRel.PO]


def grid_sphere(draw):
    x, y = draw(st.integers(-3, 3)), draw(st.integers(-3, 3))
    return Sphere.from_radius([x, y], draw(st.integers(1, 3)))


class TestRealize:
    @settings(max_examples=150, deadline=None)
    @given(st.sampled_from(list(TargetRel)), st.data())
    def test_reaches_target_exactly(self, target, data):
        mov = grid_sphere(data.draw)
        fixed = grid_sphere(data.draw)
        out, trace = realize(target, mov, fixed, CFG, np.random.default_rng(0))
        assert holds(target, out, fixed)
        assert target_loss(target, out, fixed) == 0.0
        assert fixed.center.tolist() == fixed.center.tolist()

    @pytest.mark.parametrize("target", [TargetRel.D, TargetRel.P, TargetRel.Pbar])
    def test_certified_by_inspect(self, target):
        out, _ = realize(target, Sphere.from_radius([0.5, 0], 1.0), Sphere.from_radius([0, 0], 1.0),
                         CFG)
        assert inspect(target, out, Sphere.from_radius([0, 0], 1.0)) == 0.0

    def test_from_coincidence(self):
        a, b = coincided_spheres(2, CFG)
        out, trace = realize(TargetRel.D, a, b, CFG, np.random.default_rng(3))
        assert classify(out, b) is BaseRel.D
        assert trace.transitions >= 2

    @pytest.mark.parametrize("target", [TargetRel.P, TargetRel.NotPbar, TargetRel.D])
    def test_from_concentric_containment(self, target):
        big = Sphere.from_radius([0, 0], 2.0)
        small = Sphere.from_radius([0, 0], 1.0)
        out, _ = realize(target, big, small, CFG, np.random.default_rng(0))
        assert holds(target, out, small)

    def test_already_holding_is_free(self):
        a = Sphere.from_radius([0, 0], 1.0)
        b = Sphere.from_radius([5, 0], 1.0)
        out, trace = realize(TargetRel.D, a, b, CFG)
        assert out is a and trace.steps == 0

    def test_counters_only_grow(self):
        trace = StepTrace()
        a = Sphere.from_radius([0, 0], 1.0)
        b = Sphere.from_radius([0.5, 0], 1.0)
        last = (0, 0)
        for t in (TargetRel.D, TargetRel.P, TargetRel.NotP, TargetRel.Pbar):
            a, _ = realize(t, a, b, CFG, trace=trace)
            now = (trace.steps, trace.transitions)
            assert now >= last
            last = now

    def test_deadline(self):
        with pytest.raises(TimeLimitExceeded):
            realize(TargetRel.D, Sphere.from_radius([0, 0], 1.0), Sphere.from_radius([0.1, 0], 1.0),
                    CFG, deadline=time.monotonic())

    def test_check_deadline(self):
        check_deadline(None)
        check_deadline(time.monotonic() + 60)
        with pytest.raises(TimeLimitExceeded):
            check_deadline(time.monotonic() - 1)

    def test_high_dimension(self):
        cfg = OptimConfig(dim=500)
        a, b = coincided_spheres(2, cfg)
        out, _ = realize(TargetRel.NotP, a, b, cfg, np.random.default_rng(1))
        assert holds(TargetRel.NotP, out, b)


def _recorded(trace):
    return trace.gloss_history[-1]


class TestCop:
    def test_slides_around_blocker(self):
        # z must end inside x while staying apart from y, which sits in between
        y = Sphere.from_radius([0, 0], 1.0)
        x = Sphere.from_radius([3, 0], 1.0)
        z = Sphere.from_radius([-2, 0.3], 0.5)
        gl, out, trace = cop(z, x, y, TargetRel.P, TargetRel.D, CFG.with_(learning_rate=1e-3))
        assert gl == 0.0
        assert holds(TargetRel.P, out, x) and holds(TargetRel.D, out, y)
        hist = _recorded(trace)
        assert all(b <= a for a, b in zip(hist, hist[1:]))
        # it went round: the path left the axis on the side it started
        assert out.center[1] > 0.0

    def test_exactly_collinear_start_stalls(self):
        # with all three centers on one line the step and the repair cancel
        y = Sphere.from_radius([0, 0], 1.0)
        x = Sphere.from_radius([3, 0], 1.0)
        z = Sphere.from_radius([-2, 0], 0.5)
        gl, out, _ = cop(z, x, y, TargetRel.P, TargetRel.D, CFG.with_(learning_rate=1e-3))
        assert gl > 0.0
        assert holds(TargetRel.D, out, y)

    def test_impossible_set_keeps_positive_loss(self):
        # x = y concentric and x no larger: inside x and apart from y cannot both hold
        x = Sphere.from_radius([0, 0], 1.0)
        y = Sphere.from_radius([0, 0], 2.0)
        z = Sphere.from_radius([4, 0], 0.5)
        assert brute_force_third(((0, 0), 1), ((0, 0), 2), TargetRel.P, TargetRel.D) == []
        gl, out, trace = cop(z, x, y, TargetRel.P, TargetRel.D, CFG.with_(learning_rate=1e-3))
        assert gl > 0.0
        assert holds(TargetRel.D, out, y)

    def test_satisfied_on_entry(self):
        x = Sphere.from_radius([0, 0], 3.0)
        y = Sphere.from_radius([10, 0], 1.0)
        z = Sphere.from_radius([0, 0], 1.0)
        gl, out, trace = cop(z, x, y, TargetRel.P, TargetRel.D, CFG)
        assert gl == 0.0 and out == z and trace.steps == 0

    def test_precondition(self):
        x = Sphere.from_radius([0, 0], 1.0)
        with pytest.raises(StepPrecondition):
            cop(x, x, Sphere.from_radius([0.5, 0], 1.0), TargetRel.P, TargetRel.D, CFG)

    @settings(max_examples=60, deadline=None)
    @given(st.sampled_from(SYLLOGISTIC), st.sampled_from(SYLLOGISTIC), st.data())
    def test_monotone_and_preserving(self, t_zx, t_zy, data):
        x = grid_sphere(data.draw)
        y = grid_sphere(data.draw)
        z = grid_sphere(data.draw)
        cfg = CFG.with_(learning_rate=1e-3)
        z, _ = realize(t_zy, z, y, cfg, np.random.default_rng(0))
        gl, out, trace = cop(z, x, y, t_zx, t_zy, cfg, np.random.default_rng(0))
        hist = _recorded(trace)
        assert hist[0] == target_loss(t_zx, z, x)
        assert hist[-1] == gl
        assert all(b <= a for a, b in zip(hist, hist[1:]))
        assert holds(t_zy, out, y)
        assert (gl == 0.0) == holds(t_zx, out, x)

    def test_adaptive_step_reaches_thin_gap(self):
        # z must fit between x and the inner wall of y; the room is one base step
        y = Sphere.from_radius([0, 0], 2.0)
        x = Sphere.from_radius([0.5, 0], 1.5 - 1e-4)
        z, _ = realize(TargetRel.P, Sphere.from_radius([5, 0], 1.0), y, CFG)
        plain, _, _ = cop(z, x, y, TargetRel.Pbar, TargetRel.P, CFG)
        lr = CFG.learning_rate
        gl, out, _ = cop(z, x, y, TargetRel.Pbar, TargetRel.P, CFG,
                         lr_floor=lr * 1e-6, lr_cap=lr * 2 ** 12)
        assert plain > 0.0
        assert gl == 0.0

    def test_gloss_recording_can_be_disabled(self):
        trace = StepTrace(record_gloss=False)
        x = Sphere.from_radius([3, 0], 1.0)
        y = Sphere.from_radius([0, 0], 1.0)
        cop(Sphere.from_radius([-2, 0], 0.5), x, y, TargetRel.P, TargetRel.D, CFG, trace=trace)
        assert trace.gloss_history == [] and trace.cop_calls == 1


class TestInitialSpheres:
    def test_coincided(self):
        cfg = OptimConfig(dim=4)
        a, b, c = coincided_spheres(3, cfg)
        assert classify(a, b) is BaseRel.EQ and classify(b, c) is BaseRel.EQ
        assert np.linalg.norm(a.center) == pytest.approx(cfg.init_center_norm)

    def test_random_is_seeded(self):
        cfg = OptimConfig(dim=3)
        a = random_spheres(3, cfg, np.random.default_rng(5))
        b = random_spheres(3, cfg, np.random.default_rng(5))
        assert a == b
        assert classify(a[0], a[1]) is not BaseRel.EQ


class TestFixedOrientation:
    def _ray_ok(self, res, dirs):
        for i, o in enumerate(dirs):
            o = np.asarray(o, float) / np.linalg.norm(o)
            c = res.spheres[i].center
            lam = float(c @ o)
            assert lam >= 0.0
            assert np.allclose(c, lam * o, atol=1e-9)

    def test_barbara_like_chain(self):
        rng = np.random.default_rng(0)
        dirs = [rng.standard_normal(50) for _ in range(3)]
        cons = [(TargetRel.P, 0, 1), (TargetRel.P, 1, 2), (TargetRel.P, 0, 2)]
        res = realize_fixed_orientation(cons, dirs, OptimConfig(dim=50))
        assert res.sat
        self._ray_ok(res, dirs)
        for t, i, j in cons:
            assert holds(t, res.spheres[i], res.spheres[j])

    def test_coincidence_forced_cycle_fails(self):
        dirs = [[1, 0], [0, 1], [1, 1]]
        cons = [(TargetRel.P, 0, 1), (TargetRel.P, 1, 2), (TargetRel.P, 2, 0)]
        res = realize_fixed_orientation(cons, dirs, OptimConfig())
        assert not res.sat
        assert res.sweeps == 9
        self._ray_ok(res, dirs)

    def test_max_outer_iters_bounds_sweeps(self):
        dirs = [[1, 0], [0, 1], [1, 1]]
        cons = [(TargetRel.P, 0, 1), (TargetRel.P, 1, 2), (TargetRel.P, 2, 0)]
        assert realize_fixed_orientation(cons, dirs, OptimConfig(), max_outer_iters=2).sweeps == 2

    @pytest.mark.parametrize("dirs", [[[1, 0], [2, 0]], [[1, 0], [0, 0]]])
    def test_rejects_bad_orientations(self, dirs):
        with pytest.raises(ValueError):
            realize_fixed_orientation([(TargetRel.D, 0, 1)], dirs, OptimConfig())

    def test_rejects_zero_iterations(self):
        with pytest.raises(ValueError):
            realize_fixed_orientation([], [[1, 0]], OptimConfig(), max_outer_iters=0)
