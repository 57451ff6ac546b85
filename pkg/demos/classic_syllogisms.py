"""Decide a few classic syllogisms and draw a counter-model.

A task is valid when no arrangement of circles satisfies the premises
together with the negated conclusion.  For an invalid task the engine
returns such an arrangement, which we check and save as SVG.
"""
from pathlib import Path

from sphnn.cli import render_svg
from sphnn.config import OptimConfig
from sphnn.reasoner import check_model, decide_validity, task_constraints
from sphnn.syllogism import parse_task

cfg = OptimConfig()

tasks = {
    "Barbara": "all m p\nall s m\ntherefore: all s p",
    "Celarent": "no m p\nall s m\ntherefore: no s p",
    "undistributed middle": "all p m\nall s m\ntherefore: all s p",
    "illicit minor": "all m p\nall m s\ntherefore: all s p",
}

counter = None
for name, text in tasks.items():
    task = parse_task(text)
    v = decide_validity(task, cfg)
    t = v.trace
    print(f"{name:22s} {'valid' if v.valid else 'invalid':8s} "
          f"transitions={t.transitions} restarts={t.restarts} {t.wall_time * 1000:.1f} ms")
    if not v.valid and counter is None:
        counter = (name, task, v.counter_model)

name, task, model = counter
print(f"\ncounter-model for {name!r} (loss {check_model(model, task_constraints(task))}):")
for term, s in sorted(model.items()):
    print(f"  {term}: center=({s.center[0]:.3f}, {s.center[1]:.3f}) radius={s.radius:.3f}")

out = Path("counter_model.svg")
out.write_text(render_svg(2, model))
print(f"wrote {out}")
