"""Satisfy statements with every center pinned to a given direction.

Embedding vectors fix where each circle may sit: only the distance along
the ray and the radius are free.  Nested "all" statements fit easily.  A
cycle of "all" statements forces the three circles to coincide, which rays
in different directions cannot do, so that set fails.
"""
import numpy as np

from sphnn.config import OptimConfig
from sphnn.geometry import TargetRel
from sphnn.optimizer import realize_fixed_orientation

rng = np.random.default_rng(1)
cfg = OptimConfig(dim=16)
rays = rng.standard_normal((3, cfg.dim))
P = TargetRel.P

cases = {
    "a in b, b in c, a in c": [(P, 0, 1), (P, 1, 2), (P, 0, 2)],
    "a in b, b in c, c in a": [(P, 0, 1), (P, 1, 2), (P, 2, 0)],
    "a apart from b, a in c": [(TargetRel.D, 0, 1), (P, 0, 2), (TargetRel.NotD, 1, 2)],
}
for name, cons in cases.items():
    res = realize_fixed_orientation(cons, rays, cfg)
    print(f"{name:26s} {'sat' if res.sat else 'unsat':5s} after {res.sweeps} sweeps, "
          f"{res.trace.transitions} transitions")
    if res.sat:
        for k, s in sorted(res.spheres.items()):
            along = float(s.center @ rays[k] / np.linalg.norm(rays[k]))
            print(f"    sphere {k}: {along:8.3f} along its ray, radius {s.radius:.3f}")
