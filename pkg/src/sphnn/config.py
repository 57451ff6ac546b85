"""Optimizer configuration shared by the transition and control layers."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace

from .geometry import Tolerances


@dataclass(frozen=True)
class OptimConfig:
    """Step size, margins, initial geometry and caps.

    Two configs that compare equal produce identical verdicts and traces.
    """

    dim: int = 2
    learning_rate: float = 1e-4
    tol: Tolerances = field(default_factory=Tolerances)
    init_center_norm: float = 10.0
    init_log_radius: float = 0.0
    eq_break_scale: float = 0.01
    cop_min_decrease: float = 1e-7
    max_steps_per_transition: int = 1_000_000
    seed: int = 0
    random_init: bool = False

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")
        for name in ("learning_rate", "eq_break_scale", "init_center_norm"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.cop_min_decrease < 0:
            raise ValueError("cop_min_decrease must be non-negative")
        if not 0 < self.max_steps_per_transition < float("inf"):
            raise ValueError("max_steps_per_transition must be a positive finite integer")

    @property
    def eps(self) -> float:
        return self.tol.eps_strict

    def with_(self, **changes) -> "OptimConfig":
        if "eps" in changes:
            changes["tol"] = Tolerances(changes.pop("eps"))
        return replace(self, **changes)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["tol"] = {"eps_strict": self.tol.eps_strict}
        return d

    def config_hash(self) -> str:
        """Short digest of every field except the seed."""
        d = self.to_dict()
        d.pop("seed")
        blob = json.dumps(d, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]
