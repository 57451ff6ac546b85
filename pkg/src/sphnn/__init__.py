"""Syllogistic reasoning by constructing sphere configurations."""
from .config import OptimConfig
from .errors import (NoDecrease, NumericError, ParseError, SphnnError, StepCapExceeded,
                     StepPrecondition, TimeLimitExceeded)
from .geometry import BaseRel, PartRel, Sphere, TargetRel, classify, holds, inspect, transpose
from .optimizer import StepTrace, cop, realize, realize_fixed_orientation
from .reasoner import (Constraint, Invalid, Sat, Unsat, Valid, check_model, decide_satisfiability,
                       decide_validity, s3, sn, spatialise)
from .syllogism import Mood, Statement, Task, negate, parse_task

__all__ = [
    "OptimConfig", "SphnnError", "NumericError", "StepCapExceeded", "NoDecrease",
    "StepPrecondition", "TimeLimitExceeded", "ParseError", "BaseRel", "PartRel", "TargetRel",
    "Sphere", "classify", "holds", "inspect", "transpose", "StepTrace", "realize", "cop",
    "realize_fixed_orientation", "Constraint", "Sat", "Unsat", "Valid", "Invalid",
    "check_model", "decide_satisfiability", "decide_validity", "s3", "sn", "spatialise",
    "Mood", "Statement", "Task", "negate", "parse_task",
]
