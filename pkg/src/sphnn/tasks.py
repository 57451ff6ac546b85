"""Task collections and the benchmark runner.

* ``enumerate_classic`` lists the 256 three-term forms (4 figures, 4 moods per
  statement).
* ``generate_chain_suite`` builds a seeded suite of 24 groups of 5 chain tasks
  with exactly one valid task per group.  Labels come from the composition
  oracle and are re-checked before the suite is returned.
* ``run_benchmark`` decides tasks under a per-task wall-clock limit and
  compares each verdict with the oracle label.
"""
from __future__ import annotations

import csv
import io
import json
import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

from .config import OptimConfig
from .errors import NumericError, TimeLimitExceeded
from .optimizer import StepTrace
from .oracle import chain_valid, valid_classic_forms
from .reasoner import decide_validity
from .syllogism import Mood, Statement, Task, parse_task

__all__ = [
    "FIGURES", "enumerate_classic", "task_id", "Suite", "generate_chain_suite",
    "BenchResult", "run_benchmark", "summarise_results", "accuracy_by_limit",
    "results_to_csv", "GROUPS", "GROUP_SIZE",
]

GROUPS = 24
GROUP_SIZE = 5

# (major premise terms, minor premise terms) for figures 1..4, with the
# conclusion always "<mood> s p".
FIGURES = {
    1: (("m", "p"), ("s", "m")),
    2: (("p", "m"), ("s", "m")),
    3: (("m", "p"), ("m", "s")),
    4: (("p", "m"), ("m", "s")),
}

_MOODS = (Mood.All, Mood.Some, Mood.No, Mood.SomeNot)
_LETTER = {Mood.All: "a", Mood.Some: "i", Mood.No: "e", Mood.SomeNot: "o"}


def enumerate_classic() -> list[Task]:
    """All 256 classic forms, ordered by figure, then major, minor and conclusion mood."""
    out = []
    for fig, (major, minor) in FIGURES.items():
        for m1, m2, m3 in product(_MOODS, repeat=3):
            out.append(Task((Statement(m1, *major), Statement(m2, *minor)),
                            Statement(m3, "s", "p")))
    return out


def task_id(task: Task) -> str:
    """Short stable name: mood letters plus figure for classic forms, else a chain code."""
    terms = task.chain_terms()
    if len(terms) == 3:
        major, minor = task.premises
        for fig, (maj, mi) in FIGURES.items():
            if (major.subject, major.object) == maj and (minor.subject, minor.object) == mi:
                return "".join(_LETTER[s.mood] for s in (major, minor, task.conclusion)) + str(fig)
    parts = []
    for p in task.ordered_premises():
        forward = terms.index(p.subject) < terms.index(p.object)
        parts.append(_LETTER[p.mood] + ("" if forward else "'"))
    return "-".join(parts) + ":" + _LETTER[task.conclusion.mood]


# --------------------------------------------------------------------------
# Chain suites


@dataclass
class Suite:
    n: int
    seed: int
    groups: list  # GROUPS lists of GROUP_SIZE tasks

    @property
    def tasks(self) -> list[Task]:
        return [t for g in self.groups for t in g]

    def labels(self) -> list[bool]:
        return [chain_valid(t) for t in self.tasks]

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n, "seed": self.seed,
            "groups": [[t.to_text() for t in g] for g in self.groups],
        }, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "Suite":
        d = json.loads(text)
        groups = [[parse_task(t) for t in g] for g in d["groups"]]
        suite = cls(int(d["n"]), int(d["seed"]), groups)
        _verify_suite(suite)
        return suite


def chain_term_names(n: int) -> list[str]:
    """``s, m1, ..., m{n-2}, p``; the three-term case uses ``s, m, p``."""
    if n < 3:
        raise ValueError("a chain task needs at least three terms")
    if n == 3:
        return ["s", "m", "p"]
    return ["s"] + [f"m{k}" for k in range(1, n - 1)] + ["p"]


def _random_task(n: int, rng: random.Random) -> Task:
    terms = chain_term_names(n)
    premises = []
    for a, b in zip(terms, terms[1:]):
        if rng.random() < 0.5:
            a, b = b, a
        premises.append(Statement(rng.choice(_MOODS), a, b))
    rng.shuffle(premises)
    return Task(tuple(premises), Statement(rng.choice(_MOODS), terms[0], terms[-1]))


def _insert_all_link(task: Task, rng: random.Random) -> Task | None:
    """Lengthen a valid chain by one "all" link while keeping it valid.

    A fresh term y is spliced next to an endpoint of a random premise: the
    premise moves onto y and y is tied to the freed term by "all" in one of
    the two directions.  Candidates are tried in random order and the first
    one the oracle still labels valid is returned.
    """
    premises = list(task.ordered_premises())
    terms = task.chain_terms()
    fresh = f"x{len(terms)}"
    options = []
    for k, p in enumerate(premises):
        for end in ("subject", "object"):
            for forward in (True, False):
                options.append((k, p, end, forward))
    rng.shuffle(options)
    for k, p, end, forward in options:
        freed = getattr(p, end)
        moved = Statement(p.mood, fresh, p.object) if end == "subject" else \
            Statement(p.mood, p.subject, fresh)
        link = Statement(Mood.All, freed, fresh) if forward else Statement(Mood.All, fresh, freed)
        cand = Task(tuple(premises[:k] + [moved, link] + premises[k + 1:]), task.conclusion)
        if chain_valid(cand):
            return cand
    return None


def _relabel(task: Task, n: int) -> Task:
    """Rename the chain terms to the canonical ``s, m1.., p`` names."""
    names = dict(zip(task.chain_terms(), chain_term_names(n)))

    def ren(s: Statement) -> Statement:
        return Statement(s.mood, names[s.subject], names[s.object])

    return Task(tuple(ren(p) for p in task.premises), ren(task.conclusion))


def _constructed_valid(n: int, rng: random.Random) -> Task:
    base = rng.choice(valid_classic_forms())
    task = base
    while len(task.chain_terms()) < n:
        longer = _insert_all_link(task, rng)
        if longer is None:  # pragma: no cover - every valid form admits an insertion
            raise RuntimeError("could not extend a valid chain")
        task = longer
    task = _relabel(task, n)
    premises = list(task.premises)
    rng.shuffle(premises)
    return Task(tuple(premises), task.conclusion)


def generate_chain_suite(n: int, seed: int, max_draws: int = 200) -> Suite:
    """Seeded suite of ``GROUPS`` groups, each holding one valid and four invalid tasks.

    Tasks are drawn with uniform moods and orientations per link and for the
    conclusion.  Valid draws are rare on long chains, so after ``max_draws``
    fruitless draws a valid task is built by lengthening a valid classic form.
    No task repeats within a suite.
    """
    if n < 3:
        raise ValueError("chain suites need n >= 3")
    rng = random.Random(f"sphnn-suite-{n}-{seed}")
    seen: set = set()

    def key(t: Task):
        return (frozenset(t.premises), t.conclusion)

    groups = []
    for _ in range(GROUPS):
        valid = None
        invalids = []
        draws = 0
        while valid is None or len(invalids) < GROUP_SIZE - 1:
            draws += 1
            if draws > 50 * max_draws:
                raise RuntimeError(f"generator exhausted for n={n}, seed={seed}")
            if valid is None and draws > max_draws:
                cand = _constructed_valid(n, rng)
            else:
                cand = _random_task(n, rng)
            if key(cand) in seen:
                continue
            if chain_valid(cand):
                if valid is None:
                    valid = cand
                    seen.add(key(cand))
            elif len(invalids) < GROUP_SIZE - 1:
                invalids.append(cand)
                seen.add(key(cand))
        group = invalids + [valid]
        rng.shuffle(group)
        groups.append(group)
    suite = Suite(n, seed, groups)
    _verify_suite(suite)
    return suite


def _verify_suite(suite: Suite) -> None:
    if len(suite.groups) != GROUPS:
        raise ValueError(f"a suite has {GROUPS} groups, got {len(suite.groups)}")
    for g in suite.groups:
        if len(g) != GROUP_SIZE:
            raise ValueError(f"a group has {GROUP_SIZE} tasks, got {len(g)}")
        if sum(chain_valid(t) for t in g) != 1:
            raise ValueError("each group must hold exactly one valid task")
        for t in g:
            if len(t.chain_terms()) != suite.n:
                raise ValueError(f"task {task_id(t)} does not have {suite.n} terms")


# --------------------------------------------------------------------------
# Benchmark


@dataclass
class BenchResult:
    task_id: str
    n: int
    verdict: str | None  # "valid" / "invalid", None when timed out or failed
    oracle_label: str
    agrees: bool
    wall_time: float
    steps: StepTrace = field(default_factory=StepTrace)
    timed_out: bool = False
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "taskId": self.task_id, "n": self.n, "verdict": self.verdict,
            "oracle": self.oracle_label, "agrees": self.agrees,
            "wallTimeMs": round(self.wall_time * 1000.0, 3),
            "steps": self.steps.to_dict(), "timedOut": self.timed_out, "error": self.error,
        }


def _label(valid: bool) -> str:
    return "valid" if valid else "invalid"


def _run_one(idx: int, task: Task, time_limit: float | None, cfg: OptimConfig) -> BenchResult:
    n = len(task.chain_terms())
    oracle = _label(chain_valid(task))
    tid = f"{idx:04d}-{task_id(task)}"
    start = time.monotonic()
    try:
        v = decide_validity(task, cfg, time_limit)
    except TimeLimitExceeded:
        return BenchResult(tid, n, None, oracle, False, time.monotonic() - start, timed_out=True)
    except NumericError as exc:
        return BenchResult(tid, n, None, oracle, False, time.monotonic() - start,
                           error=f"{type(exc).__name__}: {exc}")
    verdict = _label(v.valid)
    return BenchResult(tid, n, verdict, oracle, verdict == oracle,
                       time.monotonic() - start, v.trace)


def run_benchmark(tasks: Sequence[Task], time_limit: float | None = None,
                  cfg: OptimConfig = OptimConfig(), jobs: int = 1) -> list[BenchResult]:
    """Decide every task with a per-task wall-clock limit (None means unlimited).

    Results come back in task order whatever ``jobs`` is.  A timeout or a
    numeric failure is recorded on the result, never raised.
    """
    tasks = list(tasks)
    if jobs <= 1:
        return [_run_one(i, t, time_limit, cfg) for i, t in enumerate(tasks)]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = [pool.submit(_run_one, i, t, time_limit, cfg) for i, t in enumerate(tasks)]
        return [f.result() for f in futures]


def default_jobs() -> int:
    return max(1, os.cpu_count() or 1)


def accuracy_by_limit(results: Iterable[BenchResult], limits: Sequence[float]) -> dict:
    """Accuracy each limit would give, read off an unlimited run.

    The deciders are deterministic and cancel only between transitions, so a
    task run under limit L returns the unlimited verdict when it needs less
    than L and times out otherwise.
    """
    results = list(results)
    out = {}
    for lim in limits:
        ok = sum(r.agrees and r.wall_time < lim for r in results)
        out[lim] = ok / len(results) if results else 0.0
    return out


def summarise_results(results: Iterable[BenchResult]) -> dict:
    results = list(results)
    by_n: dict = {}
    for r in results:
        d = by_n.setdefault(r.n, {"tasks": 0, "agree": 0, "timedOut": 0, "errors": 0,
                                  "maxTransitionsPerN": 0.0})
        d["tasks"] += 1
        d["agree"] += r.agrees
        d["timedOut"] += r.timed_out
        d["errors"] += r.error is not None
        d["maxTransitionsPerN"] = max(d["maxTransitionsPerN"], r.steps.transitions / r.n)
    for d in by_n.values():
        d["accuracy"] = d["agree"] / d["tasks"]
    total = len(results)
    return {
        "tasks": total,
        "agree": sum(r.agrees for r in results),
        "timedOut": sum(r.timed_out for r in results),
        "accuracy": (sum(r.agrees for r in results) / total) if total else 0.0,
        "byN": {str(k): by_n[k] for k in sorted(by_n)},
    }


CSV_FIELDS = ["taskId", "n", "verdict", "oracle", "agrees", "wallTimeMs", "steps", "timedOut"]


def results_to_csv(results: Iterable[BenchResult]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in results:
        w.writerow([r.task_id, r.n, r.verdict or "", r.oracle_label, int(r.agrees),
                    f"{r.wall_time * 1000.0:.3f}", r.steps.steps, int(r.timed_out)])
    return buf.getvalue()
