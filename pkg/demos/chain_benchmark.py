"""Run a seeded chain suite and read accuracy off per time limit.

Each suite has 24 groups of five tasks with one valid task per group.
Verdicts are compared with the composition-table oracle.  Because the
engine is deterministic, the accuracy any time limit would give can be
read from one unlimited run.
"""
import sys

from sphnn.config import OptimConfig
from sphnn.tasks import accuracy_by_limit, generate_chain_suite, run_benchmark, summarise_results

n = int(sys.argv[1]) if len(sys.argv) > 1 else 5
suite = generate_chain_suite(n, seed=0)
print(f"suite with {n} terms, {len(suite.tasks)} tasks, {sum(suite.labels())} valid")
print("first task:\n" + suite.tasks[0].to_text())

results = run_benchmark(suite.tasks, None, OptimConfig())
summary = summarise_results(results)
print(f"agreement with the oracle: {summary['agree']}/{summary['tasks']}")
print(f"max transitions per term: {summary['byN'][str(n)]['maxTransitionsPerN']:.0f}")

for limit, acc in accuracy_by_limit(results, [0.001, 0.01, 0.1, 1.0, 10.0]).items():
    print(f"  limit {limit:>6} s -> accuracy {acc:.3f}")
