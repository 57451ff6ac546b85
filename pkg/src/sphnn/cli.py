"""Command-line interface: ``sphnn <command> ...``.

Exit codes: 0 success, 2 input error, 3 internal numeric error, 4 timeout
(a timed-out ``decide`` or a benchmark dominated by timeouts).
Every output carries the seed and the config hash.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from .config import OptimConfig
from .errors import NumericError, ParseError, TimeLimitExceeded
from .geometry import Sphere
from .optimizer import realize_fixed_orientation
from .oracle import chain_valid, coincidence_forced
from .reasoner import (_order_cycle, check_model, decide_satisfiability, decide_validity,
                       spatialise, task_constraints)
from .syllogism import Task, parse_statements
from .tasks import (Suite, accuracy_by_limit, default_jobs, enumerate_classic, generate_chain_suite,
                    results_to_csv, run_benchmark, summarise_results, task_id)
from .verifier import verify_transcript

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_TIMEOUT = 0, 2, 3, 4


class InputError(Exception):
    pass


# --------------------------------------------------------------------------
# Shared helpers


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get("SPHNN_SEED")
    if env is None or not env.strip():
        return 0
    try:
        return int(env)
    except ValueError:
        raise InputError(f"SPHNN_SEED must be an integer, got {env!r}") from None


def make_config(args) -> OptimConfig:
    cfg = OptimConfig(dim=args.dim, seed=resolve_seed(args.seed),
                      random_init=getattr(args, "random_init", False))
    if args.lr is not None:
        cfg = cfg.with_(learning_rate=args.lr)
    if args.eps is not None:
        cfg = cfg.with_(eps=args.eps)
    return cfg


def meta(cfg: OptimConfig) -> dict:
    return {"seed": cfg.seed, "configHash": cfg.config_hash()}


def model_to_json(model: dict, dim: int) -> dict:
    """``{"dim": k, "spheres": {term: {"center": [...], "radius": r}}}``."""
    return {"dim": dim, "spheres": {
        str(t): {"center": [float(x) for x in s.center], "radius": float(s.radius)}
        for t, s in sorted(model.items(), key=lambda kv: str(kv[0]))}}


def model_from_json(d: dict) -> tuple[int, dict]:
    try:
        dim = int(d["dim"])
        spheres = {}
        for term, s in d["spheres"].items():
            center = np.asarray(s["center"], dtype=float)
            radius = float(s["radius"])
            if center.shape != (dim,) or not radius > 0:
                raise InputError(f"sphere {term!r} does not match dim {dim} or has radius <= 0")
            spheres[term] = Sphere(center, float(np.log(radius)))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed model JSON: {exc}") from None
    return dim, spheres


def read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(str(exc)) from None


def emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=1) + "\n")


def _statements_input(args) -> str:
    if args.expr is not None:
        return args.expr.replace(";", "\n")
    if args.input is None:
        raise InputError("give a task file or --expr")
    return read_text(args.input)


# --------------------------------------------------------------------------
# Commands


def cmd_decide(args) -> int:
    cfg = make_config(args)
    premises, conclusion = parse_statements(_statements_input(args))
    limit = None if args.time_limit_ms is None else args.time_limit_ms / 1000.0
    out = meta(cfg)
    if conclusion is not None:
        task = Task(tuple(premises), conclusion)
        v = decide_validity(task, cfg, limit)
        out["validity"] = "valid" if v.valid else "invalid"
        if not v.valid:
            out["model"] = model_to_json(v.counter_model, cfg.dim)
            out["checkModel"] = check_model(v.counter_model, task_constraints(task))
        trace = v.trace
    else:
        v = decide_satisfiability(premises, cfg, limit)
        out["verdict"] = "sat" if v.sat else "unsat"
        if v.sat:
            out["model"] = model_to_json(v.model, cfg.dim)
        trace = v.trace
    out["trace"] = trace.to_dict()
    emit(out)
    return EXIT_OK


def cmd_enumerate(args) -> int:
    cfg = make_config(args)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["id", "premises", "conclusion", "verdict", "oracle", "agrees", "restarts",
                "transitions", "checkModel", "note"])
    valid = agree = 0
    for task in enumerate_classic():
        v = decide_validity(task, cfg)
        oracle = chain_valid(task)
        ok = v.valid == oracle
        valid += v.valid
        agree += ok
        note = ""
        loss = "" if v.valid else repr(check_model(v.counter_model, task_constraints(task)))
        if not ok:
            _, targets = _order_cycle(task_constraints(task))
            note = ("known-disagreement: coincidence-forced" if coincidence_forced(targets)
                    else "disagreement")
        w.writerow([task_id(task), "; ".join(p.to_text() for p in task.premises),
                    task.conclusion.to_text(), "valid" if v.valid else "invalid",
                    "valid" if oracle else "invalid", int(ok), v.trace.restarts,
                    v.trace.transitions, loss, note])
    sys.stdout.write(f"# seed={cfg.seed} configHash={cfg.config_hash()} dim={cfg.dim}\n")
    sys.stdout.write(buf.getvalue())
    summary = f"valid={valid} agree={agree}/256"
    sys.stdout.write(f"# {summary}\n")
    sys.stderr.write(summary + "\n")
    return EXIT_OK


def render_svg(dim: int, spheres: dict, size: int = 400, margin: int = 20) -> str:
    """One labelled ``<circle>`` per sphere, scaled to fit the canvas."""
    if dim != 2:
        raise InputError(f"only 2-D models can be rendered, got dim={dim}")
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
            f'viewBox="0 0 {size} {size}">\n')
    if not spheres:
        return head + "</svg>\n"
    lo = np.min([s.center - s.radius for s in spheres.values()], axis=0)
    hi = np.max([s.center + s.radius for s in spheres.values()], axis=0)
    scale = (size - 2 * margin) / float(max(hi - lo))
    parts = [head]
    for term in sorted(spheres):
        s = spheres[term]
        cx = margin + (s.center[0] - lo[0]) * scale
        cy = size - margin - (s.center[1] - lo[1]) * scale
        r = s.radius * scale
        parts.append(f'  <circle cx="{cx:.3f}" cy="{cy:.3f}" r="{r:.3f}" fill="none" '
                     f'stroke="black"/>\n')
        parts.append(f'  <text x="{cx:.3f}" y="{cy - r - 3:.3f}" text-anchor="middle" '
                     f'font-size="12">{_xml_escape(str(term))}</text>\n')
    parts.append("</svg>\n")
    return "".join(parts)


def _xml_escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def cmd_render(args) -> int:
    try:
        d = json.loads(read_text(args.model))
    except json.JSONDecodeError as exc:
        raise InputError(f"model file is not JSON: {exc}") from None
    if "model" in d and "spheres" not in d:
        d = d["model"]
    dim, spheres = model_from_json(d)
    svg = render_svg(dim, spheres)
    if args.out == "-":
        sys.stdout.write(svg)
    else:
        Path(args.out).write_text(svg)
    return EXIT_OK


def load_embeddings(text: str) -> dict:
    """``term v1 .. vk`` per line; vectors are normalised to unit length."""
    vecs: dict = {}
    k = None
    for lineno, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        term = parts[0].strip().casefold()
        try:
            v = np.array([float(x) for x in parts[1:]])
        except ValueError:
            raise InputError(f"line {lineno}: non-numeric vector component") from None
        if v.size == 0:
            raise InputError(f"line {lineno}: no vector components")
        if k is None:
            k = v.size
        elif v.size != k:
            raise InputError(f"line {lineno}: expected {k} components, got {v.size}")
        if term in vecs:
            raise InputError(f"line {lineno}: duplicate term {term!r}")
        n = np.linalg.norm(v)
        if not n > 0:
            raise InputError(f"line {lineno}: zero vector for {term!r}")
        vecs[term] = v / n
    return vecs


def cmd_embed_decide(args) -> int:
    cfg = make_config(args)
    premises, conclusion = parse_statements(read_text(args.statements))
    vecs = load_embeddings(read_text(args.embeddings))
    # every line, a "therefore:" one included, is a statement to satisfy
    statements = premises + ([conclusion] if conclusion is not None else [])
    constraints = [spatialise(s) for s in statements]
    terms = sorted({t for c in constraints for t in (c.i, c.j)})
    missing = [t for t in terms if t not in vecs]
    if missing:
        raise InputError(f"no embedding for {', '.join(missing)}")
    dims = {vecs[t].size for t in terms}
    cfg = cfg.with_(dim=dims.pop())
    idx = {t: k for k, t in enumerate(terms)}
    try:
        res = realize_fixed_orientation([(c.target, idx[c.i], idx[c.j]) for c in constraints],
                                        [vecs[t] for t in terms], cfg, args.max_outer_iters)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    out = meta(cfg)
    out["verdict"] = "sat" if res.sat else "unsat"
    out["sweeps"] = res.sweeps
    if res.sat:
        out["model"] = model_to_json({t: res.spheres[idx[t]] for t in terms}, cfg.dim)
    out["trace"] = res.trace.to_dict()
    emit(out)
    return EXIT_OK


def cmd_suite(args) -> int:
    suite = generate_chain_suite(args.n, resolve_seed(args.seed))
    text = suite.to_json()
    if args.out == "-":
        sys.stdout.write(text + "\n")
    else:
        Path(args.out).write_text(text + "\n")
    return EXIT_OK


def cmd_bench(args) -> int:
    cfg = make_config(args)
    if args.suite:
        tasks = Suite.from_json(read_text(args.suite)).tasks
    elif args.classic:
        tasks = enumerate_classic()
    else:
        tasks = generate_chain_suite(args.n, cfg.seed).tasks
    limit = None if args.time_limit_ms is None else args.time_limit_ms / 1000.0
    jobs = args.jobs if args.jobs is not None else default_jobs()
    results = run_benchmark(tasks, limit, cfg, jobs)
    if args.csv:
        Path(args.csv).write_text(results_to_csv(results))
    out = meta(cfg)
    out["timeLimitMs"] = args.time_limit_ms
    out["summary"] = summarise_results(results)
    if args.limits_ms:
        acc = accuracy_by_limit(results, [ms / 1000.0 for ms in args.limits_ms])
        out["accuracyByLimitMs"] = {str(int(k * 1000)): v for k, v in acc.items()}
    emit(out)
    frac = out["summary"]["timedOut"] / max(1, len(results))
    return EXIT_TIMEOUT if frac > args.timeout_threshold else EXIT_OK


def cmd_verify(args) -> int:
    cfg = make_config(args)
    reports = verify_transcript(read_text(args.transcript), cfg)
    out = meta(cfg)
    out["rounds"] = reports
    emit(out)
    return EXIT_OK


# --------------------------------------------------------------------------
# Parser


def _add_engine_flags(p: argparse.ArgumentParser, random_init: bool = True) -> None:
    p.add_argument("--dim", type=int, default=2, help="sphere dimension (default 2)")
    p.add_argument("--lr", type=float, default=None, help="learning rate (default 1e-4)")
    p.add_argument("--eps", type=float, default=None, help="strict-inequality margin")
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default $SPHNN_SEED or 0)")
    if random_init:
        p.add_argument("--random-init", action="store_true",
                       help="start from random spheres instead of coinciding ones")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sphnn", description="Syllogistic reasoning with spheres.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decide", help="decide a task (validity) or a statement set (satisfiability)")
    p.add_argument("input", nargs="?", help="task file, '-' for stdin")
    p.add_argument("-e", "--expr", help="inline task, lines separated by ';'")
    p.add_argument("--time-limit-ms", type=float, default=None)
    _add_engine_flags(p)
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("enumerate", help="decide all 256 classic forms, CSV on stdout")
    _add_engine_flags(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("render", help="draw a 2-D model JSON as SVG")
    p.add_argument("model", help="model JSON (or a decide output containing one)")
    p.add_argument("-o", "--out", default="-", help="output path, '-' for stdout")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("embed-decide",
                       help="satisfiability of all statements with centers on embedding directions")
    p.add_argument("statements")
    p.add_argument("embeddings", help="lines of 'term v1 v2 ... vk'")
    p.add_argument("--max-outer-iters", type=int, default=9)
    _add_engine_flags(p, random_init=False)
    p.set_defaults(func=cmd_embed_decide)

    p = sub.add_parser("suite", help="generate a seeded chain suite as JSON")
    p.add_argument("--n", type=int, required=True, help="number of terms (>= 3)")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("-o", "--out", default="-")
    p.set_defaults(func=cmd_suite)

    p = sub.add_parser("bench", help="run a benchmark and print a JSON summary")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--suite", help="suite JSON file")
    src.add_argument("--classic", action="store_true", help="the 256 classic forms")
    src.add_argument("--n", type=int, default=3, help="generate a suite with this many terms")
    p.add_argument("--time-limit-ms", type=float, default=None)
    p.add_argument("--limits-ms", type=float, nargs="*", default=None,
                   help="also report the accuracy each of these limits would give")
    p.add_argument("--jobs", type=int, default=None, help="worker threads (default CPU count)")
    p.add_argument("--csv", help="write per-task results here")
    p.add_argument("--timeout-threshold", type=float, default=0.5,
                   help="exit 4 when more than this fraction of tasks timed out")
    _add_engine_flags(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("verify", help="check the replies in a transcript")
    p.add_argument("transcript")
    _add_engine_flags(p, random_init=False)
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ParseError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except TimeLimitExceeded as exc:
        sys.stderr.write(f"timeout: {exc}\n")
        return EXIT_TIMEOUT
    except NumericError as exc:
        sys.stderr.write(f"numeric error: {exc}\n")
        return EXIT_NUMERIC
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
