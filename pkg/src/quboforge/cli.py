"""Command-line entry points: genlib, encode, solve, verify, bench, npn-stats.

Every stage reads and writes files so each can be rerun on its own.  Human
summaries go to stdout; --json prints the machine-readable record instead.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

from . import benchgen
from .boolfn import npn_class_count, parse_tt
from .errors import ConfigurationError, QuboForgeError
from .gatelib import GateCell, GateLibrary, build_library, load_default_library, load_function_set
from .ising_core import fraction_str, load_model, penalty_from_dict, save_model, verify_penalty
from .logic_frontend import read_problem
from .placeroute import DecodeMap, save_embedding, verify_embedding_dict
from .sampler_backend import (
    PipelineConfig,
    PipelineResult,
    Problem,
    embed,
    problem_from_dict,
    problem_to_dict,
    sample_and_check,
)

log = logging.getLogger("quboforge")


def parse_graph(text: str) -> tuple[int, int]:
    try:
        r, c = text.lower().split("x")
        return int(r), int(c)
    except ValueError:
        raise argparse.ArgumentTypeError(f"graph must look like 16x16, got {text!r}") from None


def read_disabled(path) -> tuple:
    if not path:
        return ()
    with open(path) as fh:
        return tuple(int(tok) for tok in fh.read().replace(",", " ").split())


def load_library(path):
    return GateLibrary.load(path) if path else load_default_library()


def emit(args, record: dict, lines: list[str]):
    if args.json:
        print(json.dumps(record, indent=1, default=str))
    else:
        for line in lines:
            print(line)


def write_json(path, record):
    if path:
        with open(path, "w") as fh:
            json.dump(record, fh, indent=1, default=str)


# ---------------------------------------------------------------------------
# commands


def cmd_genlib(args) -> int:
    funcs = load_function_set(args.functions)
    t = time.perf_counter()
    lib = build_library(funcs, args.footprints or None, args.budget, args.jobs)
    lib.save(args.out)
    rec = {"out": args.out, "cells": len(lib), "skipped": lib.metadata.get("skipped", []),
           "seconds": round(time.perf_counter() - t, 2)}
    emit(args, rec, [f"wrote {len(lib)} cells to {args.out} in {rec['seconds']} s",
                     f"skipped: {', '.join(rec['skipped']) or 'none'}"])
    return 0


def _config(args) -> PipelineConfig:
    rows, cols = args.graph
    return PipelineConfig(rows=rows, cols=cols, shore=args.shore, disabled=read_disabled(args.disabled),
                          library=args.lib, mapping=args.mapping, place_seed=args.seed,
                          place_budget=args.place_budget, pattern=args.pattern,
                          route_iterations=args.route_iterations, alpha=args.alpha,
                          chain_weight=args.chain_weight, unbiased_cells=args.unbiased_cells).validate()


def _read_input(args):
    if args.instance:
        with open(args.instance) as fh:
            return benchgen.ConstraintInstance.from_sidecar(json.load(fh))
    if args.cnf:
        return read_problem(args.cnf)
    raise ConfigurationError("give --cnf or --instance")


def cmd_encode(args) -> int:
    problem = _read_input(args)
    cfg = _config(args)
    lib = load_library(args.lib)
    view, nl, emb, model, dm, stats = embed(problem, lib, cfg)
    save_model(model, args.out)
    save_embedding(emb, dm, args.embedding, problem_to_dict(problem))
    rec = {"model": args.out, "embedding": args.embedding, **stats,
           "embedding_passed": emb.report.passed, "chain_histogram": emb.report.histogram}
    emit(args, rec, [
        f"{stats['cells']} cells ({stats['mapping']}), {stats['model_qubits']} qubits, "
        f"HPWL {stats['hpwl']}, longest chain {stats['max_chain']}",
        f"embedding {'verified' if emb.report.passed else 'INVALID'}; wrote {args.out} and {args.embedding}",
    ])
    return 0 if emb.report.passed else 1


def cmd_solve(args) -> int:
    model = load_model(args.model)
    with open(args.embedding) as fh:
        emb = json.load(fh)
    if "problem" not in emb:
        raise ConfigurationError("embedding file carries no source problem")
    dm = DecodeMap.from_dict(emb["decode"])
    problem = problem_from_dict(emb["problem"])
    cfg = PipelineConfig(samples=args.samples, sweeps=args.sweeps, seed=args.seed,
                         beta_range=tuple(args.beta_range), stop_early=not args.all_samples).validate()
    view = Problem(problem)
    stats: dict = {}
    reports = sample_and_check(view, model, dm, cfg, stats)
    result = PipelineResult("unknown", None, None, None, reports, stats, model, dm)
    if view.weighted:
        best = min(reports, key=lambda r: (r.cost, r.energy))
        result.assignment, result.cost, result.energy = best.assignment, best.cost, best.energy
        if args.target is not None:
            result.status = "optimal" if best.cost <= args.target else "best"
        else:
            result.status = "best"
    else:
        sat = [r for r in reports if r.satisfied]
        if sat:
            result.status, result.assignment, result.cost, result.energy = "sat", sat[0].assignment, 0, sat[0].energy
        else:
            result.energy = min(r.energy for r in reports)
    rec = result.to_dict()
    write_json(args.out, rec)
    lines = [f"status: {result.status}  energy: {fraction_str(result.energy)}  "
             f"samples: {stats['samples_drawn']}  broken: {stats['broken_samples']}"]
    if result.assignment is not None:
        lits = [str(i if b else -i) for i, b in enumerate(result.assignment) if i > 0]
        lines.append("v " + " ".join(lits) + " 0")
        if view.weighted:
            lines.append(f"cost: {result.cost}")
    emit(args, rec, lines)
    return result.exit_code


def cmd_verify(args) -> int:
    if args.embedding:
        with open(args.embedding) as fh:
            d = json.load(fh)
        rep = verify_embedding_dict(d)
        rec = {"passed": rep.passed, "violations": rep.violations, "max_chain": rep.max_chain,
               "histogram": rep.histogram}
        emit(args, rec, [f"embedding {'passed' if rep.passed else 'FAILED'}; longest chain {rep.max_chain}"]
             + [f"  {v}" for v in rep.violations[:20]])
        return 0 if rep.passed else 1
    if not args.penalty:
        raise ConfigurationError("give --penalty or --embedding")
    with open(args.penalty) as fh:
        d = json.load(fh)
    if "footprint" in d:
        cell = GateCell.from_dict(d)
        pf, tt = cell.penalty, cell.canonical_tt
    else:
        pf, tt = penalty_from_dict(d), None
    if args.tt:
        tt = parse_tt(args.tt)
    if tt is None:
        raise ConfigurationError("no truth table: pass --tt")
    rep = verify_penalty(pf, tt)
    rec = {"passed": rep.passed, "true_gap": fraction_str(rep.true_gap) if rep.true_gap is not None else None,
           "declared_gap": fraction_str(rep.declared_gap), "exact": rep.exact, "failures": rep.failures}
    emit(args, rec, [f"penalty {'passed' if rep.passed else 'FAILED'}: gap {rec['true_gap']} "
                     f"(declared {rec['declared_gap']}), exact={rep.exact}"] + [f"  {f}" for f in rep.failures])
    return 0 if rep.passed else 1


def cmd_bench(args) -> int:
    if args.family == "sgen":
        inst = benchgen.gen_sgen_sat(args.n, args.variant, args.seed, args.retries)
    elif args.family == "maxsat-biased":
        inst = benchgen.gen_maxsat_biased(args.n, args.seed, args.max_tries, profile=args.profile)
    else:
        inst = benchgen.gen_maxsat_unbiased(args.n, args.seed, args.removed)
    paths = inst.write(args.out) if args.out else []
    rec = {"paths": paths, "n_vars": inst.n_vars, "constraints": len(inst.constraints), "params": inst.params}
    emit(args, rec, [f"{args.family}: {inst.n_vars} variables, {len(inst.constraints)} constraints"]
         + ([f"wrote {', '.join(paths)}"] if paths else []))
    return 0


def cmd_npn_stats(args) -> int:
    t = time.perf_counter()
    count = npn_class_count(args.arity)
    rec = {"arity": args.arity, "classes": count, "seconds": round(time.perf_counter() - t, 2)}
    emit(args, rec, [str(count)])
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quboforge", description="Encode SAT and MaxSAT problems as Chimera Ising models.")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for parallel stages")
    p.add_argument("--json", action="store_true", help="print the JSON record instead of a summary")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("genlib", help="synthesize a gate library (offline)")
    g.add_argument("--functions", default="default", help="preset name or function file")
    g.add_argument("--footprints", nargs="*", default=None)
    g.add_argument("--budget", type=float, default=None, help="seconds per synthesis run")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_genlib)

    e = sub.add_parser("encode", help="map, place, route and assemble a problem")
    src = e.add_mutually_exclusive_group(required=True)
    src.add_argument("--cnf", help="DIMACS CNF or WCNF file")
    src.add_argument("--instance", help="benchmark sidecar JSON (constraints mapped directly)")
    e.add_argument("--lib", default=os.environ.get("QUBOFORGE_LIB"))
    e.add_argument("--graph", type=parse_graph, default=(16, 16))
    e.add_argument("--shore", type=int, default=4)
    e.add_argument("--disabled", help="file of disabled qubit indices")
    e.add_argument("--mapping", choices=["auto", "clauses", "aig"], default="auto")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--place-budget", type=int, default=None)
    e.add_argument("--pattern", choices=["grid", "checkerboard", "dense"], default="grid")
    e.add_argument("--route-iterations", type=int, default=64)
    e.add_argument("--alpha", type=float, default=2.0)
    e.add_argument("--chain-weight", type=float, default=None)
    e.add_argument("--unbiased-cells", action="store_true", help="use the fixed non-exact 2-in-4 cell")
    e.add_argument("--out", required=True, help="model JSON")
    e.add_argument("--embedding", required=True, help="embedding JSON")
    e.set_defaults(func=cmd_encode)

    s = sub.add_parser("solve", help="sample an encoded model and decode")
    s.add_argument("--model", required=True)
    s.add_argument("--embedding", required=True)
    s.add_argument("--samples", type=int, default=20)
    s.add_argument("--sweeps", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--beta-range", type=float, nargs=2, default=(0.1, 10.0))
    s.add_argument("--all-samples", action="store_true", help="do not stop at the first satisfying sample")
    s.add_argument("--target", type=int, default=None, help="known MaxSAT optimum")
    s.add_argument("--out", help="results JSON")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a penalty or an embedding")
    v.add_argument("--penalty")
    v.add_argument("--tt")
    v.add_argument("--embedding")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="generate benchmark instances")
    b.add_argument("family", choices=["sgen", "maxsat-biased", "maxsat-unbiased"])
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--variant", choices=["one-in-five", "two-in-four"], default="two-in-four")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--retries", type=int, default=50)
    b.add_argument("--max-tries", type=int, default=200)
    b.add_argument("--profile", choices=["strict", "relaxed"], default="strict")
    b.add_argument("--removed", type=int, default=5)
    b.add_argument("--out", help="output stem (writes .cnf/.wcnf and .json)")
    b.set_defaults(func=cmd_bench)

    n = sub.add_parser("npn-stats", help="count NPN classes")
    n.add_argument("--arity", type=int, default=4)
    n.set_defaults(func=cmd_npn_stats)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except QuboForgeError as exc:
        print(f"error [{exc.stage}]: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error [io]: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
