#!/usr/bin/env python3
"""Benchmark the compiled join/count kernels against the pure fallback.

Runs the full mining loop on a seeded synthetic graph once per backend
(in subprocesses, so each uses its import-time selection), verifies both
produce identical rules, and reports the speedup.

    python benchmarks/bench_kernels.py [--entities N] [--relations N]
                                       [--triples N] [--seed N]
"""

import argparse
import hashlib
import json
import os
import subprocess
import sys
import time


def build_graph(n_entities, n_relations, n_triples, seed):
    import numpy as np

    from rulelm.kg_store import KnowledgeGraph, Triple

    rng = np.random.default_rng(seed)
    # mildly skewed degree distribution so joins have realistic fanout
    ent = (rng.beta(1.2, 4.0, size=2 * n_triples) * n_entities).astype(int)
    rel = rng.integers(0, n_relations, size=n_triples)
    triples = {
        Triple(int(ent[2 * i]), int(rel[i]), int(ent[2 * i + 1]))
        for i in range(n_triples)
    }
    return KnowledgeGraph(
        [f"e{i}" for i in range(n_entities)],
        [f"r{j}" for j in range(n_relations)],
        triples,
    )


def run_once(args):
    from rulelm import BACKEND_NAME
    from rulelm.rule_miner import MiningConfig, mine_rules

    kg = build_graph(args.entities, args.relations, args.triples, args.seed)
    # low thresholds: random graphs rarely produce confident rules, and
    # keeping matches nonzero makes the cross-backend equality check real
    config = MiningConfig(min_support=5, min_std_conf=0.005, min_head_coverage=0.001)
    started = time.perf_counter()
    mined = mine_rules(kg, config, jobs=args.jobs)
    elapsed = time.perf_counter() - started
    blob = "\n".join(f"{rule.rule_id}|{stats}" for rule, stats in mined)
    digest = hashlib.sha256(blob.encode()).hexdigest()
    print(
        json.dumps(
            {
                "backend": BACKEND_NAME,
                "seconds": elapsed,
                "rules": len(mined),
                "digest": digest,
            }
        )
    )


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--entities", type=int, default=2000)
    parser.add_argument("--relations", type=int, default=20)
    parser.add_argument("--triples", type=int, default=30000)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--run-once", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.run_once:
        run_once(args)
        return

    results = {}
    for backend, env_extra in (("native", {}), ("pure", {"RULELM_PURE_KERNELS": "1"})):
        env = dict(os.environ, **env_extra)
        cmd = [sys.executable, __file__, "--run-once"]
        for flag in ("entities", "relations", "triples", "seed", "jobs"):
            cmd += [f"--{flag}", str(getattr(args, flag))]
        out = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
        results[backend] = json.loads(out.stdout.strip().splitlines()[-1])

    native, pure = results["native"], results["pure"]
    if native["backend"] != "native":
        print("note: compiled kernels unavailable, both runs used the pure backend")
    if native["digest"] != pure["digest"] or native["rules"] != pure["rules"]:
        print("MISMATCH: backends disagree on the mined rules")
        sys.exit(1)
    print(
        f"graph: {args.entities} entities, {args.relations} relations, "
        f"{args.triples} triples; {native['rules']} rules mined"
    )
    for name in ("native", "pure"):
        print(f"  {name:>6}: {results[name]['seconds']:8.3f}s")
    if native["seconds"] > 0:
        print(f"  speedup: {pure['seconds'] / native['seconds']:.1f}x")


if __name__ == "__main__":
    main()
