#!/usr/bin/env python3
"""Load, build and rank a large simulated dataset from CSV.

    python3 scripts/scale_smoke.py generate /tmp/big --n 1000000 --m 5
    python3 scripts/scale_smoke.py measure /tmp/big

``measure`` prints one JSON line with stage timings and the peak resident
set size of the process.
"""
import argparse
import json
import resource
import sys
import time
from pathlib import Path

from fma_netlab.centrality import in_degree_centrality, pagerank
from fma_netlab.graph import build_graph
from fma_netlab.ingest import load_follows_csv, load_users_csv, write_follows_csv, write_users_csv
from fma_netlab.simulate import SimConfig, simulate


def generate(out: Path, n: int, m: int, seed: int) -> dict:
    g = simulate(SimConfig("barabasi_albert", n, m, seed=seed))
    write_users_csv(out / "users.csv", g)
    write_follows_csv(out / "follows.csv", g)
    return {"users": g.n_users, "edges": g.n_edges}


def measure(data: Path) -> dict:
    t = {}
    t0 = time.perf_counter()
    users, ur = load_users_csv(data / "users.csv")
    edges, er = load_follows_csv(data / "follows.csv")
    t["ingest"] = time.perf_counter() - t0
    s = time.perf_counter()
    g = build_graph(users, edges)
    del users, edges
    t["build"] = time.perf_counter() - s
    s = time.perf_counter()
    deg = in_degree_centrality(g)
    t["in_degree"] = time.perf_counter() - s
    s = time.perf_counter()
    pr = pagerank(g)
    t["pagerank"] = time.perf_counter() - s
    return {
        "users": g.n_users, "edges": g.n_edges, "rows_reported": ur.rows_reported + er.rows_reported,
        "max_in_degree": int(deg.values.max()), "pagerank_iterations": pr.iterations,
        "pagerank_converged": pr.converged, "seconds": t, "total_seconds": time.perf_counter() - t0,
        "peak_rss_bytes": resource.getrusage(resource.RUSAGE_SELF).ru_maxrss * 1024,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)
    g = sub.add_parser("generate")
    g.add_argument("out", type=Path)
    g.add_argument("--n", type=int, default=1_000_000)
    g.add_argument("--m", type=int, default=5)
    g.add_argument("--seed", type=int, default=0)
    m = sub.add_parser("measure")
    m.add_argument("data", type=Path)
    args = ap.parse_args()
    if args.cmd == "generate":
        args.out.mkdir(parents=True, exist_ok=True)
        result = generate(args.out, args.n, args.m, args.seed)
    else:
        result = measure(args.data)
    json.dump(result, sys.stdout)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
