"""Time the search kernel compiled with numba against the same source run as Python.

Each mode runs in its own interpreter so ``OWP_DISABLE_NUMBA`` takes effect at
import. The numba timing excludes compilation: every instance is solved once
to warm up, then timed over ``--repeat`` runs.

    python3 benchmarks/bench_kernel.py [--repeat 3] [--json]
"""

import argparse
import json
import os
import subprocess
import sys

INSTANCES = [
    ("K7", 7, "7x3"),
    ("K7", 7, "3,4x3"),
    ("K9", 9, "3,3,3x4"),
    ("K9", 9, "4,5x4"),
]

WORKER = r"""
import json, sys, time
from owp._jit import NUMBA_ENABLED
from owp.graph_core import FactorSpec, HostGraph
from owp.solver import SearchConfig, solve_factorization

repeat = int(sys.argv[1])
rows = []
for name, n, spec in json.loads(sys.argv[2]):
    host, fs = HostGraph.complete(n), FactorSpec.parse(spec)
    cfg = SearchConfig(timeout=3600, threads=1)
    solve_factorization(host, fs, cfg)  # warm-up, pays for compilation
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = solve_factorization(host, fs, cfg)
        best = min(best, time.perf_counter() - t0)
    rows.append({"host": name, "spec": spec, "verdict": str(out.verdict), "nodes": out.nodes, "seconds": best})
print(json.dumps({"numba": NUMBA_ENABLED, "rows": rows}))
"""


def run_mode(disable: bool, repeat: int) -> dict:
    env = dict(os.environ, OWP_DISABLE_NUMBA="1" if disable else "0")
    res = subprocess.run(
        [sys.executable, "-c", WORKER, str(repeat), json.dumps(INSTANCES)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(res.stdout)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--json", action="store_true")
    args = ap.parse_args()

    jit, py = run_mode(False, args.repeat), run_mode(True, args.repeat)
    if args.json:
        print(json.dumps({"numba": jit, "python": py}, indent=2))
        return
    if not jit["numba"]:
        print("note: numba unavailable, both columns are the Python path")
    print(f"{'instance':<16}{'verdict':<11}{'nodes':>8}{'numba s':>10}{'python s':>10}{'speedup':>9}")
    for a, b in zip(jit["rows"], py["rows"]):
        assert a["verdict"] == b["verdict"] and a["nodes"] == b["nodes"], (a, b)
        label = f"{a['host']} {a['spec']}"
        print(f"{label:<16}{a['verdict']:<11}{a['nodes']:>8}{a['seconds']:>10.4f}{b['seconds']:>10.4f}"
              f"{b['seconds'] / a['seconds']:>8.1f}x")


if __name__ == "__main__":
    main()
