"""Time each algorithm and complete sessions, with and without offline signing.

Run:  python demos/05_bench.py [iterations]
"""

import sys

from anonchan.harness import bench
from anonchan.net import LocalDeployment

n = int(sys.argv[1]) if len(sys.argv) > 1 else 20

algos = bench.bench_algorithms(n)
print(algos.table(), end="\n\n")

with LocalDeployment(payload=bytes(1024)) as dep:
    online = bench.bench_session(n, deployment=dep)
    offline = bench.bench_session(n, offline_sign=True, deployment=dep)
print(online.table(), end="\n\n")
print(offline.table(), end="\n\n")

saved = online.rows["Session"].mean - offline.rows["Session"].mean
print(f"signing ahead of time saves {saved * 1e3:.2f} ms per session")
print("session time covers its algorithms:", bench.consistency(algos, online))
