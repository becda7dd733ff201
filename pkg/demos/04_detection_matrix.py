"""
The whole attack grid
=====================

Eight attacks, two protocols, two clone-detection modes and two kinds of
user: 64 scenarios. Each cell reads SUCCEEDS (attacker got a session and
nobody noticed), DETECTED (got in, but something raised an alarm) or
PREVENTED.
"""

import time

from fidosim.harness import detection_matrix, load_golden

start = time.perf_counter()
matrix = detection_matrix(seed=1)
print(matrix.table())
print(f"\n{len(matrix.cells)} scenarios in {time.perf_counter() - start:.2f}s")
print("differences from the stored copy:", matrix.mismatches(load_golden()) or "none")
