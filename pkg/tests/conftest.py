import cmath
import itertools
import math
import time

import numpy as np


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def disk(rng, radius, lo=0.0):
    """Uniform modulus in [lo, radius], uniform argument."""
    return rng.uniform(lo, radius) * cmath.exp(2j * math.pi * rng.uniform())


# sample grids shared by the representation-equivalence checks
X_PARAMS = [(0.5, 0.5), (1.5, 1.5), (2.5, 1.5), (0.7 + 0.3j, 1.2 - 0.4j)]
X_GRID = list(itertools.product([0.3, -0.8 + 0.4j], [-0.5j, 1.2], [0.4, -2.0 + 1.0j]))

XP_PARAMS = [(0.5, 1.5), (-0.5, 0.5), (-0.5, 1.5), (0.3 + 0.2j, 1.7)]
XP_GRID = list(itertools.product([0.02, 0.1 - 0.05j, 0.2j], [0.3, -1.2 + 0.4j, 1.8], [0.5, -2.0 + 1.0j]))


# acceptance results, filled by test_acceptance.py: n -> (passed, title, detail)
ACCEPTANCE = {}
_START = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, title, detail = ACCEPTANCE[n]
        tr.write_line(f"criterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
    elapsed = time.perf_counter() - _START
    tr.write_line(f"total suite runtime {elapsed:.1f} s (limit 300 s): {'PASS' if elapsed < 300 else 'FAIL'}")
