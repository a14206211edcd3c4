"""Time the numba kernels against their numpy twins.

Kernel timings call both implementations in one process. The end-to-end
timing runs a short curve flow and a short NLSS run in two subprocesses, one
with G2FLOW_NUMBA=1 and one with G2FLOW_NUMBA=0.

    python benchmarks/bench_kernels.py [--repeat 5] [--n 1024]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit
from pathlib import Path

import numpy as np

SRC = Path(__file__).resolve().parents[1] / "src"
sys.path.insert(0, str(SRC))

from g2flow import _accel, octonion, stencils  # noqa: E402

END_TO_END = """
import json, time
from g2flow import _accel
from g2flow.curves import perturbed_circle
from g2flow.flow import FlowConfig, evolve
from g2flow.nlss import NlssConfig, evolve_nlss, soliton
c = perturbed_circle({n_curve})
evolve(c, FlowConfig(dt=0.2 * c.ds**2, t_end=2 * 0.2 * c.ds**2))  # warm-up / compile
t0 = time.perf_counter()
evolve(c, FlowConfig(dt=0.2 * c.ds**2, t_end=200 * 0.2 * c.ds**2))
t1 = time.perf_counter()
s = soliton({n_nlss})
evolve_nlss(s, NlssConfig(dt=0.2 * s.ds**2, t_end=100 * 0.2 * s.ds**2))
t2 = time.perf_counter()
print(json.dumps({{"numba": _accel.USE_NUMBA, "curve_flow_s": t1 - t0, "nlss_s": t2 - t1}}))
"""


def best(stmt, repeat: int) -> float:
    return min(timeit.repeat(stmt, number=1, repeat=repeat))


def kernel_rows(n: int, repeat: int):
    rng = np.random.default_rng(0)
    x, y = rng.standard_normal((2, n, 8))
    out = np.zeros((n, 8))
    tabs = (octonion._CROSS_A, octonion._CROSS_B, octonion._CROSS_C, octonion._CROSS_S)
    u, v, out7 = x[:, 1:].copy(), y[:, 1:].copy(), np.zeros((n, 7))
    g = rng.standard_normal((n + 6, 7))
    d = np.empty((n, 7))
    cases = {
        "octonion product": (
            lambda: octonion._mul_rows_jit(x, y, out, octonion.MUL_INDEX, octonion.MUL_SIGN),
            lambda: octonion._mul_rows_np(x, y, out, octonion.MUL_INDEX, octonion.MUL_SIGN),
        ),
        "cross product": (
            lambda: octonion._cross_rows_jit(u, v, out7, *tabs),
            lambda: octonion._cross_rows_np(u, v, out7, *tabs),
        ),
        "d1 (order 6)": (
            lambda: stencils._d1_padded_jit(g, 0.1, d, 6),
            lambda: stencils._d1_padded_np(g, 0.1, d, 6),
        ),
        "d2 (order 4)": (
            lambda: stencils._d2_padded_jit(g, 0.1, d, 4),
            lambda: stencils._d2_padded_np(g, 0.1, d, 4),
        ),
    }
    for name, (jit, ref) in cases.items():
        jit()  # compile
        tj, tn = best(jit, repeat), best(ref, repeat)
        yield name, tj, tn


def end_to_end(flag: str, n_curve: int, n_nlss: int) -> dict:
    env = dict(os.environ, G2FLOW_NUMBA=flag, PYTHONPATH=str(SRC))
    code = END_TO_END.format(n_curve=n_curve, n_nlss=n_nlss)
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=1024, help="rows per kernel call")
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--n-curve", type=int, default=256)
    p.add_argument("--n-nlss", type=int, default=512)
    args = p.parse_args(argv)
    if not _accel.NUMBA_AVAILABLE:
        print("numba is not installed; nothing to compare")
        return 1
    print(f"{'kernel':<20}{'numba [ms]':>12}{'numpy [ms]':>12}{'ratio':>8}")
    for name, tj, tn in kernel_rows(args.n, args.repeat):
        print(f"{name:<20}{1e3 * tj:>12.4f}{1e3 * tn:>12.4f}{tn / tj:>8.2f}")
    on = end_to_end("1", args.n_curve, args.n_nlss)
    off = end_to_end("0", args.n_curve, args.n_nlss)
    print()
    print(f"{'run':<20}{'numba [s]':>12}{'numpy [s]':>12}{'ratio':>8}")
    for key in ("curve_flow_s", "nlss_s"):
        print(f"{key:<20}{on[key]:>12.3f}{off[key]:>12.3f}{off[key] / on[key]:>8.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
