import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from g2flow import _accel, octonion, stencils

SRC = str(Path(__file__).resolve().parents[1] / "src")


@pytest.mark.parametrize("order", [4, 6])
def test_stencil_kernels_agree(order):
    rng = np.random.default_rng(order)
    g = rng.standard_normal((70, 5))
    a, b = np.empty((64, 5)), np.empty((64, 5))
    for jit, ref in ((stencils._d1_padded_jit, stencils._d1_padded_np), (stencils._d2_padded_jit, stencils._d2_padded_np)):
        jit(g, 0.1, a, order)
        ref(g, 0.1, b, order)
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


def test_octonion_kernels_agree():
    rng = np.random.default_rng(5)
    x, y = rng.standard_normal((2, 200, 8))
    a, b = np.zeros((200, 8)), np.zeros((200, 8))
    octonion._mul_rows_jit(x, y, a, octonion.MUL_INDEX, octonion.MUL_SIGN)
    octonion._mul_rows_np(x, y, b, octonion.MUL_INDEX, octonion.MUL_SIGN)
    np.testing.assert_allclose(a, b, atol=1e-13)
    u, v = x[:, 1:].copy(), y[:, 1:].copy()
    tabs = (octonion._CROSS_A, octonion._CROSS_B, octonion._CROSS_C, octonion._CROSS_S)
    a, b = np.zeros((200, 7)), np.zeros((200, 7))
    octonion._cross_rows_jit(u, v, a, *tabs)
    octonion._cross_rows_np(u, v, b, *tabs)
    np.testing.assert_allclose(a, b, atol=1e-13)


SCRIPT = """
import json
import numpy as np
from g2flow import _accel
from g2flow.curves import perturbed_circle
from g2flow.flow import FlowConfig, evolve
c = perturbed_circle(64)
p = evolve(c, FlowConfig(dt=0.2 * c.ds**2, t_end=0.01)).final.points
print(json.dumps({"numba": _accel.USE_NUMBA, "points": p.tolist()}))
"""


def _run(flag):
    env = dict(os.environ, G2FLOW_NUMBA=flag, PYTHONPATH=SRC + os.pathsep + os.environ.get("PYTHONPATH", ""))
    out = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


@pytest.mark.skipif(not _accel.NUMBA_AVAILABLE, reason="numba not installed")
def test_env_switch_end_to_end():
    on, off = _run("1"), _run("0")
    assert on["numba"] is True and off["numba"] is False
    assert np.max(np.abs(np.array(on["points"]) - np.array(off["points"]))) < 1e-11
