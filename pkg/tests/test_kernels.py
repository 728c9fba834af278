import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spinfields import _kernels_py as py

compiled = pytest.importorskip("spinfields._kernels")

arrays = st.tuples(st.integers(3, 12), st.integers(4, 12), st.integers(0, 2 ** 32 - 1))


def _sample(shape_seed):
    n0, n1, seed = shape_seed
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n0, n1)), rng.standard_normal((n0, n1))


@given(arrays, st.booleans())
def test_bilinear_roots_agree(shape_seed, wrap):
    p, q = _sample(shape_seed)
    a = py.bilinear_roots(p, q, wrap)
    b = compiled.bilinear_roots(p, q, wrap)
    for x, y in zip(a, b):
        assert np.allclose(x, y, rtol=1e-10, atol=1e-12)


@given(arrays, st.booleans(), st.booleans())
def test_contour_length_agrees(shape_seed, spherical, wrap):
    g, _ = _sample(shape_seed)
    a = py.contour_length(g, 0.1, 0.2, 0.05, spherical, wrap, None)
    b = compiled.contour_length(g, 0.1, 0.2, 0.05, spherical, wrap, None)
    assert abs(a - b) <= 1e-10 * max(1.0, abs(a))


@given(st.integers(2, 60), st.integers(0, 2 ** 32 - 1))
def test_label_components_agree(n, seed):
    rng = np.random.default_rng(seed)
    edges = rng.integers(0, n, size=(2 * n, 2))
    active = rng.random(n) < 0.6
    la, ca = py.label_components(n, edges, active)
    lb, cb = compiled.label_components(n, edges, active)
    assert ca == cb and np.array_equal(la, lb)


def test_cell_mask_is_respected():
    p, q = _sample((8, 8, 5))
    mask = np.zeros((7, 7), bool)
    mask[2:5, 2:5] = True
    for impl in (py, compiled):
        ci, cj, *_ = impl.bilinear_roots(p, q, False, mask)
        assert np.all(mask[ci, cj])


def test_environment_forces_fallback():
    env = dict(os.environ, SPINFIELDS_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import spinfields.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
