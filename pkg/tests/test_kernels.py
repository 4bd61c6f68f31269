import os
import subprocess
import sys

import numpy as np
import pytest

from unitri import kernels
from unitri.rng import Stream

BACKENDS = kernels.available_backends()
needs_cython = pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")


@pytest.fixture(params=sorted(BACKENDS))
def impl(request):
    return BACKENDS[request.param]


def _inputs(n=20_000):
    s = Stream(31)
    return s.uniforms(n), s.uniforms(3 * n).reshape(n, 3), s.uniforms(2 * n).reshape(n, 2)


def test_heron_examples(impl):
    s = 2.0 * 3.0 ** -0.25
    out = impl.heron(np.array([s, 1.0, 1.0, 1.0]), np.array([s, 2.0, 1.0, 1.0]),
                     np.array([s, 5.0 ** 0.5, 2.0, 3.0]))
    np.testing.assert_allclose(out[:2], 1.0, rtol=1e-15)
    assert out[2] == 0.0
    assert np.isnan(out[3])


def test_heron_scalar(impl):
    assert float(impl.heron(3.0, 4.0, 5.0)) == pytest.approx(6.0, rel=1e-15)


def test_heron_is_symmetric(impl):
    u1, _, uv = _inputs()
    a, b = 1 + uv[:, 0], 1 + uv[:, 1]
    c = 0.5 * (a + b)
    ref = impl.heron(a, b, c)
    for perm in ((b, c, a), (c, a, b), (b, a, c)):
        np.testing.assert_array_equal(impl.heron(*perm), ref)


def test_c_from_ab_branches(impl):
    a = np.array([1.0, 2.0, 5.0])
    b = np.array([2.0, 3.0, 0.5])
    plus = impl.c_from_ab(a, b, np.ones(3, dtype=bool))
    minus = impl.c_from_ab(a, b, np.zeros(3, dtype=bool))
    root = 2 * np.sqrt(np.maximum(a * a * b * b - 4, 0))
    np.testing.assert_allclose(plus, np.sqrt(a * a + b * b + root), rtol=1e-14)
    np.testing.assert_allclose(minus, np.sqrt(a * a + b * b - root), rtol=1e-12)


@needs_cython
def test_backends_agree():
    py, cy = BACKENDS["python"], BACKENDS["cython"]
    u, uvw, uv = _inputs()
    for name, args in [("right", (u, 0.3, 1.0)), ("isosceles", (u, -0.5, 1.0)), ("arbitrary", (uvw, 1.0))]:
        for x, y in zip(getattr(py, name)(*args), getattr(cy, name)(*args)):
            if x.dtype.kind in "fc":
                np.testing.assert_allclose(x, y, rtol=1e-13, err_msg=name)
            else:
                np.testing.assert_array_equal(x, y, err_msg=name)
    for name in ("stick_twice", "stick_once"):
        x, y = getattr(py, name)(uv), getattr(cy, name)(uv)
        np.testing.assert_array_equal(np.isnan(x), np.isnan(y))
        np.testing.assert_allclose(x[~np.isnan(x)], y[~np.isnan(y)], rtol=1e-12, atol=1e-15)


def test_batch_equals_elementwise(impl):
    u, uvw, uv = _inputs(200)
    a, b, c, br, folded = impl.arbitrary(uvw, 1.0)
    for i in range(0, 200, 37):
        one = impl.arbitrary(uvw[i:i + 1], 1.0)
        assert (one[0][0], one[1][0], one[2][0], one[3][0]) == (a[i], b[i], c[i], br[i])


def test_tiny_sigma_arbitrary_is_right_isosceles(impl):
    # sigma -> 0 concentrates (a, b) at (sqrt 2, sqrt 2), on the hyperbola
    uvw = np.array([[0.5, 0.5, 0.1], [0.5, 0.5, 0.9]])
    a, b, c, br, _ = impl.arbitrary(uvw, 1e-300)
    np.testing.assert_allclose(a, 2 ** 0.5, rtol=1e-15)
    np.testing.assert_allclose(c, 2.0, rtol=1e-7)  # both roots give the hypotenuse


def _backend_in_subprocess(value):
    env = dict(os.environ, UNITRI_BACKEND=value)
    out = subprocess.run([sys.executable, "-c", "from unitri import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True)
    return out


def test_forced_python_backend():
    out = _backend_in_subprocess("python")
    assert out.returncode == 0 and out.stdout.strip() == "python"


def test_invalid_backend_rejected():
    out = _backend_in_subprocess("fortran")
    assert out.returncode != 0 and "UNITRI_BACKEND" in out.stderr


def _selected_in_subprocess(value):
    env = dict(os.environ, UNITRI_BACKEND=value)
    code = "from unitri import kernels; print(sorted(set(kernels.SELECTED.values())))"
    return subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True).stdout.strip()


@needs_cython
def test_default_mixes_backends_per_kernel():
    out = _backend_in_subprocess("")
    assert out.stdout.strip() == "cython"
    assert kernels.SELECTED["right"] == kernels.SELECTED["isosceles"] == "python"
    assert kernels.SELECTED["arbitrary"] == kernels.SELECTED["heron"] == "cython"


@needs_cython
def test_forced_backends_are_uniform():
    assert _selected_in_subprocess("cython") == "['cython']"
    assert _selected_in_subprocess("python") == "['python']"
