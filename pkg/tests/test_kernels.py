"""Agreement between the compiled kernel core and the numpy fallback."""

import numpy as np
import pytest

from feistab import _kernels
from feistab._kernels import _pyref

needs_ext = pytest.mark.skipif(
    _kernels.BACKEND != "cython", reason="compiled kernels not available"
)


def random_points(n, k, seed=0):
    rng = np.random.default_rng(seed)
    return rng.random((n, k))


@needs_ext
@pytest.mark.parametrize("kinds,alphas", [
    ([0], [2.0]),
    ([0, 0], [0.5, 3.0]),
    ([0, 1], [1.0, 1.0]),
    ([2, 0], [1.0, 2.0]),
    ([0, 0], [2.7, 0.31]),
])
def test_mult_eval_backends_agree(kinds, alphas):
    pts = random_points(5000, len(kinds), seed=1)
    kinds = np.asarray(kinds, dtype=np.int8)
    alphas = np.asarray(alphas, dtype=np.float64)
    got = _kernels._core.mult_eval(kinds, alphas, pts)
    ref = _pyref.mult_eval(kinds, alphas, pts)
    np.testing.assert_allclose(got, ref, rtol=1e-14, atol=0.0)


@needs_ext
@pytest.mark.parametrize("kind", [0, 1])
@pytest.mark.parametrize("seed", [0, 1, 2**63 - 1])
def test_noise_eval_backends_agree_bitwise(kind, seed):
    pts = random_points(5000, 3, seed=2)
    got = _kernels._core.noise_eval(seed, kind, 1e-3, pts)
    ref = _pyref.noise_eval(seed, kind, 1e-3, pts)
    np.testing.assert_array_equal(got, ref)


def test_noise_negative_zero_keys_collapse():
    pts = np.array([[0.0], [-0.0]])
    vals = _kernels.noise_eval(5, 0, 1.0, pts)
    assert vals[0] == vals[1]


def test_noise_uniform_fills_range():
    vals = _kernels.noise_eval(9, 0, 1.0, random_points(20000, 1, seed=3))
    assert np.abs(vals).max() <= 1.0
    assert vals.min() < -0.99 and vals.max() > 0.99
    assert abs(float(vals.mean())) < 0.02


def test_backend_reported():
    assert _kernels.BACKEND in ("cython", "python")
    assert callable(_kernels.mult_eval) and callable(_kernels.noise_eval)
