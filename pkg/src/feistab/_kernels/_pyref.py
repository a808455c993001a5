"""Pure-python (numpy) reference implementation of the hot kernels.

This module defines the semantics; the Cython twin in ``_core.pyx`` must
reproduce them. Noise hashing is splitmix64 chained over the raw bit
patterns of the key coordinates (with -0.0 normalized to +0.0), so it is
reproducible across runs, processes and worker partitions.
"""

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64 = np.uint64
_TO_UNIT = 1.0 / 9007199254740992.0  # 2 ** -53


def _splitmix64(x):
    # uint64 arithmetic wraps mod 2**64, which is exactly what we want
    x = x + _GOLDEN
    x = (x ^ (x >> _U64(30))) * _MIX1
    x = (x ^ (x >> _U64(27))) * _MIX2
    return x ^ (x >> _U64(31))


def mult_eval(kinds, alphas, pts):
    """Evaluate prod_i m_i(pts[:, i]) for per-coordinate atoms.

    ``kinds`` holds the atom codes (0 power, 1 one, 2 zero), ``alphas`` the
    exponents aligned with them, ``pts`` an (n, k) float64 array of cube
    points. Returns an (n,) float64 array.
    """
    pts = np.ascontiguousarray(pts, dtype=np.float64)
    out = np.ones(pts.shape[0])
    for i, kind in enumerate(kinds):
        if kind == 0:
            out *= np.power(pts[:, i], alphas[i])
        elif kind == 2:
            out[:] = 0.0
            break
    return out


def noise_eval(seed, kind, amplitude, keys):
    """Deterministic bounded noise, one value per row of ``keys``.

    kind 0 draws uniformly from [-amplitude, amplitude); kind 1 returns
    exactly +/-amplitude with a hash-derived sign. The value depends only
    on (seed, row bits).
    """
    keys = np.ascontiguousarray(keys, dtype=np.float64)
    h = np.full(keys.shape[0], _U64(int(seed) & 0xFFFFFFFFFFFFFFFF), dtype=np.uint64)
    for j in range(keys.shape[1]):
        bits = (keys[:, j] + 0.0).view(np.uint64)
        h = _splitmix64(h ^ bits)
    if kind == 1:
        return np.where((h & _U64(1)).astype(bool), amplitude, -amplitude)
    unit = (h >> _U64(11)).astype(np.float64) * _TO_UNIT
    return amplitude * (2.0 * unit - 1.0)
