"""Hot numerical kernels: compiled core with a pure-python fallback.

Every grid scan in the package funnels through two primitives, evaluating a
product of per-coordinate multiplicative atoms over an array of points and
drawing deterministic keyed noise. Both exist twice: in ``_core`` (Cython)
and in ``_pyref`` (numpy). The compiled module is preferred when importable;
set ``FEISTAB_NO_EXT=1`` to force the fallback (the benchmark does this to
compare the two).

``noise_eval`` is pure 64-bit integer arithmetic and must agree bitwise
between the backends; ``mult_eval`` may differ by rounding in ``pow``.
"""

import os

from . import _pyref

# atom kind codes shared with multiplicative.Atom
ATOM_POWER = 0
ATOM_ONE = 1
ATOM_ZERO = 2

# noise kind codes shared with harness.NoiseSpec
NOISE_UNIFORM = 0
NOISE_CHECKERBOARD = 1

_impl = _pyref
if not os.environ.get("FEISTAB_NO_EXT"):
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        pass

BACKEND = "python" if _impl is _pyref else "cython"

mult_eval = _impl.mult_eval
noise_eval = _impl.noise_eval
