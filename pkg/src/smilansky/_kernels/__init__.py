"""Backend selection for the hot loops.

The compiled (numba) kernels are used when numba imports and the
environment variable ``SMILANSKY_BACKEND`` is unset or ``numba``. Setting
``SMILANSKY_BACKEND=numpy`` forces the reference numpy/scipy kernels.
The choice is made once, at import time.
"""
import os
import warnings

from . import _numpy

BACKEND_ENV = "SMILANSKY_BACKEND"


class PerformanceWarning(UserWarning):
    pass


def _select():
    wanted = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if wanted not in ("numba", "numpy"):
        raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {wanted!r}")
    if wanted == "numpy":
        return "numpy", _numpy
    try:
        from . import _numba
    except ImportError:
        warnings.warn("numba is not available; falling back to the numpy kernels",
                      PerformanceWarning, stacklevel=2)
        return "numpy", _numpy
    return "numba", _numba


BACKEND, _impl = _select()

sturm_count = _impl.sturm_count
sturm_counts = _impl.sturm_counts
bisect_eigenvalues = _impl.bisect_eigenvalues
gt_factor = _impl.gt_factor
gt_solve = _impl.gt_solve
forward_scaled = _impl.forward_scaled
backward_ratios = _impl.backward_ratios
backward_ratio_first = _impl.backward_ratio_first
exp_sweep = _impl.exp_sweep
pair_gram = _impl.pair_gram

__all__ = [
    "BACKEND", "BACKEND_ENV", "PerformanceWarning",
    "sturm_count", "sturm_counts", "bisect_eigenvalues", "gt_factor", "gt_solve",
    "forward_scaled", "backward_ratios", "backward_ratio_first", "exp_sweep", "pair_gram",
]
