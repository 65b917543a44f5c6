"""Kernel selection: compiled extension when built, numpy fallback otherwise.

``renyi_grid`` and ``shannon_rows`` have identical semantics in both
implementations; ``KERNEL_IMPL`` records which one is active.
"""

try:
    from . import _kernels as _impl

    HAVE_EXTENSION = True
except ImportError:
    from . import _kernels_py as _impl

    HAVE_EXTENSION = False

KERNEL_IMPL = _impl.IMPL

renyi_grid = _impl.renyi_grid
shannon_rows = _impl.shannon_rows
