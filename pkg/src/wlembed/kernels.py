"""Kernel backend selection.

The compiled Cython module is used when it imports cleanly; otherwise (or
when the environment variable ``WLEMBED_PURE_PYTHON`` is set to a truthy
value) the numpy implementation in :mod:`wlembed._pykernels` is used.
Both expose ``subgraph_exists``, ``csr_spmm`` and ``scatter_add_rows``.
"""
import os

from . import _pykernels as python_backend

try:
    from . import _ckernels as compiled_backend
except ImportError:  # extension not built
    compiled_backend = None

if compiled_backend is not None and os.environ.get("WLEMBED_PURE_PYTHON", "") in ("", "0"):
    _impl = compiled_backend
else:
    _impl = python_backend

BACKEND = _impl.BACKEND
subgraph_exists = _impl.subgraph_exists
csr_spmm = _impl.csr_spmm
scatter_add_rows = _impl.scatter_add_rows


def available_backends():
    out = {"python": python_backend}
    if compiled_backend is not None:
        out["cython"] = compiled_backend
    return out
