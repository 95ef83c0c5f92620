"""Kernel backend selection.

The compiled Cython kernels are used when importable; the pure-numpy twin
is the fallback.  Set GTODA_PURE_PYTHON=1 to force the fallback (the two
backends are numerically equivalent and covered by a parity test).
"""
import os

if os.environ.get("GTODA_PURE_PYTHON", "") == "1":
    from . import kernels_py as _impl
else:
    try:
        from . import kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import kernels_py as _impl

BACKEND = _impl.BACKEND
tri_field_rsk = _impl.tri_field_rsk
tri_field_local = _impl.tri_field_local
em_increment_rsk = _impl.em_increment_rsk
em_increment_warren = _impl.em_increment_warren
log_trap_cumint = _impl.log_trap_cumint
