"""Numeric backends.  The compiled one is used when it was built; set
COMPLAG_KERNEL=python (or cython) to force a choice."""

import os

from . import _kernels_py
from .tape import Program, compile_program, input_size, slot

OK, LOCUS, SINGULAR, NONFINITE = 0, 1, 2, 3

try:
    from . import _ckernel
except ImportError:  # extension not built
    _ckernel = None

BACKENDS = {"python": _kernels_py}
if _ckernel is not None:
    BACKENDS["cython"] = _ckernel


def select(name=None):
    name = name or os.environ.get("COMPLAG_KERNEL") or ("cython" if _ckernel is not None else "python")
    if name not in BACKENDS:
        raise ImportError(f"kernel backend {name!r} is not available (have: {', '.join(sorted(BACKENDS))})")
    return BACKENDS[name]


backend = select()

__all__ = ["backend", "select", "BACKENDS", "Program", "compile_program", "input_size", "slot"]
