"""Selects the monomial-evaluation kernel: compiled extension or NumPy fallback.

Set ``SFWG_PURE_PYTHON=1`` to force the fallback (used by the benchmark to
compare both backends in one process would not work, so the benchmark calls
the implementations directly).
"""

import os

from . import _mono_py

if os.environ.get("SFWG_PURE_PYTHON") == "1":
    _impl = _mono_py
    HAVE_COMPILED = False
else:
    try:
        from . import _mono as _impl  # type: ignore[attr-defined]

        HAVE_COMPILED = True
    except ImportError:
        _impl = _mono_py
        HAVE_COMPILED = False

monomial_table = _impl.monomial_table
monomial_exponents = _mono_py.monomial_exponents


def backend_name() -> str:
    return "compiled" if HAVE_COMPILED else "python"
