"""Hot integration kernels: compiled extension with pure-Python fallback.

The closed-loop benchmark integration spends essentially all of its time
in a tight per-step loop (10^6 steps per run, hundreds of runs per
sweep).  A Cython extension implements that loop; a pure-Python twin with
the identical floating-point operation order is selected at import time
when the extension is unavailable, or when the environment variable
``NOISEAID_PURE_PY`` is set to a non-empty value.

Both backends expose ``chen_loop`` with the same signature and produce
bit-identical results.  ``benchmarks/kernel_bench.py`` compares them.
"""

import os

from noiseaid.kernels import _chen_py

BACKEND = "python"
chen_loop = _chen_py.chen_loop

if not os.environ.get("NOISEAID_PURE_PY"):
    try:
        from noiseaid.kernels import _chen_ext

        chen_loop = _chen_ext.chen_loop
        BACKEND = "compiled"
    except ImportError:
        pass


def available_backends():
    out = {"python": _chen_py.chen_loop}
    try:
        from noiseaid.kernels import _chen_ext

        out["compiled"] = _chen_ext.chen_loop
    except ImportError:
        pass
    return out
