"""Nearest-neighbor kernel backends.

The hot loop of every simplex/cross-map computation is a batched k-nearest-
neighbor search over delay-coordinate vectors. Two interchangeable backends
implement it:

* ``_compiled``, a Cython extension built at install time (fast path);
* ``_pure``, a numpy fallback that is always available.

Selection happens once at import: the compiled kernel when present, else
the fallback. Set ``CCMCAUSAL_KERNEL=pure`` or ``=compiled`` to force one
(``compiled`` raises if the extension is missing). ``benchmarks/
kernel_benchmark.py`` compares the two.
"""

from __future__ import annotations

import os

from . import _pure

_choice = os.environ.get("CCMCAUSAL_KERNEL", "auto").lower()

if _choice == "pure":
    _impl = _pure
elif _choice == "compiled":
    from . import _compiled as _impl  # ImportError here means no built extension
elif _choice == "auto":
    try:
        from . import _compiled as _impl
    except ImportError:
        _impl = _pure
else:
    raise RuntimeError(
        f"CCMCAUSAL_KERNEL must be 'auto', 'pure' or 'compiled', got {_choice!r}"
    )

knn_search = _impl.knn_search
BACKEND = "pure" if _impl is _pure else "compiled"


def backend_name() -> str:
    """Name of the active kernel backend ('compiled' or 'pure')."""
    return BACKEND
