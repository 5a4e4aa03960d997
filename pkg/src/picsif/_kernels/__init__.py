"""Kernel dispatch: compiled extension when available, pure Python otherwise.

Set PICSIF_PURE=1 to force the pure implementation (used by the benchmark
to compare both).
"""

import os

if os.environ.get("PICSIF_PURE"):
    from . import pure as _impl
else:
    try:
        from . import _speed as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import pure as _impl

IMPL = _impl.IMPL
state_blob = _impl.state_blob
tokenize = _impl.tokenize
renumber = _impl.renumber


def implementations():
    """Both kernel implementations, for benchmarking (compiled may be absent)."""
    from . import pure

    impls = {"pure": pure}
    try:
        from . import _speed  # type: ignore[attr-defined]

        impls["compiled"] = _speed
    except ImportError:
        pass
    return impls
