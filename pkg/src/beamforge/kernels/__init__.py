"""Kernel backend selection.

The compiled extension is preferred when importable; setting the environment
variable ``BEAMFORGE_NO_EXT=1`` before import forces the NumPy fallback.
"""

import os

from . import _pykernels

if os.environ.get("BEAMFORGE_NO_EXT", "0") not in ("", "0"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

pattern_forward = _impl.pattern_forward
pattern_adjoint = _impl.pattern_adjoint


def backend_name() -> str:
    """Name of the active backend: 'compiled' or 'python'."""
    return "compiled" if _impl.__name__.endswith("_ckernels") else "python"
