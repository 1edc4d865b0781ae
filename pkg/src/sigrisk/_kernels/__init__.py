"""Kernel backend selection.

The compiled ``_fast`` module is used when it imports; otherwise, or when
the environment variable ``SIGRISK_PURE_PYTHON`` is set to a non-empty value,
the numpy ``_reference`` module is used.  ``BACKEND`` names the active one.
"""
import os

from . import _reference

try:
    from . import _fast
except ImportError:  # extension not built
    _fast = None

if _fast is not None and not os.environ.get("SIGRISK_PURE_PYTHON"):
    impl = _fast
    BACKEND = "compiled"
else:
    impl = _reference
    BACKEND = "python"

tensor_mul = impl.tensor_mul
mul_exp_inplace = impl.mul_exp_inplace
batch_signature = impl.batch_signature
dot = impl.dot
advance = impl.advance


def available():
    """Names of the importable backends."""
    return ["compiled", "python"] if _fast is not None else ["python"]


def get(name):
    """Return a backend module by name (``"compiled"`` or ``"python"``)."""
    if name == "python":
        return _reference
    if name == "compiled" and _fast is not None:
        return _fast
    raise LookupError(f"kernel backend {name!r} is not available")
