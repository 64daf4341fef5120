"""Select the binary64 lattice-sum kernel at import.

The compiled module is used when it was built; ``POINCARE_KERNEL=python``
forces the pure-Python fallback.
"""

from __future__ import annotations

import os

from . import _pykernel
from ._pykernel import MODE_DERIV, MODE_FULL, MODE_LI, MODE_LRHO

__all__ = ["BACKEND", "evaluate", "python_evaluate", "compiled_evaluate", "MODE_FULL", "MODE_DERIV", "MODE_LRHO", "MODE_LI"]

python_evaluate = _pykernel.evaluate

try:
    from ._kernel import evaluate as compiled_evaluate
except ImportError:  # extension not built
    compiled_evaluate = None

if compiled_evaluate is not None and os.environ.get("POINCARE_KERNEL", "").lower() != "python":
    BACKEND = "compiled"
    evaluate = compiled_evaluate
else:
    BACKEND = "python"
    evaluate = python_evaluate
