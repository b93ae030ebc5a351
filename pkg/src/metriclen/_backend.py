"""Kernel selection. Set ``METRICLEN_PURE=1`` to force the numpy fallback."""

import os

from . import _fallback

if os.environ.get("METRICLEN_PURE", "") not in ("", "0"):
    kernels = _fallback
else:
    try:
        from . import _ckernels as kernels
    except ImportError:  # extension not built
        kernels = _fallback

BACKEND = kernels.NAME
EUCLIDEAN, PNORM, SUP, DISCRETE, SPHERICAL = (
    _fallback.EUCLIDEAN,
    _fallback.PNORM,
    _fallback.SUP,
    _fallback.DISCRETE,
    _fallback.SPHERICAL,
)
