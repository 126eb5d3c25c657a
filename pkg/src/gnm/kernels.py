"""Backend selection for the hot loops.

The Cython extension is used when it was built; otherwise, or when
``GNM_PURE_PYTHON=1`` is set, the numpy fallback is used.  Both expose the
in-place kernels ``rotate(c, n, px, pz, cos, sin)``,
``rotate_table(c, ta, ts, pidx, cos, sin)`` and ``fwht(v)``, and
``pair_table(n, px, pz)`` which precomputes the pairs ``rotate_table`` walks.
"""

from __future__ import annotations

import os

from . import _kernels_np

BACKEND = "numpy"
rotate = _kernels_np.rotate
fwht = _kernels_np.fwht
pair_table = _kernels_np.pair_table
rotate_table = _kernels_np.rotate_table

if os.environ.get("GNM_PURE_PYTHON") != "1":
    try:
        from . import _kernels_cy
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        rotate = _kernels_cy.rotate
        fwht = _kernels_cy.fwht
        pair_table = _kernels_cy.pair_table
        rotate_table = _kernels_cy.rotate_table


def backends() -> dict:
    """All importable backends by name, for benchmarks and cross-checks."""
    out = {"numpy": _kernels_np}
    try:
        from . import _kernels_cy
    except ImportError:
        pass
    else:
        out["cython"] = _kernels_cy
    return out
