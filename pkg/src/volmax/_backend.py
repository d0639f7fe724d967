"""Kernel selection.

The compiled extension is used when it imported cleanly; otherwise, or when
``VOLMAX_BACKEND=python`` is set, the numpy fallback is used. Setting
``VOLMAX_BACKEND=compiled`` makes a missing extension an import error.
"""

import os

from . import _fallback

_choice = os.environ.get("VOLMAX_BACKEND", "auto").lower()
if _choice not in ("auto", "python", "compiled"):
    raise ImportError(f"VOLMAX_BACKEND must be auto, python or compiled, not {_choice!r}")

_compiled = None
if _choice != "python":
    try:
        from . import _kernels as _compiled
    except ImportError as exc:
        if _choice == "compiled":
            raise ImportError("VOLMAX_BACKEND=compiled but the volmax._kernels extension "
                              "is not built; reinstall with Cython available") from exc

BACKENDS = {"python": _fallback}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled

NAME = "compiled" if _compiled is not None else "python"
_active = BACKENDS[NAME]


def greedy_select(X, k, rank_tol, tie_rtol):
    return _active.greedy_select(X, k, rank_tol, tie_rtol)


def brute_force_search(X, k, rank_tol, tie_atol):
    return _active.brute_force_search(X, k, rank_tol, tie_atol)


# above this much work (k * candidates * d) the BLAS products in the numpy
# swap kernel beat the compiled scalar loops
SWAP_COMPILED_MAX_WORK = 30_000


def swap_log_ratios(Q, L, W, rank_tol):
    if Q.shape[0] * W.shape[0] * W.shape[1] > SWAP_COMPILED_MAX_WORK:
        return _fallback.swap_log_ratios(Q, L, W, rank_tol)
    return _active.swap_log_ratios(Q, L, W, rank_tol)


def use(name):
    """Switch the active kernels (``"python"`` or ``"compiled"``); returns the previous name."""
    global NAME, _active
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} is not available; have {sorted(BACKENDS)}")
    previous = NAME
    NAME, _active = name, BACKENDS[name]
    return previous
