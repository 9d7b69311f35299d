"""Kernel backend selection: compiled extension if built, numpy otherwise.

Set CRITWAVE_PURE=1 to force the numpy fallback.  Both backends implement
the same elementwise updates in the same order, so results agree to
rounding; the compiled path just fuses the loops.
"""

import os

from . import _purekernels

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

_FORCE_PURE = os.environ.get("CRITWAVE_PURE", "").lower() in ("1", "true", "yes")
_impl = _purekernels if (_core is None or _FORCE_PURE) else _core

__all__ = [
    "backend_name",
    "compiled_available",
    "get_backend",
    "dw_apply",
    "dw_update",
    "heat_position",
    "heat_update",
    "abs_power",
]


def backend_name():
    return _impl.BACKEND_NAME


def compiled_available():
    return _core is not None


def get_backend(name):
    """Explicit backend module by name ('python' or 'compiled')."""
    if name == "python":
        return _purekernels
    if name == "compiled":
        if _core is None:
            raise RuntimeError("compiled backend is not built")
        return _core
    raise ValueError(f"unknown backend {name!r}")


def _flat(a):
    return a.reshape(-1)


def _pick(impl):
    if impl is None:
        return _impl
    if isinstance(impl, str):
        return get_backend(impl)
    return impl


def dw_apply(e11, e12, e21, e22, u, ut, out_u, out_ut, impl=None):
    impl = _pick(impl)
    if impl is _purekernels:
        impl.dw_apply(e11, e12, e21, e22, u, ut, out_u, out_ut)
    else:
        impl.dw_apply(_flat(e11), _flat(e12), _flat(e21), _flat(e22),
                      _flat(u), _flat(ut), _flat(out_u), _flat(out_ut))


def dw_update(e11, e12, e21, e22, wpos, wvel, f, u, ut, impl=None):
    impl = _pick(impl)
    if impl is _purekernels:
        impl.dw_update(e11, e12, e21, e22, wpos, wvel, f, u, ut)
    else:
        impl.dw_update(_flat(e11), _flat(e12), _flat(e21), _flat(e22),
                       _flat(wpos), _flat(wvel), _flat(f), _flat(u), _flat(ut))


def heat_position(m, u, out, impl=None):
    impl = _pick(impl)
    if impl is _purekernels:
        impl.heat_position(m, u, out)
    else:
        impl.heat_position(_flat(m), _flat(u), _flat(out))


def heat_update(m, w, f, u, impl=None):
    impl = _pick(impl)
    if impl is _purekernels:
        impl.heat_update(m, w, f, u)
    else:
        impl.heat_update(_flat(m), _flat(w), _flat(f), _flat(u))


def abs_power(w, exponent, out, impl=None):
    impl = _pick(impl)
    if impl is _purekernels:
        impl.abs_power(w, exponent, out)
    else:
        impl.abs_power(_flat(w), exponent, _flat(out))
