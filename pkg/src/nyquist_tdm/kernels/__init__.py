"""Hot-loop kernels with a compiled core and a numpy fallback.

The compiled extension is preferred when it imports; ``use_backend`` switches
explicitly (benchmarks and cross-backend tests use it).
"""

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["compiled"] = _ckernels

_active = _ckernels if _ckernels is not None else _pykernels


def available_backends():
    return sorted(_BACKENDS)


def active_backend():
    return "compiled" if _active is _ckernels and _ckernels is not None else "python"


def use_backend(name):
    """Select ``"compiled"`` or ``"python"`` kernels for subsequent calls."""
    global _active
    try:
        _active = _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"backend {name!r} not available (have {available_backends()})"
        ) from None


def lfsr_fill(state, mask, count):
    return _active.lfsr_fill(state, mask, count)


def frac_integral_uniform(f, h, beta):
    return _active.frac_integral_uniform(f, h, beta)


def frame_statistics(bits, templates, noise, weights):
    return _active.frame_statistics(bits, templates, noise, weights)
