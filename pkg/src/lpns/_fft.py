"""FFT backend over the last three axes, in the coefficient convention.

``synth`` maps Fourier coefficients (rfft half) to grid samples with no
normalisation, ``analyze`` maps samples back to coefficients (divides by
the number of points).  pyFFTW plans are built with FFTW_ESTIMATE so that
repeated runs are bit-identical; numpy.fft is the fallback.
"""
import threading

import numpy as np

try:
    import pyfftw
except ImportError:  # pragma: no cover
    pyfftw = None

AXES = (-3, -2, -1)
_local = threading.local()


def _plan(kind, shape, s=None):
    cache = getattr(_local, "plans", None)
    if cache is None:
        cache = _local.plans = {}
    key = (kind, shape, s)
    plan = cache.get(key)
    if plan is None:
        kwargs = dict(axes=AXES, planner_effort="FFTW_ESTIMATE", threads=1)
        if kind == "r2c":
            buf = pyfftw.empty_aligned(shape, dtype=np.float64)
            plan = pyfftw.builders.rfftn(buf, **kwargs)
        else:
            buf = pyfftw.empty_aligned(shape, dtype=np.complex128)
            plan = pyfftw.builders.irfftn(buf, s=s, **kwargs)
        cache[key] = plan
    return plan


def analyze(values, weight=None):
    """Real samples (..., n, n, n) -> rfft-half coefficients.

    ``weight`` (broadcastable to the half cube) multiplies the result.
    """
    n = values.shape[-1]
    scale = 1.0 / n**3 if weight is None else weight * (1.0 / n**3)
    if pyfftw is None:
        return np.fft.rfftn(values, axes=AXES) * scale
    plan = _plan("r2c", values.shape)
    plan.input_array[...] = values
    return plan() * scale


def synth(half, n, copy=True):
    """rfft-half coefficients -> real samples on the n^3 grid (input kept).

    With ``copy=False`` the result aliases the plan's output buffer and is
    only valid until the next transform of the same shape on this thread.
    """
    if pyfftw is None:
        return np.fft.irfftn(half, s=(n, n, n), axes=AXES, norm="forward")
    plan = _plan("c2r", half.shape, (n, n, n))
    plan.input_array[...] = half
    out = plan(normalise_idft=False)
    return out.copy() if copy else out
