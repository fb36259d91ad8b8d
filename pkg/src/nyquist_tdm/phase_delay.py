"""Time delay of a Nyquist sequence realised as per-line phase shifts.

Delaying by ``t0`` maps ``cos(w t + phi)`` to ``cos(w t + phi - w t0)``, so
every line's phase drops by ``2 pi f t0`` and the phase response stays linear
in frequency with slope ``-2 pi t0``.
"""

from __future__ import annotations

import math

import numpy as np

from .signal_core import FrequencyComb, SequenceSpec, TimeGrid, Waveform, tone_arguments


class NotAPureDelay(ValueError):
    """Two combs whose phase difference is not linear in frequency."""


def branch_delay(spec: SequenceSpec, k: int) -> float:
    if int(k) != k or not 0 <= k < spec.n_lines:
        raise ValueError(f"branch index must be in [0, {spec.n_lines - 1}], got {k}")
    return k / (spec.n_lines * spec.delta_f)


def phase_for_delay(harmonic: float, delta_f: float, t0: float) -> float:
    """Phase (rad) a line at ``harmonic * delta_f`` acquires from a delay ``t0``."""
    return 2.0 * math.pi * harmonic * delta_f * t0


def apply_delay_as_phase(comb: FrequencyComb, t0: float) -> FrequencyComb:
    if t0 == 0:
        return comb
    return FrequencyComb(
        tuple(
            (h, a, p - phase_for_delay(h, comb.delta_f, t0)) for h, a, p in comb.lines
        ),
        comb.delta_f,
    )


def synthesize(comb: FrequencyComb, grid: TimeGrid) -> Waveform:
    """Sum of the comb's cosine lines sampled on ``grid``."""
    args = tone_arguments(comb.harmonics, comb.delta_f, grid.times())
    values = (comb.amplitudes[:, None] * np.cos(args + comb.phases[:, None])).sum(axis=0)
    return Waveform(grid, values)


def _wrap(x):
    return (np.asarray(x) + np.pi) % (2 * np.pi) - np.pi


def phase_slope(before: FrequencyComb, after: FrequencyComb, tol: float = 1e-9) -> float:
    """Recover the delay relating two combs from their phase difference.

    Lines must be unit-spaced in harmonic index.  The result is unique modulo
    the comb period (``1/df``, or ``2/df`` for a half-integer comb) and is
    returned in ``[0, period)``.
    """
    if before.delta_f != after.delta_f or not np.array_equal(
        before.harmonics, after.harmonics
    ):
        raise ValueError("combs must share their line frequencies")
    h = before.harmonics
    df = before.delta_f
    period = before.period
    dphi = _wrap(after.phases - before.phases)
    if h.size == 1:
        if h[0] == 0:
            raise ValueError("a lone DC line carries no delay information")
        tau = (-dphi[0] % (2 * np.pi)) / (2 * np.pi * h[0])
        return _reduce(tau / df, period)
    if not np.allclose(np.diff(h), 1.0, rtol=0, atol=1e-12):
        raise ValueError("phase_slope needs unit-spaced harmonics")
    # adjacent-line steps wrapped into (-2 pi, 0]: delay taken in [0, 1/df)
    steps = -((-np.diff(dphi)) % (2 * np.pi))
    unwrapped = dphi[0] + np.concatenate([[0.0], np.cumsum(steps)])
    design = np.column_stack([h, np.ones_like(h)])
    (slope, intercept), *_ = np.linalg.lstsq(design, unwrapped, rcond=None)
    resid = np.max(np.abs(unwrapped - design @ np.array([slope, intercept])))
    if resid > tol:
        raise NotAPureDelay(f"phase difference not linear in frequency (residual {resid:.3g} rad)")
    tau = -slope / (2 * np.pi)
    # the intercept is -2 pi h0 j for the whole periods j lost in the wrap
    offset = _wrap(intercept)
    if h[0] % 1.0:
        if abs(abs(offset) - np.pi) < 1e-6:
            tau += 1.0
        elif abs(offset) > 1e-6:
            raise NotAPureDelay("constant phase offset beyond a pure delay")
    elif abs(offset) > 1e-6:
        raise NotAPureDelay("constant phase offset beyond a pure delay")
    return _reduce(tau / df, period)


def _reduce(t0, period):
    t0 = t0 % period
    return 0.0 if period - t0 < 1e-12 * period else float(t0)
