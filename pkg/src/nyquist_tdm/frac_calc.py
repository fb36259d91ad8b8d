"""Fractional-order derivatives and fractional-order trajectories.

Two derivative routes are provided and kept separate:

* ``rl_derivative``: Riemann-Liouville with a finite lower limit ``a``,
  ``D^alpha f(t) = d/dt I^{1-alpha} f(t)``, evaluated by product integration
  (piecewise-linear ``f``, kernel integrated exactly) and a centred difference.
* ``weyl_sinusoid_derivative``: the steady-state (``a -> -inf``) rule for a
  tone, ``D^alpha A cos(w t + p) = A w^alpha cos(w t + p + pi alpha / 2)``.

The sinc in the trajectory construction is ``sinc_u(x) = sin(x) / x``
(unnormalised); ``sinc_norm(x) = sin(pi x) / (pi x)`` is available where the
normalised convention is wanted.  Every function taking a ``convention``
accepts ``"unnorm"`` or ``"norm"``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from . import kernels
from .quadrature import adaptive_simpson
from .signal_core import TimeGrid, Waveform, write_csv

TWO_PI = 2.0 * math.pi

STATED_RESULT_NOTE = (
    "integral of w^a A cos(w t + p + pi a/2) over [-T/2, T/2] equals "
    "2 A w^(a-1) sin(w T/2) cos(p + pi a/2); the stated closed form "
    "w^a sin(pi a/2) is not reproduced by this integral and is reported "
    "alongside for comparison only"
)


def sinc_u(x):
    return np.sinc(np.asarray(x, dtype=np.float64) / np.pi)


def sinc_norm(x):
    return np.sinc(np.asarray(x, dtype=np.float64))


_SINC = {"unnorm": sinc_u, "norm": sinc_norm}


def _sinc(convention):
    try:
        return _SINC[convention]
    except KeyError:
        raise ValueError(f"convention must be 'unnorm' or 'norm', got {convention!r}") from None


@dataclass(frozen=True)
class Tone:
    """``amplitude * cos(omega t + phase)``."""

    omega: float
    amplitude: float = 1.0
    phase: float = 0.0

    def __call__(self, t):
        return self.amplitude * np.cos(self.omega * np.asarray(t) + self.phase)


def sine(omega=1.0, amplitude=1.0) -> Tone:
    return Tone(omega, amplitude, -math.pi / 2)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled fractional order ``alpha(t)``; linear between samples, clamped outside."""

    grid: TimeGrid
    alpha_samples: np.ndarray
    convention: str | None = None

    def __post_init__(self):
        a = np.array(self.alpha_samples, dtype=np.float64)
        if a.shape != (self.grid.n_samples,):
            raise ValueError("alpha_samples must match the grid length")
        if not np.all(np.isfinite(a)):
            raise ValueError("trajectory values must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "alpha_samples", a)

    @classmethod
    def constant(cls, value: float, grid: TimeGrid) -> "Trajectory":
        return cls(grid, np.full(grid.n_samples, float(value)))

    def times(self):
        return self.grid.times()

    def __call__(self, t):
        if self.grid.n_samples == 1:
            return np.full(np.shape(t), self.alpha_samples[0]) if np.ndim(t) else float(self.alpha_samples[0])
        out = np.interp(t, self.times(), self.alpha_samples)
        return float(out) if np.ndim(t) == 0 else out

    def to_csv(self, path) -> None:
        write_csv(path, ("t_seconds", "alpha"), zip(self.times(), self.alpha_samples))

    @classmethod
    def from_csv(cls, path) -> "Trajectory":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows:
            raise ValueError(f"{path}: empty trajectory")
        t = np.array([float(r["t_seconds"]) for r in rows])
        a = np.array([float(r["alpha"]) for r in rows])
        if t.size == 1:
            return cls(TimeGrid(t[0], 1.0, 1), a)
        dt = np.diff(t)
        if np.any(dt <= 0) or not np.allclose(dt, dt[0], rtol=1e-9, atol=0):
            raise ValueError(f"{path}: trajectory times must be uniformly increasing")
        return cls(TimeGrid(t[0], (t[-1] - t[0]) / (t.size - 1), t.size), a)


@dataclass(frozen=True, eq=False)
class DimensionalSpectrum:
    alphas: np.ndarray
    values: np.ndarray
    window: float
    closed_form: np.ndarray | None = None
    stated: np.ndarray | None = None
    notes: str = ""

    def __post_init__(self):
        if np.shape(self.alphas) != np.shape(self.values):
            raise ValueError("alphas and values must have equal length")

    def to_csv(self, path) -> None:
        write_csv(path, ("alpha", "value"), zip(self.alphas, self.values))

    def metadata(self) -> dict:
        return {
            "window": self.window,
            "closed_form": None if self.closed_form is None else [float(v) for v in self.closed_form],
            "stated_result": None if self.stated is None else [float(v) for v in self.stated],
            "note": self.notes,
        }


def _check_order(alpha, upper=2.0):
    if not (0.0 <= alpha < upper):
        raise ValueError(f"fractional order must lie in [0, {upper}), got {alpha}")


def frac_integral_at(f: Waveform, order: float, a: float, t: float) -> float:
    """Riemann-Liouville integral ``I_a^order f(t)`` for ``0 < order <= 1``.

    ``f`` is taken piecewise linear between its samples; the kernel
    ``(t - s)^(order - 1) / Gamma(order)`` is integrated exactly on every
    sub-interval.
    """
    if not 0.0 < order <= 1.0:
        raise ValueError("order must lie in (0, 1]")
    if t < a:
        raise ValueError("need a <= t")
    if t == a:
        return 0.0
    times = f.times()
    inside = times[(times > a) & (times < t)]
    nodes = np.concatenate([[a], inside, [t]])
    vals = np.interp(nodes, times, f.samples)
    u = t - nodes
    u[-1] = 0.0
    h = np.diff(nodes)
    ul, ur = u[:-1], u[1:]
    b1 = order + 1.0
    pl, pr = ul**order, ur**order
    A = (pl - pr) / order
    # integral of kernel * (s - s_left) over the panel
    B = ul * A - (ul * pl - ur * pr) / b1
    w = B / h
    acc = np.dot(vals[:-1], A - w) + np.dot(vals[1:], w)
    return float(acc / math.gamma(order))


def _check_span(f: Waveform, a: float, t: float, reach: float):
    g = f.grid
    tol = 1e-9 * g.dt
    if a < g.t_start - tol:
        raise ValueError("lower limit a lies before the waveform grid")
    if t - reach < a - tol:
        raise ValueError("t is too close to the lower limit for the centred difference")
    if t + reach > g.t_end + tol:
        raise ValueError("t is too close to the grid end for the centred difference")


def rl_derivative(f: Waveform, alpha: float, a: float | None = None, t: float = 0.0) -> float:
    """Riemann-Liouville derivative of order ``alpha`` in ``[0, 2)`` at ``t``.

    ``alpha`` in ``[1, 2)`` applies one more centred difference to the
    order ``alpha - 1`` result.  The outer step is the grid spacing.
    """
    _check_order(alpha)
    if a is None:
        a = f.grid.t_start
    h = f.grid.dt
    if alpha >= 1.0:
        _check_span(f, a, t, 2 * h if alpha > 1.0 else h)
        return (_rl_low(f, alpha - 1.0, a, t + h) - _rl_low(f, alpha - 1.0, a, t - h)) / (2 * h)
    _check_span(f, a, t, h if alpha > 0 else 0.0)
    return _rl_low(f, alpha, a, t)


def _rl_low(f, alpha, a, t):
    if alpha == 0.0:
        return float(np.interp(t, f.times(), f.samples))
    h = f.grid.dt
    beta = 1.0 - alpha
    return (frac_integral_at(f, beta, a, t + h) - frac_integral_at(f, beta, a, t - h)) / (2 * h)


def rl_derivative_grid(f: Waveform, alpha: float) -> Waveform:
    """RL derivative at every grid node with ``a`` at the first node.

    Uses the compiled product-trapezoid kernel (O(n^2)).  Interior nodes use
    centred differences, the two end nodes one-sided ones.
    """
    _check_order(alpha)
    if alpha == 0.0:
        return f
    h = f.grid.dt
    if alpha >= 1.0:
        inner = rl_derivative_grid(f, alpha - 1.0).samples if alpha > 1.0 else f.samples
        return Waveform(f.grid, np.gradient(inner, h))
    integral = kernels.frac_integral_uniform(f.samples, h, 1.0 - alpha)
    return Waveform(f.grid, np.gradient(integral, h))


def weyl_sinusoid_derivative(omega: float, amplitude: float, phase: float, alpha: float) -> Tone:
    """Steady-state fractional derivative of ``amplitude * cos(omega t + phase)``."""
    if not omega > 0:
        raise ValueError("omega must be positive")
    return Tone(omega, amplitude * omega**alpha, phase + math.pi * alpha / 2.0)


def tangent_line(f, t0: float, alpha: float, t, a: float | None = None):
    """Fractional tangent line through ``(t0, f(t0))`` with slope ``D^alpha f(t0)``.

    ``f`` is a :class:`Tone` (Weyl rule) or a :class:`Waveform` (RL with lower
    limit ``a``, default the grid start).
    """
    if isinstance(f, Tone):
        slope = float(weyl_sinusoid_derivative(f.omega, f.amplitude, f.phase, alpha)(t0))
        f0 = float(f(t0))
    elif isinstance(f, Waveform):
        slope = rl_derivative(f, alpha, a, t0)
        f0 = float(np.interp(t0, f.times(), f.samples))
    else:
        raise TypeError("f must be a Tone or a Waveform")
    return slope * (np.asarray(t) - t0) + f0


SINC_ANCHOR = TWO_PI


def sine_to_sinc_trajectory(grid: TimeGrid, convention: str = "unnorm") -> Trajectory:
    """Order trajectory ``alpha(u)`` with ``sin(pi alpha(u) / 2) = sinc(u - 2 pi)``.

    Principal ``arcsin`` branch; ``|sinc| <= 1`` so no branch switching occurs.
    """
    s = _sinc(convention)(grid.times() - SINC_ANCHOR)
    alpha = (2.0 / math.pi) * np.arcsin(np.clip(s, -1.0, 1.0))
    return Trajectory(grid, alpha, convention)


def reconstruct_from_trajectory(traj: Trajectory, shift: float = SINC_ANCHOR) -> Waveform:
    """``sin(pi alpha / 2)`` on the trajectory grid moved back by ``shift``."""
    g = traj.grid
    return Waveform(
        TimeGrid(g.t_start - shift, g.dt, g.n_samples),
        np.sin(math.pi * traj.alpha_samples / 2.0),
    )


def sinc_orthogonality_residual(traj: Trajectory, i: int, half_width: float, convention: str | None = None) -> float:
    """``integral_{-W}^{W} sinc(t - i) sin(pi alpha(t + 2 pi) / 2) dt - delta_{i0}``.

    Composite Simpson on the trajectory's own samples; the trajectory grid
    must cover ``[2 pi - W, 2 pi + W]``.  ``convention`` defaults to the one
    the trajectory was built with.
    """
    convention = convention or traj.convention or "unnorm"
    g = traj.grid
    lo, hi = SINC_ANCHOR - half_width, SINC_ANCHOR + half_width
    u = traj.times()
    tol = 1e-9 * g.dt
    if u[0] > lo + tol or u[-1] < hi - tol:
        raise ValueError("trajectory grid does not cover the integration window")
    sel = (u >= lo - tol) & (u <= hi + tol)
    t = u[sel] - SINC_ANCHOR
    y = _sinc(convention)(t - i) * np.sin(math.pi * traj.alpha_samples[sel] / 2.0)
    return float(simpson(y, dx=g.dt)) - (1.0 if i == 0 else 0.0)


def orthogonality_residuals(i: int, half_width: float, samples_per_unit: int = 20) -> dict:
    """Residual under both sinc conventions, each with its own trajectory."""
    n = int(round(2 * half_width * samples_per_unit)) + 1
    grid = TimeGrid.from_span(SINC_ANCHOR - half_width, SINC_ANCHOR + half_width, n)
    return {
        c: sinc_orthogonality_residual(sine_to_sinc_trajectory(grid, c), i, half_width)
        for c in ("norm", "unnorm")
    }


def dimensional_closed_form(tone: Tone, alphas, window: float) -> np.ndarray:
    al = np.asarray(alphas, dtype=np.float64)
    w = tone.omega
    return (
        2.0 * tone.amplitude * w ** (al - 1.0) * math.sin(w * window / 2.0)
        * np.cos(tone.phase + math.pi * al / 2.0)
    )


def dimensional_transform(tone: Tone, alphas, window: float, tol: float = 1e-9) -> DimensionalSpectrum:
    """``F(alpha) = integral_{-T/2}^{T/2} D^alpha f(t) dt`` for a tone, per alpha.

    The derivative is the Weyl tone rule; quadrature is adaptive Simpson with
    absolute tolerance ``tol``.
    """
    if not window > 0:
        raise ValueError("window must be positive")
    alphas = np.asarray(alphas, dtype=np.float64)
    values = np.empty_like(alphas)
    for k, al in enumerate(alphas):
        d = weyl_sinusoid_derivative(tone.omega, tone.amplitude, tone.phase, al)
        values[k] = adaptive_simpson(
            lambda x: d.amplitude * math.cos(d.omega * x + d.phase),
            -window / 2.0,
            window / 2.0,
            tol,
        )
    stated = tone.omega**alphas * np.sin(math.pi * alphas / 2.0)
    return DimensionalSpectrum(
        alphas, values, window, dimensional_closed_form(tone, alphas, window), stated, STATED_RESULT_NOTE
    )
