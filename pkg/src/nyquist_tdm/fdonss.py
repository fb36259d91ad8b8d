"""Fractional-dimensional-order Nyquist sequences and their orthogonality.

For even N the sequence is the half-integer cosine comb with every line
replaced by its steady-state fractional derivative of order ``alpha(t)``,
frozen at the evaluation time::

    FD(t) = (2/N) sum_n (h_n w0)^alpha(t) cos(h_n w0 t + pi alpha(t) / 2)

with ``h_n = n - 1/2`` and ``w0 = 2 pi df``.  Branch i is delayed by
``i / (N df)``; on line n that is a phase of ``(2n - 1) i pi / N``.

Gram integrals run over one common period ``T = 2 / df`` and are scaled by
``N / T`` so that ``alpha = 0`` gives the identity.

``trajectory_solve`` searches for ``alpha(t)`` (piecewise linear on
periodic knots) by damped Gauss-Newton on the Gram deviations, with a
central-difference Jacobian and a halving line search.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from .frac_calc import Trajectory
from .signal_core import Kind, SequenceSpec, TimeGrid, nss_fourier, tone_arguments, write_csv


class GramMode(str, enum.Enum):
    NSS_VS_FD = "nss_vs_fd"
    FD_VS_FD = "fd_vs_fd"


class Target(str, enum.Enum):
    FDONSS = "fdonss"
    CFDONSS = "cfdonss"


class SolverDiverged(RuntimeError):
    def __init__(self, message, trajectory, history):
        super().__init__(message)
        self.trajectory = trajectory
        self.history = history


def _check_spec(spec: SequenceSpec):
    if spec.n_lines % 2:
        raise ValueError("FDONSS is defined for an even number of lines")
    if spec.kind is not Kind.NSS:
        spec = SequenceSpec(spec.n_lines, spec.delta_f)
    return spec


def fdonss_harmonics(spec: SequenceSpec, traj: Trajectory, t, shift: float = 0.0) -> np.ndarray:
    """Per-line terms (rows) of the sequence delayed by ``shift``, at times ``t``."""
    spec = _check_spec(spec)
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    alpha = np.atleast_1d(traj(t))
    h = spec.harmonics()
    args = tone_arguments(h, spec.delta_f, t - shift)
    omega = 2.0 * np.pi * spec.delta_f * h
    return (2.0 / spec.n_lines) * (
        omega[:, None] ** alpha[None, :] * np.cos(args + (np.pi / 2.0) * alpha[None, :])
    )


def fdonss_eval(spec: SequenceSpec, traj: Trajectory, t, shift: float = 0.0):
    t_arr = np.asarray(t, dtype=np.float64)
    spec = _check_spec(spec)
    alpha = np.atleast_1d(traj(t_arr))
    h = spec.harmonics()
    args = tone_arguments(h, spec.delta_f, np.atleast_1d(t_arr) - shift)
    omega = 2.0 * np.pi * spec.delta_f * h
    # same association order as nss_fourier so alpha = 0 reproduces it bitwise
    out = (2.0 / spec.n_lines) * (
        omega[:, None] ** alpha[None, :] * np.cos(args + (np.pi / 2.0) * alpha[None, :])
    ).sum(axis=0)
    return float(out[0]) if t_arr.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class GramGrid:
    """Fixed quadrature nodes over ``[0, T]`` (inclusive, odd count for Simpson)."""

    t: np.ndarray
    dt: float

    @classmethod
    def with_panels(cls, period: float, panels: int) -> "GramGrid":
        if panels % 2:
            panels += 1
        t = np.linspace(0.0, period, panels + 1)
        return cls(t, period / panels)


def _basis(spec, traj, grid: GramGrid):
    shifts = [i * spec.symbol_spacing for i in range(spec.n_lines)]
    nss = np.stack([nss_fourier(spec, grid.t - s) for s in shifts])
    fd = np.stack([fdonss_eval(spec, traj, grid.t, s) for s in shifts])
    return nss, fd


def _gram_from(a, b, grid: GramGrid, scale: float):
    prod = a[:, None, :] * b[None, :, :]
    return scale * simpson(prod, dx=grid.dt, axis=-1)


def minimum_panels(spec: SequenceSpec, knots: int | None = None) -> int:
    """>= 64 samples per period of the highest line, a multiple of ``2 * knots``."""
    top = spec.harmonics().max() * spec.delta_f
    panels = int(math.ceil(64 * top * spec.common_period))
    step = 2 * (knots or 1)
    return int(math.ceil(panels / step) * step)


def gram_matrices(spec: SequenceSpec, traj: Trajectory, grid: GramGrid):
    """``(nss_vs_fd, fd_vs_fd)`` on fixed nodes."""
    spec = _check_spec(spec)
    nss, fd = _basis(spec, traj, grid)
    scale = spec.n_lines / spec.common_period
    g_nf = _gram_from(nss, fd, grid, scale)
    g_ff = _gram_from(fd, fd, grid, scale)
    return g_nf, 0.5 * (g_ff + g_ff.T)


def choose_grid(spec: SequenceSpec, traj: Trajectory, knots: int | None = None,
                agree: float = 1e-8, max_doublings: int = 8) -> GramGrid:
    """Smallest node set whose Gram matrices agree with one doubling to ``agree``."""
    spec = _check_spec(spec)
    panels = minimum_panels(spec, knots)
    prev = None
    for _ in range(max_doublings + 1):
        grid = GramGrid.with_panels(spec.common_period, panels)
        with np.errstate(over="ignore", invalid="ignore"):
            cur = np.concatenate([g.ravel() for g in gram_matrices(spec, traj, grid)])
        if not np.all(np.isfinite(cur)):
            raise FloatingPointError("Gram matrix is not finite for this trajectory")
        if prev is not None and np.max(np.abs(cur - prev[1])) <= agree:
            return prev[0]
        prev = (grid, cur)
        panels *= 2
    raise RuntimeError("Gram quadrature did not settle; trajectory too rough for the node budget")


def fdonss_gram(spec: SequenceSpec, traj: Trajectory, mode: GramMode | str = GramMode.NSS_VS_FD,
                grid: GramGrid | None = None) -> np.ndarray:
    """Normalised Gram matrix of the delayed branches (see module docstring)."""
    spec = _check_spec(spec)
    if grid is None:
        grid = choose_grid(spec, traj)
    g_nf, g_ff = gram_matrices(spec, traj, grid)
    return g_nf if GramMode(mode) is GramMode.NSS_VS_FD else g_ff


def knot_trajectory(spec: SequenceSpec, values) -> Trajectory:
    """Periodic piecewise-linear ``alpha`` with ``len(values)`` knots over ``[0, T]``."""
    values = np.asarray(values, dtype=np.float64)
    k = values.size
    grid = TimeGrid(0.0, spec.common_period / k, k + 1)
    return Trajectory(grid, np.append(values, values[0]))


def residual_vector(spec: SequenceSpec, values, target: Target, grid: GramGrid, weight: float = 1.0) -> np.ndarray:
    traj = knot_trajectory(spec, values)
    g_nf, g_ff = gram_matrices(spec, traj, grid)
    eye = np.eye(spec.n_lines)
    if Target(target) is Target.FDONSS:
        return (g_nf - eye).ravel()
    return np.concatenate([math.sqrt(weight) * g_nf.ravel(), (g_ff - eye).ravel()])


@dataclass
class SolveResult:
    trajectory: Trajectory
    residual: float
    history: list = field(default_factory=list)  # (iteration, residual, step_norm)
    converged: bool = False
    reason: str = ""

    def write_log(self, path) -> None:
        write_csv(path, ("iteration", "residual", "step_norm"), self.history)


def _knot_values(spec, init, knots):
    if isinstance(init, Trajectory):
        t = np.arange(knots) * spec.common_period / knots
        return np.asarray(init(t), dtype=np.float64)
    values = np.asarray(init, dtype=np.float64)
    if values.ndim == 0:
        return np.full(knots, float(values))
    if values.size != knots:
        raise ValueError(f"expected {knots} knot values, got {values.size}")
    return values.copy()


def trajectory_solve(spec: SequenceSpec, target: Target | str = Target.FDONSS, init=0.0,
                     knots: int = 8, max_iter: int = 100, tol: float = 1e-9,
                     weight: float = 1.0, fd_step: float = 1e-6,
                     max_halvings: int = 40, rcond: float = 1e-6) -> SolveResult:
    """Damped Gauss-Newton search for an order trajectory meeting ``target``.

    The objective is the sum of squared Gram deviations.  A step is accepted
    only if it lowers the objective, so the recorded history never increases.
    Stops when the objective drops below ``tol``, when the line search
    underflows, or after ``max_iter`` iterations.
    """
    spec = _check_spec(spec)
    target = Target(target)
    if knots < 4:
        raise ValueError("need at least 4 knots")
    p = _knot_values(spec, init, knots)
    if not np.all(np.isfinite(p)):
        raise ValueError("initial trajectory must be finite")
    try:
        grid = choose_grid(spec, knot_trajectory(spec, p), knots)
    except FloatingPointError as exc:
        raise SolverDiverged(str(exc), knot_trajectory(spec, p), []) from None

    def res(v):
        with np.errstate(over="ignore", invalid="ignore"):
            return residual_vector(spec, v, target, grid, weight)

    r = res(p)
    f = float(r @ r)
    history = [(0, f, 0.0)]
    if not math.isfinite(f):
        raise SolverDiverged("initial residual is not finite", knot_trajectory(spec, p), history)
    reason = "max_iter"
    for it in range(1, max_iter + 1):
        if f < tol:
            reason = "tol"
            break
        jac = np.empty((r.size, knots))
        for k in range(knots):
            e = np.zeros(knots)
            e[k] = fd_step
            jac[:, k] = (res(p + e) - res(p - e)) / (2 * fd_step)
        if not np.all(np.isfinite(jac)):
            raise SolverDiverged("non-finite Jacobian", knot_trajectory(spec, p), history)
        # knots half a period apart act identically, so J is rank deficient;
        # truncate the SVD well above round-off in the difference quotients
        step, *_ = np.linalg.lstsq(jac, -r, rcond=rcond)
        lam = 1.0
        for _ in range(max_halvings):
            trial = p + lam * step
            r_trial = res(trial)
            f_trial = float(r_trial @ r_trial)
            if math.isfinite(f_trial) and f_trial < f:
                break
            lam *= 0.5
        else:
            reason = "step_underflow"
            break
        p, r, f = trial, r_trial, f_trial
        history.append((it, f, float(np.linalg.norm(lam * step))))
    else:
        if f < tol:
            reason = "tol"
    return SolveResult(knot_trajectory(spec, p), f, history, f < tol, reason)
