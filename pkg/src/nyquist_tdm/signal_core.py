"""Nyquist sinc sequences (NSS), their sine-series complement (CNSS) and
raised-cosine pulses, plus inner products and Gram matrices over a period.

Conventions
-----------
* ``sinc_norm(x) = sin(pi x) / (pi x)`` is used throughout this module.
* Waveforms are dimensionless; the NSS peak is exactly 1.
* A sequence with ``n_lines`` = N and spacing ``delta_f`` has spectral lines at
  ``m * delta_f`` (m = 0..(N-1)/2, odd N) or ``(n - 0.5) * delta_f``
  (n = 1..N/2, even N).  Half-integer combs repeat only every ``2 / delta_f``.
"""

from __future__ import annotations

import csv
import enum
import math
import sys
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

SINGULARITY_EPS = 1e-8
_LATTICE_TOL = 1e-9


class Kind(str, enum.Enum):
    NSS = "nss"
    CNSS = "cnss"


@dataclass(frozen=True)
class SequenceSpec:
    n_lines: int
    delta_f: float
    kind: Kind = Kind.NSS

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if int(self.n_lines) != self.n_lines or self.n_lines < 2:
            raise ValueError(f"n_lines must be an integer >= 2, got {self.n_lines}")
        object.__setattr__(self, "n_lines", int(self.n_lines))
        if not (self.delta_f > 0 and math.isfinite(self.delta_f)):
            raise ValueError(f"delta_f must be positive, got {self.delta_f}")
        if self.kind is Kind.CNSS and self.n_lines % 2:
            raise ValueError("CNSS is only defined for an even number of lines")

    @property
    def half_integer(self) -> bool:
        return self.n_lines % 2 == 0

    @property
    def common_period(self) -> float:
        return (2.0 if self.half_integer else 1.0) / self.delta_f

    @property
    def symbol_spacing(self) -> float:
        """Branch spacing 1/(N delta_f): distance between adjacent zero crossings."""
        return 1.0 / (self.n_lines * self.delta_f)

    def harmonics(self) -> np.ndarray:
        """Line positions as multiples of ``delta_f``."""
        n = self.n_lines
        if self.half_integer:
            return np.arange(1, n // 2 + 1) - 0.5
        return np.arange(0, (n - 1) // 2 + 1, dtype=np.float64)

    def amplitudes(self) -> np.ndarray:
        n = self.n_lines
        amps = np.full(self.harmonics().shape, 2.0 / n)
        if not self.half_integer:
            amps[0] = 1.0 / n
        return amps

    def comb(self) -> "FrequencyComb":
        # sine lines are cosines lagging by pi/2
        phase = -math.pi / 2 if self.kind is Kind.CNSS else 0.0
        return FrequencyComb(
            tuple(
                (float(h), float(a), phase)
                for h, a in zip(self.harmonics(), self.amplitudes())
            ),
            self.delta_f,
        )


@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    dt: float
    n_samples: int

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if int(self.n_samples) != self.n_samples or self.n_samples < 1:
            raise ValueError("n_samples must be a positive integer")
        object.__setattr__(self, "n_samples", int(self.n_samples))

    @classmethod
    def from_span(cls, t_start: float, t_end: float, n_samples: int) -> "TimeGrid":
        """Inclusive grid from ``t_start`` to ``t_end``."""
        if n_samples < 2 or not t_end > t_start:
            raise ValueError("need t_end > t_start and at least two samples")
        return cls(t_start, (t_end - t_start) / (n_samples - 1), n_samples)

    @classmethod
    def periodic(cls, period: float, n_samples: int, t_start: float = 0.0) -> "TimeGrid":
        """``n_samples`` points covering ``[t_start, t_start + period)``."""
        return cls(t_start, period / n_samples, n_samples)

    @property
    def t_end(self) -> float:
        return self.t_start + (self.n_samples - 1) * self.dt

    def times(self) -> np.ndarray:
        return self.t_start + np.arange(self.n_samples) * self.dt


@dataclass(frozen=True, eq=False)
class Waveform:
    grid: TimeGrid
    samples: np.ndarray

    def __post_init__(self):
        s = np.array(self.samples, dtype=np.float64)
        if s.shape != (self.grid.n_samples,):
            raise ValueError(
                f"expected {self.grid.n_samples} samples, got shape {s.shape}"
            )
        if not np.all(np.isfinite(s)):
            raise ValueError("waveform samples must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    def times(self) -> np.ndarray:
        return self.grid.times()

    def to_csv(self, path) -> None:
        write_csv(path, ("t_seconds", "amplitude"), zip(self.times(), self.samples))


@dataclass(frozen=True)
class FrequencyComb:
    """Spectral lines ``(harmonic, amplitude, phase)``; frequency = harmonic * delta_f."""

    lines: tuple
    delta_f: float

    def __post_init__(self):
        lines = tuple((float(h), float(a), float(p)) for h, a, p in self.lines)
        if not lines:
            raise ValueError("a comb needs at least one line")
        h = np.array([ln[0] for ln in lines])
        if np.any(np.diff(h) <= 0):
            raise ValueError("harmonics must be strictly increasing")
        if any(ln[1] < 0 for ln in lines):
            raise ValueError("line amplitudes must be non-negative")
        if not self.delta_f > 0:
            raise ValueError("delta_f must be positive")
        object.__setattr__(self, "lines", lines)

    @property
    def harmonics(self) -> np.ndarray:
        return np.array([ln[0] for ln in self.lines])

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([ln[1] for ln in self.lines])

    @property
    def phases(self) -> np.ndarray:
        return np.array([ln[2] for ln in self.lines])

    @property
    def frequencies(self) -> np.ndarray:
        return self.harmonics * self.delta_f

    @property
    def period(self) -> float:
        """Shortest common period of all lines (harmonics on a half-integer lattice)."""
        doubled = np.rint(2 * self.harmonics)
        if not np.allclose(doubled, 2 * self.harmonics, rtol=0, atol=1e-12):
            raise ValueError("harmonics must be multiples of 1/2 for a common period")
        return (2.0 if np.any(doubled % 2) else 1.0) / self.delta_f

    def to_csv(self, path) -> None:
        write_csv(
            path,
            ("frequency_hz", "amplitude", "phase_rad"),
            zip(self.frequencies, self.amplitudes, self.phases),
        )


@dataclass(frozen=True)
class Branch:
    """A sequence delayed by ``shift`` seconds (one TDM branch)."""

    spec: SequenceSpec
    shift: float = 0.0

    def __call__(self, t):
        return evaluate(self.spec, np.asarray(t, dtype=np.float64) - self.shift)


def write_csv(path, header, rows) -> None:
    """Write rows with round-trip precision; ``path == "-"`` means stdout."""
    if str(path) == "-":
        _write_rows(sys.stdout, header, rows)
        return
    with open(path, "w", newline="") as fh:
        _write_rows(fh, header, rows)


def _write_rows(fh, header, rows):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def sinc_norm(x):
    return np.sinc(x)


def tone_arguments(harmonics, delta_f, t) -> np.ndarray:
    """``2 pi h delta_f t`` for every line (rows) and time (columns)."""
    omega = 2.0 * np.pi * delta_f * np.asarray(harmonics, dtype=np.float64)
    return omega[:, None] * np.atleast_1d(np.asarray(t, dtype=np.float64))[None, :]


def _scalar_or_array(t, out):
    return float(out[0]) if np.ndim(t) == 0 else out


def nss_fourier(spec: SequenceSpec, t):
    """NSS as its cosine series (pole-free)."""
    if spec.kind is not Kind.NSS:
        raise ValueError("nss_fourier needs an NSS spec")
    n = spec.n_lines
    args = tone_arguments(spec.harmonics(), spec.delta_f, t)
    if spec.half_integer:
        out = (2.0 / n) * np.cos(args).sum(axis=0)
    else:
        out = 1.0 / n + (2.0 / n) * np.cos(args[1:]).sum(axis=0)
    return _scalar_or_array(t, out)


def nss_closed_form(spec: SequenceSpec, t, eps: float = SINGULARITY_EPS):
    """``sin(N pi df t) / (N sin(pi df t))``; near the poles the cosine series is used."""
    if spec.kind is not Kind.NSS:
        raise ValueError("nss_closed_form needs an NSS spec")
    tt = np.atleast_1d(np.asarray(t, dtype=np.float64))
    x = np.pi * spec.delta_f * tt
    den = spec.n_lines * np.sin(x)
    near = np.abs(np.sin(x)) < eps
    out = np.empty_like(tt)
    ok = ~near
    out[ok] = np.sin(spec.n_lines * x[ok]) / den[ok]
    if np.any(near):
        out[near] = nss_fourier(spec, tt[near])
    return _scalar_or_array(t, out)


def cnss(spec: SequenceSpec, t):
    """Complementary sequence: ``(2/N) sum sin(2 pi (n - 1/2) df t)``."""
    if spec.n_lines % 2:
        raise ValueError("CNSS requires an even number of lines")
    args = tone_arguments(spec.harmonics(), spec.delta_f, t)
    out = (2.0 / spec.n_lines) * np.sin(args).sum(axis=0)
    return _scalar_or_array(t, out)


def evaluate(spec: SequenceSpec, t, form: str = "closed"):
    if spec.kind is Kind.CNSS:
        return cnss(spec, t)
    if form == "fourier":
        return nss_fourier(spec, t)
    if form == "closed":
        return nss_closed_form(spec, t)
    raise ValueError(f"unknown NSS form {form!r}")


def raised_cosine(delta_t: float, rolloff: float, t):
    """Raised-cosine pulse with zero crossings every ``delta_t``."""
    if not 0.0 <= rolloff <= 1.0:
        raise ValueError("rolloff must lie in [0, 1]")
    if not delta_t > 0:
        raise ValueError("delta_t must be positive")
    x = np.atleast_1d(np.asarray(t, dtype=np.float64)) / delta_t
    den = 1.0 - (2.0 * rolloff * x) ** 2
    out = np.empty_like(x)
    sing = np.abs(den) < 1e-10
    ok = ~sing
    out[ok] = np.sinc(x[ok]) * np.cos(np.pi * rolloff * x[ok]) / den[ok]
    if np.any(sing):
        # limit at |x| = 1/(2 rolloff)
        out[sing] = (np.pi / 4.0) * np.sinc(1.0 / (2.0 * rolloff))
    return _scalar_or_array(t, out)


Source = Union[SequenceSpec, Branch, Callable]


def sample(source: Source, grid: TimeGrid, form: str = "closed") -> Waveform:
    """Evaluate a sequence, branch or callable on ``grid``."""
    t = grid.times()
    if isinstance(source, SequenceSpec):
        values = evaluate(source, t, form)
    elif isinstance(source, Branch):
        values = evaluate(source.spec, t - source.shift, form)
    else:
        values = source(t)
    return Waveform(grid, np.asarray(values, dtype=np.float64))


def _check_period(period: float, base: float) -> None:
    ratio = period / base
    if not (ratio >= 1 - _LATTICE_TOL and abs(ratio - round(ratio)) <= _LATTICE_TOL * ratio):
        raise ValueError(
            f"period {period!r} is not a multiple of the common period {base!r}"
        )


def _lattice_index(delay: float, spacing: float):
    k = delay / spacing
    kr = round(k)
    return int(kr) if abs(k - kr) <= _LATTICE_TOL else None


def _branch_kernel(a: Branch, b: Branch) -> float:
    """Per-unit-time correlation (1/T) * N * <a, b>, in closed form."""
    spec = a.spec
    delay = a.shift - b.shift
    even = spec.half_integer
    if a.spec.kind == b.spec.kind:
        k = _lattice_index(delay, spec.symbol_spacing)
        if k is not None:
            # Dirichlet kernel on the branch lattice: exact zeros and +/-1 peaks
            if k % spec.n_lines:
                return 0.0
            return -1.0 if (even and (k // spec.n_lines) % 2) else 1.0
        return float(nss_fourier(SequenceSpec(spec.n_lines, spec.delta_f), delay))
    # <cos(w(t-a)), sin(w(t-b))> averages to sin(w(a-b)) / 2
    val = float(cnss(spec, delay))
    return val if a.spec.kind is Kind.NSS else -val


def _comb_inner(a: FrequencyComb, b: FrequencyComb, period: float) -> float:
    if a.delta_f != b.delta_f:
        raise ValueError("combs must share delta_f")
    total = 0.0
    hb = {h: (amp, ph) for h, amp, ph in b.lines}
    for h, amp, ph in a.lines:
        if h not in hb:
            continue
        amp_b, ph_b = hb[h]
        if h == 0.0:
            total += period * amp * math.cos(ph) * amp_b * math.cos(ph_b)
        else:
            total += 0.5 * period * amp * amp_b * math.cos(ph - ph_b)
    return total


def _as_branch(x):
    if isinstance(x, SequenceSpec):
        return Branch(x, 0.0)
    return x


def _base_period(x) -> float:
    if isinstance(x, Branch):
        return x.spec.common_period
    if isinstance(x, FrequencyComb):
        return x.period
    return 0.0


def inner_product(a, b, period: float, backend: str = "analytic", samples: int | None = None) -> float:
    """``integral_0^period a(t) b(t) dt``.

    ``a`` and ``b`` may be sequences, :class:`Branch` objects, combs
    (analytic backend) or waveforms sampled on an inclusive grid over
    ``[0, period]`` (numeric backend).  The analytic backend is exact; the
    numeric backend is composite trapezoid.
    """
    a, b = _as_branch(a), _as_branch(b)
    for x in (a, b):
        base = _base_period(x)
        if base:
            _check_period(period, base)
    if backend == "analytic":
        if isinstance(a, Branch) and isinstance(b, Branch):
            if a.spec.n_lines != b.spec.n_lines or a.spec.delta_f != b.spec.delta_f:
                ca, cb = _delayed_comb(a), _delayed_comb(b)
                return _comb_inner(ca, cb, period)
            return period / a.spec.n_lines * _branch_kernel(a, b)
        if isinstance(a, Waveform) or isinstance(b, Waveform):
            raise ValueError("the analytic backend needs sequences or combs")
        ca = _delayed_comb(a) if isinstance(a, Branch) else a
        cb = _delayed_comb(b) if isinstance(b, Branch) else b
        return _comb_inner(ca, cb, period)
    if backend == "numeric":
        return _numeric_inner(a, b, period, samples)
    raise ValueError(f"unknown backend {backend!r}")


def _delayed_comb(br: Branch) -> FrequencyComb:
    comb = br.spec.comb()
    shift = 2 * np.pi * comb.frequencies * br.shift
    return FrequencyComb(
        tuple(zip(comb.harmonics, comb.amplitudes, comb.phases - shift)), comb.delta_f
    )


def _top_frequency(*xs) -> int:
    top = 1.0
    for x in xs:
        if isinstance(x, Branch):
            top = max(top, x.spec.harmonics().max() * x.spec.delta_f)
        elif isinstance(x, FrequencyComb):
            top = max(top, x.frequencies.max())
    return top


def _numeric_inner(a, b, period, samples):
    waves = [x for x in (a, b) if isinstance(x, Waveform)]
    if waves:
        grid = waves[0].grid
        if any(w.grid != grid for w in waves):
            raise ValueError("waveforms must share a grid")
        if abs(grid.t_start) > 1e-12 * period or abs(grid.t_end - period) > 1e-9 * period:
            raise ValueError("waveforms must be sampled on an inclusive [0, period] grid")
    else:
        if samples is None:
            f_top = _top_frequency(a, b)
            samples = int(math.ceil(64 * f_top * period)) + 1
        grid = TimeGrid.from_span(0.0, period, samples)
    t = grid.times()
    va = a.samples if isinstance(a, Waveform) else _eval_any(a, t)
    vb = b.samples if isinstance(b, Waveform) else _eval_any(b, t)
    return float(np.trapezoid(va * vb, dx=grid.dt))


def _eval_any(x, t):
    if isinstance(x, Branch):
        return evaluate(x.spec, t - x.shift, "fourier")
    if isinstance(x, FrequencyComb):
        from .phase_delay import synthesize

        return synthesize(x, TimeGrid(t[0], t[1] - t[0], t.size)).samples
    return np.asarray(x(t), dtype=np.float64)


def branch_shifts(spec: SequenceSpec) -> list[float]:
    return [k * spec.symbol_spacing for k in range(spec.n_lines)]


def gram_matrix(spec: SequenceSpec, shifts=None, backend: str = "analytic", period=None, samples=None) -> np.ndarray:
    """Pairwise inner products of the delayed branches over one common period."""
    if shifts is None:
        shifts = branch_shifts(spec)
    if period is None:
        period = spec.common_period
    branches = [Branch(spec, s) for s in shifts]
    n = len(branches)
    g = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            g[i, j] = g[j, i] = inner_product(
                branches[i], branches[j], period, backend, samples
            )
    return g
