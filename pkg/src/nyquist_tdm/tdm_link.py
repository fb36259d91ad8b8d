"""OOK over AWGN for an N-branch Nyquist OTDM link.

Each frame spans one common period of the branch waveform and carries one
bit per branch; branch k is the sequence delayed by ``k / (N df)``.  Frames
are simulated independently (the sequences are exactly periodic, so there is
no inter-frame interference to model).

Noise bookkeeping: ``Eb`` is the energy of one noiseless one-bit branch
waveform over a frame (``dt * sum(s**2)``), ``N0 = Eb / 10**(EbN0_dB / 10)``
and every sample receives white Gaussian noise of variance ``N0 / (2 dt)``.
"""

from __future__ import annotations

import csv
import enum
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import erfc, ndtr

from . import kernels
from .signal_core import Kind, SequenceSpec, TimeGrid, Waveform, evaluate, write_csv

PRBS_DEGREE = 13
# x^13 + x^4 + x^3 + x + 1, Galois (right-shift) form
PRBS_MASK = (1 << 12) | (1 << 3) | (1 << 2) | 1
PRBS_PERIOD = (1 << PRBS_DEGREE) - 1

MIN_ERRORS = 10
_CHUNK_SAMPLES = 1 << 22


class Receiver(str, enum.Enum):
    MATCHED = "matched"
    PEAK = "peak"


@dataclass
class PrbsState:
    register: int = 1
    mask: int = PRBS_MASK
    degree: int = PRBS_DEGREE

    def __post_init__(self):
        if not 0 < self.register < (1 << self.degree):
            raise ValueError(
                f"register must be a nonzero {self.degree}-bit value, got {self.register}"
            )


def prbs_bits(state: PrbsState, count: int) -> np.ndarray:
    """Next ``count`` PRBS bits; advances ``state`` in place."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if state.register == 0:
        raise ValueError("all-zero LFSR register never leaves zero")
    bits, state.register = kernels.lfsr_fill(state.register, state.mask, int(count))
    return bits


@dataclass(frozen=True)
class BerPoint:
    ebn0_db: float
    bits: int
    errors: int
    ber: float
    reliable: bool = True


@dataclass(frozen=True)
class LinkConfig:
    spec: SequenceSpec
    samples_per_interval: int = 16
    receiver: Receiver = Receiver.MATCHED
    ebn0_db: float = 10.0
    n_bits: int = 8192
    seed: int = 0
    noise: bool = True

    def __post_init__(self):
        object.__setattr__(self, "receiver", Receiver(self.receiver))
        if self.samples_per_interval < 16:
            raise ValueError("samples_per_interval must be >= 16")
        if self.n_bits < 1:
            raise ValueError("n_bits must be positive")

    @property
    def intervals_per_frame(self) -> int:
        return 2 if self.spec.half_integer else 1

    def frame_grid(self) -> TimeGrid:
        return TimeGrid.periodic(
            self.spec.common_period, self.samples_per_interval * self.intervals_per_frame
        )


def frame_grid(spec: SequenceSpec, samples_per_interval: int = 16) -> TimeGrid:
    per = 2 if spec.half_integer else 1
    return TimeGrid.periodic(spec.common_period, samples_per_interval * per)


def branch_templates(spec: SequenceSpec, grid: TimeGrid) -> np.ndarray:
    """Rows: branch k waveform ``s(t - k/(N df))`` sampled on ``grid``."""
    t = grid.times()
    return np.stack(
        [evaluate(spec, t - k * spec.symbol_spacing, "fourier") for k in range(spec.n_lines)]
    )


def modulate_frame(bits, spec: SequenceSpec, grid: TimeGrid) -> Waveform:
    bits = np.asarray(bits)
    if bits.shape != (spec.n_lines,):
        raise ValueError(f"a frame carries exactly {spec.n_lines} bits")
    return Waveform(grid, bits.astype(np.float64) @ branch_templates(spec, grid))


def noise_sigma(ebn0_db: float, eb: float, dt: float) -> float:
    if not eb > 0:
        raise ValueError("eb must be positive")
    if math.isinf(ebn0_db) and ebn0_db > 0:
        return 0.0
    n0 = eb / 10.0 ** (ebn0_db / 10.0)
    return math.sqrt(n0 / (2.0 * dt))


def awgn(signal: Waveform, ebn0_db: float, eb: float, rng: np.random.Generator | None) -> Waveform:
    """Add white Gaussian noise; ``ebn0_db = +inf`` or ``rng=None`` leaves the signal unchanged."""
    sigma = noise_sigma(ebn0_db, eb, signal.grid.dt)
    if sigma == 0.0 or rng is None:
        return signal
    return Waveform(
        signal.grid, signal.samples + sigma * rng.standard_normal(signal.grid.n_samples)
    )


def peak_times(spec: SequenceSpec) -> np.ndarray:
    """Locations of the branch waveform's global maxima within ``[0, 1/df)``."""
    if spec.kind is Kind.NSS:
        return np.array([0.0])
    unit = SequenceSpec(spec.n_lines, 1.0, spec.kind)
    x = np.linspace(0.0, 1.0, 4096, endpoint=False)
    y = evaluate(unit, x)
    idx = np.flatnonzero((y >= np.roll(y, 1)) & (y >= np.roll(y, -1)))
    idx = idx[y[idx] > y.max() - 1e-2]
    found = []
    for i in idx:
        res = minimize_scalar(
            lambda u: -evaluate(unit, u),
            bounds=(x[i] - 1 / 4096, x[i] + 1 / 4096),
            method="bounded",
            options={"xatol": 1e-13},
        )
        found.append((res.x % 1.0, -res.fun))
    top = max(v for _, v in found)
    keep = sorted(u for u, v in found if v > top - 1e-9)
    uniq = [keep[0]] + [u for a, u in zip(keep, keep[1:]) if u - a > 1e-6]
    return np.array(uniq) / spec.delta_f


@dataclass(frozen=True, eq=False)
class _Receiver:
    """Frame-level decision weights and thresholds."""

    weights: np.ndarray
    thresholds: np.ndarray
    templates: np.ndarray
    grid: TimeGrid
    eb: float


def _nearest_index(grid: TimeGrid, t: float, period: float) -> int:
    pos = ((t - grid.t_start) % period) / grid.dt
    idx = int(round(pos)) % grid.n_samples
    gap = abs(((idx * grid.dt + grid.t_start - t) + period / 2) % period - period / 2)
    if gap > grid.dt / 2 * (1 + 1e-9):
        raise ValueError(f"grid has no sample within dt/2 of peak time {t!r}")
    return idx


def build_receiver(spec: SequenceSpec, grid: TimeGrid, receiver: Receiver) -> _Receiver:
    period = spec.common_period
    if abs(grid.n_samples * grid.dt - period) > 1e-9 * period:
        raise ValueError("receiver grid must cover exactly one common period")
    templates = branch_templates(spec, grid)
    eb = grid.dt * float(np.sum(templates[0] ** 2))
    receiver = Receiver(receiver)
    if receiver is Receiver.MATCHED:
        weights = templates * grid.dt
    else:
        weights = np.zeros_like(templates)
        peaks = peak_times(spec)
        for k in range(spec.n_lines):
            for tp in peaks:
                weights[k, _nearest_index(grid, k * spec.symbol_spacing + tp, period)] += 1.0
    clean = np.einsum("ks,ks->k", templates, weights)
    return _Receiver(weights, 0.5 * clean, templates, grid, eb)


def receive_frame(rx: Waveform, spec: SequenceSpec, receiver: Receiver | str) -> np.ndarray:
    rcv = build_receiver(spec, rx.grid, Receiver(receiver))
    stats = rcv.weights @ rx.samples
    return (stats > rcv.thresholds).astype(np.uint8)


def ook_matched_ber(ebn0_db):
    """Matched-filter OOK BER with midpoint threshold, Eb = one-bit energy: Q(sqrt(Eb / 2N0))."""
    g = 10.0 ** (np.asarray(ebn0_db, dtype=np.float64) / 10.0)
    return 0.5 * erfc(np.sqrt(g) / 2.0)


def peak_ber_exact(spec: SequenceSpec, samples_per_interval: int, ebn0_db: float) -> float:
    """Expected BER of the PEAK receiver, averaged over every frame bit pattern.

    Gaussian tail probabilities replace Monte-Carlo counting, so interference
    between branches is accounted for exactly.  Cost grows as ``2**N``.
    """
    grid = frame_grid(spec, samples_per_interval)
    rcv = build_receiver(spec, grid, Receiver.PEAK)
    sigma = noise_sigma(ebn0_db, rcv.eb, grid.dt)
    patterns = np.array(list(itertools.product((0.0, 1.0), repeat=spec.n_lines)))
    stats = patterns @ rcv.templates @ rcv.weights.T
    margin = stats - rcv.thresholds
    if sigma == 0.0:
        wrong = np.where(patterns == 1, margin <= 0, margin > 0)
        return float(wrong.mean())
    sd = sigma * np.sqrt(np.sum(rcv.weights**2, axis=1))
    z = margin / sd
    pe = np.where(patterns == 1, ndtr(-z), ndtr(z))
    return float(pe.mean())


def _point_rng(seed: int, index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed) & ((1 << 64) - 1), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(ss))


def initial_register(seed: int) -> int:
    return int(seed) % PRBS_PERIOD + 1


def data_bits(config: LinkConfig) -> np.ndarray:
    """PRBS payload arranged as frames x branches; a short last frame is zero-padded."""
    n = config.spec.n_lines
    bits = prbs_bits(PrbsState(initial_register(config.seed)), config.n_bits)
    pad = -config.n_bits % n
    if pad:
        bits = np.concatenate([bits, np.zeros(pad, dtype=bits.dtype)])
    return bits.reshape(-1, n)


def simulate_statistics(config: LinkConfig, ebn0_db: float, frames: np.ndarray, index: int = 0):
    """Decision statistics for ``frames`` (frames x branches) at one Eb/N0.

    Returns ``(stats, thresholds)``.  Noise is drawn from the stream keyed by
    ``(config.seed, index)`` in fixed-size chunks, so the result does not
    depend on how points are scheduled.
    """
    grid = config.frame_grid()
    rcv = build_receiver(config.spec, grid, config.receiver)
    frames = np.ascontiguousarray(frames, dtype=np.uint8)
    sigma = noise_sigma(ebn0_db, rcv.eb, grid.dt) if config.noise else 0.0
    rng = _point_rng(config.seed, index)
    chunk = max(1, _CHUNK_SAMPLES // grid.n_samples)
    out = np.empty((frames.shape[0], config.spec.n_lines))
    for start in range(0, frames.shape[0], chunk):
        block = frames[start : start + chunk]
        if sigma:
            noise = rng.standard_normal((block.shape[0], grid.n_samples))
            noise *= sigma
        else:
            noise = np.zeros((block.shape[0], grid.n_samples))
        out[start : start + block.shape[0]] = kernels.frame_statistics(
            block, rcv.templates, noise, rcv.weights
        )
    return out, rcv.thresholds


def _ber_point(config: LinkConfig, frames: np.ndarray, ebn0_db: float, index: int) -> BerPoint:
    stats, thr = simulate_statistics(config, ebn0_db, frames, index)
    bits = config.n_bits
    wrong = ((stats > thr) != frames.astype(bool)).ravel()[:bits]
    errors = int(np.count_nonzero(wrong))
    reliable = (not config.noise) or errors >= MIN_ERRORS
    return BerPoint(float(ebn0_db), bits, errors, errors / bits, reliable)


def ber_sweep(config: LinkConfig, ebn0_list, workers: int = 1) -> list[BerPoint]:
    """BER at each Eb/N0, in input order; deterministic for any ``workers``."""
    frames = data_bits(config)
    ebn0_list = [float(e) for e in ebn0_list]
    if workers <= 1:
        return [_ber_point(config, frames, e, i) for i, e in enumerate(ebn0_list)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(
            pool.map(lambda ie: _ber_point(config, frames, ie[1], ie[0]), enumerate(ebn0_list))
        )


def binomial_sigma(ber: float, bits: int) -> float:
    return math.sqrt(max(ber * (1 - ber), 0.0) / bits)


def crossover(first: list[BerPoint], second: list[BerPoint]) -> list[float]:
    """Eb/N0 values where ``second`` moves from above to below ``first`` (or back).

    Crossings are located by linear interpolation of the BER difference.
    """
    if [p.ebn0_db for p in first] != [p.ebn0_db for p in second]:
        raise ValueError("sweeps must share their Eb/N0 axis")
    x = np.array([p.ebn0_db for p in first])
    d = np.array([b.ber - a.ber for a, b in zip(first, second)])
    out = []
    for i in range(len(d) - 1):
        if d[i] == 0 or np.sign(d[i]) == np.sign(d[i + 1]):
            continue
        if d[i + 1] == 0:
            out.append(float(x[i + 1]))
            continue
        out.append(float(x[i] + (x[i + 1] - x[i]) * d[i] / (d[i] - d[i + 1])))
    return out


BER_HEADER = ("ebn0_db", "bits", "errors", "ber")


def write_ber_csv(path, points, reliable_column: bool = True) -> None:
    header = BER_HEADER + (("reliable",) if reliable_column else ())
    rows = (
        (p.ebn0_db, p.bits, p.errors, p.ber) + ((p.reliable,) if reliable_column else ())
        for p in points
    )
    write_csv(path, header, rows)


def read_ber_csv(path) -> list[BerPoint]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        BerPoint(
            float(r["ebn0_db"]),
            int(r["bits"]),
            int(r["errors"]),
            float(r["ber"]),
            r.get("reliable", "true") == "true",
        )
        for r in rows
    ]
