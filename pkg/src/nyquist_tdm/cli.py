"""``nyquist-tdm`` command line: CSV front end for every module.

Exit status: 0 on success, 1 when a BER sweep has unreliable points,
2 for invalid input, 3 when the trajectory solver diverges.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import fdonss, frac_calc, phase_delay, tdm_link
from .signal_core import Kind, SequenceSpec, TimeGrid, Waveform, raised_cosine, sample, write_csv

EXIT_UNRELIABLE = 1
EXIT_INPUT = 2
EXIT_DIVERGED = 3


class InputError(Exception):
    pass


def _sweep(start: float, stop: float, step: float) -> np.ndarray:
    """``start, start+step, ...`` up to and including ``stop`` (tolerant of round-off)."""
    if step <= 0:
        raise InputError("step must be positive")
    if stop < start:
        raise InputError("stop must not precede start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(count)


def _spec(kind: str, n: int, df: float) -> SequenceSpec:
    try:
        return SequenceSpec(n, df, Kind(kind))
    except ValueError as exc:
        raise InputError(f"invalid sequence for --kind {kind} --n {n}: {exc}") from exc


def _time_grid(args, spec: SequenceSpec | None = None, default_span: float | None = None) -> TimeGrid:
    if default_span is not None:
        span = default_span
    else:
        span = spec.common_period / 2 if spec is not None else 1.0
    t0 = -span if args.t_start is None else args.t_start
    t1 = span if args.t_end is None else args.t_end
    if not t1 > t0:
        raise InputError("--t-end must exceed --t-start")
    if args.samples < 2:
        raise InputError("--samples must be at least 2")
    return TimeGrid.from_span(t0, t1, args.samples)


# ---------------------------------------------------------------- gen

def cmd_gen(args) -> int:
    if args.trajectory and args.kind != "fdonss":
        raise InputError("--trajectory applies to --kind fdonss only")
    if args.kind == "raised-cosine":
        delta_t = args.delta_t if args.delta_t is not None else 1.0 / (args.n * args.df)
        grid = _time_grid(args, default_span=4 * delta_t)
        wave = Waveform(grid, raised_cosine(delta_t, args.rolloff, grid.times()))
    elif args.kind == "fdonss":
        if not args.trajectory:
            raise InputError("--kind fdonss needs --trajectory")
        spec = _spec("nss", args.n, args.df)
        if spec.n_lines % 2:
            raise InputError("--kind fdonss needs an even --n")
        traj = frac_calc.Trajectory.from_csv(args.trajectory)
        grid = _time_grid(args, spec)
        wave = Waveform(grid, fdonss.fdonss_eval(spec, traj, grid.times()))
    else:
        spec = _spec(args.kind, args.n, args.df)
        grid = _time_grid(args, spec)
        wave = sample(spec, grid, form=args.form)
    wave.to_csv(args.out)
    return 0


# ---------------------------------------------------------------- delay

def cmd_delay(args) -> int:
    spec = _spec(args.kind, args.n, args.df)
    if args.k is None:
        raise InputError("delay needs --k")
    try:
        t0 = phase_delay.branch_delay(spec, args.k)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    comb = phase_delay.apply_delay_as_phase(spec.comb(), t0)
    comb.to_csv(args.out_comb)
    if args.out_waveform:
        phase_delay.synthesize(comb, _time_grid(args, spec)).to_csv(args.out_waveform)
    if args.out_comb != "-":
        print(f"delay_s={t0!r}")
    return 0


# ---------------------------------------------------------------- ber

def cmd_ber(args) -> int:
    spec = _spec(args.kind, args.n, args.df)
    try:
        config = tdm_link.LinkConfig(
            spec,
            samples_per_interval=args.samples_per_interval,
            receiver=tdm_link.Receiver(args.receiver),
            n_bits=args.bits,
            seed=args.seed,
            noise=not args.noise_free,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    ebn0 = _sweep(args.ebn0_start, args.ebn0_stop, args.ebn0_step)
    points = tdm_link.ber_sweep(config, ebn0, workers=args.workers)
    tdm_link.write_ber_csv(args.out, points)
    bad = [p.ebn0_db for p in points if not p.reliable]
    if bad:
        print(
            f"unreliable: fewer than {tdm_link.MIN_ERRORS} errors at Eb/N0 = "
            + ", ".join(f"{e:g}" for e in bad) + " dB",
            file=sys.stderr,
        )
        return EXIT_UNRELIABLE
    return 0


def cmd_compare(args) -> int:
    first = tdm_link.read_ber_csv(args.first)
    second = tdm_link.read_ber_csv(args.second)
    try:
        cross = tdm_link.crossover(first, second)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    print("crossover_ebn0_db=" + (",".join(f"{c:.6g}" for c in cross) if cross else "none"))
    if args.from_db is not None:
        above = [(a, b) for a, b in zip(first, second) if a.ebn0_db >= args.from_db]
        ok = all(b.ber <= a.ber for a, b in above)
        print(f"second_le_first_from_{args.from_db:g}_db={'true' if ok else 'false'}")
    return 0


# ---------------------------------------------------------------- fracdim

def cmd_trajectory(args) -> int:
    # default window is centred on the sinc anchor, so its peak is a sample
    if args.t_start is None:
        args.t_start = frac_calc.SINC_ANCHOR - args.half_width
    if args.t_end is None:
        args.t_end = frac_calc.SINC_ANCHOR + args.half_width
    grid = _time_grid(args)
    frac_calc.sine_to_sinc_trajectory(grid, args.convention).to_csv(args.out)
    return 0


def cmd_dimtrans(args) -> int:
    if not args.window > 0:
        raise InputError("--window must be positive")
    alphas = _sweep(args.alpha_start, args.alpha_stop, args.alpha_step)
    tone = frac_calc.Tone(args.omega, args.amplitude, args.phase)
    spectrum = frac_calc.dimensional_transform(tone, alphas, args.window, tol=args.tol)
    spectrum.to_csv(args.out)
    if args.out != "-":
        meta = dict(spectrum.metadata(), omega=args.omega, amplitude=args.amplitude, phase=args.phase)
        with open(f"{args.out}.meta.json", "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def cmd_residual(args) -> int:
    if not args.half_width > 0:
        raise InputError("--half-width must be positive")
    n = int(round(2 * args.half_width * args.samples_per_unit)) + 1
    if n % 2 == 0:
        n += 1
    grid = TimeGrid.from_span(
        frac_calc.SINC_ANCHOR - args.half_width, frac_calc.SINC_ANCHOR + args.half_width, n
    )
    traj = frac_calc.sine_to_sinc_trajectory(grid, args.convention)
    value = frac_calc.sinc_orthogonality_residual(traj, args.i, args.half_width)
    write_csv(args.out, ("i", "half_width", "convention", "residual"),
              [(args.i, args.half_width, args.convention, value)])
    return 0


# ---------------------------------------------------------------- solve

def _parse_init(text: str, spec: SequenceSpec):
    if text == "zero":
        return 0.0
    if text.startswith("const:"):
        try:
            return float(text[len("const:"):])
        except ValueError as exc:
            raise InputError(f"bad --init {text!r}") from exc
    if text.startswith("file:"):
        return frac_calc.Trajectory.from_csv(text[len("file:"):])
    raise InputError("--init must be zero, const:<v> or file:<path>")


def cmd_solve(args) -> int:
    spec = _spec("nss", args.n, args.df)
    if spec.n_lines % 2:
        raise InputError("--n must be even")
    init = _parse_init(args.init, spec)
    try:
        result = fdonss.trajectory_solve(
            spec, fdonss.Target(args.target), init, knots=args.knots,
            max_iter=args.max_iter, tol=args.tol, weight=args.weight_21_22,
        )
    except fdonss.SolverDiverged as exc:
        exc.trajectory.to_csv(args.out_trajectory)
        if args.out_log:
            write_csv(args.out_log, ("iteration", "residual", "step_norm"), exc.history)
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    result.trajectory.to_csv(args.out_trajectory)
    if args.out_log:
        result.write_log(args.out_log)
    stream = sys.stderr if args.out_trajectory == "-" else sys.stdout
    print(
        f"residual={result.residual!r} iterations={len(result.history) - 1} stop={result.reason}",
        file=stream,
    )
    return 0


# ---------------------------------------------------------------- parser

def _add_span(p, samples=2001):
    p.add_argument("--t-start", type=float, default=None, help="seconds")
    p.add_argument("--t-end", type=float, default=None, help="seconds")
    p.add_argument("--samples", type=int, default=samples)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nyquist-tdm", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="flat key=value file mirroring long flags; flags win")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="sample a waveform")
    p.add_argument("--kind", choices=["nss", "cnss", "raised-cosine", "fdonss"], default="nss")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--df", type=float, default=10e9, help="line spacing in Hz")
    _add_span(p)
    p.add_argument("--trajectory", help="alpha(t) CSV (fdonss only)")
    p.add_argument("--form", choices=["fourier", "closed"], default="fourier", help="NSS evaluation form")
    p.add_argument("--delta-t", type=float, default=None, help="raised-cosine zero spacing (s)")
    p.add_argument("--rolloff", type=float, default=0.5)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("delay", help="delay a branch by per-line phase shifts")
    p.add_argument("--kind", choices=["nss", "cnss"], default="nss")
    p.add_argument("--n", type=int, default=7)
    p.add_argument("--df", type=float, default=10e9)
    p.add_argument("--k", type=int, default=None, help="branch index in [0, N-1] (required)")
    _add_span(p)
    p.add_argument("--out-comb", default="-")
    p.add_argument("--out-waveform")
    p.set_defaults(func=cmd_delay)

    p = sub.add_parser("ber", help="BER sweep over Eb/N0")
    p.add_argument("--kind", choices=["nss", "cnss"], default="nss")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--df", type=float, default=10e9)
    p.add_argument("--receiver", choices=["matched", "peak"], default="matched")
    p.add_argument("--ebn0-start", type=float, default=0.0)
    p.add_argument("--ebn0-stop", type=float, default=12.0)
    p.add_argument("--ebn0-step", type=float, default=1.0)
    p.add_argument("--bits", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples-per-interval", type=int, default=16)
    p.add_argument("--noise-free", action="store_true")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_ber)

    p = sub.add_parser("compare", help="crossover between two BER CSVs")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--from-db", type=float, default=None,
                   help="also report whether second <= first at every point from here up")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("fracdim", help="fractional-order tools")
    fsub = p.add_subparsers(dest="fracdim_command", required=True)
    q = fsub.add_parser("trajectory", help="sine-to-sinc order trajectory")
    q.add_argument("--convention", choices=["unnorm", "norm"], default="unnorm")
    q.add_argument("--half-width", type=float, default=20.0)
    _add_span(q, samples=4001)
    q.add_argument("--out", default="-")
    q.set_defaults(func=cmd_trajectory)
    q = fsub.add_parser("dimtrans", help="dimensional transform of a tone")
    q.add_argument("--omega", type=float, default=1.0)
    q.add_argument("--amplitude", type=float, default=1.0)
    q.add_argument("--phase", type=float, default=0.0)
    q.add_argument("--alpha-start", type=float, default=0.0)
    q.add_argument("--alpha-stop", type=float, default=1.5)
    q.add_argument("--alpha-step", type=float, default=0.1)
    q.add_argument("--window", type=float, default=2 * math.pi)
    q.add_argument("--tol", type=float, default=1e-11)
    q.add_argument("--out", default="-")
    q.set_defaults(func=cmd_dimtrans)
    q = fsub.add_parser("residual", help="sinc orthogonality residual")
    q.add_argument("--i", type=int, default=0)
    q.add_argument("--half-width", type=float, default=1000.0)
    q.add_argument("--convention", choices=["unnorm", "norm"], default="unnorm")
    q.add_argument("--samples-per-unit", type=int, default=20)
    q.add_argument("--out", default="-")
    q.set_defaults(func=cmd_residual)

    p = sub.add_parser("solve", help="search an FDONSS order trajectory")
    p.add_argument("--target", choices=["fdonss", "cfdonss"], default="fdonss")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--df", type=float, default=1.0)
    p.add_argument("--knots", type=int, default=8)
    p.add_argument("--init", default="zero")
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--weight-21-22", type=float, default=1.0)
    p.add_argument("--out-trajectory", default="-")
    p.add_argument("--out-log")
    p.set_defaults(func=cmd_solve)
    return parser


def _leaf_parser(parser, args):
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    leaf = sub.choices[args.command]
    if args.command == "fracdim":
        inner = next(a for a in leaf._actions if isinstance(a, argparse._SubParsersAction))
        leaf = inner.choices[args.fracdim_command]
    return leaf


def read_config(path) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


def _apply_config(parser, argv, args):
    """Re-parse with config values as defaults, so explicit flags still win."""
    leaf = _leaf_parser(parser, args)
    known = {a.dest: a for a in leaf._actions}
    defaults = {}
    for key, value in read_config(args.config).items():
        action = known.get(key)
        if action is None or key in ("help", "func"):
            raise InputError(f"unknown config key {key!r} for this command")
        if isinstance(action, argparse._StoreTrueAction):
            if value.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise InputError(f"config key {key!r} expects true/false")
            defaults[key] = value.lower() in ("true", "1", "yes")
        else:
            defaults[key] = value  # string defaults go through the action's type
    leaf.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args, _ = parser.parse_known_args(argv)
        if args.config:
            args = _apply_config(parser, argv, args)
        else:
            args = parser.parse_args(argv)
        return args.func(args)
    except (InputError, ValueError, OSError) as exc:
        print(f"nyquist-tdm: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
