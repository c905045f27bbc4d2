"""Command-line front end. Every command writes CSV or MTSK files for external plotting."""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import analysis, config, iqfile, pipeline
from .baselines import BaselineKind, BaselineSpec
from .demodulator import demodulate
from .modulator import random_frame

EXIT_OK, EXIT_CHECK_FAILED, EXIT_ERROR = 0, 1, 2
DEFAULT_MASK = Path(__file__).with_name("data") / "example_100mhz_mask.txt"


def _load(args):
    run = config.load(args.config) if args.config else config.RunConfig()
    if getattr(args, "seed", None) is not None:
        run.system.seed = args.seed
    return run, run.system_config()


def _out_dir(args, run) -> Path:
    out = Path(args.out or run.output.dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write(path: Path, text: str) -> None:
    path.write_text(text)
    print(f"wrote {path}")


def _signal(args, run, cfg):
    """Signal to analyze: an MTSK file if given, else a fresh synthesis."""
    if getattr(args, "input", None):
        return iqfile.read(args.input), None
    result = pipeline.synth(cfg, run.system.n_symbols)
    return result.aggregate, result


def cmd_synth(args) -> int:
    run, cfg = _load(args)
    out = _out_dir(args, run)
    per_antenna = args.per_antenna or run.output.per_antenna
    for line in pipeline.format_parameters(pipeline.derived_parameters(cfg)):
        print(line)
    result = pipeline.synth(cfg, run.system.n_symbols, per_antenna=per_antenna)
    iqfile.write(out / "aggregate.mtsk", result.aggregate)
    print(f"wrote {out / 'aggregate.mtsk'}")
    if per_antenna:
        for n, sig in enumerate(result.per_antenna):
            iqfile.write(out / f"antenna_{n:03d}.mtsk", sig)
        print(f"wrote {len(result.per_antenna)} per-antenna files")
    _write(out / "omega.csv", pipeline.rows_to_csv(pipeline.omega_rows(result.system)))
    sym = result.frame.symbols
    _write(out / "symbols.csv", pipeline.columns_to_csv({f"sc{n}": sym[n] for n in range(sym.shape[0])}))
    return EXIT_OK


def cmd_demod(args) -> int:
    run, cfg = _load(args)
    sig = iqfile.read(args.input)
    if not math.isclose(sig.sample_rate_hz, cfg.sample_rate_hz, rel_tol=1e-9):
        raise ValueError(f"file sample rate {sig.sample_rate_hz:g} Hz != configured {cfg.sample_rate_hz:g} Hz")
    frame = random_frame(cfg, len(sig) // cfg.samples_per_symbol)
    report = demodulate(sig, cfg, frame)
    print(f"SIR (coherent bins):      {report.sir_db:.2f} dB")
    print(f"SIR (differential):       {report.sir_differential_db:.2f} dB")
    print(f"SIR (mean of ratios):     {report.sir_mean_of_ratios_db:.2f} dB")
    print(f"symbol errors:            {report.symbol_errors}")
    print(f"combining gain:           {report.combining_gain_db:.2f} dB")
    errors = np.count_nonzero(report.decisions[:, 1:] != np.mod(np.diff(frame.symbols, axis=1), cfg.psk_order), axis=1)
    rows = [
        {"subcarrier": n, "freq_hz": float(f), "sir_db": float(report.per_subcarrier_sir_db[n]),
         "symbol_errors": int(errors[n])}
        for n, f in enumerate(cfg.subcarrier_freqs_hz())
    ]
    out = Path(args.out) if args.out else None
    text = pipeline.rows_to_csv(rows)
    if out:
        out.parent.mkdir(parents=True, exist_ok=True)
        _write(out, text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_sir_sweep(args) -> int:
    run, cfg = _load(args)
    if args.t_max < args.t_min:
        raise ValueError("--t-max must be >= --t-min")
    n_symbols = args.symbols or run.system.n_symbols
    rows = pipeline.sir_sweep(cfg, range(args.t_min, args.t_max + 1), n_symbols)
    text = pipeline.rows_to_csv(rows)
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_psd(args) -> int:
    run, cfg = _load(args)
    out = _out_dir(args, run)
    sig, result = _signal(args, run, cfg)
    est = pipeline.estimate_psd(run, cfg, sig)
    cols = {"freq_hz": est.freqs_hz, "aggregate_db_inband": est.psd_db_inband, "aggregate_db_peak": est.psd_db_peak}
    if args.antennas:
        if result is None:
            raise ValueError("--antennas needs a synthesized run, not --input")
        for n, s in pipeline.antenna_signals(result, args.antennas).items():
            cols[f"antenna_{n}_db_inband"] = pipeline.estimate_psd(run, cfg, s).psd_db_inband
    _write(out / "psd.csv", pipeline.columns_to_csv(cols))
    return EXIT_OK


def cmd_instfreq(args) -> int:
    run, cfg = _load(args)
    out = _out_dir(args, run)
    result = pipeline.synth(cfg, run.system.n_symbols)
    n_samples = int(round(args.symbols * cfg.samples_per_symbol))
    start = cfg.samples_per_symbol  # skip the reference symbol
    antennas = pipeline.antenna_signals(result, range(cfg.n_subcarriers))
    cols = {"time_s": (np.arange(n_samples) + start + 0.5) / cfg.sample_rate_hz}
    for n, sig in antennas.items():
        cols[f"sc{n}"] = analysis.instantaneous_frequency(sig)[start : start + n_samples]
    _write(out / "instfreq.csv", pipeline.columns_to_csv(cols))
    return EXIT_OK


def cmd_omega(args) -> int:
    run, cfg = _load(args)
    system = pipeline.build_system(cfg)
    text = pipeline.rows_to_csv(pipeline.omega_rows(system))
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    print(f"residual excursion beyond the subcarrier grid: {system.omega.residual_hz:g} Hz", file=sys.stderr)
    return EXIT_OK


def cmd_baseline(args) -> int:
    spec = BaselineSpec(
        kind=args.kind,
        bt=args.bt,
        rolloff=args.rolloff,
        repetition=args.repetition,
        repeated_shift=args.repeated_shift,
        psk_order=args.psk_order,
    )
    seed = 1 if args.seed is None else args.seed
    sig = pipeline.baseline_signal(spec, args.symbols, 1.0 / args.symbol_rate, args.oversampling, seed)
    est = analysis.welch_psd(sig, min(args.segment_symbols * args.oversampling * spec.repetition, len(sig)))
    text = pipeline.columns_to_csv({"freq_hz": est.freqs_hz, "psd_db_peak": est.psd_db_peak})
    if args.out:
        _write(Path(args.out), text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_mask_check(args) -> int:
    run, cfg = _load(args)
    mask_path = args.mask or run.mask.path or DEFAULT_MASK
    mask = analysis.SpectralMask.from_file(mask_path)
    sig, _ = _signal(args, run, cfg)
    report = analysis.mask_check(pipeline.estimate_psd(run, cfg, sig), mask)
    verdict = "PASS" if report.passed else "FAIL"
    print(f"mask {mask_path}: {verdict}, worst margin {report.worst_margin_db:.2f} dB "
          f"at {report.worst_freq_hz / 1e6:.3f} MHz")
    if not report.passed:
        for f in report.offending_freqs_hz[:20]:
            print(f"  violation at {f / 1e6:.3f} MHz")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("matisk.api:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="matisk", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", help="INI run configuration")
        sp.add_argument("--seed", type=int, help="override the configured seed")
        sp.set_defaults(func=func)
        return sp

    sp = add("synth", cmd_synth, "synthesize a frame and write MTSK files")
    sp.add_argument("--out", help="output directory")
    sp.add_argument("--per-antenna", action="store_true", help="also write one file per antenna")

    sp = add("demod", cmd_demod, "demodulate an MTSK file and report SIR")
    sp.add_argument("--in", dest="input", required=True)
    sp.add_argument("--out", help="per-subcarrier CSV report")

    sp = add("sir-sweep", cmd_sir_sweep, "noiseless SIR versus repetition T")
    sp.add_argument("--t-min", type=int, default=64)
    sp.add_argument("--t-max", type=int, default=73)
    sp.add_argument("--symbols", type=int, help="symbols per run (default from config)")
    sp.add_argument("--out")

    sp = add("psd", cmd_psd, "Welch PSD of the aggregate and selected antennas")
    sp.add_argument("--in", dest="input")
    sp.add_argument("--antennas", type=lambda s: [int(x) for x in s.split(",") if x], default=[])
    sp.add_argument("--out", help="output directory")

    sp = add("instfreq", cmd_instfreq, "instantaneous frequency of every antenna")
    sp.add_argument("--symbols", type=float, default=1.25, help="symbol periods to emit")
    sp.add_argument("--out", help="output directory")

    sp = add("omega", cmd_omega, "per-subcarrier shift vectors")
    sp.add_argument("--out")

    sp = add("mask-check", cmd_mask_check, "check the aggregate PSD against a spectral mask")
    sp.add_argument("--in", dest="input")
    sp.add_argument("--mask", help="mask file with 'offset_hz limit_db' lines")

    sp = sub.add_parser("baseline", help="PSD of a single-carrier reference waveform")
    sp.add_argument("--kind", choices=[k.value for k in BaselineKind], required=True)
    sp.add_argument("--bt", type=float, default=0.3)
    sp.add_argument("--rolloff", type=float, default=0.22)
    sp.add_argument("--repetition", type=int, default=1)
    sp.add_argument("--repeated-shift", type=float)
    sp.add_argument("--psk-order", type=int, default=2)
    sp.add_argument("--symbols", type=int, default=4096)
    sp.add_argument("--symbol-rate", type=float, default=1.0)
    sp.add_argument("--oversampling", type=int, default=16)
    sp.add_argument("--segment-symbols", type=int, default=64)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_baseline)

    sp = sub.add_parser("serve", help="run the HTTP service")
    sp.add_argument("--host", default="127.0.0.1")
    sp.add_argument("--port", type=int, default=8000)
    sp.set_defaults(func=cmd_serve)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        msg = " ".join(str(exc).split())
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
