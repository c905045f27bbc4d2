"""End-to-end runs shared by the CLI and the HTTP service."""

from __future__ import annotations

import io
import csv
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from . import analysis
from .baselines import BaselineKind, BaselineSpec, gmsk_waveform, rrc_psk_waveform
from .config import RunConfig
from .core import FrequencyPulse, IqSignal, SystemConfig, make_pulse
from .demodulator import DemodReport, combining_gain, demodulate
from .inband import OmegaAssignment, choose_omega
from .modulator import SubcarrierPlan, SymbolFrame, iter_antennas, make_plans, modulate_frame, random_frame


@dataclass(frozen=True, eq=False)
class System:
    cfg: SystemConfig
    pulse: FrequencyPulse
    omega: OmegaAssignment
    plans: List[SubcarrierPlan]


@dataclass(frozen=True, eq=False)
class SynthResult:
    system: System
    frame: SymbolFrame
    aggregate: IqSignal
    per_antenna: Optional[List[IqSignal]]


def build_system(cfg: SystemConfig) -> System:
    pulse = make_pulse(cfg.pulse_spec, cfg.chip_period_s, cfg.oversampling)
    omega = choose_omega(cfg, pulse)
    return System(cfg=cfg, pulse=pulse, omega=omega, plans=make_plans(cfg, omega.omegas))


def synth(cfg: SystemConfig, n_symbols: int, per_antenna: bool = False) -> SynthResult:
    system = build_system(cfg)
    frame = random_frame(cfg, n_symbols)
    antennas, aggregate = modulate_frame(frame, system.plans, system.pulse, cfg, keep_per_antenna=per_antenna)
    return SynthResult(system=system, frame=frame, aggregate=aggregate, per_antenna=antennas)


def antenna_signals(result: SynthResult, indices: Iterable[int]) -> Dict[int, IqSignal]:
    """Selected per-antenna signals, regenerated if the run did not keep them."""
    wanted = sorted(set(indices))
    if result.per_antenna is not None:
        return {n: result.per_antenna[n] for n in wanted}
    sys_ = result.system
    out = {}
    for n, sig in enumerate(iter_antennas(result.frame, sys_.plans, sys_.pulse, sys_.cfg)):
        if n in wanted:
            out[n] = sig
    return out


def derived_parameters(cfg: SystemConfig) -> Dict[str, float]:
    return {
        "chip_period_s": cfg.chip_period_s,
        "sample_rate_hz": cfg.sample_rate_hz,
        "subcarrier_spacing_hz": cfg.subcarrier_spacing_hz,
        "symbol_period_s": cfg.symbol_period_s,
        "symbol_rate_hz": 1.0 / cfg.symbol_period_s,
        "pulse_duration_s": cfg.pulse_duration_s,
        "occupied_bandwidth_hz": cfg.n_subcarriers * cfg.subcarrier_spacing_hz,
        "data_rate_bps": cfg.data_rate_bps,
        "combining_gain_db": combining_gain(cfg),
    }


def format_parameters(params: Dict[str, float]) -> List[str]:
    return [
        f"chip period:        {params['chip_period_s'] * 1e9:.2f} ns",
        f"subcarrier spacing: {params['subcarrier_spacing_hz'] / 1e6:.2f} MHz",
        f"symbol period:      {params['symbol_period_s'] * 1e9:.0f} ns",
        f"pulse duration:     {params['pulse_duration_s'] * 1e9:.1f} ns",
        f"occupied bandwidth: {params['occupied_bandwidth_hz'] / 1e6:.1f} MHz",
        f"data rate:          {params['data_rate_bps'] / 1e6:.0f} Mbit/s",
        f"combining gain:     {params['combining_gain_db']:.2f} dB",
    ]


def loopback(cfg: SystemConfig, n_symbols: int) -> DemodReport:
    result = synth(cfg, n_symbols)
    return demodulate(result.aggregate, cfg, result.frame)


def sir_sweep(cfg: SystemConfig, t_values: Sequence[int], n_symbols: int) -> List[Dict[str, float]]:
    """Noiseless loopback per T, holding the symbol period fixed."""
    rows = []
    for t in t_values:
        report = loopback(cfg.with_repetition(t), n_symbols)
        rows.append(
            {
                "T": t,
                "sir_db": report.sir_db,
                "sir_differential_db": report.sir_differential_db,
                "sir_mean_of_ratios_db": report.sir_mean_of_ratios_db,
                "symbol_errors": report.symbol_errors,
            }
        )
    return rows


def psd_segment(run: RunConfig, cfg: SystemConfig, sig: IqSignal) -> int:
    return min(run.psd.segment_symbols * cfg.samples_per_symbol, len(sig))


def estimate_psd(run: RunConfig, cfg: SystemConfig, sig: IqSignal) -> analysis.PsdEstimate:
    band = cfg.n_subcarriers * cfg.subcarrier_spacing_hz
    return analysis.welch_psd(sig, psd_segment(run, cfg, sig), run.psd.overlap, run.psd.window, inband_hz=band)


def baseline_signal(spec: BaselineSpec, n_symbols: int, symbol_period_s: float, oversampling: int,
                    seed: int) -> IqSignal:
    rng = np.random.default_rng(seed)
    if spec.kind is BaselineKind.LINEAR_PSK_RRC:
        return rrc_psk_waveform(spec, rng.integers(0, spec.psk_order, n_symbols), symbol_period_s, oversampling)
    order = 4 if spec.kind is BaselineKind.GMSK_QUATERNARY else spec.psk_order
    chip = symbol_period_s / spec.repetition
    return gmsk_waveform(spec, rng.integers(0, order, n_symbols), chip, oversampling)


def omega_rows(system: System) -> List[Dict[str, float]]:
    om = system.omega
    rows = []
    for n in range(len(om.center_freqs_hz)):
        row = {"subcarrier": n, "freq_hz": float(om.center_freqs_hz[n])}
        row.update({f"omega_{m + 1}": int(w) for m, w in enumerate(om.omegas[n])})
        row.update({f"shift_{m}": float(s) for m, s in enumerate(om.shifts[n])})
        row["peak_deviation_hz"] = float(om.peak_deviation_hz[n])
        rows.append(row)
    return rows


def rows_to_csv(rows: Sequence[Dict[str, object]]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue()


def columns_to_csv(columns: Dict[str, np.ndarray]) -> str:
    names = list(columns)
    data = np.column_stack([np.asarray(columns[k], dtype=float) for k in names])
    buf = io.StringIO()
    buf.write(",".join(names) + "\n")
    np.savetxt(buf, data, delimiter=",", fmt="%.10g")
    return buf.getvalue()
