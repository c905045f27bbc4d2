"""Acceptance criteria, one test each. Every test prints a single PASS/FAIL line.

Run directly with ``python tests/test_acceptance.py`` or through pytest.
"""

import functools
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from matisk.analysis import (
    SpectralMask,
    deviation_ratio,
    instantaneous_frequency,
    mask_check,
    shoulder_bandwidth,
    sideband_power_ratio_db,
    welch_psd,
)
from matisk.baselines import BaselineSpec
from matisk.cli import DEFAULT_MASK
from matisk.config import RunConfig
from matisk.core import PulseSpec, SystemConfig, make_pulse
from matisk.demodulator import combining_gain, fft_window_demod, sample_chips
from matisk.modulator import build_increments, differential_precode, iter_antennas, make_plans, synthesize
from matisk.pipeline import (
    antenna_signals,
    baseline_signal,
    build_system,
    derived_parameters,
    estimate_psd,
    format_parameters,
    loopback,
    sir_sweep,
    synth,
)


def criterion(number, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            try:
                detail = fn(*args, **kwargs)
            except AssertionError as exc:
                line = f"criterion {number:2d} FAIL  {title}: {str(exc).splitlines()[0] if str(exc) else 'assertion'}"
                ACCEPTANCE_LINES.append(line)
                print(line)
                raise
            line = f"criterion {number:2d} PASS  {title}" + (f" ({detail})" if detail else "")
            ACCEPTANCE_LINES.append(line)
            print(line)

        return run

    return wrap


@pytest.fixture(scope="module")
def ref_cfg():
    # N=64, T=70, M=4, BT=0.1, L=8, O=16, 1.25 Msym/s
    return SystemConfig(pulse_spec=PulseSpec(bt_product=0.1, truncation_chips=8), seed=1)


@pytest.fixture(scope="module")
def ref_run(ref_cfg):
    return synth(ref_cfg, 100)


@criterion(1, "SIR sweep over T=64..73 is monotone and matches the reference table")
def test_sir_table(ref_cfg):
    start = time.perf_counter()
    rows = sir_sweep(ref_cfg, range(64, 74), 500)
    elapsed = time.perf_counter() - start
    sir = {r["T"]: r["sir_db"] for r in rows}
    values = [sir[t] for t in range(64, 74)]
    assert all(a < b for a, b in zip(values, values[1:])), f"not strictly increasing: {np.round(values, 2)}"
    assert abs(sir[64] - 8.1) <= 2, f"T=64 gives {sir[64]:.2f} dB"
    assert abs(sir[70] - 34.4) <= 3, f"T=70 gives {sir[70]:.2f} dB"
    assert abs(sir[72] - 72) <= 6, f"T=72 gives {sir[72]:.2f} dB"
    assert elapsed < 120, f"sweep took {elapsed:.1f} s"
    return f"64: {sir[64]:.1f}, 70: {sir[70]:.1f}, 72: {sir[72]:.1f} dB in {elapsed:.0f} s"


@criterion(2, "combining gain for N=64 is 10 log10 64")
def test_combining_gain(ref_cfg):
    gain = combining_gain(ref_cfg)
    assert gain == 10 * math.log10(64)
    assert abs(gain - 18.1) <= 0.1
    return f"{gain:.2f} dB"


@criterion(3, "derived parameters print as 800 ns, 1.37 MHz, 91.4 ns, 160 Mbit/s")
def test_derived_parameters(ref_cfg):
    text = "\n".join(format_parameters(derived_parameters(ref_cfg)))
    for expected in ("symbol period:      800 ns", "subcarrier spacing: 1.37 MHz",
                     "pulse duration:     91.4 ns", "data rate:          160 Mbit/s"):
        assert expected in text, f"missing {expected!r}"
    assert abs(ref_cfg.subcarrier_spacing_hz / 1e6 - 1.37) <= 0.005


@criterion(4, "noiseless round trip has no symbol errors when T - N >= L")
def test_round_trip(ref_cfg):
    cfg = ref_cfg.with_repetition(72)
    report = loopback(cfg, 200)
    n_sym = cfg.n_subcarriers * 199
    assert n_sym >= 10_000
    assert report.symbol_errors == 0, f"{report.symbol_errors} errors"
    return f"{n_sym} symbols"


@criterion(5, "every antenna has unit envelope within 1e-12")
def test_constant_envelope(ref_cfg, ref_run):
    system = ref_run.system
    worst = 0.0
    for sig in iter_antennas(ref_run.frame, system.plans, system.pulse, ref_cfg):
        worst = max(worst, float(np.max(np.abs(np.abs(sig.samples) - 1))))
    assert worst < 1e-12, f"deviation {worst:.3g}"
    return f"max deviation {worst:.1e}"


@criterion(6, "instantaneous frequency stays within the subcarrier grid plus residual")
def test_inband(ref_cfg, ref_run):
    system = ref_run.system
    f = ref_cfg.subcarrier_freqs_hz()
    # first-difference estimator carries ~1e-12 relative rounding noise
    tol = system.omega.residual_hz + 1e-9 * ref_cfg.sample_rate_hz
    lo, hi = np.inf, -np.inf
    for sig in iter_antennas(ref_run.frame, system.plans, system.pulse, ref_cfg):
        inst = instantaneous_frequency(sig)
        lo, hi = min(lo, inst.min()), max(hi, inst.max())
    assert lo >= f.min() - tol, f"min {lo:.6g} Hz below {f.min():.6g} Hz"
    assert hi <= f.max() + tol, f"max {hi:.6g} Hz above {f.max():.6g} Hz"
    return f"excursion beyond grid {max(f.min() - lo, hi - f.max(), 0):.1e} Hz"


@criterion(7, "edge subcarrier spectra lean inward, center subcarrier is asymmetric")
def test_asymmetry(ref_cfg, ref_run):
    run = RunConfig()
    spacing = ref_cfg.subcarrier_spacing_hz
    sigs = antenna_signals(ref_run, [0, 32, 63])
    ratios = {}
    for n, sig in sigs.items():
        psd = estimate_psd(run, ref_cfg, sig)
        # sidelobes counted from 3 subcarrier spacings away, clear of the main lobe
        ratios[n] = sideband_power_ratio_db(psd, ref_cfg.subcarrier_freqs_hz()[n], 3 * spacing)
    assert ratios[0] >= 10, f"leftmost upper/lower {ratios[0]:.1f} dB"
    assert ratios[63] <= -10, f"rightmost upper/lower {ratios[63]:.1f} dB"
    assert abs(ratios[32]) >= 3, f"center upper/lower {ratios[32]:.1f} dB"
    return ", ".join(f"n={n}: {r:+.1f} dB" for n, r in ratios.items())


@criterion(8, "omega is all-zero at the leftmost and all-one at the rightmost subcarrier")
def test_omega_edges(ref_cfg):
    om = build_system(ref_cfg).omega.omegas
    assert om[0].tolist() == [0, 0, 0], om[0].tolist()
    assert om[-1].tolist() == [1, 1, 1], om[-1].tolist()


@criterion(9, "quaternary GMSK deviates 1.5x binary, spectrum at most 42% wider")
def test_quaternary():
    binary = BaselineSpec(kind="gmsk-binary", bt=0.3)
    quaternary = BaselineSpec(kind="gmsk-quaternary", bt=0.3)
    ratio = deviation_ratio(binary, quaternary)
    assert abs(ratio - 1.5) <= 1e-6, f"deviation ratio {ratio:.9f}"
    widths = []
    for spec in (binary, quaternary):
        sig = baseline_signal(spec, 8192, 1.0, 16, seed=1)
        widths.append(shoulder_bandwidth(welch_psd(sig, 64 * 16)))
    widening = widths[1] / widths[0]
    assert widening <= 1.42, f"widening {widening:.3f}"
    return f"ratio {ratio:.7f}, widening {100 * (widening - 1):.1f}%"


@criterion(10, "partition, Parseval, end-phase, PSD normalization, tone and mask properties")
def test_property_suite(ref_cfg, ref_run):
    # partition of unity of the BT=0.1, L=8 pulse
    o = ref_cfg.oversampling
    pulse = make_pulse(PulseSpec(bt_product=0.1, truncation_chips=8), 1.0, o)
    acc = np.zeros(40 * o + len(pulse.g))
    for k in range(40):
        acc[k * o : k * o + len(pulse.g)] += pulse.g
    ripple = float(np.max(np.abs(acc[len(pulse.g) : 40 * o] - 1)))
    assert ripple < 1e-6, f"partition ripple {ripple:.2e}"

    # Parseval between the windowed chips and the demodulator bins
    chips = sample_chips(ref_run.aggregate, ref_cfg)
    bins = fft_window_demod(chips, ref_cfg)
    w, n = ref_cfg.window_offset, ref_cfg.n_subcarriers
    t_energy = np.sum(np.abs(chips[w : w + n]) ** 2, axis=0)
    f_energy = n * np.sum(np.abs(bins) ** 2, axis=0)
    parseval = float(np.max(np.abs(f_energy / t_energy - 1)))
    assert parseval < 1e-10, f"Parseval error {parseval:.2e}"

    # lowering shifts by 2 pi leaves the settled part of every symbol unchanged
    system = ref_run.system
    diff = differential_precode(ref_run.frame.symbols, ref_cfg.psk_order)
    plain = make_plans(ref_cfg, np.zeros_like(system.omega.omegas))
    settle = system.pulse.support_chips * o
    worst = 0.0
    for idx in (0, 20, 32, 45, 63):
        a = synthesize(build_increments(diff[idx], plain[idx], ref_cfg), system.pulse).samples
        b = synthesize(build_increments(diff[idx], system.plans[idx], ref_cfg), system.pulse).samples
        a = a.reshape(-1, ref_cfg.samples_per_symbol)[:, settle:]
        b = b.reshape(-1, ref_cfg.samples_per_symbol)[:, settle:]
        worst = max(worst, float(np.max(np.abs(a - b))))
    assert worst < 1e-9, f"end-phase mismatch {worst:.2e}"

    # PSD normalization
    run = RunConfig()
    agg_psd = estimate_psd(run, ref_cfg, ref_run.aggregate)
    assert abs(agg_psd.total_power - 1) < 1e-6

    # a repeated quarter-turn shift is a tone at +1/(4 Tc)
    tone_spec = BaselineSpec(kind="gmsk-repetition", repetition=32, repeated_shift=math.pi / 2)
    tone = welch_psd(baseline_signal(tone_spec, 256, 32.0, 16, seed=2), 1024)
    peak = tone.freqs_hz[np.argmax(tone.psd)]
    assert abs(peak - 0.25) <= tone.bin_width_hz, f"tone at {peak:.4f} / Tc"

    # repo-defined 100 MHz mask
    report = mask_check(agg_psd, SpectralMask.from_file(DEFAULT_MASK))
    assert report.passed, f"mask violated by {-report.worst_margin_db:.2f} dB at {report.worst_freq_hz / 1e6:.2f} MHz"
    return f"ripple {ripple:.1e}, Parseval {parseval:.1e}, end-phase {worst:.1e}, mask margin {report.worst_margin_db:.1f} dB"


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
