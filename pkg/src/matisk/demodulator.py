"""Windowed-FFT demodulation, differential decoding and interference metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .core import IqSignal, SystemConfig
from .modulator import SymbolFrame, differential_precode

SIR_CAP_DB = 200.0
ERASURE_LEVEL = 1e-12


@dataclass(frozen=True, eq=False)
class SirResult:
    sir_db: float  # ratio of mean signal power to mean error power
    per_subcarrier_db: np.ndarray
    mean_of_ratios_db: float
    gains: np.ndarray


@dataclass(frozen=True, eq=False)
class DemodReport:
    decisions: np.ndarray  # N x K, differential symbols
    bins: np.ndarray  # N x K coherent FFT outputs
    soft_values: np.ndarray  # N x K differential products
    erasures: np.ndarray
    sir_db: float
    per_subcarrier_sir_db: np.ndarray
    sir_mean_of_ratios_db: float
    sir_differential_db: float
    symbol_errors: int
    combining_gain_db: float


def sample_chips(sig: IqSignal, cfg: SystemConfig) -> np.ndarray:
    """One sample per chip at the chip center; returns T x K."""
    per_symbol = cfg.samples_per_symbol
    if len(sig) % per_symbol:
        raise ValueError(f"signal length {len(sig)} is not a whole number of {per_symbol}-sample symbols")
    k = len(sig) // per_symbol
    grid = sig.samples.reshape(k, cfg.repetition, cfg.oversampling)
    return grid[:, :, cfg.oversampling // 2].T


def _carrier_offsets(n_sub: int) -> np.ndarray:
    return np.arange(n_sub) - n_sub // 2


def fft_window_demod(chips: np.ndarray, cfg: SystemConfig) -> np.ndarray:
    """N-point FFT over chips [W, W+N) of each symbol, one row per subcarrier.

    Bins are scaled by 1/N and referenced to the absolute carrier phase at
    the sampling instants, so a subcarrier with constant data phase gives a
    constant bin value from symbol to symbol.
    """
    n, t, w = cfg.n_subcarriers, cfg.repetition, cfg.window_offset
    if w + n > t or chips.shape[0] != t:
        raise ValueError(f"window [{w}, {w + n}) does not fit a {chips.shape[0]}-chip symbol (T={t})")
    spectrum = np.fft.fft(chips[w : w + n], axis=0) / n
    offsets = _carrier_offsets(n)
    bins = spectrum[np.mod(offsets, n)]
    k = chips.shape[1]
    starts = np.arange(k) * t + w
    whole = np.mod(offsets[:, None] * starts[None, :], n)
    frac = offsets * (cfg.oversampling // 2) / cfg.oversampling
    return bins * np.exp(-2j * np.pi * (whole + frac[:, None]) / n)


def differential_decode(bins: np.ndarray, m_order: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Returns (decisions, soft values, erasure mask).

    The first column is decoded against a zero-phase reference, so
    decisions line up with the differentially precoded symbols.
    """
    if bins.shape[1] < 2:
        raise ValueError("need at least two symbols")
    prev = np.concatenate((np.ones((bins.shape[0], 1)), bins[:, :-1]), axis=1)
    power = np.abs(prev) ** 2
    erasures = np.abs(prev) < ERASURE_LEVEL
    soft = bins * np.conj(prev) / np.where(erasures, 1.0, power)
    soft[erasures] = 0
    step = 2 * math.pi / m_order
    decisions = np.mod(np.rint(np.angle(soft) / step).astype(np.int64), m_order)
    return decisions, soft, erasures


def _to_db(ratio):
    with np.errstate(divide="ignore"):
        return np.minimum(10 * np.log10(ratio), SIR_CAP_DB)


def measure_sir(values: np.ndarray, symbols: np.ndarray, m_order: int) -> SirResult:
    """SIR of decision variables against known PSK symbols, noiseless channel.

    A complex gain per subcarrier is fitted first so that a static rotation
    or scaling does not count as interference.
    """
    ideal = np.exp(2j * math.pi * np.asarray(symbols) / m_order)
    ref_power = np.sum(np.abs(ideal) ** 2, axis=1)
    gains = np.sum(values * np.conj(ideal), axis=1) / ref_power
    err = np.sum(np.abs(values - gains[:, None] * ideal) ** 2, axis=1)
    sig = np.abs(gains) ** 2 * ref_power
    with np.errstate(divide="ignore"):
        per_sub = _to_db(sig / err)
        total = float(_to_db(sig.mean() / err.mean()))
        mean_ratios = float(_to_db(np.mean(np.minimum(sig / err, 10 ** (SIR_CAP_DB / 10)))))
    return SirResult(sir_db=total, per_subcarrier_db=per_sub, mean_of_ratios_db=mean_ratios, gains=gains)


def combining_gain(cfg: SystemConfig) -> float:
    """Coherent combining gain of the N-chip window, in dB."""
    return 10 * math.log10(cfg.n_subcarriers)


def demodulate(sig: IqSignal, cfg: SystemConfig, frame: Optional[SymbolFrame] = None) -> DemodReport:
    bins = fft_window_demod(sample_chips(sig, cfg), cfg)
    decisions, soft, erasures = differential_decode(bins, cfg.psk_order)
    if frame is None:
        nan = float("nan")
        return DemodReport(decisions, bins, soft, erasures, nan, np.full(cfg.n_subcarriers, nan), nan, nan, -1,
                           combining_gain(cfg))
    if frame.symbols.shape != bins.shape:
        raise ValueError(f"frame shape {frame.symbols.shape} does not match demodulated {bins.shape}")
    coherent = measure_sir(bins, frame.symbols, cfg.psk_order)
    diff = differential_precode(frame.symbols, cfg.psk_order)
    differential = measure_sir(soft[:, 1:], diff[:, 1:], cfg.psk_order)
    errors = int(np.count_nonzero(decisions[:, 1:] != diff[:, 1:]))
    return DemodReport(
        decisions=decisions,
        bins=bins,
        soft_values=soft,
        erasures=erasures,
        sir_db=coherent.sir_db,
        per_subcarrier_sir_db=coherent.per_subcarrier_db,
        sir_mean_of_ratios_db=coherent.mean_of_ratios_db,
        sir_differential_db=differential.sir_db,
        symbol_errors=errors,
        combining_gain_db=combining_gain(cfg),
    )
