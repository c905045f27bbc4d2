"""Per-subcarrier choice of the shift vector omega.

Each nonzero differential shift 2*pi*m/M may be sent as is or lowered by
2*pi. The choice is made so that the transient frequency excursion stays
as close to the band center as possible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .analysis import instantaneous_frequency
from .core import FrequencyPulse, SystemConfig
from .modulator import ChipIncrementStream, synthesize

_TIE_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class OmegaAssignment:
    omegas: np.ndarray  # N x (M-1), binary
    shifts: np.ndarray  # N x M, radians
    peak_freqs_hz: np.ndarray  # N x M, extremal instantaneous frequency per shift
    center_freqs_hz: np.ndarray
    band_center_hz: float = 0.0

    @property
    def peak_deviation_hz(self) -> np.ndarray:
        """Worst-case distance of each subcarrier's frequency from band center."""
        dev = np.abs(self.peak_freqs_hz - self.band_center_hz)
        return np.maximum(dev.max(axis=1), np.abs(self.center_freqs_hz - self.band_center_hz))

    @property
    def residual_hz(self) -> float:
        """How far any transient leaves the [lowest, highest] subcarrier range."""
        lo, hi = self.center_freqs_hz.min(), self.center_freqs_hz.max()
        over = max(self.peak_freqs_hz.max() - hi, lo - self.peak_freqs_hz.min(), 0.0)
        return float(over)


def peak_instantaneous_freq(f_n: float, shift: float, pulse: FrequencyPulse) -> float:
    """Extremal instantaneous frequency of a carrier at f_n making one phase step.

    Measured on a two-symbol probe: a quiet reference symbol followed by a
    symbol that starts with the step.
    """
    span = pulse.support_chips + 1
    carrier = 2 * math.pi * f_n * pulse.chip_period_s
    data = np.zeros(2 * span)
    data[span] = shift
    probe = synthesize(ChipIncrementStream(carrier=carrier, data=data), pulse)
    f = instantaneous_frequency(probe)
    return float(f[np.argmax(np.abs(f - f_n))])


def choose_omega(cfg: SystemConfig, pulse: FrequencyPulse, band_center_hz: float = 0.0) -> OmegaAssignment:
    """Pick omega per subcarrier and per shift independently.

    Each choice minimizes max(|f_n - f_c|, |peak - f_c|); ties go to the
    lowered (negative) shift.
    """
    m_order = cfg.psk_order
    freqs = cfg.subcarrier_freqs_hz()
    n_sub = len(freqs)
    omegas = np.zeros((n_sub, m_order - 1), dtype=np.int64)
    shifts = np.zeros((n_sub, m_order))
    peaks = np.zeros((n_sub, m_order))
    for n, f_n in enumerate(freqs):
        base = abs(f_n - band_center_hz)
        peaks[n, 0] = f_n
        for m in range(1, m_order):
            up = 2 * math.pi * m / m_order
            down = up - 2 * math.pi
            p_up = peak_instantaneous_freq(f_n, up, pulse)
            p_down = peak_instantaneous_freq(f_n, down, pulse)
            cost_up = max(base, abs(p_up - band_center_hz))
            cost_down = max(base, abs(p_down - band_center_hz))
            if cost_down <= cost_up * (1 + _TIE_RTOL):
                omegas[n, m - 1] = 1
                shifts[n, m], peaks[n, m] = down, p_down
            else:
                shifts[n, m], peaks[n, m] = up, p_up
    return OmegaAssignment(
        omegas=omegas, shifts=shifts, peak_freqs_hz=peaks, center_freqs_hz=freqs, band_center_hz=band_center_hz
    )
