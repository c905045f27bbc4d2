"""Shared types and frequency/phase pulse generation.

Time inside this module is mostly handled in chip units; a chip lasts
``chip_period_s`` seconds and is sampled ``oversampling`` times.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import ndtr

_SQRT_LN2 = math.sqrt(math.log(2.0))


class PulseShape(str, enum.Enum):
    GAUSSIAN = "gaussian"  # Gaussian-filtered rectangle, as in GSM
    RECT = "rect"


@dataclass(frozen=True)
class PulseSpec:
    """Frequency pulse description.

    For the Gaussian shape, ``truncation_chips`` is the span of the
    (truncated) Gaussian filter. Convolving it with the one-chip rectangle
    makes the full frequency pulse one chip longer.
    """

    shape: PulseShape = PulseShape.GAUSSIAN
    bt_product: float = 0.1
    truncation_chips: int = 8

    def __post_init__(self):
        object.__setattr__(self, "shape", PulseShape(self.shape))
        if self.shape is PulseShape.GAUSSIAN:
            if not self.bt_product > 0:
                raise ValueError(f"bt_product must be positive, got {self.bt_product}")
            if self.truncation_chips < 1:
                raise ValueError("truncation_chips must be >= 1")

    @property
    def support_chips(self) -> int:
        if self.shape is PulseShape.RECT:
            return 1
        return self.truncation_chips + 1

    @property
    def duration_chips(self) -> int:
        """Nominal pulse duration (the Gaussian filter span)."""
        if self.shape is PulseShape.RECT:
            return 1
        return self.truncation_chips


@dataclass(frozen=True)
class SystemConfig:
    n_subcarriers: int = 64
    repetition: int = 70
    psk_order: int = 4
    chip_period_s: float = 800e-9 / 70
    oversampling: int = 16
    pulse_spec: PulseSpec = field(default_factory=PulseSpec)
    window_offset_chips: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        n, t, m = self.n_subcarriers, self.repetition, self.psk_order
        if n < 1:
            raise ValueError("n_subcarriers must be positive")
        if n > 1 and n % 2:
            raise ValueError("n_subcarriers must be even (centered grid)")
        if t < n:
            raise ValueError(f"repetition T={t} must be >= n_subcarriers N={n}")
        if m < 2 or m & (m - 1):
            raise ValueError(f"psk_order must be a power of two >= 2, got {m}")
        if not self.chip_period_s > 0:
            raise ValueError("chip_period_s must be positive")
        if self.oversampling < 1:
            raise ValueError("oversampling must be positive")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")
        w = self.window_offset
        if not 0 <= w <= t - n:
            raise ValueError(f"window offset {w} outside [0, {t - n}]")

    @property
    def window_offset(self) -> int:
        if self.window_offset_chips is None:
            return self.repetition - self.n_subcarriers
        return self.window_offset_chips

    @property
    def sample_rate_hz(self) -> float:
        return self.oversampling / self.chip_period_s

    @property
    def subcarrier_spacing_hz(self) -> float:
        return 1.0 / (self.n_subcarriers * self.chip_period_s)

    @property
    def symbol_period_s(self) -> float:
        return self.repetition * self.chip_period_s

    @property
    def samples_per_symbol(self) -> int:
        return self.repetition * self.oversampling

    @property
    def bits_per_symbol(self) -> int:
        return int(math.log2(self.psk_order))

    @property
    def data_rate_bps(self) -> float:
        return self.n_subcarriers * self.bits_per_symbol / self.symbol_period_s

    @property
    def pulse_duration_s(self) -> float:
        return self.pulse_spec.duration_chips * self.chip_period_s

    def subcarrier_freqs_hz(self) -> np.ndarray:
        n = np.arange(self.n_subcarriers)
        return (n - self.n_subcarriers // 2) * self.subcarrier_spacing_hz

    def with_repetition(self, t: int, keep_symbol_period: bool = True) -> "SystemConfig":
        """Copy with a different T; by default the symbol period is held fixed."""
        tc = self.symbol_period_s / t if keep_symbol_period else self.chip_period_s
        return SystemConfig(
            n_subcarriers=self.n_subcarriers,
            repetition=t,
            psk_order=self.psk_order,
            chip_period_s=tc,
            oversampling=self.oversampling,
            pulse_spec=self.pulse_spec,
            window_offset_chips=None,
            seed=self.seed,
        )


@dataclass(frozen=True, eq=False)
class FrequencyPulse:
    """Sampled frequency pulse ``g`` (1/s) and phase pulse ``q``.

    ``g[i]`` is the average of the continuous pulse over sample cell ``i``
    and ``q[i]`` the phase pulse at the end of that cell, so
    ``q == cumsum(g) * dt`` and ``q[-1] == 1``.
    """

    g: np.ndarray
    q: np.ndarray
    chip_period_s: float
    oversampling: int

    @property
    def dt(self) -> float:
        return self.chip_period_s / self.oversampling

    @property
    def increments(self) -> np.ndarray:
        """Per-sample fraction of the total phase step (sums to 1)."""
        return np.diff(self.q, prepend=0.0)

    @property
    def support_chips(self) -> int:
        return len(self.g) // self.oversampling

    @property
    def duration_s(self) -> float:
        return len(self.g) * self.dt

    @property
    def g_max(self) -> float:
        return float(self.g.max())


@dataclass(frozen=True, eq=False)
class IqSignal:
    samples: np.ndarray
    sample_rate_hz: float
    t0_s: float = 0.0

    def __post_init__(self):
        if not self.sample_rate_hz > 0:
            raise ValueError("sample_rate_hz must be positive")
        if len(self.samples) == 0:
            raise ValueError("empty signal")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def times_s(self) -> np.ndarray:
        return self.t0_s + np.arange(len(self.samples)) / self.sample_rate_hz


@dataclass(frozen=True, eq=False)
class PhaseShiftSet:
    omega: np.ndarray
    shifts: np.ndarray

    @property
    def order(self) -> int:
        return len(self.shifts)


def shift_set(m_order: int, omega: Sequence[int]) -> PhaseShiftSet:
    """Differential phase shifts 2*pi*m/M, each optionally lowered by 2*pi."""
    omega = np.asarray(omega, dtype=np.int64)
    if omega.shape != (m_order - 1,):
        raise ValueError(f"omega must have length {m_order - 1}, got {omega.shape}")
    if np.any((omega != 0) & (omega != 1)):
        raise ValueError("omega must be binary")
    m = np.arange(1, m_order)
    shifts = np.concatenate(([0.0], 2 * np.pi * m / m_order - 2 * np.pi * omega))
    omega.flags.writeable = False
    shifts.flags.writeable = False
    return PhaseShiftSet(omega=omega, shifts=shifts)


def _gauss_cdf_antiderivative(x):
    # integral of Phi(u) du = x*Phi(x) + phi(x)
    return x * ndtr(x) + np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)


def gaussian_sigma_chips(bt_product: float) -> float:
    """Standard deviation (in chips) of the Gaussian with 3-dB bandwidth BT/T_c."""
    return _SQRT_LN2 / (2 * math.pi * bt_product)


def _truncated_gaussian_phase(x: np.ndarray, sigma: float, half: float) -> np.ndarray:
    """Phase pulse of (truncated Gaussian * unit rectangle), x centered, chips."""
    lo = ndtr(-half / sigma)
    mass = 1.0 - 2.0 * lo

    def antiderivative_of_cdf(u):
        # A(u) = integral_{-inf}^{u} H(s) ds, H the truncated Gaussian CDF
        uc = np.clip(u, -half, half)
        inner = sigma * (_gauss_cdf_antiderivative(uc / sigma) - _gauss_cdf_antiderivative(-half / sigma))
        inner = (inner - lo * (uc + half)) / mass
        return inner + np.maximum(u - half, 0.0)

    return antiderivative_of_cdf(x + 0.5) - antiderivative_of_cdf(x - 0.5)


def gaussian_mass_fraction(bt_product: float, truncation_chips: int) -> float:
    sigma = gaussian_sigma_chips(bt_product)
    return float(1.0 - 2.0 * ndtr(-truncation_chips / (2 * sigma)))


def make_pulse(spec: PulseSpec, chip_period_s: float, oversampling: int) -> FrequencyPulse:
    """Build the sampled chip pulse.

    The Gaussian shape is a one-chip rectangle filtered by a Gaussian of
    3-dB bandwidth ``bt_product / chip_period_s``; the Gaussian is truncated
    to ``truncation_chips`` and renormalized, which keeps the sum of
    chip-shifted pulses exactly flat.
    """
    if oversampling < 4:
        raise ValueError("oversampling must be >= 4")
    if not chip_period_s > 0:
        raise ValueError("chip_period_s must be positive")
    support = spec.support_chips
    edges = np.arange(1, support * oversampling + 1) / oversampling
    if spec.shape is PulseShape.RECT:
        q = edges.copy()
    else:
        frac = gaussian_mass_fraction(spec.bt_product, spec.truncation_chips)
        if frac < 0.99:
            raise ValueError(
                f"truncation of {spec.truncation_chips} chips keeps only {frac:.4f} of the "
                f"BT={spec.bt_product} Gaussian (need >= 0.99)"
            )
        sigma = gaussian_sigma_chips(spec.bt_product)
        q = _truncated_gaussian_phase(edges - support / 2, sigma, spec.truncation_chips / 2)
        # rounding near the flat tail can dip by an ulp; keep q monotone so g >= 0
        q = np.minimum(np.maximum.accumulate(q), 1.0)
        q[-1] = 1.0
    dq = np.diff(q, prepend=0.0)
    g = dq * oversampling / chip_period_s
    g.flags.writeable = False
    q.flags.writeable = False
    return FrequencyPulse(g=g, q=q, chip_period_s=chip_period_s, oversampling=oversampling)
