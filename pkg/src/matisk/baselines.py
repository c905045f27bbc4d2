"""Single-carrier reference waveforms: GMSK variants and linear PSK with RRC pulses."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .core import IqSignal, PulseShape, PulseSpec, gaussian_mass_fraction, make_pulse
from .modulator import ChipIncrementStream, differential_precode, synthesize

# Gray order: 00 -> pi/4, 01 -> 3pi/4, 10 -> -pi/4, 11 -> -3pi/4
_QUATERNARY_GRAY = (math.pi / 4, 3 * math.pi / 4, -math.pi / 4, -3 * math.pi / 4)
_BINARY = (math.pi / 2, -math.pi / 2)
_REPETITION_QUATERNARY = (math.pi / 2, 3 * math.pi / 2, -math.pi / 2, -3 * math.pi / 2)


class BaselineKind(str, enum.Enum):
    GMSK_BINARY = "gmsk-binary"
    GMSK_QUATERNARY = "gmsk-quaternary"
    GMSK_REPETITION = "gmsk-repetition"
    LINEAR_PSK_RRC = "psk-rrc"


@dataclass(frozen=True)
class BaselineSpec:
    kind: BaselineKind
    bt: float = 0.3
    rolloff: float = 0.22
    repetition: int = 1
    repeated_shift: Optional[float] = None
    psk_order: int = 2
    constellation: Optional[Tuple[float, ...]] = None
    truncation_chips: Optional[int] = None
    rrc_span_symbols: int = 16

    def __post_init__(self):
        object.__setattr__(self, "kind", BaselineKind(self.kind))
        if not 0 < self.rolloff <= 1:
            raise ValueError(f"rolloff must be in (0, 1], got {self.rolloff}")
        if self.repetition < 1:
            raise ValueError("repetition must be >= 1")
        if self.kind is not BaselineKind.LINEAR_PSK_RRC and not self.bt > 0:
            raise ValueError("bt must be positive")
        if self.kind is BaselineKind.GMSK_REPETITION and self.repeated_shift is None:
            raise ValueError("gmsk-repetition needs repeated_shift")
        if self.kind is BaselineKind.GMSK_QUATERNARY and self.psk_order != 4:
            object.__setattr__(self, "psk_order", 4)
        if self.kind is BaselineKind.GMSK_BINARY and self.psk_order != 2:
            object.__setattr__(self, "psk_order", 2)


def _auto_truncation(bt: float) -> int:
    # shortest even span keeping all but 1e-9 of the Gaussian
    span = 2
    while gaussian_mass_fraction(bt, span) < 1 - 1e-9:
        span += 2
    return span


def gmsk_pulse_spec(spec: BaselineSpec) -> PulseSpec:
    if spec.kind is BaselineKind.LINEAR_PSK_RRC:
        raise ValueError("not a GMSK baseline")
    span = spec.truncation_chips or _auto_truncation(spec.bt)
    return PulseSpec(shape=PulseShape.GAUSSIAN, bt_product=spec.bt, truncation_chips=span)


def gmsk_constellation(spec: BaselineSpec) -> np.ndarray:
    """Phase shift per differential symbol value."""
    if spec.kind is BaselineKind.GMSK_BINARY:
        return np.array(spec.constellation or _BINARY)
    if spec.kind is BaselineKind.GMSK_QUATERNARY:
        return np.array(spec.constellation or _QUATERNARY_GRAY)
    if spec.kind is BaselineKind.GMSK_REPETITION:
        points = spec.constellation or (_BINARY if spec.psk_order == 2 else _REPETITION_QUATERNARY)
        r = spec.repeated_shift
        if not any(math.isclose(r, p) for p in points):
            raise ValueError(f"repeated shift {r} is not in the constellation {points}")
        rest = [p for p in points if not math.isclose(r, p)]
        # nearest first, larger magnitude first on ties: negating r negates the table
        rest.sort(key=lambda p: (round(abs(p - r), 12), -abs(p)))
        return np.array([r] + rest)
    raise ValueError(f"{spec.kind.value} is not a GMSK baseline")


def gmsk_waveform(spec: BaselineSpec, symbols: Sequence[int], chip_period_s: float, oversampling: int = 16) -> IqSignal:
    """CPFSK synthesis of differentially precoded symbols.

    Each data symbol is repeated ``spec.repetition`` times before
    precoding, so repeated chips carry the shift of differential symbol 0.
    """
    table = gmsk_constellation(spec)
    symbols = np.asarray(symbols, dtype=np.int64)
    if symbols.min() < 0 or symbols.max() >= len(table):
        raise ValueError(f"symbols must be in [0, {len(table)})")
    chips = np.repeat(symbols, spec.repetition)
    diff = differential_precode(chips, len(table))
    stream = ChipIncrementStream(carrier=0.0, data=table[diff])
    pulse = make_pulse(gmsk_pulse_spec(spec), chip_period_s, oversampling)
    return synthesize(stream, pulse)


def rrc_pulse(rolloff: float, span_symbols: int, oversampling: int) -> np.ndarray:
    """Root-raised-cosine taps with unit energy (sum of squares = 1)."""
    if not 0 < rolloff <= 1:
        raise ValueError(f"rolloff must be in (0, 1], got {rolloff}")
    n = span_symbols * oversampling
    t = (np.arange(n + 1) - n / 2) / oversampling
    b = rolloff
    h = np.empty_like(t)
    at_zero = np.isclose(t, 0.0)
    at_sing = np.isclose(np.abs(t), 1 / (4 * b))
    rest = ~(at_zero | at_sing)
    tr = t[rest]
    h[rest] = (np.sin(np.pi * tr * (1 - b)) + 4 * b * tr * np.cos(np.pi * tr * (1 + b))) / (
        np.pi * tr * (1 - (4 * b * tr) ** 2)
    )
    h[at_zero] = 1 - b + 4 * b / np.pi
    h[at_sing] = b / math.sqrt(2) * (
        (1 + 2 / np.pi) * np.sin(np.pi / (4 * b)) + (1 - 2 / np.pi) * np.cos(np.pi / (4 * b))
    )
    return h / np.linalg.norm(h)


def rrc_psk_waveform(spec: BaselineSpec, symbols, symbol_period_s: float, oversampling: int = 16) -> IqSignal:
    """Linear PAM of RRC pulses. Integer symbols are mapped onto M-PSK points."""
    if spec.kind is not BaselineKind.LINEAR_PSK_RRC:
        raise ValueError("rrc_psk_waveform needs a psk-rrc baseline")
    symbols = np.asarray(symbols)
    if np.iscomplexobj(symbols):
        points = symbols.astype(complex)
    else:
        offset = np.pi / 4 if spec.psk_order == 4 else 0.0
        points = np.exp(1j * (2 * np.pi * symbols / spec.psk_order + offset))
    h = rrc_pulse(spec.rolloff, spec.rrc_span_symbols, oversampling)
    up = np.zeros(len(points) * oversampling, dtype=complex)
    up[::oversampling] = points
    out = np.convolve(up, h)[: (len(points) - 1) * oversampling + len(h)]
    fs = oversampling / symbol_period_s
    return IqSignal(samples=out, sample_rate_hz=fs, t0_s=-(len(h) - 1) / 2 / fs)
