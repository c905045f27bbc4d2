"""Per-antenna CPFSK synthesis and the aggregate multi-carrier signal."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .core import FrequencyPulse, IqSignal, PhaseShiftSet, SystemConfig, shift_set


@dataclass(frozen=True, eq=False)
class SubcarrierPlan:
    index: int
    center_freq_hz: float
    shift_set: PhaseShiftSet

    def carrier_offset(self, n_subcarriers: int) -> int:
        """Position on the centered grid, in units of the subcarrier spacing."""
        return self.index - n_subcarriers // 2


@dataclass(frozen=True, eq=False)
class SymbolFrame:
    """N x K matrix of absolute PSK symbols; column 0 is the reference symbol."""

    symbols: np.ndarray
    psk_order: int

    def __post_init__(self):
        s = np.asarray(self.symbols)
        if s.ndim != 2:
            raise ValueError("symbols must be an N x K matrix")
        if s.shape[1] < 2:
            raise ValueError("a frame needs at least 2 symbols (reference + data)")
        if s.min() < 0 or s.max() >= self.psk_order:
            raise ValueError(f"symbols outside [0, {self.psk_order})")

    @property
    def n_subcarriers(self) -> int:
        return self.symbols.shape[0]

    @property
    def n_symbols(self) -> int:
        return self.symbols.shape[1]


@dataclass(frozen=True, eq=False)
class ChipIncrementStream:
    """Per-chip phase increments split into a constant carrier part and data shifts.

    ``increments`` is the total per-chip phase step. Chips before the start
    of the stream are taken to carry the carrier increment only, so the
    carrier contributes an exact linear phase ramp.
    """

    carrier: float
    data: np.ndarray

    @property
    def increments(self) -> np.ndarray:
        return self.carrier + self.data

    def __len__(self) -> int:
        return len(self.data)


def random_frame(cfg: SystemConfig, n_symbols: int, seed: Optional[int] = None) -> SymbolFrame:
    rng = np.random.default_rng(cfg.seed if seed is None else seed)
    symbols = rng.integers(0, cfg.psk_order, size=(cfg.n_subcarriers, n_symbols))
    return SymbolFrame(symbols=symbols, psk_order=cfg.psk_order)


def make_plans(cfg: SystemConfig, omegas: np.ndarray) -> List[SubcarrierPlan]:
    freqs = cfg.subcarrier_freqs_hz()
    return [
        SubcarrierPlan(index=n, center_freq_hz=float(freqs[n]), shift_set=shift_set(cfg.psk_order, omegas[n]))
        for n in range(cfg.n_subcarriers)
    ]


def differential_precode(symbols, m_order: int) -> np.ndarray:
    """Differences of successive symbols mod M along the last axis; first symbol kept."""
    s = np.asarray(symbols, dtype=np.int64)
    out = np.mod(np.diff(s, axis=-1, prepend=0), m_order)
    return out


def build_increments(diff_symbols, plan: SubcarrierPlan, cfg: SystemConfig) -> ChipIncrementStream:
    diff_symbols = np.asarray(diff_symbols, dtype=np.int64)
    n = cfg.n_subcarriers
    carrier = 2 * math.pi * plan.carrier_offset(n) / n if n > 1 else 0.0
    data = np.zeros(len(diff_symbols) * cfg.repetition)
    data[:: cfg.repetition] = plan.shift_set.shifts[diff_symbols]
    return ChipIncrementStream(carrier=carrier, data=data)


def synthesize_phase(increments: ChipIncrementStream, pulse: FrequencyPulse) -> np.ndarray:
    """Phase at every sample instant; sample i sits at i/O chips, phase(0) = 0."""
    o = pulse.oversampling
    nsamp = len(increments) * o
    dq = pulse.increments
    per_sample = np.zeros(nsamp + len(dq))
    chips = np.flatnonzero(increments.data)
    if chips.size:
        idx = chips[:, None] * o + np.arange(len(dq))[None, :]
        np.add.at(per_sample, idx, increments.data[chips, None] * dq[None, :])
    data_phase = np.concatenate(([0.0], np.cumsum(per_sample[: nsamp - 1])))
    return increments.carrier * np.arange(nsamp) / o + data_phase


def synthesize(increments: ChipIncrementStream, pulse: FrequencyPulse) -> IqSignal:
    phase = synthesize_phase(increments, pulse)
    return IqSignal(samples=np.exp(1j * phase), sample_rate_hz=pulse.oversampling / pulse.chip_period_s)


def _check_frame(frame: SymbolFrame, plans: Sequence[SubcarrierPlan], pulse: FrequencyPulse, cfg: SystemConfig):
    if frame.n_subcarriers != len(plans) or len(plans) != cfg.n_subcarriers:
        raise ValueError(
            f"frame has {frame.n_subcarriers} rows, {len(plans)} plans, config N={cfg.n_subcarriers}"
        )
    if pulse.oversampling != cfg.oversampling or not math.isclose(pulse.chip_period_s, cfg.chip_period_s):
        raise ValueError("pulse does not match the configured chip period / oversampling")


def iter_antennas(
    frame: SymbolFrame, plans: Sequence[SubcarrierPlan], pulse: FrequencyPulse, cfg: SystemConfig
) -> Iterator[IqSignal]:
    """Yield each antenna's unit-envelope signal in subcarrier order."""
    _check_frame(frame, plans, pulse, cfg)
    diff = differential_precode(frame.symbols, cfg.psk_order)
    for n, plan in enumerate(plans):
        yield synthesize(build_increments(diff[n], plan, cfg), pulse)


def modulate_frame(
    frame: SymbolFrame,
    plans: Sequence[SubcarrierPlan],
    pulse: FrequencyPulse,
    cfg: SystemConfig,
    keep_per_antenna: bool = True,
) -> Tuple[Optional[List[IqSignal]], IqSignal]:
    """Returns (per-antenna signals or None, aggregate scaled by 1/sqrt(N))."""
    per_antenna = [] if keep_per_antenna else None
    total = np.zeros(frame.n_symbols * cfg.samples_per_symbol, dtype=complex)
    for sig in iter_antennas(frame, plans, pulse, cfg):
        total += sig.samples
        if per_antenna is not None:
            per_antenna.append(sig)
    total /= math.sqrt(cfg.n_subcarriers)
    return per_antenna, IqSignal(samples=total, sample_rate_hz=cfg.sample_rate_hz)
