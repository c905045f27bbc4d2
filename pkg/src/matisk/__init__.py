"""Multi-carrier, repetition-coded CPFSK modem with spectral analysis tools."""

from .core import (
    FrequencyPulse,
    IqSignal,
    PhaseShiftSet,
    PulseShape,
    PulseSpec,
    SystemConfig,
    make_pulse,
    shift_set,
)
from .demodulator import DemodReport, combining_gain, demodulate
from .inband import OmegaAssignment, choose_omega
from .modulator import SymbolFrame, differential_precode, make_plans, modulate_frame, random_frame
from .pipeline import build_system, loopback, sir_sweep, synth

__version__ = "0.1.0"
