"""Run configuration: pydantic schema shared by the INI loader and the HTTP API."""

from __future__ import annotations

import configparser
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .core import PulseShape, PulseSpec, SystemConfig


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class SystemSection(_Section):
    n_subcarriers: int = Field(64, ge=1)
    repetition: int = Field(70, ge=1)
    psk_order: int = Field(4, ge=2)
    symbol_rate_hz: Optional[float] = Field(None, gt=0)
    chip_period_s: Optional[float] = Field(None, gt=0)
    oversampling: int = Field(16, ge=4)
    window_offset_chips: Optional[int] = Field(None, ge=0)
    n_symbols: int = Field(100, ge=2)
    seed: int = Field(1, ge=0)

    @model_validator(mode="after")
    def _one_rate(self):
        if self.symbol_rate_hz is not None and self.chip_period_s is not None:
            raise ValueError("give either symbol_rate_hz or chip_period_s, not both")
        if self.symbol_rate_hz is None and self.chip_period_s is None:
            self.symbol_rate_hz = 1.25e6
        return self

    def chip_period(self) -> float:
        if self.chip_period_s is not None:
            return self.chip_period_s
        return 1.0 / (self.symbol_rate_hz * self.repetition)


class PulseSection(_Section):
    shape: PulseShape = PulseShape.GAUSSIAN
    bt_product: float = Field(0.1, gt=0)
    truncation_chips: int = Field(8, ge=1)


class PsdSection(_Section):
    segment_symbols: int = Field(8, ge=1)
    overlap: float = Field(0.5, ge=0, lt=1)
    window: Literal["hann", "hamming", "blackman", "boxcar", "blackmanharris"] = "hann"


class MaskSection(_Section):
    path: Optional[str] = None


class OutputSection(_Section):
    dir: str = "out"
    per_antenna: bool = False


class RunConfig(_Section):
    system: SystemSection = SystemSection()
    pulse: PulseSection = PulseSection()
    psd: PsdSection = PsdSection()
    mask: MaskSection = MaskSection()
    output: OutputSection = OutputSection()

    def pulse_spec(self) -> PulseSpec:
        return PulseSpec(
            shape=self.pulse.shape, bt_product=self.pulse.bt_product, truncation_chips=self.pulse.truncation_chips
        )

    def system_config(self, seed: Optional[int] = None) -> SystemConfig:
        s = self.system
        return SystemConfig(
            n_subcarriers=s.n_subcarriers,
            repetition=s.repetition,
            psk_order=s.psk_order,
            chip_period_s=s.chip_period(),
            oversampling=s.oversampling,
            pulse_spec=self.pulse_spec(),
            window_offset_chips=s.window_offset_chips,
            seed=s.seed if seed is None else seed,
        )


def parse_ini(text: str, base_dir: Optional[Path] = None) -> RunConfig:
    """Parse ``key = value`` sections; unknown sections or keys are rejected."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    parser.read_string(text)
    raw = {name: dict(parser.items(name)) for name in parser.sections()}
    cfg = RunConfig.model_validate(raw)
    if cfg.mask.path and base_dir is not None and not Path(cfg.mask.path).is_absolute():
        cfg.mask.path = str(base_dir / cfg.mask.path)
    # building the SystemConfig checks cross-field invariants (T >= N, window fit)
    cfg.system_config()
    return cfg


def load(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    return parse_ini(path.read_text(), base_dir=path.parent)
