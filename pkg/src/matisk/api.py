"""HTTP service exposing the modem and analysis runs.

Run with ``matisk serve`` or ``uvicorn matisk.api:app``.
"""

from __future__ import annotations

import base64
from typing import Dict, List, Optional, Tuple

import numpy as np
from fastapi import FastAPI, HTTPException, Response
from pydantic import BaseModel, Field

from . import analysis, iqfile, pipeline
from .baselines import BaselineKind, BaselineSpec
from .config import RunConfig
from .demodulator import demodulate
from .modulator import random_frame

app = FastAPI(title="matisk", version="0.1.0")


class ParamsResponse(BaseModel):
    chip_period_s: float
    sample_rate_hz: float
    subcarrier_spacing_hz: float
    symbol_period_s: float
    symbol_rate_hz: float
    pulse_duration_s: float
    occupied_bandwidth_hz: float
    data_rate_bps: float
    combining_gain_db: float


class OmegaRow(BaseModel):
    subcarrier: int
    freq_hz: float
    omega: List[int]
    shifts: List[float]
    peak_deviation_hz: float


class OmegaResponse(BaseModel):
    rows: List[OmegaRow]
    residual_hz: float


class DemodRequest(BaseModel):
    config: RunConfig = RunConfig()
    iq_base64: str


class DemodResponse(BaseModel):
    sir_db: float
    sir_differential_db: float
    sir_mean_of_ratios_db: float
    symbol_errors: int
    combining_gain_db: float
    per_subcarrier_sir_db: List[float]


class SweepRequest(BaseModel):
    config: RunConfig = RunConfig()
    t_min: int = Field(64, ge=1)
    t_max: int = Field(73, ge=1)


class SweepRow(BaseModel):
    T: int
    sir_db: float
    sir_differential_db: float
    sir_mean_of_ratios_db: float
    symbol_errors: int


class PsdRequest(BaseModel):
    config: RunConfig = RunConfig()
    antennas: List[int] = []


class PsdResponse(BaseModel):
    freqs_hz: List[float]
    resolution_hz: float
    curves_db_inband: Dict[str, List[float]]


class MaskCheckRequest(BaseModel):
    config: RunConfig = RunConfig()
    mask: List[Tuple[float, float]] = Field(..., min_length=2)


class MaskCheckResponse(BaseModel):
    passed: bool
    worst_margin_db: float
    worst_freq_hz: float
    offending_freqs_hz: List[float]


class BaselineRequest(BaseModel):
    kind: BaselineKind
    bt: float = Field(0.3, gt=0)
    rolloff: float = Field(0.22, gt=0, le=1)
    repetition: int = Field(1, ge=1)
    repeated_shift: Optional[float] = None
    psk_order: int = 2
    n_symbols: int = Field(4096, ge=16)
    symbol_rate_hz: float = Field(1.0, gt=0)
    oversampling: int = Field(16, ge=4)
    segment_symbols: int = Field(64, ge=1)
    seed: int = Field(1, ge=0)


class BaselineResponse(BaseModel):
    freqs_hz: List[float]
    psd_db_peak: List[float]
    shoulder_bandwidth_hz: float


def _bad_request(exc: Exception):
    raise HTTPException(status_code=422, detail=f"{type(exc).__name__}: {exc}")


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/params", response_model=ParamsResponse)
def params(run: RunConfig):
    try:
        return pipeline.derived_parameters(run.system_config())
    except ValueError as exc:
        _bad_request(exc)


@app.post("/omega", response_model=OmegaResponse)
def omega(run: RunConfig):
    try:
        system = pipeline.build_system(run.system_config())
    except ValueError as exc:
        _bad_request(exc)
    om = system.omega
    rows = [
        OmegaRow(
            subcarrier=n,
            freq_hz=float(om.center_freqs_hz[n]),
            omega=[int(w) for w in om.omegas[n]],
            shifts=[float(s) for s in om.shifts[n]],
            peak_deviation_hz=float(om.peak_deviation_hz[n]),
        )
        for n in range(len(om.center_freqs_hz))
    ]
    return OmegaResponse(rows=rows, residual_hz=om.residual_hz)


@app.post("/synth")
def synth(run: RunConfig):
    """Aggregate signal as an MTSK file."""
    try:
        cfg = run.system_config()
        result = pipeline.synth(cfg, run.system.n_symbols)
    except ValueError as exc:
        _bad_request(exc)
    return Response(content=iqfile.to_bytes(result.aggregate), media_type="application/octet-stream")


@app.post("/demod", response_model=DemodResponse)
def demod(req: DemodRequest):
    try:
        cfg = req.config.system_config()
        sig = iqfile.from_bytes(base64.b64decode(req.iq_base64))
        frame = random_frame(cfg, len(sig) // cfg.samples_per_symbol)
        report = demodulate(sig, cfg, frame)
    except ValueError as exc:
        _bad_request(exc)
    return DemodResponse(
        sir_db=report.sir_db,
        sir_differential_db=report.sir_differential_db,
        sir_mean_of_ratios_db=report.sir_mean_of_ratios_db,
        symbol_errors=report.symbol_errors,
        combining_gain_db=report.combining_gain_db,
        per_subcarrier_sir_db=[float(x) for x in report.per_subcarrier_sir_db],
    )


@app.post("/sir-sweep", response_model=List[SweepRow])
def sir_sweep(req: SweepRequest):
    if req.t_max < req.t_min:
        raise HTTPException(status_code=422, detail="t_max < t_min")
    try:
        cfg = req.config.system_config()
        rows = pipeline.sir_sweep(cfg, range(req.t_min, req.t_max + 1), req.config.system.n_symbols)
    except ValueError as exc:
        _bad_request(exc)
    return rows


@app.post("/psd", response_model=PsdResponse)
def psd(req: PsdRequest):
    run = req.config
    try:
        cfg = run.system_config()
        result = pipeline.synth(cfg, run.system.n_symbols)
        curves = {"aggregate": pipeline.estimate_psd(run, cfg, result.aggregate)}
        for n, sig in pipeline.antenna_signals(result, req.antennas).items():
            curves[f"antenna_{n}"] = pipeline.estimate_psd(run, cfg, sig)
    except (ValueError, IndexError) as exc:
        _bad_request(exc)
    agg = curves["aggregate"]
    return PsdResponse(
        freqs_hz=agg.freqs_hz.tolist(),
        resolution_hz=agg.resolution_hz,
        curves_db_inband={k: v.psd_db_inband.tolist() for k, v in curves.items()},
    )


@app.post("/mask-check", response_model=MaskCheckResponse)
def mask_check(req: MaskCheckRequest):
    run = req.config
    try:
        pts = np.array(req.mask, dtype=float)
        mask = analysis.SpectralMask(offsets_hz=pts[:, 0], limits_db=pts[:, 1], symmetric=bool(pts[0, 0] >= 0))
        cfg = run.system_config()
        result = pipeline.synth(cfg, run.system.n_symbols)
        report = analysis.mask_check(pipeline.estimate_psd(run, cfg, result.aggregate), mask)
    except ValueError as exc:
        _bad_request(exc)
    return MaskCheckResponse(
        passed=report.passed,
        worst_margin_db=report.worst_margin_db,
        worst_freq_hz=report.worst_freq_hz,
        offending_freqs_hz=report.offending_freqs_hz.tolist(),
    )


@app.post("/baseline", response_model=BaselineResponse)
def baseline(req: BaselineRequest):
    try:
        spec = BaselineSpec(
            kind=req.kind,
            bt=req.bt,
            rolloff=req.rolloff,
            repetition=req.repetition,
            repeated_shift=req.repeated_shift,
            psk_order=req.psk_order,
        )
        sig = pipeline.baseline_signal(spec, req.n_symbols, 1.0 / req.symbol_rate_hz, req.oversampling, req.seed)
        est = analysis.welch_psd(sig, min(req.segment_symbols * req.oversampling * req.repetition, len(sig)))
    except ValueError as exc:
        _bad_request(exc)
    return BaselineResponse(
        freqs_hz=est.freqs_hz.tolist(),
        psd_db_peak=est.psd_db_peak.tolist(),
        shoulder_bandwidth_hz=analysis.shoulder_bandwidth(est),
    )
