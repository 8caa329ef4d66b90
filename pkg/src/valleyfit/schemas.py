"""Pydantic request/response models for the analysis service wire format."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class AxisModel(BaseModel):
    values: list[float]
    label: str = ""
    unit: str = ""


class SpectrumUpload(BaseModel):
    bias: AxisModel
    freq: AxisModel
    amplitude: list[list[float]]
    metadata: dict[str, str] = Field(default_factory=dict)
    negate: bool = False


class FilterRequest(BaseModel):
    scales: list[float] = Field(default=[1.0, 2.0, 4.0])
    auto_select: bool = False
    level: float = 0.25
    min_length: int = 20


class ContourQuery(BaseModel):
    level: float = 0.25
    min_length: int = 20


class AssignmentModel(BaseModel):
    groups: dict[str, list[int]]
    transitions: dict[str, str] = Field(default_factory=dict)
    ignored: list[int] = Field(default_factory=list)


class ExtractRequest(BaseModel):
    method: str = "region-min"
    halfwidth_rows: int = 5
    halfwidth_cols: int = 1


class FitRequest(BaseModel):
    model: str                                  # 'rabi' | 'circuit'
    initial: dict[str, float]
    fock: int = 13
    frozen: list[str] = Field(default_factory=list)
    maxfev: Optional[list[int]] = None
    schedule: Optional[list[list[int]]] = None  # circuit charge stages
    qubit_space: int = 25
    kappa: Optional[float] = None               # bias current -> flux slope, 1/mA
    I0: Optional[float] = None
    n_points: int = 21                          # sampled Rabi-curve points (circuit)
    bias_is_flux: bool = False


class SessionSummary(BaseModel):
    id: str
    stage: str
    shape: Optional[list[int]] = None
    n_contours: Optional[int] = None
    n_peaks: Optional[int] = None
    fit_status: dict[str, str] = Field(default_factory=dict)


class ErrorBody(BaseModel):
    error: str
    message: str
    field: Optional[str] = None
