"""Request/response models for the draft-scoring HTTP service."""

from __future__ import annotations

from datetime import datetime

from pydantic import BaseModel, field_validator

from ..bundle import ImpactForecast
from ..corpus import LinkKind, ProblemKind


class DraftRequest(BaseModel):
    text: str
    link_kind: LinkKind = LinkKind.NONE
    published_at: datetime | None = None  # omitted -> evaluated at request time

    @field_validator("text")
    @classmethod
    def text_not_blank(cls, v: str) -> str:
        if not v.strip():
            raise ValueError("draft text must be non-empty")
        return v


class PredictionOut(BaseModel):
    label: str  # "high" | "low"
    score: float


class FeatureEcho(BaseModel):
    style: dict[str, int]
    behavioral: dict[str, int]


class ForecastResponse(BaseModel):
    predictions: dict[str, PredictionOut]
    model_versions: dict[str, str]
    features: FeatureEcho

    @classmethod
    def from_forecast(cls, forecast: ImpactForecast) -> "ForecastResponse":
        return cls(
            predictions={
                kind.value: PredictionOut(label=forecast.predictions[kind].label.value,
                                          score=forecast.predictions[kind].score)
                for kind in ProblemKind
            },
            model_versions={k.value: v for k, v in forecast.model_versions.items()},
            features=FeatureEcho(style=forecast.style_echo,
                                 behavioral=forecast.behavioral_echo),
        )


class HealthResponse(BaseModel):
    status: str
    models: dict[str, str]
