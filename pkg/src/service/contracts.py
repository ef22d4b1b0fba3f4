"""Response schema of the inference service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

MELANOMA_THRESHOLD = 0.5


class PredictionResponse(BaseModel):
    probability_melanoma: float = Field(ge=0.0, le=1.0)
    label: Literal["melanoma", "non_melanoma"]
    model_version: str
    heatmap_png: Optional[str] = None  # base64 PNG

    @model_validator(mode="after")
    def _label_matches_threshold(self) -> "PredictionResponse":
        expected = "melanoma" if self.probability_melanoma >= MELANOMA_THRESHOLD else "non_melanoma"
        if self.label != expected:
            raise ValueError(
                f"label '{self.label}' contradicts probability {self.probability_melanoma}"
            )
        return self

    @classmethod
    def from_probability(
        cls, probability: float, model_version: str, heatmap_png: Optional[str] = None
    ) -> "PredictionResponse":
        return cls(
            probability_melanoma=probability,
            label="melanoma" if probability >= MELANOMA_THRESHOLD else "non_melanoma",
            model_version=model_version,
            heatmap_png=heatmap_png,
        )
