"""Scorer registry: tiny models behind one interface.

A model is anything with a ``spec`` string (reported by /health) and a
``score(prompt, image_bytes) -> float`` method. The constant stub never
touches the image bytes, which makes the wire protocol testable with no
decoding at all; meangray actually opens the PNG so integration tests
exercise the full payload path.
"""

from __future__ import annotations

import io
import math

from PIL import Image, ImageStat


class ModelError(ValueError):
    """Unusable model specification."""


class ConstantModel:
    """Returns one fixed score for every image, prompt ignored."""

    def __init__(self, value: float):
        if not math.isfinite(value):
            raise ModelError(f"constant must be finite, got {value!r}")
        self.value = float(value)
        self.spec = f"constant:{self.value}"

    def score(self, prompt: str, image_bytes: bytes) -> float:
        return self.value


class MeanGrayModel:
    """Mean luminance of the decoded image, scaled to [0, 1]."""

    spec = "meangray"

    def score(self, prompt: str, image_bytes: bytes) -> float:
        img = Image.open(io.BytesIO(image_bytes)).convert("L")
        return ImageStat.Stat(img).mean[0] / 255.0


def load_model(spec: str):
    """``constant:<x>`` or ``meangray``; anything else is a ModelError."""
    if spec.startswith("constant:"):
        raw = spec.split(":", 1)[1]
        try:
            value = float(raw)
        except ValueError as exc:
            raise ModelError(f"bad constant {raw!r}") from exc
        return ConstantModel(value)
    if spec == "meangray":
        return MeanGrayModel()
    raise ModelError(
        f"unknown model spec {spec!r}; use constant:<x> or meangray")
