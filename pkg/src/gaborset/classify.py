"""Matched/unmatched verdicts: threshold each output neuron, AND the factors.

decide() is the single normative rule: detection factor i is 1 iff output i
is >= threshold (0.8 by default, inclusive), the overall matching factor is
the product of the factors, and the verdict is Matched exactly when that
product is 1. Outputs below -0.5 are additionally reported as
"confident absence" per neuron; this is diagnostic only and never affects
the verdict.
"""

from dataclasses import dataclass

import numpy as np

from . import imgio
from .errors import NoCandidateFeatures
from .features import extract_features
from .gabor import GaborBank
from .network import MlpModel, forward
from .preprocess import AheParams, RawImage, equalize_adaptive, normalize, resize, to_grayscale

DEFAULT_THRESHOLD = 0.8
ABSENCE_LEVEL = -0.5

# grid3 scan views: whole image, the four quadrants, and a centered crop
GRID3_VIEWS = (
    (0.0, 0.0, 1.0, 1.0),
    (0.0, 0.0, 0.5, 0.5),
    (0.5, 0.0, 0.5, 0.5),
    (0.0, 0.5, 0.5, 0.5),
    (0.5, 0.5, 0.5, 0.5),
    (0.25, 0.25, 0.5, 0.5),
)


@dataclass(frozen=True)
class ClassificationDecision:
    outputs: np.ndarray
    detection_factors: np.ndarray
    overall_matching: int
    verdict: str
    threshold: float
    confident_absence: np.ndarray

    @property
    def matched(self) -> bool:
        return self.verdict == "Matched"


def decide(outputs, threshold: float = DEFAULT_THRESHOLD) -> ClassificationDecision:
    """Threshold an output vector into factors and a verdict."""
    outputs = np.atleast_1d(np.asarray(outputs, dtype=np.float64))
    if outputs.size == 0:
        raise NoCandidateFeatures("need at least one candidate feature output")
    if not np.all(np.isfinite(outputs)):
        raise ValueError("outputs must be finite")
    factors = (outputs >= threshold).astype(np.int64)
    overall = int(np.prod(factors))
    return ClassificationDecision(
        outputs=outputs,
        detection_factors=factors,
        overall_matching=overall,
        verdict="Matched" if overall == 1 else "Unmatched",
        threshold=float(threshold),
        confident_absence=outputs < ABSENCE_LEVEL,
    )


def _featurize(gray: RawImage, bank: GaborBank, side: int, ahe: AheParams):
    return extract_features(
        normalize(equalize_adaptive(resize(gray, side), ahe)), bank
    )


def classify_raw(
    img: RawImage,
    model: MlpModel,
    bank: GaborBank,
    side: int,
    ahe: AheParams = AheParams(),
    threshold: float = DEFAULT_THRESHOLD,
    scan: str = "off",
) -> ClassificationDecision:
    """Preprocess -> features -> forward -> decide for an in-memory image.

    scan="grid3" featurizes six views (whole, quadrants, center) and keeps
    each output neuron's maximum before thresholding; scan="off" is the
    plain whole-image path.
    """
    gray = to_grayscale(img)
    if scan == "off":
        outputs = forward(model, _featurize(gray, bank, side, ahe))
    elif scan == "grid3":
        per_view = [
            forward(model, _featurize(imgio.crop_roi(gray, v), bank, side, ahe))
            for v in GRID3_VIEWS
        ]
        outputs = np.max(np.stack(per_view), axis=0)
    else:
        raise ValueError(f"unknown scan mode: {scan!r}")
    return decide(outputs, threshold)


def classify_image(
    path,
    model: MlpModel,
    bank: GaborBank,
    side: int,
    ahe: AheParams = AheParams(),
    threshold: float = DEFAULT_THRESHOLD,
    scan: str = "off",
) -> ClassificationDecision:
    """Load a file and classify it; unreadable files raise SkippedImage."""
    return classify_raw(imgio.load_image(path), model, bank, side, ahe, threshold, scan)
