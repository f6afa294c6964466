"""File I/O helpers: decoding, deterministic directory listing, ROI cropping."""

from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import InvalidImage, SkippedImage
from .preprocess import RawImage

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp")


def load_image(path) -> RawImage:
    """Decode an image file to a uint8 RawImage (grayscale kept, else RGB).

    Unreadable or corrupt files raise SkippedImage carrying the original
    error, so batch callers can log and move on.
    """
    path = Path(path)
    try:
        with Image.open(path) as im:
            if im.mode == "L":
                arr = np.asarray(im, dtype=np.uint8)
            else:
                arr = np.asarray(im.convert("RGB"), dtype=np.uint8)
    except (OSError, UnidentifiedImageError, ValueError) as exc:
        raise SkippedImage(str(path), exc) from exc
    try:
        return RawImage(arr)
    except InvalidImage as exc:
        raise SkippedImage(str(path), exc) from exc


def list_images(directory) -> list:
    """All image files directly under `directory`, sorted by path name."""
    directory = Path(directory)
    out = [
        p
        for p in directory.iterdir()
        if p.is_file() and p.suffix.lower() in IMAGE_EXTENSIONS
    ]
    return sorted(out)


def crop_roi(img: RawImage, roi) -> RawImage:
    """Crop a fractional (x, y, w, h) region; accepts a tuple or RoiSpec-like.

    Fractions are mapped to pixel edges with round(); the crop always keeps
    at least one row and one column.
    """
    if hasattr(roi, "x"):
        x, y, w, h = roi.x, roi.y, roi.w, roi.h
    else:
        x, y, w, h = roi
    iw, ih = img.width, img.height
    x0 = int(round(x * iw))
    y0 = int(round(y * ih))
    x1 = int(round((x + w) * iw))
    y1 = int(round((y + h) * ih))
    x0 = min(max(x0, 0), iw - 1)
    y0 = min(max(y0, 0), ih - 1)
    x1 = min(max(x1, x0 + 1), iw)
    y1 = min(max(y1, y0 + 1), ih)
    return RawImage(np.ascontiguousarray(img.data[y0:y1, x0:x1]))


def save_gray(path, arr: np.ndarray):
    """Write a 2-D float array as an 8-bit grayscale image (values clipped)."""
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidImage("save_gray expects a 2-D array")
    data = np.clip(np.round(arr), 0.0, 255.0).astype(np.uint8)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(data, mode="L").save(Path(path))
