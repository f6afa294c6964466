"""Synthetic acceptance dataset: grating landmarks on noise backgrounds.

Scenes are 128x128. A "landmark" scene carries feature A (grating at
0.125 cycles/px, horizontal carrier) in its top-left quadrant and feature B
(0.2 cycles/px, vertical carrier) in its bottom-right quadrant; both
frequencies and orientations sit exactly on default-bank kernels. The
emitted config crops 64x64 quadrant ROIs and uses common size 64, so
training crops keep their native frequencies, and classification uses the
grid3 scan (quadrant views of a test scene reproduce the training-crop
distribution; a whole-scene resize would halve the spatial periods and move
both gratings off the bank).
"""

import json
from pathlib import Path

import numpy as np

from . import imgio
from .pipeline import (
    BankConfig,
    DatasetManifest,
    LandmarkConfig,
    PreprocessConfig,
    RoiSpec,
    serialize_config,
    write_labels_csv,
)
from .network import TrainConfig
from .preprocess import AheParams

SCENE = 128
QUAD = SCENE // 2
FEATURE_A = {"f0": 0.125, "theta": 0.0}
FEATURE_B = {"f0": 0.2, "theta": np.pi / 2}
PIXEL_NOISE = 6.0


def _grating(rng, side, f0, theta):
    yy, xx = np.mgrid[0:side, 0:side].astype(np.float64)
    phi = rng.uniform(0.0, 2.0 * np.pi)
    amp = rng.uniform(70.0, 110.0)
    arg = 2.0 * np.pi * f0 * (xx * np.cos(theta) + yy * np.sin(theta)) + phi
    return 127.5 + amp * np.cos(arg) + rng.normal(0.0, PIXEL_NOISE, (side, side))


def _noise_scene(rng):
    return rng.uniform(0.0, 255.0, (SCENE, SCENE))


def _landmark_scene(rng):
    img = _noise_scene(rng)
    img[0:QUAD, 0:QUAD] = _grating(rng, QUAD, **FEATURE_A)
    img[QUAD:SCENE, QUAD:SCENE] = _grating(rng, QUAD, **FEATURE_B)
    return img


def _save(path, arr):
    imgio.save_gray(path, np.clip(arr, 0.0, 255.0))


def fixture_config(seed: int) -> LandmarkConfig:
    return LandmarkConfig(
        name="synthetic-grating",
        candidate_features=(
            RoiSpec(x=0.0, y=0.0, w=0.5, h=0.5, feature_index=0),
            RoiSpec(x=0.5, y=0.5, w=0.5, h=0.5, feature_index=1),
        ),
        bank=BankConfig(),
        preprocess=PreprocessConfig(size=QUAD, ahe=AheParams()),
        train=TrainConfig(seed=seed),
        threshold=0.8,
        scan="grid3",
    )


def generate_fixture(
    root,
    seed: int = 1234,
    n_pos: int = 120,
    n_neg: int = 50,
    n_test_pos: int = 50,
    n_test_neg: int = 50,
) -> dict:
    """Write the dataset, config.json, manifest.json, and labels.csv.

    Deterministic for a fixed seed. Returns a summary of what was written.
    """
    root = Path(root)
    rng = np.random.default_rng(seed)
    dirs = {
        "feature_0": root / "train" / "feature_0",
        "feature_1": root / "train" / "feature_1",
        "nonfeature": root / "train" / "nonfeature",
        "test": root / "test",
    }
    for d in dirs.values():
        d.mkdir(parents=True, exist_ok=True)

    for i in range(n_pos):
        _save(dirs["feature_0"] / f"a_{i:03d}.png", _landmark_scene(rng))
    for i in range(n_pos):
        _save(dirs["feature_1"] / f"b_{i:03d}.png", _landmark_scene(rng))
    for i in range(n_neg):
        _save(dirs["nonfeature"] / f"n_{i:03d}.png", _noise_scene(rng))

    labels = {}
    for i in range(n_test_pos):
        name = f"lm_{i:03d}.png"
        _save(dirs["test"] / name, _landmark_scene(rng))
        labels[name] = "landmark"
    for i in range(n_test_neg):
        name = f"bg_{i:03d}.png"
        _save(dirs["test"] / name, _noise_scene(rng))
        labels[name] = "non-landmark"

    cfg = fixture_config(seed)
    (root / "config.json").write_text(json.dumps(serialize_config(cfg), indent=1))
    manifest = {
        "feature_dirs": ["train/feature_0", "train/feature_1"],
        "nonfeature_dir": "train/nonfeature",
        "test_dir": "test",
    }
    (root / "manifest.json").write_text(json.dumps(manifest, indent=1))
    write_labels_csv(root / "labels.csv", labels)
    return {
        "root": str(root),
        "seed": seed,
        "train_images": 2 * n_pos + n_neg,
        "test_images": n_test_pos + n_test_neg,
        "config": str(root / "config.json"),
        "manifest": str(root / "manifest.json"),
        "labels": str(root / "labels.csv"),
    }


def load_fixture(root):
    """(config, manifest, labels) for a directory written by generate_fixture."""
    from .pipeline import load_config, load_manifest, read_labels_csv

    root = Path(root)
    return (
        load_config(root / "config.json"),
        load_manifest(root / "manifest.json"),
        read_labels_csv(root / "labels.csv"),
    )
