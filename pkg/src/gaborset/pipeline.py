"""Landmark configuration, dataset ingestion, and full-run orchestration.

Config files are JSON; see README for the schema. The environment variable
GABORSET_SEED, when set, overrides the training seed from any loaded config.
All directory traversals are sorted, so reruns are bit-identical.
"""

import csv
import json
import logging
import os
import shutil
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import imgio
from .classify import DEFAULT_THRESHOLD, classify_raw
from .errors import (
    ConfigError,
    DataError,
    InvalidTrainingSet,
    SkippedImage,
    StageError,
)
from .features import extract_features
from .gabor import (
    DEFAULT_ENVELOPE_RATIO,
    DEFAULT_FREQUENCIES,
    DEFAULT_KERNEL_SIZE,
    GaborBank,
    default_orientations,
    make_bank,
)
from .metrics import REFERENCE_COUNTS, compute, confusion_from_run, reference_consistency
from .network import TrainConfig, TrainingSet, forward, save_model, scg_train
from .preprocess import AheParams, RawImage, equalize_adaptive, normalize, resize, to_grayscale

log = logging.getLogger("gaborset")

SEED_ENV_VAR = "GABORSET_SEED"
DEFAULT_COMMON_SIZE = 128


@dataclass(frozen=True)
class RoiSpec:
    """Fractional crop rectangle tied to one output neuron."""

    x: float
    y: float
    w: float
    h: float
    feature_index: int

    def __post_init__(self):
        if self.w <= 0 or self.h <= 0:
            raise ConfigError("ROI width and height must be positive")
        if self.x < 0 or self.y < 0 or self.x + self.w > 1 or self.y + self.h > 1:
            raise ConfigError("ROI must lie inside the unit square")
        if self.feature_index < 0:
            raise ConfigError("feature_index must be >= 0")


@dataclass(frozen=True)
class BankConfig:
    frequencies: tuple = DEFAULT_FREQUENCIES
    orientations: tuple = None
    size: int = DEFAULT_KERNEL_SIZE
    envelope_ratio: float = DEFAULT_ENVELOPE_RATIO

    def __post_init__(self):
        if self.orientations is None:
            object.__setattr__(self, "orientations", default_orientations())

    def build(self) -> GaborBank:
        return make_bank(self.frequencies, self.orientations, self.size, self.envelope_ratio)


@dataclass(frozen=True)
class PreprocessConfig:
    size: int = DEFAULT_COMMON_SIZE
    ahe: AheParams = AheParams()

    def __post_init__(self):
        if self.size < 8:
            raise ConfigError("common size must be >= 8")


@dataclass(frozen=True)
class LandmarkConfig:
    name: str
    candidate_features: tuple
    bank: BankConfig = BankConfig()
    preprocess: PreprocessConfig = PreprocessConfig()
    train: TrainConfig = TrainConfig()
    threshold: float = DEFAULT_THRESHOLD
    scan: str = "off"

    def __post_init__(self):
        n = len(self.candidate_features)
        if not 1 <= n <= 8:
            raise ConfigError("need between 1 and 8 candidate features")
        idx = sorted(r.feature_index for r in self.candidate_features)
        if idx != list(range(n)):
            raise ConfigError("feature_index values must cover 0..N-1 exactly")
        if self.scan not in ("off", "grid3"):
            raise ConfigError(f"unknown scan mode {self.scan!r}")

    @property
    def n_outputs(self):
        return len(self.candidate_features)


@dataclass(frozen=True)
class DatasetManifest:
    feature_dirs: tuple
    nonfeature_dir: str
    test_dir: str

    def __post_init__(self):
        if len(self.feature_dirs) < 1:
            raise DataError("manifest needs at least one feature directory")
        for d in (*self.feature_dirs, self.nonfeature_dir, self.test_dir):
            if not Path(d).is_dir():
                raise DataError(f"not a directory: {d}")


def serialize_config(cfg: LandmarkConfig) -> dict:
    return {
        "name": cfg.name,
        "candidate_features": [
            {"x": r.x, "y": r.y, "w": r.w, "h": r.h, "feature_index": r.feature_index}
            for r in cfg.candidate_features
        ],
        "bank": {
            "frequencies": list(cfg.bank.frequencies),
            "orientations": list(cfg.bank.orientations),
            "size": cfg.bank.size,
            "envelope_ratio": cfg.bank.envelope_ratio,
        },
        "preprocess": {
            "size": cfg.preprocess.size,
            "tiles_x": cfg.preprocess.ahe.tiles_x,
            "tiles_y": cfg.preprocess.ahe.tiles_y,
            "clip_limit": cfg.preprocess.ahe.clip_limit,
            "bins": cfg.preprocess.ahe.bins,
        },
        "train": {
            "hidden": cfg.train.hidden,
            "reg_gamma": cfg.train.reg_gamma,
            "max_epochs": cfg.train.max_epochs,
            "mse_goal": cfg.train.mse_goal,
            "grad_goal": cfg.train.grad_goal,
            "seed": cfg.train.seed,
            "sigma0": cfg.train.sigma0,
            "lambda0": cfg.train.lambda0,
        },
        "threshold": cfg.threshold,
        "scan": cfg.scan,
    }


def parse_config(doc: dict) -> LandmarkConfig:
    """Build a LandmarkConfig from a JSON document, applying the seed override."""
    try:
        rois = tuple(
            RoiSpec(
                x=float(r["x"]),
                y=float(r["y"]),
                w=float(r["w"]),
                h=float(r["h"]),
                feature_index=int(r["feature_index"]),
            )
            for r in doc["candidate_features"]
        )
        bank_doc = doc.get("bank", {})
        orientations = bank_doc.get("orientations")
        if isinstance(orientations, int):
            orientations = default_orientations(orientations)
        elif orientations is not None:
            orientations = tuple(float(t) for t in orientations)
        bank = BankConfig(
            frequencies=tuple(float(f) for f in bank_doc.get("frequencies", DEFAULT_FREQUENCIES)),
            orientations=orientations,
            size=int(bank_doc.get("size", DEFAULT_KERNEL_SIZE)),
            envelope_ratio=float(bank_doc.get("envelope_ratio", DEFAULT_ENVELOPE_RATIO)),
        )
        pre_doc = doc.get("preprocess", {})
        pre = PreprocessConfig(
            size=int(pre_doc.get("size", DEFAULT_COMMON_SIZE)),
            ahe=AheParams(
                tiles_x=int(pre_doc.get("tiles_x", 8)),
                tiles_y=int(pre_doc.get("tiles_y", 8)),
                clip_limit=float(pre_doc.get("clip_limit", 0.01)),
                bins=int(pre_doc.get("bins", 256)),
            ),
        )
        tr_doc = doc.get("train", {})
        train = TrainConfig(
            hidden=int(tr_doc.get("hidden", 25)),
            reg_gamma=float(tr_doc.get("reg_gamma", 0.9)),
            max_epochs=int(tr_doc.get("max_epochs", 300)),
            mse_goal=float(tr_doc.get("mse_goal", 3.0e-4)),
            grad_goal=float(tr_doc.get("grad_goal", 1.0e-6)),
            seed=int(tr_doc.get("seed", 0)),
            sigma0=float(tr_doc.get("sigma0", 1.0e-5)),
            lambda0=float(tr_doc.get("lambda0", 1.0e-7)),
        )
        cfg = LandmarkConfig(
            name=str(doc.get("name", "landmark")),
            candidate_features=rois,
            bank=bank,
            preprocess=pre,
            train=train,
            threshold=float(doc.get("threshold", DEFAULT_THRESHOLD)),
            scan=str(doc.get("scan", "off")),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad config document: {exc}") from exc
    return apply_seed_override(cfg)


def apply_seed_override(cfg: LandmarkConfig) -> LandmarkConfig:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or raw == "":
        return cfg
    try:
        seed = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from exc
    return replace(cfg, train=replace(cfg.train, seed=seed))


def load_config(path) -> LandmarkConfig:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(doc)


def load_manifest(path) -> DatasetManifest:
    try:
        doc = json.loads(Path(path).read_text())
        base = Path(path).resolve().parent
        rel = lambda d: str((base / d).resolve()) if not Path(d).is_absolute() else str(d)
        return DatasetManifest(
            feature_dirs=tuple(rel(d) for d in doc["feature_dirs"]),
            nonfeature_dir=rel(doc["nonfeature_dir"]),
            test_dir=rel(doc["test_dir"]),
        )
    except OSError as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from exc
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise DataError(f"bad manifest {path}: {exc}") from exc


def _preprocess_gray(gray: RawImage, pre: PreprocessConfig) -> np.ndarray:
    return normalize(equalize_adaptive(resize(gray, pre.size), pre.ahe))


def ingest(cfg: LandmarkConfig, manifest: DatasetManifest, skipped=None) -> TrainingSet:
    """Build the training set: ROI-cropped positives plus whole negatives.

    Traversal is sorted per directory; feature directories are visited in
    feature_index order. Unreadable files are logged and appended to
    `skipped` when a list is passed.
    """
    if len(manifest.feature_dirs) != cfg.n_outputs:
        raise DataError(
            f"manifest has {len(manifest.feature_dirs)} feature dirs, "
            f"config expects {cfg.n_outputs}"
        )
    bank = cfg.bank.build()
    n = cfg.n_outputs
    rois = sorted(cfg.candidate_features, key=lambda r: r.feature_index)
    rows = []
    targets = []

    def note_skip(exc):
        log.warning("%s", exc)
        if skipped is not None:
            skipped.append(exc.path)

    for roi, d in zip(rois, manifest.feature_dirs):
        count = 0
        for p in imgio.list_images(d):
            try:
                raw = imgio.load_image(p)
            except SkippedImage as exc:
                note_skip(exc)
                continue
            gray = imgio.crop_roi(to_grayscale(raw), roi)
            rows.append(extract_features(_preprocess_gray(gray, cfg.preprocess), bank))
            t = -np.ones(n)
            t[roi.feature_index] = 1.0
            targets.append(t)
            count += 1
        if count == 0:
            raise InvalidTrainingSet(f"no usable images in feature dir {d}")
    for p in imgio.list_images(manifest.nonfeature_dir):
        try:
            raw = imgio.load_image(p)
        except SkippedImage as exc:
            note_skip(exc)
            continue
        rows.append(extract_features(_preprocess_gray(to_grayscale(raw), cfg.preprocess), bank))
        targets.append(-np.ones(n))
    if not rows:
        raise InvalidTrainingSet("ingest produced no patterns")
    return TrainingSet(patterns=np.stack(rows), targets=np.stack(targets))


def classify_directory(
    cfg: LandmarkConfig, model, bank: GaborBank, test_dir, skipped=None, workers: int = 1
):
    """Decisions for every readable image under test_dir, sorted order."""
    paths = imgio.list_images(test_dir)

    def one(p):
        try:
            raw = imgio.load_image(p)
        except SkippedImage as exc:
            return exc
        return classify_raw(
            raw, model, bank, cfg.preprocess.size, cfg.preprocess.ahe,
            cfg.threshold, cfg.scan,
        )

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, paths))
    else:
        results = [one(p) for p in paths]

    out = []
    for p, res in zip(paths, results):
        if isinstance(res, SkippedImage):
            log.warning("%s", res)
            if skipped is not None:
                skipped.append(res.path)
        else:
            out.append((p, res))
    return out


def write_decisions_csv(path, decisions):
    """decisions: list of (path, ClassificationDecision); header matches N."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh)
        if decisions:
            n = len(decisions[0][1].outputs)
        else:
            n = 0
        header = (
            ["path"]
            + [f"output_{i}" for i in range(n)]
            + [f"factor_{i}" for i in range(n)]
            + ["verdict"]
        )
        wr.writerow(header)
        for p, d in decisions:
            wr.writerow(
                [str(p)]
                + [repr(float(v)) for v in d.outputs]
                + [int(f) for f in d.detection_factors]
                + [d.verdict]
            )


def read_decisions_csv(path):
    """Back to (path, verdict) pairs; tolerates any output column count."""
    with Path(path).open(newline="") as fh:
        rd = csv.DictReader(fh)
        if rd.fieldnames is None or "path" not in rd.fieldnames or "verdict" not in rd.fieldnames:
            raise DataError(f"{path} is not a decisions csv")
        return [(row["path"], row["verdict"]) for row in rd]


def read_labels_csv(path):
    with Path(path).open(newline="") as fh:
        rd = csv.DictReader(fh)
        if rd.fieldnames is None or "path" not in rd.fieldnames or "label" not in rd.fieldnames:
            raise DataError(f"{path} is not a labels csv")
        return {row["path"]: row["label"] for row in rd}


def write_labels_csv(path, labels):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["path", "label"])
        for p in sorted(labels):
            wr.writerow([str(p), labels[p]])


def evaluate_run(decisions, labels) -> dict:
    """Confusion + metrics from (path, verdict) pairs and a label mapping.

    When the resulting counts coincide with a published reference row, the
    report gains a paper_consistency section for that row.
    """
    counts = confusion_from_run(decisions, labels)
    rep = compute(counts)
    out = {
        "counts": {"tp": counts.tp, "fn": counts.fn, "fp": counts.fp, "tn": counts.tn},
        "metrics": rep.to_dict(),
    }
    key = (counts.tp, counts.fn, counts.fp, counts.tn)
    for name, (_, tp, fn, fp, tn) in REFERENCE_COUNTS.items():
        if key == (tp, fn, fp, tn):
            out["paper_consistency"] = {"row": name, **reference_consistency()[name]}
            break
    return out


def run_pipeline(
    cfg: LandmarkConfig, manifest: DatasetManifest, out_dir, labels=None, workers: int = 1
) -> dict:
    """ingest -> train -> classify -> evaluate; writes all artifacts to out_dir.

    Any stage failure removes this run's partial outputs and raises
    StageError. Returns the report dict (also written to report.json).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    created = []
    matched_dir = out_dir / "matched"
    unmatched_dir = out_dir / "unmatched"

    def fail(stage, exc):
        for p in created:
            if Path(p).is_file():
                Path(p).unlink(missing_ok=True)
        for d in (matched_dir, unmatched_dir):
            if d.is_dir():
                shutil.rmtree(d, ignore_errors=True)
        raise StageError(stage, exc) from exc

    skipped_train, skipped_test = [], []
    try:
        tset = ingest(cfg, manifest, skipped=skipped_train)
    except Exception as exc:
        fail("ingest", exc)
    try:
        model, train_report = scg_train(tset, cfg.train)
        model_path = out_dir / "model.json"
        save_model(model_path, model, train_report)
        created.append(model_path)
    except Exception as exc:
        fail("train", exc)
    try:
        bank = cfg.bank.build()
        decisions = classify_directory(
            cfg, model, bank, manifest.test_dir, skipped=skipped_test, workers=workers
        )
        matched_dir.mkdir(exist_ok=True)
        unmatched_dir.mkdir(exist_ok=True)
        for p, d in decisions:
            shutil.copy2(p, (matched_dir if d.matched else unmatched_dir) / Path(p).name)
        dec_path = out_dir / "decisions.csv"
        write_decisions_csv(dec_path, decisions)
        created.append(dec_path)
    except Exception as exc:
        fail("classify", exc)
    try:
        report = {
            "name": cfg.name,
            "n_outputs": cfg.n_outputs,
            "n_train_patterns": tset.n_patterns,
            "feature_dim": int(tset.patterns.shape[1]),
            "train_report": train_report.to_dict(),
            "counts": {
                "test_images": len(decisions) + len(skipped_test),
                "matched": sum(1 for _, d in decisions if d.matched),
                "unmatched": sum(1 for _, d in decisions if not d.matched),
                "skipped_train": len(skipped_train),
                "skipped_test": len(skipped_test),
            },
            "skipped": {"train": skipped_train, "test": skipped_test},
            "confident_absence_total": int(
                sum(int(d.confident_absence.sum()) for _, d in decisions)
            ),
        }
        if labels is not None:
            report["evaluation"] = evaluate_run(
                [(p, d.verdict) for p, d in decisions], labels
            )
        report_path = out_dir / "report.json"
        report_path.write_text(json.dumps(report, indent=1))
        created.append(report_path)
    except Exception as exc:
        fail("evaluate", exc)
    return report
