"""Command-line surface: one subcommand per pipeline stage plus `run`/`fixture`.

Exit codes: 0 success, 2 configuration error, 3 data error. Unreadable
images inside batch commands are logged and skipped, not fatal.
"""

import argparse
import csv
import json
import logging
import shutil
import sys
from pathlib import Path

import numpy as np

from . import imgio
from .classify import classify_raw
from .errors import (
    ConfigError,
    GaborsetError,
    SkippedImage,
    StageError,
)
from .features import extract_features
from .fixture import generate_fixture
from .gabor import DEFAULT_FREQUENCIES, default_orientations, make_bank
from .network import (
    TrainingSet,
    load_model,
    save_model,
    scg_train,
)
from .pipeline import (
    evaluate_run,
    load_config,
    load_manifest,
    read_decisions_csv,
    read_labels_csv,
    run_pipeline,
    write_decisions_csv,
)
from .preprocess import AheParams, equalize_adaptive, normalize, resize, to_grayscale

log = logging.getLogger("gaborset")


def _bank_from_config_path(path):
    """Accept a full landmark config or a bare bank/preprocess document."""
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read bank config {path}: {exc}") from exc
    if "candidate_features" in doc:
        cfg = load_config(path)
        return cfg.bank.build(), cfg.preprocess
    from .pipeline import BankConfig, DEFAULT_COMMON_SIZE, PreprocessConfig

    bank_doc = doc.get("bank", doc)
    try:
        orientations = bank_doc.get("orientations")
        if isinstance(orientations, int):
            orientations = default_orientations(orientations)
        elif orientations is not None:
            orientations = tuple(float(t) for t in orientations)
        kwargs = {}
        if "frequencies" in bank_doc:
            kwargs["frequencies"] = tuple(float(f) for f in bank_doc["frequencies"])
        if orientations is not None:
            kwargs["orientations"] = orientations
        if "size" in bank_doc:
            kwargs["size"] = int(bank_doc["size"])
        if "envelope_ratio" in bank_doc:
            kwargs["envelope_ratio"] = float(bank_doc["envelope_ratio"])
        bank_cfg = BankConfig(**kwargs)
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
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"bad bank config {path}: {exc}") from exc
    return bank_cfg.build(), pre


def cmd_preprocess(args):
    ahe = AheParams(tiles_x=args.tiles, tiles_y=args.tiles, clip_limit=args.clip, bins=args.bins)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    n = 0
    for p in imgio.list_images(args.in_dir):
        try:
            raw = imgio.load_image(p)
        except SkippedImage as exc:
            log.warning("%s", exc)
            continue
        stage = equalize_adaptive(resize(to_grayscale(raw), args.size), ahe)
        imgio.save_gray(out_dir / (p.stem + ".png"), stage)
        n += 1
    print(f"preprocessed {n} images -> {out_dir}")
    return 0


def _to_display(arr, bipolar):
    if bipolar:
        m = np.abs(arr).max()
        return 127.5 + (127.5 * arr / m if m > 0 else 0.0)
    m = arr.max()
    return 255.0 * arr / m if m > 0 else np.zeros_like(arr)


def cmd_gen_kernels(args):
    freqs = (
        tuple(float(f) for f in args.frequencies.split(","))
        if args.frequencies
        else DEFAULT_FREQUENCIES
    )
    bank = make_bank(
        frequencies=freqs,
        orientations=default_orientations(args.orientations),
        size=args.size,
        envelope_ratio=args.ratio,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, k in enumerate(bank.kernels):
        tag = f"k{i:03d}_f{k.params.f0:.3f}_t{k.params.theta:.3f}"
        imgio.save_gray(out_dir / f"{tag}_real.png", _to_display(k.data.real, True))
        imgio.save_gray(out_dir / f"{tag}_imag.png", _to_display(k.data.imag, True))
        imgio.save_gray(out_dir / f"{tag}_mag.png", _to_display(np.abs(k.data), False))
    print(f"wrote {3 * len(bank.kernels)} kernel images -> {out_dir}")
    return 0


def cmd_extract(args):
    bank, pre = _bank_from_config_path(args.bank)
    rows = []
    for p in imgio.list_images(args.in_dir):
        try:
            raw = imgio.load_image(p)
        except SkippedImage as exc:
            log.warning("%s", exc)
            continue
        img = normalize(equalize_adaptive(resize(to_grayscale(raw), pre.size), pre.ahe))
        vec = extract_features(img, bank)
        rows.append((str(p), vec))
        if args.dump_maps:
            from .features import response_maps

            maps_dir = Path(args.dump_maps)
            maps_dir.mkdir(parents=True, exist_ok=True)
            mags = np.abs(response_maps(img, bank))
            for ki in range(mags.shape[0]):
                imgio.save_gray(
                    maps_dir / f"{p.stem}_k{ki:03d}.png", _to_display(mags[ki], False)
                )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    with out.open("w", newline="") as fh:
        wr = csv.writer(fh)
        dim = len(rows[0][1]) if rows else 2 * len(bank.kernels)
        wr.writerow(["path"] + [f"f_{i}" for i in range(dim)])
        for path, vec in rows:
            wr.writerow([path] + [repr(float(v)) for v in vec])
    print(f"extracted {len(rows)} feature vectors -> {out}")
    return 0


def _read_features_csv(path):
    with Path(path).open(newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd, None)
        if not header or header[0] != "path":
            raise ConfigError(f"{path} is not a features csv")
        rows = [(r[0], np.array([float(v) for v in r[1:]])) for r in rd]
    return rows


def _target_from_label(raw, n):
    v = raw.strip().lower()
    t = -np.ones(n)
    if v in ("non-landmark", "nonlandmark", "negative", "none", "-1"):
        return t
    if v in ("landmark", "positive") and n == 1:
        t[0] = 1.0
        return t
    try:
        idx = int(v)
    except ValueError:
        raise ConfigError(f"label {raw!r} is not a feature index or negative marker")
    if not 0 <= idx < n:
        raise ConfigError(f"feature index {idx} out of range for {n} outputs")
    t[idx] = 1.0
    return t


def cmd_train(args):
    cfg = load_config(args.config)
    feats = _read_features_csv(args.features)
    labels = read_labels_csv(args.labels)
    n = cfg.n_outputs
    pats, targs = [], []
    for path, vec in feats:
        key = path if path in labels else Path(path).name
        if key not in labels:
            raise ConfigError(f"no label for {path}")
        pats.append(vec)
        targs.append(_target_from_label(labels[key], n))
    tset = TrainingSet(patterns=np.stack(pats), targets=np.stack(targs))
    model, report = scg_train(tset, cfg.train)
    save_model(args.out, model, report)
    print(
        f"trained {model.n_inputs}->{model.n_hidden}->{model.n_outputs} "
        f"in {report.epochs_run} epochs (stop: {report.stop_reason}, "
        f"perf {report.final_perf:.6g}) -> {args.out}"
    )
    return 0


def cmd_classify(args):
    bank, pre = _bank_from_config_path(args.bank)
    model = load_model(args.model)
    matched_dir = Path(args.matched)
    unmatched_dir = Path(args.unmatched)
    matched_dir.mkdir(parents=True, exist_ok=True)
    unmatched_dir.mkdir(parents=True, exist_ok=True)
    decisions = []
    for p in imgio.list_images(args.in_dir):
        try:
            raw = imgio.load_image(p)
        except SkippedImage as exc:
            log.warning("%s", exc)
            continue
        d = classify_raw(raw, model, bank, pre.size, pre.ahe, args.threshold, args.scan)
        decisions.append((p, d))
        shutil.copy2(p, (matched_dir if d.matched else unmatched_dir) / p.name)
    write_decisions_csv(args.decisions, decisions)
    n_match = sum(1 for _, d in decisions if d.matched)
    print(
        f"classified {len(decisions)} images: {n_match} matched, "
        f"{len(decisions) - n_match} unmatched -> {args.decisions}"
    )
    return 0


def cmd_evaluate(args):
    decisions = read_decisions_csv(args.decisions)
    labels = read_labels_csv(args.labels)
    report = evaluate_run(decisions, labels)
    Path(args.report).parent.mkdir(parents=True, exist_ok=True)
    Path(args.report).write_text(json.dumps(report, indent=1))
    m = report["metrics"]
    print(
        f"counts {report['counts']} precision {m['precision']:.6f} recall "
        f"{m['recall']:.6f} accuracy {m['accuracy']:.6f} f1 {m['f1']:.6f}"
    )
    if "paper_consistency" in report:
        row = report["paper_consistency"]
        print(f"reference row: {row['row']} (consistent: {row['consistent']})")
    return 0


def cmd_run(args):
    cfg = load_config(args.config)
    manifest = load_manifest(args.data)
    labels = read_labels_csv(args.labels) if args.labels else None
    report = run_pipeline(cfg, manifest, args.out, labels=labels, workers=args.workers)
    c = report["counts"]
    line = (
        f"run complete: {c['matched']} matched / {c['unmatched']} unmatched "
        f"of {c['test_images']} (train stop: {report['train_report']['stop_reason']})"
    )
    if "evaluation" in report:
        line += f", accuracy {report['evaluation']['metrics']['accuracy']:.4f}"
    print(line)
    return 0


def cmd_fixture(args):
    info = generate_fixture(
        args.out,
        seed=args.seed,
        n_pos=args.positives,
        n_neg=args.negatives,
        n_test_pos=args.test_positives,
        n_test_neg=args.test_negatives,
    )
    print(
        f"fixture at {info['root']}: {info['train_images']} train / "
        f"{info['test_images']} test images (seed {info['seed']})"
    )
    return 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="gaborset",
        description="Gabor-feature landmark image selection toolkit",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("preprocess", help="grayscale, resize, and equalize a folder")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--tiles", type=int, default=8)
    p.add_argument("--clip", type=float, default=0.01)
    p.add_argument("--bins", type=int, default=256)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("gen-kernels", help="dump kernel real/imag/magnitude images")
    p.add_argument("--out", required=True)
    p.add_argument("--frequencies", default="")
    p.add_argument("--orientations", type=int, default=10)
    p.add_argument("--size", type=int, default=31)
    p.add_argument("--ratio", type=float, default=1.0)
    p.set_defaults(func=cmd_gen_kernels)

    p = sub.add_parser("extract", help="feature vectors for every image in a folder")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--bank", required=True, help="config file with bank/preprocess")
    p.add_argument("--out", required=True)
    p.add_argument("--dump-maps", default="")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="train the network on extracted features")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", help="sort a folder into matched/unmatched")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--bank", required=True)
    p.add_argument("--matched", required=True)
    p.add_argument("--unmatched", required=True)
    p.add_argument("--threshold", type=float, default=0.8)
    p.add_argument("--scan", choices=("off", "grid3"), default="off")
    p.add_argument("--decisions", default="decisions.csv")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="metrics from decisions + ground truth")
    p.add_argument("--decisions", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("run", help="full pipeline: ingest, train, classify, report")
    p.add_argument("--config", required=True)
    p.add_argument("--data", required=True, help="dataset manifest json")
    p.add_argument("--out", required=True)
    p.add_argument("--labels", default="")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("fixture", help="emit the synthetic acceptance dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=1234)
    p.add_argument("--positives", type=int, default=120)
    p.add_argument("--negatives", type=int, default=50)
    p.add_argument("--test-positives", type=int, default=50)
    p.add_argument("--test-negatives", type=int, default=50)
    p.set_defaults(func=cmd_fixture)

    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        log.error("%s", exc)
        return 2
    except StageError as exc:
        log.error("%s", exc)
        return 2 if isinstance(exc.cause, ConfigError) else 3
    except GaborsetError as exc:
        log.error("%s", exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
