"""Confusion counts, the four evaluation metrics, and reference-table checks.

Metric definitions: precision = tp/(tp+fp), recall = tp/(tp+fn),
accuracy = (tp+tn)/(tp+tn+fp+fn), f1 = 2tp/(2tp+fp+fn). A 0/0 denominator
yields 0.0 and the metric's name lands in the `degenerate` set. Accuracy
deliberately uses the count sum, not any externally reported dataset total:
the published per-landmark totals do not equal tp+fn+fp+tn, and the
formula-over-counts reading is the one that reproduces the published
accuracy values. reference_consistency() recomputes every reference row and
reports deltas; two published F1 values exceed 1 and cannot come from the
stated formula (they match 2tp/(tp+fp+fn), a dropped doubling), so they are
surfaced as inconsistencies rather than replicated.
"""

import os
from dataclasses import dataclass

from .errors import DegenerateCounts, MissingLabel

F1_TOLERANCE = 1.0e-6

# Published per-landmark confusion counts: total, tp, fn, fp, tn.
REFERENCE_COUNTS = {
    "Coliseum": (1520, 532, 301, 412, 188),
    "Dome": (1313, 491, 333, 407, 169),
    "Eiffel": (1630, 805, 325, 236, 129),
    "Pyramid": (1330, 612, 455, 285, 113),
    "Statue": (2219, 1569, 331, 216, 103),
    "One Feature": (2833, 1023, 634, 819, 357),
    "Two Features": (2960, 1417, 780, 521, 242),
    "Three Features": (2219, 1569, 331, 216, 103),
}

# Published metric rows: precision, recall, accuracy, f1.
REFERENCE_METRICS = {
    "Coliseum": (0.563559322, 0.638655462, 0.502442428, 0.598761958),
    "Dome": (0.546770601, 0.595873786, 0.471428571, 0.570267131),
    "Eiffel": (0.773294909, 0.712389381, 0.624749164, 0.741593736),
    "Pyramid": (0.682274247, 0.573570759, 0.494880546, 0.623217923),
    "Statue": (0.878991597, 0.825789474, 0.753492564, 1.482986767),
    "One Feature": (0.555374593, 0.617380809, 0.487116131, 0.584738497),
    "Two Features": (0.731166151, 0.644970414, 0.560472973, 1.04267844),
    "Three Features": (0.878991597, 0.825789474, 0.753492564, 1.482986767),
}


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fn: int
    fp: int
    tn: int

    def __post_init__(self):
        for name in ("tp", "fn", "fp", "tn"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer")
        if self.total == 0:
            raise DegenerateCounts("all confusion counts are zero")

    @property
    def total(self):
        return self.tp + self.fn + self.fp + self.tn

    def __add__(self, other):
        return ConfusionCounts(
            tp=self.tp + other.tp,
            fn=self.fn + other.fn,
            fp=self.fp + other.fp,
            tn=self.tn + other.tn,
        )


@dataclass(frozen=True)
class MetricsReport:
    precision: float
    recall: float
    accuracy: float
    f1: float
    degenerate: frozenset = frozenset()

    def to_dict(self):
        return {
            "precision": self.precision,
            "recall": self.recall,
            "accuracy": self.accuracy,
            "f1": self.f1,
            "degenerate": sorted(self.degenerate),
        }


def _ratio(num, den, name, flags):
    if den == 0:
        flags.add(name)
        return 0.0
    return num / den


def compute(c: ConfusionCounts) -> MetricsReport:
    if c.tp + c.fn + c.fp + c.tn == 0:
        raise DegenerateCounts("all confusion counts are zero")
    flags = set()
    return MetricsReport(
        precision=_ratio(c.tp, c.tp + c.fp, "precision", flags),
        recall=_ratio(c.tp, c.tp + c.fn, "recall", flags),
        accuracy=_ratio(c.tp + c.tn, c.total, "accuracy", flags),
        f1=_ratio(2 * c.tp, 2 * c.tp + c.fp + c.fn, "f1", flags),
        degenerate=frozenset(flags),
    )


def _truthy_label(raw: str) -> bool:
    v = raw.strip().lower()
    if v in ("landmark", "positive", "1", "true", "yes"):
        return True
    if v in ("non-landmark", "nonlandmark", "negative", "0", "false", "no"):
        return False
    raise MissingLabel(f"unrecognized label value: {raw!r}")


def confusion_from_run(decisions, labels) -> ConfusionCounts:
    """Tally (path, matched) pairs against ground-truth labels.

    decisions: iterable of (path, matched) where matched is a bool or the
    verdict string. labels: mapping path -> bool/str; lookups fall back to
    the basename so relative/absolute path mixes still resolve.
    """
    norm = {}
    for k, v in labels.items():
        flag = _truthy_label(v) if isinstance(v, str) else bool(v)
        norm[str(k)] = flag
        norm.setdefault(os.path.basename(str(k)), flag)
    tp = fn = fp = tn = 0
    for path, matched in decisions:
        if isinstance(matched, str):
            matched = matched.strip().lower() == "matched"
        key = str(path)
        if key in norm:
            is_landmark = norm[key]
        elif os.path.basename(key) in norm:
            is_landmark = norm[os.path.basename(key)]
        else:
            raise MissingLabel(f"no ground-truth label for {path}")
        if matched and is_landmark:
            tp += 1
        elif matched:
            fp += 1
        elif is_landmark:
            fn += 1
        else:
            tn += 1
    return ConfusionCounts(tp=tp, fn=fn, fp=fp, tn=tn)


def reference_consistency() -> dict:
    """Recompute every published row; report per-metric deltas.

    A row is consistent when all four recomputed metrics sit within 1e-6 of
    the printed values. The known exceptions are the two F1 entries.
    """
    rows = {}
    for name, (total, tp, fn, fp, tn) in REFERENCE_COUNTS.items():
        counts = ConfusionCounts(tp=tp, fn=fn, fp=fp, tn=tn)
        rep = compute(counts)
        stated = REFERENCE_METRICS[name]
        computed = (rep.precision, rep.recall, rep.accuracy, rep.f1)
        deltas = [comp - stat for comp, stat in zip(computed, stated)]
        rows[name] = {
            "counts": {"tp": tp, "fn": fn, "fp": fp, "tn": tn},
            "published_total": total,
            "count_sum": counts.total,
            "computed": dict(zip(("precision", "recall", "accuracy", "f1"), computed)),
            "published": dict(zip(("precision", "recall", "accuracy", "f1"), stated)),
            "max_abs_delta": max(abs(d) for d in deltas),
            "consistent": all(abs(d) <= F1_TOLERANCE for d in deltas),
        }
    return rows
