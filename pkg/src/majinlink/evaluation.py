"""Stratified sampling of candidates, label bookkeeping, and bootstrap
precision/recall/retention curves versus the title-score threshold.

Unknown labels are treated as inconclusive: they never enter precision or
recall, but the candidates stay in the retention denominator.
"""
from __future__ import annotations

import json
import logging
import random
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Optional, Protocol, Sequence

import numpy as np

log = logging.getLogger(__name__)

CandidateKey = tuple[str, str]


class ScoredCandidate(Protocol):
    """Anything carrying a (cluster_id, work_id) key and a title score."""

    title_score: float

    @property
    def key(self) -> CandidateKey: ...

# Per-bin quotas oversampling the ambiguous low-score ranges; the first bin is
# closed on both ends, the rest are half-open (lower, upper].
DEFAULT_BINS: tuple[tuple[float, float, int], ...] = (
    (0, 20, 5),
    (20, 40, 15),
    (40, 50, 10),
    (50, 60, 15),
    (60, 70, 25),
    (70, 80, 30),
    (80, 90, 50),
    (90, 100, 50),
)


class Label(Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class EvalLabel:
    cluster_id: str
    work_id: str
    label: Label
    evaluator_id: str
    timestamp: float = 0.0

    @property
    def key(self) -> CandidateKey:
        return (self.cluster_id, self.work_id)


def make_label(key: CandidateKey, label: str, evaluator_id: str) -> EvalLabel:
    return EvalLabel(key[0], key[1], Label(label), evaluator_id, timestamp=time.time())


@dataclass(frozen=True)
class StratifiedPlan:
    bins: tuple[tuple[float, float, int], ...] = DEFAULT_BINS

    def __post_init__(self) -> None:
        prev_upper = None
        for lower, upper, count in self.bins:
            if not (0 <= lower < upper <= 100):
                raise ValueError(f"bin ({lower}, {upper}] outside [0, 100]")
            if count <= 0:
                raise ValueError("bin counts must be positive")
            if prev_upper is not None and lower < prev_upper:
                raise ValueError("bins must not overlap")
            prev_upper = upper

    @property
    def total(self) -> int:
        return sum(count for _, _, count in self.bins)

    def bin_index(self, score: float) -> Optional[int]:
        for i, (lower, upper, _) in enumerate(self.bins):
            if i == 0:
                if lower <= score <= upper:
                    return i
            elif lower < score <= upper:
                return i
        return None


@dataclass
class SampleResult:
    keys: list[CandidateKey] = field(default_factory=list)
    shortfalls: dict[int, tuple[int, int]] = field(default_factory=dict)  # bin -> (requested, available)
    per_bin: dict[int, int] = field(default_factory=dict)


def stratified_sample(
    candidates: Sequence[ScoredCandidate],
    plan: StratifiedPlan = StratifiedPlan(),
    seed: int = 0,
) -> SampleResult:
    """Draw the per-bin quotas uniformly without replacement.

    Bins with fewer candidates than their quota contribute everything they
    have and are reported as shortfalls. Deterministic for a fixed seed.
    """
    if not candidates:
        raise ValueError("cannot sample from an empty candidate set")
    grouped: dict[int, list[ScoredCandidate]] = {i: [] for i in range(len(plan.bins))}
    for c in candidates:
        idx = plan.bin_index(c.title_score)
        if idx is not None:
            grouped[idx].append(c)
    rng = random.Random(seed)
    result = SampleResult()
    for i, (_, _, count) in enumerate(plan.bins):
        pool = sorted(grouped[i], key=lambda c: c.key)
        if len(pool) < count:
            result.shortfalls[i] = (count, len(pool))
            chosen = pool
        else:
            chosen = rng.sample(pool, count)
        result.per_bin[i] = len(chosen)
        result.keys.extend(c.key for c in chosen)
    return result


# --- Label resolution ---------------------------------------------------------

def resolve_labels(labels: Iterable[EvalLabel]) -> dict[CandidateKey, Label]:
    """Resolve to one label per candidate.

    The latest label wins per (candidate, evaluator); across evaluators the
    majority of Yes/No decides, with ties or Unknown-only resolving to
    Unknown.
    """
    latest: dict[tuple[CandidateKey, str], Label] = {}
    for lab in labels:
        latest[(lab.key, lab.evaluator_id)] = lab.label
    votes: dict[CandidateKey, list[Label]] = {}
    for (key, _), label in latest.items():
        votes.setdefault(key, []).append(label)
    resolved = {}
    for key, cast in votes.items():
        yes = sum(1 for v in cast if v is Label.YES)
        no = sum(1 for v in cast if v is Label.NO)
        if yes > no:
            resolved[key] = Label.YES
        elif no > yes:
            resolved[key] = Label.NO
        else:
            resolved[key] = Label.UNKNOWN
    return resolved


# --- Precision/recall curves ----------------------------------------------------

Resampler = Callable[[np.random.Generator, int, int], np.ndarray]


@dataclass
class PrCurve:
    thresholds: np.ndarray
    precision: np.ndarray
    precision_ci_low: np.ndarray
    precision_ci_high: np.ndarray
    recall: np.ndarray
    recall_ci_low: np.ndarray
    recall_ci_high: np.ndarray
    retention: np.ndarray
    n_labeled: int = 0
    n_unknown: int = 0


def _confusion_arrays(scores: np.ndarray, is_yes: np.ndarray, thresholds: np.ndarray):
    """Precision/recall per threshold; rows where the denominator is zero are NaN."""
    pred = scores[None, :] >= thresholds[:, None]
    tp = (pred & is_yes[None, :]).sum(axis=1).astype(float)
    npred = pred.sum(axis=1).astype(float)
    nyes = float(is_yes.sum())
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(npred > 0, tp / npred, np.nan)
        recall = np.full(len(thresholds), np.nan) if nyes == 0 else tp / nyes
    return precision, recall


def pr_curve(
    labels: Iterable[EvalLabel],
    candidates: Sequence[ScoredCandidate],
    threshold_grid: Optional[Sequence[float]] = None,
    bootstrap_B: int = 1000,
    seed: int = 0,
    resampler: Optional[Resampler] = None,
) -> PrCurve:
    """Precision, recall, and retention against the score threshold.

    Precision and recall use the conclusively labeled candidates only;
    retention is the fraction of all candidates at or above each threshold.
    Confidence intervals are 95% percentile bootstrap over labeled items.
    """
    thresholds = np.asarray(
        threshold_grid if threshold_grid is not None else np.arange(0, 101, 1), dtype=float
    )
    resolved = resolve_labels(labels)
    score_by_key = {c.key: c.title_score for c in candidates}

    labeled_keys = [k for k, v in resolved.items() if v is not Label.UNKNOWN and k in score_by_key]
    n_unknown = sum(1 for k, v in resolved.items() if v is Label.UNKNOWN and k in score_by_key)
    if not labeled_keys:
        raise ValueError("no conclusively labeled candidates; cannot compute the curve")

    scores = np.array([score_by_key[k] for k in labeled_keys], dtype=float)
    is_yes = np.array([resolved[k] is Label.YES for k in labeled_keys], dtype=bool)
    all_scores = np.array([c.title_score for c in candidates], dtype=float)

    precision, recall = _confusion_arrays(scores, is_yes, thresholds)
    retention = (all_scores[None, :] >= thresholds[:, None]).mean(axis=1)

    rng = np.random.default_rng(seed)
    n = len(labeled_keys)
    if resampler is None:
        idx = rng.integers(0, n, size=(bootstrap_B, n))
    else:
        idx = resampler(rng, bootstrap_B, n)
    boot_prec = np.empty((bootstrap_B, len(thresholds)))
    boot_rec = np.empty((bootstrap_B, len(thresholds)))
    for row in range(bootstrap_B):
        boot_prec[row], boot_rec[row] = _confusion_arrays(scores[idx[row]], is_yes[idx[row]], thresholds)

    def _percentiles(boot: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        defined = ~np.all(np.isnan(boot), axis=0)
        low = np.full(len(thresholds), np.nan)
        high = np.full(len(thresholds), np.nan)
        if defined.any():
            low[defined] = np.nanpercentile(boot[:, defined], 2.5, axis=0)
            high[defined] = np.nanpercentile(boot[:, defined], 97.5, axis=0)
        return low, high

    p_low, p_high = _percentiles(boot_prec)
    r_low, r_high = _percentiles(boot_rec)
    return PrCurve(
        thresholds=thresholds,
        precision=precision,
        precision_ci_low=p_low,
        precision_ci_high=p_high,
        recall=recall,
        recall_ci_low=r_low,
        recall_ci_high=r_high,
        retention=retention,
        n_labeled=n,
        n_unknown=n_unknown,
    )


@dataclass
class AmbiguousReport:
    threshold: float
    items: list[tuple[CandidateKey, float]] = field(default_factory=list)
    n_unknown_total: int = 0
    secondary_precision: Optional[float] = None

    @property
    def count(self) -> int:
        return len(self.items)

    @property
    def share_of_unknown(self) -> float:
        return self.count / self.n_unknown_total if self.n_unknown_total else 0.0


def ambiguous_subset_report(
    labels: Iterable[EvalLabel],
    candidates: Sequence[ScoredCandidate],
    threshold: float = 80.0,
    relabels: Optional[Iterable[EvalLabel]] = None,
) -> AmbiguousReport:
    """Unknown-labeled candidates at or above the operating threshold.

    When a second labeling round is supplied, secondary_precision is the
    fraction of the subset it confirms as correct matches.
    """
    resolved = resolve_labels(labels)
    score_by_key = {c.key: c.title_score for c in candidates}
    unknown_keys = {k for k, v in resolved.items() if v is Label.UNKNOWN and k in score_by_key}
    subset = sorted(
        (k for k in unknown_keys if score_by_key[k] >= threshold),
        key=lambda k: (-score_by_key[k], k),
    )
    report = AmbiguousReport(
        threshold=threshold,
        items=[(k, score_by_key[k]) for k in subset],
        n_unknown_total=len(unknown_keys),
    )
    if relabels is not None and subset:
        second = resolve_labels(relabels)
        confirmed = sum(1 for k in subset if second.get(k) is Label.YES)
        report.secondary_precision = confirmed / len(subset)
    return report


# --- Order statistics ------------------------------------------------------------

def median_iqr(values: Sequence[float]) -> tuple[float, float, float]:
    """(median, q1, q3) with linear-interpolation (type-7) quantiles."""
    if len(values) == 0:
        raise ValueError("cannot summarize an empty sequence")
    med, q1, q3 = np.quantile(np.asarray(values, dtype=float), [0.5, 0.25, 0.75])
    return float(med), float(q1), float(q3)


def score_distribution_stats(candidates: Sequence[ScoredCandidate]) -> tuple[float, float, float]:
    """(median, iqr_low, iqr_high) of candidate title scores."""
    return median_iqr([c.title_score for c in candidates])


# --- Persistence ------------------------------------------------------------------

def append_label(path: Path, label: EvalLabel) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        fh.write(json.dumps({
            "cluster_id": label.cluster_id,
            "work_id": label.work_id,
            "label": label.label.value,
            "evaluator_id": label.evaluator_id,
            "timestamp": label.timestamp,
        }) + "\n")


def read_labels(path: Path) -> list[EvalLabel]:
    out = []
    if not Path(path).exists():
        return out
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                obj = json.loads(line)
                out.append(EvalLabel(
                    cluster_id=obj["cluster_id"],
                    work_id=obj["work_id"],
                    label=Label(obj["label"]),
                    evaluator_id=obj["evaluator_id"],
                    timestamp=obj.get("timestamp", 0.0),
                ))
    return out


def write_pr_curve_csv(path: Path, curve: PrCurve) -> None:
    def cell(x: float) -> str:
        return "" if np.isnan(x) else f"{x:.6f}"

    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("threshold,precision,ci_low,ci_high,recall,r_ci_low,r_ci_high,retention\n")
        for i, t in enumerate(curve.thresholds):
            fh.write(",".join([
                f"{t:g}",
                cell(curve.precision[i]),
                cell(curve.precision_ci_low[i]),
                cell(curve.precision_ci_high[i]),
                cell(curve.recall[i]),
                cell(curve.recall_ci_low[i]),
                cell(curve.recall_ci_high[i]),
                f"{curve.retention[i]:.6f}",
            ]) + "\n")
