"""Partition-comparison and event-level evaluation metrics.

Mutual-information metrics are normalized by the arithmetic mean of the
two partition entropies; the adjusted variant subtracts the exact
expected MI under the permutation (hypergeometric) model. Natural logs
throughout (the normalization cancels the base).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DataValidationError


@dataclass
class ContingencyTable:
    table: np.ndarray  # (r, c) int64
    row_sums: np.ndarray
    col_sums: np.ndarray
    n: int


def contingency(truth: Sequence, pred: Sequence) -> ContingencyTable:
    if len(truth) != len(pred):
        raise DataValidationError(f"label length mismatch: {len(truth)} vs {len(pred)}")
    if len(truth) == 0:
        raise DataValidationError("empty labelings")
    _, ti = np.unique(np.asarray(truth, dtype=object), return_inverse=True)
    _, pi = np.unique(np.asarray(pred, dtype=object), return_inverse=True)
    r = int(ti.max()) + 1
    c = int(pi.max()) + 1
    table = np.zeros((r, c), dtype=np.int64)
    np.add.at(table, (ti, pi), 1)
    return ContingencyTable(
        table=table,
        row_sums=table.sum(axis=1),
        col_sums=table.sum(axis=0),
        n=len(truth),
    )


def _entropy(counts: np.ndarray, n: int) -> float:
    nz = counts[counts > 0]
    p = nz / n
    return float(-(p * np.log(p)).sum())


def _mutual_information(ct: ContingencyTable) -> float:
    mi = 0.0
    n = ct.n
    for i in range(ct.table.shape[0]):
        for j in range(ct.table.shape[1]):
            nij = ct.table[i, j]
            if nij:
                mi += (nij / n) * math.log(n * nij / (ct.row_sums[i] * ct.col_sums[j]))
    return mi


def _same_partition(ct: ContingencyTable) -> bool:
    """True when the two labelings induce identical partitions."""
    return (
        ct.table.shape[0] == ct.table.shape[1]
        and int((ct.table > 0).sum()) == ct.table.shape[0]
    )


def nmi(truth: Sequence, pred: Sequence) -> float:
    """Mutual information over the mean of the two entropies, in [0, 1]."""
    ct = contingency(truth, pred)
    h_t = _entropy(ct.row_sums, ct.n)
    h_p = _entropy(ct.col_sums, ct.n)
    denom = 0.5 * (h_t + h_p)
    if denom <= 1e-15:
        return 1.0 if _same_partition(ct) else 0.0
    return _mutual_information(ct) / denom


def _lcomb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def expected_mutual_information(ct: ContingencyTable) -> float:
    """Exact E[MI] under random permutations with fixed marginals."""
    n = ct.n
    emi = 0.0
    for a in ct.row_sums:
        for b in ct.col_sums:
            lo = max(1, a + b - n)
            hi = min(a, b)
            for nij in range(lo, hi + 1):
                log_p = _lcomb(a, nij) + _lcomb(n - a, b - nij) - _lcomb(n, b)
                emi += math.exp(log_p) * (nij / n) * math.log(n * nij / (a * b))
    return emi


def ami(truth: Sequence, pred: Sequence) -> float:
    """Chance-adjusted mutual information: (MI - E[MI]) / (mean H - E[MI])."""
    ct = contingency(truth, pred)
    h_t = _entropy(ct.row_sums, ct.n)
    h_p = _entropy(ct.col_sums, ct.n)
    mi = _mutual_information(ct)
    emi = expected_mutual_information(ct)
    denom = 0.5 * (h_t + h_p) - emi
    if abs(denom) <= 1e-12 * max(1.0, 0.5 * (h_t + h_p)):
        return 1.0 if _same_partition(ct) else 0.0
    return (mi - emi) / denom


def ari(truth: Sequence, pred: Sequence) -> float:
    """Chance-adjusted pair-counting index in [-1, 1]."""
    ct = contingency(truth, pred)
    sum_ij = sum(math.comb(int(v), 2) for v in ct.table.ravel())
    sum_a = sum(math.comb(int(v), 2) for v in ct.row_sums)
    sum_b = sum(math.comb(int(v), 2) for v in ct.col_sums)
    total = math.comb(ct.n, 2)
    if total == 0:
        return 1.0 if _same_partition(ct) else 0.0
    expected = sum_a * sum_b / total
    max_index = 0.5 * (sum_a + sum_b)
    denom = max_index - expected
    if abs(denom) <= 1e-12 * max(1.0, max_index):
        return 1.0 if _same_partition(ct) else 0.0
    return (sum_ij - expected) / denom


# ---------------------------------------------------------------------------
# Event-level precision / recall
# ---------------------------------------------------------------------------


@dataclass
class CategoryCount:
    value: float
    num: int
    den: int

    def to_json(self) -> dict:
        return {"value": self.value, "num": self.num, "den": self.den}


@dataclass
class EventEvalReport:
    precision: CategoryCount
    recall: CategoryCount
    per_category_precision: dict[str, CategoryCount]
    per_category_recall: dict[str, CategoryCount]
    mapping: dict[int, Optional[str]]  # detected index -> matched gold event

    def to_json(self) -> dict:
        return {
            "precision": {
                "total": self.precision.to_json(),
                "per_category": {k: v.to_json() for k, v in self.per_category_precision.items()},
            },
            "recall": {
                "total": self.recall.to_json(),
                "per_category": {k: v.to_json() for k, v in self.per_category_recall.items()},
            },
        }


def _ratio(num: int, den: int) -> CategoryCount:
    return CategoryCount(value=(num / den if den else 0.0), num=num, den=den)


def event_eval(
    detected: Sequence[Sequence[str]],
    gold: dict[str, Optional[str]],
    purity_threshold: float = 0.5,
    tweet_categories: Optional[dict[str, Sequence[str]]] = None,
) -> EventEvalReport:
    """Match detected tweet sets against gold events.

    A detected event is correct iff at least ``purity_threshold`` of its
    tweets carry one shared gold event id; a gold event is recalled iff
    some correct detected event maps to it. Category splits use the union
    of member tweets' gold categories.
    """
    if not (0.0 < purity_threshold <= 1.0):
        raise DataValidationError("purity threshold must be in (0, 1]")
    tweet_categories = tweet_categories or {}

    gold_events: dict[str, set[str]] = {}
    for tid, ev in gold.items():
        if ev is not None:
            gold_events.setdefault(ev, set()).update(tweet_categories.get(tid, ()))

    mapping: dict[int, Optional[str]] = {}
    detected_cats: list[set[str]] = []
    recalled: set[str] = set()
    for di, tweet_ids in enumerate(detected):
        tweet_ids = list(tweet_ids)
        counts: dict[str, int] = {}
        cats: set[str] = set()
        for tid in tweet_ids:
            ev = gold.get(tid)
            if ev is not None:
                counts[ev] = counts.get(ev, 0) + 1
            cats.update(tweet_categories.get(tid, ()))
        detected_cats.append(cats)
        match = None
        if counts and tweet_ids:
            best = min(
                (ev for ev in counts if counts[ev] == max(counts.values()))
            )  # deterministic tie-break
            if counts[best] / len(tweet_ids) >= purity_threshold:
                match = best
                recalled.add(best)
        mapping[di] = match

    n_correct = sum(1 for v in mapping.values() if v is not None)
    precision = _ratio(n_correct, len(list(detected)))
    recall = _ratio(len(recalled), len(gold_events))

    all_cats = sorted(
        set().union(*detected_cats, *gold_events.values()) if (detected_cats or gold_events) else set()
    )
    per_p: dict[str, CategoryCount] = {}
    per_r: dict[str, CategoryCount] = {}
    for cat in all_cats:
        det_idx = [i for i, cats in enumerate(detected_cats) if cat in cats]
        per_p[cat] = _ratio(sum(1 for i in det_idx if mapping[i] is not None), len(det_idx))
        gold_with = [ev for ev, cats in gold_events.items() if cat in cats]
        per_r[cat] = _ratio(sum(1 for ev in gold_with if ev in recalled), len(gold_with))

    return EventEvalReport(
        precision=precision,
        recall=recall,
        per_category_precision=per_p,
        per_category_recall=per_r,
        mapping=mapping,
    )


# ---------------------------------------------------------------------------
# Multi-label classification metrics
# ---------------------------------------------------------------------------


def multilabel_metrics(gold: np.ndarray, pred: np.ndarray) -> dict[str, float]:
    """Hamming loss, per-sample Jaccard, subset accuracy, micro/macro F1.

    A sample with no gold and no predicted labels counts as full Jaccard
    agreement; a label absent from both sides everywhere scores F1 = 1.
    """
    gold = np.asarray(gold)
    pred = np.asarray(pred)
    if gold.shape != pred.shape:
        raise DataValidationError(f"shape mismatch: {gold.shape} vs {pred.shape}")
    for name, mat in (("gold", gold), ("pred", pred)):
        if not np.isin(mat, (0, 1)).all():
            raise DataValidationError(f"{name} must be binary")
    gold = gold.astype(np.int64)
    pred = pred.astype(np.int64)
    n, n_labels = gold.shape

    hamming = float((gold != pred).mean())

    inter = ((gold == 1) & (pred == 1)).sum(axis=1)
    union = ((gold == 1) | (pred == 1)).sum(axis=1)
    jaccard = float(np.where(union > 0, inter / np.maximum(union, 1), 1.0).mean())

    subset = float((gold == pred).all(axis=1).mean())

    tp = ((gold == 1) & (pred == 1)).sum()
    fp = ((gold == 0) & (pred == 1)).sum()
    fn = ((gold == 1) & (pred == 0)).sum()
    micro = float(2 * tp / (2 * tp + fp + fn)) if (2 * tp + fp + fn) else 1.0

    per_label = []
    for j in range(n_labels):
        tp_j = int(((gold[:, j] == 1) & (pred[:, j] == 1)).sum())
        fp_j = int(((gold[:, j] == 0) & (pred[:, j] == 1)).sum())
        fn_j = int(((gold[:, j] == 1) & (pred[:, j] == 0)).sum())
        denom = 2 * tp_j + fp_j + fn_j
        per_label.append(2 * tp_j / denom if denom else 1.0)
    macro = float(np.mean(per_label))

    return {
        "hamming_loss": hamming,
        "jaccard": jaccard,
        "subset_accuracy": subset,
        "micro_f1": micro,
        "macro_f1": macro,
    }
