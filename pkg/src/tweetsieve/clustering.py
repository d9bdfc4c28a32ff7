"""Density clustering of embeddings and user-density cluster filtering.

Standard DBSCAN semantics: a core point has at least ``min_pts`` points
(itself included) within ``eps``; clusters are the density-connected
components; everything else is noise (label -1). Border points reachable
from several clusters join the cluster whose founding core point comes
first in scan order, which makes the labeling deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .errors import DataValidationError, NumericalError


@dataclass
class DbscanConfig:
    eps: float
    min_pts: int = 3

    def __post_init__(self):
        if not np.isfinite(self.eps) or self.eps <= 0:
            raise DataValidationError("eps must be finite and positive")
        if self.min_pts < 1:
            raise DataValidationError("min_pts must be >= 1")


@dataclass
class ClusterAssignment:
    labels: np.ndarray  # -1 noise, else contiguous cluster ids from 0
    n_clusters: int

    def members(self, cluster_id: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cluster_id)


def dbscan(embeddings: np.ndarray, cfg: DbscanConfig) -> ClusterAssignment:
    """Label every embedding row with its density cluster or noise."""
    x = np.ascontiguousarray(embeddings, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise DataValidationError("embeddings must be a non-empty 2-D matrix")
    if not np.isfinite(x).all():
        raise NumericalError("non-finite embedding entries")
    n = x.shape[0]
    eps2 = cfg.eps * cfg.eps
    core = kernels.neighbor_counts(x, eps2) >= cfg.min_pts
    labels = np.full(n, -1, dtype=np.int64)
    cluster = 0
    batch = 1024  # bounds neighbor-list memory on dense frontiers
    for seed in range(n):
        if not core[seed] or labels[seed] >= 0:
            continue
        labels[seed] = cluster
        frontier = np.asarray([seed], dtype=np.int64)
        while frontier.size:
            fresh_parts = []
            for lo in range(0, frontier.size, batch):
                idx, _ = kernels.neighbors_within(x, frontier[lo : lo + batch], eps2)
                hit = np.unique(idx[labels[idx] < 0])
                labels[hit] = cluster
                fresh_parts.append(hit)
            fresh = np.unique(np.concatenate(fresh_parts)) if fresh_parts else np.empty(0, np.int64)
            frontier = fresh[core[fresh]]
        cluster += 1
    return ClusterAssignment(labels=labels, n_clusters=cluster)


def labels_for_metrics(assignment: ClusterAssignment, noise_mode: str = "singleton") -> np.ndarray:
    """Map noise labels for metric computation.

    ``singleton`` gives each noise point its own fresh cluster id;
    ``single-cluster`` lumps all noise into one shared id.
    """
    labels = assignment.labels.copy()
    noise = np.flatnonzero(labels < 0)
    if noise.size == 0:
        return labels
    if noise_mode == "singleton":
        labels[noise] = assignment.n_clusters + np.arange(noise.size)
    elif noise_mode == "single-cluster":
        labels[noise] = assignment.n_clusters
    else:
        raise DataValidationError(f"unknown noise mode {noise_mode!r}")
    return labels


def score_cluster(member_user_ids: Sequence[str]) -> float:
    """Distinct users divided by tweet count."""
    if len(member_user_ids) == 0:
        raise DataValidationError("cannot score an empty cluster")
    return len(set(member_user_ids)) / len(member_user_ids)


@dataclass
class EventInstance:
    """A retained cluster interpreted as one security event."""

    cluster_id: int
    tweet_ids: tuple[str, ...]
    n_users: int
    n_tweets: int
    score: float
    window_start: Optional[datetime] = None
    categories: tuple[str, ...] = ()


def filter_clusters(
    assignment: ClusterAssignment,
    corpus,
    threshold: float = 0.80,
    window_start: Optional[datetime] = None,
    categories_by_cluster: Optional[dict[int, Sequence[str]]] = None,
) -> list[EventInstance]:
    """Keep clusters whose user-density score reaches the threshold.

    The boundary is inclusive (a score exactly at the threshold is kept);
    noise never becomes an event.
    """
    if not (0.0 < threshold <= 1.0):
        raise DataValidationError("filter threshold must be in (0, 1]")
    if len(assignment.labels) != len(corpus.tweets):
        raise DataValidationError("assignment length does not match corpus")
    events = []
    for cid in range(assignment.n_clusters):
        members = assignment.members(cid)
        users = [corpus.tweets[i].user_id for i in members]
        score = score_cluster(users)
        if score >= threshold:
            cats = ()
            if categories_by_cluster and cid in categories_by_cluster:
                cats = tuple(categories_by_cluster[cid])
            events.append(
                EventInstance(
                    cluster_id=cid,
                    tweet_ids=tuple(corpus.tweets[i].tweet_id for i in members),
                    n_users=len(set(users)),
                    n_tweets=len(members),
                    score=score,
                    window_start=window_start,
                    categories=cats,
                )
            )
    return events


def distance_quantile_grid(
    embeddings: np.ndarray,
    n_quantiles: int = 16,
    sample_size: int = 2048,
    seed: int = 0,
) -> np.ndarray:
    """Candidate eps values: quantiles of a sampled pairwise-distance set."""
    x = np.asarray(embeddings, dtype=np.float64)
    n = x.shape[0]
    rng = np.random.default_rng(seed)
    idx = rng.permutation(n)[: min(n, sample_size)]
    sub = x[idx]
    d2 = (
        np.einsum("ij,ij->i", sub, sub)[:, None]
        + np.einsum("ij,ij->i", sub, sub)[None, :]
        - 2.0 * (sub @ sub.T)
    )
    tri = d2[np.triu_indices(sub.shape[0], k=1)]
    tri = np.sqrt(np.maximum(tri, 0.0))
    tri = tri[tri > 0]
    if tri.size == 0:
        return np.asarray([1.0])
    qs = np.linspace(0.02, 0.8, n_quantiles)
    grid = np.unique(np.quantile(tri, qs))
    return grid[grid > 0]


def choose_eps(
    embeddings: np.ndarray,
    gold_labels: Sequence[Optional[str]],
    min_pts: int = 3,
    n_quantiles: int = 16,
    seed: int = 0,
    noise_mode: str = "singleton",
) -> tuple[float, float]:
    """Grid-search eps maximizing AMI against gold labels.

    Returns (eps, best AMI). Only gold-labeled rows enter the metric.
    """
    from .evalmetrics import ami

    mask = np.asarray([lab is not None for lab in gold_labels])
    if not mask.any():
        raise DataValidationError("eps grid search needs gold event labels")
    truth = [gold_labels[i] for i in np.flatnonzero(mask)]
    best_eps, best_score = None, -np.inf
    for eps in distance_quantile_grid(embeddings, n_quantiles=n_quantiles, seed=seed):
        assignment = dbscan(embeddings, DbscanConfig(eps=float(eps), min_pts=min_pts))
        pred = labels_for_metrics(assignment, noise_mode)[mask]
        score = ami(truth, list(pred))
        if score > best_score:
            best_eps, best_score = float(eps), score
    return best_eps, best_score
