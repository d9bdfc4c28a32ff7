"""End-to-end detection: tag, gate, annotate, embed, cluster, filter.

Stages are timed individually; the report groups them the same way the
response-time breakdown is usually presented (tagging, embedding total
with entity-detection and embedding-generation sub-lines, identification).
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import time
from dataclasses import dataclass
from datetime import timedelta
from typing import Optional, Sequence

import numpy as np

from .categorizer import CategorizerModel, predict_categories, security_gate
from .clustering import DbscanConfig, EventInstance, choose_eps, dbscan, filter_clusters
from .config import PipelineConfig
from .corpus import TIME_EPOCH, Corpus, format_timestamp, parse_duration, window_stream
from .entities import Gazetteer, extract_gazetteer
from .errors import DataValidationError, UsageError
from .gatnet import GatParams, gat_forward
from .trg import FeatureBlocks, TemporalScaler, assemble_features, build_graph, text_matrix


@dataclass
class StageTimings:
    tagging: float = 0.0
    entity_extraction: float = 0.0
    graph_build: float = 0.0
    embedding: float = 0.0
    identification: float = 0.0

    def report(self) -> dict:
        embedding_generation = self.graph_build + self.embedding
        return {
            "tagging": self.tagging,
            "embedding_total": self.entity_extraction + embedding_generation,
            "entity_extraction": self.entity_extraction,
            "embedding_generation": embedding_generation,
            "identification": self.identification,
            "total": self.tagging
            + self.entity_extraction
            + embedding_generation
            + self.identification,
        }


class _Timer:
    def __init__(self):
        self.elapsed = 0.0

    def __enter__(self):
        self._t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed += time.perf_counter() - self._t0
        return False


def event_id_for(window_start, tweet_ids: Sequence[str]) -> str:
    """Stable id: hash of the window start and the sorted member ids."""
    payload = (window_start or "") + "|" + ",".join(sorted(tweet_ids))
    return hashlib.blake2s(payload.encode("utf-8"), digest_size=8).hexdigest()


def event_to_json(event: EventInstance) -> dict:
    window_iso = format_timestamp(event.window_start) if event.window_start else None
    return {
        "event_id": event_id_for(window_iso, event.tweet_ids),
        "window_start": window_iso,
        "tweet_ids": sorted(event.tweet_ids),
        "n_users": event.n_users,
        "score": event.score,
        "categories": sorted(event.categories),
    }


def write_events(events: Sequence[EventInstance], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ev in events:
            fh.write(json.dumps(event_to_json(ev), ensure_ascii=False) + "\n")


def summarize_categories(binary_rows: np.ndarray, labels: Sequence[str]) -> tuple[str, ...]:
    """Categories predicted on at least half of a cluster's tweets."""
    if binary_rows.size == 0:
        return ()
    frac = binary_rows.mean(axis=0)
    return tuple(labels[j] for j in range(len(labels)) if frac[j] >= 0.5)


@dataclass
class DetectResult:
    events: list[EventInstance]
    timings: StageTimings
    n_windows: int
    n_gated: int
    eps: float


def run_detect(
    config: PipelineConfig,
    corpus: Corpus,
    categorizer: CategorizerModel,
    gat_params: GatParams,
    gazetteer: Optional[Gazetteer] = None,
    scaler: Optional[TemporalScaler] = None,
) -> DetectResult:
    """Window-by-window detection over a corpus.

    Tagging and the security gate run once over the whole stream; entity
    extraction fills in mentions for tweets that carry none (when a
    gazetteer is supplied); each window is then embedded and clustered
    independently. Deterministic for a fixed (config, corpus, seed).
    """
    timings = StageTimings()
    use_text, use_temporal, use_category = config.block_flags()
    blocks = FeatureBlocks(
        text=use_text,
        temporal=use_temporal,
        category=use_category,
        standardize_temporal=config.standardize_temporal,
        hash_dim=config.hash_dim,
    )

    with _Timer() as t:
        text = text_matrix(corpus, config.hash_dim)
        binary, probs = predict_categories(categorizer, text)
        if config.gate:
            mask = security_gate(binary, categorizer.labels)
        else:
            mask = np.ones(len(corpus.tweets), dtype=bool)
    timings.tagging += t.elapsed

    gated_idx = np.flatnonzero(mask)
    gated = Corpus(
        tweets=tuple(corpus.tweets[i] for i in gated_idx),
        features=text[gated_idx],
        split_tag=corpus.split_tag,
    )
    gated_binary = binary[gated_idx]
    gated_probs = probs[gated_idx]

    with _Timer() as t:
        if gazetteer is not None:
            tweets = list(gated.tweets)
            for i, tweet in enumerate(tweets):
                if not tweet.entities:
                    mentions = extract_gazetteer(tweet.text, gazetteer)
                    if mentions:
                        tweets[i] = dataclasses.replace(tweet, entities=tuple(mentions))
            gated = Corpus(tweets=tuple(tweets), features=gated.features, split_tag=gated.split_tag)
    timings.entity_extraction += t.elapsed

    if not gated.tweets:
        return DetectResult(events=[], timings=timings, n_windows=0, n_gated=0, eps=float("nan"))

    eps = config.eps_value()
    if eps is None:
        labels = [t.gold_event_id for t in gated.tweets]
        if not any(lab is not None for lab in labels):
            raise UsageError(
                "eps=auto needs gold event labels for the grid search; set a numeric eps"
            )
        graph_all = build_graph(gated, self_loops=config.self_loops, max_posting=config.max_posting or None)
        feats_all = assemble_features(
            gated, graph_all, blocks,
            category_probs=gated_probs if use_category else None,
            scaler=scaler,
        )
        emb_all = gat_forward(graph_all, feats_all, gat_params)
        eps, _ = choose_eps(
            emb_all, labels, min_pts=config.min_pts, seed=config.seed, noise_mode=config.noise_mode
        )

    length = parse_duration(config.window_length)
    stride = parse_duration(config.window_stride)
    windows = window_stream(gated, length=length, stride=stride)
    events: list[EventInstance] = []
    for window in windows:
        if not window.member_indices:
            # still represents a timed (empty) unit of work for each stage
            continue
        sub = gated.subset(window.member_indices)
        sub_binary = gated_binary[list(window.member_indices)]
        sub_probs = gated_probs[list(window.member_indices)]
        with _Timer() as t:
            graph = build_graph(sub, self_loops=config.self_loops, max_posting=config.max_posting or None)
        timings.graph_build += t.elapsed
        with _Timer() as t:
            feats = assemble_features(
                sub, graph, blocks,
                category_probs=sub_probs if use_category else None,
                scaler=scaler,
            )
            emb = gat_forward(graph, feats, gat_params)
        timings.embedding += t.elapsed
        with _Timer() as t:
            assignment = dbscan(emb, DbscanConfig(eps=eps, min_pts=config.min_pts))
            cats = {
                cid: summarize_categories(sub_binary[assignment.members(cid)], categorizer.labels)
                for cid in range(assignment.n_clusters)
            }
            events.extend(
                filter_clusters(
                    assignment,
                    sub,
                    threshold=config.filter_threshold,
                    window_start=window.start,
                    categories_by_cluster=cats,
                )
            )
        timings.identification += t.elapsed

    if config.merge:
        events = merge_events(events, corpus, jaccard_threshold=config.merge_jaccard)
    return DetectResult(
        events=events,
        timings=timings,
        n_windows=len(windows),
        n_gated=len(gated.tweets),
        eps=eps,
    )


def merge_events(
    events: Sequence[EventInstance],
    corpus: Corpus,
    jaccard_threshold: float = 0.5,
) -> list[EventInstance]:
    """Union events re-detected across overlapping windows.

    Any two events from different windows whose tweet sets reach the
    Jaccard threshold merge, transitively. The merged event keeps the
    union of tweets, the earliest window, and recomputed user counts.
    """
    events = list(events)
    n = len(events)
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    sets = [frozenset(ev.tweet_ids) for ev in events]
    for i in range(n):
        for j in range(i + 1, n):
            if events[i].window_start == events[j].window_start:
                continue
            inter = len(sets[i] & sets[j])
            if inter == 0:
                continue
            if inter / len(sets[i] | sets[j]) >= jaccard_threshold:
                union(i, j)

    users_by_tweet = {t.tweet_id: t.user_id for t in corpus.tweets}
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    merged = []
    for root in sorted(groups):
        members = groups[root]
        if len(members) == 1:
            merged.append(events[members[0]])
            continue
        tweet_ids = sorted(set().union(*(sets[i] for i in members)))
        starts = [events[i].window_start for i in members if events[i].window_start]
        cats = set().union(*(events[i].categories for i in members))
        users = {users_by_tweet.get(tid, tid) for tid in tweet_ids}
        merged.append(
            EventInstance(
                cluster_id=events[members[0]].cluster_id,
                tweet_ids=tuple(tweet_ids),
                n_users=len(users),
                n_tweets=len(tweet_ids),
                score=len(users) / len(tweet_ids),
                window_start=min(starts) if starts else None,
                categories=tuple(sorted(cats)),
            )
        )
    merged.sort(key=lambda ev: (format_timestamp(ev.window_start) if ev.window_start else "", ev.tweet_ids))
    return merged


def export_trend(
    events: Sequence[EventInstance],
    corpus: Corpus,
    bucket: timedelta,
    path,
) -> list[tuple]:
    """Plot-ready per-bucket tweet counts, ordered by bucket then event."""
    if bucket <= timedelta(0):
        raise DataValidationError("bucket duration must be positive")
    posted = {t.tweet_id: t.posted_at for t in corpus.tweets}
    epoch = TIME_EPOCH
    rows = []
    for ev in events:
        window_iso = format_timestamp(ev.window_start) if ev.window_start else None
        event_id = event_id_for(window_iso, ev.tweet_ids)
        by_bucket: dict[int, int] = {}
        for tid in ev.tweet_ids:
            ts = posted.get(tid)
            if ts is None:
                raise DataValidationError(f"event references unknown tweet {tid!r}")
            k = int((ts - epoch) // bucket)
            by_bucket[k] = by_bucket.get(k, 0) + 1
        for k, count in by_bucket.items():
            rows.append((format_timestamp(epoch + k * bucket), event_id, count, ";".join(sorted(ev.categories))))
    rows.sort(key=lambda r: (r[0], r[1]))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bucket", "event_id", "tweet_count", "categories"])
        writer.writerows(rows)
    return rows
