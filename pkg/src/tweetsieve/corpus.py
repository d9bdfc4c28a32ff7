"""Corpus data model, ingestion, temporal features, and stream windows.

Tweets are one JSON object per line; text feature matrices ride in a
small binary sidecar format (magic ``TWZF``). All timestamps are
normalized to UTC at second precision on the way in.
"""

from __future__ import annotations

import hashlib
import json
import re
import struct
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Optional, Sequence

import numpy as np

from .categorizer import CATEGORY_LABELS
from .entities import DEFAULT_ENTITY_TYPES, EntityMention, mentions_from_json, mentions_to_json
from .errors import DataValidationError

FEATURE_MAGIC = b"TWZF"
FEATURE_VERSION = 1

# Hour/day offsets are measured from this instant.
TIME_EPOCH = datetime(2020, 1, 1, tzinfo=timezone.utc)

SPLIT_TAGS = ("train", "validation", "test", "unlabeled")


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 string to a UTC datetime truncated to seconds."""
    try:
        dt = datetime.fromisoformat(value.replace("Z", "+00:00"))
    except (ValueError, AttributeError) as exc:
        raise DataValidationError(f"bad timestamp {value!r}: {exc}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class TemporalFeature:
    hours_since_epoch: float
    days_since_epoch: float


def temporal_features(posted_at: datetime) -> TemporalFeature:
    """Fractional hours and days elapsed since the 2020 epoch."""
    if posted_at < TIME_EPOCH:
        raise DataValidationError(
            f"timestamp {format_timestamp(posted_at)} precedes the 2020-01-01 epoch"
        )
    hours = (posted_at - TIME_EPOCH).total_seconds() / 3600.0
    return TemporalFeature(hours_since_epoch=hours, days_since_epoch=hours / 24.0)


@dataclass(frozen=True)
class TweetRecord:
    """One post with optional gold labels and annotations."""

    tweet_id: str
    user_id: str
    posted_at: datetime
    text: str
    gold_event_id: Optional[str] = None
    gold_categories: Optional[frozenset[str]] = None
    follower_count: Optional[int] = None
    entities: tuple[EntityMention, ...] = ()
    text_embedding: Optional[tuple[float, ...]] = None


@dataclass(frozen=True)
class Corpus:
    """Ordered tweets plus an optional aligned feature matrix."""

    tweets: tuple[TweetRecord, ...]
    features: Optional[np.ndarray] = None
    split_tag: str = "unlabeled"

    def __post_init__(self):
        if self.split_tag not in SPLIT_TAGS:
            raise DataValidationError(f"unknown split tag {self.split_tag!r}")
        seen = set()
        for t in self.tweets:
            if t.tweet_id in seen:
                raise DataValidationError(f"duplicate tweet_id {t.tweet_id!r}")
            seen.add(t.tweet_id)
        if self.features is not None and self.features.shape[0] != len(self.tweets):
            raise DataValidationError(
                f"feature rows ({self.features.shape[0]}) != tweet count ({len(self.tweets)})"
            )

    def __len__(self) -> int:
        return len(self.tweets)

    def index_of(self) -> dict[str, int]:
        return {t.tweet_id: i for i, t in enumerate(self.tweets)}

    def subset(self, indices: Sequence[int], split_tag: Optional[str] = None) -> "Corpus":
        tweets = tuple(self.tweets[i] for i in indices)
        feats = self.features[list(indices)] if self.features is not None else None
        return Corpus(tweets=tweets, features=feats, split_tag=split_tag or self.split_tag)


def _tweet_from_json(rec: dict, lineno: int, source: str) -> TweetRecord:
    for key in ("tweet_id", "user_id", "posted_at", "text"):
        if key not in rec:
            raise DataValidationError(f"{source}:{lineno}: missing field {key!r}")
    gold_categories = None
    if rec.get("gold_categories") is not None:
        cats = rec["gold_categories"]
        for c in cats:
            if c not in CATEGORY_LABELS:
                raise DataValidationError(f"{source}:{lineno}: unknown category label {c!r}")
        gold_categories = frozenset(cats)
    follower_count = rec.get("follower_count")
    if follower_count is not None:
        follower_count = int(follower_count)
        if follower_count < 0:
            raise DataValidationError(f"{source}:{lineno}: negative follower_count")
    entities = ()
    if rec.get("entities"):
        entities = tuple(
            mentions_from_json(rec["entities"], rec["text"], DEFAULT_ENTITY_TYPES)
        )
    text_embedding = None
    if rec.get("text_embedding") is not None:
        text_embedding = tuple(float(x) for x in rec["text_embedding"])
    return TweetRecord(
        tweet_id=str(rec["tweet_id"]),
        user_id=str(rec["user_id"]),
        posted_at=parse_timestamp(rec["posted_at"]),
        text=rec["text"],
        gold_event_id=rec.get("gold_event_id"),
        gold_categories=gold_categories,
        follower_count=follower_count,
        entities=entities,
        text_embedding=text_embedding,
    )


def _tweet_to_json(t: TweetRecord) -> dict:
    rec = {
        "tweet_id": t.tweet_id,
        "user_id": t.user_id,
        "posted_at": format_timestamp(t.posted_at),
        "text": t.text,
    }
    if t.gold_event_id is not None:
        rec["gold_event_id"] = t.gold_event_id
    if t.gold_categories is not None:
        rec["gold_categories"] = sorted(t.gold_categories)
    if t.follower_count is not None:
        rec["follower_count"] = t.follower_count
    if t.entities:
        rec["entities"] = mentions_to_json(t.entities)
    if t.text_embedding is not None:
        rec["text_embedding"] = list(t.text_embedding)
    return rec


def load_corpus(path, feature_source=None, split_tag: str = "unlabeled") -> Corpus:
    """Load a tweet JSONL file, optionally with an aligned feature matrix.

    When a manifest sidecar (``<features>.manifest.json``) exists next to
    the feature file, its input checksum is verified against the JSONL
    bytes so stale features cannot be attached silently.
    """
    tweets = []
    with open(path, "rb") as fh:
        raw_bytes = fh.read()
    for lineno, raw in enumerate(raw_bytes.decode("utf-8").splitlines(), start=1):
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise DataValidationError(f"{path}:{lineno}: bad JSON: {exc}") from exc
        tweets.append(_tweet_from_json(rec, lineno, str(path)))
    features = None
    if feature_source is not None:
        features = load_features(feature_source)
        manifest_path = str(feature_source) + ".manifest.json"
        try:
            with open(manifest_path, "r", encoding="utf-8") as fh:
                manifest = json.load(fh)
        except FileNotFoundError:
            manifest = None
        if manifest is not None and "input_sha256" in manifest:
            digest = hashlib.sha256(raw_bytes).hexdigest()
            if digest != manifest["input_sha256"]:
                raise DataValidationError(
                    f"feature manifest checksum mismatch: corpus {digest} != manifest {manifest['input_sha256']}"
                )
    return Corpus(tweets=tuple(tweets), features=features, split_tag=split_tag)


def save_corpus(corpus: Corpus, path) -> None:
    """Write the canonical JSONL form (fixed key order, sorted label sets)."""
    with open(path, "w", encoding="utf-8") as fh:
        for t in corpus.tweets:
            fh.write(json.dumps(_tweet_to_json(t), ensure_ascii=False) + "\n")


def load_features(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != FEATURE_MAGIC:
            raise DataValidationError(f"{path}: bad feature magic {magic!r}")
        version, rows, cols = struct.unpack("<III", fh.read(12))
        if version != FEATURE_VERSION:
            raise DataValidationError(f"{path}: unsupported feature version {version}")
        body = fh.read(4 * rows * cols)
    if len(body) != 4 * rows * cols:
        raise DataValidationError(f"{path}: truncated feature body")
    return np.frombuffer(body, dtype="<f4").reshape(rows, cols).astype(np.float64)


def save_features(matrix: np.ndarray, path) -> None:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise DataValidationError("feature matrix must be 2-D")
    with open(path, "wb") as fh:
        fh.write(FEATURE_MAGIC)
        fh.write(struct.pack("<III", FEATURE_VERSION, matrix.shape[0], matrix.shape[1]))
        fh.write(matrix.astype("<f4").tobytes(order="C"))


def hour_floor(dt: datetime) -> datetime:
    return dt.replace(minute=0, second=0, microsecond=0)


@dataclass(frozen=True)
class Window:
    start: datetime
    length: timedelta
    member_indices: tuple[int, ...]

    @property
    def end(self) -> datetime:
        return self.start + self.length

    def contains(self, dt: datetime) -> bool:
        return self.start <= dt < self.end


def parse_duration(text: str) -> timedelta:
    """Parse ``6h`` / ``30m`` / ``2d`` / ``90s`` style durations."""
    match = re.fullmatch(r"(\d+(?:\.\d+)?)([smhd])", text.strip())
    if not match:
        raise DataValidationError(f"bad duration {text!r} (use e.g. 6h, 30m, 1d)")
    value = float(match.group(1))
    unit = {"s": 1, "m": 60, "h": 3600, "d": 86400}[match.group(2)]
    return timedelta(seconds=value * unit)


def window_stream(
    corpus: Corpus,
    length: timedelta = timedelta(hours=6),
    stride: timedelta = timedelta(hours=4),
) -> list[Window]:
    """Slice the stream into (possibly overlapping) half-open windows.

    Windows start at the hour-floor of the earliest tweet and advance by
    the stride until the last tweet is covered. A tweet lands in every
    window whose interval contains its timestamp.
    """
    if length <= timedelta(0) or stride <= timedelta(0):
        raise DataValidationError("window length and stride must be positive")
    if not corpus.tweets:
        raise DataValidationError("cannot window an empty corpus")
    times = [t.posted_at for t in corpus.tweets]
    origin = hour_floor(min(times))
    last = max(times)
    windows = []
    start = origin
    while start <= last:
        members = tuple(
            i for i, ts in enumerate(times) if start <= ts < start + length
        )
        windows.append(Window(start=start, length=length, member_indices=members))
        start = start + stride
    return windows


def split_corpus_by_events(corpus: Corpus, fractions=(0.6, 0.2, 0.2)):
    """Partition by gold event, events ordered by first timestamp.

    Returns (train, validation, test) corpora. Unlabeled tweets follow the
    time boundaries of the event partition they fall into.
    """
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise DataValidationError("split fractions must sum to 1")
    first_seen: dict[str, datetime] = {}
    for t in corpus.tweets:
        if t.gold_event_id is not None:
            cur = first_seen.get(t.gold_event_id)
            if cur is None or t.posted_at < cur:
                first_seen[t.gold_event_id] = t.posted_at
    events = sorted(first_seen, key=lambda e: (first_seen[e], e))
    if len(events) < 3:
        raise DataValidationError("need at least 3 labeled events to split")
    n = len(events)
    n_train = max(1, int(round(n * fractions[0])))
    n_val = max(1, int(round(n * fractions[1])))
    n_train = min(n_train, n - 2)
    n_val = min(n_val, n - n_train - 1)
    groups = {
        e: ("train" if i < n_train else "validation" if i < n_train + n_val else "test")
        for i, e in enumerate(events)
    }
    # time boundaries for unlabeled tweets
    val_start = first_seen[events[n_train]]
    test_start = first_seen[events[n_train + n_val]]
    picks = {"train": [], "validation": [], "test": []}
    for i, t in enumerate(corpus.tweets):
        if t.gold_event_id is not None:
            picks[groups[t.gold_event_id]].append(i)
        elif t.posted_at < val_start:
            picks["train"].append(i)
        elif t.posted_at < test_start:
            picks["validation"].append(i)
        else:
            picks["test"].append(i)
    return (
        corpus.subset(picks["train"], "train"),
        corpus.subset(picks["validation"], "validation"),
        corpus.subset(picks["test"], "test"),
    )
