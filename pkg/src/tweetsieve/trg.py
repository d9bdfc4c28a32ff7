"""Tweet relation graph construction and node feature assembly.

Nodes are tweets; an undirected edge joins two tweets whenever their
(entity type, normalized key) mention sets intersect. Node features are
concatenated blocks: text vector, two temporal columns, and an optional
category block.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .corpus import Corpus, temporal_features
from .errors import DataValidationError

TEXT_BLOCK_DEFAULT_DIM = 768


@dataclass(frozen=True)
class TweetRelationGraph:
    """CSR adjacency over tweet nodes (symmetric, sorted, deduplicated)."""

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    self_loops: bool
    tweet_ids: tuple[str, ...]

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def n_edges(self) -> int:
        """Undirected edge count, self-loops included."""
        loops = int(self.self_loops) * self.n
        return (int(self.indices.shape[0]) - loops) // 2 + loops


def build_graph(
    corpus: Corpus,
    self_loops: bool = True,
    max_posting: Optional[int] = None,
) -> TweetRelationGraph:
    """Link tweets sharing at least one (entity type, key) mention.

    Edges come from an inverted index: every posting list of tweets that
    mention the same entity key is pairwise linked. Posting lists longer
    than ``max_posting`` (when set) are skipped, which caps spam-driven
    near-cliques. Tweets without entities stay isolated.
    """
    n = len(corpus.tweets)
    postings: dict[tuple[str, str], list[int]] = {}
    for i, tweet in enumerate(corpus.tweets):
        seen = set()
        for m in tweet.entities:
            ident = (m.entity_type, m.key)
            if ident in seen:
                continue
            seen.add(ident)
            postings.setdefault(ident, []).append(i)

    u_parts, v_parts = [], []
    for members in postings.values():
        if len(members) < 2:
            continue
        if max_posting is not None and len(members) > max_posting:
            continue
        arr = np.asarray(members, dtype=np.int64)
        k = arr.shape[0]
        iu, iv = np.triu_indices(k, k=1)
        u_parts.append(arr[iu])
        v_parts.append(arr[iv])

    if u_parts:
        us = np.concatenate(u_parts)
        vs = np.concatenate(v_parts)
        # symmetric closure, dedup via linear codes
        codes = np.concatenate([us * n + vs, vs * n + us])
        if self_loops:
            loops = np.arange(n, dtype=np.int64)
            codes = np.concatenate([codes, loops * n + loops])
        codes = np.unique(codes)
        rows = codes // n
        cols = codes % n
    elif self_loops:
        rows = np.arange(n, dtype=np.int64)
        cols = rows.copy()
    else:
        rows = np.empty(0, dtype=np.int64)
        cols = np.empty(0, dtype=np.int64)

    counts = np.bincount(rows, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    # codes are sorted by (row, col) already, so cols land sorted per row
    return TweetRelationGraph(
        n=n,
        indptr=indptr,
        indices=cols.astype(np.int64),
        self_loops=self_loops,
        tweet_ids=tuple(t.tweet_id for t in corpus.tweets),
    )


def dump_graph(graph: TweetRelationGraph, path) -> None:
    """Debug dump: JSON header line, then one `u<TAB>v` edge per line."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps({"n": graph.n, "self_loops": graph.self_loops}) + "\n")
        for v in range(graph.n):
            for u in graph.neighbors(v):
                if u >= v:
                    fh.write(f"{v}\t{u}\n")


@dataclass
class TemporalScaler:
    """Per-column standardization for the two temporal columns."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, cols: np.ndarray) -> "TemporalScaler":
        mean = cols.mean(axis=0)
        scale = cols.std(axis=0)
        scale = np.where(scale == 0.0, 1.0, scale)  # constant column -> zeros out
        return cls(mean=mean, scale=scale)

    def transform(self, cols: np.ndarray) -> np.ndarray:
        return (cols - self.mean) / self.scale

    def inverse(self, cols: np.ndarray) -> np.ndarray:
        return cols * self.scale + self.mean


@dataclass
class FeatureBlocks:
    """Which blocks to assemble, in fixed order: text, temporal, category."""

    text: bool = True
    temporal: bool = True
    category: bool = False
    standardize_temporal: bool = True
    hash_dim: Optional[int] = None  # featurize texts when no vectors exist


@dataclass
class NodeFeatures:
    matrix: np.ndarray
    layout: dict[str, tuple[int, int]]  # block -> (start, width)
    scaler: Optional[TemporalScaler] = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]


def _token_hash(token: str) -> int:
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def hashing_featurizer(text: str, d_text: int) -> np.ndarray:
    """Signed token-hash bag of words, L2-normalized.

    Deterministic across runs and platforms; the empty text maps to the
    zero vector.
    """
    if d_text < 8:
        raise DataValidationError("hashing featurizer needs d_text >= 8")
    vec = np.zeros(d_text, dtype=np.float64)
    for token in text.lower().split():
        h = _token_hash(token)
        sign = 1.0 if (h >> 60) & 1 else -1.0
        vec[h % d_text] += sign
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


def text_matrix(corpus: Corpus, hash_dim: Optional[int] = None) -> np.ndarray:
    """Per-tweet text vectors: feature matrix, inline arrays, or hashing."""
    if corpus.features is not None:
        return np.asarray(corpus.features, dtype=np.float64)
    inline = [t.text_embedding for t in corpus.tweets]
    if all(v is not None for v in inline) and inline:
        dims = {len(v) for v in inline}
        if len(dims) != 1:
            raise DataValidationError(f"inconsistent inline embedding dims: {sorted(dims)}")
        return np.asarray(inline, dtype=np.float64)
    if hash_dim is not None:
        return np.stack([hashing_featurizer(t.text, hash_dim) for t in corpus.tweets])
    missing = [t.tweet_id for t in corpus.tweets if t.text_embedding is None][:3]
    raise DataValidationError(
        f"no text features available (first missing: {missing}); "
        "load a feature file, provide text_embedding, or enable the hashing featurizer"
    )


def assemble_features(
    corpus: Corpus,
    graph: TweetRelationGraph,
    blocks: FeatureBlocks,
    category_probs: Optional[np.ndarray] = None,
    scaler: Optional[TemporalScaler] = None,
) -> NodeFeatures:
    """Concatenate enabled feature blocks row-per-node.

    The temporal block is z-scored with ``scaler`` when standardization is
    on; pass the training-split scaler to keep splits comparable. Without
    one, statistics are fitted on this corpus.
    """
    n = len(corpus.tweets)
    if graph.n != n:
        raise DataValidationError(f"graph has {graph.n} nodes but corpus has {n} tweets")
    parts = []
    layout: dict[str, tuple[int, int]] = {}
    offset = 0
    if blocks.text:
        text = text_matrix(corpus, blocks.hash_dim)
        if text.shape[0] != n:
            raise DataValidationError("text feature rows do not match corpus")
        layout["text"] = (offset, text.shape[1])
        offset += text.shape[1]
        parts.append(text)
    if blocks.temporal:
        cols = np.empty((n, 2), dtype=np.float64)
        for i, t in enumerate(corpus.tweets):
            tf = temporal_features(t.posted_at)
            cols[i, 0] = tf.hours_since_epoch
            cols[i, 1] = tf.days_since_epoch
        if blocks.standardize_temporal:
            if scaler is None:
                scaler = TemporalScaler.fit(cols)
            cols = scaler.transform(cols)
        else:
            scaler = None
        layout["temporal"] = (offset, 2)
        offset += 2
        parts.append(cols)
    if blocks.category:
        if category_probs is None:
            raise DataValidationError("category block enabled but no category matrix given")
        category_probs = np.asarray(category_probs, dtype=np.float64)
        if category_probs.shape[0] != n:
            raise DataValidationError("category matrix rows do not match corpus")
        layout["category"] = (offset, category_probs.shape[1])
        offset += category_probs.shape[1]
        parts.append(category_probs)
    if not parts:
        raise DataValidationError("no feature blocks enabled")
    matrix = np.concatenate(parts, axis=1)
    if np.isnan(matrix).all(axis=1).any():
        raise DataValidationError("all-NaN feature row")
    return NodeFeatures(matrix=matrix, layout=layout, scaler=scaler)
