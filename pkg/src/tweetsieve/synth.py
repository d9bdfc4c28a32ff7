"""Seeded synthetic corpora for tests, benchmarks, and demos.

Events get their own entity vocabulary and topic terms; a configurable
fraction of every event tweet's tokens comes from a pool shared across
events, and events of the same category additionally share a category
pool, which is what makes text-only clustering genuinely confusable.
Noise tweets use everyday vocabulary, carry no entities, and no gold
event.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import timedelta

import numpy as np

from .categorizer import SECURITY_LABELS
from .corpus import Corpus, TweetRecord, parse_timestamp
from .entities import DEFAULT_ENTITY_TYPES, EntityMention, Gazetteer


@dataclass
class SynthConfig:
    n_events: int = 20
    tweets_per_event: int = 10
    n_noise: int = 100
    shared_fraction: float = 0.3
    seed: int = 0
    start: str = "2022-06-01T00:00:00Z"
    event_spacing_hours: float = 8.0
    event_duration_hours: float = 4.0
    entity_keys_per_event: int = 4
    mentions_min: int = 2
    mentions_max: int = 3
    tokens_min: int = 8
    tokens_max: int = 14
    spam_events: int = 0  # events posted by a single account (low user density)


_SHARED_POOL = [f"jargon{i}" for i in range(60)]
_EVERYDAY_POOL = [f"daily{i}" for i in range(80)]
_CATEGORY_POOLS = {
    label: [f"cat{ci}term{i}" for i in range(30)]
    for ci, label in enumerate(SECURITY_LABELS)
}


def _event_surface(event: int, k: int) -> str:
    return f"entity-e{event}-{k}"


def synthetic_gazetteer(cfg: SynthConfig) -> Gazetteer:
    """Gazetteer covering every entity surface the generator plants."""
    entries = {}
    for e in range(cfg.n_events + cfg.spam_events):
        for k in range(cfg.entity_keys_per_event):
            surface = _event_surface(e, k)
            entries[surface] = DEFAULT_ENTITY_TYPES[(e + k) % len(DEFAULT_ENTITY_TYPES)]
    return Gazetteer(entries)


def generate_corpus(cfg: SynthConfig) -> Corpus:
    rng = np.random.default_rng(cfg.seed)
    start = parse_timestamp(cfg.start)
    total_events = cfg.n_events + cfg.spam_events
    span_hours = total_events * cfg.event_spacing_hours + cfg.event_duration_hours

    records = []
    serial = 0
    for e in range(total_events):
        spam = e >= cfg.n_events
        category = SECURITY_LABELS[e % len(SECURITY_LABELS)]
        event_pool = [f"ev{e}term{i}" for i in range(12)]
        spam_user = f"spammer{e}"
        for _ in range(cfg.tweets_per_event):
            n_tokens = int(rng.integers(cfg.tokens_min, cfg.tokens_max + 1))
            n_shared = int(round(n_tokens * cfg.shared_fraction))
            n_cat = (n_tokens - n_shared) // 2
            n_event = n_tokens - n_shared - n_cat
            tokens = (
                [  # type: ignore[operator]
                    _SHARED_POOL[rng.integers(len(_SHARED_POOL))] for _ in range(n_shared)
                ]
                + [
                    _CATEGORY_POOLS[category][rng.integers(30)] for _ in range(n_cat)
                ]
                + [event_pool[rng.integers(len(event_pool))] for _ in range(n_event)]
            )
            order = rng.permutation(len(tokens))
            tokens = [tokens[i] for i in order]
            n_mentions = int(rng.integers(cfg.mentions_min, cfg.mentions_max + 1))
            keys = rng.choice(cfg.entity_keys_per_event, size=min(n_mentions, cfg.entity_keys_per_event), replace=False)
            mention_tokens = []
            for k in sorted(int(x) for x in keys):
                surface = _event_surface(e, k)
                pos = int(rng.integers(len(tokens) + 1))
                tokens.insert(pos, surface)
                mention_tokens.append(surface)
            text = " ".join(tokens)
            mentions = []
            cursor = 0
            for tok in tokens:
                if tok in mention_tokens:
                    k = int(tok.rsplit("-", 1)[1])
                    mentions.append(
                        EntityMention(
                            entity_type=DEFAULT_ENTITY_TYPES[(e + k) % len(DEFAULT_ENTITY_TYPES)],
                            surface=tok,
                            span=(cursor, cursor + len(tok)),
                        )
                    )
                cursor += len(tok) + 1
            offset_h = float(rng.uniform(0.0, cfg.event_duration_hours))
            cats = {category}
            if rng.random() < 0.15:
                cats.add(SECURITY_LABELS[int(rng.integers(len(SECURITY_LABELS)))])
            user = spam_user if spam else f"u{e}_{int(rng.integers(cfg.tweets_per_event))}"
            records.append(
                TweetRecord(
                    tweet_id=f"t{serial:06d}",
                    user_id=user,
                    posted_at=start + timedelta(hours=e * cfg.event_spacing_hours + offset_h),
                    text=text,
                    gold_event_id=f"ev{e:03d}",
                    gold_categories=frozenset(cats),
                    follower_count=int(np.exp(rng.normal(4.0, 1.5))),
                    entities=tuple(mentions),
                )
            )
            serial += 1

    for _ in range(cfg.n_noise):
        n_tokens = int(rng.integers(cfg.tokens_min, cfg.tokens_max + 1))
        n_shared = int(round(n_tokens * cfg.shared_fraction))
        tokens = [
            _EVERYDAY_POOL[rng.integers(len(_EVERYDAY_POOL))]
            for _ in range(n_tokens - n_shared)
        ] + [_SHARED_POOL[rng.integers(len(_SHARED_POOL))] for _ in range(n_shared)]
        order = rng.permutation(len(tokens))
        text = " ".join(tokens[j] for j in order)
        records.append(
            TweetRecord(
                tweet_id=f"t{serial:06d}",
                user_id=f"n{int(rng.integers(max(cfg.n_noise, 1)))}",
                posted_at=start + timedelta(hours=float(rng.uniform(0.0, span_hours))),
                text=text,
                gold_event_id=None,
                gold_categories=frozenset(
                    {"Non-security" if rng.random() < 0.5 else "Uninformative"}
                ),
                follower_count=int(np.exp(rng.normal(3.0, 1.5))),
                entities=(),
            )
        )
        serial += 1

    records.sort(key=lambda t: (t.posted_at, t.tweet_id))
    return Corpus(tweets=tuple(records), split_tag="unlabeled")
