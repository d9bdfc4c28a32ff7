"""Informative-user scoring.

A user's score is the mean per-window density of event-related tweets
times the natural log of (followers + 1). Windows where the user posted
nothing are excluded from the mean by default.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .clustering import EventInstance
from .corpus import Corpus, Window
from .errors import DataValidationError


@dataclass
class UserActivity:
    user_id: str
    tweets_per_window: list[int]  # N_t over the user's window set T
    event_tweets_per_window: list[int]  # e_t aligned with tweets_per_window
    follower_count: int

    def __post_init__(self):
        if len(self.tweets_per_window) != len(self.event_tweets_per_window):
            raise DataValidationError("window count vectors misaligned")
        for n_t, e_t in zip(self.tweets_per_window, self.event_tweets_per_window):
            if not (0 <= e_t <= n_t):
                raise DataValidationError(f"need 0 <= e_t <= N_t, got e_t={e_t} N_t={n_t}")
        if self.follower_count < 0:
            raise DataValidationError("negative follower count")


def score_user(activity: UserActivity) -> float:
    """Mean per-window density times log(followers + 1)."""
    pairs = [
        (e_t, n_t)
        for n_t, e_t in zip(activity.tweets_per_window, activity.event_tweets_per_window)
        if n_t > 0
    ]
    if not pairs:
        raise DataValidationError(f"user {activity.user_id} has no active windows")
    density = sum(e / n for e, n in pairs) / len(pairs)
    return density * math.log(activity.follower_count + 1)


@dataclass
class UserScore:
    user_id: str
    score: float
    windows: int
    followers: int


def collect_activity(
    events: Sequence[EventInstance],
    corpus: Corpus,
    windows: Sequence[Window],
    category: Optional[str] = None,
) -> list[UserActivity]:
    """Aggregate per-user, per-window tweet and event-tweet counts.

    Event-related means "member of a retained event"; with a category,
    only events carrying that category count. Users without follower
    counts score as zero-follower users (a warning-level situation the
    caller may log).
    """
    kept = [
        ev
        for ev in events
        if category is None or category in ev.categories
    ]
    # Events carrying window starts gate relatedness per window; events
    # without them (single-shot clustering) count in every window.
    windowed_mode = any(ev.window_start is not None for ev in kept)
    event_tweets_by_window: dict[object, set[str]] = {}
    global_event_tweets: set[str] = set()
    for ev in kept:
        if ev.window_start is not None:
            event_tweets_by_window.setdefault(ev.window_start, set()).update(ev.tweet_ids)
        else:
            global_event_tweets.update(ev.tweet_ids)

    followers: dict[str, int] = {}
    for t in corpus.tweets:
        followers.setdefault(t.user_id, t.follower_count or 0)

    per_user: dict[str, dict[int, list[int]]] = {}
    for wi, window in enumerate(windows):
        if windowed_mode:
            in_window = event_tweets_by_window.get(window.start, set()) | global_event_tweets
        else:
            in_window = global_event_tweets
        for idx in window.member_indices:
            tweet = corpus.tweets[idx]
            cell = per_user.setdefault(tweet.user_id, {}).setdefault(wi, [0, 0])
            cell[0] += 1
            if tweet.tweet_id in in_window:
                cell[1] += 1
    activities = []
    for user_id in sorted(per_user):
        cells = per_user[user_id]
        n_t = [cells[w][0] for w in sorted(cells)]
        e_t = [cells[w][1] for w in sorted(cells)]
        activities.append(
            UserActivity(
                user_id=user_id,
                tweets_per_window=n_t,
                event_tweets_per_window=e_t,
                follower_count=followers.get(user_id, 0),
            )
        )
    return activities


def rank_users(
    events: Sequence[EventInstance],
    corpus: Corpus,
    windows: Sequence[Window],
    category: Optional[str] = None,
) -> list[UserScore]:
    """Users sorted by descending score; ties broken by user id."""
    scored = []
    for activity in collect_activity(events, corpus, windows, category):
        scored.append(
            UserScore(
                user_id=activity.user_id,
                score=score_user(activity),
                windows=len(activity.tweets_per_window),
                followers=activity.follower_count,
            )
        )
    scored.sort(key=lambda s: (-s.score, s.user_id))
    return scored
