import math

import numpy as np
import pytest

from tweetsieve.clustering import EventInstance
from tweetsieve.corpus import Corpus, TweetRecord, parse_timestamp, window_stream
from tweetsieve.errors import DataValidationError
from tweetsieve.userscore import UserActivity, collect_activity, rank_users, score_user
from datetime import timedelta


def activity(n_t, e_t, followers):
    return UserActivity(
        user_id="u",
        tweets_per_window=n_t,
        event_tweets_per_window=e_t,
        follower_count=followers,
    )


def test_zero_followers_scores_zero():
    assert score_user(activity([4, 2], [4, 2], 0)) == 0.0


def test_unit_density_and_e_followers_scores_one():
    # follower count chosen so log(F + 1) = 1 exactly
    assert score_user(activity([3, 5], [3, 5], math.e - 1)) == pytest.approx(1.0, abs=1e-12)


def test_two_window_formula_value():
    got = score_user(activity([4, 2], [2, 1], 99))
    assert got == pytest.approx(0.5 * math.log(100.0), abs=1e-12)
    assert got == pytest.approx(2.302585, abs=1e-6)


def test_empty_windows_excluded_from_mean():
    # second window has no posts at all: excluded, not counted as zero
    assert score_user(activity([4, 0], [4, 0], math.e - 1)) == pytest.approx(1.0, abs=1e-12)


def test_no_active_windows_is_an_error():
    with pytest.raises(DataValidationError):
        score_user(activity([0, 0], [0, 0], 10))


def test_activity_validation():
    with pytest.raises(DataValidationError):
        UserActivity("u", [2], [3], 5)  # e_t > N_t
    with pytest.raises(DataValidationError):
        UserActivity("u", [2], [1, 1], 5)
    with pytest.raises(DataValidationError):
        UserActivity("u", [2], [1], -1)


def test_score_monotone_in_followers_and_density():
    base = score_user(activity([4], [2], 10))
    assert score_user(activity([4], [3], 10)) > base
    assert score_user(activity([4], [2], 100)) > base
    assert score_user(activity([1], [1], 50)) <= math.log(51)


def build_corpus_and_events(rows, window_hours=6):
    """rows: (tweet_id, user_id, hour_offset, in_event, followers)"""
    base = parse_timestamp("2022-06-01T00:00:00Z")
    tweets = []
    event_ids = []
    for tid, uid, hour, in_event, followers in rows:
        tweets.append(
            TweetRecord(
                tweet_id=tid,
                user_id=uid,
                posted_at=base + timedelta(hours=hour),
                text="x",
                follower_count=followers,
            )
        )
        if in_event:
            event_ids.append(tid)
    corpus = Corpus(tweets=tuple(tweets))
    windows = window_stream(corpus, timedelta(hours=window_hours), timedelta(hours=window_hours))
    events = []
    if event_ids:
        events.append(
            EventInstance(
                cluster_id=0,
                tweet_ids=tuple(event_ids),
                n_users=len({t.user_id for t in tweets if t.tweet_id in set(event_ids)}),
                n_tweets=len(event_ids),
                score=1.0,
                window_start=None,
                categories=("Vulnerability",),
            )
        )
    return corpus, windows, events


def test_rank_prefers_followers_at_equal_density():
    rows = [
        ("t1", "alice", 0.0, True, 10),
        ("t2", "bob", 0.1, True, 1000),
    ]
    corpus, windows, events = build_corpus_and_events(rows)
    ranking = rank_users(events, corpus, windows)
    assert [s.user_id for s in ranking] == ["bob", "alice"]


def test_zero_density_user_ranks_below_any_positive():
    rows = [("t%d" % i, "firehose", 0.1 * i, False, 10**6) for i in range(10)]
    rows += [("e1", "analyst", 0.0, True, 5)]
    corpus, windows, events = build_corpus_and_events(rows)
    ranking = rank_users(events, corpus, windows)
    assert ranking[0].user_id == "analyst"
    firehose = [s for s in ranking if s.user_id == "firehose"][0]
    assert firehose.score == 0.0


def test_rank_ties_break_lexicographically():
    rows = [
        ("t1", "zeta", 0.0, False, 7),
        ("t2", "alpha", 0.1, False, 7),
    ]
    corpus, windows, events = build_corpus_and_events(rows)
    ranking = rank_users(events, corpus, windows)
    assert [s.user_id for s in ranking] == ["alpha", "zeta"]


def test_category_restriction():
    base = parse_timestamp("2022-06-01T00:00:00Z")
    tweets = (
        TweetRecord(tweet_id="a", user_id="u1", posted_at=base, text="x", follower_count=10),
        TweetRecord(tweet_id="b", user_id="u2", posted_at=base, text="x", follower_count=10),
    )
    corpus = Corpus(tweets=tweets)
    windows = window_stream(corpus, timedelta(hours=6), timedelta(hours=6))
    events = [
        EventInstance(1, ("a",), 1, 1, 1.0, None, ("Vulnerability",)),
        EventInstance(2, ("b",), 1, 1, 1.0, None, ("DoS/DDoS",)),
    ]
    vuln = {s.user_id: s.score for s in rank_users(events, corpus, windows, category="Vulnerability")}
    assert vuln["u1"] > 0.0
    assert vuln["u2"] == 0.0


def test_ranking_matches_brute_force(rng):
    base = parse_timestamp("2022-06-01T00:00:00Z")
    rows = []
    event_tweets = set()
    for i in range(200):
        uid = f"user{int(rng.integers(50)):02d}"
        hour = float(rng.uniform(0, 48))
        tid = f"t{i}"
        in_event = bool(rng.random() < 0.4)
        if in_event:
            event_tweets.add(tid)
        rows.append((tid, uid, hour, in_event, int(rng.integers(0, 10**5))))
    corpus, windows, events = build_corpus_and_events(rows)
    ranking = rank_users(events, corpus, windows)

    # brute force: recompute densities per user and window from first principles
    followers = {}
    for tid, uid, hour, in_event, f in rows:
        followers.setdefault(uid, f)
    expected = {}
    for uid in {r[1] for r in rows}:
        densities = []
        for w in windows:
            mine = [corpus.tweets[i] for i in w.member_indices if corpus.tweets[i].user_id == uid]
            if not mine:
                continue
            e_t = sum(t.tweet_id in event_tweets for t in mine)
            densities.append(e_t / len(mine))
        expected[uid] = (sum(densities) / len(densities)) * math.log(followers[uid] + 1)
    for s in ranking:
        assert s.score == pytest.approx(expected[s.user_id], abs=1e-12)
    order = sorted(expected.items(), key=lambda kv: (-kv[1], kv[0]))
    assert [s.user_id for s in ranking] == [uid for uid, _ in order]


def test_log_base_change_preserves_ranking(rng):
    # natural log vs base-10 log scale scores by a constant; order is identical
    users = [(f"u{i}", float(rng.uniform(0, 1)), int(rng.integers(1, 10**6))) for i in range(50)]
    nat = sorted(users, key=lambda u: (-(u[1] * math.log(u[2] + 1)), u[0]))
    ten = sorted(users, key=lambda u: (-(u[1] * math.log10(u[2] + 1)), u[0]))
    assert [u[0] for u in nat] == [u[0] for u in ten]


def test_windowed_events_gate_relatedness():
    base = parse_timestamp("2022-06-01T00:00:00Z")
    tweets = (
        TweetRecord(tweet_id="a", user_id="u", posted_at=base, text="x", follower_count=5),
        TweetRecord(
            tweet_id="b", user_id="u", posted_at=base + timedelta(hours=7), text="x", follower_count=5
        ),
    )
    corpus = Corpus(tweets=tweets)
    windows = window_stream(corpus, timedelta(hours=6), timedelta(hours=6))
    events = [EventInstance(0, ("a", "b"), 1, 2, 1.0, windows[0].start, ())]
    acts = {a.user_id: a for a in collect_activity(events, corpus, windows)}
    # only the tweet inside the event's window counts as event-related
    assert acts["u"].event_tweets_per_window == [1, 0]
