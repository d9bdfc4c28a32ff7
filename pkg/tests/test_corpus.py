import datetime
import json
from datetime import timedelta, timezone

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tweetsieve.corpus import (
    Corpus,
    TweetRecord,
    load_corpus,
    load_features,
    parse_duration,
    parse_timestamp,
    save_corpus,
    save_features,
    temporal_features,
    window_stream,
)
from tweetsieve.categorizer import CATEGORY_LABELS
from tweetsieve.errors import DataValidationError

UTC = timezone.utc


def write_lines(path, lines):
    path.write_text("".join(json.dumps(rec) + "\n" for rec in lines), encoding="utf-8")


def minimal(tid, ts="2022-06-01T00:00:00Z", **extra):
    rec = {"tweet_id": tid, "user_id": "u1", "posted_at": ts, "text": f"tweet {tid}"}
    rec.update(extra)
    return rec


def test_load_three_tweets(tmp_path):
    path = tmp_path / "c.jsonl"
    write_lines(path, [minimal("a"), minimal("b"), minimal("c")])
    corpus = load_corpus(path)
    assert [t.tweet_id for t in corpus.tweets] == ["a", "b", "c"]
    assert corpus.features is None


def test_feature_row_mismatch(tmp_path):
    path = tmp_path / "c.jsonl"
    write_lines(path, [minimal(f"t{i}") for i in range(5)])
    feat = tmp_path / "f.bin"
    save_features(np.zeros((4, 3)), feat)
    with pytest.raises(DataValidationError, match="feature rows"):
        load_corpus(path, feature_source=feat)


def test_malformed_line_reports_lineno(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text(json.dumps(minimal("a")) + "\n{not json\n", encoding="utf-8")
    with pytest.raises(DataValidationError, match=":2"):
        load_corpus(path)


def test_duplicate_tweet_id(tmp_path):
    path = tmp_path / "c.jsonl"
    write_lines(path, [minimal("a"), minimal("a")])
    with pytest.raises(DataValidationError, match="duplicate"):
        load_corpus(path)


def test_unknown_category_label(tmp_path):
    path = tmp_path / "c.jsonl"
    write_lines(path, [minimal("a", gold_categories=["Warp-core Breach"])])
    with pytest.raises(DataValidationError, match="unknown category"):
        load_corpus(path)


def random_record(rng, serial):
    cats = None
    if rng.random() < 0.5:
        k = int(rng.integers(1, 4))
        cats = sorted(rng.choice(CATEGORY_LABELS, size=k, replace=False))
    rec = minimal(
        f"t{serial}",
        ts=f"2022-06-{int(rng.integers(1, 28)):02d}T{int(rng.integers(0, 24)):02d}:{int(rng.integers(0, 60)):02d}:{int(rng.integers(0, 60)):02d}Z",
    )
    rec["user_id"] = f"u{int(rng.integers(100))}"
    rec["text"] = " ".join(f"w{int(rng.integers(1000))}" for _ in range(int(rng.integers(1, 12))))
    if cats:
        rec["gold_categories"] = cats
    if rng.random() < 0.5:
        rec["gold_event_id"] = f"e{int(rng.integers(20))}"
    if rng.random() < 0.5:
        rec["follower_count"] = int(rng.integers(0, 10**6))
    if rng.random() < 0.3:
        rec["text_embedding"] = list(rng.normal(size=4))
    return rec


def test_save_load_round_trip_records(tmp_path, rng):
    path = tmp_path / "c.jsonl"
    write_lines(path, [random_record(rng, i) for i in range(1000)])
    corpus = load_corpus(path)
    out = tmp_path / "out.jsonl"
    save_corpus(corpus, out)
    again = load_corpus(out)
    assert corpus.tweets == again.tweets


def test_save_load_save_byte_identical(tmp_path, rng):
    path = tmp_path / "c.jsonl"
    write_lines(path, [random_record(rng, i) for i in range(200)])
    first = tmp_path / "one.jsonl"
    second = tmp_path / "two.jsonl"
    save_corpus(load_corpus(path), first)
    save_corpus(load_corpus(first), second)
    assert first.read_bytes() == second.read_bytes()


def test_features_round_trip_bits(tmp_path, rng):
    mat = rng.normal(size=(17, 9)).astype(np.float32)
    path = tmp_path / "f.bin"
    save_features(mat, path)
    again = load_features(path)
    assert again.shape == (17, 9)
    assert np.array_equal(again.astype(np.float32), mat)


def test_temporal_one_day():
    tf = temporal_features(parse_timestamp("2020-01-02T00:00:00Z"))
    assert tf.hours_since_epoch == 24.0
    assert tf.days_since_epoch == 1.0


def test_temporal_quarter_day():
    tf = temporal_features(parse_timestamp("2020-01-01T06:00:00Z"))
    assert (tf.hours_since_epoch, tf.days_since_epoch) == (6.0, 0.25)


def test_temporal_across_leap_year():
    # independent civil-calendar oracle: count days via date ordinals
    days = datetime.date(2022, 6, 1).toordinal() - datetime.date(2020, 1, 1).toordinal()
    tf = temporal_features(parse_timestamp("2022-06-01T00:00:00Z"))
    assert tf.days_since_epoch == float(days) == 882.0
    assert tf.hours_since_epoch == days * 24.0 == 21168.0


def test_temporal_rejects_pre_epoch():
    with pytest.raises(DataValidationError, match="epoch"):
        temporal_features(parse_timestamp("2019-12-31T23:59:59Z"))


@given(st.integers(min_value=0, max_value=10**9), st.integers(min_value=1, max_value=10**6))
def test_temporal_monotone(base_seconds, delta):
    t0 = datetime.datetime(2020, 1, 1, tzinfo=UTC) + timedelta(seconds=base_seconds)
    t1 = t0 + timedelta(seconds=delta)
    assert temporal_features(t1).hours_since_epoch > temporal_features(t0).hours_since_epoch
    f = temporal_features(t1)
    assert f.days_since_epoch == f.hours_since_epoch / 24.0


def corpus_at(times):
    tweets = tuple(
        TweetRecord(tweet_id=f"t{i}", user_id="u", posted_at=parse_timestamp(ts), text="x")
        for i, ts in enumerate(times)
    )
    return Corpus(tweets=tweets)


def test_window_example_two_tweets():
    corpus = corpus_at(["2022-06-01T00:30:00Z", "2022-06-01T05:30:00Z"])
    windows = window_stream(corpus, timedelta(hours=6), timedelta(hours=4))
    assert len(windows) == 2
    assert windows[0].start == parse_timestamp("2022-06-01T00:00:00Z")
    assert windows[0].member_indices == (0, 1)
    assert windows[1].start == parse_timestamp("2022-06-01T04:00:00Z")
    assert windows[1].member_indices == (1,)


def test_window_stride_equals_length_partitions(rng):
    times = [
        f"2022-06-01T{int(h):02d}:{int(m):02d}:00Z"
        for h, m in zip(rng.integers(0, 24, 40), rng.integers(0, 60, 40))
    ]
    corpus = corpus_at(times)
    windows = window_stream(corpus, timedelta(hours=6), timedelta(hours=6))
    seen = [i for w in windows for i in w.member_indices]
    assert sorted(seen) == list(range(40))
    assert len(seen) == len(set(seen))


def test_window_membership_brute_force(rng):
    base = parse_timestamp("2022-06-01T00:00:00Z")
    times = sorted(base + timedelta(seconds=int(s)) for s in rng.integers(0, 48 * 3600, 120))
    corpus = Corpus(
        tweets=tuple(
            TweetRecord(tweet_id=f"t{i}", user_id="u", posted_at=ts, text="x")
            for i, ts in enumerate(times)
        )
    )
    length, stride = timedelta(hours=6), timedelta(hours=4)
    windows = window_stream(corpus, length, stride)
    for w in windows:
        for i, t in enumerate(corpus.tweets):
            assert (i in w.member_indices) == (w.start <= t.posted_at < w.start + length)
    counts = [sum(i in w.member_indices for w in windows) for i in range(len(times))]
    assert all(c in (1, 2) for c in counts)


def test_window_empty_corpus():
    with pytest.raises(DataValidationError, match="empty"):
        window_stream(Corpus(tweets=()), timedelta(hours=6), timedelta(hours=4))


def test_parse_duration():
    assert parse_duration("6h") == timedelta(hours=6)
    assert parse_duration("30m") == timedelta(minutes=30)
    assert parse_duration("2d") == timedelta(days=2)
    with pytest.raises(DataValidationError):
        parse_duration("six hours")


def test_manifest_checksum_mismatch(tmp_path):
    path = tmp_path / "c.jsonl"
    write_lines(path, [minimal("a"), minimal("b")])
    feat = tmp_path / "f.bin"
    save_features(np.zeros((2, 3)), feat)
    (tmp_path / "f.bin.manifest.json").write_text(
        json.dumps({"input_sha256": "0" * 64}), encoding="utf-8"
    )
    with pytest.raises(DataValidationError, match="checksum"):
        load_corpus(path, feature_source=feat)
