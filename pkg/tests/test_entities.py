import dataclasses
import json
import re

import pytest
from hypothesis import given, strategies as st

from tweetsieve.corpus import Corpus, TweetRecord, load_corpus, parse_timestamp, save_corpus
from tweetsieve.entities import (
    DEFAULT_ENTITY_TYPES,
    EntityMention,
    Gazetteer,
    export_annotations,
    extract_gazetteer,
    import_annotations,
    load_entity_types,
    ner_evaluate,
    normalize_surface,
)
from tweetsieve.errors import DataValidationError


def test_type_inventory_has_thirteen():
    assert len(DEFAULT_ENTITY_TYPES) == 13
    assert len(set(DEFAULT_ENTITY_TYPES)) == 13


def test_entity_types_manifest(tmp_path):
    path = tmp_path / "types.json"
    path.write_text(json.dumps(list(DEFAULT_ENTITY_TYPES)), encoding="utf-8")
    assert load_entity_types(path) == DEFAULT_ENTITY_TYPES
    path.write_text(json.dumps(["only", "three", "names"]), encoding="utf-8")
    with pytest.raises(DataValidationError, match="13"):
        load_entity_types(path)


@given(st.text(max_size=60))
def test_normalization_idempotent(s):
    once = normalize_surface(s)
    assert normalize_surface(once) == once


def test_extract_two_entities_with_spans():
    gaz = Gazetteer({"whatsapp": "identity", "zero-day": "vulnerability"})
    text = "WhatsApp zero-day exploited"
    mentions = extract_gazetteer(text, gaz)
    assert [(m.key, m.entity_type, m.span) for m in mentions] == [
        ("whatsapp", "identity", (0, 8)),
        ("zero-day", "vulnerability", (9, 17)),
    ]
    for m in mentions:
        assert text[m.span[0] : m.span[1]] == m.surface


def test_extract_longest_match_wins():
    gaz = Gazetteer({"open": "tool", "openssl": "software"})
    mentions = extract_gazetteer("OpenSSL patch", gaz)
    assert len(mentions) == 1
    assert mentions[0].key == "openssl"
    assert mentions[0].entity_type == "software"


def test_extract_respects_word_boundaries():
    gaz = Gazetteer({"ssl": "software"})
    assert extract_gazetteer("openssl is not a match", gaz) == []
    assert len(extract_gazetteer("ssl handshake", gaz)) == 1


def brute_force_extract(text, entries):
    """All-substring scan: leftmost-longest non-overlapping on boundaries."""
    lower = text.lower()
    word = re.compile(r"\w")

    def boundary_ok(s, e):
        if s > 0 and word.match(text[s - 1]):
            return False
        if e < len(text) and word.match(text[e]):
            return False
        return True

    found = []
    i = 0
    while i < len(text):
        best = None
        for key in entries:
            end = i + len(key)
            if lower[i:end] == key and boundary_ok(i, end):
                if best is None or end > best[1]:
                    best = (i, end)
        if best:
            found.append((best[0], best[1], entries[lower[best[0] : best[1]]]))
            i = best[1]
        else:
            i += 1
    return found


def test_extract_matches_brute_force_oracle(rng):
    vocab = [f"ent{i}" for i in range(20)] + ["zero-day", "open", "openssl", "big fish"]
    entries = {
        k: DEFAULT_ENTITY_TYPES[i % len(DEFAULT_ENTITY_TYPES)] for i, k in enumerate(vocab)
    }
    gaz = Gazetteer(entries)
    filler = [f"w{i}" for i in range(30)]
    for _ in range(500):
        n = int(rng.integers(1, 15))
        tokens = []
        for _ in range(n):
            if rng.random() < 0.35:
                tokens.append(vocab[int(rng.integers(len(vocab)))])
            else:
                tokens.append(filler[int(rng.integers(len(filler)))])
        text = " ".join(tokens)
        got = [(m.span[0], m.span[1], m.entity_type) for m in extract_gazetteer(text, gaz)]
        assert got == brute_force_extract(text, entries)


def make_corpus(texts):
    tweets = tuple(
        TweetRecord(
            tweet_id=f"t{i}",
            user_id="u",
            posted_at=parse_timestamp("2022-06-01T00:00:00Z"),
            text=text,
        )
        for i, text in enumerate(texts)
    )
    return Corpus(tweets=tweets)


def test_import_empty_annotations(tmp_path):
    corpus = make_corpus(["alpha", "beta"])
    path = tmp_path / "ann.jsonl"
    path.write_text("", encoding="utf-8")
    assert import_annotations(corpus, path) is corpus


def test_import_one_per_tweet(tmp_path):
    corpus = make_corpus(["alpha one", "beta two"])
    path = tmp_path / "ann.jsonl"
    lines = [
        {"tweet_id": "t0", "entities": [{"type": "malware", "surface": "alpha"}]},
        {"tweet_id": "t1", "entities": [{"type": "tool", "surface": "beta"}]},
    ]
    path.write_text("".join(json.dumps(x) + "\n" for x in lines), encoding="utf-8")
    out = import_annotations(corpus, path)
    assert [len(t.entities) for t in out.tweets] == [1, 1]
    assert out.tweets[0].entities[0].key == "alpha"


def test_import_unknown_tweet_id(tmp_path):
    corpus = make_corpus(["alpha"])
    path = tmp_path / "ann.jsonl"
    path.write_text(json.dumps({"tweet_id": "nope", "entities": []}) + "\n", encoding="utf-8")
    with pytest.raises(DataValidationError, match="unknown tweet_id"):
        import_annotations(corpus, path)


def test_import_unknown_entity_type(tmp_path):
    corpus = make_corpus(["alpha"])
    path = tmp_path / "ann.jsonl"
    rec = {"tweet_id": "t0", "entities": [{"type": "dragon", "surface": "alpha"}]}
    path.write_text(json.dumps(rec) + "\n", encoding="utf-8")
    with pytest.raises(DataValidationError, match="unknown entity type"):
        import_annotations(corpus, path)


def test_export_import_round_trip_multisets(tmp_path, rng):
    texts = []
    mention_sets = []
    for i in range(50):
        words = [f"w{int(rng.integers(10))}" for _ in range(6)]
        text = " ".join(words)
        mentions = []
        for _ in range(int(rng.integers(0, 4))):
            w = words[int(rng.integers(len(words)))]
            mentions.append(
                EntityMention(
                    entity_type=DEFAULT_ENTITY_TYPES[int(rng.integers(13))],
                    surface=w,
                )
            )
        texts.append(text)
        mention_sets.append(tuple(mentions))
    corpus = make_corpus(texts)
    tweets = tuple(
        dataclasses.replace(t, entities=ms) for t, ms in zip(corpus.tweets, mention_sets)
    )
    corpus = Corpus(tweets=tweets)
    ann = tmp_path / "ann.jsonl"
    export_annotations(corpus, ann)
    stripped = make_corpus(texts)
    back = import_annotations(stripped, ann)
    for orig, imported in zip(corpus.tweets, back.tweets):
        assert sorted(m.identity() for m in orig.entities) == sorted(
            m.identity() for m in imported.entities
        )


def test_corpus_jsonl_round_trips_entities(tmp_path):
    gaz = Gazetteer({"openssl": "software"})
    text = "OpenSSL patch released"
    mentions = tuple(extract_gazetteer(text, gaz))
    corpus = Corpus(
        tweets=(
            TweetRecord(
                tweet_id="t0",
                user_id="u",
                posted_at=parse_timestamp("2022-06-01T00:00:00Z"),
                text=text,
                entities=mentions,
            ),
        )
    )
    path = tmp_path / "c.jsonl"
    save_corpus(corpus, path)
    again = load_corpus(path)
    assert again.tweets[0].entities == mentions


def test_gazetteer_tsv(tmp_path):
    path = tmp_path / "gaz.tsv"
    path.write_text("# comment\nOpenSSL\tsoftware\nzero-day\tvulnerability\n", encoding="utf-8")
    gaz = Gazetteer.from_tsv(path)
    assert gaz.entries == {"openssl": "software", "zero-day": "vulnerability"}
    with pytest.raises(DataValidationError):
        Gazetteer({})


def mention(key, etype="malware", span=None):
    return EntityMention(entity_type=etype, surface=key, span=span)


def test_ner_perfect():
    gold = [[mention("a"), mention("b", "tool")], [mention("c")]]
    assert ner_evaluate(gold, gold) == (1.0, 1.0, 1.0)


def test_ner_empty_prediction():
    gold = [[mention("a")]]
    assert ner_evaluate(gold, [[]]) == (0.0, 0.0, 0.0)


def test_ner_half_right():
    gold = [[mention("a"), mention("b")]]
    pred = [[mention("a"), mention("zzz")]]
    p, r, f1 = ner_evaluate(gold, pred)
    assert (p, r, f1) == (0.5, 0.5, 0.5)


def test_ner_both_empty_scores_one():
    assert ner_evaluate([[]], [[]]) == (1.0, 1.0, 1.0)


def test_ner_span_and_type_must_match():
    gold = [[mention("a", span=(0, 1))]]
    assert ner_evaluate(gold, [[mention("a", span=(1, 2))]])[0] == 0.0
    assert ner_evaluate(gold, [[mention("a", etype="tool", span=(0, 1))]])[0] == 0.0


def test_ner_length_mismatch():
    with pytest.raises(DataValidationError, match="length"):
        ner_evaluate([[]], [[], []])


def test_ner_swap_symmetry(rng):
    pool = [mention(f"k{i}", DEFAULT_ENTITY_TYPES[i % 13]) for i in range(6)]
    for _ in range(40):
        gold = [
            [pool[j] for j in rng.integers(0, 6, rng.integers(0, 4))] for _ in range(5)
        ]
        pred = [
            [pool[j] for j in rng.integers(0, 6, rng.integers(0, 4))] for _ in range(5)
        ]
        p1, r1, f1 = ner_evaluate(gold, pred)
        p2, r2, f2 = ner_evaluate(pred, gold)
        assert p1 == pytest.approx(r2)
        assert r1 == pytest.approx(p2)
        assert f1 == pytest.approx(f2)
