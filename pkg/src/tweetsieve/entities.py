"""Security-entity annotation.

Thirteen entity types derived from the STIX 2.1 domain objects, a
gazetteer-based extractor producing character spans, import/export of
externally produced annotations, and an exact-match span-level scorer.
"""

from __future__ import annotations

import dataclasses
import json
import re
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

from .errors import DataValidationError

# Default entity-type inventory. The concrete names are configurable via a
# JSON manifest (a list of exactly 13 strings); only the count is fixed.
DEFAULT_ENTITY_TYPES = (
    "threat-actor",
    "malware",
    "vulnerability",
    "tool",
    "identity",
    "campaign",
    "attack-pattern",
    "infrastructure",
    "location",
    "intrusion-set",
    "course-of-action",
    "software",
    "indicator",
)

N_ENTITY_TYPES = 13


def load_entity_types(path) -> tuple[str, ...]:
    """Read an entity-type manifest: a JSON array of exactly 13 names."""
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, list) or len(data) != N_ENTITY_TYPES:
        raise DataValidationError(
            f"entity-type manifest must list exactly {N_ENTITY_TYPES} names, got {data!r}"
        )
    names = tuple(str(x) for x in data)
    if len(set(names)) != N_ENTITY_TYPES or any(not n for n in names):
        raise DataValidationError("entity-type manifest names must be unique and non-empty")
    return names


def normalize_surface(surface: str) -> str:
    """Lowercase, collapse internal whitespace, trim."""
    return " ".join(surface.split()).lower()


@dataclass(frozen=True)
class EntityMention:
    """One typed entity occurrence in a tweet."""

    entity_type: str
    surface: str
    span: Optional[tuple[int, int]] = None
    key: str = ""

    def __post_init__(self):
        if not self.key:
            object.__setattr__(self, "key", normalize_surface(self.surface))

    def identity(self):
        return (self.key, self.entity_type, self.span)


def validate_mention(
    mention: EntityMention, text: Optional[str], entity_types: Sequence[str]
) -> None:
    if mention.entity_type not in entity_types:
        raise DataValidationError(f"unknown entity type: {mention.entity_type!r}")
    if mention.key != normalize_surface(mention.surface):
        raise DataValidationError(
            f"mention key {mention.key!r} is not the normalization of {mention.surface!r}"
        )
    if mention.span is not None and text is not None:
        start, end = mention.span
        if text[start:end] != mention.surface:
            raise DataValidationError(
                f"span {mention.span} does not cover surface {mention.surface!r}"
            )


class Gazetteer:
    """Read-only lexicon mapping normalized surfaces to entity types."""

    def __init__(self, entries: dict[str, str], entity_types: Sequence[str] = DEFAULT_ENTITY_TYPES):
        if not entries:
            raise DataValidationError("gazetteer is empty")
        self.entries: dict[str, str] = {}
        for surface, etype in entries.items():
            key = normalize_surface(surface)
            if not key:
                raise DataValidationError("gazetteer entry with empty surface")
            if etype not in entity_types:
                raise DataValidationError(f"unknown entity type in gazetteer: {etype!r}")
            self.entries[key] = etype
        self.entity_types = tuple(entity_types)
        self._pattern = self._compile()

    def _compile(self) -> re.Pattern:
        # Longest-first alternation so the leftmost match is also the
        # longest at its position; \s+ lets multi-word keys match any
        # internal whitespace run. Word boundaries on both ends.
        alts = sorted(self.entries, key=len, reverse=True)
        parts = [re.escape(k).replace("\\ ", r"\s+") for k in alts]
        return re.compile(r"(?<!\w)(?:" + "|".join(parts) + r")(?!\w)", re.IGNORECASE)

    @classmethod
    def from_tsv(cls, path, entity_types: Sequence[str] = DEFAULT_ENTITY_TYPES) -> "Gazetteer":
        """Load ``surface<TAB>type`` lines; ``#`` starts a comment line."""
        entries: dict[str, str] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, start=1):
                line = raw.rstrip("\n")
                if not line.strip() or line.lstrip().startswith("#"):
                    continue
                if "\t" not in line:
                    raise DataValidationError(f"{path}:{lineno}: expected surface<TAB>type")
                surface, etype = line.split("\t", 1)
                entries[surface] = etype.strip()
        return cls(entries, entity_types)


def extract_gazetteer(text: str, gaz: Gazetteer) -> list[EntityMention]:
    """Longest-match, case-insensitive, non-overlapping scan over *text*.

    Matches are taken left to right on word boundaries; each mention
    carries the span of the original (case-preserved) text.
    """
    mentions = []
    for match in gaz._pattern.finditer(text):
        surface = match.group(0)
        key = normalize_surface(surface)
        mentions.append(
            EntityMention(
                entity_type=gaz.entries[key],
                surface=surface,
                span=(match.start(), match.end()),
                key=key,
            )
        )
    return mentions


def mentions_to_json(mentions: Sequence[EntityMention]) -> list[dict]:
    out = []
    for m in mentions:
        rec = {"type": m.entity_type, "surface": m.surface}
        if m.span is not None:
            rec["start"], rec["end"] = int(m.span[0]), int(m.span[1])
        out.append(rec)
    return out


def mentions_from_json(
    items, text: Optional[str] = None, entity_types: Sequence[str] = DEFAULT_ENTITY_TYPES
) -> list[EntityMention]:
    mentions = []
    for item in items:
        span = None
        if "start" in item or "end" in item:
            if "start" not in item or "end" not in item:
                raise DataValidationError(f"mention with half a span: {item!r}")
            span = (int(item["start"]), int(item["end"]))
        m = EntityMention(entity_type=item["type"], surface=item["surface"], span=span)
        validate_mention(m, text, entity_types)
        mentions.append(m)
    return mentions


def import_annotations(corpus, path, entity_types: Sequence[str] = DEFAULT_ENTITY_TYPES):
    """Attach annotation-JSONL mentions to a corpus, returning a new corpus.

    Every annotation line must reference a known tweet_id and use known
    entity types; mentions accumulate on top of any the tweet already has.
    """
    by_id = {t.tweet_id: i for i, t in enumerate(corpus.tweets)}
    extra: dict[int, list[EntityMention]] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise DataValidationError(f"{path}:{lineno}: bad JSON: {exc}") from exc
            tid = rec.get("tweet_id")
            if tid not in by_id:
                raise DataValidationError(f"{path}:{lineno}: unknown tweet_id {tid!r}")
            idx = by_id[tid]
            text = corpus.tweets[idx].text
            try:
                mentions = mentions_from_json(rec.get("entities", []), text, entity_types)
            except DataValidationError as exc:
                raise DataValidationError(f"{path}:{lineno}: {exc}") from exc
            extra.setdefault(idx, []).extend(mentions)
    if not extra:
        return corpus
    tweets = list(corpus.tweets)
    for idx, mentions in extra.items():
        tweet = tweets[idx]
        tweets[idx] = dataclasses.replace(tweet, entities=tuple(tweet.entities) + tuple(mentions))
    return dataclasses.replace(corpus, tweets=tuple(tweets))


def export_annotations(corpus, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for tweet in corpus.tweets:
            rec = {"tweet_id": tweet.tweet_id, "entities": mentions_to_json(tweet.entities)}
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def ner_evaluate(gold: Sequence, predicted: Sequence) -> tuple[float, float, float]:
    """Exact-match precision/recall/F1 over aligned per-tweet mention sets.

    A prediction is a true positive iff its (key, entity_type, span)
    triple matches a gold mention of the same tweet; matching is
    multiset-aware. Empty denominators score 0, except that identical
    empty gold and predicted score 1 across the board.
    """
    if len(gold) != len(predicted):
        raise DataValidationError(
            f"gold/predicted length mismatch: {len(gold)} vs {len(predicted)}"
        )
    tp = n_gold = n_pred = 0
    for g_set, p_set in zip(gold, predicted):
        g_counts = Counter(m.identity() for m in g_set)
        p_counts = Counter(m.identity() for m in p_set)
        tp += sum((g_counts & p_counts).values())
        n_gold += sum(g_counts.values())
        n_pred += sum(p_counts.values())
    if n_gold == 0 and n_pred == 0:
        return 1.0, 1.0, 1.0
    precision = tp / n_pred if n_pred else 0.0
    recall = tp / n_gold if n_gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if (precision + recall) else 0.0
    return precision, recall, f1
