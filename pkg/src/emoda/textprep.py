"""Text preprocessing, vocabulary construction, and lexicon-based emotion tagging.

Pipeline: lowercase -> decontraction -> punctuation stripping -> whitespace
tokenization.  Emotion tags come from a weighted-lexicon argmax over one of
two fixed taxonomies (6-label "ekman" or 8-label "plutchik"); a small
built-in lexicon ships with the package and a user lexicon can be loaded
from JSON-lines.  All functions here are pure.
"""

from __future__ import annotations

import json
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache


@dataclass(frozen=True)
class EmotionTaxonomy:
    name: str
    labels: tuple[str, ...]

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"unknown emotion label {label!r} for taxonomy {self.name!r}") from None


EKMAN = EmotionTaxonomy("ekman", ("joy", "surprise", "anger", "sadness", "disgust", "fear"))
PLUTCHIK = EmotionTaxonomy(
    "plutchik",
    ("joy", "surprise", "trust", "anger", "anticipation", "sadness", "disgust", "fear"),
)

_TAXONOMIES = {t.name: t for t in (EKMAN, PLUTCHIK)}


def get_taxonomy(name: str) -> EmotionTaxonomy:
    try:
        return _TAXONOMIES[name]
    except KeyError:
        raise ValueError(f"unknown taxonomy {name!r}; expected one of {sorted(_TAXONOMIES)}") from None


# Decontraction runs before punctuation stripping; rules applied in this order.
# "'s" is dropped rather than guessed (is/has/possessive are not separable
# without parsing).  Curly apostrophes are normalized first so the rules fire
# on typographic input as well.
_DECONTRACTION_RULES = (
    (re.compile(r"\bi'm\b"), "i am"),
    (re.compile(r"n't\b"), " not"),
    (re.compile(r"'ve\b"), " have"),
    (re.compile(r"'re\b"), " are"),
    (re.compile(r"'ll\b"), " will"),
    (re.compile(r"'d\b"), " would"),
    (re.compile(r"'s\b"), ""),
)

_APOSTROPHE_VARIANTS = str.maketrans({"’": "'", "ʼ": "'", "‘": "'"})

# ASCII symbol characters stripped in addition to Unicode P* categories.
_EXTRA_PUNCT = set("$+<=>^|~")


@lru_cache(maxsize=4096)
def _is_punct(ch: str) -> bool:
    return ch in _EXTRA_PUNCT or unicodedata.category(ch).startswith("P")


def preprocess(text: str) -> list[str]:
    """Lowercase, decontract, strip punctuation, and split on whitespace.

    Idempotent: feeding the joined output back in returns the same tokens.
    Empty or whitespace-only input yields an empty list.
    """
    text = text.lower().translate(_APOSTROPHE_VARIANTS)
    for pattern, repl in _DECONTRACTION_RULES:
        text = pattern.sub(repl, text)
    # Punctuation becomes a space so glued words ("a,b") split apart.
    text = "".join(" " if _is_punct(ch) else ch for ch in text)
    return text.split()


class Vocabulary:
    """Bijective token<->id map; id 0 is padding, id 1 is out-of-vocabulary."""

    PAD_ID = 0
    OOV_ID = 1

    def __init__(self, tokens: list[str]):
        self.id_to_token: list[str] = ["<pad>", "<oov>"]
        self.token_to_id: dict[str, int] = {}
        for tok in tokens:
            if tok in self.token_to_id:
                raise ValueError(f"duplicate token {tok!r}")
            self.token_to_id[tok] = len(self.id_to_token)
            self.id_to_token.append(tok)

    def __len__(self) -> int:
        return len(self.id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def lookup(self, token: str) -> int:
        return self.token_to_id.get(token, self.OOV_ID)

    @property
    def tokens(self) -> list[str]:
        """Real tokens in id order (ids >= 2)."""
        return self.id_to_token[2:]


def build_vocab(docs, min_count: int = 1) -> Vocabulary:
    """Vocabulary of tokens occurring >= min_count times across preprocessed texts.

    Insertion order equals first-occurrence order; ids start at 2.
    """
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    docs = list(docs)
    if not docs:
        raise ValueError("build_vocab requires a nonempty document list")
    counts: Counter[str] = Counter()
    order: list[str] = []
    seen: set[str] = set()
    for doc in docs:
        for tok in preprocess(doc.text):
            counts[tok] += 1
            if tok not in seen:
                seen.add(tok)
                order.append(tok)
    return Vocabulary([tok for tok in order if counts[tok] >= min_count])


def encode_ids(tokens: list[str], vocab: Vocabulary, max_len: int) -> list[int]:
    """Fixed-length id encoding: OOV -> 1, truncate tail, pad tail with 0."""
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    ids = [vocab.lookup(tok) for tok in tokens[:max_len]]
    ids.extend([Vocabulary.PAD_ID] * (max_len - len(ids)))
    return ids


@dataclass
class EmotionLexicon:
    """token -> [(emotion label, nonnegative weight)] under a fixed taxonomy."""

    taxonomy: EmotionTaxonomy
    entries: dict[str, list[tuple[str, float]]]

    def __post_init__(self):
        labels = set(self.taxonomy.labels)
        for token, pairs in self.entries.items():
            for label, weight in pairs:
                if label not in labels:
                    raise ValueError(
                        f"lexicon entry {token!r} uses {label!r}, not in taxonomy {self.taxonomy.name!r}"
                    )
                if weight < 0:
                    raise ValueError(f"lexicon entry {token!r} has negative weight {weight}")

    @classmethod
    def from_jsonl(cls, path, taxonomy: EmotionTaxonomy) -> "EmotionLexicon":
        """Load from JSON-lines with keys token / emotion / weight."""
        entries: dict[str, list[tuple[str, float]]] = {}
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    obj = json.loads(line)
                    token, emotion, weight = obj["token"], obj["emotion"], float(obj["weight"])
                except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
                    raise ValueError(f"{path}:{lineno}: bad lexicon line: {exc}") from exc
                entries.setdefault(token, []).append((emotion, weight))
        return cls(taxonomy, entries)


def annotate_emotion(tokens: list[str], lexicon: EmotionLexicon) -> int:
    """Argmax emotion index of summed token weights; ties break to the lowest index.

    Tokens with no lexicon entry contribute nothing; a text matching nothing
    falls back to label index 0.
    """
    labels = lexicon.taxonomy.labels
    scores = [0.0] * len(labels)
    index = {label: i for i, label in enumerate(labels)}
    for tok in tokens:
        for label, weight in lexicon.entries.get(tok, ()):
            scores[index[label]] += weight
    return scores.index(max(scores))


# Seed lexicon: ~200 common English emotion words.  Defined over the 8-label
# taxonomy; the 6-label view drops trust/anticipation entries.  Weights are
# 1.0 for clear markers, 0.5 where a word is split across two emotions.
_SEED_WORDS: dict[str, list[tuple[str, float]]] = {
    "joy": [
        ("happy", 1.0), ("glad", 1.0), ("delighted", 1.0), ("cheerful", 1.0),
        ("joyful", 1.0), ("joyous", 1.0), ("pleased", 1.0), ("thrilled", 1.0),
        ("wonderful", 1.0), ("smile", 1.0), ("laughter", 1.0), ("celebrate", 1.0),
        ("delight", 1.0), ("bliss", 1.0), ("ecstatic", 1.0), ("merry", 1.0),
        ("upbeat", 1.0), ("rejoice", 1.0), ("love", 1.0), ("adore", 1.0),
        ("grateful", 1.0), ("proud", 1.0), ("content", 1.0), ("satisfied", 1.0),
        ("elated", 1.0), ("jubilant", 1.0), ("fun", 1.0),
    ],
    "surprise": [
        ("surprised", 1.0), ("astonished", 1.0), ("amazed", 1.0), ("shocked", 1.0),
        ("stunned", 1.0), ("unexpected", 1.0), ("sudden", 1.0), ("startled", 1.0),
        ("speechless", 1.0), ("unbelievable", 1.0), ("incredible", 1.0),
        ("remarkable", 1.0), ("bewildered", 1.0), ("dumbfounded", 1.0),
        ("gasp", 1.0), ("wow", 1.0), ("baffled", 1.0), ("astounded", 1.0),
        ("flabbergasted", 1.0), ("marvel", 1.0), ("jolt", 1.0),
    ],
    "trust": [
        ("trust", 1.0), ("reliable", 1.0), ("honest", 1.0), ("faithful", 1.0),
        ("loyal", 1.0), ("dependable", 1.0), ("sincere", 1.0), ("credible", 1.0),
        ("trustworthy", 1.0), ("assurance", 1.0), ("confide", 1.0), ("secure", 1.0),
        ("steady", 1.0), ("devoted", 1.0), ("earnest", 1.0), ("genuine", 1.0),
        ("integrity", 1.0), ("supportive", 1.0), ("believe", 1.0), ("reassuring", 1.0),
    ],
    "anger": [
        ("angry", 1.0), ("furious", 1.0), ("outraged", 1.0), ("mad", 1.0),
        ("irate", 1.0), ("enraged", 1.0), ("annoyed", 1.0), ("irritated", 1.0),
        ("resent", 1.0), ("fuming", 1.0), ("livid", 1.0), ("hostile", 1.0),
        ("hateful", 1.0), ("rage", 1.0), ("wrath", 1.0), ("indignant", 1.0),
        ("bitter", 1.0), ("seething", 1.0), ("disgruntled", 1.0), ("offended", 1.0),
        ("scorn", 1.0),
    ],
    "anticipation": [
        ("anticipate", 1.0), ("expect", 1.0), ("await", 1.0), ("eager", 1.0),
        ("hopeful", 1.0), ("forthcoming", 1.0), ("upcoming", 1.0), ("foresee", 1.0),
        ("impending", 1.0), ("imminent", 1.0), ("longing", 1.0), ("yearning", 1.0),
        ("watchful", 1.0), ("preparing", 1.0), ("readiness", 1.0), ("curious", 1.0),
        ("keen", 1.0), ("vigilant", 1.0), ("prospect", 1.0), ("soon", 1.0),
    ],
    "sadness": [
        ("sad", 1.0), ("unhappy", 1.0), ("miserable", 1.0), ("depressed", 1.0),
        ("gloomy", 1.0), ("sorrow", 1.0), ("mournful", 1.0), ("grief", 1.0),
        ("heartbroken", 1.0), ("tearful", 1.0), ("weeping", 1.0), ("despair", 1.0),
        ("dismal", 1.0), ("melancholy", 1.0), ("tragic", 1.0), ("regret", 1.0),
        ("lonely", 1.0), ("hopeless", 1.0), ("crushed", 1.0), ("devastated", 1.0),
        ("somber", 1.0), ("woeful", 1.0),
    ],
    "disgust": [
        ("disgusting", 1.0), ("gross", 1.0), ("revolting", 1.0), ("repulsive", 1.0),
        ("vile", 1.0), ("nasty", 1.0), ("sickening", 1.0), ("foul", 1.0),
        ("loathsome", 1.0), ("distasteful", 1.0), ("nauseating", 1.0),
        ("repugnant", 1.0), ("abhorrent", 1.0), ("filthy", 1.0), ("rotten", 1.0),
        ("creepy", 1.0), ("yuck", 1.0), ("hideous", 1.0), ("appalling", 1.0),
        ("squalid", 1.0),
    ],
    "fear": [
        ("afraid", 1.0), ("scared", 1.0), ("frightened", 1.0), ("terrified", 1.0),
        ("fearful", 1.0), ("panic", 1.0), ("horror", 1.0), ("dread", 1.0),
        ("alarmed", 1.0), ("anxious", 1.0), ("nervous", 1.0), ("worried", 1.0),
        ("threatened", 1.0), ("menacing", 1.0), ("ominous", 1.0), ("terror", 1.0),
        ("petrified", 1.0), ("spooked", 1.0), ("timid", 1.0), ("uneasy", 1.0),
        ("horrific", 1.0), ("scary", 1.0),
    ],
}

# Words shared between two emotions.
_SEED_DUAL: list[tuple[str, str, str]] = [
    ("awe", "surprise", "fear"),
    ("awestruck", "surprise", "joy"),
    ("betrayed", "anger", "sadness"),
    ("suspense", "anticipation", "fear"),
    ("nostalgia", "joy", "sadness"),
    ("outcry", "anger", "surprise"),
    ("queasy", "disgust", "fear"),
    ("comfort", "joy", "trust"),
]


def _seed_entries() -> dict[str, list[tuple[str, float]]]:
    entries: dict[str, list[tuple[str, float]]] = {}
    for label, words in _SEED_WORDS.items():
        for word, weight in words:
            entries.setdefault(word, []).append((label, weight))
    for word, first, second in _SEED_DUAL:
        entries.setdefault(word, []).extend([(first, 0.5), (second, 0.5)])
    return entries


def builtin_lexicon(taxonomy: EmotionTaxonomy) -> EmotionLexicon:
    """Built-in seed lexicon restricted to the given taxonomy's labels."""
    labels = set(taxonomy.labels)
    entries = {}
    for token, pairs in _seed_entries().items():
        kept = [(label, w) for label, w in pairs if label in labels]
        if kept:
            entries[token] = kept
    return EmotionLexicon(taxonomy, entries)
