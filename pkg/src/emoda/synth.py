"""Seeded generator of paired synthetic text domains.

Documents are bags of tokens: class-indicative topic tokens drawn from a
per-domain pool, emotion-marker words from the built-in lexicon, and
function-word noise.  The two domains' pools share a configurable fraction
of tokens (the only transferable topic signal), and each document's emotion
agrees with a veracity-determined emotion group with probability rho, which
plants the emotion-veracity correlation the multi-task models exploit.
"""

from __future__ import annotations

from dataclasses import dataclass

from .data import Document
from .rng import SplitMix64, derive_seed
from .textprep import EmotionTaxonomy, get_taxonomy, PLUTCHIK, builtin_lexicon

FAKE_EMOTIONS = ("anger", "fear", "disgust")
_REAL_EMOTIONS = ("joy", "surprise", "trust")  # trust applies to the 8-label taxonomy only


def _single_emotion_markers() -> dict[str, tuple[str, ...]]:
    """Marker vocabulary per emotion: every built-in lexicon word that maps to
    exactly one emotion with weight 1.0, so the annotator recovers planted
    emotions exactly.  Markers are deliberately many (and thus individually
    rare in a corpus): a veracity-only learner has little pressure to learn
    each one, while emotion supervision targets them directly."""
    markers: dict[str, list[str]] = {label: [] for label in PLUTCHIK.labels}
    for token, pairs in builtin_lexicon(PLUTCHIK).entries.items():
        if len(pairs) == 1 and pairs[0][1] == 1.0:
            markers[pairs[0][0]].append(token)
    return {label: tuple(words) for label, words in markers.items()}


MARKER_WORDS = _single_emotion_markers()

FUNCTION_WORDS = ("the", "a", "of", "to", "and", "in", "on", "for", "with", "is", "was", "at")

SPLIT_FRACTIONS = (0.70, 0.15)  # train, val; the rest is test


def real_emotions(taxonomy: EmotionTaxonomy) -> tuple[str, ...]:
    return tuple(label for label in _REAL_EMOTIONS if label in taxonomy.labels)


@dataclass(frozen=True)
class SynthConfig:
    n_per_domain: int = 2000
    vocab_overlap: float = 0.3
    emotion_veracity_corr: float = 0.9  # rho
    taxonomy: str = "ekman"
    doc_len: tuple[int, int] = (14, 26)
    seed: int = 0
    topic_pool_per_class: int = 30
    topics_per_doc: int = 8
    topic_noise: float = 0.12
    shared_topic_noise: float = 0.40
    markers_per_doc: int = 2
    n_distractors: int = 2
    distractor_prob: float = 1.0
    domain_names: tuple[str, str] = ("src", "tgt")

    def __post_init__(self):
        if self.n_per_domain < 20:
            raise ValueError("n_per_domain must be >= 20")
        if not 0.0 <= self.vocab_overlap <= 1.0:
            raise ValueError("vocab_overlap must be in [0, 1]")
        if not 0.0 <= self.emotion_veracity_corr <= 1.0:
            raise ValueError("emotion_veracity_corr must be in [0, 1]")
        if not 0.0 <= self.distractor_prob <= 1.0:
            raise ValueError("distractor_prob must be in [0, 1]")
        if not 0.0 <= self.topic_noise < 0.5:
            raise ValueError("topic_noise must be in [0, 0.5)")
        if not 0.0 <= self.shared_topic_noise < 0.5:
            raise ValueError("shared_topic_noise must be in [0, 0.5)")
        get_taxonomy(self.taxonomy)
        lo, hi = self.doc_len
        if not 1 <= lo <= hi:
            raise ValueError("doc_len must satisfy 1 <= lo <= hi")
        if self.topics_per_doc < 1 or self.markers_per_doc < 1:
            raise ValueError("topics_per_doc and markers_per_doc must be >= 1")
        if self.n_distractors < 0:
            raise ValueError("n_distractors must be >= 0")
        if self.distractor_prob > 0 and self.markers_per_doc < 2 and self.n_distractors > 0:
            # Majority annotation needs the planted emotion to beat any single distractor.
            raise ValueError("markers_per_doc must be >= 2 when distractors are enabled")
        taxonomy = get_taxonomy(self.taxonomy)
        if self.n_distractors > len(taxonomy.labels) - 1:
            raise ValueError("n_distractors cannot exceed the number of other emotions")
        if lo < self.topics_per_doc + self.markers_per_doc + self.n_distractors + 1:
            raise ValueError("doc_len[0] leaves no room for topics, markers, and noise")
        if self.topic_pool_per_class < 2:
            raise ValueError("topic_pool_per_class must be >= 2")
        if len(self.domain_names) != 2 or self.domain_names[0] == self.domain_names[1]:
            raise ValueError("domain_names must be two distinct names")


@dataclass(frozen=True)
class TopicPool:
    """One domain's topic tokens per class, split into the block shared with
    the other domain and the domain-specific remainder."""

    shared: dict[str, tuple[str, ...]]
    own: dict[str, tuple[str, ...]]

    def tokens(self, cls: str) -> tuple[str, ...]:
        return self.shared[cls] + self.own[cls]


def make_token_pools(cfg: SynthConfig) -> tuple[TopicPool, TopicPool]:
    """Per-domain topic pools keyed by class ("fake"/"real").

    A shared block of round(overlap * pool_size) tokens per class appears in
    both domains; the remainder is domain-specific.  Class-indicativeness is
    a global property of a token, consistent across domains.
    """
    size = cfg.topic_pool_per_class
    n_shared = round(cfg.vocab_overlap * size)
    shared = {cls: tuple(f"shared{cls}{i:02d}" for i in range(n_shared)) for cls in ("fake", "real")}
    own = [
        {cls: tuple(f"dom{d}{cls}{i:02d}" for i in range(size - n_shared)) for cls in ("fake", "real")}
        for d in (0, 1)
    ]
    return TopicPool(shared, own[0]), TopicPool(shared, own[1])


def _make_domain(cfg: SynthConfig, domain_index: int, pool: TopicPool) -> list[Document]:
    taxonomy = get_taxonomy(cfg.taxonomy)
    labels = taxonomy.labels
    groups = {
        1: [label for label in FAKE_EMOTIONS if label in labels],
        0: list(real_emotions(taxonomy)),
    }
    rng = SplitMix64(derive_seed(cfg.seed, "domain", domain_index))
    domain = cfg.domain_names[domain_index]

    n = cfg.n_per_domain
    veracities = [1] * ((n + 1) // 2) + [0] * (n // 2)  # |fake - real| <= 1
    rng.shuffle(veracities)

    docs = []
    lo, hi = cfg.doc_len
    for i, veracity in enumerate(veracities):
        if rng.uniform() < cfg.emotion_veracity_corr:
            emotion = rng.choice(groups[veracity])
        else:
            emotion = rng.choice(labels)
        cls = "fake" if veracity == 1 else "real"
        other = "real" if veracity == 1 else "fake"
        length = rng.randint(lo, hi)
        # Topic slots pick the shared or domain-specific block in proportion
        # to block size, then flip class with that block's noise rate:
        # domain-specific tokens are reliable cues, shared (domain-general)
        # tokens much weaker ones.  That asymmetry is the domain shift: what
        # transfers is weak, what is strong does not transfer.
        n_shared = len(pool.shared[cls])
        n_own = len(pool.own[cls])
        tokens = []
        for _ in range(cfg.topics_per_doc):
            use_shared = rng.randbelow(n_shared + n_own) < n_shared
            noise = cfg.shared_topic_noise if use_shared else cfg.topic_noise
            block = pool.shared if use_shared else pool.own
            tokens.append(rng.choice(block[cls if rng.uniform() >= noise else other]))
        tokens += [rng.choice(MARKER_WORDS[emotion]) for _ in range(cfg.markers_per_doc)]
        # Distractor markers of distinct other emotions: one each, so the
        # planted emotion always keeps the majority and annotation stays exact,
        # while any single marker word is a much weaker veracity cue.
        other_emotions = [label for label in labels if label != emotion]
        rng.shuffle(other_emotions)
        for k in range(cfg.n_distractors):
            if rng.uniform() < cfg.distractor_prob:
                tokens.append(rng.choice(MARKER_WORDS[other_emotions[k]]))
        while len(tokens) < length:
            tokens.append(rng.choice(FUNCTION_WORDS))
        rng.shuffle(tokens)
        docs.append(
            Document(
                id=f"{domain}-{i:05d}",
                text=" ".join(tokens),
                veracity=veracity,
                emotion=taxonomy.index(emotion),
                domain=domain,
                split="train",  # reassigned below
            )
        )

    n_train = round(SPLIT_FRACTIONS[0] * n)
    n_val = round(SPLIT_FRACTIONS[1] * n)
    for i, doc in enumerate(docs):
        doc.split = "train" if i < n_train else ("val" if i < n_train + n_val else "test")
    return docs


def generate(cfg: SynthConfig) -> tuple[list[Document], list[Document]]:
    """Generate (source docs, target docs); deterministic in cfg.seed."""
    pool_src, pool_tgt = make_token_pools(cfg)
    return _make_domain(cfg, 0, pool_src), _make_domain(cfg, 1, pool_tgt)
