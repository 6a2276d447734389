"""Dataset records and file formats.

Datasets are JSON-lines: one object per line with keys `id`, `text`,
optional `label` (0/1, 1 = fake), optional `emotion` (label name), `domain`,
and `split`.  A datasets manifest maps short aliases to files:
`{alias: {"path": ..., "domain": ...}}`; relative paths resolve against the
manifest's directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .textprep import (
    EmotionLexicon,
    EmotionTaxonomy,
    Vocabulary,
    annotate_emotion,
    encode_ids,
    preprocess,
)

SPLITS = ("train", "val", "test")


@dataclass
class Document:
    id: str
    text: str
    veracity: int | None = None  # 1 = fake, 0 = real
    emotion: int | None = None   # index into the configured taxonomy
    domain: str = ""
    split: str = "train"

    def __post_init__(self):
        if self.veracity is not None and self.veracity not in (0, 1):
            raise ValueError(f"doc {self.id!r}: veracity must be 0 or 1, got {self.veracity!r}")
        if self.split not in SPLITS:
            raise ValueError(f"doc {self.id!r}: split must be one of {SPLITS}, got {self.split!r}")
        if self.emotion is not None and self.emotion < 0:
            raise ValueError(f"doc {self.id!r}: emotion index must be >= 0")


def load_docs(path, taxonomy: EmotionTaxonomy | None = None) -> list[Document]:
    """Read documents from a JSON-lines file.

    `taxonomy` is required only when the file carries emotion names.
    """
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            try:
                emotion = None
                if obj.get("emotion") is not None:
                    if taxonomy is None:
                        raise ValueError("file has emotion names but no taxonomy was given")
                    emotion = taxonomy.index(obj["emotion"])
                docs.append(
                    Document(
                        id=str(obj["id"]),
                        text=obj["text"],
                        veracity=obj.get("label"),
                        emotion=emotion,
                        domain=obj.get("domain", ""),
                        split=obj.get("split", "train"),
                    )
                )
            except (KeyError, ValueError) as exc:
                raise ValueError(f"{path}:{lineno}: bad document: {exc}") from exc
    return docs


def save_docs(path, docs: list[Document], taxonomy: EmotionTaxonomy | None = None) -> None:
    """Write documents as JSON-lines; emotion indices are stored as names."""
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            obj = {"id": doc.id, "text": doc.text}
            if doc.veracity is not None:
                obj["label"] = doc.veracity
            if doc.emotion is not None:
                if taxonomy is None:
                    raise ValueError(f"doc {doc.id!r} has an emotion index but no taxonomy was given")
                obj["emotion"] = taxonomy.labels[doc.emotion]
            obj["domain"] = doc.domain
            obj["split"] = doc.split
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def split_docs(docs: list[Document], split: str) -> list[Document]:
    if split not in SPLITS:
        raise ValueError(f"split must be one of {SPLITS}, got {split!r}")
    return [d for d in docs if d.split == split]


def encode_corpus(docs: list[Document], vocab: Vocabulary, max_len: int):
    """Preprocess and encode documents into fixed-length id and mask arrays.

    Returns (ids, mask): int64 (N, max_len) and float64 (N, max_len), with
    mask 1 on real token positions and 0 on padding.
    """
    n = len(docs)
    ids = np.zeros((n, max_len), dtype=np.int64)
    mask = np.zeros((n, max_len), dtype=np.float64)
    for row, doc in enumerate(docs):
        tokens = preprocess(doc.text)
        ids[row] = encode_ids(tokens, vocab, max_len)
        mask[row, : min(len(tokens), max_len)] = 1.0
    return ids, mask


def veracity_labels(docs: list[Document]) -> np.ndarray:
    labels = np.empty(len(docs), dtype=np.float64)
    for row, doc in enumerate(docs):
        if doc.veracity is None:
            raise ValueError(f"doc {doc.id!r} has no veracity label")
        labels[row] = doc.veracity
    return labels


def emotion_labels(docs: list[Document], lexicon: EmotionLexicon,
                   use_existing: bool = True) -> np.ndarray:
    """Emotion indices for training: stored labels when allowed, else the annotator.

    With use_existing=False every document is (re)tagged by the lexicon,
    which is how target corpora get their weak labels.
    """
    n_labels = len(lexicon.taxonomy.labels)
    out = np.empty(len(docs), dtype=np.int64)
    for row, doc in enumerate(docs):
        if use_existing and doc.emotion is not None:
            if doc.emotion >= n_labels:
                raise ValueError(
                    f"doc {doc.id!r}: emotion index {doc.emotion} out of range for "
                    f"taxonomy {lexicon.taxonomy.name!r}"
                )
            out[row] = doc.emotion
        else:
            out[row] = annotate_emotion(preprocess(doc.text), lexicon)
    return out


def annotate_docs(docs: list[Document], lexicon: EmotionLexicon) -> list[Document]:
    """New document list with every emotion tag replaced by the annotator's."""
    return [
        Document(
            id=d.id,
            text=d.text,
            veracity=d.veracity,
            emotion=int(annotate_emotion(preprocess(d.text), lexicon)),
            domain=d.domain,
            split=d.split,
        )
        for d in docs
    ]


@dataclass
class DatasetEntry:
    path: Path
    domain: str = ""


def load_manifest(path) -> dict[str, DatasetEntry]:
    """Read an alias->dataset manifest; relative paths resolve against it."""
    base = Path(path).parent
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: manifest must be a JSON object")
    entries = {}
    for alias, spec in raw.items():
        if not isinstance(spec, dict) or "path" not in spec:
            raise ValueError(f"{path}: entry {alias!r} must be an object with a 'path' key")
        p = Path(spec["path"])
        if not p.is_absolute():
            p = base / p
        entries[alias] = DatasetEntry(path=p, domain=spec.get("domain", alias))
    return entries


def save_manifest(path, entries: dict[str, DatasetEntry]) -> None:
    obj = {alias: {"path": str(e.path), "domain": e.domain} for alias, e in entries.items()}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
