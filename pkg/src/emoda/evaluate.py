"""Cross-domain evaluation: accuracy, variant/seed matrices, and report tables.

A report keeps one row per (source, target, variant, seed); tables render
the per-cell mean across seeds with Source and Target columns followed by
one column per variant.  The TSV form uses full-precision floats and parses
back losslessly; the aligned-text form rounds to three decimals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .data import Document, encode_corpus, split_docs, veracity_labels
from .model import MtlModel, Variant, VARIANT_ORDER, predict_veracity_batch
from .rng import derive_seed
from .textprep import EmotionLexicon, Vocabulary, build_vocab
from .train import TrainConfig, train


def accuracy(model: MtlModel, docs: list[Document], vocab: Vocabulary, max_len: int) -> float:
    """Fraction of documents whose thresholded fake-probability matches the label.

    Probability >= 0.5 maps to class 1 (fake).  Exact ratio correct/n.
    """
    if not docs:
        raise ValueError("accuracy requires a nonempty document list")
    ids, mask = encode_corpus(docs, vocab, max_len)
    labels = veracity_labels(docs).astype(np.int64)
    preds = (predict_veracity_batch(model, ids, mask) >= 0.5).astype(np.int64)
    return float(np.count_nonzero(preds == labels) / len(docs))


@dataclass(frozen=True)
class EvalRow:
    source: str
    target: str
    variant: str
    accuracy: float
    n_eval: int
    seed: int


@dataclass(frozen=True)
class PivotCell:
    source: str
    target: str
    variant: str
    accuracy: float


@dataclass
class EvalReport:
    rows: list[EvalRow] = field(default_factory=list)

    def pairs(self) -> list[tuple[str, str]]:
        """(source, target) pairs in first-appearance order."""
        seen = []
        for r in self.rows:
            key = (r.source, r.target)
            if key not in seen:
                seen.append(key)
        return seen

    def variants(self) -> list[str]:
        present = {r.variant for r in self.rows}
        ordered = [v for v in VARIANT_ORDER if v in present]
        # Unknown labels (e.g. hand-built reports) go after the canonical six.
        ordered.extend(sorted(present - set(ordered)))
        return ordered

    def mean_cells(self) -> list[PivotCell]:
        """Per-(pair, variant) mean accuracy across seed rows."""
        groups: dict[tuple[str, str, str], list[float]] = {}
        for r in self.rows:
            groups.setdefault((r.source, r.target, r.variant), []).append(r.accuracy)
        cells = []
        for src, tgt in self.pairs():
            for variant in self.variants():
                accs = groups.get((src, tgt, variant))
                if accs:
                    cells.append(PivotCell(src, tgt, variant, float(np.mean(accs))))
        return cells

    def mean_accuracy(self, source: str, target: str, variant: str) -> float:
        accs = [r.accuracy for r in self.rows
                if (r.source, r.target, r.variant) == (source, target, variant)]
        if not accs:
            raise KeyError(f"no rows for ({source}, {target}, {variant})")
        return float(np.mean(accs))

    def to_json(self) -> str:
        return json.dumps(
            {
                "rows": [vars(r) for r in self.rows],
                "means": [vars(c) for c in self.mean_cells()],
            },
            indent=2,
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        obj = json.loads(text)
        return cls(rows=[EvalRow(**r) for r in obj["rows"]])


def run_matrix(pairs: list[tuple[str, str]], variants, datasets: dict[str, list[Document]],
               cfg: TrainConfig, n_seeds: int = 5, embed_dim: int = 32, hidden_dim: int = 64,
               lexicon: EmotionLexicon | None = None) -> EvalReport:
    """Train and evaluate every (pair, variant, seed) cell.

    Each cell trains on the source train/val splits (plus the target train
    split for adaptive variants) and reports accuracy on the target test
    split.  Per-cell seeds derive from cfg.seed, so the whole matrix is
    reproducible and cells are order-independent.
    """
    if not pairs:
        raise ValueError("run_matrix requires at least one (source, target) pair")
    if n_seeds < 1:
        raise ValueError("n_seeds must be >= 1")
    variants = [v if isinstance(v, Variant) else Variant.parse(v) for v in variants]
    if not variants:
        raise ValueError("run_matrix requires at least one variant")

    report = EvalReport()
    for src_alias, tgt_alias in pairs:
        try:
            source, target = datasets[src_alias], datasets[tgt_alias]
        except KeyError as exc:
            raise KeyError(f"dataset alias {exc} not found") from None
        vocab = build_vocab(split_docs(source, "train"), cfg.min_count)
        test_docs = split_docs(target, "test")
        if not test_docs:
            raise ValueError(f"target {tgt_alias!r} has an empty test split")
        for variant in variants:
            for s in range(n_seeds):
                run_seed = derive_seed(cfg.seed, src_alias, tgt_alias, variant.label, s)
                model = MtlModel(len(vocab), embed_dim, hidden_dim, variant,
                                 seed=derive_seed(run_seed, "init"))
                outcome = train(model, source, target, replace(cfg, seed=run_seed),
                                vocab=vocab, lexicon=lexicon)
                acc = accuracy(outcome.model, test_docs, vocab, cfg.max_len)
                report.rows.append(
                    EvalRow(src_alias, tgt_alias, variant.label, acc, len(test_docs), s)
                )
    return report


def emit_table(report: EvalReport, fmt: str = "text") -> str:
    """Render the per-cell means.  fmt "tsv" round-trips; "text" aligns at 3 decimals."""
    if not report.rows:
        raise ValueError("cannot render an empty report")
    variants = report.variants()
    cells = {(c.source, c.target, c.variant): c.accuracy for c in report.mean_cells()}
    header = ["Source", "Target"] + variants
    body = []
    for src, tgt in report.pairs():
        row = [src, tgt]
        for variant in variants:
            acc = cells.get((src, tgt, variant))
            row.append("" if acc is None else acc)
        body.append(row)

    if fmt == "tsv":
        lines = ["\t".join(header)]
        for row in body:
            lines.append("\t".join(x if isinstance(x, str) else repr(x) for x in row))
        return "\n".join(lines) + "\n"
    if fmt == "text":
        rendered = [[x if isinstance(x, str) else f"{x:.3f}" for x in row] for row in body]
        widths = [max(len(header[i]), *(len(r[i]) for r in rendered)) for i in range(len(header))]
        lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(header)).rstrip()]
        for r in rendered:
            lines.append("  ".join(c.ljust(widths[i]) for i, c in enumerate(r)).rstrip())
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown table format {fmt!r}; expected 'tsv' or 'text'")


def parse_table(text: str) -> list[PivotCell]:
    """Inverse of emit_table(fmt="tsv"): recover the mean cells."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty table")
    header = lines[0].split("\t")
    if header[:2] != ["Source", "Target"]:
        raise ValueError("not a report table: header must start with Source/Target")
    variants = header[2:]
    cells = []
    for ln in lines[1:]:
        fields = ln.split("\t")
        if len(fields) != len(header):
            raise ValueError(f"row has {len(fields)} fields, expected {len(header)}")
        src, tgt = fields[0], fields[1]
        for variant, cell in zip(variants, fields[2:]):
            if cell:
                cells.append(PivotCell(src, tgt, variant, float(cell)))
    return cells
