"""Mini-batch training with Adam, early stopping, and (alpha, beta) grid search.

Every run is bitwise deterministic given its config seed: weight init,
shuffling, and target recycling all draw from splitmix64 streams derived
from it.  Model selection uses source-domain validation accuracy only;
target veracity labels are never read anywhere in this module.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .data import Document, emotion_labels, encode_corpus, split_docs, veracity_labels
from .model import Batch, LossWeights, MtlModel, Variant, backward, predict_veracity_batch
from .rng import SplitMix64, derive_seed
from .textprep import EmotionLexicon, Vocabulary, build_vocab, builtin_lexicon

DEFAULT_GRID = (0.0, 0.1, 0.2, 0.3, 0.4)


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 30
    batch_size: int = 32
    lr: float = 1e-3
    seed: int = 0
    patience: int = 5
    alpha: float = 0.0
    beta: float = 0.0
    lam: float = 1.0
    alpha_grid: tuple[float, ...] = DEFAULT_GRID
    beta_grid: tuple[float, ...] = DEFAULT_GRID
    max_len: int = 200
    min_count: int = 1
    clip_norm: float = 5.0

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1 or self.patience < 1:
            raise ValueError("epochs, batch_size, and patience must be >= 1")
        if self.lr <= 0 or self.clip_norm <= 0:
            raise ValueError("lr and clip_norm must be > 0")
        if self.max_len < 1 or self.min_count < 1:
            raise ValueError("max_len and min_count must be >= 1")
        if self.alpha < 0 or self.beta < 0 or self.alpha + self.beta >= 1:
            raise ValueError("need alpha, beta >= 0 and alpha + beta < 1")
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if not self.alpha_grid or not self.beta_grid:
            raise ValueError("grids must be nonempty")
        if not grid_pairs(self):
            raise ValueError("no (alpha, beta) grid pair satisfies alpha + beta < 1")

    def weights(self) -> LossWeights:
        return LossWeights(alpha=self.alpha, beta=self.beta, lam=self.lam)


def grid_pairs(cfg: TrainConfig) -> list[tuple[float, float]]:
    """Search points in grid order, keeping only pairs with alpha + beta < 1."""
    return [(a, b) for a in cfg.alpha_grid for b in cfg.beta_grid if a + b < 1]


@dataclass
class EpochStats:
    epoch: int
    l_total: float
    l_fnd: float
    l_emo: float
    l_adv: float
    val_accuracy: float


@dataclass
class TrainRecord:
    epochs: list[EpochStats] = field(default_factory=list)
    chosen_alpha: float = 0.0
    chosen_beta: float = 0.0
    best_epoch: int = -1
    best_val_accuracy: float = 0.0
    wall_clock_s: float = 0.0

    def to_jsonl(self, include_timing: bool = True) -> str:
        """One line per epoch plus a summary line.

        The timing field is the one nondeterministic quantity in a run, so
        determinism comparisons use include_timing=False.
        """
        lines = []
        for s in self.epochs:
            lines.append(json.dumps({
                "epoch": s.epoch,
                "l_total": s.l_total,
                "l_fnd": s.l_fnd,
                "l_emo": s.l_emo,
                "l_adv": s.l_adv,
                "val_accuracy": s.val_accuracy,
            }, sort_keys=True))
        summary = {
            "alpha": self.chosen_alpha,
            "beta": self.chosen_beta,
            "best_epoch": self.best_epoch,
            "best_val_accuracy": self.best_val_accuracy,
        }
        if include_timing:
            summary["wall_clock_s"] = self.wall_clock_s
        lines.append(json.dumps(summary, sort_keys=True))
        return "\n".join(lines) + "\n"


class AdamState:
    """First/second moment buffers plus the shared step counter."""

    def __init__(self, params):
        self.t = 0
        self.m = {name: np.zeros_like(params.value(name)) for name in params.names()}
        self.v = {name: np.zeros_like(params.value(name)) for name in params.names()}


def adam_step(params, state: AdamState, lr: float,
              beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8) -> None:
    """One bias-corrected Adam update from the accumulated gradients."""
    state.t += 1
    corr1 = 1.0 - beta1 ** state.t
    corr2 = 1.0 - beta2 ** state.t
    for name in params.names():
        g = params.grad(name)
        if g.shape != state.m[name].shape:
            raise ValueError(f"gradient shape changed for {name!r}")
        m = state.m[name]
        v = state.v[name]
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * g * g
        params.value(name)[...] -= lr * (m / corr1) / (np.sqrt(v / corr2) + eps)


class _Cycler:
    """Endless shuffled pass over indices; reshuffles at each wraparound."""

    def __init__(self, n: int, rng: SplitMix64):
        self._order = list(range(n))
        self._rng = rng
        self._pos = n  # force a shuffle on first take
        self._n = n

    def take(self, k: int) -> list[int]:
        out = []
        while len(out) < k:
            if self._pos >= self._n:
                self._rng.shuffle(self._order)
                self._pos = 0
            out.append(self._order[self._pos])
            self._pos += 1
        return out


@dataclass
class TrainOutcome:
    model: MtlModel
    record: TrainRecord
    vocab: Vocabulary


def _val_accuracy(model, ids, mask, labels) -> float:
    probs = predict_veracity_batch(model, ids, mask)
    preds = (probs >= 0.5).astype(np.int64)
    return float(np.count_nonzero(preds == labels.astype(np.int64)) / labels.shape[0])


def train(model: MtlModel, source_docs: list[Document], target_docs: list[Document],
          cfg: TrainConfig, vocab: Vocabulary | None = None,
          lexicon: EmotionLexicon | None = None) -> TrainOutcome:
    """Train one model; returns the best-validation checkpoint.

    The vocabulary defaults to one built on the source train split and must
    match the model's embedding size.  For adaptive variants the target
    train split supplies the unlabeled adaptation pool; emotion labels on
    target documents always come from the lexicon annotator, while source
    documents keep stored tags when present.
    """
    t_start = time.perf_counter()
    variant = model.variant
    src_train = split_docs(source_docs, "train")
    src_val = split_docs(source_docs, "val")
    if not src_train:
        raise ValueError("source train split is empty")
    if not src_val:
        raise ValueError("source validation split is empty")
    tgt_train = split_docs(target_docs, "train") if variant.adapt else []
    if variant.adapt and not tgt_train:
        raise ValueError(f"{variant.label} requires a nonempty target train split")

    if vocab is None:
        vocab = build_vocab(src_train, cfg.min_count)
    if len(vocab) != model.vocab_size:
        raise ValueError(f"vocab size {len(vocab)} does not match model embedding rows {model.vocab_size}")

    src_ids, src_mask = encode_corpus(src_train, vocab, cfg.max_len)
    src_y = veracity_labels(src_train)
    val_ids, val_mask = encode_corpus(src_val, vocab, cfg.max_len)
    val_y = veracity_labels(src_val)

    src_emo = tgt_emo = None
    if variant.mtl:
        if lexicon is None:
            lexicon = builtin_lexicon(model.taxonomy)
        src_emo = emotion_labels(src_train, lexicon, use_existing=True)
        if src_emo.size and src_emo.max() >= model.num_emotions:
            raise ValueError("source emotion label out of range for model taxonomy")
    tgt_ids = tgt_mask = None
    if variant.adapt:
        tgt_ids, tgt_mask = encode_corpus(tgt_train, vocab, cfg.max_len)
        if variant.mtl:
            tgt_emo = emotion_labels(tgt_train, lexicon, use_existing=False)

    weights = cfg.weights()
    rng = SplitMix64(derive_seed(cfg.seed, "shuffle"))
    tgt_cycler = _Cycler(len(tgt_train), SplitMix64(derive_seed(cfg.seed, "target"))) \
        if variant.adapt else None
    adam = AdamState(model.params)

    record = TrainRecord(chosen_alpha=cfg.alpha, chosen_beta=cfg.beta)
    n_src = len(src_train)
    order = list(range(n_src))
    best_acc = -1.0
    best_params = None
    since_best = 0

    for epoch in range(cfg.epochs):
        rng.shuffle(order)
        sums = np.zeros(4)
        n_steps = 0
        for start in range(0, n_src, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            batch = Batch(
                src_ids=src_ids[idx],
                src_mask=src_mask[idx],
                src_veracity=src_y[idx],
                src_emotion=src_emo[idx] if src_emo is not None else None,
            )
            if variant.adapt:
                tidx = tgt_cycler.take(len(idx))
                batch.tgt_ids = tgt_ids[tidx]
                batch.tgt_mask = tgt_mask[tidx]
                if variant.mtl:
                    batch.tgt_emotion = tgt_emo[tidx]
            model.params.zero_grads()
            losses = backward(model, batch, weights)
            norm = model.params.grad_global_norm()
            if norm > cfg.clip_norm:
                model.params.scale_grads(cfg.clip_norm / norm)
            adam_step(model.params, adam, cfg.lr)
            sums += (losses.total, losses.fnd, losses.emo, losses.adv)
            n_steps += 1

        val_acc = _val_accuracy(model, val_ids, val_mask, val_y)
        means = sums / n_steps
        record.epochs.append(EpochStats(epoch, *[float(x) for x in means], val_acc))

        if val_acc > best_acc:
            best_acc = val_acc
            best_params = model.params.copy_values()
            record.best_epoch = epoch
            since_best = 0
        else:
            since_best += 1
            if since_best >= cfg.patience:
                break

    model.params.load_values(best_params)
    record.best_val_accuracy = best_acc
    record.wall_clock_s = time.perf_counter() - t_start
    return TrainOutcome(model=model, record=record, vocab=vocab)


@dataclass
class GridCell:
    alpha: float
    beta: float
    val_accuracy: float


@dataclass
class GridResult:
    alpha: float
    beta: float
    outcome: TrainOutcome
    cells: list[GridCell]


def grid_search(variant: Variant, source_docs: list[Document], target_docs: list[Document],
                cfg: TrainConfig, embed_dim: int = 32, hidden_dim: int = 64,
                lexicon: EmotionLexicon | None = None) -> GridResult:
    """Train one model per (alpha, beta) grid point and keep the best.

    Selection is by source validation accuracy; ties prefer smaller alpha,
    then smaller beta.  Every cell starts from the same seeded init.
    """
    src_train = split_docs(source_docs, "train")
    if not src_train:
        raise ValueError("source train split is empty")
    vocab = build_vocab(src_train, cfg.min_count)
    init_seed = derive_seed(cfg.seed, "init")

    best = None
    cells = []
    for a, b in grid_pairs(cfg):
        cell_cfg = replace(cfg, alpha=a, beta=b)
        m = MtlModel(len(vocab), embed_dim, hidden_dim, variant, seed=init_seed)
        outcome = train(m, source_docs, target_docs, cell_cfg, vocab=vocab, lexicon=lexicon)
        acc = outcome.record.best_val_accuracy
        cells.append(GridCell(a, b, acc))
        if best is None or acc > best[0] or (acc == best[0] and (a, b) < best[1:3]):
            best = (acc, a, b, outcome)
    _, a, b, outcome = best
    return GridResult(alpha=a, beta=b, outcome=outcome, cells=cells)
