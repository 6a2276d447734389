"""Multi-task fake-news model: shared extractor plus per-task heads.

A single embedding+LSTM extractor feeds up to three affine heads: a binary
veracity head, an emotion head (MTL variants), and a domain discriminator
behind a gradient-reversal layer (DA variants).  The training objective is

    total = (1 - alpha - beta) * L_veracity + alpha * L_domain + beta * L_emotion

with each component a mean over the samples it applies to: veracity over
source only, emotion and domain over source plus (for DA) target.  Absent
heads contribute an exact 0 and their weight folds back into the veracity
term.  The discriminator's own parameters are trained to minimize domain
loss; the extractor receives that gradient scaled by -lambda, which is what
turns the discriminator's minimization into the extractor's maximization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import nn
from .rng import SplitMix64
from .textprep import EmotionTaxonomy, get_taxonomy

INIT_SCALE = 0.08
FORGET_BIAS = 1.0

# Discriminator label convention: source = 1, target = 0.
SOURCE_DOMAIN_LABEL = 1.0
TARGET_DOMAIN_LABEL = 0.0


@dataclass(frozen=True)
class Variant:
    """Model configuration axis: domain-adaptive or not, emotion task or not."""

    adapt: bool
    emotions: str | None  # None for single-task, else taxonomy name

    @property
    def mtl(self) -> bool:
        return self.emotions is not None

    @property
    def label(self) -> str:
        da = "DA" if self.adapt else "NonDA"
        if not self.mtl:
            return f"{da}-STL"
        suffix = {"ekman": "E", "plutchik": "P"}[self.emotions]
        return f"{da}-MTL({suffix})"

    @classmethod
    def parse(cls, label: str) -> "Variant":
        try:
            return _VARIANTS_BY_LABEL[label]
        except KeyError:
            raise ValueError(
                f"unknown variant {label!r}; expected one of {VARIANT_ORDER}"
            ) from None


_ALL_VARIANTS = [
    Variant(False, None),
    Variant(False, "ekman"),
    Variant(False, "plutchik"),
    Variant(True, None),
    Variant(True, "ekman"),
    Variant(True, "plutchik"),
]
_VARIANTS_BY_LABEL = {v.label: v for v in _ALL_VARIANTS}
VARIANT_ORDER = tuple(v.label for v in _ALL_VARIANTS)


@dataclass(frozen=True)
class LossWeights:
    alpha: float = 0.0  # domain loss weight
    beta: float = 0.0   # emotion loss weight
    lam: float = 1.0    # gradient-reversal strength

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be >= 0")
        if self.alpha + self.beta >= 1:
            raise ValueError(f"alpha + beta must be < 1, got {self.alpha + self.beta}")
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")


@dataclass
class LossBreakdown:
    total: float
    fnd: float
    emo: float
    adv: float


def combine_losses(fnd: float, emo: float, adv: float, alpha: float, beta: float) -> float:
    """The weighted total; zero-weight terms are skipped so reductions are bitwise."""
    total = (1.0 - alpha - beta) * fnd
    if alpha != 0.0:
        total += alpha * adv
    if beta != 0.0:
        total += beta * emo
    return total


class MtlModel:
    """Extractor + heads for one variant; owns all trainable parameters."""

    def __init__(self, vocab_size: int, embed_dim: int, hidden_dim: int,
                 variant: Variant, seed: int = 0):
        if vocab_size < 2 or embed_dim < 1 or hidden_dim < 1:
            raise ValueError("vocab_size must be >= 2 and dims >= 1")
        self.vocab_size = vocab_size
        self.embed_dim = embed_dim
        self.hidden_dim = hidden_dim
        self.variant = variant
        self.seed = seed
        self.params = nn.ParamSet()
        self._init_params(SplitMix64(seed))

    @property
    def taxonomy(self) -> EmotionTaxonomy | None:
        return get_taxonomy(self.variant.emotions) if self.variant.mtl else None

    @property
    def num_emotions(self) -> int:
        return len(self.taxonomy.labels) if self.variant.mtl else 0

    def _weight(self, rng: SplitMix64, name: str, rows: int, cols: int) -> None:
        vals = np.array(rng.uniforms(rows * cols, -INIT_SCALE, INIT_SCALE)).reshape(rows, cols)
        self.params.add(name, vals)

    def _init_params(self, rng: SplitMix64) -> None:
        D, H = self.embed_dim, self.hidden_dim
        self._weight(rng, "emb_E", self.vocab_size, D)
        for gate in nn.LSTM_GATES:
            self._weight(rng, f"lstm_W_{gate}", D, H)
            self._weight(rng, f"lstm_U_{gate}", H, H)
            bias = np.full(H, FORGET_BIAS) if gate == "f" else np.zeros(H)
            self.params.add(f"lstm_b_{gate}", bias)
        self._weight(rng, "fnd_W", 1, H)
        self.params.add("fnd_b", np.zeros(1))
        if self.variant.mtl:
            self._weight(rng, "emo_W", self.num_emotions, H)
            self.params.add("emo_b", np.zeros(self.num_emotions))
        if self.variant.adapt:
            self._weight(rng, "dom_W", 1, H)
            self.params.add("dom_b", np.zeros(1))

    def features(self, ids, mask):
        """Final LSTM hidden state(s) for encoded input; returns (h, cache)."""
        x = nn.embed_forward(ids, self.params.value("emb_E"))
        return nn.lstm_forward(x, mask, self.params)


@dataclass
class Batch:
    """One training batch.  Target veracity has no field by design: it must
    never reach training."""

    src_ids: np.ndarray                  # (B_s, T) int
    src_mask: np.ndarray                 # (B_s, T) 0/1
    src_veracity: np.ndarray             # (B_s,) 0/1
    src_emotion: np.ndarray | None = None  # (B_s,) int, MTL only
    tgt_ids: np.ndarray | None = None      # (B_t, T) int, DA only
    tgt_mask: np.ndarray | None = None
    tgt_emotion: np.ndarray | None = None  # (B_t,) int, DA+MTL only

    @property
    def n_source(self) -> int:
        return self.src_ids.shape[0]

    @property
    def n_target(self) -> int:
        return 0 if self.tgt_ids is None else self.tgt_ids.shape[0]

    def validate(self, variant: Variant) -> None:
        if self.n_source < 1:
            raise ValueError("batch must contain at least one source sample")
        if variant.mtl:
            if self.src_emotion is None:
                raise ValueError(f"{variant.label} requires source emotion labels")
        elif self.src_emotion is not None:
            raise ValueError(f"{variant.label} must not carry emotion labels")
        if variant.adapt:
            if self.tgt_ids is None or self.tgt_mask is None:
                raise ValueError(f"{variant.label} requires a target batch")
            if variant.mtl and self.tgt_emotion is None:
                raise ValueError(f"{variant.label} requires target emotion labels")
        elif self.tgt_ids is not None:
            raise ValueError(f"{variant.label} must not carry target samples")


def _effective_weights(variant: Variant, w: LossWeights) -> tuple[float, float]:
    """Absent heads force their weight to 0 (redistributing to the veracity term)."""
    alpha = w.alpha if variant.adapt else 0.0
    beta = w.beta if variant.mtl else 0.0
    return alpha, beta


def _forward(model: MtlModel, batch: Batch):
    h_s, cache_s = model.features(batch.src_ids, batch.src_mask)
    if model.variant.adapt and batch.n_target > 0:
        h_t, cache_t = model.features(batch.tgt_ids, batch.tgt_mask)
    elif model.variant.adapt:
        h_t, cache_t = np.zeros((0, model.hidden_dim)), None
    else:
        h_t, cache_t = None, None
    return h_s, cache_s, h_t, cache_t


def _component_losses(model: MtlModel, batch: Batch, h_s, h_t):
    p = model.params
    fnd_logits = nn.affine_forward(h_s, p.value("fnd_W"), p.value("fnd_b"))[:, 0]
    fnd_losses, fnd_grads = nn.sigmoid_bce_batch(fnd_logits, batch.src_veracity)
    l_fnd = float(np.mean(fnd_losses))

    l_emo, emo_grads, h_emo, emo_targets = 0.0, None, None, None
    if model.variant.mtl:
        if model.variant.adapt:
            h_emo = np.concatenate([h_s, h_t], axis=0)
            emo_targets = np.concatenate([batch.src_emotion, batch.tgt_emotion])
        else:
            h_emo, emo_targets = h_s, batch.src_emotion
        emo_logits = nn.affine_forward(h_emo, p.value("emo_W"), p.value("emo_b"))
        emo_losses, emo_grads = nn.softmax_ce_batch(emo_logits, emo_targets)
        l_emo = float(np.mean(emo_losses))

    l_adv, dom_grads, h_dom = 0.0, None, None
    if model.variant.adapt:
        h_dom = np.concatenate([h_s, h_t], axis=0)
        dom_labels = np.concatenate([
            np.full(batch.n_source, SOURCE_DOMAIN_LABEL),
            np.full(batch.n_target, TARGET_DOMAIN_LABEL),
        ])
        dom_logits = nn.affine_forward(h_dom, p.value("dom_W"), p.value("dom_b"))[:, 0]
        dom_losses, dom_grads = nn.sigmoid_bce_batch(dom_logits, dom_labels)
        l_adv = float(np.mean(dom_losses))

    return (l_fnd, fnd_grads), (l_emo, emo_grads, h_emo), (l_adv, dom_grads, h_dom)


def forward_loss(model: MtlModel, batch: Batch, w: LossWeights) -> LossBreakdown:
    """Component losses and their weighted total (no gradients)."""
    batch.validate(model.variant)
    h_s, _, h_t, _ = _forward(model, batch)
    (l_fnd, _), (l_emo, _, _), (l_adv, _, _) = _component_losses(model, batch, h_s, h_t)
    alpha, beta = _effective_weights(model.variant, w)
    return LossBreakdown(combine_losses(l_fnd, l_emo, l_adv, alpha, beta), l_fnd, l_emo, l_adv)


def backward(model: MtlModel, batch: Batch, w: LossWeights) -> LossBreakdown:
    """Forward plus analytic backward; accumulates into model.params gradients.

    Routing: the veracity and emotion heads backpropagate into the extractor
    as-is; the discriminator head's feature gradient passes through the
    reversal layer (times -lambda), while the discriminator's own parameters
    receive the unreversed gradient.
    """
    batch.validate(model.variant)
    p = model.params
    h_s, cache_s, h_t, cache_t = _forward(model, batch)
    (l_fnd, fnd_grads), (l_emo, emo_grads, h_emo), (l_adv, dom_grads, h_dom) = \
        _component_losses(model, batch, h_s, h_t)
    alpha, beta = _effective_weights(model.variant, w)

    n_s, n_t = batch.n_source, batch.n_target
    dh_s = np.zeros_like(h_s)
    dh_t = np.zeros_like(h_t) if h_t is not None else None

    # Veracity head: weight (1 - alpha - beta), mean over source.
    w_fnd = 1.0 - alpha - beta
    d_logits = (fnd_grads * (w_fnd / n_s))[:, None]
    dh, dW, db = nn.affine_backward(d_logits, h_s, p.value("fnd_W"))
    p.grad("fnd_W")[...] += dW
    p.grad("fnd_b")[...] += db
    dh_s += dh

    # Emotion head: weight beta, mean over every sample with an emotion label.
    if model.variant.mtl and beta != 0.0:
        d_logits = emo_grads * (beta / h_emo.shape[0])
        dh, dW, db = nn.affine_backward(d_logits, h_emo, p.value("emo_W"))
        p.grad("emo_W")[...] += dW
        p.grad("emo_b")[...] += db
        dh_s += dh[:n_s]
        if n_t:
            dh_t += dh[n_s:]

    # Discriminator: weight alpha; feature gradient is reversed by the GRL.
    if model.variant.adapt and alpha != 0.0:
        d_logits = (dom_grads * (alpha / (n_s + n_t)))[:, None]
        dh, dW, db = nn.affine_backward(d_logits, h_dom, p.value("dom_W"))
        p.grad("dom_W")[...] += dW
        p.grad("dom_b")[...] += db
        dh_rev = nn.grl_backward(dh, nn.GrlConfig(w.lam))
        dh_s += dh_rev[:n_s]
        if n_t:
            dh_t += dh_rev[n_s:]

    dx_s = nn.lstm_backward(dh_s, cache_s, p)
    nn.embed_backward(batch.src_ids, dx_s, p.grad("emb_E"))
    if cache_t is not None and n_t:
        dx_t = nn.lstm_backward(dh_t, cache_t, p)
        nn.embed_backward(batch.tgt_ids, dx_t, p.grad("emb_E"))

    return LossBreakdown(combine_losses(l_fnd, l_emo, l_adv, alpha, beta), l_fnd, l_emo, l_adv)


EXTRACTOR_PREFIXES = ("emb_", "lstm_")


def composite_grad_check(model: MtlModel, batch: Batch, w: LossWeights,
                         tol: float = 1e-4, h: float = 1e-5) -> nn.GradCheckReport:
    """Finite-difference check of the full composite backward pass.

    Head and discriminator parameters are probed against the weighted total
    loss.  Extractor parameters descend a different scalar by construction:
    the reversal layer hands them -lambda times the adversarial gradient, so
    their oracle reweights the adversarial term by -lambda * alpha.  Every
    analytic gradient must match its own oracle within tol.
    """
    batch.validate(model.variant)
    alpha, beta = _effective_weights(model.variant, w)

    def loss_plain() -> float:
        return forward_loss(model, batch, w).total

    def loss_extractor() -> float:
        b = forward_loss(model, batch, w)
        return (1.0 - alpha - beta) * b.fnd + beta * b.emo + (-w.lam * alpha) * b.adv

    def grad_fn() -> None:
        backward(model, batch, w)

    extractor = [n for n in model.params.names() if n.startswith(EXTRACTOR_PREFIXES)]
    heads = [n for n in model.params.names() if not n.startswith(EXTRACTOR_PREFIXES)]
    rep = nn.grad_check(loss_extractor, grad_fn, model.params, tol=tol, h=h, names=extractor)
    rep_heads = nn.grad_check(loss_plain, grad_fn, model.params, tol=tol, h=h, names=heads)
    rep.per_param.update(rep_heads.per_param)
    if rep_heads.max_rel_err > rep.max_rel_err:
        rep.worst_param = rep_heads.worst_param
        rep.worst_analytic = rep_heads.worst_analytic
        rep.worst_numeric = rep_heads.worst_numeric
    return rep


def predict_veracity_batch(model: MtlModel, ids, mask) -> np.ndarray:
    """Fake-news probabilities in (0, 1) for a batch of encoded inputs."""
    h, _ = model.features(ids, mask)
    logits = nn.affine_forward(h, model.params.value("fnd_W"), model.params.value("fnd_b"))
    return nn.sigmoid(logits[:, 0])


def predict_veracity(model: MtlModel, ids, mask) -> float:
    """Probability that a single encoded document is fake."""
    ids = np.asarray(ids, dtype=np.int64)
    mask = np.asarray(mask, dtype=np.float64)
    return float(predict_veracity_batch(model, ids[None], mask[None])[0])


def predict_emotion_batch(model: MtlModel, ids, mask) -> np.ndarray:
    if not model.variant.mtl:
        raise ValueError(f"{model.variant.label} has no emotion head")
    h, _ = model.features(ids, mask)
    logits = nn.affine_forward(h, model.params.value("emo_W"), model.params.value("emo_b"))
    return np.argmax(logits, axis=1)  # argmax takes the lowest index on ties


def predict_emotion(model: MtlModel, ids, mask) -> int:
    ids = np.asarray(ids, dtype=np.int64)
    mask = np.asarray(mask, dtype=np.float64)
    return int(predict_emotion_batch(model, ids[None], mask[None])[0])
