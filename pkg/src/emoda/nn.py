"""Minimal differentiable-computation core.

Double-precision numpy throughout, with hand-written backward passes for
every op (embedding lookup, masked LSTM, affine heads, softmax/sigmoid
cross-entropy, gradient reversal) and a central-finite-difference gradient
checker.  There is no autodiff graph: callers compose forwards, keep the
returned caches, and run the matching backwards in reverse order.

Gradient buffers accumulate: run ParamSet.zero_grads() once per step, then
each backward adds its contribution.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

LSTM_GATES = ("i", "f", "o", "g")


class ParamSet:
    """Named float64 parameters, each with a same-shape gradient buffer."""

    def __init__(self):
        self._values: dict[str, np.ndarray] = {}
        self._grads: dict[str, np.ndarray] = {}

    def add(self, name: str, value) -> np.ndarray:
        if name in self._values:
            raise ValueError(f"parameter {name!r} already exists")
        arr = np.ascontiguousarray(value, dtype=np.float64)
        self._values[name] = arr
        self._grads[name] = np.zeros_like(arr)
        return arr

    def __contains__(self, name: str) -> bool:
        return name in self._values

    def names(self) -> list[str]:
        return list(self._values)

    def value(self, name: str) -> np.ndarray:
        return self._values[name]

    def grad(self, name: str) -> np.ndarray:
        return self._grads[name]

    def zero_grads(self) -> None:
        for g in self._grads.values():
            g[...] = 0.0

    def n_entries(self) -> int:
        return sum(v.size for v in self._values.values())

    def copy_values(self) -> dict[str, np.ndarray]:
        return {name: v.copy() for name, v in self._values.items()}

    def load_values(self, values: dict[str, np.ndarray]) -> None:
        if set(values) != set(self._values):
            raise ValueError("parameter name sets differ")
        for name, v in values.items():
            if v.shape != self._values[name].shape:
                raise ValueError(f"shape mismatch for {name!r}")
            self._values[name][...] = v

    def grad_global_norm(self) -> float:
        total = 0.0
        for g in self._grads.values():
            total += float(np.dot(g.ravel(), g.ravel()))
        return float(np.sqrt(total))

    def scale_grads(self, factor: float) -> None:
        for g in self._grads.values():
            g *= factor


def sigmoid(z: np.ndarray) -> np.ndarray:
    """Numerically stable logistic function."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def softmax(logits: np.ndarray) -> np.ndarray:
    """Stable softmax along the last axis."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=-1, keepdims=True)


# ---------------------------------------------------------------------------
# Forward / backward ops
# ---------------------------------------------------------------------------

def embed_forward(ids, E: np.ndarray) -> np.ndarray:
    """Row lookup: output position t is row ids[t] of E.  ids may be (T,) or (B, T)."""
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= E.shape[0]):
        raise ValueError(f"token id out of range for embedding with {E.shape[0]} rows")
    return E[ids]


def embed_backward(ids, d_out: np.ndarray, dE: np.ndarray) -> None:
    """Accumulate d_out rows into dE at the looked-up indices (duplicates sum)."""
    ids = np.asarray(ids, dtype=np.int64)
    np.add.at(dE, ids.ravel(), d_out.reshape(-1, dE.shape[1]))


@dataclass
class LstmCache:
    x: np.ndarray          # (B, T, D)
    mask: np.ndarray       # (B, T)
    gates: list            # per step: (i, f, o, g) each (B, H)
    tanh_c_raw: list       # per step: tanh of pre-mask cell state
    h_states: np.ndarray   # (B, T+1, H), h_states[:, 0] is the zero initial state
    c_states: np.ndarray   # (B, T+1, H)
    squeeze: bool          # input was a single unbatched sequence


def _lstm_weights(params: ParamSet, prefix: str):
    try:
        W = [params.value(f"{prefix}_W_{gate}") for gate in LSTM_GATES]
        U = [params.value(f"{prefix}_U_{gate}") for gate in LSTM_GATES]
        b = [params.value(f"{prefix}_b_{gate}") for gate in LSTM_GATES]
    except KeyError as exc:
        raise ValueError(f"missing LSTM parameter under prefix {prefix!r}: {exc}") from exc
    D, H = W[0].shape
    for gate, w in zip(LSTM_GATES, W):
        if w.shape != (D, H):
            raise ValueError(f"{prefix}_W_{gate} has shape {w.shape}, expected {(D, H)}")
    for gate, u in zip(LSTM_GATES, U):
        if u.shape != (H, H):
            raise ValueError(f"{prefix}_U_{gate} has shape {u.shape}, expected {(H, H)}")
    for gate, bias in zip(LSTM_GATES, b):
        if bias.shape != (H,):
            raise ValueError(f"{prefix}_b_{gate} has shape {bias.shape}, expected {(H,)}")
    return W, U, b, D, H


def lstm_forward(x, mask, params: ParamSet, prefix: str = "lstm"):
    """Masked single-layer LSTM; returns (final hidden state, cache).

    x is (T, D) or (B, T, D); mask is 0/1 with matching leading shape.  Steps
    with mask 0 copy (h, c) through unchanged, so right-padded sequences end
    on their last real token's state.  Initial h and c are zero.
    """
    x = np.asarray(x, dtype=np.float64)
    squeeze = x.ndim == 2
    if squeeze:
        x = x[None]
    if x.ndim != 3:
        raise ValueError(f"x must be (T, D) or (B, T, D), got shape {x.shape}")
    mask = np.asarray(mask, dtype=np.float64)
    if squeeze and mask.ndim == 1:
        mask = mask[None]
    B, T, D = x.shape
    if mask.shape != (B, T):
        raise ValueError(f"mask shape {mask.shape} does not match sequence shape {(B, T)}")

    W, U, b, Dw, H = _lstm_weights(params, prefix)
    if Dw != D:
        raise ValueError(f"input dim {D} does not match LSTM input dim {Dw}")

    h_states = np.zeros((B, T + 1, H))
    c_states = np.zeros((B, T + 1, H))
    gates = []
    tanh_c_raw = []
    for t in range(T):
        xt = x[:, t]
        h_prev = h_states[:, t]
        c_prev = c_states[:, t]
        pre = [xt @ W[k] + h_prev @ U[k] + b[k] for k in range(4)]
        i_t = sigmoid(pre[0])
        f_t = sigmoid(pre[1])
        o_t = sigmoid(pre[2])
        g_t = np.tanh(pre[3])
        c_raw = f_t * c_prev + i_t * g_t
        tc = np.tanh(c_raw)
        h_raw = o_t * tc
        m = mask[:, t][:, None]
        h_states[:, t + 1] = m * h_raw + (1.0 - m) * h_prev
        c_states[:, t + 1] = m * c_raw + (1.0 - m) * c_prev
        gates.append((i_t, f_t, o_t, g_t))
        tanh_c_raw.append(tc)

    cache = LstmCache(x, mask, gates, tanh_c_raw, h_states, c_states, squeeze)
    h_final = h_states[:, T]
    return (h_final[0] if squeeze else h_final), cache


def lstm_backward(d_h, cache: LstmCache, params: ParamSet, prefix: str = "lstm") -> np.ndarray:
    """Backpropagate through time; accumulates weight grads, returns dL/dx."""
    W, U, _, D, H = _lstm_weights(params, prefix)
    dW = [params.grad(f"{prefix}_W_{gate}") for gate in LSTM_GATES]
    dU = [params.grad(f"{prefix}_U_{gate}") for gate in LSTM_GATES]
    db = [params.grad(f"{prefix}_b_{gate}") for gate in LSTM_GATES]

    x, mask = cache.x, cache.mask
    B, T, _ = x.shape
    d_h = np.asarray(d_h, dtype=np.float64)
    if cache.squeeze and d_h.ndim == 1:
        d_h = d_h[None]
    dh = d_h.copy()
    dc = np.zeros((B, H))
    dx = np.zeros_like(x)

    for t in range(T - 1, -1, -1):
        i_t, f_t, o_t, g_t = cache.gates[t]
        tc = cache.tanh_c_raw[t]
        c_prev = cache.c_states[:, t]
        h_prev = cache.h_states[:, t]
        m = mask[:, t][:, None]

        dh_raw = dh * m
        dc_raw = dc * m + dh_raw * o_t * (1.0 - tc * tc)
        do = dh_raw * tc
        df = dc_raw * c_prev
        di = dc_raw * g_t
        dg = dc_raw * i_t
        dpre = (
            di * i_t * (1.0 - i_t),
            df * f_t * (1.0 - f_t),
            do * o_t * (1.0 - o_t),
            dg * (1.0 - g_t * g_t),
        )

        xt = x[:, t]
        dxt = np.zeros((B, D))
        dh_next = dh * (1.0 - m)
        for k in range(4):
            dxt += dpre[k] @ W[k].T
            dh_next += dpre[k] @ U[k].T
            dW[k] += xt.T @ dpre[k]
            dU[k] += h_prev.T @ dpre[k]
            db[k] += dpre[k].sum(axis=0)
        dx[:, t] = dxt
        dh = dh_next
        dc = dc * (1.0 - m) + dc_raw * f_t

    return dx[0] if cache.squeeze else dx


def affine_forward(h: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    """W h + b with W of shape (out, in); h is (in,) or (B, in)."""
    h = np.asarray(h, dtype=np.float64)
    if h.shape[-1] != W.shape[1]:
        raise ValueError(f"input dim {h.shape[-1]} does not match W shape {W.shape}")
    if b.shape != (W.shape[0],):
        raise ValueError(f"bias shape {b.shape} does not match W shape {W.shape}")
    return h @ W.T + b


def affine_backward(d_out: np.ndarray, h: np.ndarray, W: np.ndarray):
    """Returns (dh, dW, db) for y = W h + b; batched inputs sum over the batch."""
    d_out = np.atleast_2d(np.asarray(d_out, dtype=np.float64))
    h2 = np.atleast_2d(np.asarray(h, dtype=np.float64))
    dW = d_out.T @ h2
    db = d_out.sum(axis=0)
    dh = d_out @ W
    if np.asarray(h).ndim == 1:
        dh = dh[0]
    return dh, dW, db


def softmax_ce(logits: np.ndarray, target: int):
    """Cross-entropy of softmax(logits) against a class index.

    Returns (loss, dloss/dlogits); stable for large logits.
    """
    logits = np.asarray(logits, dtype=np.float64)
    if not 0 <= target < logits.shape[-1]:
        raise ValueError(f"target {target} out of range for {logits.shape[-1]} classes")
    z = logits - np.max(logits)
    log_probs = z - np.log(np.sum(np.exp(z)))
    loss = -log_probs[target]
    grad = np.exp(log_probs)
    grad[target] -= 1.0
    return float(loss), grad


def softmax_ce_batch(logits: np.ndarray, targets: np.ndarray):
    """Row-wise softmax cross-entropy: (losses (B,), grads (B, K))."""
    logits = np.asarray(logits, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.int64)
    B, K = logits.shape
    if targets.shape != (B,):
        raise ValueError(f"targets shape {targets.shape} does not match batch {B}")
    if targets.size and (targets.min() < 0 or targets.max() >= K):
        raise ValueError(f"target out of range for {K} classes")
    z = logits - np.max(logits, axis=1, keepdims=True)
    log_probs = z - np.log(np.sum(np.exp(z), axis=1, keepdims=True))
    rows = np.arange(B)
    losses = -log_probs[rows, targets]
    grads = np.exp(log_probs)
    grads[rows, targets] -= 1.0
    return losses, grads


def sigmoid_bce(logit: float, target: int):
    """Binary cross-entropy on one logit; returns (loss, dloss/dlogit)."""
    losses, grads = sigmoid_bce_batch(np.array([logit]), np.array([target]))
    return float(losses[0]), float(grads[0])


def sigmoid_bce_batch(logits: np.ndarray, targets: np.ndarray):
    """Elementwise stable BCE: loss = max(z,0) - z*y + log(1 + exp(-|z|))."""
    z = np.asarray(logits, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if z.shape != y.shape:
        raise ValueError(f"logits shape {z.shape} does not match targets shape {y.shape}")
    losses = np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z)))
    grads = sigmoid(z) - y
    return losses, grads


@dataclass(frozen=True)
class GrlConfig:
    """Gradient-reversal strength; 0 disables adaptation entirely."""

    lam: float = 1.0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0, got {self.lam}")


def grl_forward(x: np.ndarray, cfg: GrlConfig) -> np.ndarray:
    """Identity (the same array object, bitwise)."""
    return x


def grl_backward(upstream: np.ndarray, cfg: GrlConfig) -> np.ndarray:
    """-lambda * upstream, exactly."""
    return -(cfg.lam * np.asarray(upstream, dtype=np.float64))


# ---------------------------------------------------------------------------
# Finite-difference gradient checking
# ---------------------------------------------------------------------------

@dataclass
class GradCheckReport:
    tol: float
    h: float
    per_param: dict[str, float] = field(default_factory=dict)
    worst_param: str = ""
    worst_analytic: float = 0.0
    worst_numeric: float = 0.0

    @property
    def max_rel_err(self) -> float:
        return max(self.per_param.values()) if self.per_param else 0.0

    @property
    def failures(self) -> list[str]:
        return [name for name, err in self.per_param.items() if err > self.tol]

    @property
    def passed(self) -> bool:
        return not self.failures

    def format(self) -> str:
        lines = []
        for name, err in self.per_param.items():
            status = "ok" if err <= self.tol else "FAIL"
            lines.append(f"{status:4s} {name:16s} max_rel_err={err:.3e}")
        verdict = "PASS" if self.passed else "FAIL"
        lines.append(f"{verdict}: max relative error {self.max_rel_err:.3e} (tol {self.tol:g})")
        return "\n".join(lines)


def grad_check(loss_fn, grad_fn, params: ParamSet, tol: float = 1e-4, h: float = 1e-5,
               names: list[str] | None = None) -> GradCheckReport:
    """Compare analytic gradients against central finite differences.

    loss_fn() recomputes the scalar loss from current parameter values and
    must be deterministic; grad_fn() accumulates analytic gradients into the
    (zeroed) gradient buffers.  Relative error per entry is
    |a - n| / max(1, |n|), reported as a per-parameter maximum.  `names`
    restricts the check to a parameter subset (the loss a parameter descends
    is not always the same scalar: gradient reversal flips one term's sign
    for upstream parameters only).
    """
    params.zero_grads()
    grad_fn()
    analytic = {name: params.grad(name).copy() for name in params.names()}

    report = GradCheckReport(tol=tol, h=h)
    worst = -1.0
    for name in (params.names() if names is None else names):
        value = params.value(name)
        flat = value.reshape(-1)
        a_flat = analytic[name].reshape(-1)
        max_err = 0.0
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + h
            loss_plus = loss_fn()
            flat[idx] = orig - h
            loss_minus = loss_fn()
            flat[idx] = orig
            numeric = (loss_plus - loss_minus) / (2.0 * h)
            rel = abs(a_flat[idx] - numeric) / max(1.0, abs(numeric))
            if rel > max_err:
                max_err = rel
            if rel > worst:
                worst = rel
                report.worst_param = name
                report.worst_analytic = float(a_flat[idx])
                report.worst_numeric = float(numeric)
        report.per_param[name] = max_err
    return report
