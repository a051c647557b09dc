"""Desk-scale trainable scorer emitting 2K ranks per token.

A small embedding + contextual encoder (bidirectional recurrent by default,
a windowed feedforward alternative for speed) feeds two heads: a linear
rank head producing K red and K blue ranks per token, and a token-level
label classifier.  Gradients are computed analytically in numpy; the
training loss couples the rank head to gold token-split edges.

The loss for a sentence with token-split edges E is

    log sum_{(x,y) not in E} exp(-psi(x,y)) + log sum_{(x,y) in E} exp(psi(x,y))

where psi is the pair-wise max rank difference.  For K=2 the first term and
its gradient are computed with the sorted-sweep masses in O(n log n); the
quadratic reference path is kept for verification.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .aggregation import _stream_order
from .numerics import NEG_INF, logsubexp, logsumexp
from .orders import Realizer, psi_matrix
from .structures import ContractViolation, TokenSplitStructure

UNK_ID = 0
ROOT_ID = 1

CHECKPOINT_VERSION = 1

#: complement mass floor used when all pair mass sits on the edges
OFFEDGE_FLOOR_RATIO = 1e-12


class NumericsError(RuntimeError):
    """A gradient or loss became non-finite; the message names the culprit."""


@dataclass(frozen=True)
class ScorerConfig:
    vocab_size: int
    label_count: int
    embed_dim: int = 64
    context: str = "birnn"  # "birnn" | "window"
    hidden_dim: int = 128
    k: int = 2
    seed: int = 0
    learning_rate: float = 1e-3
    grad_clip: float = 1.0
    epochs: int = 20
    batch_size: int = 16
    optimizer: str = "adam"  # "adam" | "sgd"
    momentum: float = 0.9

    def __post_init__(self):
        for name in ("vocab_size", "label_count", "embed_dim", "hidden_dim", "k",
                     "epochs", "batch_size"):
            if getattr(self, name) < 1:
                raise ContractViolation(f"{name} must be positive")
        if self.context not in ("birnn", "window"):
            raise ContractViolation(f"unknown context encoder {self.context!r}")
        if self.context == "birnn" and self.hidden_dim % 2 != 0:
            raise ContractViolation("birnn needs an even hidden_dim")
        if self.optimizer not in ("adam", "sgd"):
            raise ContractViolation(f"unknown optimizer {self.optimizer!r}")


@dataclass
class ModelParameters:
    config: ScorerConfig
    arrays: Dict[str, np.ndarray]

    def flat(self) -> np.ndarray:
        return np.concatenate([self.arrays[k].ravel() for k in sorted(self.arrays)])

    def with_flat(self, vec: np.ndarray) -> "ModelParameters":
        out, off = {}, 0
        for k in sorted(self.arrays):
            a = self.arrays[k]
            out[k] = vec[off : off + a.size].reshape(a.shape).astype(np.float64)
            off += a.size
        return ModelParameters(self.config, out)


def _array_specs(cfg: ScorerConfig) -> List[Tuple[str, Tuple[int, ...]]]:
    e, h = cfg.embed_dim, cfg.hidden_dim
    specs = [("emb", (cfg.vocab_size, e))]
    if cfg.context == "window":
        specs += [("w_in", (3 * e, h)), ("b_in", (h,))]
    else:
        d = h // 2
        specs += [
            ("w_fwd", (e, d)), ("u_fwd", (d, d)), ("b_fwd", (d,)),
            ("w_bwd", (e, d)), ("u_bwd", (d, d)), ("b_bwd", (d,)),
        ]
    specs += [
        ("w_rank", (h, 2 * cfg.k)), ("b_rank", (2 * cfg.k,)),
        ("w_label", (h, cfg.label_count)), ("b_label", (cfg.label_count,)),
    ]
    return specs


def init_parameters(cfg: ScorerConfig) -> ModelParameters:
    rng = np.random.default_rng(cfg.seed)
    arrays = {}
    for name, shape in _array_specs(cfg):
        if name.startswith("b_"):
            arrays[name] = np.zeros(shape)
        else:
            scale = 1.0 / math.sqrt(shape[0])
            arrays[name] = rng.normal(0.0, scale, size=shape)
    return ModelParameters(cfg, arrays)


def zero_like(params: ModelParameters) -> Dict[str, np.ndarray]:
    return {k: np.zeros_like(v) for k, v in params.arrays.items()}


# ---------------------------------------------------------------------------
# Encoder


def _clip_ids(cfg: ScorerConfig, token_ids: Sequence[int]) -> np.ndarray:
    ids = np.asarray(list(token_ids), dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= cfg.vocab_size):
        ids = np.where((ids < 0) | (ids >= cfg.vocab_size), UNK_ID, ids)
    return ids


def encode(params: ModelParameters, token_ids: Sequence[int]) -> np.ndarray:
    """Per-token hidden vectors; unknown ids fall back to the UNK row."""
    h, _ = _encode_fwd(params, token_ids)
    return h


def _encode_fwd(params: ModelParameters, token_ids):
    cfg = params.config
    ids = _clip_ids(cfg, token_ids)
    n = ids.size
    a = params.arrays
    x = a["emb"][ids] if n else np.zeros((0, cfg.embed_dim))
    if cfg.context == "window":
        xp = np.vstack([np.zeros((1, cfg.embed_dim)), x, np.zeros((1, cfg.embed_dim))])
        ctx = np.hstack([xp[:-2], xp[1:-1], xp[2:]]) if n else np.zeros((0, 3 * cfg.embed_dim))
        pre = ctx @ a["w_in"] + a["b_in"]
        h = np.tanh(pre)
        return h, {"ids": ids, "x": x, "ctx": ctx, "h": h}
    d = cfg.hidden_dim // 2
    fwd = np.zeros((n + 1, d))
    for i in range(n):
        fwd[i + 1] = np.tanh(x[i] @ a["w_fwd"] + fwd[i] @ a["u_fwd"] + a["b_fwd"])
    bwd = np.zeros((n + 1, d))
    for i in range(n - 1, -1, -1):
        bwd[i] = np.tanh(x[i] @ a["w_bwd"] + bwd[i + 1] @ a["u_bwd"] + a["b_bwd"])
    h = np.hstack([fwd[1:], bwd[:-1]]) if n else np.zeros((0, cfg.hidden_dim))
    return h, {"ids": ids, "x": x, "fwd": fwd, "bwd": bwd, "h": h}


def _encode_bwd(params: ModelParameters, cache, dh: np.ndarray, grads: Dict[str, np.ndarray]):
    cfg = params.config
    a = params.arrays
    ids = cache["ids"]
    n = ids.size
    if n == 0:
        return
    if cfg.context == "window":
        dpre = dh * (1.0 - cache["h"] ** 2)
        grads["w_in"] += cache["ctx"].T @ dpre
        grads["b_in"] += dpre.sum(axis=0)
        dctx = dpre @ a["w_in"].T
        e = cfg.embed_dim
        dx = dctx[:, e : 2 * e].copy()
        dx[: n - 1] += dctx[1:, :e]
        dx[1:] += dctx[: n - 1, 2 * e :]
        np.add.at(grads["emb"], ids, dx)
        return
    d = cfg.hidden_dim // 2
    x, fwd, bwd = cache["x"], cache["fwd"], cache["bwd"]
    dx = np.zeros_like(x)
    dcarry = np.zeros(d)
    for i in range(n - 1, -1, -1):
        dht = dh[i, :d] + dcarry
        dpre = dht * (1.0 - fwd[i + 1] ** 2)
        grads["w_fwd"] += np.outer(x[i], dpre)
        grads["u_fwd"] += np.outer(fwd[i], dpre)
        grads["b_fwd"] += dpre
        dx[i] += dpre @ a["w_fwd"].T
        dcarry = dpre @ a["u_fwd"].T
    dcarry = np.zeros(d)
    for i in range(n):
        dht = dh[i, d:] + dcarry
        dpre = dht * (1.0 - bwd[i] ** 2)
        grads["w_bwd"] += np.outer(x[i], dpre)
        grads["u_bwd"] += np.outer(bwd[i + 1], dpre)
        grads["b_bwd"] += dpre
        dx[i] += dpre @ a["w_bwd"].T
        dcarry = dpre @ a["u_bwd"].T
    np.add.at(grads["emb"], ids, dx)


# ---------------------------------------------------------------------------
# Heads


def realize_ranks(params: ModelParameters, hiddens: np.ndarray) -> Realizer:
    """Rank head output laid out as a K x 2n realizer (red columns first)."""
    cfg = params.config
    out = hiddens @ params.arrays["w_rank"] + params.arrays["b_rank"]
    n = hiddens.shape[0]
    ranks = np.empty((cfg.k, 2 * n))
    ranks[:, :n] = out[:, : cfg.k].T
    ranks[:, n:] = out[:, cfg.k :].T
    return Realizer(k=cfg.k, ranks=ranks)


def _rank_grad_to_head(cfg: ScorerConfig, d_red: np.ndarray, d_blue: np.ndarray) -> np.ndarray:
    # Back to the per-token (n, 2K) head layout.
    return np.hstack([d_red.T, d_blue.T])


def label_scores(params: ModelParameters, hiddens: np.ndarray) -> np.ndarray:
    """Per-token label logits; prediction is the row argmax."""
    return hiddens @ params.arrays["w_label"] + params.arrays["b_label"]


def _label_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# Loss on ranks


@dataclass
class LossParts:
    off_edge: float
    on_edge: float
    empty_edges: bool
    clamped: bool

    @property
    def total(self) -> float:
        return self.off_edge if self.empty_edges else self.off_edge + self.on_edge


def loss(ranks: Realizer, gold: TokenSplitStructure, method: str = "fast") -> float:
    """Training objective value; warns when the gold edge set is empty."""
    parts = loss_parts(ranks, gold, method=method)
    if parts.empty_edges:
        warnings.warn("empty gold edge set: on-edge term dropped", RuntimeWarning,
                      stacklevel=2)
    return parts.total


def loss_parts(ranks: Realizer, gold: TokenSplitStructure, method: str = "fast") -> LossParts:
    if ranks.n_tokens != gold.n:
        raise ContractViolation(
            f"ranks cover {ranks.n_tokens} tokens, gold needs {gold.n}")
    red, blue = ranks.red_ranks(), ranks.blue_ranks()
    edges = sorted(gold.edges)
    if method == "fast" and ranks.k == 2:
        lm_all = float(logsumexp(np.logaddexp(*_lse_sides(red, blue)[:2])))
    else:
        lm_all = float(logsumexp(-psi_matrix(red, blue)))
    on_vals = np.array([_edge_psi(red, blue, x, y) for x, y in edges])
    lm_edges = float(logsumexp(-on_vals)) if edges else NEG_INF
    off = logsubexp(lm_all, lm_edges)
    clamped = off == NEG_INF
    if clamped:
        off = lm_all + math.log(OFFEDGE_FLOOR_RATIO)
    on = float(logsumexp(on_vals)) if edges else 0.0
    return LossParts(off_edge=off, on_edge=on, empty_edges=not edges, clamped=clamped)


def _edge_psi(red, blue, x, y) -> float:
    return float(np.max(red[:, x - 1] - blue[:, y - 1]))


def _lse_sides(red: np.ndarray, blue: np.ndarray):
    """Sorted-sweep log masses: per-source and per-target, one per rank row.

    a1[x] = log sum over targets on the row-1 side of exp(f1(y) - f1(x)),
    b1[y] = log sum over sources claiming y on the row-1 side of the same
    mass, and symmetrically a2/b2 for row 2.  Sum of exp(a1)+exp(a2) equals
    sum of exp(b1)+exp(b2): both count every pair once.
    """
    n = red.shape[1]
    order = _stream_order(red, blue)
    out = []
    for row, seq in ((0, order), (1, order[::-1])):
        is_blue = seq < n
        blue_contrib = np.full(2 * n, NEG_INF)
        blue_contrib[is_blue] = blue[row][seq[is_blue]]
        pre = np.logaddexp.accumulate(blue_contrib)
        a = np.empty(n)
        xs = seq[~is_blue] - n
        a[xs] = pre[~is_blue] - red[row][xs]
        red_contrib = np.full(2 * n, NEG_INF)
        red_contrib[~is_blue] = -red[row][xs]
        suf = np.logaddexp.accumulate(red_contrib[::-1])[::-1]
        b = np.empty(n)
        ys = seq[is_blue]
        b[ys] = blue[row][ys] + suf[is_blue]
        out.append((a, b))
    (a1, b1), (a2, b2) = out
    return a1, a2, b1, b2


def _side_assignment(red, blue, x, y) -> int:
    """Which rank row the sweep charges the pair (x, y) to: 0 or 1."""
    key_r = red[0, x - 1] - red[1, x - 1]
    key_b = blue[0, y - 1] - blue[1, y - 1]
    return 0 if key_b <= key_r else 1


def rank_loss_grad(red: np.ndarray, blue: np.ndarray, gold: TokenSplitStructure,
                   method: str = "fast"):
    """Loss value and its gradient w.r.t. the red and blue rank matrices.

    The max inside psi routes gradient to the achieving row (lowest row on
    ties).  `method="naive"` materializes all pairs; `method="fast"` uses
    the sweep masses and is O(n log n + |E|) for K=2.
    """
    if method == "naive" or red.shape[0] != 2:
        return _rank_loss_grad_naive(red, blue, gold)
    return _rank_loss_grad_fast(red, blue, gold)


def _rank_loss_grad_naive(red, blue, gold):
    n = red.shape[1]
    k = red.shape[0]
    diffs = red[:, :, None] - blue[:, None, :]
    arg = diffs.argmax(axis=0)  # ties resolve to the lowest row
    psi = np.take_along_axis(diffs, arg[None], axis=0)[0]
    edge_mask = np.zeros((n, n), dtype=bool)
    for x, y in gold.edges:
        edge_mask[x - 1, y - 1] = True

    off = float(logsumexp(np.where(edge_mask, NEG_INF, -psi)))
    if off == NEG_INF:
        # Complement empty: clamped form, gradient through the all-pairs mass.
        lm_all = float(logsumexp(-psi))
        off = lm_all + math.log(OFFEDGE_FLOOR_RATIO)
        w_off = np.exp(-psi - lm_all)
        clamped = True
    else:
        w_off = np.where(edge_mask, 0.0, np.exp(-psi - off))
        clamped = False
    d_psi = -w_off
    on = 0.0
    if gold.edges:
        on = float(logsumexp(psi[edge_mask]))
        w_on = np.zeros((n, n))
        w_on[edge_mask] = np.exp(psi[edge_mask] - on)
        d_psi = d_psi + w_on
    d_red = np.zeros_like(red)
    d_blue = np.zeros_like(blue)
    for row in range(k):
        sel = arg == row
        d_red[row] = np.where(sel, d_psi, 0.0).sum(axis=1)
        d_blue[row] = -np.where(sel, d_psi, 0.0).sum(axis=0)
    value = off if not gold.edges else off + on
    return value, d_red, d_blue, LossParts(off, on, not gold.edges, clamped)


def _rank_loss_grad_fast(red, blue, gold):
    n = red.shape[1]
    a1, a2, b1, b2 = _lse_sides(red, blue)
    lm_all = float(logsumexp(np.logaddexp(a1, a2)))

    edges = sorted(gold.edges)
    e_x = np.array([x - 1 for x, _ in edges], dtype=np.int64)
    e_y = np.array([y - 1 for _, y in edges], dtype=np.int64)
    key_r = red[0] - red[1]
    key_b = blue[0] - blue[1]
    e_side = np.where(key_b[e_y] <= key_r[e_x], 0, 1) if edges else np.zeros(0, np.int64)
    e_val = np.where(e_side == 0, red[0, e_x] - blue[0, e_y],
                     red[1, e_x] - blue[1, e_y]) if edges else np.zeros(0)
    lm_edges = float(logsumexp(-e_val)) if edges else NEG_INF

    off = logsubexp(lm_all, lm_edges)
    clamped = off == NEG_INF
    if clamped:
        # Gradient of the clamped form flows through the all-pairs mass only.
        off = lm_all + math.log(OFFEDGE_FLOOR_RATIO)
        denom = lm_all
        eh_x = eh_y = eh_side = np.zeros(0, np.int64)
        eh_val = np.zeros(0)
    else:
        denom = off
        eh_x, eh_y, eh_side, eh_val = e_x, e_y, e_side, e_val

    # Per-vertex log masses of the edge corrections, split by charged side.
    def _scatter_lse(idx, side, vals, row, size):
        out = np.full(size, NEG_INF)
        sel = side == row
        np.logaddexp.at(out, idx[sel], -vals[sel])
        return out

    corr_a = [_scatter_lse(eh_x, eh_side, eh_val, row, n) for row in (0, 1)]
    corr_b = [_scatter_lse(eh_y, eh_side, eh_val, row, n) for row in (0, 1)]

    d_red = np.zeros_like(red)
    d_blue = np.zeros_like(blue)
    for row, (amass, bmass) in enumerate(((a1, b1), (a2, b2))):
        num_a = np.array([logsubexp(amass[i], corr_a[row][i]) for i in range(n)])
        num_b = np.array([logsubexp(bmass[i], corr_b[row][i]) for i in range(n)])
        d_red[row] = -np.exp(num_a - denom)
        d_blue[row] = np.exp(num_b - denom)

    on = 0.0
    if edges:
        on = float(logsumexp(e_val))
        w_on = np.exp(e_val - on)
        for i in range(len(edges)):
            d_red[e_side[i], e_x[i]] += w_on[i]
            d_blue[e_side[i], e_y[i]] -= w_on[i]
    value = off if not edges else off + on
    return value, d_red, d_blue, LossParts(off, on, not edges, clamped)


# ---------------------------------------------------------------------------
# Full-model gradients


def loss_grad(params: ModelParameters, token_ids: Sequence[int],
              gold: TokenSplitStructure, method: str = "fast"):
    """Analytic gradient of the rank loss w.r.t. all parameters."""
    h, cache = _encode_fwd(params, token_ids)
    ranks = realize_ranks(params, h)
    value, d_red, d_blue, _ = rank_loss_grad(ranks.red_ranks(), ranks.blue_ranks(),
                                             gold, method=method)
    grads = zero_like(params)
    d_out = _rank_grad_to_head(params.config, d_red, d_blue)
    grads["w_rank"] += h.T @ d_out
    grads["b_rank"] += d_out.sum(axis=0)
    dh = d_out @ params.arrays["w_rank"].T
    _encode_bwd(params, cache, dh, grads)
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NumericsError(f"non-finite gradient in parameter block {name!r}")
    return value, grads


def label_loss_grad(params: ModelParameters, hiddens: np.ndarray, cache,
                    gold_label_ids: Sequence[int], grads: Dict[str, np.ndarray],
                    positions: Optional[Sequence[int]] = None) -> float:
    """Summed cross-entropy over tokens; accumulates into `grads`."""
    if positions is None:
        positions = range(hiddens.shape[0])
    positions = list(positions)
    if not positions:
        return 0.0
    hs = hiddens[positions]
    logits = label_scores(params, hs)
    probs = _label_softmax(logits)
    tgt = np.asarray(list(gold_label_ids), dtype=np.int64)
    ce = -float(np.sum(np.log(np.maximum(probs[np.arange(len(positions)), tgt], 1e-300))))
    dlogits = probs
    dlogits[np.arange(len(positions)), tgt] -= 1.0
    grads["w_label"] += hs.T @ dlogits
    grads["b_label"] += dlogits.sum(axis=0)
    dh = np.zeros_like(hiddens)
    dh[positions] = dlogits @ params.arrays["w_label"].T
    _encode_bwd(params, cache, dh, grads)
    return ce


# ---------------------------------------------------------------------------
# Optimizers


class Optimizer:
    def __init__(self, params: ModelParameters):
        cfg = params.config
        self.cfg = cfg
        self.t = 0
        if cfg.optimizer == "adam":
            self.m = zero_like(params)
            self.v = zero_like(params)
        else:
            self.vel = zero_like(params)

    def step(self, params: ModelParameters, grads: Dict[str, np.ndarray]):
        cfg = self.cfg
        _clip_global_norm(grads, cfg.grad_clip)
        self.t += 1
        if cfg.optimizer == "adam":
            b1, b2, eps = 0.9, 0.999, 1e-8
            for k, g in grads.items():
                self.m[k] = b1 * self.m[k] + (1 - b1) * g
                self.v[k] = b2 * self.v[k] + (1 - b2) * g * g
                mhat = self.m[k] / (1 - b1 ** self.t)
                vhat = self.v[k] / (1 - b2 ** self.t)
                params.arrays[k] -= cfg.learning_rate * mhat / (np.sqrt(vhat) + eps)
        else:
            for k, g in grads.items():
                self.vel[k] = cfg.momentum * self.vel[k] - cfg.learning_rate * g
                params.arrays[k] += self.vel[k]


def _clip_global_norm(grads: Dict[str, np.ndarray], clip: float):
    if clip <= 0:
        return
    norm = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if norm > clip:
        scale = clip / norm
        for g in grads.values():
            g *= scale


# ---------------------------------------------------------------------------
# Checkpoints: JSON header line + raw little-endian float32 arrays


def save_checkpoint(path, params: ModelParameters, vocab: Dict[str, int],
                    labels: List[str]):
    cfg = params.config
    names = [name for name, _ in _array_specs(cfg)]
    header = {
        "format_version": CHECKPOINT_VERSION,
        "config": asdict(cfg),
        "vocab": vocab,
        "labels": labels,
        "arrays": [{"name": n, "shape": list(params.arrays[n].shape)} for n in names],
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(blob + b"\n")
        for n in names:
            fh.write(np.ascontiguousarray(params.arrays[n], dtype="<f4").tobytes())


def load_checkpoint(path):
    with open(path, "rb") as fh:
        header_line = fh.readline()
        header = json.loads(header_line.decode("utf-8"))
        if header.get("format_version") != CHECKPOINT_VERSION:
            raise ContractViolation(
                f"unsupported checkpoint version {header.get('format_version')!r}")
        cfg = ScorerConfig(**header["config"])
        arrays = {}
        for spec in header["arrays"]:
            shape = tuple(spec["shape"])
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(count * 4)
            if len(raw) != count * 4:
                raise ContractViolation(f"truncated array {spec['name']!r}")
            arrays[spec["name"]] = np.frombuffer(raw, dtype="<f4").reshape(shape).astype(np.float64)
    params = ModelParameters(cfg, arrays)
    return params, header["vocab"], header["labels"]
