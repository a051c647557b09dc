"""End-to-end dependency parsing: training loop, greedy decoding, scoring.

A virtual ROOT token is prepended to every sentence; only its blue copy is
a head candidate, and the gold arc of the sentence root points at it.
Decoding keeps, for each token, the head minimizing the pair-wise score
over all blue candidates except the token itself.  No tree or projectivity
repair is applied; well-formedness violations are only reported.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Tuple

import numpy as np

from .aggregation import argmin_heads
from .conllu import ParseResult, Sentence, Vocab
from .model import (
    ModelParameters,
    Optimizer,
    ROOT_ID,
    ScorerConfig,
    _encode_fwd,
    init_parameters,
    label_loss_grad,
    label_scores,
    loss_grad,
    realize_ranks,
    zero_like,
)
from .orders import Realizer, psi_matrix
from .structures import ContractViolation, Structure, TokenSplitStructure, token_split


@dataclass
class Checkpoint:
    params: ModelParameters
    vocab: Dict[str, int]
    labels: List[str]


@dataclass
class EvalResult:
    uas: float
    las: float
    counted: int

    def __str__(self):
        return f"UAS={self.uas:.2f} LAS={self.las:.2f} (n={self.counted})"


def gold_token_split(sent: Sentence) -> TokenSplitStructure:
    """Gold arcs over ROOT + tokens: position i+1 depends on gold head + 1."""
    n = len(sent) + 1
    arcs = {(i + 2, h + 1) for i, h in enumerate(sent.gold_heads)}
    return token_split(Structure(n=n, arcs=arcs))


def _model_ids(sent: Sentence) -> List[int]:
    if sent.token_ids is None:
        raise ContractViolation("sentence has no token ids; attach a vocabulary first")
    return [ROOT_ID] + list(sent.token_ids)


def train(config: ScorerConfig, train_sentences: List[Sentence],
          dev_sentences: List[Sentence], vocab: Optional[Vocab] = None,
          log=None) -> Checkpoint:
    """Minibatch training on rank loss + label cross-entropy; keeps the
    checkpoint with the best dev UAS.  Deterministic under a fixed seed."""
    if not train_sentences:
        raise ContractViolation("empty training set")
    if vocab is None:
        vocab = Vocab.build(train_sentences)
        vocab.attach_ids(train_sentences)
        vocab.attach_ids(dev_sentences)
    config = replace(config, vocab_size=vocab.size,
                     label_count=max(1, len(vocab.labels)))
    params = init_parameters(config)
    opt = Optimizer(params)
    rng = np.random.default_rng(config.seed)
    label_ids = [[vocab.label_id(l) for l in s.gold_labels] for s in train_sentences]

    best = Checkpoint(_copy_params(params), dict(vocab.token_to_id), list(vocab.labels))
    best_uas = -1.0
    order = np.arange(len(train_sentences))
    for epoch in range(config.epochs):
        rng.shuffle(order)
        epoch_loss = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            grads = zero_like(params)
            batch_loss = 0.0
            for si in batch:
                sent = train_sentences[si]
                if len(sent) == 0:
                    continue
                ids = _model_ids(sent)
                gold = gold_token_split(sent)
                value, g = loss_grad(params, ids, gold, method="fast")
                for k in g:
                    grads[k] += g[k]
                h, cache = _encode_fwd(params, ids)
                ce = label_loss_grad(params, h, cache, label_ids[si], grads,
                                     positions=range(1, len(sent) + 1))
                batch_loss += value + ce
            if not math.isfinite(batch_loss):
                if log:
                    log(f"epoch {epoch}: non-finite loss, aborting with last finite checkpoint")
                return best
            scale = 1.0 / max(1, len(batch))
            for k in grads:
                grads[k] *= scale
            opt.step(params, grads)
            epoch_loss += batch_loss
        ckpt = Checkpoint(params, dict(vocab.token_to_id), list(vocab.labels))
        dev_uas = evaluate(parse(ckpt, dev_sentences), dev_sentences).uas if dev_sentences else 0.0
        if dev_uas >= best_uas:
            best_uas = dev_uas
            best = Checkpoint(_copy_params(params), dict(vocab.token_to_id),
                              list(vocab.labels))
        if log:
            log(f"epoch {epoch + 1}/{config.epochs} loss={epoch_loss:.3f} dev {dev_uas:.2f}")
    return best


def _copy_params(params: ModelParameters) -> ModelParameters:
    return ModelParameters(params.config, {k: v.copy() for k, v in params.arrays.items()})


def parse(checkpoint: Checkpoint, sentences: List[Sentence],
          threads: int = 1) -> List[ParseResult]:
    """Greedy order-theoretic decoding, linear-ish per sentence for K=2."""
    vocab = Vocab(token_to_id=checkpoint.vocab, labels=checkpoint.labels)

    def one(sent: Sentence) -> ParseResult:
        if len(sent) == 0:
            return ParseResult([], [], [])
        ids = [ROOT_ID] + vocab.encode_tokens(sent.tokens)
        h, _ = _encode_fwd(checkpoint.params, ids)
        realizer = realize_ranks(checkpoint.params, h)
        return decode_ranks(realizer, checkpoint, h)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, sentences))
    return [one(s) for s in sentences]


def decode_ranks(realizer: Realizer, checkpoint: Optional[Checkpoint] = None,
                 hiddens: Optional[np.ndarray] = None) -> ParseResult:
    """Heads from a realizer over ROOT + n tokens (ROOT's red copy ignored)."""
    m = realizer.n_tokens
    best = argmin_heads(realizer, m, forbid_self=True)
    heads, psis = [], []
    for x in range(1, m):
        arg, val = best[x]
        heads.append((arg - 1) if arg is not None else 0)
        psis.append(val)
    labels = [""] * (m - 1)
    if checkpoint is not None and hiddens is not None and checkpoint.labels:
        pred = label_scores(checkpoint.params, hiddens[1:]).argmax(axis=1)
        labels = [checkpoint.labels[i] for i in pred]
    return ParseResult(pred_heads=heads, pred_labels=labels, best_psi=psis)


def decode_bruteforce(realizer: Realizer) -> List[int]:
    """Quadratic argmin decode used as the oracle for the greedy fast path."""
    m = realizer.n_tokens
    psi = psi_matrix(realizer.red_ranks(), realizer.blue_ranks()).copy()
    np.fill_diagonal(psi, np.inf)
    heads = []
    for x in range(1, m):
        heads.append(int(np.argmin(psi[x])) if m > 1 else 0)
    return heads


def evaluate(preds: List[ParseResult], golds: List[Sentence],
             ignore_punct: bool = False) -> EvalResult:
    """Percentage of tokens with the correct head (UAS) and head+label (LAS)."""
    if len(preds) != len(golds):
        raise ContractViolation(f"{len(preds)} predictions vs {len(golds)} gold sentences")
    counted = correct_h = correct_hl = 0
    for pred, gold in zip(preds, golds):
        if len(pred) != len(gold):
            raise ContractViolation("prediction/sentence length mismatch")
        for j in range(len(gold)):
            if ignore_punct and gold.upos[j] == "PUNCT":
                continue
            counted += 1
            if pred.pred_heads[j] == gold.gold_heads[j]:
                correct_h += 1
                if pred.pred_labels[j] == gold.gold_labels[j]:
                    correct_hl += 1
    if counted == 0:
        return EvalResult(uas=0.0, las=0.0, counted=0)
    return EvalResult(uas=100.0 * correct_h / counted,
                      las=100.0 * correct_hl / counted, counted=counted)


def tree_violations(pred_heads: List[int]) -> Dict[str, int]:
    """Diagnostics for greedy output: cycles and surplus roots (no repair)."""
    n = len(pred_heads)
    color = [0] * (n + 1)  # 0 unseen, 1 in progress, 2 done; index 0 is ROOT
    color[0] = 2
    cycles = 0
    for start in range(1, n + 1):
        if color[start]:
            continue
        path = []
        node = start
        while color[node] == 0:
            color[node] = 1
            path.append(node)
            node = pred_heads[node - 1]
        if color[node] == 1:
            cycles += 1
        for p in path:
            color[p] = 2
    roots = sum(1 for h in pred_heads if h == 0)
    return {"cycles": cycles, "extra_roots": max(0, roots - 1)}


def random_rank_baseline(sentences: List[Sentence], seed: int = 0) -> List[ParseResult]:
    """Decode i.i.d. random ranks: the floor any trained model must beat."""
    rng = np.random.default_rng(seed)
    out = []
    for sent in sentences:
        m = len(sent) + 1
        realizer = Realizer(k=2, ranks=rng.normal(size=(2, 2 * m)))
        res = decode_ranks(realizer)
        out.append(ParseResult(res.pred_heads, [""] * len(sent), res.best_psi))
    return out
