"""CoNLL-U reading and writing, plus the vocabulary over a treebank.

Only the columns the pipeline consumes are interpreted: ID, FORM, UPOS,
HEAD, and DEPREL.  Comment lines and multiword/empty-node ids (containing
'-' or '.') are skipped.  Written files carry '_' in the remaining columns.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .model import ROOT_ID, UNK_ID


class ConlluError(ValueError):
    """Malformed CoNLL-U input; message carries the line number."""


@dataclass
class Sentence:
    tokens: List[str]
    upos: List[str]
    gold_heads: List[int]          # 0 means the virtual root
    gold_labels: List[str]
    token_ids: Optional[List[int]] = None

    def __post_init__(self):
        n = len(self.tokens)
        if not (len(self.upos) == len(self.gold_heads) == len(self.gold_labels) == n):
            raise ConlluError("per-token fields must have equal lengths")
        for h in self.gold_heads:
            if not (0 <= h <= n):
                raise ConlluError(f"head {h} outside 0..{n}")

    def __len__(self):
        return len(self.tokens)


@dataclass
class ParseResult:
    pred_heads: List[int]
    pred_labels: List[str]
    best_psi: List[float]

    def __len__(self):
        return len(self.pred_heads)


def read_conllu(path) -> List[Sentence]:
    sentences: List[Sentence] = []
    cur: List[List[str]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                if cur:
                    sentences.append(_finish(cur, lineno))
                    cur = []
                continue
            if line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 10:
                raise ConlluError(f"line {lineno}: expected 10 tab-separated columns, "
                                  f"got {len(cols)}")
            if "-" in cols[0] or "." in cols[0]:
                continue  # multiword range or empty node
            try:
                int(cols[0])
            except ValueError:
                raise ConlluError(f"line {lineno}: non-integer ID {cols[0]!r}") from None
            try:
                int(cols[6])
            except ValueError:
                raise ConlluError(f"line {lineno}: non-integer HEAD {cols[6]!r}") from None
            cur.append([cols[0], cols[1], cols[3], cols[6], cols[7], str(lineno)])
    if cur:
        sentences.append(_finish(cur, lineno))
    return sentences


def _finish(rows, lineno) -> Sentence:
    tokens = [r[1] for r in rows]
    upos = [r[2] for r in rows]
    heads = [int(r[3]) for r in rows]
    labels = [r[4] for r in rows]
    n = len(tokens)
    for r, h in zip(rows, heads):
        if not (0 <= h <= n):
            raise ConlluError(f"line {r[5]}: HEAD {h} outside 0..{n}")
    return Sentence(tokens=tokens, upos=upos, gold_heads=heads, gold_labels=labels)


def write_conllu(path, sentences: List[Sentence],
                 predictions: Optional[List[ParseResult]] = None):
    """Write sentences; with `predictions`, HEAD and DEPREL are replaced."""
    with open(path, "w", encoding="utf-8") as fh:
        for i, sent in enumerate(sentences):
            heads = predictions[i].pred_heads if predictions else sent.gold_heads
            labels = predictions[i].pred_labels if predictions else sent.gold_labels
            for j in range(len(sent)):
                fh.write("\t".join([
                    str(j + 1), sent.tokens[j], "_", sent.upos[j], "_", "_",
                    str(heads[j]), labels[j], "_", "_",
                ]) + "\n")
            fh.write("\n")


@dataclass
class Vocab:
    """Token and label inventories.  Ids 0 and 1 are reserved (UNK, ROOT)."""

    token_to_id: Dict[str, int] = field(default_factory=dict)
    labels: List[str] = field(default_factory=list)

    @classmethod
    def build(cls, sentences: List[Sentence]) -> "Vocab":
        tokens: Dict[str, int] = {}
        labels = set()
        for sent in sentences:
            for tok in sent.tokens:
                if tok not in tokens:
                    tokens[tok] = ROOT_ID + 1 + len(tokens)
            labels.update(sent.gold_labels)
        return cls(token_to_id=tokens, labels=sorted(labels))

    @property
    def size(self) -> int:
        return ROOT_ID + 1 + len(self.token_to_id)

    def encode_tokens(self, tokens: List[str]) -> List[int]:
        return [self.token_to_id.get(t, UNK_ID) for t in tokens]

    def label_id(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            return 0

    def attach_ids(self, sentences: List[Sentence]):
        for sent in sentences:
            sent.token_ids = self.encode_tokens(sent.tokens)
