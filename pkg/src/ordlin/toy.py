"""A small synthetic dependency treebank with a consistent head grammar.

Sentences follow a determiner/adjective/noun/verb/adverb/preposition
template grammar whose attachment rules are deterministic given the POS
sequence, so a desk-scale scorer can both overfit tiny samples and
generalize across samples drawn from the same grammar.
"""

from __future__ import annotations

from typing import List

import numpy as np

from .conllu import Sentence

DETS = ["the", "a", "this", "that", "every", "some"]
ADJS = ["old", "red", "small", "happy", "quick", "lazy", "noisy", "bright"]
NOUNS = ["dog", "cat", "bird", "fox", "tree", "river", "house", "cloud", "child", "stone"]
VERBS = ["sees", "chases", "finds", "likes", "watches", "follows", "paints", "builds"]
ADVS = ["quickly", "quietly", "often", "today", "carefully"]
PREPS = ["near", "under", "behind", "beside"]


def _noun_phrase(rng, words, upos, heads, labels):
    """DET [ADJ]* NOUN; returns the noun's 1-based index."""
    det = len(words) + 1
    words.append(DETS[rng.integers(len(DETS))])
    upos.append("DET")
    heads.append(0)
    labels.append("det")
    adj_idx = []
    for _ in range(rng.integers(0, 3)):
        adj_idx.append(len(words) + 1)
        words.append(ADJS[rng.integers(len(ADJS))])
        upos.append("ADJ")
        heads.append(0)
        labels.append("amod")
    noun = len(words) + 1
    words.append(NOUNS[rng.integers(len(NOUNS))])
    upos.append("NOUN")
    heads.append(0)
    labels.append("")
    heads[det - 1] = noun
    for a in adj_idx:
        heads[a - 1] = noun
    return noun


def generate_sentence(rng: np.random.Generator) -> Sentence:
    words: List[str] = []
    upos: List[str] = []
    heads: List[int] = []
    labels: List[str] = []

    subj = _noun_phrase(rng, words, upos, heads, labels)
    labels[subj - 1] = "nsubj"
    verb = len(words) + 1
    words.append(VERBS[rng.integers(len(VERBS))])
    upos.append("VERB")
    heads.append(0)
    labels.append("root")
    heads[subj - 1] = verb

    if rng.random() < 0.85:
        obj = _noun_phrase(rng, words, upos, heads, labels)
        labels[obj - 1] = "dobj"
        heads[obj - 1] = verb
    if rng.random() < 0.4:
        prep = len(words) + 1
        words.append(PREPS[rng.integers(len(PREPS))])
        upos.append("ADP")
        heads.append(verb)
        labels.append("prep")
        pobj = _noun_phrase(rng, words, upos, heads, labels)
        labels[pobj - 1] = "pobj"
        heads[pobj - 1] = prep
    if rng.random() < 0.5:
        adv = len(words) + 1
        words.append(ADVS[rng.integers(len(ADVS))])
        upos.append("ADV")
        heads.append(verb)
        labels.append("advmod")
    words.append(".")
    upos.append("PUNCT")
    heads.append(verb)
    labels.append("punct")
    return Sentence(tokens=words, upos=upos, gold_heads=heads, gold_labels=labels)


def generate_treebank(n_sentences: int, seed: int = 0) -> List[Sentence]:
    rng = np.random.default_rng(seed)
    return [generate_sentence(rng) for _ in range(n_sentences)]
