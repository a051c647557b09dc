"""Binary tree reconstruction from inorder and postorder traversals.

The reconstruction is deliberately order-theoretic rather than the usual
recursive splitting: "left descendant of" is the set of pairs ordered the
same way by inorder and postorder, and "right descendant of" the pairs
ordered the same way by reversed inorder and postorder.  Children are the
elements of those down-sets with the deepest subtrees.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class TraversalError(ValueError):
    """Traversal pair does not describe any binary tree."""

    def __init__(self, message: str, label=None):
        super().__init__(message)
        self.label = label


@dataclass
class BinaryTree:
    nodes: tuple
    root: object
    left: dict = field(default_factory=dict)
    right: dict = field(default_factory=dict)

    def inorder(self) -> list:
        out = []
        stack, cur = [], self.root
        while stack or cur is not None:
            while cur is not None:
                stack.append(cur)
                cur = self.left.get(cur)
            cur = stack.pop()
            out.append(cur)
            cur = self.right.get(cur)
        return out

    def postorder(self) -> list:
        out = []
        stack = [(self.root, False)] if self.root is not None else []
        while stack:
            node, expanded = stack.pop()
            if expanded:
                out.append(node)
                continue
            stack.append((node, True))
            for child in (self.right.get(node), self.left.get(node)):
                if child is not None:
                    stack.append((child, False))
        return out


def reconstruct_binary_tree(inorder: Sequence, postorder: Sequence) -> BinaryTree:
    """Rebuild the unique binary tree with the given traversals.

    Two partial orders over the labels drive the decode:

      P1: x before y in inorder AND in postorder,
      P2: x after y in inorder AND before y in postorder.

    P2 relates x to exactly its ancestors whose right subtree holds x, so
    the nearest of those (x's right-side parent candidate) is the inorder
    maximum of x's successors in P2.  P1 relates x to every ancestor whose
    left subtree holds x, plus pairs split across a common ancestor; the
    split pairs all sit inorder-after the genuine ancestors, so the inorder
    minimum of x's P1-successors is the nearest left-side parent candidate.
    Whichever candidate sits deeper (earlier in postorder) is x's parent,
    and the side it was found on makes x a left or a right child.

    Raises TraversalError (carrying the first conflicting label) if the two
    sequences are not traversals of one tree.
    """
    inorder = list(inorder)
    postorder = list(postorder)
    _check_permutations(inorder, postorder)
    n = len(inorder)
    if n == 0:
        return BinaryTree(nodes=(), root=None)

    labels = list(inorder)
    idx = {lab: i for i, lab in enumerate(labels)}
    in_pos = np.arange(n)
    post_pos = np.empty(n, dtype=np.int64)
    for p, lab in enumerate(postorder):
        post_pos[idx[lab]] = p

    in_lt = in_pos[:, None] < in_pos[None, :]
    post_lt = post_pos[:, None] < post_pos[None, :]
    p1 = in_lt & post_lt
    p2 = ~in_lt & post_lt

    has1 = p1.any(axis=1)
    has2 = p2.any(axis=1)
    pl = np.where(p1, in_pos[None, :], n).argmin(axis=1)
    pr = np.where(p2, in_pos[None, :], -1).argmax(axis=1)

    root = postorder[-1]
    left, right = {}, {}
    for x in range(n):
        if not has1[x] and not has2[x]:
            continue  # no successors at all: the root (or an inconsistency)
        if has1[x] and (not has2[x] or post_pos[pl[x]] < post_pos[pr[x]]):
            left[labels[pl[x]]] = labels[x]
        else:
            right[labels[pr[x]]] = labels[x]

    tree = BinaryTree(nodes=tuple(labels), root=root, left=left, right=right)
    _validate(tree, inorder, postorder)
    return tree


def _check_permutations(inorder, postorder):
    seen = set()
    for lab in inorder:
        if lab in seen:
            raise TraversalError(f"label {lab!r} repeats in inorder", label=lab)
        seen.add(lab)
    post = set()
    for lab in postorder:
        if lab in post:
            raise TraversalError(f"label {lab!r} repeats in postorder", label=lab)
        if lab not in seen:
            raise TraversalError(f"label {lab!r} only occurs in postorder", label=lab)
        post.add(lab)
    for lab in inorder:
        if lab not in post:
            raise TraversalError(f"label {lab!r} only occurs in inorder", label=lab)


def _validate(tree: BinaryTree, inorder, postorder):
    # Child maps built from an inconsistent pair can share children or form
    # cycles, so check reachability before trusting the traversal walkers.
    seen = set()
    frontier = [tree.root]
    while frontier:
        node = frontier.pop()
        if node in seen:
            raise TraversalError(f"inconsistent traversals at label {node!r}", label=node)
        seen.add(node)
        for child in (tree.left.get(node), tree.right.get(node)):
            if child is not None:
                frontier.append(child)
    if len(seen) != len(tree.nodes):
        missing = sorted(set(tree.nodes) - seen, key=repr)[0]
        raise TraversalError(f"inconsistent traversals, unreachable label {missing!r}",
                             label=missing)
    for got, want in ((tree.inorder(), inorder), (tree.postorder(), postorder)):
        for a, b in zip(got, want):
            if a != b:
                raise TraversalError(f"inconsistent traversals at label {b!r}", label=b)


def random_binary_tree(n: int, rng: np.random.Generator) -> BinaryTree:
    """Uniform-ish random binary tree grown by attaching to random free slots."""
    if n == 0:
        return BinaryTree(nodes=(), root=None)
    left, right = {}, {}
    slots = [(0, "left"), (0, "right")]
    for node in range(1, n):
        i = int(rng.integers(len(slots)))
        parent, side = slots.pop(i)
        (left if side == "left" else right)[parent] = node
        slots.append((node, "left"))
        slots.append((node, "right"))
    return BinaryTree(nodes=tuple(range(n)), root=0, left=left, right=right)
