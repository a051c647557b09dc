"""Directed structures over token indices and their bipartite order encoding.

A structure is a directed graph over tokens 1..n; an arc (x, y) reads
"y is the head of x".  Splitting every token into a red copy (arc source)
and a blue copy (arc target) turns any digraph, cycles and self-loops
included, into a strict partial order: the only relations are red -> blue,
so nothing composes and transitivity never manufactures extra edges.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional


class ContractViolation(ValueError):
    """An argument breaks a documented precondition."""


@dataclass(frozen=True)
class Structure:
    """Directed graph over tokens 1..n, optionally with one label per arc."""

    n: int
    arcs: frozenset = field(default_factory=frozenset)
    labels: Optional[Mapping[tuple, int]] = None

    def __post_init__(self):
        if self.n < 0:
            raise ContractViolation(f"token count must be >= 0, got {self.n}")
        object.__setattr__(self, "arcs", frozenset(self.arcs))
        for x, y in self.arcs:
            if not (1 <= x <= self.n and 1 <= y <= self.n):
                raise ContractViolation(f"arc ({x}, {y}) outside 1..{self.n}")
        if self.labels is not None:
            extra = set(self.labels) - self.arcs
            if extra:
                raise ContractViolation(f"labels for non-arcs: {sorted(extra)}")


@dataclass(frozen=True)
class TokenSplitStructure:
    """Bipartite edge set between red copies (sources) and blue copies (targets).

    An edge (x, y) means "red copy of token x precedes blue copy of token y".
    """

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 0:
            raise ContractViolation(f"token count must be >= 0, got {self.n}")
        object.__setattr__(self, "edges", frozenset(self.edges))
        for x, y in self.edges:
            if not (1 <= x <= self.n and 1 <= y <= self.n):
                raise ContractViolation(f"edge ({x}, {y}) outside 1..{self.n}")

    def as_relation(self):
        """The edge set as a relation over 2n vertices (red x -> x, blue y -> n+y)."""
        return 2 * self.n, {(x, self.n + y) for x, y in self.edges}


def token_split(s: Structure) -> TokenSplitStructure:
    """Split each token into a red and a blue copy; arcs become red->blue edges."""
    return TokenSplitStructure(n=s.n, edges=frozenset(s.arcs))


def recover_structure(t: TokenSplitStructure) -> Structure:
    """Inverse of token_split: each red->blue edge becomes an arc again.

    Labels do not survive the split, so the recovered structure is untyped.
    """
    return Structure(n=t.n, arcs=frozenset(t.edges))


@dataclass(frozen=True)
class OrderAxiomReport:
    irreflexive: bool
    asymmetric: bool
    transitive: bool

    @property
    def all_hold(self) -> bool:
        return self.irreflexive and self.asymmetric and self.transitive


def check_order_axioms(n: int, rel: Iterable[tuple]) -> OrderAxiomReport:
    """Check irreflexivity, asymmetry and transitivity of a relation on 1..n.

    Naive (worst-case cubic) checking; this is a test oracle, not a
    production path.
    """
    pairs = set(rel)
    for x, y in pairs:
        if not (1 <= x <= n and 1 <= y <= n):
            raise ContractViolation(f"pair ({x}, {y}) outside 1..{n}")
    irreflexive = all(x != y for x, y in pairs)
    asymmetric = all((y, x) not in pairs for x, y in pairs if x != y)
    succ = {}
    for x, y in pairs:
        succ.setdefault(x, set()).add(y)
    transitive = True
    for x, y in pairs:
        for z in succ.get(y, ()):
            if (x, z) not in pairs:
                transitive = False
                break
        if not transitive:
            break
    return OrderAxiomReport(irreflexive, asymmetric, transitive)


def structure_to_text(s: Structure) -> str:
    """Line format: header ``n=<int>``, then one ``x<TAB>y[<TAB>label]`` per arc."""
    lines = [f"n={s.n}"]
    for x, y in sorted(s.arcs):
        if s.labels is not None and (x, y) in s.labels:
            lines.append(f"{x}\t{y}\t{s.labels[(x, y)]}")
        else:
            lines.append(f"{x}\t{y}")
    return "\n".join(lines) + "\n"


def structure_from_text(text: str) -> Structure:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("n="):
        raise ContractViolation("missing 'n=<int>' header line")
    n = int(lines[0][2:])
    arcs = set()
    labels = {}
    for ln in lines[1:]:
        parts = ln.split("\t")
        if len(parts) not in (2, 3):
            raise ContractViolation(f"bad arc line: {ln!r}")
        x, y = int(parts[0]), int(parts[1])
        arcs.add((x, y))
        if len(parts) == 3:
            labels[(x, y)] = int(parts[2])
    return Structure(n=n, arcs=frozenset(arcs), labels=labels or None)
