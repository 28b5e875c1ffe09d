"""Mixed graphs with directed and bidirected edges.

Vertices are the integers ``0..p-1``. Directed edges are ordered pairs
``(u, v)`` meaning ``u -> v``; bidirected edges are stored as sorted pairs
``(min, max)`` so that membership is symmetric by construction.
"""

from __future__ import annotations

import enum
import itertools
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class GraphError(ValueError):
    pass


class CycleError(GraphError):
    pass


class RelationKind(enum.Enum):
    """Relation of the first vertex of a pair to the second."""

    PARENT_OF = "->"
    CHILD_OF = "<-"
    SIBLING = "<->"
    NO_EDGE = "none"


def _pair(u: int, v: int) -> tuple[int, int]:
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class MixedGraph:
    p: int
    directed: frozenset = field(default_factory=frozenset)
    bidirected: frozenset = field(default_factory=frozenset)

    def __init__(self, p: int, directed: Iterable = (), bidirected: Iterable = ()):
        if p < 1:
            raise GraphError(f"vertex count must be positive, got {p}")
        d = frozenset((int(u), int(v)) for u, v in directed)
        b = frozenset(_pair(int(u), int(v)) for u, v in bidirected)
        for u, v in itertools.chain(d, b):
            if not (0 <= u < p and 0 <= v < p):
                raise GraphError(f"edge ({u}, {v}) out of range for p={p}")
        object.__setattr__(self, "p", int(p))
        object.__setattr__(self, "directed", d)
        object.__setattr__(self, "bidirected", b)

    def __repr__(self):
        d = sorted(self.directed)
        b = sorted(self.bidirected)
        return f"MixedGraph(p={self.p}, directed={d}, bidirected={b})"

    # -- adjacency ---------------------------------------------------------
    def parents(self, v: int) -> set[int]:
        return {u for u, w in self.directed if w == v}

    def children(self, v: int) -> set[int]:
        return {w for u, w in self.directed if u == v}

    def siblings(self, v: int) -> set[int]:
        out = set()
        for a, b in self.bidirected:
            if a == v:
                out.add(b)
            elif b == v:
                out.add(a)
        return out

    def adjacency(self) -> np.ndarray:
        """Boolean matrix ``A`` with ``A[v, u]`` true iff ``u -> v``."""
        A = np.zeros((self.p, self.p), dtype=bool)
        for u, v in self.directed:
            A[v, u] = True
        return A

    def ancestor_matrix(self) -> np.ndarray:
        """``R[v, u]`` true iff ``u`` is a strict ancestor of ``v``."""
        return transitive_closure(self.adjacency())

    def ancestors(self, v: int) -> set[int]:
        return set(np.flatnonzero(self.ancestor_matrix()[v]).tolist())

    def descendants(self, v: int) -> set[int]:
        return set(np.flatnonzero(self.ancestor_matrix()[:, v]).tolist())

    def relation(self, u: int, v: int) -> RelationKind:
        if (u, v) in self.directed:
            return RelationKind.PARENT_OF
        if (v, u) in self.directed:
            return RelationKind.CHILD_OF
        if _pair(u, v) in self.bidirected:
            return RelationKind.SIBLING
        return RelationKind.NO_EDGE

    def is_ancestral(self) -> bool:
        R = self.ancestor_matrix()
        return not any(R[a, b] or R[b, a] for a, b in self.bidirected)

    # -- serialization -----------------------------------------------------
    def to_dict(self, one_indexed: bool = False) -> dict:
        k = 1 if one_indexed else 0
        return {
            "p": self.p,
            "directed": [[u + k, v + k] for u, v in sorted(self.directed)],
            "bidirected": [[u + k, v + k] for u, v in sorted(self.bidirected)],
            "one_indexed": bool(one_indexed),
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "MixedGraph":
        k = 1 if obj.get("one_indexed", False) else 0
        return cls(
            obj["p"],
            [(u - k, v - k) for u, v in obj.get("directed", [])],
            [(u - k, v - k) for u, v in obj.get("bidirected", [])],
        )

    def to_json(self, one_indexed: bool = False, **kwargs) -> str:
        return json.dumps(self.to_dict(one_indexed), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "MixedGraph":
        return cls.from_dict(json.loads(text))

    def to_dot(self, one_indexed: bool = False, name: str = "G") -> str:
        k = 1 if one_indexed else 0
        lines = [f"digraph {name} {{"]
        for v in range(self.p):
            lines.append(f"  {v + k};")
        for u, v in sorted(self.directed):
            lines.append(f"  {u + k} -> {v + k} [color=blue];")
        for u, v in sorted(self.bidirected):
            lines.append(f"  {u + k} -> {v + k} [dir=both, color=red];")
        lines.append("}")
        return "\n".join(lines) + "\n"


def transitive_closure(adj: np.ndarray) -> np.ndarray:
    """Strict reachability for a boolean ``adj[v, u] = (u -> v)`` matrix."""
    R = np.asarray(adj, dtype=bool).copy()
    p = R.shape[0]
    # Warshall: u reaches v through k
    for k in range(p):
        R |= np.outer(R[:, k], R[k, :])
    return R


def from_edges(p: int, directed=(), bidirected=(), one_indexed: bool = False) -> MixedGraph:
    """Build a graph from edge lists, optionally given with 1-based labels."""
    k = 1 if one_indexed else 0
    return MixedGraph(
        p,
        [(u - k, v - k) for u, v in directed],
        [(u - k, v - k) for u, v in bidirected],
    )


def _find_cycle(p: int, directed: Iterable) -> list[int] | None:
    succ = {v: [] for v in range(p)}
    for u, v in directed:
        succ[u].append(v)
    color = [0] * p
    stack_path: list[int] = []

    def visit(u):
        color[u] = 1
        stack_path.append(u)
        for w in sorted(succ[u]):
            if color[w] == 1:
                return stack_path[stack_path.index(w):] + [w]
            if color[w] == 0:
                found = visit(w)
                if found:
                    return found
        stack_path.pop()
        color[u] = 2
        return None

    for s in range(p):
        if color[s] == 0:
            cyc = visit(s)
            if cyc:
                return cyc
    return None


def validate(graph: MixedGraph) -> list[str]:
    """Return a list of violations; empty iff ``graph`` is a BAP."""
    problems = []
    for u, v in sorted(graph.directed):
        if u == v:
            problems.append(f"self-loop {u} -> {v}")
    for u, v in sorted(graph.bidirected):
        if u == v:
            problems.append(f"self-loop {u} <-> {v}")
    loops = {(u, v) for u, v in graph.directed if u != v}
    cyc = _find_cycle(graph.p, loops)
    if cyc is not None:
        problems.append("cycle " + " -> ".join(map(str, cyc)))
    for a, b in sorted(graph.bidirected):
        if a != b and ((a, b) in graph.directed or (b, a) in graph.directed):
            problems.append(f"bow on pair {{{a}, {b}}}")
    return problems


def relations(graph: MixedGraph, v: int) -> dict[str, set[int]]:
    if not 0 <= v < graph.p:
        raise GraphError(f"vertex {v} out of range for p={graph.p}")
    R = graph.ancestor_matrix()
    an = set(np.flatnonzero(R[v]).tolist())
    return {
        "parents": graph.parents(v),
        "children": graph.children(v),
        "ancestors": an,
        "descendants": set(np.flatnonzero(R[:, v]).tolist()),
        "siblings": graph.siblings(v),
        "An": an | {v},
    }


def topological_order_from_adjacency(adj: np.ndarray) -> list[int]:
    """Kahn's algorithm on ``adj[v, u] = (u -> v)``, smallest index first."""
    adj = np.asarray(adj, dtype=bool)
    p = adj.shape[0]
    indeg = adj.sum(axis=1).astype(int)
    ready = sorted(np.flatnonzero(indeg == 0).tolist())
    order = []
    while ready:
        u = ready.pop(0)
        order.append(u)
        for w in np.flatnonzero(adj[:, u]):
            indeg[w] -= 1
            if indeg[w] == 0:
                ready.append(int(w))
        ready.sort()
    if len(order) != p:
        raise CycleError("directed part contains a cycle")
    return order


def topological_order(graph: MixedGraph) -> list[int]:
    if any(u == v for u, v in graph.directed):
        raise CycleError("self-loop")
    return topological_order_from_adjacency(graph.adjacency())


def random_bap(p: int, d: int, b: int, ancestral: bool = False,
               rng: np.random.Generator | None = None) -> MixedGraph:
    """Draw a random BAP with ``d`` directed and at most ``b`` bidirected edges.

    Directed edges are sampled uniformly from pairs ``i < j``. Bidirected edges
    are sampled uniformly from pairs with no ancestral relation (``ancestral``)
    or with no parental relation, taking all candidates if fewer than ``b``.
    """
    rng = np.random.default_rng() if rng is None else rng
    pairs = list(itertools.combinations(range(p), 2))
    if d > len(pairs):
        raise GraphError(f"cannot place {d} directed edges on {p} vertices")
    idx = rng.choice(len(pairs), size=d, replace=False) if d else []
    directed = [pairs[i] for i in idx]
    g = MixedGraph(p, directed)
    if ancestral:
        R = g.ancestor_matrix()
        cands = [(i, j) for i, j in pairs if not R[j, i] and not R[i, j]]
    else:
        cands = [(i, j) for i, j in pairs if (i, j) not in g.directed and (j, i) not in g.directed]
    k = min(b, len(cands))
    chosen = rng.choice(len(cands), size=k, replace=False) if k else []
    return MixedGraph(p, directed, [cands[i] for i in chosen])


def relabel(graph: MixedGraph, perm: Sequence[int]) -> MixedGraph:
    """Map vertex ``i`` to ``perm[i]``."""
    perm = [int(x) for x in perm]
    if sorted(perm) != list(range(graph.p)):
        raise GraphError("permutation must be a bijection on 0..p-1")
    return MixedGraph(
        graph.p,
        [(perm[u], perm[v]) for u, v in graph.directed],
        [(perm[u], perm[v]) for u, v in graph.bidirected],
    )


@dataclass
class Score:
    pairwise_correct: int
    pairwise_total: int
    exact: bool
    confusion: Counter

    def as_dict(self) -> dict:
        return {
            "pairwise_correct": self.pairwise_correct,
            "pairwise_total": self.pairwise_total,
            "exact": self.exact,
            "confusion": {f"{t.value}|{e.value}": n for (t, e), n in sorted(
                self.confusion.items(), key=lambda kv: (kv[0][0].value, kv[0][1].value))},
        }


def score(estimate: MixedGraph, truth: MixedGraph) -> Score:
    """Compare relation kinds on every unordered pair.

    ``confusion`` counts ``(true kind, estimated kind)`` with each pair
    oriented low index first.
    """
    if estimate.p != truth.p:
        raise GraphError(f"vertex count mismatch: {estimate.p} vs {truth.p}")
    conf: Counter = Counter()
    correct = 0
    total = 0
    for u, v in itertools.combinations(range(truth.p), 2):
        t = truth.relation(u, v)
        e = estimate.relation(u, v)
        conf[(t, e)] += 1
        correct += t == e
        total += 1
    return Score(correct, total, correct == total, conf)
