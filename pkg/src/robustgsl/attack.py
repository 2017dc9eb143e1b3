"""Structural poisoning baselines (random noise, DICE) and perturbation audits."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .graph import Edge, SparseGraph, canonical_edge
from .linalg import make_rng


@dataclass
class AttackBudget:
    """Fraction of clean edges to change; the change count is round(rate * |E|)."""

    rate: float
    seed: int

    def num_changes(self, num_edges: int) -> int:
        if not (0.0 <= self.rate <= 1.0):
            raise ValueError(f"perturbation rate must be in [0, 1], got {self.rate}")
        return int(round(self.rate * num_edges))


@dataclass
class PerturbationRecord:
    added: set = field(default_factory=set)
    removed: set = field(default_factory=set)
    complete: bool = True

    @property
    def num_changes(self) -> int:
        return len(self.added) + len(self.removed)

    def to_dict(self) -> dict:
        return {
            "added": sorted(list(e) for e in self.added),
            "removed": sorted(list(e) for e in self.removed),
            "complete": self.complete,
        }


def apply_perturbation(g: SparseGraph, record: PerturbationRecord) -> SparseGraph:
    edges = g.edge_set()
    edges -= record.removed
    edges |= record.added
    return SparseGraph.from_edges(g.num_nodes, sorted(edges))


def _sample_nonedge(rng: np.random.Generator, n: int, forbidden: set, labels=None) -> Edge | None:
    """Uniform rejection sampling of an absent unordered pair.

    With labels given, only inter-class pairs qualify. Returns None once the
    eligible pool is provably empty (checked by enumeration after repeated
    rejection failures).
    """
    for _ in range(50 * n):
        u = int(rng.integers(n))
        v = int(rng.integers(n))
        if u == v:
            continue
        e = canonical_edge(u, v)
        if e in forbidden:
            continue
        if labels is not None and labels[u] == labels[v]:
            continue
        return e
    # Slow path: enumerate to distinguish "unlucky" from "exhausted".
    pool = [
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if (i, j) not in forbidden and (labels is None or labels[i] != labels[j])
    ]
    if not pool:
        return None
    return pool[int(rng.integers(len(pool)))]


def random_attack(
    g: SparseGraph, budget: AttackBudget, add_fraction: float = 0.5
) -> tuple[SparseGraph, PerturbationRecord]:
    """Each budgeted change is an addition with probability add_fraction,
    else a uniform deletion; falls back to the other move when a pool runs out."""
    rng = make_rng(budget.seed)
    clean = g.edge_set()
    target = budget.num_changes(len(clean))
    record = PerturbationRecord()
    n = g.num_nodes
    deletable = sorted(clean)
    present = set(clean)
    while record.num_changes < target:
        want_add = rng.random() < add_fraction
        forbidden = present | record.added | record.removed
        added = None
        if want_add:
            added = _sample_nonedge(rng, n, forbidden)
        if added is None and deletable:
            idx = int(rng.integers(len(deletable)))
            e = deletable.pop(idx)
            record.removed.add(e)
            present.discard(e)
            continue
        if added is None and not want_add:
            added = _sample_nonedge(rng, n, forbidden)
        if added is None:
            raise ValueError(
                f"budget of {target} changes is infeasible: both edge pools exhausted "
                f"after {record.num_changes} changes"
            )
        record.added.add(added)
        present.add(added)
    return apply_perturbation(g, record), record


def dice_attack(
    g: SparseGraph,
    labels: np.ndarray,
    budget: AttackBudget,
    add_fraction: float = 0.5,
) -> tuple[SparseGraph, PerturbationRecord]:
    """Disconnect internally, connect externally: deletions target intra-class
    edges, additions target inter-class non-edges. Needs full labels."""
    if np.any(labels < 0):
        raise ValueError("dice attack requires a label for every node")
    rng = make_rng(budget.seed)
    clean = g.edge_set()
    target = budget.num_changes(len(clean))
    record = PerturbationRecord()
    n = g.num_nodes
    intra = sorted(e for e in clean if labels[e[0]] == labels[e[1]])
    present = set(clean)
    while record.num_changes < target:
        want_add = rng.random() < add_fraction
        moved = False
        order = ("add", "del") if want_add else ("del", "add")
        for move in order:
            if move == "add":
                e = _sample_nonedge(rng, n, present | record.added, labels=labels)
                if e is not None:
                    record.added.add(e)
                    present.add(e)
                    moved = True
                    break
            else:
                if intra:
                    idx = int(rng.integers(len(intra)))
                    e = intra.pop(idx)
                    record.removed.add(e)
                    present.discard(e)
                    moved = True
                    break
        if not moved:
            record.complete = False
            warnings.warn(
                f"dice pools exhausted after {record.num_changes} of {target} changes;"
                " returning a partial perturbation",
                stacklevel=2,
            )
            break
    return apply_perturbation(g, record), record


def perturbation_diff(clean: SparseGraph, poisoned: SparseGraph) -> PerturbationRecord:
    """Exact edge-set difference between a clean and a poisoned graph."""
    if clean.num_nodes != poisoned.num_nodes:
        raise ValueError(
            f"node-count mismatch: clean has {clean.num_nodes}, poisoned has {poisoned.num_nodes}"
        )
    a, b = clean.edge_set(), poisoned.edge_set()
    return PerturbationRecord(added=b - a, removed=a - b)
