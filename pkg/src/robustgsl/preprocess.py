"""Feature-similarity pre-processing and recovery-based view generation."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Edge, SparseGraph, canonical_edge
from .linalg import make_rng

METRICS = ("jaccard", "cosine")


def feature_similarity(x_i: np.ndarray, x_j: np.ndarray, metric: str) -> float:
    """Jaccard on binarized support (value > 0) or cosine on raw values."""
    if x_i.shape != x_j.shape:
        raise ValueError(f"feature dimension mismatch: {x_i.shape} vs {x_j.shape}")
    if metric == "jaccard":
        a, b = x_i > 0, x_j > 0
        union = np.count_nonzero(a | b)
        if union == 0:
            return 0.0
        return float(np.count_nonzero(a & b) / union)
    if metric == "cosine":
        ni, nj = np.linalg.norm(x_i), np.linalg.norm(x_j)
        if ni == 0.0 or nj == 0.0:
            return 0.0
        return float(np.dot(x_i, x_j) / (ni * nj))
    raise ValueError(f"unknown metric {metric!r}, expected one of {METRICS}")


def edge_scores(g: SparseGraph, features: np.ndarray, metric: str) -> dict[Edge, float]:
    """Similarity score for every stored (undirected) edge."""
    return {e: feature_similarity(features[e[0]], features[e[1]], metric) for e in g.edges()}


def rough_preprocess(
    g: SparseGraph, features: np.ndarray, metric: str, t1: float
) -> tuple[SparseGraph, set, dict[Edge, float]]:
    """Drop every edge scoring strictly below t1.

    Returns (pruned graph, removed edge set, per-edge scores). Kept and
    removed edges partition the input edge set.
    """
    scores = edge_scores(g, features, metric)
    kept = [e for e, s in scores.items() if s >= t1]
    removed = {e for e, s in scores.items() if s < t1}
    return SparseGraph.from_edges(g.num_nodes, kept), removed, scores


@dataclass
class ViewBundle:
    """Pre-processed base graph plus M augmentation views.

    Each view's edges are the base edges plus a recovered subset of the
    removed set (or random perturbations in the featureless/ablation modes).
    """

    base: SparseGraph
    removed: set = field(default_factory=set)
    views: list = field(default_factory=list)
    seed: int = 0


def make_views(base: SparseGraph, removed: set, p: float, m: int, seed: int) -> ViewBundle:
    """M views, each independently recovering every removed edge with probability p."""
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"recovery probability must be in [0, 1], got {p}")
    if m < 1:
        raise ValueError("need at least one view")
    rng = make_rng(seed)
    ordered = sorted(removed)
    views = []
    for _ in range(m):
        mask = rng.random(len(ordered)) < p
        recovered = [e for e, keep in zip(ordered, mask) if keep]
        views.append(SparseGraph.from_edges(base.num_nodes, base.edges() + recovered))
    return ViewBundle(base=base, removed=set(removed), views=views, seed=seed)


def identical_views(base: SparseGraph, m: int, seed: int = 0) -> ViewBundle:
    """M copies of the base graph (no-augmentation ablation)."""
    if m < 1:
        raise ValueError("need at least one view")
    return ViewBundle(base=base, removed=set(), views=[base] * m, seed=seed)


def random_perturb_views(base: SparseGraph, ratio: float, m: int, seed: int) -> ViewBundle:
    """M views, each removing and adding round(ratio * |E| / 2) random edges."""
    if not (0.0 <= ratio <= 1.0):
        raise ValueError(f"perturb ratio must be in [0, 1], got {ratio}")
    if m < 1:
        raise ValueError("need at least one view")
    rng = make_rng(seed)
    edges = base.edges()
    n = base.num_nodes
    count = int(round(ratio * len(edges) / 2))
    max_edges = n * (n - 1) // 2
    if count > len(edges) or len(edges) + count > max_edges:
        raise ValueError(
            f"cannot remove and add {count} edges on a graph with {len(edges)} edges"
        )
    views = []
    for _ in range(m):
        drop_idx = set(rng.choice(len(edges), size=count, replace=False).tolist()) if count else set()
        kept = [e for i, e in enumerate(edges) if i not in drop_idx]
        present = set(edges)
        new_edges: set = set()
        while len(new_edges) < count:
            u = int(rng.integers(n))
            v = int(rng.integers(n))
            if u == v:
                continue
            e = canonical_edge(u, v)
            if e in present or e in new_edges:
                continue
            new_edges.add(e)
        views.append(SparseGraph.from_edges(n, kept + sorted(new_edges)))
    return ViewBundle(base=base, removed=set(), views=views, seed=seed)
