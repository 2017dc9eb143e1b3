"""Embedding-driven structure refinement: similarity pruning and top-k insertion."""

from __future__ import annotations

import numpy as np

from .graph import SparseGraph


def _normalized_rows(h: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(h, axis=1, keepdims=True)
    safe = np.where(norms == 0.0, 1.0, norms)
    return h / safe


def embedding_similarity(h: np.ndarray, i: int, j: int) -> float:
    """Cosine of two embedding rows; 0 when either row is all zero."""
    ni, nj = np.linalg.norm(h[i]), np.linalg.norm(h[j])
    if ni == 0.0 or nj == 0.0:
        return 0.0
    return float(np.dot(h[i], h[j]) / (ni * nj))


def similarity_matrix(h: np.ndarray) -> np.ndarray:
    """Full pairwise cosine matrix (zero rows give zero similarity)."""
    hn = _normalized_rows(h)
    return hn @ hn.T


def prune_edges(g: SparseGraph, h: np.ndarray, t2: float) -> SparseGraph:
    """Keep an edge only when its embedding similarity strictly exceeds t2."""
    kept = [e for e in g.edges() if embedding_similarity(h, e[0], e[1]) > t2]
    return SparseGraph.from_edges(g.num_nodes, kept)


def topk_insert(retained: SparseGraph, h: np.ndarray, k: int) -> SparseGraph:
    """Directed union of the retained edges with each node's k most similar peers.

    Ties break toward the smaller candidate id. The result is directed: row i
    lists the aggregation sources of node i.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    n = retained.num_nodes
    edges: set[tuple[int, int]] = set()
    for u, v in retained.edges():
        edges.add((u, v))
        edges.add((v, u))
    if k > 0 and n > 1:
        sim = similarity_matrix(h)
        np.fill_diagonal(sim, -np.inf)
        kk = min(k, n - 1)
        # lexsort: primary key descending similarity, secondary ascending id.
        ids = np.arange(n)
        for i in range(n):
            order = np.lexsort((ids, -sim[i]))
            for j in order[:kk]:
                edges.add((i, int(j)))
    return SparseGraph.from_edges(n, sorted(edges), directed=True)


def removal_report(
    clean: SparseGraph,
    poisoned: SparseGraph,
    removed: set,
    labels: np.ndarray,
) -> dict:
    """Audit a removed-edge set against the attack ground truth.

    adversarial = removals that were attack additions; normal = removals of
    clean edges; accuracy = adversarial / total.
    """
    removed = set(removed)
    extra = removed - poisoned.edge_set()
    if extra:
        raise ValueError(f"removed edges not present in the poisoned graph: {sorted(extra)[:5]}")
    clean_edges = clean.edge_set()
    adversarial = {e for e in removed if e not in clean_edges}
    normal = removed & clean_edges
    heterophilic = {e for e in normal if labels[e[0]] != labels[e[1]]}
    total = len(removed)
    return {
        "total": total,
        "adversarial": len(adversarial),
        "normal": len(normal),
        "normal_heterophilic": len(heterophilic),
        "accuracy": (len(adversarial) / total) if total else 0.0,
    }
