"""Directed follower graphs with community structure.

Nodes are dense integer ids 0..J-1. An edge (a, b) means that a follows b,
so anything posted by b lands in a's inbox. Graphs are immutable once
built and safe to share across concurrent simulation runs.
"""

from __future__ import annotations

import csv
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "Graph",
    "CentralityMap",
    "load_graph",
    "generate_synthetic_graph",
    "sample_subgraph",
    "compute_prestige",
    "approx_betweenness",
]


@dataclass(eq=False)
class Graph:
    """Directed follower graph with one community label per node.

    out_edges[j] lists the nodes j follows; in_edges[j] lists j's
    followers. The two adjacencies are transposes of each other and each
    array is sorted ascending with no duplicates or self-loops.
    """

    out_edges: tuple[np.ndarray, ...]
    in_edges: tuple[np.ndarray, ...]
    community: np.ndarray
    original_ids: np.ndarray | None = None  # pre-remap node ids, for traceability

    @property
    def num_nodes(self) -> int:
        return len(self.community)

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.num_nodes)

    @property
    def num_edges(self) -> int:
        return int(sum(len(a) for a in self.out_edges))

    @property
    def num_communities(self) -> int:
        return int(self.community.max()) + 1 if self.num_nodes else 0

    def in_degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.in_edges], dtype=np.int64)

    def out_degrees(self) -> np.ndarray:
        return np.array([len(a) for a in self.out_edges], dtype=np.int64)

    def community_sizes(self) -> np.ndarray:
        return np.bincount(self.community, minlength=self.num_communities)

    def community_members(self, c: int) -> np.ndarray:
        return np.nonzero(self.community == c)[0]

    def validate(self) -> None:
        """Check structural invariants; raises ValueError on violation."""
        j = self.num_nodes
        if len(self.out_edges) != j or len(self.in_edges) != j:
            raise ValueError("adjacency length does not match node count")
        for a, adj in ((0, self.out_edges), (1, self.in_edges)):
            for node, nbrs in enumerate(adj):
                if len(nbrs) == 0:
                    continue
                if nbrs.min() < 0 or nbrs.max() >= j:
                    raise ValueError(f"edge endpoint out of range at node {node}")
                if np.any(nbrs == node):
                    raise ValueError(f"self-loop at node {node}")
                if np.any(np.diff(nbrs) <= 0):
                    raise ValueError(f"unsorted or duplicate edges at node {node}")
        # transpose consistency
        rebuilt = [[] for _ in range(j)]
        for src, dsts in enumerate(self.out_edges):
            for d in dsts.tolist():
                rebuilt[d].append(src)
        for node in range(j):
            if rebuilt[node] != self.in_edges[node].tolist():
                raise ValueError(f"in/out adjacency mismatch at node {node}")
        if self.num_nodes and set(np.unique(self.community)) != set(range(self.num_communities)):
            raise ValueError("community ids are not dense")


@dataclass
class CentralityMap:
    """Betweenness values per node from pivot-sampled accumulation."""

    betweenness: np.ndarray
    pivot_count: int
    exact: bool


def _build_adjacency(src: np.ndarray, dst: np.ndarray, num_nodes: int) -> tuple[tuple, tuple]:
    """Build (out_edges, in_edges) tuples of sorted arrays from edge arrays."""
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)

    def grouped(keys, vals):
        order = np.lexsort((vals, keys))
        k, v = keys[order], vals[order]
        bounds = np.searchsorted(k, np.arange(num_nodes + 1))
        return tuple(v[bounds[i] : bounds[i + 1]] for i in range(num_nodes))

    return grouped(src, dst), grouped(dst, src)


def _dedup_edges(src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Drop self-loops and duplicate (src, dst) pairs."""
    keep = src != dst
    src, dst = src[keep], dst[keep]
    if len(src) == 0:
        return src, dst
    pairs = np.unique(np.stack([src, dst], axis=1), axis=0)
    return pairs[:, 0], pairs[:, 1]


def load_graph(
    edge_list_path: str | Path,
    community_path: str | Path,
    remap_path: str | Path | None = None,
) -> Graph:
    """Load a follower graph from two CSV files.

    The edge list has rows ``follower_id,followed_id`` and the community
    file has rows ``node_id,community_id``; a non-numeric first row in
    either file is treated as a header. Node and community ids are
    remapped to dense ranges; if remap_path is given, the mapping is
    written there as CSV rows ``kind,original,dense``.

    Every node appearing in an edge must have a community entry. Nodes
    listed only in the community file become isolated nodes.
    """
    comm_of: dict[int, int] = {}
    for lineno, row in _iter_csv_rows(community_path):
        if len(row) != 2:
            raise ValueError(f"{community_path}:{lineno}: expected 2 columns, got {len(row)}")
        node, comm = _parse_int(community_path, lineno, row[0]), _parse_int(community_path, lineno, row[1])
        if node in comm_of and comm_of[node] != comm:
            raise ValueError(f"{community_path}:{lineno}: node {node} has conflicting communities")
        comm_of[node] = comm

    raw_src, raw_dst = [], []
    for lineno, row in _iter_csv_rows(edge_list_path):
        if len(row) != 2:
            raise ValueError(f"{edge_list_path}:{lineno}: expected 2 columns, got {len(row)}")
        a = _parse_int(edge_list_path, lineno, row[0])
        b = _parse_int(edge_list_path, lineno, row[1])
        for node in (a, b):
            if node not in comm_of:
                raise ValueError(f"node {node} missing community (seen at {edge_list_path}:{lineno})")
        raw_src.append(a)
        raw_dst.append(b)

    original_nodes = sorted(comm_of)
    node_map = {orig: dense for dense, orig in enumerate(original_nodes)}
    original_comms = sorted(set(comm_of.values()))
    comm_map = {orig: dense for dense, orig in enumerate(original_comms)}

    src = np.array([node_map[a] for a in raw_src], dtype=np.int64)
    dst = np.array([node_map[b] for b in raw_dst], dtype=np.int64)
    src, dst = _dedup_edges(src, dst)
    out_edges, in_edges = _build_adjacency(src, dst, len(original_nodes))
    community = np.array([comm_map[comm_of[orig]] for orig in original_nodes], dtype=np.int64)

    if remap_path is not None:
        with open(remap_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["kind", "original", "dense"])
            for orig in original_nodes:
                writer.writerow(["node", orig, node_map[orig]])
            for orig in original_comms:
                writer.writerow(["community", orig, comm_map[orig]])

    return Graph(out_edges, in_edges, community, original_ids=np.array(original_nodes, dtype=np.int64))


def _iter_csv_rows(path: str | Path):
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if lineno == 1 and not row[0].strip().lstrip("-").isdigit():
                continue  # header
            yield lineno, [cell.strip() for cell in row]


def _parse_int(path, lineno: int, cell: str) -> int:
    try:
        return int(cell)
    except ValueError:
        raise ValueError(f"{path}:{lineno}: malformed integer {cell!r}") from None


def generate_synthetic_graph(
    community_sizes: list[int],
    p_in: float,
    p_out: float,
    seed: int,
) -> Graph:
    """Directed stochastic-block-model follower graph.

    Each ordered pair (a, b), a != b, gets an edge with probability p_in
    when a and b share a community and p_out otherwise. Deterministic for
    a fixed seed.
    """
    if not community_sizes:
        raise ValueError("community_sizes must be non-empty")
    if any(s < 1 for s in community_sizes):
        raise ValueError("community sizes must be positive")
    if not (0.0 <= p_out <= p_in <= 1.0):
        raise ValueError(f"need 0 <= p_out <= p_in <= 1, got p_in={p_in}, p_out={p_out}")

    sizes = np.asarray(community_sizes, dtype=np.int64)
    num_nodes = int(sizes.sum())
    starts = np.concatenate([[0], np.cumsum(sizes)])
    community = np.repeat(np.arange(len(sizes)), sizes)
    rng = np.random.default_rng(seed)

    src_parts, dst_parts = [], []
    for ci in range(len(sizes)):
        for cj in range(len(sizes)):
            p = p_in if ci == cj else p_out
            if p <= 0.0:
                continue
            ni, nj = int(sizes[ci]), int(sizes[cj])
            row_base, col_base = int(starts[ci]), int(starts[cj])
            chunk = max(1, (1 << 22) // nj)  # cap draws per chunk at ~4M
            for r0 in range(0, ni, chunk):
                h = min(chunk, ni - r0)
                block = rng.random((h, nj)) < p
                if ci == cj:
                    rows = np.arange(h)
                    block[rows, r0 + rows] = False  # no self-loops
                rr, cc = np.nonzero(block)
                src_parts.append(rr + (row_base + r0))
                dst_parts.append(cc + col_base)

    if src_parts:
        src = np.concatenate(src_parts)
        dst = np.concatenate(dst_parts)
    else:
        src = dst = np.empty(0, dtype=np.int64)
    out_edges, in_edges = _build_adjacency(src, dst, num_nodes)
    return Graph(out_edges, in_edges, community)


def sample_subgraph(g: Graph, fraction: float, seed: int) -> Graph:
    """Node-induced subgraph on a community-stratified random sample.

    The sample has ceil(fraction * J) nodes total, allocated to
    communities by largest-remainder so each community keeps within one
    node of fraction times its size. Ids are re-densified in ascending
    order of the original ids.
    """
    if not (0.0 < fraction <= 1.0):
        raise ValueError(f"fraction must be in (0, 1], got {fraction}")
    num_nodes = g.num_nodes
    num_comms = g.num_communities
    sizes = g.community_sizes()
    target = math.ceil(fraction * num_nodes)
    quotas = fraction * sizes
    counts = np.floor(quotas).astype(np.int64)
    remainder = target - int(counts.sum())
    if remainder > 0:
        # communities ranked by fractional remainder, ties to lower id
        order = sorted(range(num_comms), key=lambda c: (-(quotas[c] - counts[c]), c))
        i = 0
        while remainder > 0:
            c = order[i % num_comms]
            if counts[c] < sizes[c]:
                counts[c] += 1
                remainder -= 1
            i += 1

    empties = np.nonzero(counts == 0)[0]
    if len(empties):
        raise ValueError(
            f"sample fraction {fraction} leaves community {int(empties[0])} empty"
        )

    rng = np.random.default_rng(seed)
    picked = []
    for c in range(num_comms):
        members = g.community_members(c)
        picked.append(np.sort(rng.choice(members, size=int(counts[c]), replace=False)))
    selected = np.sort(np.concatenate(picked))

    new_id = np.full(num_nodes, -1, dtype=np.int64)
    new_id[selected] = np.arange(len(selected))
    out_edges = []
    for old in selected.tolist():
        mapped = new_id[g.out_edges[old]]
        out_edges.append(mapped[mapped >= 0])
    src = np.concatenate([np.full(len(a), i) for i, a in enumerate(out_edges)]) if out_edges else np.empty(0, int)
    dst = np.concatenate(out_edges) if out_edges else np.empty(0, int)
    out_adj, in_adj = _build_adjacency(src, dst, len(selected))
    original = selected if g.original_ids is None else g.original_ids[selected]
    return Graph(out_adj, in_adj, g.community[selected].copy(), original_ids=original)


def compute_prestige(g: Graph) -> np.ndarray:
    """Per-node prestige: follower count normalized by the network maximum.

    The most-followed node gets exactly 1.0; if nobody has followers all
    prestige is 0.
    """
    if g.num_nodes == 0:
        raise ValueError("empty graph")
    indeg = g.in_degrees().astype(np.float64)
    top = indeg.max()
    if top == 0:
        return np.zeros(g.num_nodes)
    return indeg / top


def approx_betweenness(g: Graph, pivots: int, seed: int) -> CentralityMap:
    """Pivot-sampled betweenness centrality on the directed graph.

    Runs single-source shortest-path accumulation from `pivots` randomly
    chosen sources and scales the totals by J / pivots. With
    pivots == J every source is used and the result is exact.
    Unreachable pairs contribute nothing.
    """
    num_nodes = g.num_nodes
    if not (1 <= pivots <= num_nodes):
        raise ValueError(f"pivots must be in [1, {num_nodes}], got {pivots}")
    if pivots == num_nodes:
        sources = range(num_nodes)
    else:
        rng = np.random.default_rng(seed)
        sources = np.sort(rng.choice(num_nodes, size=pivots, replace=False)).tolist()

    adj = [a.tolist() for a in g.out_edges]
    bc = np.zeros(num_nodes)
    for s in sources:
        _brandes_accumulate(adj, s, bc)
    bc *= num_nodes / pivots
    return CentralityMap(betweenness=bc, pivot_count=pivots, exact=pivots == num_nodes)


def _brandes_accumulate(adj: list[list[int]], source: int, bc: np.ndarray) -> None:
    # single-source BFS phase of Brandes' algorithm, unweighted
    n = len(adj)
    dist = [-1] * n
    sigma = [0] * n
    preds: list[list[int]] = [[] for _ in range(n)]
    dist[source] = 0
    sigma[source] = 1
    stack: list[int] = []
    queue = deque([source])
    while queue:
        v = queue.popleft()
        stack.append(v)
        dv = dist[v]
        sv = sigma[v]
        for w in adj[v]:
            if dist[w] < 0:
                dist[w] = dv + 1
                queue.append(w)
            if dist[w] == dv + 1:
                sigma[w] += sv
                preds[w].append(v)
    delta = [0.0] * n
    while stack:
        w = stack.pop()
        coeff = (1.0 + delta[w]) / sigma[w]
        for v in preds[w]:
            delta[v] += sigma[v] * coeff
        if w != source:
            bc[w] += delta[w]
