"""Outcome metrics: belief-change scores, treatment effects, cascade stats.

The per-node outcome weights each topic's belief change from the
intervention start to the end of the run by how impacted the node is by
that topic; negative values mean the node ended up better informed.
Treatment effects compare a mitigation run against the baseline run that
shares its pre-period history node by node.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import SimLog
from .graph import Graph

__all__ = [
    "iwcib",
    "iwcib_all",
    "ate",
    "disparity_ratio",
    "CascadeStats",
    "cascade_stats",
    "utterances_per_claim",
    "ccdf",
    "misinfo_read_series",
]


def iwcib(belief_start: np.ndarray, belief_end: np.ndarray, impactedness: np.ndarray) -> float:
    """Impactedness-weighted change in belief for one node.

    Weights are the node's impactedness normalized to sum to one; the
    weighted sum of per-topic belief deltas is returned. All-zero
    impactedness leaves the weights undefined and raises.
    """
    impactedness = np.asarray(impactedness, dtype=np.float64)
    total = impactedness.sum()
    if total <= 0:
        raise ValueError("impactedness sums to zero; weights undefined")
    weights = impactedness / total
    delta = np.asarray(belief_end, dtype=np.float64) - np.asarray(belief_start, dtype=np.float64)
    return float(np.dot(weights, delta))


def iwcib_all(belief_start: np.ndarray, belief_end: np.ndarray, impactedness: np.ndarray) -> np.ndarray:
    """Vectorized per-node scores over (J, topics) arrays."""
    totals = impactedness.sum(axis=1)
    if np.any(totals <= 0):
        bad = int(np.nonzero(totals <= 0)[0][0])
        raise ValueError(f"impactedness sums to zero for node {bad}; weights undefined")
    weights = impactedness / totals[:, None]
    return np.sum(weights * (belief_end - belief_start), axis=1)


def ate(outcome_mitigated: dict[int, float], outcome_baseline: dict[int, float], members) -> float:
    """Mean per-node outcome difference (mitigated minus baseline)."""
    diffs = []
    for j in members:
        j = int(j)
        if j not in outcome_mitigated or j not in outcome_baseline:
            raise ValueError(f"node {j} missing from an outcome map")
        diffs.append(outcome_mitigated[j] - outcome_baseline[j])
    if not diffs:
        raise ValueError("no members to average over")
    return float(np.mean(diffs))


def disparity_ratio(majority_ate: float, minority_ate: float) -> float:
    """Majority ATE over minority ATE; 1 means both benefit equally."""
    if minority_ate == 0.0:
        return float("inf")
    return majority_ate / minority_ate


@dataclass
class CascadeStats:
    """Shape summary of one retweet tree."""

    root_utterance: int
    claim_id: int
    depth: int
    max_breadth: int
    size: int
    unique_readers: int
    structural_virality: float


def cascade_stats(log: SimLog) -> list[CascadeStats]:
    """Per-cascade depth, breadth, size, audience, and structural virality.

    Structural virality is the mean pairwise tree distance between the
    utterances of the cascade, with singletons defined as 0.
    """
    num_utts = log.num_utterances
    parents = log.utt_parent
    depths_arr = log.utt_depth

    root_of = [0] * num_utts
    members: dict[int, list[int]] = {}
    for uid in range(num_utts):
        parent = parents[uid]
        root = uid if parent < 0 else root_of[parent]
        root_of[uid] = root
        members.setdefault(root, []).append(uid)

    readers: dict[int, set[int]] = {}
    for i in range(log.num_reads):
        root = root_of[log.read_utt[i]]
        readers.setdefault(root, set()).add(log.read_node[i])

    out = []
    for root in sorted(members):
        tree = members[root]
        n = len(tree)
        d = [depths_arr[u] for u in tree]
        max_depth = max(d)
        breadth = int(np.bincount(d).max())
        out.append(
            CascadeStats(
                root_utterance=root,
                claim_id=log.utt_claim[root],
                depth=max_depth,
                max_breadth=breadth,
                size=n,
                unique_readers=len(readers.get(root, ())),
                structural_virality=_structural_virality(tree, parents),
            )
        )
    return out


def _structural_virality(tree: list[int], parents: list[int]) -> float:
    """Mean pairwise distance via per-edge pair-crossing counts."""
    n = len(tree)
    if n < 2:
        return 0.0
    subtree = {u: 1 for u in tree}
    # children appear after parents, so one reverse sweep accumulates sizes
    for u in reversed(tree):
        p = parents[u]
        if p >= 0:
            subtree[p] += subtree[u]
    crossing = 0
    for u in tree:
        if parents[u] >= 0:
            crossing += subtree[u] * (n - subtree[u])
    return crossing / (n * (n - 1) / 2)


def utterances_per_claim(log: SimLog, num_claims: int, t_limit: int | None = None) -> np.ndarray:
    """Tweets (cascade roots) per claim."""
    counts = np.zeros(num_claims, dtype=np.int64)
    for i, cid in enumerate(log.utt_claim):
        if t_limit is not None and log.utt_t[i] >= t_limit:
            break
        if log.utt_parent[i] < 0:
            counts[cid] += 1
    return counts


def ccdf(values) -> list[tuple[float, float]]:
    """P(X >= x) evaluated at the sorted unique values of the sample."""
    values = np.asarray(list(values), dtype=np.float64)
    if len(values) == 0:
        raise ValueError("ccdf of an empty sample")
    xs = np.unique(values)
    n = len(values)
    sorted_vals = np.sort(values)
    out = []
    for x in xs:
        at_least = n - np.searchsorted(sorted_vals, x, side="left")
        out.append((float(x), at_least / n))
    return out


def misinfo_read_series(log: SimLog, g: Graph) -> np.ndarray:
    """Cumulative misinformation reads per node, by (community, topic, t)."""
    num_steps = len(log.misinfo_by_step)
    shape = (log.num_communities, log.num_topics, num_steps)
    if num_steps == 0:
        return np.zeros(shape)
    stacked = np.stack(log.misinfo_by_step, axis=-1).astype(np.float64)
    series = np.cumsum(stacked, axis=-1)
    sizes = g.community_sizes().astype(np.float64)
    return series / sizes[:, None, None]
