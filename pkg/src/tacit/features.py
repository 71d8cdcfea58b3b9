"""Per-claim propagation features for the check-worthiness models.

Each claim with at least one tweet gets one row: aggregates over the
authors who tweeted it, plus spread statistics evaluated at fixed
offsets from each cascade's own creation time (reads within s steps of
the cascade root, the maximum depth reached within s steps, and read
counts bucketed by the reader's distance from the origin).

Deliberately excludes belief and impactedness: rows are computed from
the event log, the graph, and centrality only, mirroring what a real
platform could observe.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import CentralityMap, Graph
from .engine import SimLog

__all__ = [
    "DEFAULT_SNAPSHOTS",
    "DEFAULT_DEPTHS",
    "FeatureSchema",
    "FeatureTable",
    "tabulate_features",
    "FeatureTracker",
]

DEFAULT_SNAPSHOTS = (1, 2, 5, 10)
DEFAULT_DEPTHS = (1, 2, 3, 4, 5)

_ORIGIN_COLUMNS = (
    "origin_avg_degree",
    "origin_max_degree",
    "origin_avg_centrality",
    "origin_max_centrality",
)


@dataclass(frozen=True)
class FeatureSchema:
    """Fixed column order shared by every producer and consumer of X."""

    snapshots: tuple[int, ...] = DEFAULT_SNAPSHOTS
    depths: tuple[int, ...] = DEFAULT_DEPTHS

    @property
    def columns(self) -> list[str]:
        cols = list(_ORIGIN_COLUMNS)
        for s in self.snapshots:
            cols += [
                f"s{s}_nodes_visited",
                f"s{s}_avg_visit_degree",
                f"s{s}_max_visit_degree",
                f"s{s}_avg_visit_centrality",
                f"s{s}_max_visit_centrality",
                f"s{s}_max_depth",
                f"s{s}_present",
            ]
        for s in self.snapshots:
            for d in self.depths:
                cols.append(f"s{s}_d{d}_nodes_visited")
        return cols

    def to_json(self, path: str | Path) -> None:
        payload = {
            "snapshots": list(self.snapshots),
            "depths": list(self.depths),
            "columns": self.columns,
        }
        Path(path).write_text(json.dumps(payload, indent=2) + "\n")


@dataclass
class FeatureTable:
    """Model-ready matrix: one row per claim, columns per FeatureSchema."""

    claim_ids: list[int]
    tabulated_at: int
    X: np.ndarray
    schema: FeatureSchema

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["claim_id", "tabulated_at"] + self.schema.columns)
            for i, cid in enumerate(self.claim_ids):
                writer.writerow([cid, self.tabulated_at] + [repr(float(v)) for v in self.X[i]])


def tabulate_features(
    log: SimLog,
    g: Graph,
    centrality: CentralityMap,
    t_now: int,
    snapshots: tuple[int, ...] = DEFAULT_SNAPSHOTS,
    depths: tuple[int, ...] = DEFAULT_DEPTHS,
) -> FeatureTable:
    """Pure tabulation over all events strictly before t_now.

    Claims already fact-checked before t_now are excluded; claims with no
    tweet yet yield no row. This is the reference implementation; the
    incremental FeatureTracker must agree with it exactly.
    """
    if list(snapshots) != sorted(snapshots):
        raise ValueError("snapshots must be sorted ascending")
    tracker = FeatureTracker(
        num_claims=_max_claim(log) + 1,
        graph=g,
        centrality=centrality,
        schema=FeatureSchema(tuple(snapshots), tuple(depths)),
    )
    tracker.ingest(log, t_limit=t_now)
    return tracker.emit(log, t_now)


def _max_claim(log: SimLog) -> int:
    return max(log.utt_claim) if log.utt_claim else -1


class FeatureTracker:
    """Incremental per-claim aggregates over an append-only SimLog.

    Because every read's age relative to its cascade root is fixed at the
    moment it happens, all snapshot-windowed statistics are pure
    accumulations: each event is folded into every window at least as old
    as the event's age, once, at ingest time.
    """

    def __init__(self, num_claims: int, graph: Graph, centrality: CentralityMap, schema: FeatureSchema):
        self.schema = schema
        self.num_claims = max(num_claims, 0)
        self._indeg = graph.in_degrees().astype(np.float64)
        self._cent = np.asarray(centrality.betweenness, dtype=np.float64)
        k = self.num_claims
        ns = len(schema.snapshots)
        nd = len(schema.depths)
        self._snapshots = np.asarray(schema.snapshots)
        self._depth_values = list(schema.depths)
        self.roots = np.zeros(k)
        self.first_root_t = np.full(k, math.inf)
        self.origin_deg_sum = np.zeros(k)
        self.origin_deg_max = np.zeros(k)
        self.origin_cent_sum = np.zeros(k)
        self.origin_cent_max = np.zeros(k)
        self.read_count = np.zeros((k, ns))
        self.rdeg_sum = np.zeros((k, ns))
        self.rdeg_max = np.zeros((k, ns))
        self.rcent_sum = np.zeros((k, ns))
        self.rcent_max = np.zeros((k, ns))
        self.max_depth = np.zeros((k, ns))
        self.depth_reads = np.zeros((k, ns, nd))
        self._root_time: list[int] = []
        self._utt_seen = 0
        self._read_seen = 0

    def ingest(self, log: SimLog, t_limit: int | None = None) -> None:
        """Fold events not yet seen (and strictly before t_limit) in."""
        self._ingest_utterances(log, t_limit)
        self._ingest_reads(log, t_limit)

    def _ingest_utterances(self, log: SimLog, t_limit: int | None) -> None:
        hi = log.num_utterances
        if t_limit is not None:
            while hi > self._utt_seen and log.utt_t[hi - 1] >= t_limit:
                hi -= 1
        lo = self._utt_seen
        if hi <= lo:
            return
        # cascade root creation times; parents always precede children
        root_time = self._root_time
        utt_t, utt_parent = log.utt_t, log.utt_parent
        for uid in range(lo, hi):
            parent = utt_parent[uid]
            root_time.append(utt_t[uid] if parent < 0 else root_time[parent])

        claims = np.asarray(log.utt_claim[lo:hi])
        authors = np.asarray(log.utt_author[lo:hi])
        times = np.asarray(utt_t[lo:hi])
        parents = np.asarray(utt_parent[lo:hi])
        depths_arr = np.asarray(log.utt_depth[lo:hi], dtype=np.float64)
        rt = np.asarray(root_time[lo:hi])

        is_root = parents < 0
        if is_root.any():
            rc = claims[is_root]
            deg = self._indeg[authors[is_root]]
            cent = self._cent[authors[is_root]]
            self.roots += np.bincount(rc, minlength=self.num_claims)
            self.origin_deg_sum += np.bincount(rc, weights=deg, minlength=self.num_claims)
            self.origin_cent_sum += np.bincount(rc, weights=cent, minlength=self.num_claims)
            np.maximum.at(self.origin_deg_max, rc, deg)
            np.maximum.at(self.origin_cent_max, rc, cent)
            np.minimum.at(self.first_root_t, rc, times[is_root])

        age = times - rt
        for si, s in enumerate(self._snapshots):
            m = age <= s
            if m.any():
                np.maximum.at(self.max_depth[:, si], claims[m], depths_arr[m])
        self._utt_seen = hi

    def _ingest_reads(self, log: SimLog, t_limit: int | None) -> None:
        hi = log.num_reads
        if t_limit is not None:
            while hi > self._read_seen and log.read_t[hi - 1] >= t_limit:
                hi -= 1
        lo = self._read_seen
        if hi <= lo:
            return
        utts = np.asarray(log.read_utt[lo:hi])
        nodes = np.asarray(log.read_node[lo:hi])
        times = np.asarray(log.read_t[lo:hi])
        claim_arr = np.asarray(log.utt_claim)
        depth_arr = np.asarray(log.utt_depth)
        rt = np.asarray(self._root_time)

        claims = claim_arr[utts]
        age = times - rt[utts]
        reader_depth = depth_arr[utts] + 1  # reader is one hop past the author
        deg = self._indeg[nodes]
        cent = self._cent[nodes]
        k = self.num_claims
        for si, s in enumerate(self._snapshots):
            m = age <= s
            if not m.any():
                continue
            c = claims[m]
            self.read_count[:, si] += np.bincount(c, minlength=k)
            self.rdeg_sum[:, si] += np.bincount(c, weights=deg[m], minlength=k)
            self.rcent_sum[:, si] += np.bincount(c, weights=cent[m], minlength=k)
            np.maximum.at(self.rdeg_max[:, si], c, deg[m])
            np.maximum.at(self.rcent_max[:, si], c, cent[m])
            for di, d in enumerate(self._depth_values):
                md = m & (reader_depth == d)
                if md.any():
                    self.depth_reads[:, si, di] += np.bincount(claims[md], minlength=k)
        self._read_seen = hi

    def emit(self, log: SimLog, t_now: int, exclude: set[int] | None = None) -> FeatureTable:
        """Rows for every tweeted claim not fact-checked before t_now."""
        checked = log.checked_before(t_now)
        if exclude:
            checked = checked | exclude
        keep = [cid for cid in range(self.num_claims) if self.roots[cid] > 0 and cid not in checked]
        schema = self.schema
        ns = len(schema.snapshots)
        nd = len(schema.depths)
        X = np.zeros((len(keep), len(schema.columns)))
        for i, cid in enumerate(keep):
            roots = self.roots[cid]
            row = [
                self.origin_deg_sum[cid] / roots,
                self.origin_deg_max[cid],
                self.origin_cent_sum[cid] / roots,
                self.origin_cent_max[cid],
            ]
            for si in range(ns):
                count = self.read_count[cid, si]
                row += [
                    count / roots,
                    self.rdeg_sum[cid, si] / count if count > 0 else 0.0,
                    self.rdeg_max[cid, si],
                    self.rcent_sum[cid, si] / count if count > 0 else 0.0,
                    self.rcent_max[cid, si],
                    self.max_depth[cid, si],
                    1.0 if (t_now - self.first_root_t[cid]) >= schema.snapshots[si] else 0.0,
                ]
            for si in range(ns):
                for di in range(nd):
                    row.append(self.depth_reads[cid, si, di] / roots)
            X[i] = row
        return FeatureTable(claim_ids=keep, tabulated_at=t_now, X=X, schema=schema)
