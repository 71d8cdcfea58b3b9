"""Discrete-time simulation engine.

Each step iterates nodes in ascending id order. An awake node may tweet
(bots always do, normal nodes pass a prestige gate), reads a bounded
random subset of its inbox, updating belief per read and possibly
retweeting, and then its inbox is cleared whether or not it was awake.

A run owns exactly one RNG stream; with a fixed seed the whole event log
is reproducible, and snapshots serialize the stream so restored runs
continue identically until something consumes randomness differently.
"""

from __future__ import annotations

import csv
import pickle
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .world import ANTI, MISINFO, NOISE, WorldState

__all__ = [
    "Utterance",
    "SimLog",
    "select_tweet",
    "update_belief",
    "retweet_probability",
    "step",
    "run",
    "snapshot",
    "restore",
    "write_simlog_csv",
    "write_belief_checkpoints_csv",
    "write_claims_csv",
]

SNAPSHOT_MAGIC = b"TACITSNAP"
SNAPSHOT_VERSION = 1


@dataclass
class Utterance:
    """One tweet or retweet of a claim; roots start cascades."""

    id: int
    claim_id: int
    author: int
    created_at: int
    root: bool
    parent_utterance: Optional[int]
    depth: int


class SimLog:
    """Append-only event log for one run, stored columnar for speed.

    Utterance ids are indices into the parallel utterance lists; a parent
    of -1 marks a root. Belief checkpoints hold full (J, topics) belief
    copies keyed by time step. Misinformation-read counters accumulate
    one (communities, topics) matrix per step.
    """

    def __init__(self, num_communities: int, num_topics: int):
        self.num_communities = num_communities
        self.num_topics = num_topics
        self.utt_claim: list[int] = []
        self.utt_author: list[int] = []
        self.utt_t: list[int] = []
        self.utt_parent: list[int] = []
        self.utt_depth: list[int] = []
        self.read_node: list[int] = []
        self.read_utt: list[int] = []
        self.read_t: list[int] = []
        self.fact_checks: list[tuple[int, int, bool]] = []  # (claim, t, blocked)
        self.belief_checkpoints: dict[int, np.ndarray] = {}
        self.misinfo_by_step: list[np.ndarray] = []

    @property
    def num_utterances(self) -> int:
        return len(self.utt_claim)

    @property
    def num_reads(self) -> int:
        return len(self.read_node)

    def append_utterance(self, claim_id: int, author: int, t: int, parent: int, depth: int) -> int:
        uid = len(self.utt_claim)
        self.utt_claim.append(claim_id)
        self.utt_author.append(author)
        self.utt_t.append(t)
        self.utt_parent.append(parent)
        self.utt_depth.append(depth)
        return uid

    def utterance(self, uid: int) -> Utterance:
        parent = self.utt_parent[uid]
        return Utterance(
            id=uid,
            claim_id=self.utt_claim[uid],
            author=self.utt_author[uid],
            created_at=self.utt_t[uid],
            root=parent < 0,
            parent_utterance=None if parent < 0 else parent,
            depth=self.utt_depth[uid],
        )

    def utterances(self):
        for uid in range(self.num_utterances):
            yield self.utterance(uid)

    def checked_before(self, t: int) -> set[int]:
        return {cid for cid, ct, _ in self.fact_checks if ct < t}

    def record_checkpoint(self, t: int, belief: np.ndarray) -> None:
        if t not in self.belief_checkpoints:
            self.belief_checkpoints[t] = belief.copy()


def update_belief(w: WorldState, node: int, topic: int, veracity: int) -> float:
    """Apply one read's belief update and bump the per-topic read count.

    The shift is learning_rate * veracity * (1 + impactedness) / (n + 1)
    where n is how many utterances about the topic the node has already
    read; the result is clamped to [0, 1]. Noise reads leave belief
    untouched but still count toward n.
    """
    n = w.num_read[node, topic]
    if veracity != 0:
        b = w.belief[node, topic] + (
            w.scenario.belief_learning_rate * veracity * (1.0 + w.impactedness[node, topic]) / (n + 1.0)
        )
        w.belief[node, topic] = 0.0 if b < 0.0 else (1.0 if b > 1.0 else b)
    w.num_read[node, topic] = n + 1
    return float(w.belief[node, topic])


def retweet_probability(w: WorldState, node: int, utt_id: int) -> float:
    """Probability that `node` retweets the given utterance.

    Proportional to the author's normalized follower count, the claim's
    virality, and a veracity-dependent belief factor; scaled by the
    scenario's retweet_scale and capped at 1.
    """
    cid = w.log.utt_claim[utt_id]
    veracity = w._claim_veracity[cid]
    author = w.log.utt_author[utt_id]
    belief = w.belief[node, w._claim_topic[cid]]
    if veracity == ANTI:
        factor = 1.0 - belief
    elif veracity == NOISE:
        factor = 0.5
    else:
        factor = belief
    p = w.scenario.retweet_scale * float(w.prestige[author]) * w._claim_virality[cid] * factor
    return p if p < 1.0 else 1.0


def select_tweet(w: WorldState, node: int) -> Optional[int]:
    """Create a tweet for a node that passed the tweet gate.

    Topic is drawn proportionally to the node's impactedness, veracity
    from the belief-driven mix (bots always produce misinformation), and
    the claim via the virality softmax of its (topic, veracity) class.
    Returns the new utterance id, or None when every claim of the chosen
    class is blocked (the node stays silent this step).
    """
    rng = w.rng
    num_topics = w.num_topics
    imp = w.impactedness[node]
    total = float(imp.sum())
    u = rng.random()
    if total <= 0.0:
        topic = min(int(u * num_topics), num_topics - 1)
    else:
        acc = 0.0
        topic = num_topics - 1
        for t in range(num_topics):
            acc += float(imp[t]) / total
            if u < acc:
                topic = t
                break

    if w.is_bot[node]:
        veracity = MISINFO
    else:
        gamma = w.scenario.noise_tweet_share
        belief = float(w.belief[node, topic])
        v = rng.random()
        if v < gamma * belief:
            veracity = MISINFO
        elif v < gamma:
            veracity = ANTI
        else:
            veracity = NOISE

    active, cum = w.selection_table(topic, veracity)
    if not active:
        return None
    k = int(np.searchsorted(cum, rng.random(), side="right"))
    claim_id = active[min(k, len(active) - 1)]

    uid = w.log.append_utterance(claim_id, node, w.clock, parent=-1, depth=0)
    inboxes = w.inboxes
    for f in w._followers[node]:
        inboxes[f].append(uid)
    return uid


def _emit_retweet(w: WorldState, node: int, parent_uid: int, t: int) -> int:
    uid = w.log.append_utterance(
        w.log.utt_claim[parent_uid],
        node,
        t,
        parent=parent_uid,
        depth=w.log.utt_depth[parent_uid] + 1,
    )
    inboxes = w.inboxes
    for f in w._followers[node]:
        inboxes[f].append(uid)
    return uid


def step(w: WorldState) -> None:
    """Advance the world by one time step (ascending node id order)."""
    t = w.clock
    rng = w.rng
    cfg = w.scenario
    log = w.log
    cap = cfg.inbox_read_cap
    wake_prob = cfg.wake_prob
    lr = cfg.belief_learning_rate
    scale = cfg.retweet_scale
    belief = w.belief
    impact = w.impactedness
    num_read = w.num_read
    prestige = w.prestige
    blocked = w._blocked
    utt_claim = log.utt_claim
    utt_author = log.utt_author
    claim_topic = w._claim_topic
    claim_ver = w._claim_veracity
    claim_fv = w._claim_virality
    node_comm = w._node_comm
    step_misinfo = np.zeros((log.num_communities, log.num_topics), dtype=np.int64)

    for j in range(w.num_nodes):
        awake = rng.random() < wake_prob
        w.wake[j] = awake
        inbox = w.inboxes[j]
        if awake:
            if w.is_bot[j] or rng.random() < prestige[j]:
                select_tweet(w, j)
            if inbox:
                # blocked claims are invisible at read time
                visible = [u for u in inbox if not blocked[utt_claim[u]]]
                n_vis = len(visible)
                if n_vis:
                    k = cap if cap < n_vis else n_vis
                    picks = rng.choice(n_vis, size=k, replace=False)
                    for idx in picks:
                        u = visible[int(idx)]
                        cid = utt_claim[u]
                        topic = claim_topic[cid]
                        veracity = claim_ver[cid]
                        log.read_node.append(j)
                        log.read_utt.append(u)
                        log.read_t.append(t)
                        if veracity == 1:
                            step_misinfo[node_comm[j], topic] += 1
                        n = num_read[j, topic]
                        if veracity != 0:
                            b = belief[j, topic] + lr * veracity * (1.0 + impact[j, topic]) / (n + 1.0)
                            belief[j, topic] = 0.0 if b < 0.0 else (1.0 if b > 1.0 else b)
                        num_read[j, topic] = n + 1
                        # retweet trial uses the just-updated belief
                        bb = belief[j, topic]
                        if veracity == -1:
                            factor = 1.0 - bb
                        elif veracity == 0:
                            factor = 0.5
                        else:
                            factor = bb
                        p = scale * prestige[utt_author[u]] * claim_fv[cid] * factor
                        if p > 0.0 and rng.random() < (p if p < 1.0 else 1.0):
                            _emit_retweet(w, j, u, t)
        if inbox:
            w.inboxes[j] = []
    log.misinfo_by_step.append(step_misinfo)
    w.clock = t + 1


def run(
    w: WorldState,
    t_end: int,
    intervention: Optional[Callable[[WorldState], None]] = None,
) -> SimLog:
    """Run the engine until the clock reaches t_end.

    The optional intervention hook fires once per step, before the
    step's node loop, so anything it blocks produces no events at or
    after the step it fires on. Belief checkpoints are recorded at the
    start and end clock values. Calling with t_end equal to the current
    clock is a no-op.
    """
    if t_end < w.clock:
        raise ValueError(f"t_end {t_end} is before current clock {w.clock}")
    if t_end == w.clock:
        return w.log
    w.log.record_checkpoint(w.clock, w.belief)
    while w.clock < t_end:
        if intervention is not None:
            intervention(w)
        step(w)
    w.log.record_checkpoint(w.clock, w.belief)
    return w.log


def snapshot(w: WorldState) -> bytes:
    """Serialize the full world (including RNG state and log prefix)."""
    payload = pickle.dumps(w, protocol=5)
    return SNAPSHOT_MAGIC + bytes([SNAPSHOT_VERSION]) + payload


def restore(raw: bytes) -> WorldState:
    """Rebuild an independent WorldState from snapshot bytes."""
    if not raw.startswith(SNAPSHOT_MAGIC):
        raise ValueError("not a snapshot payload")
    version = raw[len(SNAPSHOT_MAGIC)]
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"snapshot version {version} not supported (expected {SNAPSHOT_VERSION})")
    return pickle.loads(raw[len(SNAPSHOT_MAGIC) + 1 :])


# -- CSV export -----------------------------------------------------------


def _fmt(x) -> str:
    return repr(float(x))


def write_simlog_csv(log: SimLog, out_dir: str | Path) -> None:
    """Write utterances.csv and reads.csv into out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "utterances.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "claim", "author", "t", "parent", "depth"])
        for uid in range(log.num_utterances):
            parent = log.utt_parent[uid]
            writer.writerow(
                [uid, log.utt_claim[uid], log.utt_author[uid], log.utt_t[uid],
                 "" if parent < 0 else parent, log.utt_depth[uid]]
            )
    with open(out_dir / "reads.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "utterance", "t"])
        for i in range(log.num_reads):
            writer.writerow([log.read_node[i], log.read_utt[i], log.read_t[i]])


def write_belief_checkpoints_csv(log: SimLog, path: str | Path) -> None:
    """Write belief checkpoints with full round-trip float precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "node", "topic", "belief"])
        for t in sorted(log.belief_checkpoints):
            mat = log.belief_checkpoints[t]
            for node in range(mat.shape[0]):
                for topic in range(mat.shape[1]):
                    writer.writerow([t, node, topic, _fmt(mat[node, topic])])


def write_claims_csv(claims, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "topic", "veracity", "virality", "fact_checked_at", "blocked"])
        for c in claims:
            writer.writerow(
                [c.id, c.topic, c.veracity, _fmt(c.virality),
                 "" if c.fact_checked_at is None else c.fact_checked_at, int(c.blocked)]
            )
