"""Training data assembly and model scoring for claim check-worthiness.

Two regressors are trained once on pre-intervention data: f1 maps
propagation features to the crowd-labeled check-worthiness mean, f2 maps
them to realized engagement per tweet. Final claim priority is the
product f1 * f2.

Label simulation: a labeler flags a claim as check-worthy when they can
tell it is epistemically problematic. For misinformation the flag
probability is the labeler's knowledge (one minus their belief toward the
topic); for anti-misinformation it is their belief (misinformed users
find the truth suspect); noise gets flagged at a small constant rate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .boosting import BoostingParams, GradientBoostedRegressor, fit
from .engine import SimLog
from .features import FeatureSchema, tabulate_features
from .graph import CentralityMap, Graph
from .world import ANTI, MISINFO, NOISE, Claim, WorldState

__all__ = [
    "CLAIM_VIRALITY",
    "CLAIM_STRATIFIED",
    "CLAIM_STRATEGIES",
    "LABEL_RANDOM",
    "LABEL_STRATIFIED",
    "LABEL_KNOWLEDGEABLE",
    "LABEL_STRATEGIES",
    "NOISE_FLAG_PROB",
    "TrainingSet",
    "claim_engagement",
    "community_engagement",
    "sample_claims_virality",
    "sample_claims_stratified",
    "simulate_label",
    "select_labelers",
    "aggregate_labels",
    "engagement_target",
    "build_training_set",
]

logger = logging.getLogger(__name__)

CLAIM_VIRALITY = "virality"
CLAIM_STRATIFIED = "stratified_virality"
CLAIM_STRATEGIES = (CLAIM_VIRALITY, CLAIM_STRATIFIED)

LABEL_RANDOM = "random"
LABEL_STRATIFIED = "stratified"
LABEL_KNOWLEDGEABLE = "knowledgeable"
LABEL_STRATEGIES = (LABEL_RANDOM, LABEL_STRATIFIED, LABEL_KNOWLEDGEABLE)

NOISE_FLAG_PROB = 0.05


@dataclass
class TrainingSet:
    """Sampled claims with features, aggregated labels, and targets."""

    claim_ids: list[int]
    X: np.ndarray
    y: np.ndarray  # check-worthiness labels in [0, 1]
    s: np.ndarray  # engagement per tweet, >= 0
    provenance: dict = field(default_factory=dict)


def claim_engagement(log: SimLog, num_claims: int, t_limit: int | None = None) -> np.ndarray:
    """Total engagement per claim: tweets + retweets + reads."""
    counts = np.zeros(num_claims, dtype=np.int64)
    for i, cid in enumerate(log.utt_claim):
        if t_limit is not None and log.utt_t[i] >= t_limit:
            break
        counts[cid] += 1
    utt_claim = log.utt_claim
    for i, uid in enumerate(log.read_utt):
        if t_limit is not None and log.read_t[i] >= t_limit:
            break
        counts[utt_claim[uid]] += 1
    return counts


def community_engagement(log: SimLog, g: Graph, num_claims: int, t_limit: int | None = None) -> np.ndarray:
    """Tweets plus retweets per (community, claim), attributed to the author.

    Production-side only: what a community's members post reflects the
    topics that matter locally, where their reading is dominated by
    whatever the rest of the network pushes at them.
    """
    counts = np.zeros((g.num_communities, num_claims), dtype=np.int64)
    community = g.community
    for i, cid in enumerate(log.utt_claim):
        if t_limit is not None and log.utt_t[i] >= t_limit:
            break
        counts[community[log.utt_author[i]], cid] += 1
    return counts


def _rank(engagement: np.ndarray) -> list[int]:
    """Claim ids by engagement descending, ties to the lower id."""
    order = np.lexsort((np.arange(len(engagement)), -engagement))
    return [int(c) for c in order if engagement[c] > 0]


def sample_claims_virality(log: SimLog, n: int, num_claims: int, t_limit: int | None = None) -> list[int]:
    """The n claims with the largest network-wide engagement."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ranked = _rank(claim_engagement(log, num_claims, t_limit))
    if len(ranked) < n:
        logger.warning("only %d active claims available, requested %d", len(ranked), n)
    return sorted(ranked[:n])


def sample_claims_stratified(
    log: SimLog, n: int, g: Graph, num_claims: int, t_limit: int | None = None
) -> list[int]:
    """Top floor(n/C) claims per community by local posting volume, deduplicated.

    Communities are ranked by what their members tweet and retweet; any
    shortfall after deduplication is backfilled from the network-wide
    engagement ranking.
    """
    num_comms = g.num_communities
    if n < num_comms:
        raise ValueError(f"n must be >= number of communities ({num_comms})")
    per_comm = community_engagement(log, g, num_claims, t_limit)
    quota = n // num_comms
    selected: list[int] = []
    seen = set()
    for c in range(num_comms):
        for cid in _rank(per_comm[c])[:quota]:
            if cid not in seen:
                seen.add(cid)
                selected.append(cid)
    global_ranked = _rank(claim_engagement(log, num_claims, t_limit))
    for cid in global_ranked:
        if len(selected) >= n:
            break
        if cid not in seen:
            seen.add(cid)
            selected.append(cid)
    if len(selected) < n:
        logger.warning("only %d active claims available, requested %d", len(selected), n)
    return sorted(selected)


def simulate_label(labeler: int, claim: Claim, w: WorldState, rng: np.random.Generator) -> int:
    """One labeler's binary check-worthiness opinion about a claim."""
    belief = float(w.belief[labeler, claim.topic])
    if claim.veracity == MISINFO:
        p = 1.0 - belief
    elif claim.veracity == ANTI:
        p = belief
    else:
        p = NOISE_FLAG_PROB
    return 1 if rng.random() < p else 0


def select_labelers(
    topic: int, strategy: str, m: int, w: WorldState, rng: np.random.Generator
) -> np.ndarray:
    """Pick labeler node ids according to the label-sampling strategy."""
    g = w.graph
    if strategy == LABEL_RANDOM:
        return _draw(np.arange(g.num_nodes), m, rng)
    if strategy == LABEL_STRATIFIED:
        num_comms = g.num_communities
        if m < num_comms:
            raise ValueError(f"stratified labeling needs m >= {num_comms}")
        quota = m // num_comms
        picks = [_draw(g.community_members(c), quota, rng) for c in range(num_comms)]
        return np.concatenate(picks)
    if strategy == LABEL_KNOWLEDGEABLE:
        means = w.community_belief_means()[:, topic]
        best = int(np.argmin(means))  # ties resolve to the lowest community id
        return _draw(g.community_members(best), m, rng)
    raise ValueError(f"unknown label strategy {strategy!r}")


def _draw(pool: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    if count <= len(pool):
        return rng.choice(pool, size=count, replace=False)
    logger.warning("pool of %d smaller than %d labelers, sampling with replacement", len(pool), count)
    return rng.choice(pool, size=count, replace=True)


def aggregate_labels(
    claim: Claim,
    strategy: str,
    m: int,
    w: WorldState,
    rng: np.random.Generator,
) -> tuple[float, list[int]]:
    """Mean of m simulated labeler opinions; returns (label, labeler ids)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    labelers = select_labelers(claim.topic, strategy, m, w, rng)
    votes = [simulate_label(int(j), claim, w, rng) for j in labelers]
    return sum(votes) / len(votes), [int(j) for j in labelers]


def engagement_target(log: SimLog, claim_id: int, t_limit: int | None = None) -> float:
    """Reads plus retweets of the claim, per tweet of the claim."""
    roots = 0
    retweets = 0
    for i, cid in enumerate(log.utt_claim):
        if t_limit is not None and log.utt_t[i] >= t_limit:
            break
        if cid == claim_id:
            if log.utt_parent[i] < 0:
                roots += 1
            else:
                retweets += 1
    reads = 0
    for i, uid in enumerate(log.read_utt):
        if t_limit is not None and log.read_t[i] >= t_limit:
            break
        if log.utt_claim[uid] == claim_id:
            reads += 1
    if roots == 0:
        raise ValueError(f"claim {claim_id} has no tweets")
    return (reads + retweets) / roots


def build_training_set(
    w: WorldState,
    centrality: CentralityMap,
    claim_strategy: str,
    label_strategy: str,
    n: int,
    m: int,
    seed: int,
    schema: FeatureSchema | None = None,
    boosting: BoostingParams | None = None,
) -> tuple[TrainingSet, GradientBoostedRegressor, GradientBoostedRegressor]:
    """Sample claims, label them, and fit the (f1, f2) regressor pair.

    Runs at the intervention start time on the world's log so far; label
    randomness uses a per-claim substream derived from (seed, claim id),
    making the result independent of labeling order.
    """
    schema = schema or FeatureSchema()
    log = w.log
    t_now = w.clock
    if claim_strategy == CLAIM_VIRALITY:
        claim_ids = sample_claims_virality(log, n, len(w.claims), t_limit=t_now)
    elif claim_strategy == CLAIM_STRATIFIED:
        claim_ids = sample_claims_stratified(log, n, w.graph, len(w.claims), t_limit=t_now)
    else:
        raise ValueError(f"unknown claim strategy {claim_strategy!r}")
    if not claim_ids:
        raise ValueError("no active claims to train on")

    table = tabulate_features(log, w.graph, centrality, t_now, schema.snapshots, schema.depths)
    row_of = {cid: i for i, cid in enumerate(table.claim_ids)}
    rows = [row_of[cid] for cid in claim_ids]
    X = table.X[rows]

    # engagement per claim, computed in bulk
    roots = np.zeros(len(w.claims))
    retweets = np.zeros(len(w.claims))
    reads = np.zeros(len(w.claims))
    for i, cid in enumerate(log.utt_claim):
        if log.utt_t[i] >= t_now:
            break
        if log.utt_parent[i] < 0:
            roots[cid] += 1
        else:
            retweets[cid] += 1
    for i, uid in enumerate(log.read_utt):
        if log.read_t[i] >= t_now:
            break
        reads[log.utt_claim[uid]] += 1

    y = np.zeros(len(claim_ids))
    s = np.zeros(len(claim_ids))
    labeler_ids: dict[int, list[int]] = {}
    for i, cid in enumerate(claim_ids):
        rng = np.random.default_rng(np.random.SeedSequence([seed, cid]))
        y[i], labeler_ids[cid] = aggregate_labels(w.claims[cid], label_strategy, m, w, rng)
        s[i] = (reads[cid] + retweets[cid]) / roots[cid]

    training = TrainingSet(
        claim_ids=list(claim_ids),
        X=X,
        y=y,
        s=s,
        provenance={
            "claim_strategy": claim_strategy,
            "label_strategy": label_strategy,
            "n": n,
            "m": m,
            "seed": seed,
            "tabulated_at": t_now,
            "labeler_ids": labeler_ids,
        },
    )
    f1 = fit(X, y, boosting, seed)
    f2 = fit(X, s, boosting, seed)
    return training, f1, f2


def write_training_set_csv(training: TrainingSet, path) -> None:
    import csv as _csv

    with open(path, "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["claim_id", "y", "s", "claim_strategy", "label_strategy", "m_labelers"])
        prov = training.provenance
        for cid, y, s in zip(training.claim_ids, training.y, training.s):
            writer.writerow(
                [cid, repr(float(y)), repr(float(s)),
                 prov.get("claim_strategy", ""), prov.get("label_strategy", ""),
                 len(prov.get("labeler_ids", {}).get(cid, []))]
            )


def write_model_dump(f1: GradientBoostedRegressor, f2: GradientBoostedRegressor, path) -> None:
    """Audit dump of both fitted ensembles as versioned JSON tree arrays."""
    import json as _json

    payload = {"format_version": 1, "checkworthiness": f1.to_arrays(), "engagement": f2.to_arrays()}
    with open(path, "w") as fh:
        _json.dump(payload, fh)
        fh.write("\n")
