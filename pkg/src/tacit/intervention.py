"""Per-step fact-checking intervention over a running simulation.

Each step, active claims are scored with the trained model pair, the top
claims under the configured workflow are sent to a perfect fact-checker,
and any that turn out to be misinformation are blocked immediately: no
node can post or read them from that step on. Checked claims of any
veracity leave the prediction set for good.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .boosting import GradientBoostedRegressor, score
from .engine import SimLog, restore, run
from .features import FeatureSchema, FeatureTracker
from .graph import CentralityMap
from .world import MISINFO, WorldState

__all__ = [
    "WORKFLOW_TOP",
    "WORKFLOW_BY_TOPIC",
    "WORKFLOW_NONE",
    "WORKFLOWS",
    "MitigationConfig",
    "FactCheckLedger",
    "TrainedModels",
    "select_for_checking",
    "fact_check",
    "run_mitigation",
]

WORKFLOW_TOP = "top_predicted"
WORKFLOW_BY_TOPIC = "top_predicted_by_topic"
WORKFLOW_NONE = "none"
WORKFLOWS = (WORKFLOW_TOP, WORKFLOW_BY_TOPIC, WORKFLOW_NONE)


@dataclass(frozen=True)
class MitigationConfig:
    """One combination of the three intervention diversity variables."""

    claim_strategy: Optional[str] = None
    label_strategy: Optional[str] = None
    workflow: str = WORKFLOW_NONE
    checks_per_step: int = 2
    training_claims: int = 200
    labelers_per_claim: int = 30

    @property
    def is_baseline(self) -> bool:
        return self.workflow == WORKFLOW_NONE

    @property
    def name(self) -> str:
        if self.is_baseline:
            return "none"
        return f"{self.claim_strategy}+{self.label_strategy}+{self.workflow}"

    def validate(self, num_topics: int) -> None:
        if self.workflow not in WORKFLOWS:
            raise ValueError(f"unknown workflow {self.workflow!r}")
        if self.is_baseline:
            if self.claim_strategy or self.label_strategy:
                raise ValueError("baseline mitigation must not name sampling strategies")
            return
        if self.claim_strategy is None or self.label_strategy is None:
            raise ValueError("non-baseline mitigation needs claim and label strategies")
        if self.checks_per_step < 0:
            raise ValueError("checks_per_step must be >= 0")
        if self.workflow == WORKFLOW_BY_TOPIC and self.checks_per_step < num_topics:
            raise ValueError("per-topic workflow needs checks_per_step >= number of topics")


@dataclass
class LedgerEntry:
    claim_id: int
    t: int
    score: float
    veracity: Optional[int] = None
    blocked: bool = False


@dataclass
class FactCheckLedger:
    """Claims selected for fact-checking so far (the exclusion set)."""

    entries: dict[int, LedgerEntry] = field(default_factory=dict)

    @property
    def checked(self) -> set[int]:
        return set(self.entries)

    def add(self, claim_id: int, t: int, predicted: float) -> None:
        if claim_id in self.entries:
            raise ValueError(f"claim {claim_id} was already selected for checking")
        self.entries[claim_id] = LedgerEntry(claim_id, t, predicted)


@dataclass
class TrainedModels:
    """The (f1, f2) pair plus the strategies it was trained under."""

    f1: GradientBoostedRegressor
    f2: GradientBoostedRegressor
    claim_strategy: str
    label_strategy: str


def select_for_checking(
    scores: dict[int, float],
    workflow: str,
    z: int,
    topics: dict[int, int],
    ledger: FactCheckLedger,
    t: int,
) -> list[int]:
    """Pick up to z claims to fact-check this step and add them to the ledger.

    scores must already exclude previously checked claims. Ties break to
    the lower claim id. The per-topic workflow takes the top
    floor(z / num_topics) claims within each topic.
    """
    overlap = set(scores) & ledger.checked
    if overlap:
        raise ValueError(f"scores include already-checked claims: {sorted(overlap)[:5]}")
    if z <= 0 or not scores:
        return []

    def top(ids, budget):
        ranked = sorted(ids, key=lambda c: (-scores[c], c))
        return ranked[:budget]

    if workflow == WORKFLOW_TOP:
        chosen = top(scores.keys(), z)
    elif workflow == WORKFLOW_BY_TOPIC:
        all_topics = sorted(set(topics[c] for c in scores))
        quota = z // len(set(topics.values())) if topics else z
        quota = max(quota, 0)
        chosen = []
        for topic in all_topics:
            chosen += top([c for c in scores if topics[c] == topic], quota)
    else:
        raise ValueError(f"workflow {workflow!r} does not select claims")
    chosen = sorted(chosen)
    for cid in chosen:
        ledger.add(cid, t, float(scores[cid]))
    return chosen


def fact_check(claim_id: int, w: WorldState, ledger: FactCheckLedger) -> str:
    """Resolve one selected claim with a perfect veracity oracle.

    Misinformation is blocked effective immediately; anything else keeps
    circulating but stays excluded from future scoring.
    """
    claim = w.claims[claim_id]
    entry = ledger.entries[claim_id]
    claim.fact_checked_at = w.clock
    entry.veracity = claim.veracity
    if claim.veracity == MISINFO:
        w.mark_blocked(claim_id)
        entry.blocked = True
    w.log.fact_checks.append((claim_id, w.clock, entry.blocked))
    return "blocked" if entry.blocked else "cleared"


def run_mitigation(
    snapshot_bytes: bytes,
    cfg: MitigationConfig,
    models: Optional[TrainedModels],
    t_end: int,
    centrality: Optional[CentralityMap] = None,
    schema: Optional[FeatureSchema] = None,
) -> tuple[WorldState, SimLog, FactCheckLedger]:
    """Restore the shared snapshot and run the post-period under cfg.

    The baseline configuration runs with no hook at all. The hook fires
    at the top of each step: refresh features from the log, score the
    active claims, select under the workflow, and fact-check the
    selection before any node acts.
    """
    w = restore(snapshot_bytes)
    ledger = FactCheckLedger()
    cfg.validate(w.num_topics)
    if cfg.is_baseline or cfg.checks_per_step == 0:
        if models is not None and cfg.is_baseline:
            raise ValueError("baseline run must not receive models")
        run(w, t_end)
        return w, w.log, ledger

    if models is None:
        raise ValueError(f"mitigation {cfg.name} needs trained models")
    if models.claim_strategy != cfg.claim_strategy or models.label_strategy != cfg.label_strategy:
        raise ValueError(
            f"models trained under ({models.claim_strategy}, {models.label_strategy}) "
            f"cannot drive mitigation {cfg.name}"
        )
    if centrality is None:
        raise ValueError("mitigation runs need the precomputed centrality map")
    schema = schema or FeatureSchema()

    tracker = FeatureTracker(len(w.claims), w.graph, centrality, schema)
    tracker.ingest(w.log)
    claim_topics = {c.id: c.topic for c in w.claims}

    def hook(world: WorldState) -> None:
        tracker.ingest(world.log)
        table = tracker.emit(world.log, world.clock, exclude=ledger.checked)
        if not table.claim_ids:
            return
        values = score(models.f1, models.f2, table.X)
        scores = {cid: float(v) for cid, v in zip(table.claim_ids, values)}
        for cid in select_for_checking(
            scores, cfg.workflow, cfg.checks_per_step, claim_topics, ledger, world.clock
        ):
            fact_check(cid, world, ledger)

    run(w, t_end, intervention=hook)
    return w, w.log, ledger
