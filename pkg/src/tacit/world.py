"""World state for the simulator: topics, claims, node attributes.

A scenario fixes the number of topics, the per-community means for
belief and impactedness, the claim population, and all behavioral
parameters. `init_world` turns a graph plus a scenario into a fully
populated, deterministic `WorldState`.

Belief is a per-(node, topic) value in [0, 1] where higher means more
misinformed; impactedness weights how much a node cares about a topic
and is fixed for the whole run.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np

from .graph import Graph, compute_prestige

__all__ = [
    "ANTI",
    "NOISE",
    "MISINFO",
    "VERACITIES",
    "ViralityParams",
    "ScenarioConfig",
    "Claim",
    "NodeState",
    "WorldState",
    "claim_virality",
    "init_world",
    "default_scenario",
]

# claim veracity codes
ANTI = -1
NOISE = 0
MISINFO = 1
VERACITIES = (ANTI, NOISE, MISINFO)

NORMAL = "normal"
BOT = "bot"


@dataclass
class ViralityParams:
    """Parameters of the claim-virality draw and claim-selection softmax.

    Claims with veracity in {-1, 0} draw virality z1 + Beta(alpha1, beta1)
    and are selected via softmax(r1 * virality**q1); misinformation claims
    use z2 + Beta(alpha2, beta2) and softmax(r2 * virality**q2).
    """

    z1: float = 1.0
    z2: float = 1.5
    alpha1: float = 1.0
    beta1: float = 17.0
    alpha2: float = 5.0
    beta2: float = 17.0
    r1: float = 9.0
    r2: float = 9.0
    q1: float = 2.0
    q2: float = 1.0

    def validate(self) -> None:
        if self.z1 <= 0 or self.z2 <= 0:
            raise ValueError("z1 and z2 must be positive")
        if min(self.alpha1, self.beta1, self.alpha2, self.beta2) <= 0:
            raise ValueError("Beta parameters must be positive")
        if self.r1 <= 0 or self.r2 <= 0:
            raise ValueError("r1 and r2 must be positive")
        if self.q1 < 1 or self.q2 < 1:
            raise ValueError("q1 and q2 must be >= 1")


@dataclass
class ScenarioConfig:
    """Complete world parameterization for one simulation scenario."""

    num_topics: int = 2
    claims_per_topic_per_veracity: int = 100
    # shape (C, num_topics), entries in [0, 1]
    community_impactedness: np.ndarray = None
    community_belief: np.ndarray = None
    node_draw_stddev: float = 0.1
    bot_fraction: float = 0.05
    belief_learning_rate: float = 0.1
    virality: ViralityParams = field(default_factory=ViralityParams)
    retweet_scale: float = 0.6
    inbox_read_cap: int = 20
    noise_tweet_share: float = 0.3
    wake_prob: float = 0.5

    def __post_init__(self):
        if self.community_impactedness is not None:
            self.community_impactedness = np.asarray(self.community_impactedness, dtype=np.float64)
        if self.community_belief is not None:
            self.community_belief = np.asarray(self.community_belief, dtype=np.float64)

    @property
    def num_communities(self) -> int:
        return self.community_impactedness.shape[0]

    def validate(self) -> None:
        if self.num_topics < 1:
            raise ValueError("num_topics must be >= 1")
        if self.claims_per_topic_per_veracity < 1:
            raise ValueError("claims_per_topic_per_veracity must be >= 1")
        if self.inbox_read_cap < 1:
            raise ValueError("inbox_read_cap must be >= 1")
        for name in ("community_impactedness", "community_belief"):
            mat = getattr(self, name)
            if mat is None:
                raise ValueError(f"{name} is required")
            if mat.ndim != 2 or mat.shape[1] != self.num_topics:
                raise ValueError(f"{name} must have shape (C, {self.num_topics})")
            if mat.min() < 0 or mat.max() > 1:
                raise ValueError(f"{name} entries must lie in [0, 1]")
        if self.community_impactedness.shape != self.community_belief.shape:
            raise ValueError("impactedness and belief matrices must have the same shape")
        if not (0.0 <= self.bot_fraction < 1.0):
            raise ValueError("bot_fraction must be in [0, 1)")
        if self.node_draw_stddev < 0:
            raise ValueError("node_draw_stddev must be >= 0")
        if not (0.0 <= self.noise_tweet_share <= 1.0):
            raise ValueError("noise_tweet_share must be in [0, 1]")
        if not (0.0 <= self.wake_prob <= 1.0):
            raise ValueError("wake_prob must be in [0, 1]")
        if self.retweet_scale < 0:
            raise ValueError("retweet_scale must be >= 0")
        self.virality.validate()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["community_impactedness"] = self.community_impactedness.tolist()
        d["community_belief"] = self.community_belief.tolist()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        d = dict(d)
        if "virality" in d and isinstance(d["virality"], dict):
            d["virality"] = ViralityParams(**d["virality"])
        cfg = cls(**d)
        cfg.validate()
        return cfg


def default_scenario() -> ScenarioConfig:
    """Canonical three-community, two-topic scenario.

    Community 0 is a large majority mostly impacted by topic 0, community
    1 a minority mostly impacted by topic 1, and community 2 a small
    expert group equally impacted by both topics and starting with low
    (well-informed) belief.
    """
    return ScenarioConfig(
        num_topics=2,
        community_impactedness=np.array([[0.8, 0.2], [0.2, 0.8], [0.5, 0.5]]),
        community_belief=np.array([[0.7, 0.7], [0.7, 0.7], [0.1, 0.1]]),
    )


@dataclass
class Claim:
    """A single assertion about a topic with fixed veracity and virality."""

    id: int
    topic: int
    veracity: int
    virality: float
    fact_checked_at: Optional[int] = None
    blocked: bool = False


@dataclass
class NodeState:
    """Read-only view of one node's attributes (assembled on demand)."""

    kind: str
    belief: np.ndarray
    impactedness: np.ndarray
    prestige: float
    inbox: list
    num_read: np.ndarray
    wake: bool


def claim_virality(veracity: int, params: ViralityParams, rng: np.random.Generator) -> float:
    """Draw an intrinsic virality for a claim of the given veracity."""
    if veracity in (ANTI, NOISE):
        return params.z1 + rng.beta(params.alpha1, params.beta1)
    if veracity == MISINFO:
        return params.z2 + rng.beta(params.alpha2, params.beta2)
    raise ValueError(f"invalid veracity {veracity}")


class WorldState:
    """All mutable simulation state for one run.

    Owns the per-node attribute arrays, the claim population, the event
    log, the clock, and a single deterministic RNG stream. Derived caches
    (follower lists, claim lookup tables, selection distributions) are
    rebuilt on demand and excluded from serialization.
    """

    def __init__(
        self,
        graph: Graph,
        scenario: ScenarioConfig,
        belief: np.ndarray,
        impactedness: np.ndarray,
        prestige: np.ndarray,
        is_bot: np.ndarray,
        claims: list[Claim],
        rng: np.random.Generator,
        log,
    ):
        self.graph = graph
        self.scenario = scenario
        self.belief = belief
        self.impactedness = impactedness
        self.prestige = prestige
        self.is_bot = is_bot
        self.num_read = np.zeros_like(belief, dtype=np.int64)
        self.wake = np.zeros(graph.num_nodes, dtype=bool)
        self.inboxes: list[list[int]] = [[] for _ in range(graph.num_nodes)]
        self.claims = claims
        self.clock = 0
        self.rng = rng
        self.log = log
        self._rebuild_caches()

    # -- derived caches -------------------------------------------------

    def _rebuild_caches(self) -> None:
        g = self.graph
        self._followers = [a.tolist() for a in g.in_edges]
        self._node_comm = g.community.tolist()
        self._claim_topic = [c.topic for c in self.claims]
        self._claim_veracity = [c.veracity for c in self.claims]
        self._claim_virality = [c.virality for c in self.claims]
        self._blocked = [c.blocked for c in self.claims]
        self._class_ids: dict[tuple[int, int], np.ndarray] = {}
        for topic in range(self.scenario.num_topics):
            for v in VERACITIES:
                ids = [c.id for c in self.claims if c.topic == topic and c.veracity == v]
                self._class_ids[(topic, v)] = np.array(ids, dtype=np.int64)
        self._selection: dict[tuple[int, int], tuple[list[int], np.ndarray]] = {}

    def selection_table(self, topic: int, veracity: int) -> tuple[list[int], np.ndarray]:
        """Active claim ids and cumulative selection probabilities.

        Selection probability follows softmax(r * virality**q) over the
        non-blocked claims of the (topic, veracity) class; the branch
        parameters depend on whether the class is misinformation.
        """
        key = (topic, veracity)
        cached = self._selection.get(key)
        if cached is not None:
            return cached
        ids = self._class_ids[key]
        active = [int(i) for i in ids if not self._blocked[i]]
        if not active:
            table = (active, np.empty(0))
        else:
            vp = self.scenario.virality
            if veracity == MISINFO:
                r, q = vp.r2, vp.q2
            else:
                r, q = vp.r1, vp.q1
            fv = np.array([self._claim_virality[i] for i in active])
            logits = r * fv**q
            logits -= logits.max()
            weights = np.exp(logits)
            probs = weights / weights.sum()
            cum = np.cumsum(probs)
            cum[-1] = 1.0
            table = (active, cum)
        self._selection[key] = table
        return table

    def invalidate_selection(self, topic: int, veracity: int) -> None:
        self._selection.pop((topic, veracity), None)

    def mark_blocked(self, claim_id: int) -> None:
        claim = self.claims[claim_id]
        claim.blocked = True
        self._blocked[claim_id] = True
        self.invalidate_selection(claim.topic, claim.veracity)

    # -- views ------------------------------------------------------------

    @property
    def num_nodes(self) -> int:
        return self.graph.num_nodes

    @property
    def num_topics(self) -> int:
        return self.scenario.num_topics

    def node_view(self, j: int) -> NodeState:
        return NodeState(
            kind=BOT if self.is_bot[j] else NORMAL,
            belief=self.belief[j].copy(),
            impactedness=self.impactedness[j].copy(),
            prestige=float(self.prestige[j]),
            inbox=list(self.inboxes[j]),
            num_read=self.num_read[j].copy(),
            wake=bool(self.wake[j]),
        )

    def community_belief_means(self) -> np.ndarray:
        """Current mean belief per (community, topic)."""
        comms = self.graph.community
        out = np.zeros((self.graph.num_communities, self.num_topics))
        for c in range(self.graph.num_communities):
            out[c] = self.belief[comms == c].mean(axis=0)
        return out

    # -- serialization ----------------------------------------------------

    _PICKLE_FIELDS = (
        "graph",
        "scenario",
        "belief",
        "impactedness",
        "prestige",
        "is_bot",
        "num_read",
        "wake",
        "inboxes",
        "claims",
        "clock",
        "rng",
        "log",
    )

    def __getstate__(self):
        return {name: getattr(self, name) for name in self._PICKLE_FIELDS}

    def __setstate__(self, state):
        for name, value in state.items():
            setattr(self, name, value)
        self._rebuild_caches()


def init_world(g: Graph, cfg: ScenarioConfig, seed: int) -> WorldState:
    """Build a deterministic world from a graph and a scenario.

    Per-node belief and impactedness are Gaussian draws around the
    community means, clamped to [0, 1]. A bot_fraction share of nodes is
    marked as bots. Claims are created up front for every (topic,
    veracity) pair with viralities drawn from the veracity-specific
    distribution; no claims are born mid-run.
    """
    from .engine import SimLog  # local import to avoid a cycle

    cfg.validate()
    if g.num_communities != cfg.num_communities:
        raise ValueError(
            f"scenario has {cfg.num_communities} communities, graph has {g.num_communities}"
        )
    rng = np.random.default_rng(seed)
    num_nodes = g.num_nodes

    belief_means = cfg.community_belief[g.community]
    impact_means = cfg.community_impactedness[g.community]
    belief = np.clip(rng.normal(belief_means, cfg.node_draw_stddev), 0.0, 1.0)
    impactedness = np.clip(rng.normal(impact_means, cfg.node_draw_stddev), 0.0, 1.0)

    num_bots = int(round(cfg.bot_fraction * num_nodes))
    is_bot = np.zeros(num_nodes, dtype=bool)
    if num_bots:
        is_bot[rng.choice(num_nodes, size=num_bots, replace=False)] = True

    claims: list[Claim] = []
    for topic in range(cfg.num_topics):
        for veracity in VERACITIES:
            for _ in range(cfg.claims_per_topic_per_veracity):
                claims.append(
                    Claim(
                        id=len(claims),
                        topic=topic,
                        veracity=veracity,
                        virality=claim_virality(veracity, cfg.virality, rng),
                    )
                )

    prestige = compute_prestige(g)
    log = SimLog(num_communities=g.num_communities, num_topics=cfg.num_topics)
    return WorldState(
        graph=g,
        scenario=cfg,
        belief=belief,
        impactedness=impactedness,
        prestige=prestige,
        is_bot=is_bot,
        claims=claims,
        rng=rng,
        log=log,
    )
