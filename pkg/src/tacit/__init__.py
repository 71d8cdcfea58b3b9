"""Agent-based simulator of multi-topic information spread with
fact-checking interventions and a counterfactual experiment harness."""

__version__ = "0.1.0"

from .graph import (
    CentralityMap,
    Graph,
    approx_betweenness,
    compute_prestige,
    generate_synthetic_graph,
    load_graph,
    sample_subgraph,
)
from .world import (
    ANTI,
    MISINFO,
    NOISE,
    Claim,
    NodeState,
    ScenarioConfig,
    ViralityParams,
    WorldState,
    claim_virality,
    default_scenario,
    init_world,
)
from .engine import (
    SimLog,
    Utterance,
    restore,
    retweet_probability,
    run,
    select_tweet,
    snapshot,
    step,
    update_belief,
)
