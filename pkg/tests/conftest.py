import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tacit.graph import Graph, _build_adjacency
from tacit.world import ScenarioConfig, init_world


def build_graph(edges, num_nodes, communities=None):
    """Graph from an explicit edge list (follower, followed)."""
    if edges:
        src = np.array([a for a, _ in edges])
        dst = np.array([b for _, b in edges])
    else:
        src = dst = np.empty(0, dtype=int)
    out_e, in_e = _build_adjacency(src, dst, num_nodes)
    if communities is None:
        communities = np.zeros(num_nodes, dtype=int)
    return Graph(out_e, in_e, np.asarray(communities))


def build_world(
    edges,
    num_nodes,
    communities=None,
    seed=0,
    **scenario_overrides,
):
    """World on an explicit graph with a one-community default scenario."""
    g = build_graph(edges, num_nodes, communities)
    num_comms = g.num_communities
    base = dict(
        num_topics=2,
        claims_per_topic_per_veracity=2,
        community_impactedness=[[0.8, 0.2]] * num_comms,
        community_belief=[[0.5, 0.5]] * num_comms,
        node_draw_stddev=0.0,
        bot_fraction=0.0,
    )
    base.update(scenario_overrides)
    cfg = ScenarioConfig.from_dict(base)
    return init_world(g, cfg, seed=seed)


@pytest.fixture
def two_node_world():
    # node 0 follows node 1
    return build_world([(0, 1)], 2)
