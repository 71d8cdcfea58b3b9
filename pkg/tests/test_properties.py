"""Property tests for the pure metric/update functions."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from tacit.metrics import ccdf, iwcib
from tacit.world import ANTI, MISINFO

from conftest import build_world


@given(st.lists(st.integers(min_value=0, max_value=50), min_size=1, max_size=200))
def test_ccdf_monotone_and_normalized(values):
    points = ccdf(values)
    ps = [p for _, p in points]
    assert ps[0] == 1.0
    assert all(a >= b for a, b in zip(ps, ps[1:]))
    assert all(0 < p <= 1 for p in ps)


@given(
    st.lists(st.floats(0, 1), min_size=1, max_size=6),
    st.data(),
)
def test_iwcib_is_convex_combination_of_deltas(start, data):
    n = len(start)
    end = data.draw(st.lists(st.floats(0, 1), min_size=n, max_size=n))
    impact = data.draw(st.lists(st.floats(0.01, 1), min_size=n, max_size=n))
    got = iwcib(start, end, impact)
    deltas = np.array(end) - np.array(start)
    assert deltas.min() - 1e-12 <= got <= deltas.max() + 1e-12


@settings(max_examples=30, deadline=None)
@given(
    st.floats(0, 1),
    st.floats(0, 1),
    st.integers(min_value=0, max_value=500),
    st.sampled_from([ANTI, MISINFO]),
)
def test_belief_update_stays_in_unit_interval(belief, impact, reads, veracity):
    from tacit.engine import update_belief

    w = build_world([], 1)
    w.belief[0, 0] = belief
    w.impactedness[0, 0] = impact
    w.num_read[0, 0] = reads
    new = update_belief(w, 0, 0, veracity)
    assert 0.0 <= new <= 1.0
    assert w.num_read[0, 0] == reads + 1
