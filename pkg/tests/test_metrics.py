import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_network, small_net
from mcastsim.algorithms import AlgorithmConfig
from mcastsim.churn import Scenario, Session, gen_event_stream
from mcastsim.metrics import (
    DegenerateFit,
    average_delay,
    bandwidth_usage,
    fit_exponential,
    link_usage,
    maximum_delay,
)
from mcastsim.routing import build_distance_table
from mcastsim.tree import init_tree
from oracles import pair_delays


@pytest.fixture
def star():
    net = make_network([(0, 0), (2, 0), (0, 4)], [(0, 1), (0, 2)])
    t = init_tree(net, 0, {0})
    t.graft([1, 0])
    t.graft([2, 0])
    return t


def test_star_delays(star):
    assert average_delay(star, {0}, {1, 2}) == pytest.approx(3.0)
    assert maximum_delay(star, {0}, {1, 2}) == pytest.approx(4.0)
    assert maximum_delay(star, {0}, {2}) == pytest.approx(4.0)


def test_no_pairs(star):
    assert average_delay(star, {0}, {0}) == 0.0
    assert maximum_delay(star, {0}, {0}) == 0.0


def test_link_usage_and_bandwidth(star):
    assert link_usage(star) == 2
    assert link_usage(init_tree(star.net, 1)) == 0
    assert bandwidth_usage(star, 0.0) == 0.0
    assert bandwidth_usage(star, 1.0) == 2.0
    assert bandwidth_usage(star, 2.5, 3) == pytest.approx(15.0)
    with pytest.raises(ValueError):
        bandwidth_usage(star, -1.0)


def test_chain_link_count():
    coords = [(i, 0) for i in range(6)]
    net = make_network(coords, [(i, i + 1) for i in range(5)])
    t = init_tree(net, 0)
    t.graft([5, 4, 3, 2, 1, 0])
    assert link_usage(t) == 5


@given(st.floats(0, 1e3), st.floats(0.01, 100))
def test_bandwidth_linear_in_rate(rate, k):
    net = make_network([(0, 0), (1, 0), (2, 0)], [(0, 1), (1, 2)])
    t = init_tree(net, 0)
    t.graft([2, 1, 0])
    assert bandwidth_usage(t, k * rate) == pytest.approx(k * bandwidth_usage(t, rate))


def test_delays_match_traversal_oracle():
    rng = random.Random(0)
    for _ in range(10):
        net = small_net(rng.randrange(1000))
        dt = build_distance_table(net)
        sc = Scenario(model="dynamic", source_fraction=0.4, size_min=2, size_max=20,
                      target_sizes=(5,), event_count=300, seed=rng.randrange(1000))
        s = Session(net, dt, AlgorithmConfig("TOPT", 0.8), sc)
        for ev in gen_event_stream(sc, net.n):
            s.apply(ev)
            if ev.index % 25 == 0:
                t = s.tree
                ref = pair_delays(t, t.sources, t.members)
                assert average_delay(t, t.sources, t.members) == pytest.approx(
                    np.mean(ref) if ref else 0.0, abs=1e-9)
                assert maximum_delay(t, t.sources, t.members) == pytest.approx(max(ref, default=0.0), abs=1e-9)
                assert link_usage(t) == len(t.edges())


def test_relabeling_invariance():
    # random small tree on a line-and-branches layout, relabelled by permutation
    base = [(0, 0), (2, 0), (5, 0), (2, 3), (5, -1), (7, 2)]
    links = [(0, 1), (1, 2), (1, 3), (2, 4), (2, 5)]
    sources, receivers = {0, 4}, {3, 5, 4}
    ref_avg = ref_max = None
    for perm in itertools.islice(itertools.permutations(range(6)), 0, 720, 37):
        coords = [None] * 6
        for old, new in enumerate(perm):
            coords[new] = base[old]
        net = make_network(coords, [(perm[u], perm[v]) for u, v in links])
        t = init_tree(net, perm[0])
        dt = build_distance_table(net)
        from mcastsim.routing import shortest_path

        for v in range(6):
            t.graft(shortest_path(dt, v, perm[0]))
        S = {perm[x] for x in sources}
        R = {perm[x] for x in receivers}
        a, m = average_delay(t, S, R), maximum_delay(t, S, R)
        if ref_avg is None:
            ref_avg, ref_max = a, m
        assert a == pytest.approx(ref_avg, abs=1e-12) and m == pytest.approx(ref_max, abs=1e-12)


def test_fit_exact_recovery():
    x = np.arange(5, 91, 5)
    y = 1000 - 500 * np.exp(-x / 20)
    fit = fit_exponential(zip(x, y))
    for got, want in ((fit.h, 1000), (fit.a, 500), (fit.b, 20)):
        assert abs(got - want) <= 1e-6 * want


def test_fit_constant_series():
    with pytest.raises(DegenerateFit) as info:
        fit_exponential([(1, 7.0), (2, 7.0), (3, 7.0), (4, 7.0)])
    r = info.value.result
    assert (r.h, r.a, r.b) == (7.0, 0.0, 1.0)


def test_fit_preconditions():
    with pytest.raises(ValueError):
        fit_exponential([(1, 1), (2, 2), (3, 3)])
    with pytest.raises(ValueError):
        fit_exponential([(1, 1), (1, 2), (3, 3), (4, 5)])


@settings(max_examples=50, deadline=None)
@given(
    st.floats(100, 2000), st.floats(10, 800), st.floats(3, 80),
    st.lists(st.floats(-5, 5), min_size=8, max_size=8),
)
def test_fit_residual_monotone(h, a, b, noise):
    x = np.array([5, 10, 20, 30, 40, 55, 70, 85], dtype=float)
    y = h - a * np.exp(-x / b) + np.array(noise)
    trace = []
    fit = fit_exponential(zip(x, y), trace=trace)
    assert all(later <= earlier for earlier, later in zip(trace, trace[1:]))
    assert fit.b > 0
    assert fit.rms_residual <= np.sqrt(np.mean((y - y.mean()) ** 2)) + 1e-9


def test_fit_csv_row():
    x = np.arange(10, 90, 10)
    fit = fit_exponential(zip(x, 50 - 20 * np.exp(-x / 15)))
    assert len(fit.csv_row().split(",")) == 4
