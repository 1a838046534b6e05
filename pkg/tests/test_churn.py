import math

import pytest

from conftest import small_net
from mcastsim.algorithms import AlgorithmConfig
from mcastsim.churn import (
    DYNAMIC,
    EventStream,
    Scenario,
    Session,
    gen_event_stream,
    run_session,
    trace_max_delay,
)
from mcastsim.experiments import ExperimentSpec, network_for
from mcastsim.routing import build_distance_table


@pytest.fixture(scope="module")
def paper_net():
    return network_for(ExperimentSpec(), 3.0, 0)


def test_no_churn_is_just_source_joins():
    st = gen_event_stream(Scenario(n_sources=3, event_count=0, seed=2), 200)
    assert [e.op for e in st] == ["J"] * 3 and all(e.source for e in st)


def test_static_sources_first_and_permanent():
    st = gen_event_stream(Scenario(n_sources=5, event_count=5000, seed=9), 200)
    first = st.events[:5]
    assert all(e.op == "J" and e.source for e in first)
    srcs = {e.node for e in first}
    assert len(srcs) == 5
    assert first[0].node == first[0].node and [e.node for e in first[1:]] == sorted(e.node for e in first[1:])
    assert not any(e.op == "L" and e.node in srcs for e in st)


def test_stream_replay_is_identical():
    sc = Scenario(model=DYNAMIC, source_fraction=0.5, event_count=3000, seed=77)
    assert gen_event_stream(sc, 200).dumps() == gen_event_stream(sc, 200).dumps()
    assert gen_event_stream(sc, 200).dumps() != gen_event_stream(Scenario(event_count=3000, seed=78), 200).dumps()


def test_stream_text_round_trip():
    sc = Scenario(model=DYNAMIC, source_fraction=0.3, event_count=500, seed=4)
    st = gen_event_stream(sc, 200)
    text = st.dumps()
    assert text.splitlines()[0].split()[0] in ("J",)
    again = EventStream.loads(text)
    assert again.events == st.events and again.dumps() == text
    static = gen_event_stream(Scenario(n_sources=3, event_count=50, seed=1), 200)
    assert EventStream.loads(static.dumps()).n_initial == 3


def test_group_size_bookkeeping():
    sc = Scenario(n_sources=3, event_count=10_000, seed=3)
    members = set()
    sources = set()
    for e in gen_event_stream(sc, 200):
        if e.op == "J":
            assert e.node not in members and e.node not in sources
            (sources if e.source else members).add(e.node)
        else:
            assert e.node in members
            members.remove(e.node)
        assert len(members) <= sc.size_max
    assert len(sources) == 3


def test_dynamic_source_fraction_within_binomial_bounds():
    p = 0.3
    st = gen_event_stream(Scenario(model=DYNAMIC, source_fraction=p, event_count=30_000, seed=5), 200)
    joins = [e for e in st if e.op == "J"]
    assert len(joins) >= 10_000
    k = sum(e.source for e in joins)
    sigma = math.sqrt(len(joins) * p * (1 - p))
    assert abs(k - p * len(joins)) <= 3 * sigma


def test_zero_fraction_maps_to_single_static_source():
    sc = Scenario(model=DYNAMIC, source_fraction=0.0, event_count=100, seed=1)
    eff = sc.effective()
    assert eff.model == "static" and eff.n_sources == 1
    assert gen_event_stream(sc, 200).n_initial == 1


def test_scenario_validation():
    with pytest.raises(ValueError):
        Scenario(n_sources=90)
    with pytest.raises(ValueError):
        Scenario(target_sizes=(100,))
    with pytest.raises(ValueError):
        gen_event_stream(Scenario(), 80)


def test_zero_events_single_source_record(paper_net):
    net, dt = paper_net
    recs = run_session(net, dt, AlgorithmConfig("GRD"), Scenario(event_count=0))
    assert len(recs) == 1
    r = recs[0]
    assert (r.link_count, r.avg_delay, r.max_delay, r.group_size) == (0, 0.0, 0.0, 0)


def test_session_deterministic(paper_net):
    net, dt = paper_net
    sc = Scenario(n_sources=2, event_count=3000, seed=8)
    cfg = AlgorithmConfig("MDT", 0.4)
    assert run_session(net, dt, cfg, sc) == run_session(net, dt, cfg, sc)


def test_all_targets_recorded(paper_net):
    net, dt = paper_net
    recs = run_session(net, dt, AlgorithmConfig("SOPT", 0.6), Scenario(n_sources=3, event_count=10_000, seed=2))
    assert {r.group_size for r in recs} == {10, 20, 40, 80}
    for r in recs:
        assert 0 <= r.avg_delay <= r.max_delay <= r.diameter + 1e-9


def test_downward_crossings_optional(paper_net):
    net, dt = paper_net
    sc = Scenario(n_sources=1, event_count=3000, seed=2)
    up = run_session(net, dt, AlgorithmConfig("GRD"), sc)
    both = run_session(net, dt, AlgorithmConfig("GRD"), sc, downward=True)
    assert len(both) > len(up)


def test_invariants_hold_through_session():
    net = small_net(4)
    dt = build_distance_table(net)
    sc = Scenario(model=DYNAMIC, source_fraction=0.5, size_min=2, size_max=20, target_sizes=(5,),
                  event_count=2000, seed=3)
    for kind in ("CBT", "GRD", "WGT", "SOPT", "TOPT", "MDT"):
        run_session(net, dt, AlgorithmConfig(kind, 0.3), sc, check=True)


def test_trace_lengths(paper_net):
    net, dt = paper_net
    sc = Scenario(n_sources=5, event_count=2000, seed=1)
    assert len(trace_max_delay(net, dt, AlgorithmConfig("CBT"), sc, 2000)) == 1
    assert len(trace_max_delay(net, dt, AlgorithmConfig("CBT"), sc, 100)) == 20
    with pytest.raises(ValueError):
        trace_max_delay(net, dt, AlgorithmConfig("CBT"), sc, 0)


def test_cbt_trace_flat_without_membership_change(paper_net):
    net, dt = paper_net
    sc = Scenario(n_sources=3, event_count=400, seed=6)
    stream = gen_event_stream(sc, net.n)
    session = Session(net, dt, AlgorithmConfig("CBT"), sc)
    for ev in stream:
        session.apply(ev)
    t = session.tree
    from mcastsim.metrics import maximum_delay

    first = maximum_delay(t, t.sources, t.members)
    # no events in between: the value cannot move
    assert maximum_delay(t, t.sources, t.members) == first


@pytest.mark.slow
def test_paper_length_trace(paper_net):
    net, dt = paper_net
    sc = Scenario(n_sources=5, event_count=200_000, seed=1)
    tr = trace_max_delay(net, dt, AlgorithmConfig("SOPT", 0.6), sc, 1000)
    assert len(tr) == 200
