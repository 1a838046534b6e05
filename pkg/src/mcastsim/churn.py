"""Membership churn: seeded join/leave streams and session drivers."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .algorithms import AlgorithmConfig, join
from .metrics import MeasurementRecord, average_delay, bandwidth_usage, maximum_delay
from .network import Network
from .prng import Xoshiro256, derive_seed
from .routing import DistanceTable
from .tree import MulticastTree

STATIC = "static"
DYNAMIC = "dynamic"


@dataclass(frozen=True)
class Scenario:
    """Group dynamics for one session.

    ``static``: ``n_sources`` fixed sources join first and never leave;
    receivers churn. ``dynamic``: every joining member becomes a source with
    probability ``source_fraction`` and churns like any other member. A
    dynamic scenario with fraction 0 is treated as static with one source.
    """

    model: str = STATIC
    n_sources: int = 1
    source_fraction: float = 0.0
    size_min: int = 5
    size_max: int = 90
    target_sizes: tuple[int, ...] = (10, 20, 40, 80)
    event_count: int = 20_000
    seed: int = 1
    warmup: int = 500
    source_rate: float = 1.0
    count_active_sources: bool = False

    def __post_init__(self):
        if self.model not in (STATIC, DYNAMIC):
            raise ValueError(f"model must be {STATIC!r} or {DYNAMIC!r}")
        if self.size_min < 1 or self.size_max < self.size_min:
            raise ValueError(f"bad size range [{self.size_min}, {self.size_max}]")
        bad = [t for t in self.target_sizes if not self.size_min <= t <= self.size_max]
        if bad:
            raise ValueError(f"target sizes {bad} outside [{self.size_min}, {self.size_max}]")
        if self.event_count < 0 or self.warmup < 0:
            raise ValueError("event_count and warmup must be non-negative")
        if self.model == STATIC and not 1 <= self.n_sources < self.size_max:
            raise ValueError(f"n_sources must lie in [1, {self.size_max}), got {self.n_sources}")
        if self.model == DYNAMIC and not 0 <= self.source_fraction <= 1:
            raise ValueError(f"source_fraction must lie in [0, 1], got {self.source_fraction}")

    def effective(self) -> "Scenario":
        if self.model == DYNAMIC and self.source_fraction == 0:
            return replace(self, model=STATIC, n_sources=1)
        return self


@dataclass(frozen=True)
class Event:
    op: str  # "J" or "L"
    node: int
    index: int
    source: bool = False


@dataclass
class EventStream:
    events: list[Event]
    n_initial: int = 0  # leading static source joins

    def __iter__(self):
        return iter(self.events)

    def __len__(self):
        return len(self.events)

    def dumps(self) -> str:
        return "".join(
            f"{e.op} {e.node}{' source' if e.source else ''}\n" for e in self.events
        )

    @classmethod
    def loads(cls, text: str) -> "EventStream":
        events = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            parts = line.split()
            if not parts:
                continue
            if parts[0] not in ("J", "L") or len(parts) not in (2, 3) or (
                len(parts) == 3 and (parts[2] != "source" or parts[0] != "J")
            ):
                raise ValueError(f"line {lineno}: expected 'J <node> [source]' or 'L <node>'")
            events.append(Event(parts[0], int(parts[1]), len(events), len(parts) == 3))
        n_initial = 0
        members = set()
        for e in events:
            if e.op == "J" and e.source and e.node not in members:
                n_initial += 1
                members.add(e.node)
            else:
                break
        # leading source joins only count as static sources if no source ever leaves
        leaving = {e.node for e in events if e.op == "L"}
        if members & leaving:
            n_initial = 0
        return cls(events, n_initial)


def gen_event_stream(scenario: Scenario, net_size: int) -> EventStream:
    """Seeded join/leave sequence.

    Repeatedly draws a target group size in ``[size_min, size_max]`` and
    emits joins of uniformly chosen non-members (or leaves of uniformly
    chosen members) until the group reaches it, for ``event_count`` events.
    Static sources are drawn once and joined up front (first drawn first,
    the rest by ascending id); they are never candidates to leave.
    """
    sc = scenario.effective()
    static = sc.model == STATIC
    if net_size <= sc.size_max or (static and net_size < sc.size_max + sc.n_sources):
        raise ValueError(f"network of {net_size} nodes too small for groups of up to {sc.size_max}")
    rng = Xoshiro256(derive_seed(sc.seed, "events"))
    events: list[Event] = []
    outside = list(range(net_size))
    if static:
        drawn = rng.sample(range(net_size), sc.n_sources)
        order = [drawn[0]] + sorted(drawn[1:])
        for v in order:
            events.append(Event("J", v, len(events), True))
        taken = set(drawn)
        outside = [v for v in outside if v not in taken]
    n_initial = len(events)
    inside: list[int] = []
    target = rng.randint(sc.size_min, sc.size_max)
    produced = 0
    while produced < sc.event_count:
        if len(inside) == target:
            target = rng.randint(sc.size_min, sc.size_max)
            continue
        if len(inside) < target:
            i = rng.randbelow(len(outside))
            v = outside[i]
            outside[i] = outside[-1]
            outside.pop()
            inside.append(v)
            src = (not static) and rng.random() < sc.source_fraction
            events.append(Event("J", v, len(events), src))
        else:
            i = rng.randbelow(len(inside))
            v = inside[i]
            inside[i] = inside[-1]
            inside.pop()
            outside.append(v)
            events.append(Event("L", v, len(events)))
        produced += 1
    return EventStream(events, n_initial)


# --- sessions ----------------------------------------------------------------


class Session:
    """One algorithm driving one tree through an event stream."""

    def __init__(self, net: Network, dt: DistanceTable, cfg: AlgorithmConfig, scenario: Scenario):
        self.net = net
        self.dt = dt
        self.cfg = cfg
        self.scenario = scenario.effective()
        self.tree: MulticastTree | None = None

    def apply(self, ev: Event) -> None:
        cfg = self.cfg
        static = self.scenario.model == STATIC
        if self.tree is None:
            if ev.op != "J":
                raise ValueError(f"stream starts with a leave of {ev.node}")
            self.tree = MulticastTree(self.net, core=ev.node, keep_core=cfg.keeps_core)
        if ev.op == "J":
            as_member = not (static and ev.source)
            join(cfg, self.dt, self.tree, ev.node, member=as_member, source=ev.source)
        else:
            self.tree.leave(ev.node)

    def measure(self, index: int) -> MeasurementRecord:
        tree, sc = self.tree, self.scenario
        sources, receivers = tree.sources, tree.members
        n_active = len(sources) if sc.count_active_sources else 1
        return MeasurementRecord(
            algo=self.cfg.kind,
            omega=self.cfg.omega,
            group_size=len(receivers),
            avg_delay=average_delay(tree, sources, receivers),
            max_delay=maximum_delay(tree, sources, receivers),
            link_count=tree.link_count(),
            bandwidth=bandwidth_usage(tree, sc.source_rate, n_active),
            diameter=tree.tree_diameter()[0] if len(tree) else 0.0,
            event_index=index,
            seed=sc.seed,
            n_sources=sc.n_sources if sc.model == STATIC else 0,
            source_fraction=sc.source_fraction if sc.model == DYNAMIC else 0.0,
        )


def run_session(
    net: Network,
    dt: DistanceTable,
    cfg: AlgorithmConfig,
    scenario: Scenario,
    stream: EventStream | None = None,
    check: bool = False,
    downward: bool = False,
) -> list[MeasurementRecord]:
    """Apply the stream and record metrics whenever the receiver count
    crosses a target size upward (and downward too if ``downward``).

    A stream without churn events yields one record of the final state.
    ``check`` asserts the tree invariants after every event.
    """
    if stream is None:
        stream = gen_event_stream(scenario, net.n)
    session = Session(net, dt, cfg, scenario)
    targets = set(scenario.target_sizes)
    records = []
    size = 0
    for ev in stream:
        session.apply(ev)
        if check:
            session.tree.check_invariants()
        new_size = len(session.tree.members)
        if new_size != size:
            up = new_size > size
            size = new_size
            if (up and size in targets) or (downward and not up and size in targets):
                records.append(session.measure(ev.index))
    if len(stream) == stream.n_initial and session.tree is not None:
        records.append(session.measure(len(stream) - 1))
    return records


def trace_max_delay(
    net: Network,
    dt: DistanceTable,
    cfg: AlgorithmConfig,
    scenario: Scenario,
    sample_every: int,
    stream: EventStream | None = None,
) -> list[tuple[int, float]]:
    """Maximum delay sampled after every ``sample_every``-th churn event."""
    if sample_every < 1:
        raise ValueError("sample_every must be >= 1")
    if stream is None:
        stream = gen_event_stream(scenario, net.n)
    session = Session(net, dt, cfg, scenario)
    out = []
    for ev in stream:
        session.apply(ev)
        k = ev.index - stream.n_initial + 1
        if k > 0 and k % sample_every == 0:
            t = session.tree
            out.append((ev.index, maximum_delay(t, t.sources, t.members)))
    return out
