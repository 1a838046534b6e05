"""
Worst and best maximum-delay traces
===================================

"""

from mcastsim import AlgorithmConfig, Scenario
from mcastsim.experiments import ExperimentSpec, stability_run

for k in (1, 5):
    spec = ExperimentSpec(
        family="stability",
        algorithms=(AlgorithmConfig("CBT"), AlgorithmConfig("SOPT", 0.6)),
        repeats=5,
        scenario=Scenario(n_sources=k, event_count=5000),
        sample_every=250,
    )
    res = stability_run(spec)
    for label, st in res.per_algo.items():
        print(f"{k} sources {label:9s} worst {st.worst_level:7.1f} best {st.best_level:7.1f} gap {st.gap:6.1f}")

# one trace is a list of (event index, maximum delay) samples
print(res.per_algo["CBT"].worst_trace[:5])
