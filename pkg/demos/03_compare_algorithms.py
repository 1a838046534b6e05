"""
Six attachment policies on the same churn
=========================================

"""

from mcastsim import AlgorithmConfig, Scenario, run_session
from mcastsim.experiments import ExperimentSpec, network_for

net, dt = network_for(ExperimentSpec(), 3.0, 0)

# every policy sees the same network and the same join/leave stream
scenario = Scenario(n_sources=3, event_count=5000, seed=2)
for cfg in (AlgorithmConfig("CBT"), AlgorithmConfig("GRD"), AlgorithmConfig("WGT", 0.3),
            AlgorithmConfig("SOPT", 0.6), AlgorithmConfig("TOPT", 0.8), AlgorithmConfig("MDT", 0.4)):
    recs = [r for r in run_session(net, dt, cfg, scenario) if r.event_index >= 500]
    n = len(recs)
    print(f"{cfg.label():9s} avg {sum(r.avg_delay for r in recs) / n:7.1f}  "
          f"max {sum(r.max_delay for r in recs) / n:7.1f}  "
          f"links {sum(r.link_count for r in recs) / n:5.1f}")
