"""
Where the weight constant pays off
==================================

A reduced sweep; the acceptance suite runs the same family with 50 repeats.
"""

from mcastsim import Scenario
from mcastsim.experiments import ExperimentSpec, default_algorithms, sweep_omega

spec = ExperimentSpec(
    family="omega",
    algorithms=default_algorithms(("SOPT", "TOPT", "MDT")),
    repeats=4,
    scenario=Scenario(n_sources=3, target_sizes=(40,), event_count=4000),
)
res = sweep_omega(spec)

for row in res.rows:
    print(f"{row['algo']:5s} omega={row['omega']:.1f}  avg {row['avg_delay']:7.1f}  max {row['max_delay']:7.1f}")
print(res.optima)
