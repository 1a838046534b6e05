"""
Delay against group size, with an exponential fit
=================================================

"""

from mcastsim import AlgorithmConfig, Scenario
from mcastsim.experiments import ExperimentSpec, sweep_group_size

spec = ExperimentSpec(
    family="size",
    algorithms=(AlgorithmConfig("CBT"), AlgorithmConfig("GRD"), AlgorithmConfig("SOPT", 0.6)),
    repeats=4,
    scenario=Scenario(n_sources=3, event_count=5000),
)
res = sweep_group_size(spec)

for algo, fit in res.fits.items():
    pts = [(r["group_size"], round(r["avg_delay"], 1)) for r in res.rows if r["algo"] == algo]
    print(algo, pts)
    # h is the saturation level, b the size scale at which it is approached
    print(f"   h={fit.h:.1f} a={fit.a:.1f} b={fit.b:.1f} rms={fit.rms_residual:.2f}")
