"""
Growing and pruning one shared tree
===================================

"""

from mcastsim import AlgorithmConfig, build_distance_table, calibrate_beta, generate_waxman, join
from mcastsim import WaxmanParams
from mcastsim.metrics import average_delay, link_usage, maximum_delay
from mcastsim.tree import MulticastTree

beta = calibrate_beta(60, (1000.0, 1000.0), 0.25, 3.0, seed=1)
net = generate_waxman(WaxmanParams(60, beta, seed=3))
dt = build_distance_table(net)

# node 0 is the source, the first node on the tree
tree = MulticastTree(net, core=0)
cfg = AlgorithmConfig("MDT", 0.4)
join(cfg, dt, tree, 0, member=False, source=True)

for v in (11, 25, 38, 52, 7):
    join(cfg, dt, tree, v)
    print(f"join {v:2d}: {link_usage(tree)} links, diameter {tree.tree_diameter()[0]:.1f}")

print(f"avg delay {average_delay(tree, tree.sources, tree.members):.1f}, "
      f"max delay {maximum_delay(tree, tree.sources, tree.members):.1f}")

# leaving prunes the branch that only served the departing member
tree.leave(52)
tree.check_invariants()
print(tree.dumps())
