"""
A calibrated Waxman network and its unicast routes
==================================================

"""

from mcastsim import WaxmanParams, build_distance_table, calibrate_beta, generate_waxman
from mcastsim.network import average_degree
from mcastsim.routing import shortest_path

# find the edge probability that gives an average degree of 3 on 200 nodes
beta = calibrate_beta(200, (1000.0, 1000.0), 0.25, 3.0, seed=1)
net = generate_waxman(WaxmanParams(200, beta, seed=7))
print(f"beta = {beta:.4f}, average degree = {average_degree(net):.3f}")

# all-pairs distances, next hops and each node's mean distance to the rest
dt = build_distance_table(net)
path = shortest_path(dt, 0, 199)
print("route 0 -> 199:", path, f"length {dt.dist[0, 199]:.1f}")
print("most central node:", int(dt.avg_dist.argmin()))

# the text dump reloads to an identical network
from mcastsim import Network
assert Network.loads(net.dumps()) == net
