# %% [markdown]
# # Closed-loop simulation and the optimal cost
#
# The recursion propagates whole spatial windows exactly. The summed cost of
# the closed loop equals `<z_d(0), Pi z_d(0)>` up to the truncated tail.

# %%
import numpy as np

from wavelq import (
    DiscreteProfile,
    boundary_control_signal,
    cost_discrete,
    discretize_system,
    optimal_cost,
    reconstruct_profile,
    simulate_closed_loop,
    synthesize,
)
from wavelq.examples import HeatExchangerParams, build_heat_exchanger
from wavelq.sim import decay_rate, default_horizon

disc = discretize_system(build_heat_exchanger(HeatExchangerParams(1.0, 0.5, 2.0)))
lq = synthesize(disc.discrete)
grid = disc.clock.grid
zd0 = DiscreteProfile(grid, np.column_stack([np.cos(grid.nodes), 1 + grid.nodes ** 2]))

J = default_horizon(lq.closed_loop_radius, 2)
traj = simulate_closed_loop(disc.discrete, lq.F_d, zd0, J, disc.transform)
print("steps", J, "simulated", cost_discrete(traj), "predicted", optimal_cost(lq.Pi, zd0))
print("continuous-time cost", disc.discrete.period * cost_discrete(traj))
print("decay", decay_rate(traj), "radius", lq.closed_loop_radius)

# %% [markdown]
# Profiles at any time come back along characteristics; the boundary input
# is the feedback applied to the trace at 1.

# %%
for t in (0.0, 0.3, 1.1):
    z = reconstruct_profile(traj, t, disc.clock, disc.transport)
    u = boundary_control_signal(traj, lq.F_d, disc.clock, disc.transport, t)
    print(f"t={t:.1f}  z(0.5)={z(0.5)}  u={u}")
