# %% [markdown]
# # The exact discrete-time system
#
# Along characteristics the state is a function of `k(zeta) + t / p(1)`.
# Cutting it into unit windows gives a recursion with matrix coefficients,
# one step per transport period.

# %%
import math

import numpy as np

from wavelq import (
    HyperbolicSystem,
    MatrixField,
    ScalarField,
    SpatialGrid,
    StateProfile,
    build_clock,
    build_discrete,
    index_signal,
    invert_k,
    lift_initial_condition,
)

g = SpatialGrid(512)
plant = HyperbolicSystem(ScalarField.from_callable(g, lambda z: 1 + z), MatrixField.zeros(g, 1),
                         [[1.0]], [[-0.5]], [[0.0]], [[1.0]], 1)
clock = build_clock(plant)
print("period", clock.period, "vs ln 2 =", math.log(2))
print("k^-1(0.5)", invert_k(clock, 0.5), "vs sqrt(2) - 1 =", math.sqrt(2) - 1)
print("t = 1.2 ->", index_signal(1.2, clock))

# %%
D = build_discrete(plant)
print("A_d", D.A_d, "B_d", D.B_d, "C_d", D.C_d, "D_d", D.D_d)

# %% [markdown]
# The first window carries the initial profile, re-parametrized by the clock.

# %%
z0 = StateProfile.constant(g, [1.0])
zd0 = lift_initial_condition(z0, plant, clock)
print("z_d(0)(0.5) =", zd0(0.5)[0], "(expected sqrt 2)")
