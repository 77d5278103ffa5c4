# %% [markdown]
# # Riccati equations and the optimal feedback
#
# Value iteration from zero converges to the smallest nonnegative solution
# when one exists and diverges otherwise; divergence means no finite-cost
# input exists.

# %%
import numpy as np
import scipy.linalg as sla

from wavelq import DiscreteSystem, NotOptimizableError, solve_care, solve_fare, synthesize
from wavelq.riccati import value_iteration

rng = np.random.default_rng(1)
D = DiscreteSystem(1.2 * rng.normal(size=(3, 3)) / 2, rng.normal(size=(3, 2)),
                   rng.normal(size=(2, 3)), rng.normal(size=(2, 2)))
care = solve_care(D)
ref = sla.solve_discrete_are(D.A_d, D.B_d, D.C_d.T @ D.C_d, np.eye(2) + D.D_d.T @ D.D_d,
                             s=D.C_d.T @ D.D_d)
print("iterations", care.iterations, "residual", care.residual)
print("difference to scipy's DARE:", np.abs(care.Pi - ref).max())

# %% [markdown]
# The iterates increase monotonically.

# %%
mins = []
prev = [None]


def watch(k, P):
    if prev[0] is not None:
        mins.append(np.linalg.eigvalsh(P - prev[0]).min())
    prev[0] = P.copy()


value_iteration(D, callback=watch)
print("smallest eigenvalue of any increment:", min(mins))

# %% [markdown]
# The filter equation is the control equation of the dual system.

# %%
print("FARE converged:", solve_fare(D).converged)
lq = synthesize(D)
print("closed-loop radius", lq.closed_loop_radius, "unique", lq.unique)

# %%
try:
    synthesize(DiscreteSystem([[2.0]], [[0.0]], [[1.0]], [[0.0]]))
except NotOptimizableError as exc:
    print("as expected:", exc)
