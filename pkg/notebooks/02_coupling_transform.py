# %% [markdown]
# # Removing the in-domain coupling
#
# `P` and `Q` are integrated independently with RK4; their product is a free
# accuracy check. For constant coupling and speed, `P(zeta)` is a matrix
# exponential.

# %%
import numpy as np
import scipy.linalg as sla

from wavelq import (
    HyperbolicSystem,
    MatrixField,
    ScalarField,
    SpatialGrid,
    build_transform,
    to_transport_form,
)

M = np.array([[-3.0, 2.0], [1.0, -4.0]])


def plant(cells, speed=0.7):
    g = SpatialGrid(cells)
    return HyperbolicSystem(ScalarField.constant(g, speed), MatrixField.constant(g, M),
                            np.eye(2), np.eye(2) * 0.5, np.zeros((1, 2)), np.zeros((1, 2)), 1)


tr = build_transform(plant(256))
print("max |QP - I| :", tr.inverse_residual)
print("P(1) vs expm :", np.abs(tr.P1 - sla.expm(M / 0.7)).max())

# %% [markdown]
# Convergence order of the integrator, measured against the exponential.

# %%
cells = np.array([16, 32, 64, 128])
errs = [np.abs(build_transform(plant(c)).P1 - sla.expm(M / 0.7)).max() for c in cells]
for c, e in zip(cells, errs):
    print(f"{c:4d} cells  error {e:.3e}")
print("fitted order:", np.polyfit(np.log(1 / cells), np.log(errs), 1)[0])

# %% [markdown]
# The transport form has no coupling; `L` absorbs `P(1)`.

# %%
flat = to_transport_form(plant(256), tr)
print(flat.coupling.is_zero, "\n", flat.L)
