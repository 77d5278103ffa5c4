# %% [markdown]
# # Describing a plant
#
# A plant is a transport system on [0, 1] with one wave speed, an optional
# in-domain coupling matrix and boundary matrices `K, L, Ky, Ly`. Inputs enter
# through the last `p` rows of the boundary condition.

# %%
import numpy as np

from wavelq import (
    HyperbolicSystem,
    MatrixField,
    ScalarField,
    SpatialGrid,
    load_system,
    sample_at,
    system_to_dict,
    validate_system,
)

grid = SpatialGrid(64)
speed = ScalarField.from_callable(grid, lambda z: 1.0 + 0.5 * z)
coupling = MatrixField.constant(grid, [[-0.4, 0.4], [0.1, -0.1]])

plant = HyperbolicSystem(
    lambda0=speed,
    coupling=coupling,
    K=-np.eye(2),
    L=np.zeros((2, 2)),
    Ky=[[0.0, 1.0]],
    Ly=[[0.0, -1.0]],
    p=1,
)
print("speed at 0.3:", sample_at(speed, 0.3))
print("input selector:\n", plant.input_selector)

# %% [markdown]
# Well-posedness hinges on an invertible `K` and a positive speed.

# %%
print(validate_system(plant))

singular = HyperbolicSystem(speed, coupling, np.zeros((2, 2)), np.zeros((2, 2)),
                            [[0.0, 1.0]], [[0.0, -1.0]], 1)
print(validate_system(singular))

# %% [markdown]
# Systems round-trip through JSON; the CLI consumes the same format.

# %%
doc = system_to_dict(plant)
again = load_system(doc, grid_cells=128)
print(sorted(doc), again.grid.num_cells)
