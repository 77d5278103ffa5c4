# %% [markdown]
# # Two benchmark plants
#
# A star of three identical strings joined by a massless bar, and a
# co-current heat exchanger with closed-form transform and Riccati solution.

# %%
import numpy as np

from wavelq import discretize_system, solve_output_lyapunov, synthesize
from wavelq.examples import (
    HeatExchangerParams,
    build_heat_exchanger,
    build_strings,
    care_closed_form_from_output,
    heat_exchanger_closed_loop_eigenvalue,
    heat_exchanger_P_closed_form,
)

np.set_printoptions(precision=4, suppress=True)
strings = discretize_system(build_strings())
lq = synthesize(strings.discrete)
print("open-loop eigenvalues", np.sort_complex(np.linalg.eigvals(strings.discrete.A_d)))
print("Pi\n", lq.Pi)
print("F_d\n", lq.F_d)
print("closed-loop eigenvalues", np.sort_complex(lq.closed_loop_eigenvalues))
print("output Lyapunov solution exists:", solve_output_lyapunov(strings.discrete).exists)

# %%
for params in (HeatExchangerParams(1, 2, 1), HeatExchangerParams(lambda z: 1 + z, 0.5, 1),
               HeatExchangerParams(1, 1, lambda z: 1 + z)):
    disc = discretize_system(build_heat_exchanger(params))
    he = synthesize(disc.discrete)
    C = disc.discrete.C_d
    print("P(1) error", np.abs(disc.transform.P1 - heat_exchanger_P_closed_form(params, 1.0)).max(),
          " Pi error", np.abs(he.Pi - care_closed_form_from_output(C)).max(),
          " lambda2", heat_exchanger_closed_loop_eigenvalue(C))
