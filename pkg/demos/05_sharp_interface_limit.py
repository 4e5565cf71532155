"""The sharp-interface limit of the coupled phase-separation energy.

The diffuse energy evaluated on the recovery profile converges at O(eps)
to the limit energy: curvature bulk plus a cubic-in-gap cost per
transition, with surface-tension constants theta1 = sqrt(2)/3 and
sigma1 = 1/3 for the default well.
"""

import numpy as np

import curveflow as cf
from curveflow.energies import (
    PhaseSepParams,
    TransitionSet,
    default_nodal_model,
    gamma_limit_energy,
    heteroclinic_profile,
    phase_sep_energy,
    recovery_sequence,
    surface_tension_constants,
)

sigma1, theta1 = surface_tension_constants()
print("sigma1 =", sigma1, " theta1 =", theta1, " theta1/sigma1 =", theta1 / sigma1)

z = np.linspace(-2, 2, 9)
print("heteroclinic profile:", np.round(heteroclinic_profile(cf.DoubleWell(), z), 4))

nodal = default_nodal_model()
state = cf.make_named_curve("trillium", 2048)
tset = TransitionSet(points=(0.25, 0.75), first_side_plus=True)
delta = 0.2
f0 = gamma_limit_energy(state, tset, delta, nodal)
print("sharp-interface energy F0:", f0)

L = cf.total_length(state)
for eps in (0.08, 0.04, 0.02, 0.01):
    params = PhaseSepParams(epsilon=eps, delta=delta, beta=1.0,
                            sigma1_len=1.0, gamma0_length=L)
    _, rho = recovery_sequence(state, tset, eps, nodal)
    f_eps = phase_sep_energy(state, rho, params, nodal)
    print(f"eps={eps:5.2f}  F_eps={f_eps:.6f}  gap={abs(f_eps - f0):.2e}")
