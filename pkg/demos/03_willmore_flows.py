"""Willmore-type flows: expanding circles and the length-penalized family.

A circle under the paper-form velocity expands with the closed-form radius
law R(t) = (R0^4 + 6 t)^(1/4); the beta-penalized flow keeps the total
length inside an O(1/beta) band while convexifying the trillium.
"""

import numpy as np

import curveflow as cf
from curveflow.flows import FlowState, StepController, WillmoreBetaFamily, run_flow

circle = cf.make_named_curve("circle", 256)
fam = WillmoreBetaFamily(circle.grid, beta=0.0)
ctrl = StepController(dt=1e-6, dt_max=0.05, rtol=1e-7, atol=1e-10)
run = run_flow(FlowState(state=circle), fam, t_end=1.0, controller=ctrl)
print("R(1) numerical:", cf.total_length(run.final.state) / (2 * np.pi))
print("R(1) exact    :", 7.0 ** 0.25)

trillium = cf.make_named_curve("trillium", 256)
L0 = cf.total_length(trillium)
fam_beta = WillmoreBetaFamily(trillium.grid, beta=5.0, gamma0_length=L0)
ctrl = StepController(dt=1e-8, dt_max=1e-3, rtol=1e-5, atol=1e-8)
run = run_flow(FlowState(state=trillium), fam_beta, t_end=0.01, controller=ctrl)
print("length band: initial", L0, "-> final", cf.total_length(run.final.state))
print("curvature spread shrank:",
      np.ptp(trillium.kappa), "->", np.ptp(run.final.state.kappa))
