"""Prescribed normal velocity and tangential stress on top.

Run:  python3 demos/navier_solve.py

Instead of the full stress, the top boundary carries the normal velocity h
and the tangential stress k'.  The missing normal stress is reconstructed
per mode by dividing a data functional W by conj m(xi, -gamma), after which
an ordinary stress solve finishes the job.  We manufacture the data from a
known flow so the reconstructed normal stress can be compared with the truth.
"""

import numpy as np

from viscowave.linear_solver import LinearSolver
from viscowave.manufactured import random_state
from viscowave.oracles import forward_navier
from viscowave.spectral_grid import HorizontalGrid, VerticalGrid
from viscowave.state import NavierData
from viscowave.symbols import WaveParams

prm = WaveParams(gamma=1.0, sigma=1.0, b=1.0, horiz_dim=2)
grid = HorizontalGrid(2, 4.0, 8)
vg = VerticalGrid(1.0, 32)
truth = random_state(np.random.default_rng(3), grid, vg, kmax=3)
f, g, h, kprime, stress_top = forward_navier(truth.u, truth.q, prm.gamma, grid, vg)

u, p, kn = LinearSolver(prm, grid, vg).solve_navier(NavierData(f, g, h, kprime, grid, vg))
good = (grid.xi_norm > 0) & ~grid.nyquist_mask
print("max error in reconstructed normal stress:", np.abs(kn - stress_top[2])[good].max())
print("max velocity error on resolved modes:   ", np.abs(u - truth.u)[:, good].max())
# the pressure constant is not determined by these boundary conditions
print("zero-mode pressure offset (free constant):", np.round((p - truth.q)[0, 0, :3], 6))
