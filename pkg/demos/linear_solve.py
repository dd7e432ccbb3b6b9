"""The linear free surface problem: solve, then apply the forward operator.

Run:  python3 demos/linear_solve.py

Random smooth data (f, g, h, k) on a periodic grid are inverted to a
velocity u, pressure part q and surface eta.  The surface comes from the
per-mode formula eta = psi / rho, after which a stress problem with a
corrected right side gives (u, q).  Applying the forward differential operator
to the solution recovers the data, which is the main correctness check.
"""

import numpy as np

from viscowave.linear_solver import CompatibilityError, LinearSolver
from viscowave.manufactured import random_data
from viscowave.oracles import forward_operator
from viscowave.spectral_grid import HorizontalGrid, VerticalGrid
from viscowave.state import ys_norm
from viscowave.symbols import WaveParams

rng = np.random.default_rng(0)
for d, sigma in ((1, 1.0), (2, 0.5), (1, 0.0)):
    prm = WaveParams(gamma=1.0, sigma=sigma, b=1.0, horiz_dim=d)
    grid = HorizontalGrid(d, 4.0, 16 if d == 1 else 8)
    vg = VerticalGrid(1.0, 32)
    solver = LinearSolver(prm, grid, vg)
    data = random_data(rng, grid, vg, kmax=3)
    sol = solver.solve_gravity_capillary(data)
    back = forward_operator(sol, prm.gamma, prm.sigma)
    print(f"d={d} sigma={sigma}: relative round-trip residual {ys_norm(back - data) / ys_norm(data):.2e}, max |eta_hat| {np.abs(sol.eta).max():.3e}")

# the data must balance at the zero mode: h_hat(0) equals the depth integral of g_hat(0)
data.h[0] += 0.1
try:
    solver.solve_gravity_capillary(data)
except CompatibilityError as exc:
    print("rejected as expected:", exc)
