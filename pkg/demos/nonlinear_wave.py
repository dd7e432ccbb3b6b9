"""A traveling wave generated by a small Gaussian surface stress.

Run:  python3 demos/nonlinear_wave.py

The free boundary is flattened onto the slab 0 < x_n < 1, turning the
problem into a quasilinear system on a fixed domain.  Starting from rest, a
quasi-Newton iteration with the linear operator at zero as its frozen Jacobian
drives the residual down.  The converged state satisfies the power balance
(work by the forcing equals viscous dissipation), and halving the forcing
halves the response.
"""

import numpy as np

from viscowave.nonlinear_solver import IterationConfig, gaussian_bump_stress, solve_traveling_wave
from viscowave.spectral_grid import HorizontalGrid, VerticalGrid
from viscowave.state import xs_state_norm
from viscowave.symbols import WaveParams

prm = WaveParams(gamma=1.0, sigma=1.0, b=1.0, horiz_dim=1)
grid = HorizontalGrid(1, 32.0, 256)
vg = VerticalGrid(1.0, 48)
cfg = IterationConfig(max_iters=25, tol=1e-8)

state, rep = solve_traveling_wave(gaussian_bump_stress(1e-3, grid.L / 16, grid), prm, cfg, grid, vg)
print(f"status {rep.status} after {rep.iterations} residual evaluations")
for k, r in enumerate(rep.residuals, 1):
    print(f"  iteration {k}: residual {r:.3e}")
print(f"power balance defect {rep.energy_defect:.2e}, wall time {rep.wall_time:.1f} s")

eta = grid.to_physical_real(state.eta)
print(f"surface: min {eta.min():.3e} at x = {grid.x[0][eta.argmin()]:.2f}, max {eta.max():.3e} at x = {grid.x[0][eta.argmax()]:.2f}")

half, _ = solve_traveling_wave(gaussian_bump_stress(5e-4, grid.L / 16, grid), prm, cfg, grid, vg)
print("solution norm ratio for forcing a and a/2:", xs_state_norm(state) / xs_state_norm(half))

strong, rep2 = solve_traveling_wave(gaussian_bump_stress(5.0, grid.L / 16, grid), prm, cfg, grid, vg)
print("with a = 5 the iteration reports:", rep2.status)
