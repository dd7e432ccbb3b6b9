"""The boundary symbol m(xi, gamma) and the dispersion function rho.

Run:  python3 demos/symbols_tour.py

m is the normal velocity at the top produced by a unit normal stress at one
frequency.  Its real part is negative away from zero, which is what makes the
free surface problem solvable.  This script prints m across a range of
frequencies, compares it with its small and large frequency asymptotics, and
shows that the closed-form Y profile agrees with a brute-force matrix
exponential.
"""

import numpy as np

from viscowave.oracles import Y_oracle
from viscowave.symbols import (
    WaveParams,
    eval_m,
    eval_rho,
    eval_Y,
    m_asymptotic_infty,
    m_asymptotic_zero,
    reparam,
)

prm = WaveParams(gamma=1.0, sigma=1.0, b=1.0, horiz_dim=1)

print("|xi|        Re m          Im m          m / small-xi form   m / large-xi form")
for mag in (1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0):
    xi = np.array([mag])
    m = eval_m(xi, prm.gamma, prm.b)
    print(
        f"{mag:8.0e}  {m.real: .5e}  {m.imag: .5e}  "
        f"{(m / m_asymptotic_zero(xi, prm)).real:18.6f}  {(m / m_asymptotic_infty(xi, prm)).real:18.6f}"
    )

# rho combines m with gravity, surface tension and the speed; it never vanishes away from zero
for mag in (0.05, 0.5, 5.0):
    print(f"rho({mag}) = {eval_rho(np.array([mag]), prm):.6f}")

# the closed form against expm + dense solve
rep = reparam(np.array([0.7]), prm.gamma)
x = np.linspace(0.0, prm.b, 5)
closed = eval_Y(rep, x, prm.b)
brute = Y_oracle(rep.r, rep.s, x, prm.b)
print("max |Y closed - Y brute| =", np.abs(closed - brute).max())
