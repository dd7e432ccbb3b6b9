"""One frequency of the traveling Stokes problem, solved two ways.

Run:  python3 demos/frequency_bvp.py

At a fixed horizontal frequency the velocity/pressure pair reduces to a
two point boundary value problem in the depth variable.  The solver writes it
as a first order system and uses the closed-form matrix exponential with
Gauss-Legendre quadrature.  Here the same problem is also handed to a finite
difference oracle on 2000 intervals, and the two answers are compared.
"""

import numpy as np

from viscowave.frequency_ode import FrequencyBVP, solve_coupled
from viscowave.oracles import collocate_bvp
from viscowave.spectral_grid import VerticalGrid, interpolation_matrix

xi = np.array([2.0 / (2 * np.pi)])  # 2 pi |xi| = 2
gamma = 1.0
vg = VerticalGrid(b=1.0, n=48)


def F1(x):
    return np.sin(3 * x) + 0.5j


def F2(x):
    return x**2 - 1.0


def G(x):
    return 0.2 * np.cos(x)


def dG(x):
    return -0.2 * np.sin(x)


K = np.array([0.3 + 0.1j, -1.0])
n = vg.nodes
bvp = FrequencyBVP(xi=xi, gamma=gamma, F=np.array([F1(n), F2(n)]), G=G(n), dG=dG(n), G_b=complex(G(1.0)), K=K)
y = solve_coupled(bvp, vg)

x, phi, psi, q = collocate_bvp(xi, gamma, (F1, F2), G, K, npts=2000, dG=dG)
P = interpolation_matrix(n, vg.bary, x)
for name, comp, ref in (("phi", 0, phi), ("psi", 1, psi), ("q", 2, q)):
    print(f"{name}: max difference to finite differences = {np.abs(P @ y[comp] - ref).max():.2e}")
print("top values (phi, psi, q):", np.round(vg.top(y[:3]), 6))
