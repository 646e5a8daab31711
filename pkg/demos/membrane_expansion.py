"""
Curvature functionals on perturbed spheres
===========================================

"""

import numpy as np

from helfrich_ch.fields import Discretization, ModelParams, homogeneous_phase
from helfrich_ch.geometry import (
    C1_closed_form,
    C2_closed_form,
    GeometryGrid,
    RadialGraphSurface,
    first_order_coefficient,
    surface_functionals,
    variation_check,
)
from helfrich_ch.sphere import mode_index

p = ModelParams()
geo = GeometryGrid(6, p.R)
phi = homogeneous_phase(p, Discretization(6, p.R)).coeffs

# a degree-2 plus degree-3 bump on the unit sphere
u = np.zeros(geo.basis.nmodes)
u[mode_index(2, 0)] = 0.3
u[mode_index(3, 2)] = -0.2

# Willmore energy, area, volume and the Gauss-Bonnet integral
for rho in (0.0, 0.1, 0.3):
    f = surface_functionals(RadialGraphSurface(u, rho, geo), phi, p)
    print(f"rho={rho:.1f}  W={f.W:.6f}  A={f.A:.6f}  V={f.V:.6f}  int K={f.gauss_bonnet / np.pi:.10f} pi")

# finite differences in rho against the closed-form variations
for e in variation_check(u, phi, p, geo, rho_fd=1e-3):
    print(f"{e.name:4s} fd={e.finite_difference: .8f}  formula={e.formula: .8f}")

# zeroth- and first-order coefficients of the constrained Lagrangian
print("C1 =", C1_closed_form(p))
print("dL/drho at 0 =", first_order_coefficient(phi, p, geo), " closed form C2 =", C2_closed_form(p))
