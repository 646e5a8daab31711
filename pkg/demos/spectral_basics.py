"""
Harmonics, quadrature and the Laplace-Beltrami operator on a sphere
====================================================================

"""

import numpy as np

from helfrich_ch.sphere import QuadratureGrid, build_basis, laplace_beltrami, mode_index, project_K2

# a degree-16 basis on a sphere of radius 2 and its Gauss-Legendre grid
basis = build_basis(16, 2.0)
grid = QuadratureGrid(basis)
print("modes:", basis.nmodes, " grid:", grid.shape, " area:", grid.weights.sum(), "vs", 4 * np.pi * 4)

# a random field survives synthesis followed by analysis
c = np.random.default_rng(0).standard_normal(basis.nmodes)
print("round trip error:", np.abs(grid.analysis(grid.synthesis(c)) - c).max())

# eigenvalues l(l+1)/R^2 of minus the Laplace-Beltrami operator
y = np.zeros(basis.nmodes)
y[mode_index(3, -1)] = 1.0
print("-Lap Y_3 / Y_3 =", -laplace_beltrami(y, basis)[mode_index(3, -1)], " expected", 12 / 4)

# K2 drops the constant and the three coordinate functions
print("K2 keeps degrees >= 2:", np.count_nonzero(project_K2(c)), "of", basis.nmodes)
