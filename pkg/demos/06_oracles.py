"""Independent cross-checks of the element solver.

Three references that share no code with the element pipeline: an exact
affine solution on a flat rectangle (reproduced to machine precision), a
finite-difference twin solved by conjugate gradients (interior agreement
under 1%), and a dense-grid Holder-seminorm enumeration calibrating the
pair sampler.
"""

import numpy as np

from thingap import (AuxiliaryField, BoundaryData, GapGeometry, LocalRegion,
                     assemble, brute_force_seminorm, dirichlet_values,
                     exact_affine_case, field_gradients, finite_difference_reference,
                     generate, holder_seminorm, identity_coefficients, solve_dirichlet)

# exact affine case
eps = 0.1
case = exact_affine_case(eps)
geom = case.geometry()
mesh = generate(geom, layers=8, aspect=2.0, dxmax=0.05, xrange=1.0)
sol = solve_dirichlet(assemble(mesh, identity_coefficients()),
                      dirichlet_values(mesh, case.data()))
err = np.max(np.abs(sol.values - case.solution(mesh.vertices)))
print(f"affine case: max nodal error {err:.2e} (linear elements reproduce affine "
      f"fields exactly)")

# finite-difference twin on quadratic data
def rule(X):
    X = np.atleast_2d(X)
    return (((1.0 + X[:, 0] ** 2) * (X[:, 1] + eps / 2) / eps))[:, None]

grid = finite_difference_reference(identity_coefficients(), 0.5, eps, 160, 64,
                                   boundary=rule)
data = BoundaryData.polynomial([[1.0, 0.0, 1.0]], [[0.0]], geom)
mesh2 = generate(geom, layers=16, aspect=2.0, dxmax=0.0125, xrange=0.5)
sol2 = solve_dirichlet(assemble(mesh2, identity_coefficients()),
                       dirichlet_values(mesh2, data))
worst = 0.0
for i in range(1, grid.xs.size - 1, 2):
    if abs(grid.xs[i]) > 0.4:
        continue
    for j in range(1, grid.ys.size - 1, 2):
        t = mesh2.locate((grid.xs[i], grid.ys[j]))
        tri = mesh2.triangles[t]
        p = mesh2.vertices[tri]
        T = np.array([[p[1, 0] - p[0, 0], p[2, 0] - p[0, 0]],
                      [p[1, 1] - p[0, 1], p[2, 1] - p[0, 1]]])
        l12 = np.linalg.solve(T, np.array([grid.xs[i], grid.ys[j]]) - p[0])
        lam = np.array([1 - l12.sum(), *l12])
        worst = max(worst, abs(float(lam @ sol2.values[tri, 0]) - grid.values[i, j, 0]))
print(f"difference-stencil twin vs elements: interior sup {worst:.2e} (<= 1e-2)")

# seminorm sampler calibration
gap = GapGeometry.power_law(1e-2, 0.5)
fld = AuxiliaryField(gap, BoundaryData.constant([1.0], [0.0]), 0)
region = LocalRegion(np.array([0.0, 0.0]),
                     0.5 * float(gap.gap_width(np.zeros(1))), gap)
f = lambda X: field_gradients(fld, X).reshape(X.shape[0], -1)
dense = brute_force_seminorm(f, region, 0.5, grid=60)
sampled = holder_seminorm(f, region, 0.5, pairs=4000, seed=0)
print(f"seminorm sampler: sampled {sampled:.4g} vs dense enumeration {dense:.4g} "
      f"(ratio {sampled / dense:.3f}, >= 0.8 required)")
