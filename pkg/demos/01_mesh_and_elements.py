"""
Meshes, Lagrange elements and quadrature
========================================

Build the structured meshes, look at their angles, and check the reference
element and the quadrature rules against closed-form integrals.
"""
import math

import numpy as np

from nitschefem.element import reference_element, volume_quadrature
from nitschefem.mesh import build_mesh, mesh_size, validate

# A 2D mesh: every square is cut along its rising diagonal.
mesh = build_mesh(2, 3)
rep = validate(mesh)
print(f"2D level 3: {mesh.num_vertices} vertices, {mesh.num_cells} triangles")
print(f"  angles {math.degrees(rep.min_angle):.1f}..{math.degrees(rep.max_angle):.1f} deg, "
      f"area {rep.volume_sum:.15f}")

# The 3D Kuhn mesh keeps every dihedral angle at or below 90 degrees.
rep3 = validate(build_mesh(3, 2))
print(f"3D level 2: max dihedral angle {math.degrees(rep3.max_angle):.1f} deg")

# Graded meshes concentrate cells at the origin but stay shape regular.
for gamma in (1.0, 1.5, 2.0):
    g = build_mesh(2, 5, gamma)
    h, h_min = mesh_size(g)
    print(f"gamma={gamma}: h={h:.4f} h_min={h_min:.2e} min angle {math.degrees(validate(g).min_angle):.1f} deg")

# P2 basis: nodal at the six lattice points.
elem = reference_element(2, 2)
print("P2 nodal matrix is the identity:", np.allclose(elem.tabulate(elem.nodes), np.eye(6)))

# Quadrature: the integral of x^2 y^3 over the reference triangle is 2! 3! / 7!.
q = volume_quadrature(2, 5)
approx = q.weights @ (q.points[:, 0] ** 2 * q.points[:, 1] ** 3)
print(f"quadrature {approx:.16f} vs exact {2 * 6 / 5040:.16f}")
