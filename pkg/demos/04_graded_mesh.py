"""
Non-quasi-uniform meshes
========================

On a mesh graded towards a corner, cell sizes vary by a large factor.  The
penalty weights use local facet diameters, and the optimal L2 rate survives.
"""
from nitschefem import StudyConfig, build_mesh, emit, run_study
from nitschefem.mesh import mesh_size

for level in (3, 5, 7):
    h, h_min = mesh_size(build_mesh(2, level, 1.5))
    print(f"level {level}: largest cell {h:.3e}, smallest {h_min:.3e}, ratio {h / h_min:.0f}")

for k in (1, 2):
    table = run_study(StudyConfig(degree=k, grading=1.5, levels=(1, 7)))
    print(f"\ngraded gamma=1.5, k={k}")
    print(emit(table, "markdown"), end="")
