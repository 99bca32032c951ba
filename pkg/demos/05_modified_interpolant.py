"""
The interpolant with an orthogonal boundary projection
======================================================

Interior DOFs are nodal values; boundary DOFs come from a weighted L2
projection of the trace, so the boundary error is orthogonal to every discrete
trace.  For smooth data the boundary error converges one order above the
worst case; a trace of limited smoothness shows the worst case is attained.
"""
from nitschefem import BoundaryProjection, build_mesh, build_space, modified_interpolant, orthogonality_residual
from nitschefem.interpolation import interpolation_rate_study
from nitschefem.solutions import corner_power, trig2d


def show(table, title):
    print(f"\n{title}")
    print(f"{'level':>5} {'L2':>10} {'rate':>6} {'bnd L2':>10} {'rate':>6} {'bnd grad':>10} {'rate':>6}")
    for r in table.rows:
        rates = ["" if v is None else f"{v:.2f}" for v in (r.l2_rate, r.bnd_rate, r.bnd_grad_rate)]
        print(f"{r.level:>5} {r.l2:10.3e} {rates[0]:>6} {r.bnd_l2:10.3e} {rates[1]:>6} {r.bnd_grad:10.3e} {rates[2]:>6}")


space = build_space(build_mesh(2, 4), 2)
proj = BoundaryProjection("weighted", alpha=1.0)
c = modified_interpolant(space, trig2d(), proj)
print(f"orthogonality residual {orthogonality_residual(space, trig2d(), c, proj):.1e}")

for k in (1, 2):
    show(interpolation_rate_study(2, k, range(2, 7), trig2d()), f"smooth trace, k={k}")
    show(interpolation_rate_study(2, k, range(2, 7), corner_power(2, k)), f"rough trace r^k, k={k}")
