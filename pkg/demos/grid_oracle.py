"""Check closed-form extremal functions against the log-radius grid solver.

Run: python demos/grid_oracle.py   (about half a minute)

For rotation-invariant data the extremal function becomes the largest
function of t = log|z| that is convex, nondecreasing in each t_j, 0 on the
set and at most 1 on the domain.  The solver computes it on a grid.
"""
import numpy as np

from acrosses.oracle import get_case, verify_identity

print("Disc: a plain grid pins every line at its last node, which costs O(step).")
print(f"{'points':>7} {'midpoint stencil':>18} {'fitted boundary':>16}")
for pts in (33, 65, 129, 257, 513):
    plain, _ = verify_identity(get_case("DISC_FORMULA"), n_pts=pts, stencil="planar",
                               fit_boundary=False)
    fitted, _ = verify_identity(get_case("DISC_FORMULA"), n_pts=pts)
    print(f"{pts:>7} {plain.max_dev:>18.2e} {fitted.max_dev:>16.2e}")

print("\nThree-factor cases need diagonals over all three axes:")
for stencil in ("planar", "cube", "wide"):
    rep, _ = verify_identity(get_case("CLAIM_Q7"), n_pts=33, stencil=stencil)
    print(f"    CLAIM_Q7 at 33^3, {stencil:>6} stencil: max deviation {rep.max_dev:.3e}")

print("\nThe one-step formula for a wide gap undershoots the true function:")
for name in ("ENV_IN_ENV(3,1,3)", "CROSS_IN_ENVELOPE(3,1,3)"):
    rep, sol = verify_identity(get_case(name), n_pts=33)
    print(f"    {name:<26} max deviation {rep.max_dev:.3f}  at h = "
          f"{np.round(rep.argmax_h, 3).tolist()}")

rep, sol = verify_identity(get_case("PROP_CENTER(2,1)"), n_pts=65)
path = "prop_center_2_1.csv"
with open(path, "w") as fh:
    fh.write(sol.to_csv())
print(f"\nPROP_CENTER(2,1) grid written to {path} "
      f"({sol.values.size} rows, columns t_1,t_2,value,mask)")
