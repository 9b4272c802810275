"""Walk through the nine four-factor crosses and the one that does not match.

Run: python demos/four_factor_envelopes.py
"""
from fractions import Fraction

from acrosses.checks import desc_equal, desc_subset
from acrosses.cross_algebra import format_matrix
from acrosses.envelope import Closed, as_closed, build_envelope, nine_cases
from acrosses.hexpr import evaluate, to_text
from acrosses.radial import RadialModel, membership

print("Each cross is a 0/1 matrix; its envelope is {E(h) < 1} for a piecewise-linear E.\n")

for case in nine_cases():
    built = as_closed(build_envelope(case.matrix, certified=False))
    cmp = desc_equal(built, Closed(4, case.expr))
    rows = " ".join(format_matrix(case.matrix).split())
    print(f"{case.name}  rows {rows}")
    print(f"    recursion: {to_text(built.expr)}")
    if cmp.equal:
        print("    same set as the tabulated formula\n")
    else:
        w = cmp.witness
        print(f"    tabulated: {case.text}")
        print(f"    sets differ at h = ({', '.join(map(str, w))})")
        print(f"      recursion value {evaluate(built.expr, w)}, "
              f"tabulated value {evaluate(case.expr, w)}\n")

q9 = next(c for c in nine_cases() if c.name == "Q9")
ours = as_closed(build_envelope(q9.matrix, certified=False))
tab = Closed(4, q9.expr)
print("For Q9 the recursion's set sits strictly inside the tabulated one:")
print(f"    recursion subset of tabulated: {desc_subset(ours, tab) is None}")
print(f"    tabulated subset of recursion: {desc_subset(tab, ours) is None}")
print("The gap comes from the step (sum h - k)/(l - k), which is the extremal")
print("function of the (n,k)-cross in the (n,l)-envelope only when l = k + 1.\n")

# the lattice witness sits on the boundary of the smaller set; step inside the gap
model = RadialModel.uniform(4)
w = (Fraction(1, 4), Fraction(0), Fraction(15, 16), Fraction(15, 16))
print(f"At h = ({', '.join(map(str, w))}): recursion {evaluate(ours.expr, w)}, "
      f"tabulated {evaluate(tab.expr, w)}")
radii = [0.5 * 2.0 ** float(x) for x in w]
print("The same point as norms in the unit polydisc model with inner radius 1/2:")
print(f"    radii {[round(r, 6) for r in radii]}")
print(f"    inside the tabulated set: {membership(model, radii, tab)}")
print(f"    inside the recursion set: {membership(model, radii, ours)}")
