"""Level spectra of a skewed self-similar measure vs the uniform one.

The running example is the Sierpinski-tetrahedron measure in R^3 with
weights (0.659, 0.28, 0.001, 0.06): four ratio-1/2 corner maps, so every
level spectrum coincides with the closed-form self-similar spectrum.  The
script draws out the three landmark values one reads off such a plot:

  * beta(0) = 2, the box dimension of the support (4 maps of ratio 1/2);
  * the fixed point s_rho where the spectrum crosses the line rho*s,
    here with rho = 2;
  * the uniform-measure comparison point m/(m+rho) = 0.6, which always
    bounds s_rho from above -- the gap between the two is exactly what a
    skewed measure buys in approximation order.

Run:  python demos/spectrum_curves.py   (writes spectrum_curves.csv)
"""

import csv

import numpy as np

import lqspectra as lq

WEIGHTS = (0.659, 0.28, 0.001, 0.06)
# p = 2, q = 4, ell = 2 in dimension 3 gives exactly rho = q(ell - m/p) = 2,
# the slope of the dashed line one would draw through the origin
PARAMS = lq.OrderParams(p=2, q=4, ell=2, m=3)
RHO = PARAMS.rho

tetra = lq.sierpinski_tetrahedron(WEIGHTS)
uniform = lq.Lebesgue(3)

s_grid = np.linspace(0.0, 1.4, 36)
curve = lq.spectrum_curve(tetra, 4, s_grid)
flat = lq.spectrum_curve(uniform, 2, s_grid)

with open("spectrum_curves.csv", "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["s", "beta_tetrahedron", "beta_uniform"])
    for s, b1, b2 in zip(s_grid, curve.values, flat.values):
        w.writerow([s, b1, b2])

print("box dimension beta(0):", curve.values[0])

s_rho = lq.selfsimilar_s_rho(WEIGHTS, [0.5] * 4, RHO)
print(f"fixed point s_rho (rho = {RHO}):", round(s_rho, 6))

# the finite-level roots agree with the closed form at every level here,
# because all ratios are 1/2 and the level spectra are level independent
fp = lq.s_b_estimate(tetra, RHO, levels=[2, 4, 6, 8])
print("per-level roots:", np.round(fp.roots, 6), "-> estimate", round(fp.s_hat, 6))

print("uniform comparison point m/(m+rho):", 3 / (3 + RHO))

bound = lq.order_bound(PARAMS, s_rho)
print("approximation-order bound -1/(q s_rho):", round(bound.value, 4),
      "vs classical", round(bound.classical, 4))
print("wrote spectrum_curves.csv")
