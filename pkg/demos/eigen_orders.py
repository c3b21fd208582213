"""Eigenvalue decay of 1D Krein-Feller operators for three measures.

For an atomic measure the eigenproblem reduces exactly to a Stieltjes
string, so after discretizing a measure at the cube midpoints the computed
spectrum is exact up to the measure discretization.  Eigenvalues decay like
n^(-1/s_1) where s_1 is the measure's spectral fixed point:

  * uniform measure:  s_1 = 1/2, the classical lambda_n ~ 1/(pi^2 n^2);
  * binomial(0.7):    s_1 ~ 0.4846, so the decay is faster than n^-2;
  * ratio-1/3 Cantor: s_1 = delta/(1+delta) with delta = log2/log3.

Run:  python demos/eigen_orders.py
"""

import math

import lqspectra as lq

cases = [
    ("uniform", lq.Lebesgue(1), [8, 9, 10, 11], (5, 50), -2.0),
    ("binomial 0.7/0.3", lq.binomial_ifs(0.7), [9, 10, 11], None, None),
    ("cantor 1/3", lq.cantor_measure(), [12, 13, 14], None,
     -(1 + math.log(2) / math.log(3)) / (math.log(2) / math.log(3))),
]

for name, spec, levels, window, closed_form in cases:
    fit = lq.order_fit(spec, levels, index_window=window)
    target = closed_form if closed_form is not None else fit.reference_slope
    print(f"{name}:")
    print(f"  fitted decay order {fit.slope:.4f} +- {fit.stderr:.4f} "
          f"(window {fit.window}, level {fit.level})")
    print(f"  per-level slopes {[(l, round(s, 4)) for l, s in fit.per_level]} "
          f"(drift {fit.drift:.4f})")
    print(f"  target -1/s_1 = {target:.4f}")

# the Dirac measure is the extreme case: one atom, one eigenvalue, and the
# width sequence truncates after a single step
eigs = lq.solve_eigen(lq.discretize(lq.dirac([0.5]), 0))
print(f"dirac at 1/2: spectrum {eigs.eigenvalues}, widths "
      f"{[lq.width_from_eigen(eigs, n) for n in (0, 1, 2)]}")
