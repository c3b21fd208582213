"""Piecewise-polynomial approximation in L^2 of a measure, and width bounds.

On each cube of a partition we project onto polynomials of total degree
< ell by matching moments; the projection error in L^2 of the measure is
controlled by (max J_a)^(1/2) with a = rho/m.  The script measures actual
errors for a smooth function along a refinement sequence and compares their
decay, the bound's decay, and the exact widths from the eigenvalue identity
d_n = sqrt(lambda_(n+1)) of the discretized measure.

Run:  python demos/polynomial_widths.py
"""

import numpy as np

import lqspectra as lq

u = lambda pts: np.exp(pts[:, 0])

spec = lq.binomial_ifs(0.7)
params = lq.OrderParams(p=2, q=2, ell=1, m=1)
a = params.rho / params.m

print("budget   max_J      bound      measured   err/bound")
budgets = [2 ** k for k in range(1, 9)]
errors = []
for budget in budgets:
    part = lq.budget_partition(spec, a, budget)
    approx = lq.piecewise_project(u, part, params.ell)
    err, se = lq.error_Lq(u, approx, spec, params.q, n_samples=50_000, seed=11)
    bound = part.max_j ** (1 / params.q)
    errors.append(err)
    print(f"{budget:6d}   {part.max_j:.2e}   {bound:.3e}  {err:.3e}  {err/bound:.3f}")

wb = lq.width_upper_sequence(spec, params, budgets)
err_slope = np.polyfit(np.log(budgets), np.log(errors), 1)[0]
print(f"\nbound-sequence decay order: {wb.slope:.4f}")
print(f"measured-error decay order: {err_slope:.4f}")

eigs = lq.solve_eigen(lq.discretize(spec, 11))
ns = np.arange(5, 2 * eigs.size // 3)
d_slope = np.polyfit(np.log(ns), 0.5 * np.log(eigs.eigenvalues[ns]), 1)[0]
print(f"exact widths (sqrt eigenvalues) decay order: {d_slope:.4f}")

s1 = lq.s_b_estimate(spec, 1.0, [2, 3, 4, 5, 6]).s_hat
print(f"spectral prediction -1/(2 s_1): {-1/(2*s1):.4f}")
