"""Stieltjes-string eigenproblems: exact small cases, classical limits, counting."""

import math

import numpy as np
import pytest

import lqspectra as lq


# ---------------------------------------------------------------------------
# discretization
# ---------------------------------------------------------------------------

def test_discretize_lebesgue_level2(leb1):
    atoms = lq.discretize(leb1, 2)
    assert np.array_equal(atoms.points, [1 / 8, 3 / 8, 5 / 8, 7 / 8])
    assert np.allclose(atoms.weights, 0.25, atol=0)


def test_discretize_binomial_level1(binom):
    atoms = lq.discretize(binom, 1)
    assert np.array_equal(atoms.points, [0.25, 0.75])
    assert np.allclose(atoms.weights, [0.7, 0.3], atol=1e-15)


def test_discretize_atomic_passthrough(dirac_half):
    atoms = lq.discretize(dirac_half, 5)
    assert np.array_equal(atoms.points, [0.5])
    assert np.array_equal(atoms.weights, [1.0])


def test_discretize_rejects_multidim(leb2):
    with pytest.raises(ValueError, match="1D"):
        lq.discretize(leb2, 3)


def test_atomic_approx_invariants():
    with pytest.raises(ValueError, match="increasing"):
        lq.AtomicApprox(np.array([0.6, 0.4]), np.array([0.5, 0.5]))
    with pytest.raises(ValueError, match="positive"):
        lq.AtomicApprox(np.array([0.4, 0.6]), np.array([1.1, -0.1]))
    with pytest.raises(ValueError, match="sum"):
        lq.AtomicApprox(np.array([0.4, 0.6]), np.array([0.5, 0.6]))


# ---------------------------------------------------------------------------
# exact small systems
# ---------------------------------------------------------------------------

def test_dirac_single_eigenvalue_quarter(dirac_half):
    eigs = lq.solve_eigen(lq.discretize(dirac_half, 0), eigenvectors=True)
    assert eigs.size == 1
    assert abs(eigs.eigenvalues[0] - 0.25) < 1e-15
    assert eigs.residuals[0] < 1e-12
    # the eigenfunction is the hat peaking at the atom
    assert eigs.vectors[0, 0] == pytest.approx(1.0)


def test_two_atom_thirds_closed_form(atom_pair):
    # K = [[6,-3],[-3,6]] has eigenvalues 3 and 9; lambda = (1/2)/3, (1/2)/9
    eigs = lq.solve_eigen(lq.discretize(atom_pair, 0), eigenvectors=True)
    assert np.allclose(eigs.eigenvalues, [1 / 6, 1 / 18], atol=1e-15)
    assert eigs.residuals.max() < 1e-12
    # symmetric ground state, antisymmetric second state
    assert eigs.vectors[0, 0] == pytest.approx(eigs.vectors[1, 0], abs=1e-10)
    assert eigs.vectors[0, 1] == pytest.approx(-eigs.vectors[1, 1], abs=1e-10)


def test_counting_function(atom_pair):
    eigs = lq.solve_eigen(lq.discretize(atom_pair, 0))
    assert lq.counting_function(eigs, 0.1) == 1
    assert lq.counting_function(eigs, 0.01) == 2
    assert lq.counting_function(eigs, 2.0) == 0
    assert lq.counting_function(eigs, 1 / 18) == 2  # inclusive at an eigenvalue
    with pytest.raises(ValueError):
        lq.counting_function(eigs, 0.0)


def test_width_from_eigen(dirac_half):
    eigs = lq.solve_eigen(lq.discretize(dirac_half, 0))
    assert lq.width_from_eigen(eigs, 0) == 0.5
    assert lq.width_from_eigen(eigs, 1) == 0.0
    with pytest.raises(ValueError):
        lq.width_from_eigen(eigs, -1)


def test_width_bridge_strictly_decreasing(binom):
    eigs = lq.solve_eigen(lq.discretize(binom, 7))
    widths = np.array([lq.width_from_eigen(eigs, n) for n in range(eigs.size)])
    # width^2 = lambda_(n+1) is strictly decreasing; the rounded sqrt may tie
    # on near-degenerate pairs at the last ulp
    assert np.all(np.diff(eigs.eigenvalues) < 0)
    assert np.all(np.diff(widths) <= 0)
    assert lq.width_from_eigen(eigs, eigs.size) == 0.0


# ---------------------------------------------------------------------------
# classical limit and convergence
# ---------------------------------------------------------------------------

def test_lebesgue_spectrum_approaches_continuum(leb1):
    eigs = lq.solve_eigen(lq.discretize(leb1, 10))
    k = np.arange(1, 11)
    target = 1.0 / (math.pi ** 2 * k ** 2)
    assert np.max(np.abs(eigs.eigenvalues[:10] / target - 1.0)) < 5e-3


def test_lebesgue_monotone_convergence(leb1):
    k = np.arange(1, 11)
    target = 1.0 / (math.pi ** 2 * k ** 2)
    prev = None
    for n in range(6, 11):
        lam = lq.solve_eigen(lq.discretize(leb1, n)).eigenvalues[:10]
        gap = np.abs(lam - target)
        if prev is not None:
            assert np.all(gap <= prev + 1e-18)
        prev = gap


def test_rank_equals_atom_count(binom, cantor):
    for spec, n in ((binom, 6), (cantor, 8)):
        atoms = lq.discretize(spec, n)
        eigs = lq.solve_eigen(atoms)
        assert eigs.size == atoms.size
        assert np.all(eigs.eigenvalues > 0)
        assert np.all(np.diff(eigs.eigenvalues) <= 0)


def test_residual_contract_moderate_sizes(leb1, binom):
    for spec, lvl in ((leb1, 8), (binom, 9)):
        eigs = lq.solve_eigen(lq.discretize(spec, lvl), eigenvectors=True)
        assert eigs.residuals.max() <= 1e-8


def test_max_min_rayleigh_quotients_below_top(binom):
    atoms = lq.discretize(binom, 6)
    eigs = lq.solve_eigen(atoms)
    diag, off = lq.stiffness_tridiagonal(atoms.points)
    rng = np.random.default_rng(17)
    lam1 = eigs.eigenvalues[0]
    for _ in range(200):
        u = rng.standard_normal(atoms.size)
        ku = diag * u
        ku[:-1] += off * u[1:]
        ku[1:] += off * u[:-1]
        rq = float(np.dot(atoms.weights * u, u) / np.dot(u, ku))
        assert rq <= lam1 + 1e-10


# ---------------------------------------------------------------------------
# order fits
# ---------------------------------------------------------------------------

def test_order_fit_lebesgue(leb1):
    fit = lq.order_fit(leb1, [8, 9, 10, 11], index_window=(5, 50))
    assert fit.slope == pytest.approx(-2.0, abs=0.05)
    assert fit.reference_slope == pytest.approx(-2.0, abs=1e-9)
    assert fit.stderr < 0.01
    assert fit.level == 11
    assert len(fit.per_level) == 4


def test_order_fit_window_too_small(leb1):
    with pytest.raises(ValueError, match="fewer than 10"):
        lq.order_fit(leb1, [6], index_window=(5, 12))


def test_order_fit_respects_decay_bounds(leb1, binom, cantor):
    # universal chain: slope <= -2 (+0.05 fit slack) in 1D, and never slower
    # than the measure's own -1/s_1 target (+0.15)
    fits = [
        lq.order_fit(leb1, [9, 10], index_window=(5, 50)),
        lq.order_fit(binom, [9, 10]),
        lq.order_fit(cantor, [11, 12]),
    ]
    for fit in fits:
        assert fit.slope <= -2.0 + 0.05
        assert fit.slope <= fit.reference_slope + 0.15


# ---------------------------------------------------------------------------
# counting sandwich
# ---------------------------------------------------------------------------

def test_split_two_atoms_exact(atom_pair):
    # cut at 1/2: each piece is a single-atom string with gaps 1/3 and 1/6,
    # so K = 3 + 6 = 9 and lambda = (1/2)/9 = 1/18 on both sides; the grid
    # stays off the eigenvalues to avoid 1-ulp counting flips
    report = lq.split_counting_check(atom_pair, None, [0.5],
                                     [0.01, 0.05, 0.1, 0.2])
    assert report.passed
    # full spectrum {1/6, 1/18}; pieces {1/18} and {1/18}
    assert list(report.n_full) == [2, 2, 1, 0]
    assert list(report.n_split_sum) == [2, 2, 0, 0]
    assert list(report.gaps) == [0, 0, 1, 0]


def test_split_lebesgue_gap_zero_or_one(leb1):
    xs = np.geomspace(1e-7, 0.2, 50)
    report = lq.split_counting_check(leb1, 8, [0.5], xs)
    assert report.passed
    assert set(np.unique(report.gaps)) <= {0, 1}


def test_split_rejects_cut_on_atom(dirac_half):
    with pytest.raises(ValueError, match="coincides"):
        lq.split_counting_check(dirac_half, None, [0.5], [0.1])


def test_split_rejects_bad_cuts(leb1):
    with pytest.raises(ValueError, match="inside"):
        lq.split_counting_check(leb1, 4, [0.0, 0.5], [0.1])
    with pytest.raises(ValueError, match="cut"):
        lq.split_counting_check(leb1, 4, [], [0.1])


def test_split_empty_piece_is_fine(quarter_pair):
    # cuts at 0.4 and 0.6 leave the middle piece without atoms
    report = lq.split_counting_check(quarter_pair, None, [0.4, 0.6],
                                     [0.001, 0.05, 0.2])
    assert report.passed
