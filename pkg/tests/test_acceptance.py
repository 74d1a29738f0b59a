"""Acceptance gate: every advertised numeric guarantee of the package,
one test per guarantee, at the advertised tolerances and runtime budgets.

The tests drive the same check functions that the `selftest` command runs,
then assert the raw measured numbers against the shipped thresholds, so a
weakened check default cannot slip through.
"""

import time

from detgreen import selftest
from detgreen.cli import main


def timed(func, **kwargs):
    t0 = time.perf_counter()
    out = func(**kwargs)
    return out, time.perf_counter() - t0


def test_finite_spectrum_determinant_is_exact():
    # {1, 2, 3}: det' = 6 and zeta'(0) = -log 6, forced analytically
    out, dt = timed(selftest.check_small_spectrum_determinant)
    assert out["rel_err_det"] <= 1e-8
    assert out["rel_err_zeta"] <= 1e-8
    assert out["passed"]
    assert dt < 1.0


def test_integer_ladder_zeta_prime_matches_closed_form():
    # lambda_k = k truncated at 2000: zeta'(0) -> -log(2 pi)/2
    out, dt = timed(selftest.check_harmonic_ladder_zeta)
    assert out["count"] == 2000
    assert out["abs_err"] <= 1e-3
    assert out["passed"]
    assert dt < 10.0


def test_disc_ground_eigenvalue_converges_to_bessel_zero():
    out, dt = timed(selftest.check_disc_ground_eigenvalue)
    assert out["resolutions"][-1] >= 96
    assert out["rel_errors"][-1] <= 0.01
    assert out["order"] >= 1.8
    assert out["passed"]
    assert dt < 60.0


def test_variation_trace_matches_finite_differences():
    # five random smooth generators, three parameters, two heat cutoffs:
    # the eigenbasis variation trace against centered differences of the
    # assembled operator, and the log-determinant derivative identity
    out, dt = timed(selftest.check_variation_identities)
    assert out["resolution"] == 48
    assert out["generators"] == 5
    assert out["s_values"] == [-0.2, 0.0, 0.3]
    assert out["eps_values"] == [0.01, 0.05]
    assert out["fd_step"] == 1e-4
    assert out["worst_rel_heat"] <= 1e-6
    assert out["worst_rel_logdet"] <= 1e-6
    assert out["passed"]
    assert dt < 120.0


def test_node_and_face_laplacians_share_nonzero_spectrum():
    out, _ = timed(selftest.check_two_sided_spectra)
    assert out["counts_match"]
    assert out["worst_rel_spectrum"] <= 1e-8
    assert out["gram_deviation"] <= 1e-8
    assert out["passed"]


def test_disc_kernel_coefficients_closed_form():
    # diagonal (n+1)/2 through order 8, vanishing off-diagonal, and no
    # dependence on the extraction radius
    out, _ = timed(selftest.check_disc_coefficients)
    assert out["order"] == 8
    assert out["diag_err"] <= 1e-6
    assert out["offdiag_err"] <= 1e-8
    assert out["radius_dependence"] <= 1e-6
    assert out["passed"]


def test_pairing_series_agrees_with_contour_quadrature():
    out, dt = timed(selftest.check_pairing_series_vs_contour)
    assert out["pairs"] == 20
    assert out["worst_rel"] <= 1e-6
    assert out["pinned_rel_err"] <= 1e-6
    assert out["passed"]
    assert dt < 60.0


def test_kernel_reproduction_constant_two_over_pi():
    out, _ = timed(selftest.check_reproduction_constant)
    assert out["pair_count"] >= 3
    assert out["disc_rel_err"] <= 0.01
    assert out["disc_spread"] <= 0.01
    assert out["passed"]


def test_torus_reduction_bump_independent():
    out, _ = timed(selftest.check_torus_reduction)
    assert out["bump_ratio"] <= 0.01
    assert out["form_diff"] <= 0.01
    assert out["trivial_norm"] <= 10.0 * out["grid_tol"]
    assert out["passed"]


def test_distribution_algebra_properties_hold_exactly():
    # 1000 randomized normal-form property checks, zero failures allowed
    out, _ = timed(selftest.check_distribution_algebra)
    assert out["property_checks"] == 1000
    assert out["failures"] == 0
    assert out["evaluation_err"] <= 1e-10
    assert out["passed"]


def test_gauge_identity_residual_second_order():
    out, _ = timed(selftest.check_gauge_residual_order)
    assert out["rank1_order"] >= 2.0
    assert out["rank2_order"] >= 2.0
    assert out["passed"]


def test_selftest_reports_are_deterministic(tmp_path, capsys):
    d1 = tmp_path / "run1"
    d2 = tmp_path / "run2"
    d1.mkdir()
    d2.mkdir()
    args = ["selftest", "--profile", "quick", "--seed", "20260815"]
    assert main(args + ["--out-dir", str(d1)]) == 0
    capsys.readouterr()
    assert main(args + ["--out-dir", str(d2)]) == 0
    capsys.readouterr()
    b1 = (d1 / "selftest_report.json").read_bytes()
    b2 = (d2 / "selftest_report.json").read_bytes()
    assert b1 == b2
