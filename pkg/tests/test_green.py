"""Tests for Green functions, the pairing kernel and its coefficients."""

import numpy as np
import pytest

from detgreen.green import (AliasingError, GreenCoeffTable, GreenModel,
                            coeff_table, green_value, pair_kernel,
                            renormalized_green, reproduction_constant)


def test_unknown_model_rejected():
    with pytest.raises(ValueError):
        green_value("annulus", 0.1, 0.2)
    with pytest.raises(ValueError):
        GreenModel("annulus")


@pytest.mark.parametrize("model", ["disc", "torus"])
def test_green_symmetric(model):
    rng = np.random.default_rng(4)
    P = 0.35 * (rng.standard_normal(6) + 1j * rng.standard_normal(6))
    Q = 0.35 * (rng.standard_normal(6) + 1j * rng.standard_normal(6))
    np.testing.assert_allclose(green_value(model, P, Q),
                               green_value(model, Q, P), atol=1e-12)


def test_disc_green_vanishes_on_boundary():
    th = np.linspace(0.3, 5.9, 7)
    P = np.exp(1j * th)
    np.testing.assert_allclose(green_value("disc", P, 0.3 + 0.2j), 0.0,
                               atol=1e-12)


def test_disc_green_log_singularity():
    P, Q = 0.3, 0.3 + 1e-8
    got = green_value("disc", P, Q)
    assert abs(got - np.log(1e-8)) < 0.1


def test_renormalized_green_finite_on_diagonal():
    for model in ("disc", "torus"):
        v = renormalized_green(model, 0.2 + 0.1j, 0.2 + 0.1j)
        assert np.isfinite(v)
    # disc diagonal value is -log(1 - |P|^2)
    P = 0.4 + 0.3j
    np.testing.assert_allclose(renormalized_green("disc", P, P),
                               -np.log(1 - abs(P) ** 2), rtol=1e-12)


def test_renormalized_green_matches_subtracted_log():
    rng = np.random.default_rng(9)
    for model in ("disc", "torus"):
        P = 0.3 * (rng.standard_normal(5) + 1j * rng.standard_normal(5))
        Q = 0.3 * (rng.standard_normal(5) + 1j * rng.standard_normal(5))
        direct = green_value(model, P, Q) - np.log(np.abs(P - Q))
        np.testing.assert_allclose(renormalized_green(model, P, Q), direct,
                                   atol=1e-10)


def test_torus_green_mean_zero():
    n = 128
    x = (np.arange(n) + 0.5) / n - 0.5
    X, Y = np.meshgrid(x, x, indexing="ij")
    z = (X + 1j * Y).ravel()
    vals = green_value("torus", z, 0.1 + 0.05j)
    assert abs(np.mean(vals)) < 1e-8


def test_torus_green_periodic():
    P = 0.13 + 0.21j
    Q = -0.2 + 0.07j
    base = green_value("torus", P, Q)
    np.testing.assert_allclose(green_value("torus", P + 1.0, Q), base,
                               rtol=1e-12)
    np.testing.assert_allclose(green_value("torus", P, Q + 1j), base,
                               rtol=1e-12)


def test_pair_kernel_derivative_of_renormalized_green():
    """K equals the mixed complex derivative of the renormalized kernel.

    Checked by nested central finite differences in the two complex
    directions of P and conj(Q).
    """
    step = 1e-5
    for model in ("disc", "torus"):
        P, Q = 0.21 + 0.11j, -0.08 + 0.17j

        def g(p, q):
            return renormalized_green(model, p, q)

        # d/dP = (d/dx - i d/dy)/2 on P, d/dconj(Q) = (d/dx + i d/dy)/2 on Q
        def dP(q):
            gx = (g(P + step, q) - g(P - step, q)) / (2 * step)
            gy = (g(P + 1j * step, q) - g(P - 1j * step, q)) / (2 * step)
            return 0.5 * (gx - 1j * gy)

        gx = (dP(Q + step) - dP(Q - step)) / (2 * step)
        gy = (dP(Q + 1j * step) - dP(Q - 1j * step)) / (2 * step)
        fd = 0.5 * (gx + 1j * gy)
        np.testing.assert_allclose(pair_kernel(model, P, Q), fd,
                                   rtol=2e-5, atol=2e-5)


def test_disc_coeff_diagonal():
    table = coeff_table("disc", 4)
    diag = [table.entry(n, n).real for n in range(5)]
    np.testing.assert_allclose(diag, [0.5, 1.0, 1.5, 2.0, 2.5], rtol=1e-9)
    off = max(abs(table.entry(n, m)) for n in range(5) for m in range(5)
              if n != m)
    assert off < 1e-10


def test_coeff_table_radius_independent():
    t1 = coeff_table("disc", 6, radius=0.4)
    t2 = coeff_table("disc", 6, radius=0.6)
    np.testing.assert_allclose(t1.values, t2.values, atol=1e-8)


def test_coeff_table_aliasing_guard():
    # tiny radius amplifies rounding noise past the doubling check
    with pytest.raises(AliasingError):
        coeff_table("disc", 8, radius=0.05)


def test_coeff_table_needs_enough_samples():
    with pytest.raises(ValueError):
        coeff_table("disc", 8, samples=16)


def test_coeff_entry_out_of_range_is_zero():
    table = coeff_table("disc", 2)
    assert table.entry(3, 0) == 0j
    assert table.entry(-1, 0) == 0j


def test_coeff_csv_round_trip(tmp_path):
    table = coeff_table("disc", 3)
    path = tmp_path / "coeffs.csv"
    table.to_csv(path)
    back = GreenCoeffTable.from_csv(path)
    assert back.order == 3
    np.testing.assert_allclose(back.values, table.values, atol=1e-17)


def test_reproduction_constant_disc():
    pairs = [(0.1 + 0.2j, -0.15 + 0.05j), (0.25, 0.1j), (-0.2j, 0.3)]
    kappa, spread = reproduction_constant("disc", pairs, resolution=48)
    np.testing.assert_allclose(kappa, 2.0 / np.pi, rtol=0.01)
    assert spread < 0.01


def test_reproduction_constant_rejects_non_reproducing_kernel():
    pairs = [(0.1, 0.2), (0.3j, -0.1)]
    bad = lambda P, Q: np.exp(np.abs(np.asarray(P) - np.asarray(Q)))
    with pytest.raises(ArithmeticError):
        reproduction_constant("disc", pairs, resolution=32, kernel=bad)
