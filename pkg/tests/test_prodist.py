"""Tests for the formal algebra of circle deltas and smooth densities."""

import numpy as np
import pytest

from detgreen.laurent import LaurentCocycle
from detgreen.prodist import (ProDistribution, circle_delta,
                              distributional_connection_apply, evaluate,
                              format_prodist, module_multiply, normalize,
                              parse_prodist, smooth_density, tensor_product)


def _delta(**kw):
    return ProDistribution.from_atom(circle_delta(**kw))


def _density(field, **kw):
    return ProDistribution.from_atom(smooth_density(field, **kw))


def test_level_floor():
    with pytest.raises(ValueError):
        ProDistribution(0, [])


def test_word_length_must_match_level():
    atom = circle_delta()
    with pytest.raises(ValueError):
        ProDistribution(2, [(1.0, (atom,))])


def test_normalize_idempotent():
    d = 2.0 * _delta() + _density("gauss") - 0.5 * _delta()
    n = normalize(d)
    assert normalize(n).words == n.words


def test_normalize_merges_and_drops():
    d = _delta() + _delta() - 2.0 * _delta()
    assert d.is_zero()
    assert format_prodist(d) == "0 [level 1]"


def test_prefactor_folds_into_coefficient():
    a = ProDistribution.from_atom(circle_delta(prefactor=3.0))
    b = 3.0 * _delta()
    assert a == b


def test_tensor_level_additivity():
    a = _delta()
    b = tensor_product(_density("re"), _delta(radius=0.5))
    t = tensor_product(a, b)
    assert t.level == a.level + b.level == 3


def test_tensor_bilinearity():
    a = _delta()
    b = _density("gauss")
    d = _delta(radius=0.5)
    lhs = tensor_product(2.0 * a + b, d)
    rhs = 2.0 * tensor_product(a, d) + tensor_product(b, d)
    assert lhs == rhs


def test_module_relation_evaluation_invariant():
    """Multiplying by a smooth field commutes with the tensor slot split."""
    a = _delta()
    d = _density("gauss")
    lhs = module_multiply(tensor_product(a, d), "re")
    rhs = tensor_product(module_multiply(a, "re"), d)
    assert lhs == rhs
    tests = [lambda z: z + 0.5, lambda z: np.exp(z.real)]
    np.testing.assert_allclose(evaluate(lhs, tests), evaluate(rhs, tests),
                               rtol=1e-12)


def test_module_multiply_constant():
    a = _delta()
    assert module_multiply(a, 4.0) == 4.0 * a


def test_evaluate_circle_average():
    # delta/2pi against a test function is the plain circle average
    d = _delta(radius=1.0)
    np.testing.assert_allclose(evaluate(d, [lambda z: 1.0]), 1.0, rtol=1e-14)
    np.testing.assert_allclose(evaluate(d, [lambda z: z]), 0.0, atol=1e-14)
    np.testing.assert_allclose(evaluate(d, [lambda z: np.abs(z) ** 2]), 1.0,
                               rtol=1e-14)
    # unnormalized delta carries the 2 pi
    raw = ProDistribution.from_atom(circle_delta(normalized=False))
    np.testing.assert_allclose(evaluate(raw, [lambda z: 1.0]), 2 * np.pi,
                               rtol=1e-14)


def test_evaluate_smooth_density():
    # integral of 1 over the unit disc is pi
    d = _density("one")
    np.testing.assert_allclose(evaluate(d, [lambda z: 1.0]), np.pi,
                               rtol=1e-12)
    # int |z|^2 dA = pi/2
    np.testing.assert_allclose(evaluate(d, [lambda z: np.abs(z) ** 2]),
                               np.pi / 2.0, rtol=1e-12)


def test_evaluate_levels_and_constants():
    t = tensor_product(_delta(), _density("one"))
    got = evaluate(t, [2.0, lambda z: 1.0])
    np.testing.assert_allclose(got, 2.0 * np.pi, rtol=1e-12)
    with pytest.raises(ValueError):
        evaluate(t, [1.0])


def test_evaluate_multilinear_in_sums():
    a = _delta()
    b = _density("gauss")
    test = [lambda z: z.real + 2.0]
    got = evaluate(2.0 * a + 3.0 * b, test)
    want = 2.0 * evaluate(a, test) + 3.0 * evaluate(b, test)
    np.testing.assert_allclose(got, want, rtol=1e-12)


def test_format_parse_round_trip():
    d = tensor_product(2.5j * ProDistribution.from_atom(
        circle_delta(radius=0.75, multiplier=("re", "zbar"))),
        _density("abs2"))
    d = d + tensor_product(_delta(), _density("gauss"))
    back = parse_prodist(format_prodist(d))
    assert back == d


def test_parse_zero_form():
    z = parse_prodist("0 [level 3]")
    assert z.level == 3
    assert z.is_zero()


def test_parse_rejects_garbage():
    with pytest.raises(ValueError):
        parse_prodist("garbage ^^")
    with pytest.raises(ValueError):
        parse_prodist("(1+0j) * delta(r=1)/2pi + (2+0j) * "
                      "delta(r=1)/2pi (x) delta(r=1)/2pi")


def test_connection_apply_zero_cocycle():
    f = LaurentCocycle({0: [[0.0]]})
    pair = distributional_connection_apply(f, 1.0, lambda z: 1.0)
    np.testing.assert_allclose(pair.dzbar, 0.0)
    np.testing.assert_allclose(pair.dz, 0.0)


def test_connection_apply_unit_cocycle():
    # f = 1: dzbar coefficient is the unit circle average 1, dz is -1
    f = LaurentCocycle({0: [[1.0]]})
    pair = distributional_connection_apply(f, 1.0, 1.0)
    np.testing.assert_allclose(pair.dzbar, [[1.0]], atol=1e-14)
    np.testing.assert_allclose(pair.dz, [[-1.0]], atol=1e-14)
    np.testing.assert_allclose(pair.dz, -np.conj(pair.dzbar), atol=1e-14)


def test_connection_apply_matrix_cocycle():
    # test function z kills all but the z^-1 term of f on the circle
    f = LaurentCocycle({-1: [[2.0, 0.0], [1j, 0.0]]})
    pair = distributional_connection_apply(f, 1.0, lambda z: z)
    np.testing.assert_allclose(pair.dzbar, [[2.0, 0.0], [1j, 0.0]],
                               atol=1e-13)
    # f^H z averages to zero: the conjugate transpose carries zbar^-1
    np.testing.assert_allclose(pair.dz, 0.0, atol=1e-13)


def test_connection_apply_pole_on_contour():
    # finite Laurent terms are regular on |z| = 1; a rational cocycle with a
    # pole on the contour must be rejected
    class RationalCocycle:
        def evaluate(self, z):
            with np.errstate(divide="ignore", invalid="ignore"):
                return 1.0 / (np.asarray(z, dtype=complex) - 1.0)

    with pytest.raises(ValueError):
        distributional_connection_apply(RationalCocycle(), 1.0, 1.0)