"""Tests for finite matrix-valued Laurent series."""

import numpy as np
import pytest

from detgreen.laurent import LaurentCocycle, eval_on_circle, laurent_product


def test_requires_at_least_one_term():
    with pytest.raises(ValueError):
        LaurentCocycle({})


def test_coefficient_shapes_must_agree():
    with pytest.raises(ValueError):
        LaurentCocycle({-1: [[1.0]], 0: [[1.0, 0.0], [0.0, 1.0]]})


def test_rank_cap():
    big = np.eye(5)
    with pytest.raises(ValueError):
        LaurentCocycle({0: big})


def test_window_defaults_to_term_span():
    f = LaurentCocycle({-2: [[1.0]], 3: [[2.0]]})
    assert f.window == (-2, 3)
    assert f.min_degree() == -2
    assert f.max_degree() == 3


def test_terms_outside_declared_window_rejected():
    with pytest.raises(ValueError):
        LaurentCocycle({-2: [[1.0]]}, window=(-1, 1))
    with pytest.raises(ValueError):
        LaurentCocycle({0: [[1.0]]}, window=(1, 0))


def test_trace_free_enforced():
    traceless = [[1.0, 2.0], [3.0, -1.0]]
    f = LaurentCocycle({-1: traceless}, trace_free=True)
    assert f.trace_free
    with pytest.raises(ValueError):
        LaurentCocycle({-1: [[1.0, 0.0], [0.0, 1.0]]}, trace_free=True)


def test_coefficient_lookup():
    f = LaurentCocycle({-1: [[2.0]], 1: [[0.5j]]})
    assert f.coefficient(-1)[0, 0] == 2.0
    assert f.coefficient(1)[0, 0] == 0.5j
    # absent degree gives the zero matrix, not an error
    assert np.all(f.coefficient(0) == 0)
    assert f.coefficient(0).shape == (1, 1)


def test_evaluate_matches_direct_sum():
    f = LaurentCocycle({-1: [[1.0, 0.0], [0.0, -1.0]],
                        2: [[0.0, 1.0j], [0.0, 0.0]]})
    z = 0.7 * np.exp(1j * np.linspace(0.1, 5.9, 13))
    got = f.evaluate(z)
    want = (z ** -1)[:, None, None] * np.array([[1.0, 0.0], [0.0, -1.0]]) \
        + (z ** 2)[:, None, None] * np.array([[0.0, 1.0j], [0.0, 0.0]])
    np.testing.assert_allclose(got, want, rtol=1e-14)


def test_scaled_and_plus():
    f = LaurentCocycle({-1: [[1.0]]})
    g = LaurentCocycle({-1: [[1.0]], 1: [[2.0]]})
    h = f.scaled(3.0).plus(g)
    assert h.coefficient(-1)[0, 0] == 4.0
    assert h.coefficient(1)[0, 0] == 2.0
    assert h.window == (-1, 1)


def test_plus_rank_mismatch():
    f = LaurentCocycle({0: [[1.0]]})
    g = LaurentCocycle({0: np.eye(2)})
    with pytest.raises(ValueError):
        f.plus(g)


def test_json_round_trip():
    f = LaurentCocycle({-2: [[1.0 + 2.0j, 0.0], [0.5, -1.0 - 2.0j]],
                        1: [[0.0, 1.0], [0.0, 0.0]]}, trace_free=True)
    g = LaurentCocycle.from_json(f.to_json())
    assert g == f
    assert g.trace_free


def test_from_json_rejects_inconsistent_rank():
    f = LaurentCocycle({0: [[1.0]]})
    text = f.to_json().replace('"rank": 1', '"rank": 2')
    with pytest.raises(ValueError):
        LaurentCocycle.from_json(text)


def test_eval_on_circle_agrees_with_evaluate():
    f = LaurentCocycle({-1: [[1.0]], 3: [[0.25]]})
    vals = eval_on_circle(f, 0.8, 32)
    th = 2.0 * np.pi * np.arange(32) / 32
    z = 0.8 * np.exp(1j * th)
    assert vals.shape == (32, 1, 1)
    np.testing.assert_allclose(vals, f.evaluate(z), rtol=1e-14)


def test_laurent_product_truncates_to_window():
    f = LaurentCocycle({-1: [[1.0]], 1: [[2.0]]})
    g = LaurentCocycle({-1: [[3.0]]})
    p = laurent_product(f, g, window=(-2, 0))
    assert p.coefficient(-2)[0, 0] == 3.0
    assert p.coefficient(0)[0, 0] == 6.0
    assert p.window == (-2, 0)
    # products landing outside the window are clipped silently
    q = laurent_product(f, g, window=(-2, -1))
    assert q.coefficient(0)[0, 0] == 0.0


def test_coefficients_are_immutable():
    f = LaurentCocycle({0: [[1.0]]})
    for _, c in f.terms():
        with pytest.raises(ValueError):
            c[0, 0] = 5.0
