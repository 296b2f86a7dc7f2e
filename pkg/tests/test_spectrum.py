import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kdvlab import (
    NoKernelError,
    Scheme,
    SearchFailureError,
    assemble_operator,
    characteristic_function,
    critical_lengths,
    find_eigenvalues_determinant,
    is_critical,
    kernel_vector,
    make_grid,
    matrix_spectrum,
)
from kdvlab.grid import l2_norm
from kdvlab.manifold import phi_profile
from kdvlab.spectrum import _raw_determinant, cubic_roots, kernel_similarity, nearest_to_zero, spectral_gap

TWO_PI = 2 * math.pi


def test_critical_lengths_small_tables():
    np.testing.assert_allclose(critical_lengths(1).values, [TWO_PI])
    np.testing.assert_allclose(critical_lengths(2).values, [TWO_PI, TWO_PI * math.sqrt(7 / 3), 2 * TWO_PI])
    assert critical_lengths(2).values[1] == pytest.approx(9.5977, abs=1e-4)


@pytest.mark.parametrize("k", [1, 2, 5, 12])
def test_critical_lengths_structure(k):
    table = critical_lengths(k)
    assert np.all(np.diff(table.values) > 0)
    assert table.values[0] == pytest.approx(TWO_PI)
    # brute force over all ordered pairs, symmetric in (j, l)
    brute = sorted({round(TWO_PI * math.sqrt((j * j + l * l + j * l) / 3), 10) for j in range(1, k + 1) for l in range(1, k + 1)})
    np.testing.assert_allclose(table.values, brute, atol=1e-9)


def test_is_critical():
    assert is_critical(TWO_PI, 5, 1e-9)
    assert not is_critical(math.pi, 5, 1e-9)
    assert is_critical(9.5977, 5, 1e-3)


def test_characteristic_function_at_zero():
    assert abs(characteristic_function(0, TWO_PI)) <= 1e-10
    assert abs(characteristic_function(0, 2 * TWO_PI)) <= 1e-10
    assert abs(characteristic_function(0, math.pi)) > 0.1
    # symbolic value at lam = 0 is 1 - cos L
    for length in (math.pi, 3.0, 1.0, 7.5):
        assert characteristic_function(0, length) == pytest.approx(1 - math.cos(length), abs=1e-12)


def _exponential_basis_determinant(lam, length):
    """Boundary determinant in the basis exp(mu_j x), divided by the Vandermonde."""
    mu = cubic_roots(lam)
    m = np.array([np.ones(3), np.exp(mu * length), mu * np.exp(mu * length)])
    vander = np.array([np.ones(3), mu, mu**2])
    return np.linalg.det(m) / np.linalg.det(vander)


@pytest.mark.parametrize("lam", [0.3 + 1.1j, -0.5 + 2j, 1.7 - 0.4j, -0.88 + 0.01j, 4j])
@pytest.mark.parametrize("length", [math.pi, TWO_PI, 9.0])
def test_determinant_matches_exponential_basis(lam, length):
    ref = _exponential_basis_determinant(lam, length)
    assert complex(_raw_determinant(lam, length)) == pytest.approx(ref, rel=1e-8, abs=1e-12)


def test_determinant_derivative_finite_difference():
    lam, length, eps = 0.2 - 0.7j, TWO_PI, 1e-6
    f, df = _raw_determinant(lam, length, derivative=True)
    fd = (_raw_determinant(lam + eps, length) - _raw_determinant(lam - eps, length)) / (2 * eps)
    assert df == pytest.approx(fd, rel=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.floats(-3, 1), st.floats(-5, 5), st.floats(0.5, 15))
def test_conjugate_symmetry(re, im, length):
    lam = complex(re, im)
    f = characteristic_function(lam, length)
    assert characteristic_function(lam.conjugate(), length) == pytest.approx(f.conjugate(), rel=1e-9, abs=1e-14)


def test_determinant_roots_at_two_pi():
    result = find_eigenvalues_determinant(TWO_PI, (-1, 0.1), (-5, 5), 8)
    values = result.eigenvalues
    assert np.min(np.abs(values)) <= 1e-10
    assert result.growth_bound <= 1e-8
    for lam in values:
        assert abs(characteristic_function(lam, TWO_PI)) <= 1e-10
    gap8 = spectral_gap(result, 1e-8)
    gap16 = spectral_gap(find_eigenvalues_determinant(TWO_PI, (-1, 0.1), (-5, 5), 16), 1e-8)
    assert gap8 < 0
    assert gap16 == pytest.approx(gap8, rel=1e-6)


def test_determinant_no_root_at_pi():
    result = find_eigenvalues_determinant(math.pi, (-1, 0.1), (-5, 5), 8)
    assert all(lam.real < 0 for lam in result.eigenvalues)
    wide = find_eigenvalues_determinant(math.pi, (-3, 0.1), (-5, 5), 8)
    assert wide.growth_bound < -1


def test_imaginary_roots_at_second_critical_length():
    length = TWO_PI * math.sqrt(7 / 3)
    result = find_eigenvalues_determinant(length, (-1, 0.1), (-5, 5), 8)
    imaginary = [lam for lam in result.eigenvalues if abs(lam.real) < 1e-9]
    assert len(imaginary) >= 2
    assert result.growth_bound <= 1e-8


def test_search_failure_is_reported(monkeypatch):
    import kdvlab.spectrum as spectrum

    monkeypatch.setattr(spectrum, "_newton", lambda seed, length, max_iter=60: None)
    with pytest.raises(SearchFailureError):
        find_eigenvalues_determinant(TWO_PI, (-1, 0.1), (-5, 5), 8)


def test_matrix_spectrum_pairs():
    g = make_grid(TWO_PI, 256)
    op = assemble_operator(g)
    result = matrix_spectrum(op)
    assert len(result.pairs) == 256
    re = result.eigenvalues.real
    assert np.all(np.diff(re) <= 0)
    assert result.growth_bound == re[0]
    a = op.toarray()
    for pair in result.pairs[:20]:
        vec = pair.vector.values
        assert l2_norm(pair.vector) == pytest.approx(1.0, rel=1e-12)
        assert np.linalg.norm(a @ vec - pair.value * vec) <= 1e-8 * np.linalg.norm(vec) * max(1, np.abs(a).max() * 1e-6)


def test_matrix_kernel_at_two_pi():
    g = make_grid(TWO_PI, 1024)
    result = matrix_spectrum(assemble_operator(g))
    top = nearest_to_zero(result)
    assert abs(top.value) <= g.h
    assert kernel_similarity(top) >= 0.999
    assert all(p.value.real < 0 for p in result.pairs if p is not top)


def test_kernel_vector():
    g = make_grid(TWO_PI, 512)
    v = kernel_vector(g)
    assert l2_norm(v - phi_profile(g)) <= 0.01
    with pytest.raises(NoKernelError):
        kernel_vector(make_grid(math.pi, 512))


def test_growth_bound_nonpositive_across_lengths():
    for length in (1.0, math.pi, TWO_PI, 8.0, TWO_PI * math.sqrt(7 / 3)):
        result = matrix_spectrum(assemble_operator(make_grid(length, 128)))
        assert result.growth_bound <= 1e-8
