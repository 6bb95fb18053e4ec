import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from popspace import (
    Exponent,
    InputError,
    check_norm_lower_inequality,
    direct_sum_combine,
    factnorm1,
    factnorm1_lower,
    factnorm1_upper,
    factnorm2_upper,
    nuclear_oracle_p2,
    opnorm_upper,
    sum_combine,
    vec_p_norm,
)
from popspace.factnorm import dual_witness, make_factorization, trivial_factorization

from conftest import crandn

FAST = dict(restarts=1, outer=5, polish_iters=0)


def test_nuclear_oracle():
    assert nuclear_oracle_p2(np.diag([3.0, -1.0, 0.5j])) == pytest.approx(4.5, rel=1e-15)
    assert nuclear_oracle_p2(np.zeros((2, 2))) == 0.0


@pytest.mark.parametrize("p", [1.5, 3.0, 4.0])
def test_identity_value_is_n(p):
    for n in (1, 2, 3):
        est = factnorm1(np.eye(n), p, restarts=1, outer=10)
        assert est.lower == pytest.approx(n, rel=1e-6)
        assert est.upper == pytest.approx(n, rel=1e-6)


def test_identity_witness_is_identity():
    w = dual_witness(np.eye(3), np.eye(3), 3)
    assert w.bound == pytest.approx(3.0, rel=1e-14)


def test_trivial_factorization_value():
    v = np.array([[1, 2], [3, 4]], dtype=complex)
    e = Exponent(3)
    fac = trivial_factorization(v, e)
    n = 2
    expected = n ** (1 / e.p_conj) * opnorm_upper(v, e) * n ** (1 / e.p)
    assert fac.value == pytest.approx(expected, rel=1e-14)
    assert fac.reconstruction_error(v) == 0.0


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_rank_one_closes(rng, p):
    e = Exponent(p)
    x, y = crandn(rng, 3), crandn(rng, 3)
    exact = vec_p_norm(x, e.p_conj) * vec_p_norm(y, e.p)
    est = factnorm1(np.outer(x, y), e, restarts=1, outer=10)
    assert est.lower <= exact * (1 + 1e-9)
    assert est.upper >= exact * (1 - 1e-9)
    assert est.upper - est.lower <= 1e-4 * exact


def test_p2_matches_nuclear(rng):
    for n in (2, 3):
        v = crandn(rng, n, n)
        nuc = nuclear_oracle_p2(v)
        est = factnorm1(v, 2.0, restarts=1, outer=10)
        assert est.lower <= nuc * (1 + 1e-9) and est.upper >= nuc * (1 - 1e-9)
        assert est.upper <= 1.02 * nuc and est.lower >= 0.98 * nuc


def test_upper_factorization_reconstructs(rng):
    v = crandn(rng, 3, 3)
    est = factnorm1_upper(v, 3, **FAST)
    fac = est.witness
    assert fac.reconstruction_error(v) <= 1e-8
    assert fac.value == pytest.approx(est.upper, rel=1e-12)


def test_zero_matrix():
    est = factnorm1(np.zeros((2, 2)), 3)
    assert est.lower == 0.0 and est.upper == 0.0


def test_rejects_non_square():
    with pytest.raises(InputError):
        factnorm1_upper(np.ones((2, 3)), 3)


@settings(max_examples=10)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1.5, 3.0]), st.integers(1, 3))
def test_sandwich_property(seed, p, n):
    v = crandn(np.random.default_rng(seed), n, n)
    est = factnorm1(v, p, restarts=1, outer=5, polish_iters=0, ascent_iters=5)
    assert est.lower <= est.upper * (1 + 1e-9)


@settings(max_examples=10)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1.5, 4.0]),
       st.complex_numbers(min_magnitude=1e-2, max_magnitude=1e2, allow_nan=False, allow_infinity=False))
def test_homogeneity_via_scaled_factorization(seed, p, c):
    v = crandn(np.random.default_rng(seed), 2, 2)
    fac = factnorm1_upper(v, p, **FAST).witness
    scaled = fac.scaled(c)
    assert scaled.value == pytest.approx(abs(c) * fac.value, rel=1e-12)
    assert scaled.reconstruction_error(c * v) <= 1e-8


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1.2, 1.5, 3.0, 4.0]), st.integers(1, 3), st.integers(1, 3))
def test_direct_sum_subadditive(seed, p, n1, n2):
    rng = np.random.default_rng(seed)
    f1 = make_factorization(crandn(rng, n1, n1), crandn(rng, n1, n1), crandn(rng, n1, n1), p)
    f2 = make_factorization(crandn(rng, n2, n2), crandn(rng, n2, n2), crandn(rng, n2, n2), p)
    g = direct_sum_combine(f1, f2)
    assert g.value <= f1.value + f2.value + 1e-9 * max(1.0, f1.value + f2.value)
    expected = np.zeros((n1 + n2, n1 + n2), dtype=complex)
    expected[:n1, :n1], expected[n1:, n1:] = f1.product(), f2.product()
    assert np.abs(g.product() - expected).max() <= 1e-10 * np.abs(expected).max()


@settings(max_examples=15)
@given(st.integers(0, 2**32 - 1), st.sampled_from([1.5, 3.0]), st.integers(1, 3))
def test_sum_combine_triangle(seed, p, n):
    rng = np.random.default_rng(seed)
    f1 = make_factorization(crandn(rng, n, 2), crandn(rng, 2, 2), crandn(rng, 2, n), p)
    f2 = make_factorization(crandn(rng, n, 3), crandn(rng, 3, 3), crandn(rng, 3, n), p)
    g = sum_combine(f1, f2)
    assert g.value <= (f1.value + f2.value) * (1 + 1e-12)
    target = f1.product() + f2.product()
    assert np.abs(g.product() - target).max() <= 1e-10 * np.abs(target).max()


def test_ordering_against_factnorm2(rng):
    for p in (1.5, 3.0):
        v = crandn(rng, 3, 3)
        lo = factnorm1_lower(v, p, restarts=1, outer=5, ascent_iters=5).lower
        up = factnorm2_upper(v, p, restarts=1, iters=20).upper
        assert lo <= up * (1 + 1e-9)


def test_factnorm2_rank_one_p2(rng):
    x, y = crandn(rng, 3), crandn(rng, 3)
    up = factnorm2_upper(np.outer(x, y), 2.0).upper
    assert up >= np.linalg.norm(x) * np.linalg.norm(y) * (1 - 1e-9)


@pytest.mark.parametrize("p", [1.5, 3.0])
def test_norm_lower_inequality(rng, p):
    for n in (1, 2, 3):
        rep = check_norm_lower_inequality(crandn(rng, n, n), p, restarts=1, outer=3, polish_iters=0)
        assert rep.passed
