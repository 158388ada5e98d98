import itertools
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bosonchain.errors import BasisSizeError, SectorError
from bosonchain.fock import (
    Capped,
    FixedTotal,
    MaxTotal,
    annihilation_op,
    apply_polynomial,
    check_hermitian,
    creation_op,
    enumerate_basis,
    ladder_word,
    number_op,
)
from bosonchain.functions import MonomialFunction, parse_function


# ---------------------------------------------------------------- enumeration

def test_vacuum_only_basis():
    b = enumerate_basis(1, FixedTotal(0))
    assert b.dim == 1
    assert b.states.tolist() == [[0]]


def test_single_boson_sector_size():
    assert enumerate_basis(5, FixedTotal(1)).dim == 5


def test_capped_size():
    assert enumerate_basis(4, Capped(2)).dim == 81


@pytest.mark.parametrize("M,n", [(1, 3), (3, 2), (4, 3), (6, 2), (5, 4)])
def test_fixed_total_size_is_binomial(M, n):
    assert enumerate_basis(M, FixedTotal(n)).dim == comb(M + n - 1, n)


@pytest.mark.parametrize("M,n", [(2, 3), (3, 4), (4, 2)])
def test_capped_size_is_power(M, n):
    assert enumerate_basis(M, Capped(n)).dim == (n + 1) ** M


def test_max_total_is_union_of_fixed_sectors():
    b = enumerate_basis(4, MaxTotal(3))
    assert b.dim == sum(comb(4 + n - 1, n) for n in range(4))
    assert set(map(tuple, b.states.tolist())) == {
        s for s in itertools.product(range(4), repeat=4) if sum(s) <= 3
    }


def test_capped_with_auxiliary_cap():
    b = enumerate_basis(3, Capped(2, last_max=4))
    assert b.dim == 3 * 3 * 5
    assert b.states[:, -1].max() == 4
    assert b.states[:, :2].max() == 2


@pytest.mark.parametrize(
    "M,sector", [(3, FixedTotal(3)), (4, MaxTotal(2)), (3, Capped(3)), (2, Capped(2, last_max=5))]
)
def test_ordering_round_trip_and_sector_rule(M, sector):
    b = enumerate_basis(M, sector)
    rows = [tuple(s) for s in b.states.tolist()]
    assert rows == sorted(rows)
    assert len(set(rows)) == len(rows)
    for i, s in enumerate(rows):
        assert b.index(s) == i
    assert np.all(b.states >= 0)
    if isinstance(sector, FixedTotal):
        assert np.all(b.totals == sector.n)
    elif isinstance(sector, MaxTotal):
        assert np.all(b.totals <= sector.n)
    else:
        assert np.all(b.states <= b.mode_caps)


def test_capped_order_matches_kron_order():
    b = enumerate_basis(3, Capped(2))
    assert [tuple(s) for s in b.states.tolist()] == list(itertools.product(range(3), repeat=3))


def test_size_cap_error():
    with pytest.raises(BasisSizeError) as info:
        enumerate_basis(12, Capped(3), max_dim=1000)
    assert info.value.dim == 4**12
    assert info.value.cap == 1000


def test_default_cap_is_enforced():
    with pytest.raises(BasisSizeError):
        enumerate_basis(10, Capped(4))  # 5**10 states


def test_lookup_of_missing_state():
    b = enumerate_basis(3, FixedTotal(2))
    assert b.lookup([[1, 1, 1], [0, 0, 2], [-1, 3, 0]]).tolist() == [-1, b.index((0, 0, 2)), -1]
    with pytest.raises(KeyError):
        b.index((3, 0, 0))


def test_enumeration_is_deterministic():
    a = enumerate_basis(4, FixedTotal(3))
    enumerate_basis.cache_clear()
    b = enumerate_basis(4, FixedTotal(3))
    assert a == b
    assert np.array_equal(a.states, b.states)


def test_states_are_read_only():
    b = enumerate_basis(3, FixedTotal(1))
    with pytest.raises(ValueError):
        b.states[0, 0] = 5


# ---------------------------------------------------------------- ladder ops

def test_creation_truncates_at_cap():
    b = enumerate_basis(1, Capped(1))
    bd = creation_op(0, b).toarray()
    assert np.allclose(bd @ b.vector([0]), b.vector([1]))
    assert np.allclose(bd @ b.vector([1]), 0)


def test_ladder_matrix_element_sqrt_two():
    b = enumerate_basis(1, Capped(3))
    bd = creation_op(0, b).toarray()
    assert bd[b.index([2]), b.index([1])] == pytest.approx(np.sqrt(2))


@pytest.mark.parametrize("M,n_max", [(1, 3), (2, 3), (3, 2), (4, 1)])
def test_canonical_commutators_below_cap(M, n_max):
    b = enumerate_basis(M, Capped(n_max))
    lower = [annihilation_op(k, b).toarray() for k in range(M)]
    raise_ = [creation_op(k, b).toarray() for k in range(M)]
    below = np.all(b.states < n_max, axis=1)
    for i in range(M):
        for j in range(M):
            comm = lower[i] @ raise_[j] - raise_[j] @ lower[i]
            expected = np.eye(b.dim) if i == j else np.zeros((b.dim, b.dim))
            assert np.allclose(comm[np.ix_(below, below)], expected[np.ix_(below, below)], atol=1e-14)
            assert np.allclose(lower[i] @ lower[j], lower[j] @ lower[i], atol=1e-14)


def test_annihilation_is_exact_adjoint():
    b = enumerate_basis(3, Capped(3))
    for k in range(3):
        a = annihilation_op(k, b).toarray()
        ad = creation_op(k, b).toarray()
        assert np.array_equal(a, ad.conj().T)


def test_creation_maps_fixed_total_up_one_without_leakage():
    b2 = enumerate_basis(4, FixedTotal(2))
    b3 = enumerate_basis(4, FixedTotal(3))
    for k in range(4):
        op = creation_op(k, b2)
        assert op.shape == (b3.dim, b2.dim)
        rows, cols = op.nonzero()
        assert np.all(b3.totals[rows] == b2.totals[cols] + 1)
        # ||b_k^dag |s>||^2 = n_k + 1 for every basis state: nothing dropped
        col_norms = np.asarray(abs(op).power(2).sum(axis=0)).ravel()
        assert np.allclose(col_norms, b2.states[:, k] + 1)


def test_annihilation_of_vacuum_sector_rejected():
    with pytest.raises(SectorError):
        annihilation_op(0, enumerate_basis(3, FixedTotal(0)))


def test_site_out_of_range():
    b = enumerate_basis(3, FixedTotal(1))
    with pytest.raises(IndexError):
        creation_op(3, b)
    with pytest.raises(IndexError):
        number_op(-1, b)


def test_word_leaving_number_bounded_basis_raises():
    b = enumerate_basis(3, MaxTotal(1))
    with pytest.raises(SectorError):
        ladder_word(b, [(0, +1), (1, +1)], truncate=False)


def test_number_operator():
    b = enumerate_basis(3, FixedTotal(2))
    vac = enumerate_basis(3, FixedTotal(0))
    assert number_op(1, vac).toarray()[0, 0] == 0
    n2 = number_op(1, b).toarray()
    assert n2[b.index([0, 2, 0]), b.index([0, 2, 0])] == 2
    total = sum(number_op(k, b) for k in range(3)).toarray()
    assert np.allclose(total, 2 * np.eye(b.dim))


def test_number_equals_adag_a():
    b = enumerate_basis(3, Capped(2))
    for k in range(3):
        nk = creation_op(k, b) @ annihilation_op(k, b)
        assert np.allclose(nk.toarray(), number_op(k, b).toarray())


def test_check_hermitian():
    assert check_hermitian(np.array([[1, 1j], [-1j, 2]])) == 0
    with pytest.raises(ValueError):
        check_hermitian(np.array([[0, 1], [0, 0]]))


# ---------------------------------------------------------------- polynomials

def test_two_term_quadratic_on_vacuum():
    a, c = 0.6, 0.8
    b = enumerate_basis(4, MaxTotal(2))
    f = parse_function("a*x1^2+c*x4^2", {"a": a, "c": c})
    out = apply_polynomial(f, b.vacuum(), b)
    expected = np.zeros(b.dim, dtype=complex)
    expected[b.index([2, 0, 0, 0])] = a * np.sqrt(2)
    expected[b.index([0, 0, 0, 2])] = c * np.sqrt(2)
    assert np.allclose(out, expected, atol=1e-15)


def test_constant_function_is_identity(rng):
    b = enumerate_basis(3, MaxTotal(2))
    psi = rng.normal(size=b.dim) + 1j * rng.normal(size=b.dim)
    f = MonomialFunction.from_mapping({(0, 0, 0): 1.0})
    assert np.allclose(apply_polynomial(f, psi, b), psi)


def test_single_creation_in_fixed_total():
    b0 = enumerate_basis(3, FixedTotal(0))
    out = apply_polynomial(MonomialFunction.monomial(1), b0.vacuum(), b0)
    b1 = enumerate_basis(3, FixedTotal(1))
    assert np.allclose(out, b1.vector([1, 0, 0]))


def test_fixed_total_rejects_mixed_degrees():
    b0 = enumerate_basis(3, FixedTotal(0))
    with pytest.raises(SectorError):
        apply_polynomial(parse_function("x1+x2^2"), b0.vacuum(), b0)


def test_max_total_overflow_raises():
    b = enumerate_basis(3, MaxTotal(2))
    state = b.vector([1, 0, 0])
    with pytest.raises(SectorError):
        apply_polynomial(parse_function("x2^2"), state, b)


def test_capped_truncates_silently():
    b = enumerate_basis(2, Capped(2))
    out = apply_polynomial(parse_function("x1^3"), b.vacuum(), b)
    assert np.allclose(out, 0)


def test_shifted_arguments_expand_binomially():
    # (b^dag - s)^2 |0> = sqrt2 |2> - 2 s |1> + s^2 |0>
    s = 0.3 - 0.2j
    b = enumerate_basis(1, Capped(3))
    f = MonomialFunction.from_mapping({(2,): 1.0}, shift=s)
    out = apply_polynomial(f, b.vacuum(), b)
    assert np.allclose(out, [s**2, -2 * s, np.sqrt(2), 0])


@settings(max_examples=40, deadline=None)
@given(
    exps=st.lists(st.integers(0, 2), min_size=3, max_size=3),
    coeff=st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False),
)
def test_monomial_matches_kron_oracle(exps, coeff):
    """``c prod_k (b_k^dag)^e_k |0>`` against dense single-mode powers."""
    from conftest import embed_mode, mode_ops

    dim = 3
    b = enumerate_basis(3, Capped(dim - 1))
    f = MonomialFunction(((coeff, tuple(exps)),))
    out = apply_polynomial(f, b.vacuum(), b)
    _, ad = mode_ops(dim)
    op = np.eye(dim**3, dtype=complex)
    for k, e in enumerate(exps):
        op = op @ np.linalg.matrix_power(embed_mode(ad, k, 3, dim), e)
    vac = np.zeros(dim**3)
    vac[0] = 1
    assert np.allclose(out, coeff * op @ vac)
