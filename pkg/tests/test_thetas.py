"""Theta evaluators: frozen references, brute-force oracles, invariances."""

import cmath
import math
from fractions import Fraction

import numpy as np
import pytest

from iqtheta import (
    DomainError,
    FieldId,
    KMatrix,
    ThetaCache,
    ThetaParams,
    TruncationError,
    choose_radius,
    in_type1_domain,
    riemann_theta_z0,
    shell_tail_bound,
    theta_check_variant,
    theta_general,
)
from iqtheta.kfield import hat, re_trace_of_product

# closed form for the classical value at tau = i: pi^(1/4) / Gamma(3/4)
THETA00_AT_I = math.pi ** 0.25 / math.gamma(0.75)


def _brute_candidates(field, radius):
    dc = field.delta_complex
    span = range(-radius, radius + 1)
    return np.array([u + v * dc for v in span for u in span])


def test_frozen_gaussian_value():
    field = FieldId(1)
    val = theta_general(
        field,
        [[1j]],
        KMatrix.identity(1, field),
        KMatrix.zeros(1, 1, field),
        KMatrix.zeros(1, 1, field),
    )
    # sum over Z[i] of exp(-pi |n|^2) = theta00(i)^2 = sqrt(pi)/Gamma(3/4)^2
    assert val.value == pytest.approx(THETA00_AT_I**2, abs=1e-13)
    assert val.value.real == pytest.approx(1.1803405990160964, abs=1e-14)
    assert abs(val.value.imag) < 1e-15
    assert val.tail_bound < 1e-15
    assert val.lattice_points_used == 49


def test_frozen_riemann_value():
    val = riemann_theta_z0([0.0], [0.0], [[1j]])
    assert val.value == pytest.approx(THETA00_AT_I, abs=1e-13)
    assert val.value.real == pytest.approx(1.0864348112133082, abs=1e-14)


def test_riemann_special_characteristics():
    # theta01(i) = theta00(i) / 2^(1/4); the odd characteristic vanishes
    v00 = riemann_theta_z0([0.0], [0.0], [[1j]]).value
    v01 = riemann_theta_z0([0.0], [0.5], [[1j]]).value
    v10 = riemann_theta_z0([0.5], [0.0], [[1j]]).value
    v11 = riemann_theta_z0([0.5], [0.5], [[1j]]).value
    assert v01 == pytest.approx(v00 * 2 ** (-0.25), abs=1e-12)
    assert v10 == pytest.approx(v01, abs=1e-12)
    assert abs(v11) < 1e-12


def test_radius_and_tail_frozen():
    assert choose_radius(1e-12, math.pi, 2) == 4
    assert shell_tail_bound(3, math.pi, 2) == pytest.approx(
        2.94307169962852e-11, rel=1e-9
    )
    # monotone: larger radius and stronger decay both shrink the bound
    assert shell_tail_bound(4, math.pi, 2) < shell_tail_bound(3, math.pi, 2)
    assert shell_tail_bound(3, 2 * math.pi, 2) < shell_tail_bound(3, math.pi, 2)
    assert shell_tail_bound(3, math.pi, 4) > shell_tail_bound(3, math.pi, 2)


def test_choose_radius_offset_floor():
    # decay so strong that radius 1 would suffice; the offset floors it
    assert choose_radius(1e-12, 50.0, 2) == 1
    assert choose_radius(1e-12, 50.0, 2, offset_norm=3.2) == 5


def test_choose_radius_cap():
    with pytest.raises(TruncationError):
        choose_radius(1e-300, 0.05, 8, max_radius=4.0)


def test_in_type1_domain_frozen():
    ok, lam = in_type1_domain([[1j, 0.5], [-0.5, 1j]])
    assert ok
    assert lam == pytest.approx(0.5, abs=1e-12)
    ok, lam = in_type1_domain([[-1j]])
    assert not ok


@pytest.mark.parametrize("d", [1, 2, 3, 7])
def test_dense_against_direct_sum(d):
    # independent double-loop oracle for g=1, h=2 with non-diagonal P
    field = FieldId(d)
    w = 0.9 + 1.1j
    half = Fraction(1, 2)
    p01 = field.element(half, half)
    P = KMatrix(
        [
            [field.from_rational(2), p01],
            [p01.conj(), field.from_rational(2)],
        ]
    )
    A0 = KMatrix([[field.element(Fraction(1, 3)), field.element(0, Fraction(1, 4))]])
    B0 = KMatrix([[field.element(Fraction(1, 5)), field.element(Fraction(1, 7))]])
    p_emb = P.embed()
    a_emb = A0.embed().ravel()
    b_emb = B0.embed().ravel()
    cand = _brute_candidates(field, 7)
    x1 = cand[:, None] + a_emb[0]
    x2 = cand[None, :] + a_emb[1]
    quad = (
        p_emb[0, 0] * np.abs(x1) ** 2
        + p_emb[1, 1] * np.abs(x2) ** 2
        + p_emb[0, 1] * x1 * np.conj(x2)
        + p_emb[1, 0] * x2 * np.conj(x1)
    )
    lin = (np.conj(x1) * b_emb[0] + np.conj(x2) * b_emb[1]).real
    oracle = np.exp(1j * math.pi * w * quad + 2j * math.pi * lin).sum()
    val = theta_general(field, [[w]], P, A0, B0)
    assert val.value == pytest.approx(complex(oracle), abs=1e-11)


@pytest.mark.parametrize("d", [1, 3])
def test_diagonal_factorization_against_direct_sum(d):
    field = FieldId(d)
    w = 1.2j
    P = KMatrix(
        [
            [field.from_rational(2), field.zero()],
            [field.zero(), field.from_rational(3)],
        ]
    )
    A0 = KMatrix([[field.element(Fraction(1, 2)), field.element(0, Fraction(1, 3))]])
    B0 = KMatrix([[field.element(Fraction(1, 4)), field.element(Fraction(1, 6))]])
    a_emb = A0.embed().ravel()
    b_emb = B0.embed().ravel()
    cand = _brute_candidates(field, 7)
    oracle = complex(1.0)
    for j, pj in enumerate((2.0, 3.0)):
        x = cand + a_emb[j]
        lin = (np.conj(x) * b_emb[j]).real
        oracle *= np.exp(1j * math.pi * w * pj * np.abs(x) ** 2 + 2j * math.pi * lin).sum()
    val = theta_general(field, [[w]], P, A0, B0)
    assert val.value == pytest.approx(oracle, abs=1e-11)


@pytest.mark.parametrize("d", [1, 3, 7])
def test_unit_invariance(d):
    field = FieldId(d)
    A0 = KMatrix([[field.element(Fraction(1, 3), Fraction(1, 2))]])
    B0 = KMatrix([[field.element(Fraction(1, 5), Fraction(1, 4))]])
    P = KMatrix([[field.from_rational(2)]])
    W = [[0.3 + 1.0j]]
    base = theta_general(field, W, P, A0, B0).value
    for u in field.units():
        tw = theta_general(field, W, P, A0.scale(u), B0.scale(u)).value
        assert tw == pytest.approx(base, abs=1e-12)


def test_integral_shift_invariance():
    field = FieldId(2)
    A0 = KMatrix([[field.element(Fraction(2, 5), Fraction(1, 3))]])
    B0 = KMatrix([[field.element(Fraction(1, 7))]])
    P = KMatrix([[field.from_rational(1)]])
    W = [[0.1 + 0.9j]]
    S = KMatrix([[field.element(3, -2)]])
    v1 = theta_general(field, W, P, A0, B0)
    v2 = theta_general(field, W, P, A0 + S, B0)
    assert v1.value == v2.value  # same reduced offsets, bit identical
    assert v1.lattice_points_used == v2.lattice_points_used


@pytest.mark.parametrize("d", [2, 3])
def test_b_shift_covariance(d):
    # shifting B0 by hat(L) with L integral multiplies the value by the
    # exact unit-modulus factor exp(2*pi*i*Re Tr(conj(A0)^t hat(L)))
    field = FieldId(d)
    A0 = KMatrix([[field.element(Fraction(1, 3), Fraction(1, 5))]])
    B0 = KMatrix([[field.element(Fraction(1, 2), Fraction(1, 7))]])
    P = KMatrix([[field.from_rational(1)]])
    W = [[0.2 + 1.1j]]
    L = KMatrix([[field.element(1, 1)]])
    lhs = theta_general(field, W, P, A0, B0 + hat(L)).value
    q = re_trace_of_product(A0, hat(L))
    rhs = cmath.exp(2j * math.pi * float(q)) * theta_general(
        field, W, P, A0, B0
    ).value
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_truncation_bound_is_honest():
    field = FieldId(1)
    A0 = KMatrix([[field.element(Fraction(1, 3))]])
    B0 = KMatrix([[field.element(Fraction(1, 4))]])
    P = KMatrix([[field.from_rational(1)]])
    W = [[0.6j]]
    coarse = theta_general(field, W, P, A0, B0, ThetaParams(eps=1e-4))
    fine = theta_general(field, W, P, A0, B0, ThetaParams(eps=1e-14))
    assert coarse.tail_bound <= 1e-4
    assert abs(coarse.value - fine.value) <= coarse.tail_bound + fine.tail_bound
    assert fine.lattice_points_used > coarse.lattice_points_used


@pytest.mark.parametrize("d", [1, 2])
def test_check_variant_plain_branch(d):
    # direct sum with the linear phase reading the lattice point alone
    field = FieldId(d)
    a = KMatrix([[field.element(Fraction(1, 3), Fraction(1, 4))]])
    b = KMatrix([[field.element(Fraction(1, 5), Fraction(1, 2))]])
    w = 0.2 + 1.0j
    cand = _brute_candidates(field, 8)
    x = cand + complex(a.embed()[0, 0])
    lin = (np.conj(cand) * complex(b.embed()[0, 0])).real
    oracle = np.exp(1j * math.pi * w * np.abs(x) ** 2 + 2j * math.pi * lin).sum()
    val = theta_check_variant(field, a, b, [[w]])
    assert val.value == pytest.approx(complex(oracle), abs=1e-11)


@pytest.mark.parametrize("d", [3, 7])
def test_check_variant_split_branch(d):
    # the branch for -d = 1 mod 4 runs at 2W with a doubled linear phase
    field = FieldId(d)
    a = KMatrix([[field.element(Fraction(1, 3), Fraction(1, 4))]])
    b = KMatrix([[field.element(Fraction(1, 5), Fraction(1, 2))]])
    w = 0.2 + 1.0j
    cand = _brute_candidates(field, 8)
    x = cand + complex(a.embed()[0, 0])
    lin = (np.conj(cand) * complex(b.embed()[0, 0])).real
    oracle = np.exp(2j * math.pi * w * np.abs(x) ** 2 + 4j * math.pi * lin).sum()
    val = theta_check_variant(field, a, b, [[w]])
    assert val.value == pytest.approx(complex(oracle), abs=1e-11)


@pytest.mark.parametrize("d", [2, 7])
def test_check_variant_b_periodic(d):
    field = FieldId(d)
    a = KMatrix([[field.element(Fraction(1, 3), Fraction(1, 4))]])
    b = KMatrix([[field.element(Fraction(1, 5), Fraction(1, 2))]])
    W = [[0.1 + 0.9j]]
    base = theta_check_variant(field, a, b, W).value
    for nu in (field.one(), field.delta(), field.element(-2, 1)):
        shifted = theta_check_variant(
            field, a, b + KMatrix([[nu]]), W
        ).value
        assert shifted == pytest.approx(base, abs=1e-12)


def test_check_variant_a_shift_picks_up_phase():
    field = FieldId(2)
    a = KMatrix([[field.element(Fraction(1, 3), Fraction(1, 4))]])
    b = KMatrix([[field.element(Fraction(1, 5), Fraction(1, 2))]])
    W = [[0.1 + 0.9j]]
    nu = field.element(1, -1)
    lhs = theta_check_variant(field, a + KMatrix([[nu]]), b, W).value
    q = re_trace_of_product(KMatrix([[nu]]), b)
    rhs = cmath.exp(-2j * math.pi * float(q)) * theta_check_variant(
        field, a, b, W
    ).value
    assert lhs == pytest.approx(rhs, abs=1e-12)


def test_check_variant_modulus_matches_plain_theta():
    field = FieldId(1)
    a = KMatrix([[field.element(Fraction(1, 4), Fraction(1, 3))]])
    b = KMatrix([[field.element(Fraction(1, 2), Fraction(1, 5))]])
    W = [[1.05j]]
    chk = theta_check_variant(field, a, b, W).value
    plain = theta_general(
        field, W, KMatrix([[field.one()]]), a, b
    ).value
    assert abs(chk) == pytest.approx(abs(plain), abs=1e-12)


def test_domain_errors():
    field = FieldId(1)
    one = KMatrix([[field.one()]])
    zero = KMatrix.zeros(1, 1, field)
    with pytest.raises(DomainError, match="type-I domain"):
        theta_general(field, [[-1j]], one, zero, zero)
    with pytest.raises(DomainError, match="positive definite"):
        theta_general(field, [[1j]], KMatrix([[field.from_rational(-1)]]), zero, zero)
    bad_p = KMatrix(
        [[field.one(), field.delta()], [field.zero(), field.one()]]
    )
    z12 = KMatrix.zeros(1, 2, field)
    with pytest.raises(DomainError, match="Hermitian"):
        theta_general(field, [[1j]], bad_p, z12, z12)
    with pytest.raises(DomainError, match="symmetric"):
        riemann_theta_z0([0.0, 0.0], [0.0, 0.0], [[1j, 0.5], [0.0, 1j]])
    with pytest.raises(DomainError, match="positive definite"):
        riemann_theta_z0([0.0], [0.0], [[0.5 - 1j]])


def test_truncation_error_at_radius_cap():
    field = FieldId(1)
    one = KMatrix([[field.one()]])
    zero = KMatrix.zeros(1, 1, field)
    with pytest.raises(TruncationError, match="max_radius"):
        theta_general(
            field, [[1j]], one, zero, zero, ThetaParams(eps=1e-30, max_radius=4.0)
        )


def test_cache_hits_are_counted():
    field = FieldId(1)
    one = KMatrix([[field.one()]])
    zero = KMatrix.zeros(1, 1, field)
    cache = ThetaCache()
    v1 = theta_general(field, [[1j]], one, zero, zero, None, cache)
    v2 = theta_general(field, [[1j]], one, zero, zero, None, cache)
    assert cache.misses == 1
    assert cache.hits == 1
    assert v1.value == v2.value
