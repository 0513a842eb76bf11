"""Integer lattices, finite quotients, and exact character sums."""

import random
from fractions import Fraction

import pytest
import sympy

from iqtheta import (
    FieldId,
    GroupCapError,
    KMatrix,
    character_group,
    character_orthogonality_report,
    character_phase,
    shift_group,
)
from iqtheta.lattices import (
    IntLattice,
    index_in,
    lattice_image,
    lattice_intersect,
    lattice_sum,
    quotient_group,
    standard_matrix_lattice,
)


def test_hnf_basis_is_canonical():
    # same lattice from different generating sets must normalize identically
    rows_a = [[Fraction(2), Fraction(0)], [Fraction(1), Fraction(3)]]
    rows_b = [
        [Fraction(3), Fraction(3)],  # row sums and swaps of the above
        [Fraction(1), Fraction(3)],
        [Fraction(2), Fraction(0)],
    ]
    La = IntLattice.from_rational_rows(rows_a, 2)
    Lb = IntLattice.from_rational_rows(rows_b, 2)
    assert La == Lb
    assert La.basis == Lb.basis and La.scale == Lb.scale


def test_membership_and_index():
    L = IntLattice.from_rational_rows(
        [[Fraction(1, 2), Fraction(0)], [Fraction(0), Fraction(1)]], 2
    )
    S = IntLattice.standard(2)
    assert L.contains([Fraction(1, 2), Fraction(3)])
    assert not L.contains([Fraction(1, 3), Fraction(0)])
    assert index_in(L, S) == 2


def test_sum_and_intersection_sandwich():
    rng = random.Random(11)
    for _ in range(10):
        rows1 = [[Fraction(rng.randint(-3, 3), rng.randint(1, 3))
                  for _ in range(4)] for _ in range(4)]
        rows2 = [[Fraction(rng.randint(-3, 3), rng.randint(1, 3))
                  for _ in range(4)] for _ in range(4)]
        L1 = IntLattice.from_rational_rows(rows1, 4)
        L2 = IntLattice.from_rational_rows(rows2, 4)
        if L1.rank < 4 or L2.rank < 4:
            continue
        inter = lattice_intersect(L1, L2)
        total = lattice_sum(L1, L2)
        for vec in inter.rational_basis():
            assert L1.contains(vec) and L2.contains(vec)
        for vec in L1.rational_basis():
            assert total.contains(vec)
        for vec in L2.rational_basis():
            assert total.contains(vec)


def test_quotient_invariant_factors_diagonal_case():
    # (1/3)Z x (1/2)Z over Z x Z has invariant factors (1|6) -> [6] here
    L = IntLattice.from_rational_rows(
        [[Fraction(1, 3), Fraction(0)], [Fraction(0), Fraction(1, 2)]], 2
    )
    S = IntLattice.standard(2)
    field = FieldId(1)
    grp = quotient_group(L, lattice_intersect(L, S), field, 1, 1, 10**6)
    assert grp.order == 6
    assert list(grp.invariant_factors) == [6]
    assert len(grp.representatives) == 6


def test_group_cap_raises():
    field = FieldId(1)
    T = KMatrix.from_rational_rows([[Fraction(1, 97)]], field)
    with pytest.raises(GroupCapError):
        shift_group(1, T, max_order=100)


@pytest.mark.parametrize("d,expected", [(1, 27), (3, 27)])
def test_cubic_like_group_orders(d, expected):
    # T^-1 integral with |N(det T)| = 27 forces |G1| = 27 and trivial G2
    field = FieldId(3)
    one = field.one()
    w1 = field.delta() - one
    w2 = w1 * w1
    T = KMatrix([[one, one, one], [one, w1, w2], [one, w2, w1]]).scale(
        Fraction(1, 3)
    )
    g1 = shift_group(1, T)
    g2 = character_group(1, T)
    assert g1.order == expected
    assert g2.is_trivial()
    assert list(g1.invariant_factors) == [3, 3, 3]


def test_cartan_chain_group_orders():
    # lower bidiagonal T with diag (1/h, ..., 1) gives order prod j^2 at d in {1,3}
    for d, h, expected in ((1, 2, 4), (3, 2, 4), (1, 3, 36), (3, 3, 36)):
        field = FieldId(d)
        zero = field.zero()
        rows = []
        for i in range(h):
            row = [zero] * h
            row[i] = field.from_rational(Fraction(1, h - i))
            rows.append(row)
        for i in range(1, h):
            rows[i][i - 1] = field.from_rational(Fraction(-1, h - i + 1))
        T = KMatrix(rows).scale(field.one() / field.delta().conj())
        g1 = shift_group(1, T)
        assert g1.order == expected, (d, h)
        assert character_group(1, T).is_trivial()


def test_covolume_identity_random_T():
    # |G1| * |N(det T)|^g equals the index of the intersection in Lambda
    rng = random.Random(23)
    field = FieldId(2)
    checked = 0
    while checked < 8:
        T = KMatrix(
            [
                [field.element(Fraction(rng.randint(-2, 2), rng.randint(1, 2)),
                               Fraction(rng.randint(-1, 1), 1))
                 for _ in range(2)]
                for _ in range(2)
            ]
        )
        det = T[(0, 0)] * T[(1, 1)] - T[(0, 1)] * T[(1, 0)]
        if det.is_zero():
            continue
        try:
            g1 = shift_group(1, T, max_order=10**5)
        except GroupCapError:
            continue
        image = lattice_image(1, 2, T.conj_transpose())
        std = standard_matrix_lattice(1, 2)
        inter = lattice_intersect(image, std)
        lhs = g1.order * det.norm()
        rhs = index_in(std, inter)
        assert lhs == rhs, (lhs, rhs)
        checked += 1


def test_character_phase_exact():
    field = FieldId(3)
    M = KMatrix([[field.element(Fraction(1, 3), Fraction(1, 2))]])
    B = KMatrix([[field.element(Fraction(1, 5), Fraction(1, 7))]])
    q = character_phase(M, B)
    assert isinstance(q, Fraction)
    assert 0 <= q < 1


def test_smith_normal_form_against_sympy():
    rng = random.Random(31)
    for _ in range(6):
        rows = [[rng.randint(-4, 4) for _ in range(3)] for _ in range(3)]
        m = sympy.Matrix(rows)
        if m.det() == 0:
            continue
        # sympy gives the diagonal of the Smith form over ZZ
        from sympy.matrices.normalforms import smith_normal_form

        snf = smith_normal_form(m)
        diag = [abs(int(snf[i, i])) for i in range(3) if snf[i, i] != 0]
        # quotient Z^3 / rows Z^3 has those invariant factors (dropping 1s)
        L = IntLattice.standard(3)
        S = IntLattice.from_rational_rows(
            [[Fraction(x) for x in row] for row in rows], 3
        )
        assert index_in(L, S) == abs(int(m.det()))
        nontrivial = [x for x in diag if x != 1]
        grp_order = 1
        for x in nontrivial:
            grp_order *= x
        assert grp_order == abs(int(m.det()))


def test_matsumoto_groups_match():
    field = FieldId(1)
    one = field.one()
    i_ = field.delta()
    c = (one - i_) * Fraction(1, 2)
    T = KMatrix([[c, c], [c, -c]])
    for g in (1, 2):
        g1 = shift_group(g, T)
        g2 = character_group(g, T)
        assert g1.order == 2**g
        assert g2.order == 2**g
        assert g1.invariant_factors == g2.invariant_factors


def test_orthogonality_report_both_directions():
    # in-image cosets give the trivial character sum, others split into
    # equally weighted roots of unity summing to zero; checked exactly
    field = FieldId(1)
    one = field.one()
    i_ = field.delta()
    c = (one - i_) * Fraction(1, 2)
    T = KMatrix([[c, c], [c, -c]])
    report = character_orthogonality_report(1, T)
    assert any(r["in_image"] for r in report)
    assert any(not r["in_image"] for r in report)
    for r in report:
        assert r["ok"]
        for q in r["phases"]:
            assert isinstance(q, Fraction)  # exact, no floats anywhere


def test_shift_group_identity_trivial():
    field = FieldId(5)
    T = KMatrix.identity(2, field)
    assert shift_group(1, T).is_trivial()
    assert character_group(1, T).is_trivial()


def test_group_json_rep_cap():
    field = FieldId(3)
    one = field.one()
    w1 = field.delta() - one
    w2 = w1 * w1
    T = KMatrix([[one, one, one], [one, w1, w2], [one, w2, w1]]).scale(
        Fraction(1, 3)
    )
    blob = shift_group(1, T).to_json(rep_limit=5)
    assert blob["order"] == 27
    assert len(blob["representatives"]) == 5
    assert blob["representatives_truncated"] is True


@pytest.mark.parametrize("d", [2, 3, 7])
def test_orthogonality_exact_at_ramified_prime(d):
    # T = [[sqrt(-d)]] has |G2| = d for d = 3 mod 4 and |G2| = 2 for d = 2;
    # these orders share a factor with the index of O_K in its Re-pairing
    # dual, so they only pass because character_phase twists B into the dual
    field = FieldId(d)
    T = KMatrix([[field.sqrt_minus_d()]])
    g2 = character_group(1, T)
    assert g2.order == (d if d % 4 == 3 else 2)
    report = character_orthogonality_report(1, T)
    assert any(not r["in_image"] for r in report)
    assert all(r["ok"] for r in report)
