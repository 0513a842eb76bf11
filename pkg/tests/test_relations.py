"""Relation assembly, evaluation, corruption controls, and P decomposition."""

import json
import math
import random
from fractions import Fraction

import pytest
import sympy

from iqtheta import (
    DomainError,
    FieldId,
    KMatrix,
    RelationInstance,
    RelationSpec,
    build_relation,
    decompose_rational_P,
    evaluate_relation,
    theta_general,
)
from iqtheta.kfield import hat, re_trace_of_product
from iqtheta.relations import RelationTerm


def _cubic_spec():
    field = FieldId(3)
    one = field.one()
    w1 = field.delta() - one
    w2 = w1 * w1
    T = KMatrix([[one, one, one], [one, w1, w2], [one, w2, w1]]).scale(
        Fraction(1, 3)
    )
    P = KMatrix.identity(3, field).scale(Fraction(3))
    A0 = KMatrix(
        [[field.element(Fraction(1, 2)), field.element(Fraction(1, 3)),
          field.element(0, Fraction(1, 2))]]
    )
    B0 = KMatrix(
        [[field.element(Fraction(1, 5)), field.zero(), field.element(Fraction(1, 4))]]
    )
    return RelationSpec(field=field, g=1, T=T, P=P, A0=A0, B0=B0, name="cubic")


def _matsumoto_spec():
    field = FieldId(1)
    one = field.one()
    i_ = field.delta()
    c = (one - i_) * Fraction(1, 2)
    T = KMatrix([[c, c], [c, -c]])
    P = KMatrix.identity(2, field)
    A0 = KMatrix([[field.element(Fraction(1, 3)), field.element(Fraction(1, 4))]])
    B0 = KMatrix([[field.element(Fraction(1, 5)), field.element(Fraction(1, 7))]])
    return RelationSpec(field=field, g=1, T=T, P=P, A0=A0, B0=B0)


def test_cubic_build_exact_data():
    inst = build_relation(_cubic_spec())
    field = inst.spec.field
    assert inst.Q == KMatrix.identity(3, field)
    assert inst.G1.order == 27
    assert list(inst.G1.invariant_factors) == [3, 3, 3]
    assert inst.G2.is_trivial()
    assert len(inst.terms) == 27
    assert inst.scale == Fraction(1)
    meta = inst.group_metadata()
    assert meta == {
        "G1_order": 27,
        "G1_invariant_factors": [3, 3, 3],
        "G2_order": 1,
        "G2_invariant_factors": [],
        "term_count": 27,
    }


def test_phases_vanish_with_trivial_G2():
    inst = build_relation(_cubic_spec())
    # only b = 0 contributes, so every coefficient is exp(0)
    assert all(t.phase_q == 0 for t in inst.terms)
    assert all(t.b_shift.is_zero() for t in inst.terms)


def test_cubic_relation_verifies():
    inst = build_relation(_cubic_spec())
    rep = evaluate_relation(inst, [[1.1j]])
    assert rep.passed, rep.residual_rel
    assert rep.residual_rel < 1e-9
    assert rep.term_count == 27
    assert rep.theta_evals > 0


def test_matsumoto_relation_verifies():
    inst = build_relation(_matsumoto_spec())
    assert inst.G1.order == 2
    assert inst.G2.order == 2
    rep = evaluate_relation(inst, [[0.2 + 1.0j]])
    assert rep.passed, rep.residual_rel
    assert rep.residual_rel < 1e-10


def test_rhs_independent_of_coset_representatives():
    # shifting every G1 rep by an integral element of the image lattice and
    # every G2 rep by an integral element of Lambda T^-1 must leave the sum
    spec = _matsumoto_spec()
    inst = build_relation(spec)
    shift = KMatrix(
        [[spec.field.one(), spec.field.one()]]
    )  # (1,1) lies in both intersection lattices for this T
    terms = []
    for t in inst.terms:
        a2 = t.a_shift + shift
        b2 = t.b_shift + shift
        bh = hat(b2)
        q = re_trace_of_product(spec.A0, bh)
        q -= math.floor(q)
        terms.append(
            RelationTerm(
                a_shift=a2,
                b_shift=b2,
                a_char=spec.A0 + a2,
                b_char=spec.B0 + bh,
                phase_q=q,
            )
        )
    moved = RelationInstance(
        spec=spec,
        Q=inst.Q,
        lhs_A=inst.lhs_A,
        lhs_B=inst.lhs_B,
        G1=inst.G1,
        G2=inst.G2,
        terms=tuple(terms),
    )
    W = [[0.15 + 0.95j]]
    r1 = evaluate_relation(inst, W)
    r2 = evaluate_relation(moved, W)
    assert r2.rhs == pytest.approx(r1.rhs, abs=1e-11)
    assert r1.passed and r2.passed


def test_corruption_controls_fail_loudly():
    inst = build_relation(_cubic_spec())
    W = [[1.1j]]
    clean = evaluate_relation(inst, W)
    assert clean.passed
    broken_phase = evaluate_relation(inst, W, corrupt="phase")
    assert not broken_phase.passed
    assert broken_phase.residual_rel > 1e-3
    broken_drop = evaluate_relation(inst, W, corrupt="drop")
    assert not broken_drop.passed
    assert broken_drop.residual_rel > 1e-3
    with pytest.raises(ValueError, match="corruption"):
        evaluate_relation(inst, W, corrupt="bogus")


def test_spec_json_roundtrip():
    spec = _cubic_spec()
    blob = json.dumps(spec.to_json())
    back = RelationSpec.from_json(json.loads(blob))
    assert back == spec
    assert back.h == 3


def test_spec_validation_errors():
    field = FieldId(1)
    one = field.one()
    i_ = field.delta()
    T = KMatrix.identity(2, field)
    good_p = KMatrix.identity(2, field)
    bad_p = KMatrix([[one, i_], [field.zero(), one]])
    A0 = KMatrix.zeros(1, 2, field)
    B0 = KMatrix.zeros(1, 2, field)
    with pytest.raises(DomainError, match="Hermitian"):
        RelationSpec(field=field, g=1, T=T, P=bad_p, A0=A0, B0=B0).validate()
    with pytest.raises(DomainError, match="A0"):
        RelationSpec(
            field=field, g=1, T=T, P=good_p, A0=KMatrix.zeros(2, 2, field), B0=B0
        ).validate()
    other = FieldId(2)
    with pytest.raises(DomainError, match="same field"):
        RelationSpec(
            field=field,
            g=1,
            T=T,
            P=good_p,
            A0=KMatrix.zeros(1, 2, other),
            B0=B0,
        ).validate()


def test_singular_T_rejected():
    field = FieldId(1)
    one = field.one()
    T = KMatrix([[one, one], [one, one]])
    spec = RelationSpec(
        field=field,
        g=1,
        T=T,
        P=KMatrix.identity(2, field),
        A0=KMatrix.zeros(1, 2, field),
        B0=KMatrix.zeros(1, 2, field),
    )
    with pytest.raises(DomainError, match="invertible"):
        build_relation(spec)


def _rational_mat(field, rows):
    return KMatrix(
        [[field.from_rational(Fraction(x)) for x in row] for row in rows]
    )


def test_schur_ladder_tridiagonal_exact():
    field = FieldId(1)
    P = _rational_mat(field, [[2, -1], [-1, 2]])
    A0 = KMatrix([[field.element(Fraction(1, 3)), field.element(Fraction(1, 4))]])
    B0 = KMatrix([[field.element(Fraction(1, 5)), field.element(Fraction(1, 6))]])
    dec = decompose_rational_P(field, 1, P, A0, B0)
    assert dec.lambdas == (Fraction(3, 2), Fraction(2))
    assert dec.lambda_product() == Fraction(3)
    assert len(dec.monomials) == 16
    W = [[1.05j]]
    poly = dec.evaluate(W)
    dense = theta_general(field, W, P, A0, B0).value
    assert poly == pytest.approx(dense, abs=1e-11)


def _schur_chain_work(p_rows):
    """(pivot list, estimated monomial count) or None when not PD.

    The expansion multiplies its monomial count by about den(x)^4 per level,
    so huge denominators must be rejected up front to keep runtime bounded.
    """
    cur = sympy.Matrix([[sympy.Rational(x) for x in row] for row in p_rows])
    work = 1
    pivots = []
    while cur.shape[0] > 1:
        h = cur.shape[0]
        p1 = cur[1:, 1:]
        r = cur[0, 1:].T
        if p1.det() == 0:
            return None
        x = p1.LUsolve(r)
        lam = cur[0, 0] - (r.T * x)[0, 0]
        if lam <= 0:
            return None
        pivots.append(Fraction(lam.p, lam.q))
        denom_prod = 1
        for i in range(h - 1):
            denom_prod *= Fraction(x[i]).denominator
        work *= denom_prod**4
        cur = p1
    if cur[0, 0] <= 0:
        return None
    pivots.append(Fraction(cur[0, 0].p, cur[0, 0].q))
    return pivots, work


@pytest.mark.parametrize("d", [1, 2])
def test_decompose_random_P_matches_dense(d):
    # random half-integer PD matrices, rejecting chains whose expansion
    # would be intractably large
    rng = random.Random(1000 + d)
    field = FieldId(d)
    done = 0
    while done < 4:
        h = rng.choice((2, 3))
        p_rows = [[Fraction(0)] * h for _ in range(h)]
        for i in range(h):
            p_rows[i][i] = Fraction(rng.choice((4, 5, 6)), 2)
            for j in range(i):
                off = Fraction(rng.choice((-2, -1, 0, 1, 2)), 2)
                p_rows[i][j] = off
                p_rows[j][i] = off
        chain = _schur_chain_work(p_rows)
        if chain is None or chain[1] > 1024:
            continue
        P = _rational_mat(field, p_rows)
        A0 = KMatrix(
            [[field.element(Fraction(1, 3 + j), Fraction(1, 4 + j))
              for j in range(h)]]
        )
        B0 = KMatrix([[field.element(Fraction(1, 2 + j)) for j in range(h)]])
        dec = decompose_rational_P(field, 1, P, A0, B0)
        det = sympy.Matrix(p_rows).det()
        assert dec.lambda_product() == det
        assert all(lam > 0 for lam in dec.lambdas)
        assert list(chain[0]) == list(dec.lambdas)
        W = [[1.15j]]
        poly = dec.evaluate(W)
        dense = theta_general(field, W, P, A0, B0).value
        assert poly == pytest.approx(dense, abs=1e-9)
        done += 1


def test_decompose_rejects_indefinite_P():
    field = FieldId(1)
    P = _rational_mat(field, [[1, 2], [2, 1]])
    z = KMatrix.zeros(1, 2, field)
    with pytest.raises(DomainError, match="positive definite"):
        decompose_rational_P(field, 1, P, z, z)


def test_decompose_rejects_nonrational_P():
    field = FieldId(1)
    one = field.one()
    i_ = field.delta()
    P = KMatrix([[field.from_rational(2), i_], [i_.conj(), field.from_rational(2)]])
    z = KMatrix.zeros(1, 2, field)
    with pytest.raises(DomainError, match="rational"):
        decompose_rational_P(field, 1, P, z, z)


@pytest.mark.parametrize("d", [1, 2, 3, 7])
def test_unipotent_relation_every_field(d):
    # fractional unipotent T gives |G1| = |G2| = 4 over every field; for
    # d > 1 the character shifts must land in the dual lattice, so this
    # pins the dual twist (hat-form shifts fail here with residual ~0.3)
    field = FieldId(d)
    one = field.one()
    zero = field.zero()
    T = KMatrix([[one, zero], [field.element(Fraction(-1, 2)), one]])
    P = KMatrix.identity(2, field).scale(Fraction(2))
    A0 = KMatrix(
        [[field.element(Fraction(1, 3)), field.element(Fraction(1, 4), Fraction(1, 2))]]
    )
    B0 = KMatrix(
        [[field.element(Fraction(1, 5)), field.element(0, Fraction(1, 3))]]
    )
    inst = build_relation(RelationSpec(field=field, g=1, T=T, P=P, A0=A0, B0=B0))
    assert inst.G1.order == 4
    assert inst.G2.order == 4
    rep = evaluate_relation(inst, [[1.05j]])
    assert rep.passed, rep.residual_rel
    assert rep.residual_rel < 1e-10
