"""Construction and numerical verification of theta transformation relations.

Given an invertible T in Mat(h; K) and a Hermitian positive definite P, the
series Theta^Q with Q = conj(T)^t P T expands as a finite character sum:

    Theta^Q[A0 conj(T)^-t; B0 T](W)
        = (1 / #G2) * sum over B in G2, A in G1 of
            exp(-2*pi*i * Re Tr(conj(A0)^t c B))
            * Theta^P[A0 + A; B0 + c B](W)

where G1 = Lambda conj(T)^t / (Lambda conj(T)^t meet Lambda) and
G2 = Lambda T^-1 / (Lambda T^-1 meet Lambda) for Lambda = Mat(g, h; O_K),
and c = dual_generator(field).  The scalar c places the shifted vectors in
the lattice dual to Lambda under the Re pairing, which is what makes
B |-> exp(2*pi*i*Re Tr(conj(N + A)^t c B)) run through every character of
Lambda / (Lambda meet Lambda conj(T)^t) exactly once; with c omitted the
collapse fails for d > 1 whenever #G2 shares a factor with d (or with 2
when -d is not 1 mod 4), because O_K is not self dual there.
Both sides are computed independently here; the report carries the residual.

The same machinery, applied to unipotent rational T from a Schur
complement ladder, rewrites Theta^P for any rational symmetric positive
definite P as an exact-coefficient polynomial in one-column thetas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .errors import DomainError, SingularMatrixError
from .kfield import FieldId, KElement, KMatrix, dual_generator, re_trace_of_product
from .lattices import FiniteAbelianGroup, character_group, shift_group
from .thetas import MatrixLike, ThetaCache, ThetaParams, theta_general

__all__ = [
    "RelationSpec",
    "RelationTerm",
    "RelationInstance",
    "VerificationReport",
    "build_relation",
    "evaluate_relation",
    "decompose_rational_P",
    "PDecomposition",
    "Monomial",
]


def _unit_phase(q: Fraction) -> complex:
    """exp(-2*pi*i*q) for exact rational q, reduced mod 1 first."""
    q = q - math.floor(q)
    return complex(np.exp(-2j * np.pi * float(q)))


@dataclass(frozen=True)
class RelationSpec:
    """Input data (d, g, T, P, A0, B0) of one relation instance.

    T is h x h invertible over K, P is h x h Hermitian positive definite
    with exact entries, A0 and B0 are g x h characteristics over K.
    """

    field: FieldId
    g: int
    T: KMatrix
    P: KMatrix
    A0: KMatrix
    B0: KMatrix
    name: str = ""

    @property
    def h(self) -> int:
        return self.T.rows

    def validate(self) -> None:
        h = self.h
        if self.T.cols != h:
            raise DomainError("T must be square")
        if self.P.rows != h or self.P.cols != h:
            raise DomainError("P must match the size of T")
        if self.P.conj_transpose() != self.P:
            raise DomainError("P must be Hermitian")
        for m, nm in ((self.A0, "A0"), (self.B0, "B0")):
            if m.rows != self.g or m.cols != h:
                raise DomainError(f"{nm} must be {self.g} x {h}")
        for m in (self.T, self.P, self.A0, self.B0):
            if m.field != self.field:
                raise DomainError("all matrices must live over the same field")

    def to_json(self) -> dict:
        return {
            "d": self.field.d,
            "g": self.g,
            "T": self.T.to_json(),
            "P": self.P.to_json(),
            "A0": self.A0.to_json(),
            "B0": self.B0.to_json(),
            "name": self.name,
        }

    @staticmethod
    def from_json(obj: dict) -> "RelationSpec":
        field = FieldId(int(obj["d"]))
        spec = RelationSpec(
            field=field,
            g=int(obj["g"]),
            T=KMatrix.from_json(obj["T"], field),
            P=KMatrix.from_json(obj["P"], field),
            A0=KMatrix.from_json(obj["A0"], field),
            B0=KMatrix.from_json(obj["B0"], field),
            name=str(obj.get("name", "")),
        )
        spec.validate()
        return spec


@dataclass(frozen=True)
class RelationTerm:
    """One summand of the right hand side, with exact characteristics."""

    a_shift: KMatrix
    b_shift: KMatrix
    a_char: KMatrix
    b_char: KMatrix
    phase_q: Fraction  # term coefficient is exp(-2*pi*i*phase_q)


@dataclass(frozen=True)
class RelationInstance:
    spec: RelationSpec
    Q: KMatrix
    lhs_A: KMatrix
    lhs_B: KMatrix
    G1: FiniteAbelianGroup
    G2: FiniteAbelianGroup
    terms: tuple[RelationTerm, ...]

    @property
    def scale(self) -> Fraction:
        return Fraction(1, self.G2.order)

    def group_metadata(self) -> dict:
        return {
            "G1_order": self.G1.order,
            "G1_invariant_factors": list(self.G1.invariant_factors),
            "G2_order": self.G2.order,
            "G2_invariant_factors": list(self.G2.invariant_factors),
            "term_count": len(self.terms),
        }


def build_relation(spec: RelationSpec, max_order: int = 10**6) -> RelationInstance:
    """Assemble groups, characteristics and exact phases for spec."""
    spec.validate()
    try:
        lhs_A = spec.A0 @ spec.T.conj_transpose().inverse()
    except SingularMatrixError:
        raise DomainError("T must be invertible") from None
    Q = spec.T.conj_transpose() @ spec.P @ spec.T
    g1 = shift_group(spec.g, spec.T, max_order=max_order)
    g2 = character_group(spec.g, spec.T, max_order=max_order)
    lhs_B = spec.B0 @ spec.T
    dual = dual_generator(spec.field)
    terms: list[RelationTerm] = []
    for b_rep in g2.representatives:
        b_dual = b_rep.scale(dual)
        q = re_trace_of_product(spec.A0, b_dual)
        q = q - math.floor(q)
        for a_rep in g1.representatives:
            terms.append(
                RelationTerm(
                    a_shift=a_rep,
                    b_shift=b_rep,
                    a_char=spec.A0 + a_rep,
                    b_char=spec.B0 + b_dual,
                    phase_q=q,
                )
            )
    return RelationInstance(
        spec=spec, Q=Q, lhs_A=lhs_A, lhs_B=lhs_B, G1=g1, G2=g2, terms=tuple(terms)
    )


@dataclass(frozen=True)
class VerificationReport:
    lhs: complex
    rhs: complex
    residual_abs: float
    residual_rel: float
    term_count: int
    theta_evals: int
    cache_hits: int
    tolerance: float
    passed: bool

    def to_json(self) -> dict:
        return {
            "lhs": [self.lhs.real, self.lhs.imag],
            "rhs": [self.rhs.real, self.rhs.imag],
            "residual_abs": self.residual_abs,
            "residual_rel": self.residual_rel,
            "term_count": self.term_count,
            "theta_evals": self.theta_evals,
            "cache_hits": self.cache_hits,
            "tolerance": self.tolerance,
            "passed": self.passed,
        }


def evaluate_relation(
    inst: RelationInstance,
    W: MatrixLike,
    params: Optional[ThetaParams] = None,
    corrupt: Optional[str] = None,
) -> VerificationReport:
    """Evaluate both sides of the relation at W and report the residual.

    corrupt is a test hook: "phase" perturbs one term coefficient and
    "drop" omits one term, so harness failure detection can be exercised.
    """
    if params is None:
        params = ThetaParams()
    if corrupt not in (None, "phase", "drop"):
        raise ValueError(f"unknown corruption mode: {corrupt!r}")
    spec = inst.spec
    cache = ThetaCache()
    lhs = theta_general(
        spec.field, W, inst.Q, inst.lhs_A, inst.lhs_B, params, cache
    )
    scale = float(inst.scale)
    re_parts: list[float] = []
    im_parts: list[float] = []
    for k, term in enumerate(inst.terms):
        if corrupt == "drop" and k == 0:
            continue
        q = term.phase_q
        if corrupt == "phase" and k == 0:
            q = q + Fraction(1, 3)
        coeff = _unit_phase(q)
        tv = theta_general(
            spec.field, W, spec.P, term.a_char, term.b_char, params, cache
        )
        contrib = coeff * tv.value
        re_parts.append(contrib.real)
        im_parts.append(contrib.imag)
    rhs = scale * complex(math.fsum(re_parts), math.fsum(im_parts))
    residual_abs = abs(lhs.value - rhs)
    denom = max(abs(lhs.value), abs(rhs), 1e-12)
    residual_rel = residual_abs / denom
    tolerance = max(1e-9, len(inst.terms) * 4.0 * params.eps)
    return VerificationReport(
        lhs=complex(lhs.value),
        rhs=rhs,
        residual_abs=residual_abs,
        residual_rel=residual_rel,
        term_count=len(inst.terms),
        theta_evals=cache.misses,
        cache_hits=cache.hits,
        tolerance=tolerance,
        passed=residual_rel <= tolerance,
    )


# -- rational P as a polynomial in one-column thetas ------------------------


@dataclass(frozen=True)
class Monomial:
    """coeff_scale * exp(-2*pi*i*coeff_q) * prod_j Theta^(lam_j)[a_j; b_j](W)."""

    coeff_q: Fraction
    coeff_scale: Fraction
    factors: tuple[tuple[int, KMatrix, KMatrix], ...]  # (lambda index, a, b)


@dataclass(frozen=True)
class PDecomposition:
    """Schur pivot sequence (one entry per level, repeats kept) plus monomials."""

    field: FieldId
    g: int
    lambdas: tuple[Fraction, ...]
    monomials: tuple[Monomial, ...]

    def lambda_product(self) -> Fraction:
        prod = Fraction(1)
        for lam in self.lambdas:
            prod *= lam
        return prod

    def evaluate(
        self,
        W: MatrixLike,
        params: Optional[ThetaParams] = None,
        cache: Optional[ThetaCache] = None,
    ) -> complex:
        if params is None:
            params = ThetaParams()
        if cache is None:
            cache = ThetaCache()
        field = self.field
        re_parts: list[float] = []
        im_parts: list[float] = []
        for mono in self.monomials:
            acc = float(mono.coeff_scale) * _unit_phase(mono.coeff_q)
            for lam_idx, a, b in mono.factors:
                lam = self.lambdas[lam_idx]
                p_mat = KMatrix([[field.from_rational(lam)]])
                tv = theta_general(field, W, p_mat, a, b, params, cache)
                acc *= tv.value
            re_parts.append(acc.real)
            im_parts.append(acc.imag)
        return complex(math.fsum(re_parts), math.fsum(im_parts))


def _rational_entry(x: KElement, what: str) -> Fraction:
    if not x.is_rational():
        raise DomainError(f"{what} must have rational entries")
    return x.a


def _schur_split(P: KMatrix) -> tuple[Fraction, KMatrix, KMatrix, KMatrix]:
    """P = K^t diag(lam1, P1) K with K unipotent lower triangular.

    Returns (lam1, P1, K, M) where M = K^-1.  P must be rational symmetric
    with positive leading entry and an invertible trailing block.
    """
    field = P.field
    h = P.rows
    mu1 = _rational_entry(P[(0, 0)], "P")
    r = [P[(0, j)] for j in range(1, h)]  # 1 x (h-1)
    p1 = KMatrix([[P[(i, j)] for j in range(1, h)] for i in range(1, h)])
    p1_inv = p1.inverse()
    # column vector P1^-1 R^t
    r_col = KMatrix.column_vector(r)
    x = p1_inv @ r_col  # (h-1) x 1
    lam1 = mu1 - sum(
        (r[i] * x[(i, 0)]).a for i in range(h - 1)
    )
    if lam1 <= 0:
        raise DomainError(f"P is not positive definite: Schur pivot {lam1} <= 0")
    one = field.one()
    zero = field.zero()
    k_rows = [[one] + [zero] * (h - 1)]
    m_rows = [[one] + [zero] * (h - 1)]
    for i in range(h - 1):
        k_rows.append(
            [x[(i, 0)]] + [one if j == i else zero for j in range(h - 1)]
        )
        m_rows.append(
            [-x[(i, 0)]] + [one if j == i else zero for j in range(h - 1)]
        )
    return (lam1, p1, KMatrix(k_rows), KMatrix(m_rows))


def decompose_rational_P(
    field: FieldId,
    g: int,
    P: KMatrix,
    A0: KMatrix,
    B0: KMatrix,
    max_order: int = 10**6,
) -> PDecomposition:
    """Expand Theta^P[A0; B0](W) as a polynomial in one-column thetas.

    P must be rational symmetric positive definite.  Each Schur step peels
    the leading pivot via the transformation relation for the unipotent K,
    producing exact coefficients; the pivots lam_j multiply to det P.
    """
    if P.rows != P.cols:
        raise DomainError("P must be square")
    for i in range(P.rows):
        for j in range(P.cols):
            _rational_entry(P[(i, j)], "P")
            if P[(i, j)] != P[(j, i)]:
                raise DomainError("P must be symmetric")

    # the pivot, unipotent factor and its two groups at each level depend on
    # P alone, so build that chain once instead of once per branch
    chain: list[tuple[KMatrix, KMatrix, FiniteAbelianGroup, FiniteAbelianGroup]] = []
    lambdas: list[Fraction] = []
    cur = P
    while cur.rows > 1:
        lam1, p1, k_mat, m_mat = _schur_split(cur)
        lambdas.append(lam1)
        chain.append(
            (
                k_mat,
                m_mat,
                shift_group(g, k_mat, max_order=max_order),
                character_group(g, k_mat, max_order=max_order),
            )
        )
        cur = p1
    last = _rational_entry(cur[(0, 0)], "P")
    if last <= 0:
        raise DomainError(f"P is not positive definite: pivot {last} <= 0")
    lambdas.append(last)

    dual = dual_generator(field)
    monomials: list[Monomial] = []

    def recurse(
        level: int,
        A_cur: KMatrix,
        B_cur: KMatrix,
        q_acc: Fraction,
        scale_acc: Fraction,
        factors: tuple[tuple[int, KMatrix, KMatrix], ...],
    ) -> None:
        if level == len(chain):
            monomials.append(
                Monomial(
                    coeff_q=q_acc - math.floor(q_acc),
                    coeff_scale=scale_acc,
                    factors=factors + ((level, A_cur, B_cur),),
                )
            )
            return
        h = len(lambdas) - level
        k_mat, m_mat, g1, g2 = chain[level]
        a_thm = A_cur @ k_mat.transpose()
        b_thm = B_cur @ m_mat
        scale_next = scale_acc / g2.order
        for b_rep in g2.representatives:
            b_dual = b_rep.scale(dual)
            q = q_acc + re_trace_of_product(a_thm, b_dual)
            b_char = b_thm + b_dual
            for a_rep in g1.representatives:
                a_char = a_thm + a_rep
                recurse(
                    level + 1,
                    KMatrix([[a_char[(i, j)] for j in range(1, h)] for i in range(g)]),
                    KMatrix([[b_char[(i, j)] for j in range(1, h)] for i in range(g)]),
                    q,
                    scale_next,
                    factors
                    + ((level, a_char.column(0), b_char.column(0)),),
                )

    recurse(0, A0, B0, Fraction(0), Fraction(1), ())
    return PDecomposition(
        field=field, g=g, lambdas=tuple(lambdas), monomials=tuple(monomials)
    )
