"""Z-lattices of matrices over O_K and their finite quotients.

A g x h matrix over K is identified with a vector in Q^(2gh) by reading each
entry's coordinates (a, b) over the basis {1, delta}, row-major.  Matrices
over O_K become exactly Z^(2gh).  Images of the standard lattice under right
multiplication, intersections, and finite quotients are all computed in this
coordinate picture with exact integer arithmetic (Hermite and Smith normal
forms).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import GroupCapError, SublatticeError
from .kfield import FieldId, KElement, KMatrix, dual_generator, re_trace_of_product

# ---------------------------------------------------------------------------
# integer matrix helpers (rows are vectors; all exact)
# ---------------------------------------------------------------------------


def _hnf_rows(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Canonical row Hermite normal form.

    Returns an echelon basis with positive pivots and the entries above each
    pivot reduced into [0, pivot).  Zero rows are dropped.
    """
    work = [list(r) for r in rows if any(r)]
    if not work:
        return []
    ncols = len(work[0])
    result: list[list[int]] = []
    for col in range(ncols):
        live = [r for r in work if r[col] != 0]
        if not live:
            continue
        # gcd-eliminate until one row carries this column
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[col]))
            base = live[0]
            for r in live[1:]:
                q = r[col] // base[col]
                for j in range(ncols):
                    r[j] -= q * base[j]
            live = [r for r in live if r[col] != 0]
        pivot_row = live[0]
        work.remove(pivot_row)
        work = [r for r in work if any(r)]
        result.append(pivot_row)
    # normalize pivot signs and reduce above-pivot entries
    pivots = []
    for r in result:
        p = next(j for j, x in enumerate(r) if x != 0)
        if r[p] < 0:
            for j in range(ncols):
                r[j] = -r[j]
        pivots.append(p)
    for i in range(len(result) - 1, -1, -1):
        p = pivots[i]
        d = result[i][p]
        for k in range(i):
            q = result[k][p] // d
            if q:
                for j in range(ncols):
                    result[k][j] -= q * result[i][j]
    return result


def _left_kernel(mat: Sequence[Sequence[int]]) -> list[list[int]]:
    """Basis (HNF) of {x in Z^k : x @ mat = 0} for an integer k x n matrix."""
    k = len(mat)
    n = len(mat[0]) if k else 0
    # row-reduce [mat | I] and collect transform rows whose mat-part died
    work = [list(mat[i]) + [1 if j == i else 0 for j in range(k)] for i in range(k)]
    for col in range(n):
        live = [r for r in work if r[col] != 0]
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[col]))
            base = live[0]
            for r in live[1:]:
                q = r[col] // base[col]
                for j in range(n + k):
                    r[j] -= q * base[j]
            live = [r for r in live if r[col] != 0]
        if live:
            work.remove(live[0])
    kernel = [r[n:] for r in work if not any(r[:n])]
    return _hnf_rows(kernel)


def _snf_with_transforms(a: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[list[int]], list[list[int]]]:
    """Smith normal form with transforms: returns (U, D, V) with U @ A @ V = D.

    D is diagonal with nonnegative entries in a divisibility chain.
    """
    rows = len(a)
    cols = len(a[0])
    A = [list(r) for r in a]
    U = [[1 if i == j else 0 for j in range(rows)] for i in range(rows)]
    V = [[1 if i == j else 0 for j in range(cols)] for i in range(cols)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, q):
        # row_dst += q * row_src
        for j in range(cols):
            A[dst][j] += q * A[src][j]
        for j in range(rows):
            U[dst][j] += q * U[src][j]

    def add_col(dst, src, q):
        for r in A:
            r[dst] += q * r[src]
        for r in V:
            r[dst] += q * r[src]

    t = 0
    limit = min(rows, cols)
    while t < limit:
        # locate a minimal-magnitude nonzero pivot in the trailing block
        best = None
        for i in range(t, rows):
            for j in range(t, cols):
                if A[i][j] != 0 and (best is None or abs(A[i][j]) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        dirty = False
        for i in range(t + 1, rows):
            if A[i][t] != 0:
                add_row(i, t, -(A[i][t] // A[t][t]))
                if A[i][t] != 0:
                    dirty = True
        if dirty:
            continue
        for j in range(t + 1, cols):
            if A[t][j] != 0:
                add_col(j, t, -(A[t][j] // A[t][t]))
                if A[t][j] != 0:
                    dirty = True
        if dirty:
            continue
        # force divisibility of the trailing block by the pivot
        stained = False
        for i in range(t + 1, rows):
            if stained:
                break
            for j in range(t + 1, cols):
                if A[i][j] % A[t][t] != 0:
                    add_row(t, i, 1)
                    stained = True
                    break
        if stained:
            continue
        if A[t][t] < 0:
            for j in range(cols):
                A[t][j] = -A[t][j]
            for j in range(rows):
                U[t][j] = -U[t][j]
        t += 1
    return U, A, V


def _frac_matrix_inverse(m: Sequence[Sequence[Fraction]]) -> list[list[Fraction]]:
    n = len(m)
    work = [[Fraction(x) for x in row] + [Fraction(1 if i == j else 0) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if work[r][col] != 0), None)
        if pivot is None:
            raise SublatticeError("singular coefficient matrix")
        work[col], work[pivot] = work[pivot], work[col]
        inv = Fraction(1) / work[col][col]
        work[col] = [x * inv for x in work[col]]
        for r in range(n):
            if r != col and work[r][col] != 0:
                f = work[r][col]
                work[r] = [x - f * y for x, y in zip(work[r], work[col])]
    return [row[n:] for row in work]


# ---------------------------------------------------------------------------
# coordinate maps
# ---------------------------------------------------------------------------


def kmatrix_to_coords(M: KMatrix) -> tuple[Fraction, ...]:
    """Row-major (a, b) coordinates of a g x h matrix: a vector in Q^(2gh)."""
    out: list[Fraction] = []
    for row in M.entry_rows():
        for x in row:
            out.append(x.a)
            out.append(x.b)
    return tuple(out)


def coords_to_kmatrix(vec: Sequence[Fraction], g: int, h: int, field: FieldId) -> KMatrix:
    if len(vec) != 2 * g * h:
        raise ValueError("coordinate vector has wrong length")
    entries = []
    it = iter(vec)
    for _ in range(g):
        row = []
        for _ in range(h):
            a = next(it)
            b = next(it)
            row.append(KElement(Fraction(a), Fraction(b), field))
        entries.append(row)
    return KMatrix(entries)


# ---------------------------------------------------------------------------
# lattices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntLattice:
    """(1/scale) * Z-span of the HNF basis rows inside Q^ambient_dim.

    Normalized so that gcd(scale, all basis entries) = 1; two lattices are
    equal iff their dataclass fields are.
    """

    ambient_dim: int
    scale: int
    basis: tuple[tuple[int, ...], ...]

    @property
    def rank(self) -> int:
        return len(self.basis)

    @staticmethod
    def standard(dim: int) -> "IntLattice":
        rows = tuple(tuple(1 if i == j else 0 for j in range(dim)) for i in range(dim))
        return IntLattice(dim, 1, rows)

    @staticmethod
    def from_rational_rows(rows: Sequence[Sequence[Fraction]], dim: int) -> "IntLattice":
        scale = 1
        for row in rows:
            for x in row:
                scale = scale * x.denominator // math.gcd(scale, x.denominator)
        int_rows = [[int(x * scale) for x in row] for row in rows]
        hnf = _hnf_rows(int_rows)
        if hnf:
            g = scale
            for row in hnf:
                for x in row:
                    if x:
                        g = math.gcd(g, abs(x))
            if g > 1:
                scale //= g
                hnf = [[x // g for x in row] for row in hnf]
        return IntLattice(dim, scale, tuple(tuple(r) for r in hnf))

    def rational_basis(self) -> list[list[Fraction]]:
        return [[Fraction(x, self.scale) for x in row] for row in self.basis]

    def contains(self, vec: Sequence[Fraction]) -> bool:
        target = [Fraction(x) * self.scale for x in vec]
        if any(t.denominator != 1 for t in target):
            return False
        target = [int(t) for t in target]
        pivots = [next(j for j, x in enumerate(row) if x != 0) for row in self.basis]
        for row, p in zip(self.basis, pivots):
            if target[p] % row[p] != 0:
                return False
            c = target[p] // row[p]
            if c:
                for j in range(self.ambient_dim):
                    target[j] -= c * row[j]
        return not any(target)

    def contains_kmatrix(self, M: KMatrix) -> bool:
        return self.contains(kmatrix_to_coords(M))


def lattice_image(g: int, h: int, M: KMatrix) -> IntLattice:
    """The lattice {N @ M : N in Mat(g, h; O_K)} in coordinates.

    M must be a nonsingular h x h matrix over K.
    """
    if M.rows != M.cols or M.rows != h:
        raise ValueError("M must be h x h")
    field = M.field
    rows: list[Sequence[Fraction]] = []
    gens = (field.one(), field.delta())
    for j in range(g):
        for k in range(h):
            for beta in gens:
                N = [[field.zero() for _ in range(h)] for _ in range(g)]
                N[j][k] = beta
                rows.append(kmatrix_to_coords(KMatrix(N) @ M))
    lat = IntLattice.from_rational_rows(rows, 2 * g * h)
    if lat.rank != 2 * g * h:
        raise SublatticeError("image lattice is not full rank (singular M)")
    return lat


def lattice_sum(L1: IntLattice, L2: IntLattice) -> IntLattice:
    if L1.ambient_dim != L2.ambient_dim:
        raise ValueError("ambient dimensions differ")
    rows = L1.rational_basis() + L2.rational_basis()
    return IntLattice.from_rational_rows(rows, L1.ambient_dim)


def lattice_intersect(L1: IntLattice, L2: IntLattice) -> IntLattice:
    if L1.ambient_dim != L2.ambient_dim:
        raise ValueError("ambient dimensions differ")
    s = L1.scale * L2.scale // math.gcd(L1.scale, L2.scale)
    a1 = [[x * (s // L1.scale) for x in row] for row in L1.basis]
    a2 = [[x * (s // L2.scale) for x in row] for row in L2.basis]
    stacked = a1 + [[-x for x in row] for row in a2]
    kernel = _left_kernel(stacked)
    r1 = len(a1)
    rows: list[list[Fraction]] = []
    for kv in kernel:
        vec = [Fraction(0)] * L1.ambient_dim
        for i in range(r1):
            if kv[i]:
                for j in range(L1.ambient_dim):
                    vec[j] += kv[i] * a1[i][j]
        rows.append([Fraction(x, s) for x in vec])
    return IntLattice.from_rational_rows(rows, L1.ambient_dim)


# ---------------------------------------------------------------------------
# finite quotients
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """A finite quotient L/S with canonical coset representatives.

    invariant_factors is the ascending divisibility chain (entries > 1);
    representatives are KMatrix cosets enumerated mixed-radix over the
    factors (last factor fastest), starting with the zero coset.
    """

    invariant_factors: tuple[int, ...]
    representatives: tuple[KMatrix, ...]
    order: int

    def is_trivial(self) -> bool:
        return self.order == 1

    def to_json(self, rep_limit: Optional[int] = None) -> dict:
        reps = self.representatives
        truncated = False
        if rep_limit is not None and len(reps) > rep_limit:
            reps = reps[:rep_limit]
            truncated = True
        out = {
            "invariant_factors": list(self.invariant_factors),
            "order": self.order,
            "representatives": [r.to_json() for r in reps],
        }
        if truncated:
            out["representatives_truncated"] = True
        return out


def quotient_group(
    L: IntLattice,
    S: IntLattice,
    field: FieldId,
    g: int,
    h: int,
    max_order: int = 10**6,
) -> FiniteAbelianGroup:
    """The quotient L/S for a finite-index full-rank sublattice S of L.

    Coset representatives are canonical: Smith-form coordinates range over the
    fundamental box [0, d_i) of the invariant factors, enumerated mixed-radix
    with the last factor fastest, mapped back through the lattice basis.
    """
    if L.ambient_dim != S.ambient_dim:
        raise ValueError("ambient dimensions differ")
    n = L.rank
    if n != L.ambient_dim or S.rank != n:
        raise SublatticeError("quotient requires full-rank lattices")
    bl = L.rational_basis()
    bl_inv = _frac_matrix_inverse(bl)
    c_rows: list[list[int]] = []
    for srow in S.rational_basis():
        coeffs = [sum(srow[k] * bl_inv[k][j] for k in range(n)) for j in range(n)]
        if any(x.denominator != 1 for x in coeffs):
            raise SublatticeError("S is not a sublattice of L")
        c_rows.append([int(x) for x in coeffs])
    _, D, V = _snf_with_transforms(c_rows)
    diag = [D[i][i] for i in range(n)]
    if any(d == 0 for d in diag):
        raise SublatticeError("quotient is infinite")
    order = 1
    for d in diag:
        order *= d
    if order > max_order:
        raise GroupCapError(f"quotient order {order} exceeds cap {max_order}")
    factors = tuple(d for d in diag if d > 1)
    v_inv_frac = _frac_matrix_inverse([[Fraction(x) for x in row] for row in V])
    v_inv = [[int(x) for x in row] for row in v_inv_frac]
    positions = [i for i, d in enumerate(diag) if d > 1]
    reps: list[KMatrix] = []
    t = [0] * len(positions)
    while True:
        full = [0] * n
        for pos, val in zip(positions, t):
            full[pos] = val
        coeff = [sum(full[i] * v_inv[i][j] for i in range(n)) for j in range(n)]
        vec = [sum(Fraction(coeff[i]) * bl[i][j] for i in range(n)) for j in range(n)]
        reps.append(coords_to_kmatrix(vec, g, h, field))
        # mixed-radix increment, last index fastest
        k = len(positions) - 1
        while k >= 0:
            t[k] += 1
            if t[k] < factors[k]:
                break
            t[k] = 0
            k -= 1
        if k < 0:
            break
    return FiniteAbelianGroup(factors, tuple(reps), order)


def standard_matrix_lattice(g: int, h: int) -> IntLattice:
    """Mat(g, h; O_K) in coordinates: exactly Z^(2gh)."""
    return IntLattice.standard(2 * g * h)


def shift_group(g: int, T: KMatrix, max_order: int = 10**6) -> FiniteAbelianGroup:
    """The quotient (Lambda @ conj_transpose(T)) / its intersection with Lambda.

    Its cosets index the characteristic shifts on the right-hand side of the
    relation; Lambda = Mat(g, h; O_K).
    """
    h = T.rows
    L = lattice_image(g, h, T.conj_transpose())
    S = lattice_intersect(L, standard_matrix_lattice(g, h))
    return quotient_group(L, S, T.field, g, h, max_order)


def character_group(g: int, T: KMatrix, max_order: int = 10**6) -> FiniteAbelianGroup:
    """The quotient (Lambda @ T^-1) / its intersection with Lambda.

    Its cosets index the character twists summed on the right-hand side.
    """
    h = T.rows
    L = lattice_image(g, h, T.inverse())
    S = lattice_intersect(L, standard_matrix_lattice(g, h))
    return quotient_group(L, S, T.field, g, h, max_order)


def character_phase(M: KMatrix, B: KMatrix) -> Fraction:
    """Re Tr(conj_transpose(M) @ c B) reduced mod 1 into [0, 1).

    c = dual_generator(field) moves B into the lattice dual to Lambda under
    the Re pairing; without it the phases fail to be characters of the
    quotient for d > 1 (O_K is self dual only for d = 1).
    """
    q = re_trace_of_product(M, B.scale(dual_generator(B.field)))
    return q - (q.numerator // q.denominator)


def index_in(L: IntLattice, S: IntLattice) -> int:
    """[L : S] for a finite-index sublattice S of L (no rep materialization)."""
    n = L.rank
    if n != L.ambient_dim or S.rank != n:
        raise SublatticeError("index requires full-rank lattices")
    bl_inv = _frac_matrix_inverse(L.rational_basis())
    det = Fraction(1)
    c_rows = []
    for srow in S.rational_basis():
        coeffs = [sum(srow[k] * bl_inv[k][j] for k in range(n)) for j in range(n)]
        if any(x.denominator != 1 for x in coeffs):
            raise SublatticeError("S is not a sublattice of L")
        c_rows.append([int(x) for x in coeffs])
    # |det C| via fraction-free elimination is overkill at these sizes
    mat = [[Fraction(x) for x in row] for row in c_rows]
    sign = 1
    for col in range(n):
        pivot = next((r for r in range(col, n) if mat[r][col] != 0), None)
        if pivot is None:
            raise SublatticeError("S has infinite index in L")
        if pivot != col:
            mat[col], mat[pivot] = mat[pivot], mat[col]
            sign = -sign
        det *= mat[col][col]
        inv = Fraction(1) / mat[col][col]
        for r in range(col + 1, n):
            if mat[r][col] != 0:
                f = mat[r][col] * inv
                mat[r] = [x - f * y for x, y in zip(mat[r], mat[col])]
    val = abs(det * sign)
    assert val.denominator == 1
    return int(val)


def character_orthogonality_report(
    g: int, T: KMatrix, max_order: int = 10**6
) -> list[dict]:
    """Exact-arithmetic check of the character sums over the B-group.

    For each representative M of (Lambda conj_transpose(T) + Lambda) modulo
    Lambda conj_transpose(T), collects the exact phases q_B over the B-group
    and decides, purely in rational arithmetic, whether the character sum is
    |G2| (trivial character, forced by M in the image lattice) or 0 (the
    phases form all m-th roots of unity with equal multiplicity).
    """
    h = T.rows
    field = T.field
    image = lattice_image(g, h, T.conj_transpose())
    total = lattice_sum(image, standard_matrix_lattice(g, h))
    s = lattice_intersect(total, image)  # = image, but normalizes scale
    cosets = quotient_group(total, s, field, g, h, max_order)
    g2 = character_group(g, T, max_order)
    report = []
    for M in cosets.representatives:
        phases = [character_phase(M, B) for B in g2.representatives]
        in_image = image.contains_kmatrix(M)
        distinct = sorted(set(phases))
        m = len(distinct)
        counts = [sum(1 for q in phases if q == v) for v in distinct]
        if in_image:
            ok = distinct == [Fraction(0)]
        else:
            ok = (
                m > 1
                and distinct == [Fraction(j, m) for j in range(m)]
                and len(set(counts)) == 1
            )
        report.append(
            {
                "rep": M,
                "in_image": in_image,
                "phases": phases,
                "sum_is_order": in_image,
                "sum_is_zero": not in_image,
                "ok": ok,
            }
        )
    return report
