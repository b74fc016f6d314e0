"""Q-sets on simply laced quivers and the algebras they assemble.

A Q-set places an algebra at every vertex and a nonzero bimodule on every
arrow; all compositions of bimodule elements are declared zero.  Assembling
gives the algebra A (+) M with A the product of the vertex algebras and M the
sum of the arrow bimodules.  The round-trip quiver additionally supports
nonzero corner products through SquareData and the associativity solver.
"""

from .algebras import FinDimAlgebra, _vec_add
from .bimodules import hom_constraint_rows, regular_bimodule, tensor_over
from .errors import (
    AlgebraMismatch,
    AssociativityViolated,
    InvalidQSet,
    NotAssociative,
    NotSimplyLaced,
)
from .sparse import SparseMatrix, solve_homogeneous


class QSet:
    """Simply laced quiver + vertex algebras + arrow bimodules.

    bimodule_at is keyed by arrow label; the bimodule on a: x -> y must be a
    (A_y, A_x)-bimodule and nonzero.
    """

    def __init__(self, quiver, algebra_at, bimodule_at, validate=True):
        self.quiver = quiver
        self.algebra_at = dict(algebra_at)
        self.bimodule_at = dict(bimodule_at)
        if validate:
            self._validate()

    @property
    def field(self):
        return self.algebra_at[self.quiver.vertices[0]].field

    def _validate(self):
        if not self.quiver.vertices:
            raise InvalidQSet("quiver has no vertices")
        try:
            self.quiver.check_simply_laced()
        except NotSimplyLaced as e:
            raise InvalidQSet(str(e)) from None
        if set(self.algebra_at) != set(self.quiver.vertices):
            raise InvalidQSet("algebra_at keys must match the vertex set")
        if set(self.bimodule_at) != {a[0] for a in self.quiver.arrows}:
            raise InvalidQSet("bimodule_at keys must match the arrow labels")
        fld = self.field
        for v, alg in self.algebra_at.items():
            if alg.field != fld:
                raise InvalidQSet(f"algebra at {v!r} is over a different field")
        for label, s, t in self.quiver.arrows:
            m = self.bimodule_at[label]
            if m.is_zero():
                raise InvalidQSet(f"bimodule at arrow {label!r} is zero")
            if m.left != self.algebra_at[t] or m.right != self.algebra_at[s]:
                raise InvalidQSet(
                    f"arrow {label!r}: bimodule must be over "
                    f"(A_{t!r}, A_{s!r}) in that order"
                )


def assemble_lambda(delta: QSet) -> FinDimAlgebra:
    """The algebra A (+) M of a Q-set, with all products inside M equal to 0.

    Basis order: vertex blocks in quiver order, then arrow blocks in
    declaration order.  The returned algebra carries .origin (per basis
    index: ('v', vertex, i) or ('a', label, j)) and .block_offsets.
    """
    delta._validate()
    quiver = delta.quiver
    fld = delta.field
    labels = []
    origin = []
    block_offsets = {}
    for v in quiver.vertices:
        alg = delta.algebra_at[v]
        block_offsets[("v", v)] = (len(origin), alg.dim)
        labels.extend(f"{v}.{lab}" for lab in alg.labels)
        origin.extend(("v", v, i) for i in range(alg.dim))
    for label, s, t in quiver.arrows:
        mod = delta.bimodule_at[label]
        block_offsets[("a", label)] = (len(origin), mod.dim)
        labels.extend(f"{label}[{j}]" for j in range(mod.dim))
        origin.extend(("a", label, j) for j in range(mod.dim))
    dim = len(origin)

    table = [[{} for _ in range(dim)] for _ in range(dim)]
    for v in quiver.vertices:
        alg = delta.algebra_at[v]
        off = block_offsets[("v", v)][0]
        for i in range(alg.dim):
            for j in range(alg.dim):
                table[off + i][off + j] = {
                    off + r: c for r, c in alg.table[i][j].items()
                }
    for label, s, t in quiver.arrows:
        mod = delta.bimodule_at[label]
        offm = block_offsets[("a", label)][0]
        offt = block_offsets[("v", t)][0]
        offs = block_offsets[("v", s)][0]
        for i in range(mod.left.dim):
            cols = mod.left_act[i].columns()
            for j in range(mod.dim):
                table[offt + i][offm + j] = {
                    offm + r: c for r, c in cols.get(j, ())
                }
        for i in range(mod.right.dim):
            cols = mod.right_act[i].columns()
            for j in range(mod.dim):
                table[offm + j][offs + i] = {
                    offm + r: c for r, c in cols.get(j, ())
                }

    unit = {}
    system = []
    for v in quiver.vertices:
        alg = delta.algebra_at[v]
        off = block_offsets[("v", v)][0]
        e = {off + r: c for r, c in alg.unit.items()}
        system.append(e)
        _vec_add(fld, unit, e, fld.one)

    lam = FinDimAlgebra(fld, labels, table, unit, system)
    lam.origin = origin
    lam.block_offsets = block_offsets
    lam.delta = delta
    return lam


class SquareData:
    """Round-trip data (A, B, M, N, alpha, beta) for 2x2 corner algebras.

    M is a B-A bimodule, N an A-B bimodule.  alpha: N (x)_B M -> A and
    beta: M (x)_A N -> B are matrices on the tensor quotient coordinates
    fixed by tensor_over (alpha: dim A rows x dim N(x)M cols).
    """

    def __init__(self, A, B, M, N, alpha, beta):
        if M.left != B or M.right != A:
            raise AlgebraMismatch("M must be a B-A bimodule")
        if N.left != A or N.right != B:
            raise AlgebraMismatch("N must be an A-B bimodule")
        self.A, self.B, self.M, self.N = A, B, M, N
        self.NM = tensor_over(N, M)
        self.MN = tensor_over(M, N)
        if alpha.rows != A.dim or alpha.cols != self.NM.dim:
            raise AlgebraMismatch(
                f"alpha must be {A.dim} x {self.NM.dim}, got {alpha.rows} x {alpha.cols}"
            )
        if beta.rows != B.dim or beta.cols != self.MN.dim:
            raise AlgebraMismatch(
                f"beta must be {B.dim} x {self.MN.dim}, got {beta.rows} x {beta.cols}"
            )
        self.alpha = alpha
        self.beta = beta


def assemble_square(sq: SquareData) -> FinDimAlgebra:
    """The 2x2 corner algebra [[A, N], [M, B]] with n.m = alpha, m.n = beta.

    Associativity (equivalently: alpha, beta bimodule maps and the two
    corner diagrams) is checked exhaustively; failures raise
    AssociativityViolated with a witness basis triple.
    """
    A, B, M, N = sq.A, sq.B, sq.M, sq.N
    fld = A.field
    labels = (
        [f"A.{lab}" for lab in A.labels]
        + [f"B.{lab}" for lab in B.labels]
        + [f"M[{j}]" for j in range(M.dim)]
        + [f"N[{j}]" for j in range(N.dim)]
    )
    offA, offB = 0, A.dim
    offM, offN = A.dim + B.dim, A.dim + B.dim + M.dim
    dim = A.dim + B.dim + M.dim + N.dim
    table = [[{} for _ in range(dim)] for _ in range(dim)]

    def put(i, j, vec, off):
        table[i][j] = {off + r: c for r, c in vec.items()}

    for i in range(A.dim):
        for j in range(A.dim):
            put(offA + i, offA + j, A.table[i][j], offA)
    for i in range(B.dim):
        for j in range(B.dim):
            put(offB + i, offB + j, B.table[i][j], offB)
    for i in range(B.dim):
        cols = M.left_act[i].columns()
        for j in range(M.dim):
            put(offB + i, offM + j, dict(cols.get(j, ())), offM)
    for i in range(A.dim):
        cols = M.right_act[i].columns()
        for j in range(M.dim):
            put(offM + j, offA + i, dict(cols.get(j, ())), offM)
    for i in range(A.dim):
        cols = N.left_act[i].columns()
        for j in range(N.dim):
            put(offA + i, offN + j, dict(cols.get(j, ())), offN)
    for i in range(B.dim):
        cols = N.right_act[i].columns()
        for j in range(N.dim):
            put(offN + j, offB + i, dict(cols.get(j, ())), offN)
    for i in range(N.dim):
        for j in range(M.dim):
            put(offN + i, offM + j, sq.alpha.matvec(sq.NM.tensor_info.project_pair(i, j)), offA)
    for i in range(M.dim):
        for j in range(N.dim):
            put(offM + i, offN + j, sq.beta.matvec(sq.MN.tensor_info.project_pair(i, j)), offB)

    unit = {offA + r: c for r, c in A.unit.items()}
    unit.update({offB + r: c for r, c in B.unit.items()})
    eA = {offA + r: c for r, c in A.unit.items()}
    eB = {offB + r: c for r, c in B.unit.items()}
    try:
        out = FinDimAlgebra(fld, labels, table, unit, [eA, eB])
    except NotAssociative as exc:
        i, j, l = exc.triple
        raise AssociativityViolated((labels[i], labels[j], labels[l])) from None
    out.corner_offsets = {"A": offA, "B": offB, "M": offM, "N": offN}
    return out


def solve_associativity(A, B, M, N):
    """All pairs (alpha, beta) making the 2x2 corner algebra associative.

    Returns the solution subspace inside Hom(N (x)_B M, A) (+)
    Hom(M (x)_A N, B); coordinates are t * dim A + r on the alpha block
    followed by t * dim B + r on the beta block.  Both bimodule-map and
    corner-diagram conditions go into one homogeneous system.
    """
    if M.left != B or M.right != A:
        raise AlgebraMismatch("M must be a B-A bimodule")
    if N.left != A or N.right != B:
        raise AlgebraMismatch("N must be an A-B bimodule")
    fld = A.field
    NM = tensor_over(N, M)
    MN = tensor_over(M, N)
    off_beta = NM.dim * A.dim
    ambient = NM.dim * A.dim + MN.dim * B.dim

    rows = list(hom_constraint_rows(NM, regular_bimodule(A)))
    for row in hom_constraint_rows(MN, regular_bimodule(B)):
        rows.append({off_beta + k: v for k, v in row.items()})

    proj_nm = {}
    for j in range(N.dim):
        for i in range(M.dim):
            proj_nm[(j, i)] = NM.tensor_info.project_pair(j, i)
    proj_mn = {}
    for i in range(M.dim):
        for j in range(N.dim):
            proj_mn[(i, j)] = MN.tensor_info.project_pair(i, j)

    def add(row, k, val):
        w = fld.add(row.get(k, fld.zero), val)
        if w:
            row[k] = w
        elif k in row:
            del row[k]

    # beta(m_i (x) n_j) . m_l == m_i . alpha(n_j (x) m_l), coordinates of M
    for i in range(M.dim):
        for j in range(N.dim):
            for l in range(M.dim):
                for s in range(M.dim):
                    row = {}
                    for b in range(B.dim):
                        c1 = M.left_act[b].entries.get((s, l))
                        if not c1:
                            continue
                        for t, c2 in proj_mn[(i, j)].items():
                            add(row, off_beta + t * B.dim + b, fld.mul(c1, c2))
                    for a in range(A.dim):
                        c1 = M.right_act[a].entries.get((s, i))
                        if not c1:
                            continue
                        for t, c2 in proj_nm[(j, l)].items():
                            add(row, t * A.dim + a, fld.neg(fld.mul(c1, c2)))
                    if row:
                        rows.append(row)
    # alpha(n_j (x) m_i) . n_l == n_j . beta(m_i (x) n_l), coordinates of N
    for j in range(N.dim):
        for i in range(M.dim):
            for l in range(N.dim):
                for s in range(N.dim):
                    row = {}
                    for a in range(A.dim):
                        c1 = N.left_act[a].entries.get((s, l))
                        if not c1:
                            continue
                        for t, c2 in proj_nm[(j, i)].items():
                            add(row, t * A.dim + a, fld.mul(c1, c2))
                    for b in range(B.dim):
                        c1 = N.right_act[b].entries.get((s, j))
                        if not c1:
                            continue
                        for t, c2 in proj_mn[(i, l)].items():
                            add(row, off_beta + t * B.dim + b, fld.neg(fld.mul(c1, c2)))
                    if row:
                        rows.append(row)

    mtx = SparseMatrix(
        fld, len(rows), ambient,
        [(i, k, v) for i, row in enumerate(rows) for k, v in row.items()],
    )
    return solve_homogeneous(mtx)


def square_from_solution(A, B, M, N, vec) -> SquareData:
    """Wrap one solve_associativity vector as SquareData."""
    NM = tensor_over(N, M)
    MN = tensor_over(M, N)
    off_beta = NM.dim * A.dim
    fld = A.field
    a_triples, b_triples = [], []
    for k, v in vec.items():
        if k < off_beta:
            t, r = divmod(k, A.dim)
            a_triples.append((r, t, v))
        else:
            t, r = divmod(k - off_beta, B.dim)
            b_triples.append((r, t, v))
    alpha = SparseMatrix(fld, A.dim, NM.dim, a_triples)
    beta = SparseMatrix(fld, B.dim, MN.dim, b_triples)
    return SquareData(A, B, M, N, alpha, beta)
