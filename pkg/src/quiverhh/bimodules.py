"""Bimodules with explicit action matrices, plus tensor and Hom calculus.

Conventions: vectors are sparse dicts index -> scalar.  The left action of a
basis element b_i of the left algebra is a matrix L_i (columns L_i[:, j] =
b_i . m_j); the right action R_i likewise for m_j . b_i.  Composition rules:
L(ab) = L(a)L(b), R(ab) = R(b)R(a), and all L commute with all R.
"""

from .algebras import FinDimAlgebra, _vec_add
from .errors import AlgebraMismatch, InputError, NotInSystem
from .sparse import SparseMatrix, Subspace, kernel_basis


class Bimodule:
    def __init__(self, left: FinDimAlgebra, right: FinDimAlgebra, dim: int,
                 left_act, right_act, validate=True):
        """left_act/right_act: one SparseMatrix (dim x dim) per algebra basis index."""
        self.left = left
        self.right = right
        self.dim = dim
        self.left_act = list(left_act)
        self.right_act = list(right_act)
        if len(self.left_act) != left.dim or len(self.right_act) != right.dim:
            raise InputError("need one action matrix per algebra basis element")
        for m in self.left_act + self.right_act:
            if m.rows != dim or m.cols != dim:
                raise InputError("action matrix has wrong shape")
        if validate:
            self._validate()

    @property
    def field(self):
        return self.left.field

    def _validate(self):
        f = self.field
        idm = SparseMatrix.identity(f, self.dim)
        if self._act_vec(self.left_act, self.left.unit) != idm:
            raise AlgebraMismatch("left unit does not act as identity")
        if self._act_vec(self.right_act, self.right.unit) != idm:
            raise AlgebraMismatch("right unit does not act as identity")
        for i in range(self.left.dim):
            for j in range(self.left.dim):
                expect = self._act_vec(self.left_act, self.left.table[i][j])
                if self.left_act[i].matmul(self.left_act[j]) != expect:
                    raise AlgebraMismatch(f"left action is not a homomorphism at ({i},{j})")
        for i in range(self.right.dim):
            for j in range(self.right.dim):
                expect = self._act_vec(self.right_act, self.right.table[i][j])
                if self.right_act[j].matmul(self.right_act[i]) != expect:
                    raise AlgebraMismatch(f"right action is not compatible at ({i},{j})")
        for i in range(self.left.dim):
            for j in range(self.right.dim):
                lr = self.left_act[i].matmul(self.right_act[j])
                rl = self.right_act[j].matmul(self.left_act[i])
                if lr != rl:
                    raise AlgebraMismatch(f"left and right actions do not commute at ({i},{j})")

    def _act_vec(self, mats, coeffs: dict) -> SparseMatrix:
        f = self.field
        out = SparseMatrix.zeros(f, self.dim, self.dim)
        for i, c in coeffs.items():
            out = out.add(mats[i].scale(c))
        return out

    # -- action on vectors ---------------------------------------------------

    def act_left(self, a: dict, m: dict) -> dict:
        out = {}
        f = self.field
        for i, c in a.items():
            v = self.left_act[i].matvec(m)
            _vec_add(f, out, v, c)
        return out

    def act_right(self, m: dict, a: dict) -> dict:
        out = {}
        f = self.field
        for i, c in a.items():
            v = self.right_act[i].matvec(m)
            _vec_add(f, out, v, c)
        return out

    def is_zero(self) -> bool:
        return self.dim == 0

    def __repr__(self):
        return f"<Bimodule dim={self.dim}>"


def zero_bimodule(left, right) -> Bimodule:
    f = left.field
    out = Bimodule(left, right, 0,
                   [SparseMatrix.zeros(f, 0, 0)] * left.dim,
                   [SparseMatrix.zeros(f, 0, 0)] * right.dim,
                   validate=False)
    out.projective_certificate = "zero"
    return out


def regular_bimodule(alg: FinDimAlgebra) -> Bimodule:
    """The algebra as a bimodule over itself."""
    f = alg.field
    left, right = [], []
    for i in range(alg.dim):
        left.append(SparseMatrix(
            f, alg.dim, alg.dim,
            [(r, j, v) for j in range(alg.dim) for r, v in alg.table[i][j].items()],
        ))
        right.append(SparseMatrix(
            f, alg.dim, alg.dim,
            [(r, j, v) for j in range(alg.dim) for r, v in alg.table[j][i].items()],
        ))
    return Bimodule(alg, alg, alg.dim, left, right, validate=False)


def bimodule_from_actions(left, right, dim, left_act, right_act) -> Bimodule:
    return Bimodule(left, right, dim, left_act, right_act)


def direct_sum(*parts) -> Bimodule:
    if not parts:
        raise InputError("empty direct sum")
    left, right = parts[0].left, parts[0].right
    f = parts[0].field
    for p in parts:
        if p.left != left or p.right != right:
            raise AlgebraMismatch("direct sum over mismatched algebra pairs")
    dim = sum(p.dim for p in parts)
    offs, acc = [], 0
    for p in parts:
        offs.append(acc)
        acc += p.dim

    def stack(mats_at):
        out = []
        for i in range(len(mats_at(parts[0]))):
            triples = []
            for p, off in zip(parts, offs):
                m = mats_at(p)[i]
                triples.extend((r + off, c + off, v) for (r, c), v in m.entries.items())
            out.append(SparseMatrix(f, dim, dim, triples))
        return out

    out = Bimodule(left, right, dim,
                   stack(lambda p: p.left_act), stack(lambda p: p.right_act),
                   validate=False)
    # a sum of certified-projective summands is itself certified
    certs = [getattr(p, "projective_certificate", None) for p in parts]
    if all(certs):
        out.projective_certificate = "sum(" + ", ".join(certs) + ")"
    return out


def free_corner_bimodule(B: FinDimAlgebra, f_idx: int, e_idx: int, A: FinDimAlgebra) -> Bimodule:
    """Bf (x) eA as a B-A-bimodule, for system members f of B and e of A.

    Basis: pairs (u, v) with u running over an echelon basis of Bf and v over
    one of eA; actions b.(u(x)v).a = bu (x) va.
    """
    if not (0 <= f_idx < len(B.system)):
        raise NotInSystem(f"index {f_idx} not in the system of B")
    if not (0 <= e_idx < len(A.system)):
        raise NotInSystem(f"index {e_idx} not in the system of A")
    fld = B.field
    f_vec = B.system[f_idx]
    e_vec = A.system[e_idx]
    # Bf: span of b_i * f; eA: span of e * a_j
    bf_gens = [B.mul({i: fld.one}, f_vec) for i in range(B.dim)]
    ea_gens = [A.mul(e_vec, {j: fld.one}) for j in range(A.dim)]
    bf = Subspace.from_vectors(fld, B.dim, bf_gens)
    ea = Subspace.from_vectors(fld, A.dim, ea_gens)
    ubasis = bf.basis_vectors()
    vbasis = ea.basis_vectors()
    du, dv = len(ubasis), len(vbasis)
    dim = du * dv

    def uv_index(ui, vi):
        return ui * dv + vi

    left_act, right_act = [], []
    for i in range(B.dim):
        triples = []
        for ui, u in enumerate(ubasis):
            bu = B.mul({i: fld.one}, u)
            coeffs, rem = bf.reduce(bu)
            if rem:
                raise AlgebraMismatch("Bf is not left-stable; echelon reduction failed")
            for uj, c in enumerate(coeffs):
                if not c:
                    continue
                for vi in range(dv):
                    triples.append((uv_index(uj, vi), uv_index(ui, vi), c))
        left_act.append(SparseMatrix(fld, dim, dim, triples))
    for j in range(A.dim):
        triples = []
        for vi, v in enumerate(vbasis):
            va = A.mul(v, {j: fld.one})
            coeffs, rem = ea.reduce(va)
            if rem:
                raise AlgebraMismatch("eA is not right-stable; echelon reduction failed")
            for vj, c in enumerate(coeffs):
                if not c:
                    continue
                for ui in range(du):
                    triples.append((uv_index(ui, vj), uv_index(ui, vi), c))
        right_act.append(SparseMatrix(fld, dim, dim, triples))
    out = Bimodule(B, A, dim, left_act, right_act)
    out.projective_certificate = f"corner({f_idx},{e_idx})"
    return out


def free_rank_one_bimodule(left: FinDimAlgebra, right: FinDimAlgebra) -> Bimodule:
    """left (x)_k right with the outer actions; basis pairs row-major."""
    f = left.field
    dl, dr = left.dim, right.dim
    dim = dl * dr
    left_act = []
    for i in range(dl):
        triples = []
        for j in range(dl):
            for r, val in left.table[i][j].items():
                triples.extend((r * dr + v, j * dr + v, val) for v in range(dr))
        left_act.append(SparseMatrix(f, dim, dim, triples))
    right_act = []
    for i in range(dr):
        triples = []
        for j in range(dr):
            for r, val in right.table[j][i].items():
                triples.extend((u * dr + r, u * dr + j, val) for u in range(dl))
        right_act.append(SparseMatrix(f, dim, dim, triples))
    out = Bimodule(left, right, dim, left_act, right_act)
    out.projective_certificate = "free rank one"
    return out


def system_bimodule(alg: FinDimAlgebra):
    """(D, the algebra as a D-bimodule), D the span of the idempotent system.

    D is a product of copies of the ground field, one per system member; it is
    the subalgebra the relative theory works over.
    """
    f = alg.field
    n = len(alg.system)
    table = [[({i: f.one} if i == j else {}) for j in range(n)] for i in range(n)]
    D = FinDimAlgebra(
        f, [f"e{i}" for i in range(n)], table,
        {i: f.one for i in range(n)}, [{i: f.one} for i in range(n)],
        validate=False,
    )
    left, right = [], []
    for e in alg.system:
        lm = alg.left_mult_matrix(e)
        left.append(SparseMatrix(
            f, alg.dim, alg.dim, [(r, c, v) for (r, c), v in lm.items()]))
        triples = []
        for j in range(alg.dim):
            col = alg.mul({j: f.one}, e)
            triples.extend((r, j, v) for r, v in col.items())
        right.append(SparseMatrix(f, alg.dim, alg.dim, triples))
    return D, Bimodule(D, D, alg.dim, left, right)


# -- tensor product over the middle algebra ----------------------------------


class TensorInfo:
    """Concrete model of M (x)_B N: pivot subspace plus complement coordinates."""

    def __init__(self, relations: Subspace, coords, dims):
        self.relations = relations
        self.coords = coords          # quotient basis index -> (i, j) pair index
        self.coord_index = {pair: k for k, pair in enumerate(coords)}
        self.dims = dims              # (dim M, dim N)

    def pair_index(self, i, j):
        return i * self.dims[1] + j

    def project(self, vec_pairs: dict) -> dict:
        """Image of a vector of M (x) N written on pair coordinates."""
        _, rem = self.relations.reduce(vec_pairs)
        out = {}
        for flat, v in rem.items():
            i, j = divmod(flat, self.dims[1])
            out[self.coord_index[(i, j)]] = v
        return out

    def project_pair(self, i, j) -> dict:
        return self.project({self.pair_index(i, j): self.relations.field.one})


def tensor_over(m: Bimodule, n: Bimodule) -> Bimodule:
    """M (x)_B N with an echelon-chosen basis; attaches .tensor_info."""
    if m.right != n.left:
        raise AlgebraMismatch("tensor_over needs matching middle algebra")
    B = m.right
    fld = m.field
    dm, dn = m.dim, n.dim
    total = dm * dn

    def pair(i, j):
        return i * dn + j

    gens = []
    for l in range(B.dim):
        rm = m.right_act[l]      # i -> m_i . b_l
        ln = n.left_act[l]       # j -> b_l . n_j
        rm_cols = rm.columns()
        ln_cols = ln.columns()
        for i in range(dm):
            coli = rm_cols.get(i, ())
            for j in range(dn):
                colj = ln_cols.get(j, ())
                vec = {}
                for r, v in coli:
                    vec[pair(r, j)] = v
                for s, v in colj:
                    k = pair(i, s)
                    w = fld.sub(vec.get(k, fld.zero), v)
                    if w:
                        vec[k] = w
                    elif k in vec:
                        del vec[k]
                if vec:
                    gens.append(vec)
    rel = Subspace.from_vectors(fld, total, gens)
    pivot_set = {p for p, _ in rel.pivots}
    coords = []
    for i in range(dm):
        for j in range(dn):
            if pair(i, j) not in pivot_set:
                coords.append((i, j))
    info = TensorInfo(rel, coords, (dm, dn))
    qdim = len(coords)

    left_act = []
    for bi in range(m.left.dim):
        lm = m.left_act[bi].columns()
        triples = []
        for k, (i, j) in enumerate(coords):
            vec = {}
            for r, v in lm.get(i, ()):
                vec[pair(r, j)] = v
            for kk, vv in info.project(vec).items():
                triples.append((kk, k, vv))
        left_act.append(SparseMatrix(fld, qdim, qdim, triples))
    right_act = []
    for ai in range(n.right.dim):
        rn = n.right_act[ai].columns()
        triples = []
        for k, (i, j) in enumerate(coords):
            vec = {}
            for s, v in rn.get(j, ()):
                vec[pair(i, s)] = v
            for kk, vv in info.project(vec).items():
                triples.append((kk, k, vv))
        right_act.append(SparseMatrix(fld, qdim, qdim, triples))
    out = Bimodule(m.left, n.right, qdim, left_act, right_act)
    out.tensor_info = info
    out.tensor_factors = (m, n)
    return out


def tensor_chain(mods) -> Bimodule:
    """Left-associated iterated tensor product."""
    if not mods:
        raise InputError("empty tensor chain")
    acc = mods[0]
    for nxt in mods[1:]:
        acc = tensor_over(acc, nxt)
    return acc


def hom_constraint_rows(m: Bimodule, n: Bimodule):
    """Linear constraints cutting out bimodule maps M -> N inside Hom_k(M, N).

    Hom coordinates are row-major over (input index, output index): a map F
    sits at positions j * dim N + r for F[r, j].
    """
    fld = m.field
    dm, dn = m.dim, n.dim

    def hidx(j, r):
        return j * dn + r

    # for each algebra basis element and each (input j, output r):
    # sum_jj F[r, jj] * act_m[jj, j] - sum_rr act_n[r, rr] * F[rr, j] = 0
    constraint_rows = []
    for mats_m, mats_n, alg in (
        (m.left_act, n.left_act, m.left),
        (m.right_act, n.right_act, m.right),
    ):
        for bi in range(alg.dim):
            am = mats_m[bi]
            an = mats_n[bi]
            am_cols = am.columns()
            an_rows = {}
            for (r, c), v in an.entries.items():
                an_rows.setdefault(r, []).append((c, v))
            for j in range(dm):
                colm = am_cols.get(j, ())
                for r in range(dn):
                    row = {}
                    for jj, v in colm:
                        k = hidx(jj, r)
                        row[k] = fld.add(row.get(k, fld.zero), v)
                    for rr, v in an_rows.get(r, ()):
                        k = hidx(j, rr)
                        w = fld.sub(row.get(k, fld.zero), v)
                        if w:
                            row[k] = w
                        elif k in row:
                            del row[k]
                    row = {k: v for k, v in row.items() if v}
                    if row:
                        constraint_rows.append(row)
    return constraint_rows


def hom_bimodule(m: Bimodule, n: Bimodule) -> Subspace:
    """Bimodule maps M -> N as a subspace of Hom_k(M, N)."""
    if m.left != n.left or m.right != n.right:
        raise AlgebraMismatch("hom_bimodule needs the same algebra pair")
    rows = hom_constraint_rows(m, n)
    mtx = SparseMatrix(
        m.field, len(rows), m.dim * n.dim,
        [(i, k, v) for i, row in enumerate(rows) for k, v in row.items()],
    )
    from .sparse import solve_homogeneous

    return solve_homogeneous(mtx)


def hom_matrix_to_vector(mat: SparseMatrix) -> dict:
    """Flatten F[r, j] to the hom coordinate j * rows + r."""
    return {c * mat.rows + r: v for (r, c), v in mat.entries.items()}


def hom_vector_to_matrix(field, vec: dict, dim_in: int, dim_out: int) -> SparseMatrix:
    triples = []
    for k, v in vec.items():
        j, r = divmod(k, dim_out)
        triples.append((r, j, v))
    return SparseMatrix(field, dim_out, dim_in, triples)
