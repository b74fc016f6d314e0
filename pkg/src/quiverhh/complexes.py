"""Cochain complexes over a Q-set and the absolute Hochschild oracle.

The relative complex in degree n is the sum over all paths w of length <= n
and all trajectories t of duration n over w of Hom_k(t_evaluated, Z_w), where
Z_w is the vertex algebra for a cycle, the bimodule of the parallel arrow for
a non-cycle that has one, and zero otherwise.  The differential of a cochain
supported on one trajectory block lands only in blocks of successor
trajectories; with all compositions in M zero, the parallel-replacement
successors contribute nothing and are skipped during assembly (their blocks
stay structurally zero).

Hom coordinates are row-major: a block cochain f sits at positions
(input tuple index) * dim Z + (output index), tuples enumerated leftmost slot
slowest.
"""

from math import prod

from .errors import BudgetExceeded, ConsistencyError, InputError, InvalidQSet
from .quiver import QPath, enumerate_paths
from .sparse import (
    SparseMatrix,
    Subspace,
    composition_is_zero,
    homology_dim,
    kernel_basis,
    rank,
)
from .trajectories import Trajectory, trajectories

DEFAULT_BUDGET = 10 ** 8


class BlockInfo:
    __slots__ = ("traj", "path", "offset", "slot_dims", "tuple_dim",
                 "delta_kind", "delta_obj", "delta_dim", "dim", "label")

    def __init__(self, traj, path, offset, slot_dims, delta_kind, delta_obj, delta_dim):
        self.traj = traj
        self.path = path
        self.offset = offset
        self.slot_dims = slot_dims
        self.tuple_dim = prod(slot_dims)
        self.delta_kind = delta_kind
        self.delta_obj = delta_obj
        self.delta_dim = delta_dim
        self.dim = self.tuple_dim * delta_dim
        self.label = traj.label()


class DegreeLayout:
    def __init__(self, blocks):
        self.blocks = blocks
        self.dim = sum(b.dim for b in blocks)
        self.by_key = {b.traj.key(): b for b in blocks}


def path_value_space(delta, path):
    """(kind, payload, dim) of Z_w: the space cochains over w take values in."""
    if path.is_cycle:
        alg = delta.algebra_at[path.source]
        return "alg", alg, alg.dim
    c = delta.quiver.arrow_between(path.source, path.target)
    if c is None:
        return "zero", None, 0
    mod = delta.bimodule_at[c]
    return "mod", mod, mod.dim


def _slot_dims(delta, traj):
    out = []
    for kind, key in traj.slots():
        if kind == "A":
            out.append(delta.algebra_at[key].dim)
        else:
            out.append(delta.bimodule_at[key].dim)
    return out


def _layout(delta, paths, n) -> DegreeLayout:
    blocks = []
    offset = 0
    for path in paths:
        kind, obj, dz = path_value_space(delta, path)
        for traj in trajectories(path, n):
            b = BlockInfo(traj, path, offset, _slot_dims(delta, traj), kind, obj, dz)
            blocks.append(b)
            offset += b.dim
    return DegreeLayout(blocks)


class CochainComplex:
    """Degreewise block-partitioned spaces with differentials d_n into n+1.

    layouts covers degrees 0..top; diffs has one matrix per consecutive pair
    and d.d = 0 is asserted at construction.  truncated means the top degree
    was dropped for budget reasons, so cohomology there is only bounded.
    """

    def __init__(self, field, layouts, diffs, truncated=False):
        self.field = field
        self.layouts = layouts
        self.diffs = diffs
        self.truncated = truncated
        self.spaces = [l.dim for l in layouts]
        if len(diffs) != len(layouts) - 1:
            raise InputError("need exactly one differential per consecutive degree pair")
        for n, d in enumerate(diffs):
            if d.cols != self.spaces[n] or d.rows != self.spaces[n + 1]:
                raise InputError(f"differential {n} has shape {d.rows}x{d.cols}")
        for n in range(1, len(diffs)):
            composition_is_zero(diffs[n], diffs[n - 1])

    @property
    def top_degree(self) -> int:
        return len(self.layouts) - 1

    def blocks(self, n):
        return [(b.label, b.dim) for b in self.layouts[n].blocks]

    def block_of(self, n, traj_key) -> BlockInfo:
        return self.layouts[n].by_key[traj_key]


class CohomologyResult:
    """Per-degree dimensions with optional cocycle representatives.

    exact[n] is False when the outgoing differential was unavailable, in
    which case dims[n] only bounds the true dimension from above.
    """

    def __init__(self, dims, representatives, exact):
        self.dims = dims
        self.representatives = representatives
        self.exact = exact

    def dim(self, n):
        return self.dims[n]


def _sgn(field, exponent, value):
    return value if exponent % 2 == 0 else field.neg(value)


def _check_budget(rows, cols, budget, context):
    if budget is not None and rows * cols > budget:
        raise BudgetExceeded(rows, cols, budget, context)


# -- block assembly of the relative differential ------------------------------


def _contraction_entries(field, src, dst, spec_list, triples):
    """Middle terms: f composes with one multiplication of adjacent inputs.

    spec_list holds (slot position, pair kind, expansion) where expansion maps
    a basis pair of the two merged slots to [(merged index, coeff)].
    """
    dims_s = dst.slot_dims
    dz = src.delta_dim
    acc = {}
    for jj0, exp_pairs, merged_dim in spec_list:
        sign_odd = (jj0 + 1) % 2
        d1 = dims_s[jj0]
        d2 = dims_s[jj0 + 1]
        pre = prod(dims_s[:jj0])
        suf = prod(dims_s[jj0 + 2:])
        for (a, b), items in exp_pairs:
            if not items:
                continue
            for p in range(pre):
                row_head = (p * d1 + a) * d2 + b
                col_head_base = p * merged_dim
                for z, cv in items:
                    val = field.neg(cv) if sign_odd else cv
                    col_head = col_head_base + z
                    rb = row_head * suf
                    cb = col_head * suf
                    for s in range(suf):
                        key = (rb + s, cb + s)
                        w = field.add(acc.get(key, field.zero), val)
                        if w:
                            acc[key] = w
                        elif key in acc:
                            del acc[key]
    for (rt, ct), v in acc.items():
        rbase = dst.offset + rt * dz
        cbase = src.offset + ct * dz
        for r in range(dz):
            triples.append((rbase + r, cbase + r, v))


def _outer_entries(field, src, dst, act_entries, first, new_dim, out_dim, sign_exp, triples):
    """End terms: the new first/last input acts on the value of f.

    act_entries: list of (new slot index, output row, output col, coeff).
    """
    t_dim = src.tuple_dim
    dz = src.delta_dim
    for u, rp, r, cv in act_entries:
        val = _sgn(field, sign_exp, cv)
        if first:
            for t in range(t_dim):
                row = dst.offset + (u * t_dim + t) * out_dim + rp
                col = src.offset + t * dz + r
                triples.append((row, col, val))
        else:
            for t in range(t_dim):
                row = dst.offset + (t * new_dim + u) * out_dim + rp
                col = src.offset + t * dz + r
                triples.append((row, col, val))


def _left_action_entries(kind, obj):
    """(u, rp, r, coeff) lists for u . z with z in the value space."""
    out = []
    if kind == "alg":
        for u in range(obj.dim):
            for r in range(obj.dim):
                for rp, cv in obj.table[u][r].items():
                    out.append((u, rp, r, cv))
    else:
        for u in range(obj.left.dim):
            for (rp, r), cv in obj.left_act[u].entries.items():
                out.append((u, rp, r, cv))
    return out


def _right_action_entries(kind, obj):
    out = []
    if kind == "alg":
        for u in range(obj.dim):
            for r in range(obj.dim):
                for rp, cv in obj.table[r][u].items():
                    out.append((u, rp, r, cv))
    else:
        for u in range(obj.right.dim):
            for (rp, r), cv in obj.right_act[u].entries.items():
                out.append((u, rp, r, cv))
    return out


def _tau0_entries(field, delta, src: BlockInfo, dst_layout: DegreeLayout, triples):
    traj = src.traj
    path = traj.path
    m = path.length
    n = traj.duration
    verts = path.vertex_sequence()
    for i0 in range(1, m + 2):
        w = list(traj.waiting)
        w[i0 - 1] += 1
        dst = dst_layout.by_key.get(Trajectory(path, w).key())
        if dst is None or dst.dim == 0:
            continue
        v = verts[i0 - 1]
        alg = delta.algebra_at[v]
        # 0-based start of the grown waiting block inside the successor
        p0 = sum(traj.waiting[i0:]) + (m - i0 + 1)
        specs = []
        for t in range(traj.waiting[i0 - 1]):
            exp = [((a, b), list(alg.table[a][b].items()))
                   for a in range(alg.dim) for b in range(alg.dim)]
            specs.append((p0 + t, exp, alg.dim))
        if i0 <= m:
            arr = path.arrows[m - i0]
            mod = delta.bimodule_at[arr]
            cols = [mat.columns() for mat in mod.right_act]
            exp = [((a, b), cols[b].get(a, []))
                   for a in range(mod.dim) for b in range(alg.dim)]
            specs.append((p0 - 1, exp, mod.dim))
        if i0 >= 2:
            arr = path.arrows[m - i0 + 1]
            mod = delta.bimodule_at[arr]
            cols = [mat.columns() for mat in mod.left_act]
            exp = [((a, b), cols[a].get(b, []))
                   for a in range(alg.dim) for b in range(mod.dim)]
            specs.append((p0 + traj.waiting[i0 - 1], exp, mod.dim))
        _contraction_entries(field, src, dst, specs, triples)
        if i0 == m + 1:
            acts = _left_action_entries(src.delta_kind, src.delta_obj)
            _outer_entries(field, src, dst, acts, True, alg.dim, src.delta_dim, 0, triples)
        if i0 == 1:
            acts = _right_action_entries(src.delta_kind, src.delta_obj)
            _outer_entries(field, src, dst, acts, False, alg.dim, src.delta_dim,
                           n + 1, triples)


def _tau1_entries(field, delta, src: BlockInfo, dst_layout: DegreeLayout, triples):
    # arrow-extension successors contribute only from cycle blocks: the value
    # of f then lies in a vertex algebra and the new input acts on it
    traj = src.traj
    path = traj.path
    if not path.is_cycle:
        return
    q = delta.quiver
    v = path.source
    n = traj.duration
    dz = src.delta_dim
    for c in sorted(q.arrows_from(v), key=str):
        dst = dst_layout.by_key.get(
            Trajectory(path.then(c), traj.waiting + (0,)).key())
        if dst is None or dst.dim == 0:
            continue
        mod = delta.bimodule_at[c]
        acts = []
        for r in range(dz):
            for (rp, u), cv in mod.right_act[r].entries.items():
                acts.append((u, rp, r, cv))
        _outer_entries(field, src, dst, acts, True, mod.dim, mod.dim, 0, triples)
    for c in sorted(q.arrows_into(v), key=str):
        dst = dst_layout.by_key.get(
            Trajectory(path.before(c), (0,) + traj.waiting).key())
        if dst is None or dst.dim == 0:
            continue
        mod = delta.bimodule_at[c]
        acts = []
        for r in range(dz):
            for (rp, u), cv in mod.left_act[r].entries.items():
                acts.append((u, rp, r, cv))
        _outer_entries(field, src, dst, acts, False, mod.dim, mod.dim, n + 1, triples)


def _assemble_diff(field, delta, src_layout, dst_layout, tau1=True):
    triples = []
    for src in src_layout.blocks:
        if src.dim == 0:
            continue
        _tau0_entries(field, delta, src, dst_layout, triples)
        if tau1:
            _tau1_entries(field, delta, src, dst_layout, triples)
    return SparseMatrix(field, dst_layout.dim, src_layout.dim, triples)


def _check_lambda(lam, delta):
    if getattr(lam, "delta", None) is delta:
        return
    from .qset import assemble_lambda

    rebuilt = assemble_lambda(delta)
    if (lam.table != rebuilt.table or lam.unit != rebuilt.unit
            or lam.system != rebuilt.system):
        raise InvalidQSet("algebra does not match the assembled Q-set algebra")


def relative_complex(lam, delta, n_max, budget=DEFAULT_BUDGET) -> CochainComplex:
    """The trajectory-partitioned complex computing the cohomology of lam.

    Built one degree past n_max so degree n_max is exact; if that extra
    differential would exceed the budget the complex is flagged truncated.
    """
    if n_max < 0:
        raise InputError("n_max must be >= 0")
    _check_lambda(lam, delta)
    field = delta.field
    top = n_max + 1
    cq, dq = enumerate_paths(delta.quiver, top)
    paths = sorted(cq + dq, key=QPath.sort_key)
    layouts = [_layout(delta, paths, n) for n in range(top + 1)]
    diffs = []
    truncated = False
    for n in range(top):
        rows_, cols_ = layouts[n + 1].dim, layouts[n].dim
        if budget is not None and rows_ * cols_ > budget:
            if n == top - 1:
                truncated = True
                layouts = layouts[:top]
                break
            raise BudgetExceeded(rows_, cols_, budget, f"relative differential d_{n}")
        diffs.append(_assemble_diff(field, delta, layouts[n], layouts[n + 1]))
    cx = CochainComplex(field, layouts, diffs, truncated=truncated)
    cx.delta = delta
    cx.requested_max = n_max
    return cx


def along_path_complex(delta, path, n_max, budget=DEFAULT_BUDGET) -> CochainComplex:
    """The single-path complex: only waiting-time successors differentiate."""
    if n_max < 0:
        raise InputError("n_max must be >= 0")
    field = delta.field
    top = n_max + 1
    layouts = []
    for n in range(top + 1):
        kind, obj, dz = path_value_space(delta, path)
        blocks = []
        offset = 0
        for traj in trajectories(path, n):
            b = BlockInfo(traj, path, offset, _slot_dims(delta, traj), kind, obj, dz)
            blocks.append(b)
            offset += b.dim
        layouts.append(DegreeLayout(blocks))
    diffs = []
    truncated = False
    for n in range(top):
        rows_, cols_ = layouts[n + 1].dim, layouts[n].dim
        if budget is not None and rows_ * cols_ > budget:
            if n == top - 1:
                truncated = True
                layouts = layouts[:top]
                break
            raise BudgetExceeded(rows_, cols_, budget, f"along-path differential d_{n}")
        diffs.append(_assemble_diff(field, delta, layouts[n], layouts[n + 1], tau1=False))
    cx = CochainComplex(field, layouts, diffs, truncated=truncated)
    cx.delta = delta
    cx.path = path
    cx.requested_max = n_max
    return cx


def split_noncycle(j_complex: CochainComplex, delta):
    """(D, C, inclusions, projections): non-cycle subcomplex and cycle quotient.

    Both selection families are verified to be chain maps; the differential
    entries from non-cycle blocks into cycle blocks must vanish.
    """
    field = j_complex.field
    sub_layouts, quot_layouts, incls, projs = [], [], [], []
    for layout in j_complex.layouts:
        d_blocks, c_blocks = [], []
        doff = coff = 0
        incl_t, proj_t = [], []
        for b in layout.blocks:
            nb = BlockInfo(b.traj, b.path, 0, b.slot_dims, b.delta_kind,
                           b.delta_obj, b.delta_dim)
            if b.path.is_cycle:
                nb.offset = coff
                coff += nb.dim
                c_blocks.append(nb)
                proj_t.extend((nb.offset + k, b.offset + k, field.one)
                              for k in range(b.dim))
            else:
                nb.offset = doff
                doff += nb.dim
                d_blocks.append(nb)
                incl_t.extend((b.offset + k, nb.offset + k, field.one)
                              for k in range(b.dim))
        sub_layouts.append(DegreeLayout(d_blocks))
        quot_layouts.append(DegreeLayout(c_blocks))
        incls.append(SparseMatrix(field, layout.dim, doff, incl_t))
        projs.append(SparseMatrix(field, coff, layout.dim, proj_t))

    d_diffs, c_diffs = [], []
    for n, d in enumerate(j_complex.diffs):
        full = d.matmul(incls[n])
        leak = projs[n + 1].matmul(full)
        if not leak.is_zero():
            raise ConsistencyError(
                "non-cycle cochains differentiate into cycle blocks")
        dD = incls[n + 1].transpose().matmul(full)
        if incls[n + 1].matmul(dD) != full:
            raise ConsistencyError("inclusion is not a chain map")
        d_diffs.append(dD)
        dC = projs[n + 1].matmul(d).matmul(projs[n].transpose())
        if dC.matmul(projs[n]) != projs[n + 1].matmul(d):
            raise ConsistencyError("projection is not a chain map")
        c_diffs.append(dC)

    sub = CochainComplex(field, sub_layouts, d_diffs, truncated=j_complex.truncated)
    quot = CochainComplex(field, quot_layouts, c_diffs, truncated=j_complex.truncated)
    sub.delta = quot.delta = delta
    return sub, quot, incls, projs


# -- cohomology ----------------------------------------------------------------


def _representatives(field, d_out, img: Subspace):
    reps = []
    space = img
    for v in kernel_basis(d_out):
        _, rem = space.reduce(v)
        if rem:
            reps.append(rem)
            space = space.extended(rem)
    return reps


def cohomology(cx: CochainComplex, with_representatives=True) -> CohomologyResult:
    field = cx.field
    dims, reps, exact = [], [], []
    for n in range(len(cx.layouts)):
        d_in = cx.diffs[n - 1] if n > 0 else SparseMatrix.zeros(field, cx.spaces[0], 0)
        if n < len(cx.diffs):
            d_out = cx.diffs[n]
            dims.append(homology_dim(d_out, d_in))
            exact.append(True)
            if with_representatives:
                reps.append(_representatives(field, d_out, Subspace.image(d_in)))
            else:
                reps.append(None)
        else:
            dims.append(cx.spaces[n] - rank(d_in))
            exact.append(False)
            reps.append(None)
    return CohomologyResult(dims, reps, exact)


# -- the absolute bar-complex oracle ------------------------------------------


def bar_differential(lam, n: int) -> SparseMatrix:
    """The standard coboundary Hom(L^n, L) -> Hom(L^(n+1), L), fully expanded."""
    d = lam.dim
    field = lam.field
    rows_sp = d ** (n + 2)
    cols_sp = d ** (n + 1)
    triples = []
    dn = d ** n
    # x1 . f(x2 .. x_{n+1})
    for x1 in range(d):
        for r in range(d):
            for rp, cv in lam.table[x1][r].items():
                for s in range(dn):
                    triples.append((((x1 * dn + s) * d + rp), s * d + r, cv))
    # (-1)^j f(.. x_j x_{j+1} ..)
    for j in range(1, n + 1):
        pre = d ** (j - 1)
        suf = d ** (n - j)
        for a in range(d):
            for b in range(d):
                items = lam.table[a][b].items()
                if not items:
                    continue
                for p in range(pre):
                    rh = (p * d + a) * d + b
                    for z, cv in items:
                        val = _sgn(field, j, cv)
                        ch = p * d + z
                        for s in range(suf):
                            rt = (rh * suf + s) * d
                            ct = (ch * suf + s) * d
                            for r in range(d):
                                triples.append((rt + r, ct + r, val))
    # (-1)^{n+1} f(x1 .. x_n) . x_{n+1}
    for ul in range(d):
        for r in range(d):
            for rp, cv in lam.table[r][ul].items():
                val = _sgn(field, n + 1, cv)
                for t in range(dn):
                    triples.append(((t * d + ul) * d + rp, t * d + r, val))
    return SparseMatrix(field, rows_sp, cols_sp, triples)


def bar_hochschild(lam, n_max, budget=DEFAULT_BUDGET,
                   with_representatives=False) -> CohomologyResult:
    """Hochschild cohomology of lam by the full bar complex, degrees 0..n_max.

    Exponential in n_max; guarded by the budget on each differential's dense
    size.  Used as the independent check for every other computation here.
    """
    if n_max < 0:
        raise InputError("n_max must be >= 0")
    d = lam.dim
    field = lam.field
    diffs = []
    for n in range(n_max + 1):
        _check_budget(d ** (n + 2), d ** (n + 1), budget, f"bar differential d_{n}")
        diffs.append(bar_differential(lam, n))
        if n:
            composition_is_zero(diffs[n], diffs[n - 1])
    dims, reps, exact = [], [], []
    for n in range(n_max + 1):
        d_in = diffs[n - 1] if n > 0 else SparseMatrix.zeros(field, d, 0)
        dims.append(homology_dim(diffs[n], d_in))
        exact.append(True)
        if with_representatives:
            reps.append(_representatives(field, diffs[n], Subspace.image(d_in)))
        else:
            reps.append(None)
    return CohomologyResult(dims, reps, exact)
