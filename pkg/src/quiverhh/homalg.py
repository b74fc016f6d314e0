"""Bimodule resolutions, Ext and Tor, and the Ext form of path cohomology.

The resolution used everywhere is the outer-tensor one with degree-n term
the sum of B^q M A^p over p+q = n+2 (p, q > 0).  It is free as a bimodule on
the inner factors, so bimodule Hom into X collapses to plain linear maps
from the inner tensor space, which keeps the Ext complexes small.
"""

from math import prod

from .bimodules import Bimodule, regular_bimodule, tensor_chain
from .complexes import path_value_space
from .errors import AlgebraMismatch, InputError, TorHypothesisFails
from .sparse import SparseMatrix, composition_is_zero, homology_dim


class ChainComplexDown:
    """Homological complex C_0 <- C_1 <- ...

    boundaries[n] maps degree n+1 to degree n; consecutive boundaries are
    checked to compose to zero at construction.
    """

    def __init__(self, field, spaces, boundaries):
        self.field = field
        self.spaces = spaces
        self.boundaries = boundaries
        if len(boundaries) != len(spaces) - 1:
            raise InputError("need one boundary per consecutive degree pair")
        for n, b in enumerate(boundaries):
            if b.rows != spaces[n] or b.cols != spaces[n + 1]:
                raise InputError(f"boundary {n} has shape {b.rows}x{b.cols}")
        for n in range(1, len(boundaries)):
            composition_is_zero(boundaries[n - 1], boundaries[n])

    def homology(self, n: int) -> int:
        f = self.field
        d_out = (self.boundaries[n - 1] if n > 0
                 else SparseMatrix.zeros(f, 0, self.spaces[0]))
        d_in = (self.boundaries[n] if n < len(self.boundaries)
                else SparseMatrix.zeros(f, self.spaces[n], 0))
        return homology_dim(d_out, d_in)


def _pair_merge(field, dims, pos, expansion, merged_dim, sign_exp,
                row_off, col_off, triples):
    """One multiply-adjacent-slots term of a tensor-space boundary."""
    d1, d2 = dims[pos], dims[pos + 1]
    pre = prod(dims[:pos])
    suf = prod(dims[pos + 2:])
    neg = sign_exp % 2
    for (u, v), items in expansion:
        if not items:
            continue
        for pp in range(pre):
            col_head = ((pp * d1 + u) * d2 + v) * suf
            row_head = pp * merged_dim
            for z, cv in items:
                val = field.neg(cv) if neg else cv
                rh = (row_head + z) * suf
                for s in range(suf):
                    triples.append((row_off + rh + s, col_off + col_head + s, val))


def _table_expansion(alg):
    return [((u, v), list(alg.table[u][v].items()))
            for u in range(alg.dim) for v in range(alg.dim)]


def _fold_left(mod):
    # (b, j) -> expansion of b . m_j
    cols = [m.columns() for m in mod.left_act]
    return [((b, j), cols[b].get(j, []))
            for b in range(mod.left.dim) for j in range(mod.dim)]


def _fold_right(mod):
    # (j, a) -> expansion of m_j . a
    cols = [m.columns() for m in mod.right_act]
    return [((j, a), cols[a].get(j, []))
            for j in range(mod.dim) for a in range(mod.right.dim)]


def _res_layout(mod, n):
    """Summands (q, p, offset, slot dims) of degree n, q ascending."""
    out = []
    off = 0
    for q in range(1, n + 2):
        p = n + 2 - q
        dims = [mod.left.dim] * q + [mod.dim] + [mod.right.dim] * p
        out.append((q, p, off, dims))
        off += prod(dims)
    return out, off


def arrow_resolution(mod: Bimodule, n_max: int) -> ChainComplexDown:
    """The free bimodule resolution with degree-n term sum of B^q M A^p.

    The returned complex carries .layouts (summand tables), .augmentation
    (the map BMA -> M, (b,m,a) -> bma) and .bimodule.
    """
    if n_max < 0:
        raise InputError("n_max must be >= 0")
    field = mod.field
    B, A = mod.left, mod.right
    layouts, spaces = [], []
    for n in range(n_max + 1):
        lay, total = _res_layout(mod, n)
        layouts.append(lay)
        spaces.append(total)
    btab = _table_expansion(B)
    atab = _table_expansion(A)
    fold_bm = _fold_left(mod)
    fold_ma = _fold_right(mod)
    boundaries = []
    for n in range(1, n_max + 1):
        triples = []
        dst_off = {(q, p): off for q, p, off, _ in layouts[n - 1]}
        for q, p, off, dims in layouts[n]:
            if q >= 2:
                roff = dst_off[(q - 1, p)]
                for i in range(1, q):
                    _pair_merge(field, dims, i - 1, btab, B.dim, i + 1,
                                roff, off, triples)
                _pair_merge(field, dims, q - 1, fold_bm, mod.dim, q + 1,
                            roff, off, triples)
            if p >= 2:
                # Koszul sign (-1)^(q-1) from the B-side degree
                roff = dst_off[(q, p - 1)]
                _pair_merge(field, dims, q, fold_ma, mod.dim, q - 1,
                            roff, off, triples)
                for i in range(1, p):
                    _pair_merge(field, dims, q + i, atab, A.dim, q - 1 + i,
                                roff, off, triples)
        boundaries.append(SparseMatrix(field, spaces[n - 1], spaces[n], triples))
    res = ChainComplexDown(field, spaces, boundaries)
    res.layouts = layouts
    res.bimodule = mod
    # augmentation (b, m, a) -> b m a
    triples = []
    dM, dA = mod.dim, A.dim
    rcols = [m.columns() for m in mod.right_act]
    for a in range(dA):
        for j in range(dM):
            half = rcols[a].get(j, [])
            for b in range(B.dim):
                col = (b * dM + j) * dA + a
                for mid, v1 in half:
                    for r, v2 in mod.left_act[b].columns().get(mid, ()):
                        triples.append((r, col, field.mul(v2, v1)))
    res.augmentation = SparseMatrix(field, dM, spaces[0], triples)
    if boundaries:
        assert res.augmentation.matmul(boundaries[0]).is_zero()
    return res


def ext_bimodule(mod: Bimodule, target: Bimodule, r_max: int):
    """dim Ext^r of bimodules over the same algebra pair, r = 0..r_max."""
    if mod.left != target.left or mod.right != target.right:
        raise AlgebraMismatch("Ext needs bimodules over the same algebra pair")
    if r_max < 0:
        raise InputError("r_max must be >= 0")
    field = mod.field
    B, A = mod.left, mod.right
    dX = target.dim
    res = arrow_resolution(mod, r_max + 1)
    # E^r has one Hom_k(inner tensor space, X) block per resolution summand
    hom_layouts, hom_dims = [], []
    for r in range(r_max + 2):
        lay, off = [], 0
        for q, p, _, dims in res.layouts[r]:
            ydim = prod(dims[1:-1])
            lay.append((q, p, off, ydim))
            off += ydim * dX
        hom_layouts.append(lay)
        hom_dims.append(off)

    act_cache = {}

    def pair_act(b, a):
        if (b, a) not in act_cache:
            act_cache[(b, a)] = target.left_act[b].matmul(target.right_act[a])
        return act_cache[(b, a)]

    diffs = []
    for r in range(r_max + 1):
        beta = res.boundaries[r]
        bcols = beta.columns()
        dst_hom = {(q, p): (off, ydim) for q, p, off, ydim in hom_layouts[r]}
        # decoder for C_r coordinates
        dst_res = res.layouts[r]
        triples = []
        for (q, p, hoff, ydim), (_, _, roff, dims) in zip(
                hom_layouts[r + 1], res.layouts[r + 1]):
            if ydim == 0:
                continue
            dA = dims[-1]
            for i, ci in B.unit.items():
                for j, cj in A.unit.items():
                    scale = field.mul(ci, cj)
                    for y in range(ydim):
                        col = roff + (i * ydim + y) * dA + j
                        for row, v in bcols.get(col, ()):
                            qT = pT = None
                            for q2, p2, off2, dims2 in dst_res:
                                if off2 <= row < off2 + prod(dims2):
                                    qT, pT, offT, dimsT = q2, p2, off2, dims2
                                    break
                            local = row - offT
                            aT = local % dimsT[-1]
                            rest = local // dimsT[-1]
                            ydT = prod(dimsT[1:-1])
                            yT = rest % ydT
                            bT = rest // ydT
                            hoffT, _ = dst_hom[(qT, pT)]
                            w = field.mul(scale, v)
                            for (xr, xc), pv in pair_act(bT, aT).entries.items():
                                triples.append((hoff + y * dX + xr,
                                                hoffT + yT * dX + xc,
                                                field.mul(w, pv)))
        diffs.append(SparseMatrix(field, hom_dims[r + 1], hom_dims[r], triples))
    out = []
    for r in range(r_max + 1):
        d_in = (diffs[r - 1] if r > 0
                else SparseMatrix.zeros(field, hom_dims[0], 0))
        out.append(homology_dim(diffs[r], d_in))
    return out


def tor_over(mod: Bimodule, other: Bimodule, n_max: int):
    """dim Tor_n over the shared middle algebra, n = 0..n_max.

    Only the right structure of the first argument and the left structure of
    the second take part; the outer actions are just carried along.
    """
    if mod.right != other.left:
        raise AlgebraMismatch("Tor needs a shared middle algebra")
    if n_max < 0:
        raise InputError("n_max must be >= 0")
    B = mod.right
    field = mod.field
    dM, dB, dN = mod.dim, B.dim, other.dim
    spaces = [dM * dB ** j * dN for j in range(n_max + 2)]
    btab = _table_expansion(B)
    fold_mb = _fold_right(mod)
    fold_bn = _fold_left(other)
    boundaries = []
    for j in range(1, n_max + 2):
        dims = [dM] + [dB] * j + [dN]
        triples = []
        _pair_merge(field, dims, 0, fold_mb, dM, 0, 0, 0, triples)
        for i in range(1, j):
            _pair_merge(field, dims, i, btab, dB, i, 0, 0, triples)
        _pair_merge(field, dims, j, fold_bn, dN, j, 0, 0, triples)
        boundaries.append(SparseMatrix(field, spaces[j - 1], spaces[j], triples))
    cx = ChainComplexDown(field, spaces, boundaries)
    return [cx.homology(n) for n in range(n_max + 1)]


def _tor_vanishing_detail(delta, path, n_max):
    m = path.length
    if m < 2:
        raise InputError("Tor conditions concern paths of length at least 2")
    arrows = path.arrows  # composition order, arrows[0] acts last
    for i in range(2, m + 1):
        tail = [delta.bimodule_at[arrows[m - jj]] for jj in range(i - 1, 0, -1)]
        dims = tor_over(delta.bimodule_at[arrows[m - i]], tensor_chain(tail), n_max)
        for n in range(1, n_max + 1):
            if dims[n]:
                return False, i, n, dims[n]
    return True, None, None, None


def tor_vanishing(delta, path, n_max):
    """Whether all Tor groups along the path vanish up to degree n_max.

    Returns (True, None) or (False, (i, n)) naming the first failing split
    a_i against a_{i-1}..a_1.  Vanishing is verified up to the cap only.
    """
    ok, i, n, _ = _tor_vanishing_detail(delta, path, n_max)
    return (True, None) if ok else (False, (i, n))


def along_path_via_ext(delta, path, r_max: int):
    """dims of the path cohomology in degrees m..m+r_max, by Ext.

    For paths of length >= 2 the Tor-vanishing hypothesis is verified up to
    degree r_max+1 first; without it the Ext identity is not claimed.
    """
    m = path.length
    if m < 1:
        raise InputError("need a path of positive length")
    if r_max < 0:
        raise InputError("r_max must be >= 0")
    kind, obj, _ = path_value_space(delta, path)
    if kind == "zero":
        return [0] * (r_max + 1)
    if m >= 2:
        ok, i, n, dim = _tor_vanishing_detail(delta, path, max(1, r_max + 1))
        if not ok:
            raise TorHypothesisFails(i, n, dim)
    m_omega = tensor_chain([delta.bimodule_at[lab] for lab in path.arrows])
    target = regular_bimodule(obj) if kind == "alg" else obj
    return ext_bimodule(m_omega, target, r_max)
