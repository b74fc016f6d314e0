"""Cup products, connecting maps, long exact sequences, and closed forms.

Splitting the relative complex into its non-cycle subcomplex and cycle
quotient yields a long exact sequence in cohomology.  The connecting map has
two realizations: the zig-zag construction on representatives, and a closed
graded-commutator formula with the canonical arrow-identity cochain.  For
two-vertex round trips with zero corner products the connecting map collapses
to small matrices between spaces of bimodule maps, which gives dimension
formulas degree by degree without ever building the large complexes.
"""

import heapq
from bisect import bisect_right

from .algebras import product_algebra
from .bimodules import regular_bimodule, tensor_over, Bimodule
from .complexes import (
    DEFAULT_BUDGET,
    along_path_complex,
    bar_hochschild,
    cohomology,
    path_value_space,
    relative_complex,
    split_noncycle,
)
from .errors import (
    AlgebraMismatch,
    BudgetExceeded,
    ConsistencyError,
    ExactnessFailure,
    InputError,
    LiftNotInSubcomplex,
    NotACocycle,
    NotProjective,
)
from .homalg import ext_bimodule
from .qset import QSet, SquareData, assemble_lambda
from .quiver import QPath, Quiver, enumerate_paths
from .sparse import SparseMatrix, Subspace, kernel_basis, rank
from .trajectories import Trajectory, trajectories


# -- cochains ------------------------------------------------------------------


class Cochain:
    """A homogeneous cochain of a trajectory-graded complex, held sparsely."""

    def __init__(self, cx, degree, vec):
        if not 0 <= degree <= cx.top_degree:
            raise InputError(f"degree {degree} outside the built range")
        self.cx = cx
        self.degree = degree
        self.vec = {c: v for c, v in vec.items() if v}

    @property
    def field(self):
        return self.cx.field

    def support(self):
        """[(block, local coordinate dict)] for every block the cochain touches."""
        layout = self.cx.layouts[self.degree]
        offsets = [b.offset for b in layout.blocks]
        parts = {}
        for coord, val in self.vec.items():
            i = bisect_right(offsets, coord) - 1
            parts.setdefault(i, {})[coord - layout.blocks[i].offset] = val
        return [(layout.blocks[i], loc) for i, loc in sorted(parts.items())]

    def __add__(self, other):
        if other.cx is not self.cx or other.degree != self.degree:
            raise InputError("cochain sum needs matching complex and degree")
        f = self.field
        out = dict(self.vec)
        for c, v in other.vec.items():
            w = f.add(out.get(c, f.zero), v)
            if w:
                out[c] = w
            elif c in out:
                del out[c]
        return Cochain(self.cx, self.degree, out)

    def scaled(self, scalar):
        f = self.field
        return Cochain(self.cx, self.degree,
                       {c: f.mul(scalar, v) for c, v in self.vec.items()})

    def is_zero(self) -> bool:
        return not self.vec

    def differential(self):
        if self.degree >= len(self.cx.diffs):
            raise InputError("no differential out of the top degree")
        out = self.cx.diffs[self.degree].matvec(self.vec)
        return Cochain(self.cx, self.degree + 1, out)


def unit_cochain(cx) -> Cochain:
    """The degree-0 cochain sending each vertex block to its algebra unit."""
    f = cx.field
    vec = {}
    for b in cx.layouts[0].blocks:
        if b.delta_kind != "alg":
            continue
        for r, c in b.delta_obj.unit.items():
            vec[b.offset + r] = f.of(c)
    return Cochain(cx, 0, vec)


def arrow_identity_cochain(cx) -> Cochain:
    """The degree-1 cochain acting as the identity on every arrow block."""
    f = cx.field
    vec = {}
    if cx.top_degree >= 1:
        for b in cx.layouts[1].blocks:
            if b.path.length == 1 and b.traj.waiting == (0, 0):
                for j in range(b.delta_dim):
                    vec[b.offset + j * b.delta_dim + j] = f.one
    return Cochain(cx, 1, vec)


def cup_product(f: Cochain, g: Cochain, out=None) -> Cochain:
    """Cup product, with values multiplied in the assembled algebra.

    Blockwise: f's trajectory is placed to the left of g's, the junction
    waiting times merge, and the two values multiply (vertex algebra times
    vertex algebra, an algebra value acting on an arrow value from either
    side, and arrow value times arrow value equal to zero).  Blocks whose
    paths do not concatenate contribute nothing.  The result lives in `out`
    (default: f's complex), which must already contain the concatenated
    trajectory blocks at the combined degree.
    """
    if out is None:
        out = f.cx
    if f.field is not g.field or f.field is not out.field:
        raise InputError("cup factors over different fields")
    deg = f.degree + g.degree
    if deg > out.top_degree:
        raise InputError(f"target complex stops below degree {deg}")
    fld = f.field
    col_cache = {}

    def cols(mat):
        got = col_cache.get(id(mat))
        if got is None:
            got = col_cache[id(mat)] = mat.columns()
        return got

    vec = {}
    for bf, floc in f.support():
        for bg, gloc in g.support():
            if bf.path.source != bg.path.target:
                continue
            kf, kg = bf.delta_kind, bg.delta_kind
            if kf == "mod" and kg == "mod":
                continue  # compositions of arrow values vanish
            spath = bf.path.concat(bg.path)
            waits = (bg.traj.waiting[:-1]
                     + (bg.traj.waiting[-1] + bf.traj.waiting[0],)
                     + bf.traj.waiting[1:])
            key = Trajectory(spath, waits).key()
            try:
                tgt = out.block_of(deg, key)
            except KeyError:
                raise InputError(
                    f"target complex has no block for {Trajectory(spath, waits).label()}"
                ) from None
            dz = tgt.delta_dim
            for cf, vf in floc.items():
                jf, rf = divmod(cf, bf.delta_dim)
                for cg, vg in gloc.items():
                    jg, rg = divmod(cg, bg.delta_dim)
                    if kf == "alg" and kg == "alg":
                        items = bf.delta_obj.table[rf][rg].items()
                    elif kf == "alg":
                        items = cols(bg.delta_obj.left_act[rf]).get(rg, ())
                    else:
                        items = cols(bf.delta_obj.right_act[rg]).get(rf, ())
                    if not items:
                        continue
                    scale = fld.mul(vf, vg)
                    base = tgt.offset + (jf * bg.tuple_dim + jg) * dz
                    for r_out, cv in items:
                        coord = base + r_out
                        w = fld.add(vec.get(coord, fld.zero), fld.mul(scale, fld.of(cv)))
                        if w:
                            vec[coord] = w
                        elif coord in vec:
                            del vec[coord]
    return Cochain(out, deg, vec)


# -- the connecting map, twice -------------------------------------------------


def connecting_nabla_formula(delta, n, f: Cochain) -> Cochain:
    """The closed form of the connecting map on a cycle-supported cocycle.

    Returns 1 cup f + (-1)^(n+1) f cup 1 with 1 the arrow-identity cochain;
    the output is supported on non-cycle paths one arrow longer than the
    inputs' paths.
    """
    if f.degree != n:
        raise InputError(f"cochain has degree {f.degree}, expected {n}")
    if f.cx.top_degree < n + 1:
        raise InputError("complex too short to hold the output degree")
    for b, _ in f.support():
        if not b.path.is_cycle:
            raise InputError(f"support must be on cycle paths, found {b.label}")
    # cocycle in the quotient: the same-path part of df must vanish
    df = f.differential()
    for b, _ in df.support():
        if b.path.is_cycle:
            raise NotACocycle(f"(cycle-block differential survives at {b.label})")
    arrow_labels = {b.path.arrows[0] for b in f.cx.layouts[1].blocks
                    if b.path.length == 1} if f.cx.top_degree >= 1 else set()
    if arrow_labels != {a[0] for a in delta.quiver.arrows}:
        raise InputError("cochain was built from a different Q-set")
    one = arrow_identity_cochain(f.cx)
    sign = f.field.one if (n + 1) % 2 == 0 else f.field.neg(f.field.one)
    out = cup_product(one, f) + cup_product(f, one).scaled(sign)
    for b, _ in out.support():
        if b.path.is_cycle:
            raise ConsistencyError("connecting value leaked onto a cycle path")
    return out


def class_coordinates(field, image: Subspace, reps):
    """Coefficient extractor for cohomology classes.

    Given the coboundary image and a representative family produced by
    `cohomology`, returns a function sending a cocycle vector to its
    coefficient list over the representatives.  Vectors outside the spanned
    cocycle space raise ConsistencyError.
    """
    space = image
    scales = []
    for r in reps:
        k = len(space.pivots)
        space = space.extended(r)
        if len(space.pivots) != k + 1:
            raise ConsistencyError("representative already lies in the span")
        coord, row = space.pivots[k]
        piv = field.of(row[coord]) if field.p is None else row[coord] % field.p
        scales.append(field.mul(piv, field.inv(r[coord])))
    base = image.dim

    def coords(vec):
        cs, rem = space.reduce(vec)
        if rem:
            raise ConsistencyError("vector is not a cocycle of the spanned space")
        return [field.mul(cs[base + i], s) for i, s in enumerate(scales)]

    return coords


class _LesContext:
    """The split relative complex with cohomology of all three pieces."""

    def __init__(self, delta, n_max, budget=DEFAULT_BUDGET):
        self.delta = delta
        self.n_max = n_max
        self.lam = assemble_lambda(delta)
        self.relative = relative_complex(self.lam, delta, n_max, budget)
        self.sub, self.quot, self.incls, self.projs = split_noncycle(self.relative, delta)
        self.h_sub = cohomology(self.sub)
        self.h_all = cohomology(self.relative)
        self.h_quot = cohomology(self.quot)

    def _expander(self, cx, hres, n):
        field = cx.field
        d_in = (cx.diffs[n - 1] if n > 0
                else SparseMatrix.zeros(field, cx.spaces[0], 0))
        return class_coordinates(field, Subspace.image(d_in), hres.representatives[n])

    def snake_matrix(self, n) -> SparseMatrix:
        field = self.relative.field
        coords = self._expander(self.sub, self.h_sub, n + 1)
        section = self.projs[n].transpose()
        restrict = self.incls[n + 1].transpose()
        triples = []
        for j, z in enumerate(self.h_quot.representatives[n]):
            dz = self.relative.diffs[n].matvec(section.matvec(z))
            if self.projs[n + 1].matvec(dz):
                raise LiftNotInSubcomplex(f"(degree {n})")
            for i, c in enumerate(coords(restrict.matvec(dz))):
                if c:
                    triples.append((i, j, c))
        return SparseMatrix(field, len(self.h_sub.representatives[n + 1]),
                            len(self.h_quot.representatives[n]), triples)

    def induced(self, push, src_reps, tgt_cx, tgt_h, n) -> SparseMatrix:
        field = tgt_cx.field
        coords = self._expander(tgt_cx, tgt_h, n)
        triples = []
        for j, z in enumerate(src_reps):
            for i, c in enumerate(coords(push.matvec(z))):
                if c:
                    triples.append((i, j, c))
        return SparseMatrix(field, len(tgt_h.representatives[n]), len(src_reps), triples)


def connecting_snake(delta, n, budget=DEFAULT_BUDGET) -> SparseMatrix:
    """The connecting map on representatives, by lift-differentiate-reduce.

    Columns index the degree-n representatives of the cycle quotient, rows
    the degree-(n+1) representatives of the non-cycle subcomplex: each
    quotient representative is lifted through the coordinate section, its
    differential is checked to land in non-cycle blocks, and the result is
    reduced modulo subcomplex coboundaries.
    """
    return _LesContext(delta, n + 1, budget).snake_matrix(n)


def connecting_agreement(delta, n_max, budget=DEFAULT_BUDGET) -> bool:
    """Check the snake construction against the closed commutator formula.

    Applies both realizations of the connecting map to every cycle-quotient
    representative in degrees 0..n_max-1 and compares the induced coordinates
    modulo subcomplex coboundaries.  Raises ConsistencyError on the first
    disagreement, returns True otherwise.
    """
    if n_max < 1:
        raise InputError("n_max must be at least 1")
    field = delta.field
    cx = relative_complex(assemble_lambda(delta), delta, n_max, budget)
    sub, quot, incls, projs = split_noncycle(cx, delta)
    h_sub = cohomology(sub)
    h_quot = cohomology(quot)
    for n in range(n_max):
        snake = connecting_snake(delta, n, budget)
        coords = class_coordinates(field, Subspace.image(sub.diffs[n]),
                                   h_sub.representatives[n + 1])
        for j, rep in enumerate(h_quot.representatives[n]):
            f = Cochain(cx, n, projs[n].transpose().matvec(rep))
            out = connecting_nabla_formula(delta, n, f)
            u = incls[n + 1].transpose().matvec(out.vec)
            if incls[n + 1].matvec(u) != out.vec:
                raise ConsistencyError(
                    f"formula image leaves the non-cycle subcomplex in degree {n}")
            column = [snake.entries.get((i, j), field.zero)
                      for i in range(snake.rows)]
            if coords(u) != column:
                raise ConsistencyError(
                    f"connecting map realizations disagree in degree {n}")
    return True


# -- the long exact sequence ---------------------------------------------------


class LESReport:
    """Node dimensions, maps on representatives, and per-path breakdowns.

    The sequence reads ... -> sub^n -> full^n -> quot^n -> sub^(n+1) -> ...
    with `incl`, `proj`, `nabla` the three map families.  Breakdown entries
    pair a path label with the dimension that path contributes to its node.
    """

    def __init__(self, n_max, sub_dims, full_dims, quot_dims, incl, proj, nabla,
                 exact_nodes, sub_breakdown, quot_breakdown):
        self.n_max = n_max
        self.sub_dims = sub_dims
        self.full_dims = full_dims
        self.quot_dims = quot_dims
        self.incl = incl
        self.proj = proj
        self.nabla = nabla
        self.exact_nodes = exact_nodes
        self.sub_breakdown = sub_breakdown
        self.quot_breakdown = quot_breakdown

    def node_dims(self, n):
        return (self.sub_dims[n], self.full_dims[n], self.quot_dims[n])


def long_exact_sequence(delta, n_max, budget=DEFAULT_BUDGET) -> LESReport:
    """Assemble the three-complex long exact sequence and verify exactness.

    Exactness is checked at every node of degree < n_max by the two rank
    conditions (consecutive composites vanish; incoming rank equals the
    kernel dimension of the outgoing map).  Violations raise
    ExactnessFailure; they indicate a bug, never valid input.
    """
    if n_max < 1:
        raise InputError("need n_max >= 1")
    ctx = _LesContext(delta, n_max, budget)
    field = ctx.relative.field
    sub_dims = ctx.h_sub.dims[:n_max + 1]
    full_dims = ctx.h_all.dims[:n_max + 1]
    quot_dims = ctx.h_quot.dims[:n_max + 1]

    incl, proj, nabla = [], [], []
    for n in range(n_max + 1):
        incl.append(ctx.induced(ctx.incls[n], ctx.h_sub.representatives[n],
                                ctx.relative, ctx.h_all, n))
        proj.append(ctx.induced(ctx.projs[n], ctx.h_all.representatives[n],
                                ctx.quot, ctx.h_quot, n))
        if n < n_max:
            nabla.append(ctx.snake_matrix(n))

    exact_nodes = []
    for n in range(n_max):
        stations = [
            (f"H^{n}(sub)", nabla[n - 1] if n > 0 else None, incl[n], sub_dims[n]),
            (f"HH^{n}", incl[n], proj[n], full_dims[n]),
            (f"H^{n}(quot)", proj[n], nabla[n], quot_dims[n]),
        ]
        for node, arriving, leaving, dim in stations:
            r_in = rank(arriving) if arriving is not None else 0
            if arriving is not None and not leaving.matmul(arriving).is_zero():
                raise ExactnessFailure(node, "consecutive maps do not compose to zero")
            r_out = rank(leaving)
            if r_in != dim - r_out:
                raise ExactnessFailure(
                    node, f"image rank {r_in} != kernel dimension {dim - r_out}")
            exact_nodes.append((n, node, True))

    cycles, non_cycles = enumerate_paths(delta.quiver, n_max)
    per_path = {}
    for p in cycles + non_cycles:
        per_path[p.key()] = cohomology(
            along_path_complex(delta, p, n_max, budget),
            with_representatives=False).dims
    sub_break, quot_break = [], []
    for n in range(n_max + 1):
        ds = [(p.label(), per_path[p.key()][n]) for p in non_cycles if p.length <= n]
        cs = [(p.label(), per_path[p.key()][n]) for p in cycles if p.length <= n]
        if sum(d for _, d in ds) != sub_dims[n] or sum(d for _, d in cs) != quot_dims[n]:
            raise ConsistencyError(f"path breakdown does not add up in degree {n}")
        sub_break.append(ds)
        quot_break.append(cs)

    return LESReport(n_max, sub_dims, full_dims, quot_dims, incl, proj, nabla,
                     exact_nodes, sub_break, quot_break)


# -- cup product compatibility checks ------------------------------------------


class CupCheckReport:
    def __init__(self, n_max, unit_ok, annihilation_ok, projection_ok, pairs):
        self.n_max = n_max
        self.unit_ok = unit_ok
        self.annihilation_ok = annihilation_ok
        self.projection_ok = projection_ok
        self.pairs = pairs
        self.ok = unit_ok and annihilation_ok and projection_ok

    def __bool__(self):
        return self.ok


def cup_annihilation_check(delta, n_max, budget=DEFAULT_BUDGET) -> CupCheckReport:
    """Verify the cup-product behaviour of the split complexes up to n_max.

    Three facts are checked on cohomology representatives: the unit class
    cups as a two-sided identity on the nose; any two non-cycle classes cup
    to a coboundary of the ambient complex; and projecting to the cycle
    quotient commutes with cup up to quotient coboundaries.
    """
    ctx = _LesContext(delta, n_max, budget)
    field = ctx.relative.field
    one = unit_cochain(ctx.relative)
    pairs = 0

    unit_ok = True
    for n in range(n_max + 1):
        for z in ctx.h_all.representatives[n]:
            y = Cochain(ctx.relative, n, z)
            if cup_product(one, y).vec != y.vec or cup_product(y, one).vec != y.vec:
                unit_ok = False

    images = {}

    def image_of(cx, n):
        got = images.get((id(cx), n))
        if got is None:
            d_in = (cx.diffs[n - 1] if n > 0
                    else SparseMatrix.zeros(field, cx.spaces[0], 0))
            got = images[(id(cx), n)] = Subspace.image(d_in)
        return got

    annihilation_ok = True
    for n1 in range(1, n_max):
        for n2 in range(1, n_max - n1 + 1):
            for u in ctx.h_sub.representatives[n1]:
                yu = Cochain(ctx.relative, n1, ctx.incls[n1].matvec(u))
                for v in ctx.h_sub.representatives[n2]:
                    yv = Cochain(ctx.relative, n2, ctx.incls[n2].matvec(v))
                    pairs += 1
                    if not image_of(ctx.relative, n1 + n2).contains(
                            cup_product(yu, yv).vec):
                        annihilation_ok = False

    projection_ok = True
    for n1 in range(n_max + 1):
        for n2 in range(n_max - n1 + 1):
            for z1 in ctx.h_all.representatives[n1]:
                y1 = Cochain(ctx.relative, n1, z1)
                p1 = Cochain(ctx.quot, n1, ctx.projs[n1].matvec(z1))
                for z2 in ctx.h_all.representatives[n2]:
                    y2 = Cochain(ctx.relative, n2, z2)
                    p2 = Cochain(ctx.quot, n2, ctx.projs[n2].matvec(z2))
                    pairs += 1
                    lhs = ctx.projs[n1 + n2].matvec(cup_product(y1, y2).vec)
                    diff = Cochain(ctx.quot, n1 + n2, lhs) + \
                        cup_product(p1, p2).scaled(field.neg(field.one))
                    if not image_of(ctx.quot, n1 + n2).contains(diff.vec):
                        projection_ok = False

    return CupCheckReport(n_max, unit_ok, annihilation_ok, projection_ok, pairs)


# -- two-vertex round trips ----------------------------------------------------


def null_square(A, B, M, N) -> SquareData:
    """Square data with both corner products zero."""
    f = A.field
    return SquareData(A, B, M, N,
                      SparseMatrix.zeros(f, A.dim, tensor_over(N, M).dim),
                      SparseMatrix.zeros(f, B.dim, tensor_over(M, N).dim))


def square_qset(sq: SquareData) -> QSet:
    """The square as a Q-set on vertices x, y; zero corners become no arrow."""
    arrows = []
    bimods = {}
    if sq.M.dim:
        arrows.append(("a", "x", "y"))
        bimods["a"] = sq.M
    if sq.N.dim:
        arrows.append(("b", "y", "x"))
        bimods["b"] = sq.N
    quiver = Quiver(["x", "y"], arrows)
    return QSet(quiver, {"x": sq.A, "y": sq.B}, bimods)


def square_module(sq: SquareData):
    """(A x B, M + N): both corners as a single bimodule over the product."""
    prod = product_algebra(sq.A, sq.B)
    f = prod.field
    dM, dN = sq.M.dim, sq.N.dim
    dim = dM + dN

    def embed(mat, off):
        return SparseMatrix(f, dim, dim,
                            [(r + off, c + off, v) for (r, c), v in mat.entries.items()])

    left, right = [], []
    for i in range(sq.A.dim):
        left.append(embed(sq.N.left_act[i], dM))
        right.append(embed(sq.M.right_act[i], 0))
    for i in range(sq.B.dim):
        left.append(embed(sq.M.left_act[i], 0))
        right.append(embed(sq.N.right_act[i], dM))
    return prod, Bimodule(prod, prod, dim, left, right)


def _certify_projective(mod, cap, what):
    """Structural certificate, else vanishing probes against itself/regular."""
    if mod.dim == 0 or getattr(mod, "projective_certificate", None):
        return
    probes = [("itself", mod)]
    if mod.left == mod.right:
        probes.append(("the regular bimodule", regular_bimodule(mod.left)))
    for name, probe in probes:
        dims = ext_bimodule(mod, probe, cap)
        for r in range(1, cap + 1):
            if dims[r]:
                raise NotProjective(
                    f"{what} has a degree-{r} extension against {name}")


def _walk(delta, start, length):
    """The unique path of the given length out of a round-trip vertex."""
    p = QPath.at_vertex(delta.quiver, start)
    for _ in range(length):
        outs = sorted(delta.quiver.arrows_from(p.target), key=str)
        if not outs:
            return None
        p = p.then(outs[0])
    return p


def _flat_kernel(delta, path, degree, budget):
    """(complex, cocycle basis) of the single zero-wait block at the degree.

    At the bottom degree of a path the only trajectory has no waiting, so
    the kernel of the outgoing differential is exactly the space of bimodule
    maps from the arrow-slot tensor product to the value space.
    """
    if path is None:
        return None, []
    cx = along_path_complex(delta, path, degree, budget)
    if cx.truncated:
        # the outgoing differential itself fell over budget
        _, _, dz = path_value_space(delta, path)
        dims = []
        for traj in trajectories(path, degree + 1):
            d = dz
            for kind, key in traj.slots():
                d *= (delta.algebra_at[key].dim if kind == "A"
                      else delta.bimodule_at[key].dim)
            dims.append(d)
        raise BudgetExceeded(sum(dims), cx.spaces[degree], budget,
                             f"flat cocycles over {path.label()}")
    return cx, kernel_basis(cx.diffs[degree])


def _arrow_identity_on(delta, label, budget):
    p = QPath(delta.quiver, (label,))
    cx = along_path_complex(delta, p, 1, budget)
    b = cx.block_of(1, Trajectory(p, (0, 0)).key())
    one = delta.field.one
    return Cochain(cx, 1, {b.offset + j * b.delta_dim + j: one
                           for j in range(b.delta_dim)})


class CommutatorLevel:
    """One level of the degree-raising commutator of a round trip."""

    __slots__ = ("level", "matrix", "source_dim", "target_dim", "rank",
                 "kernel_dim", "cokernel_dim")

    def __init__(self, level, matrix, source_dim, target_dim):
        self.level = level
        self.matrix = matrix
        self.source_dim = source_dim
        self.target_dim = target_dim
        self.rank = rank(matrix)
        self.kernel_dim = source_dim - self.rank
        self.cokernel_dim = target_dim - self.rank


def commutator_matrix(sq: SquareData, m, budget=DEFAULT_BUDGET) -> CommutatorLevel:
    """The commutator with the arrow identities between flat cocycle spaces.

    Sources: the zero-wait cocycles over the two cycles of length 2m (for
    m = 0, the two vertex centers).  Targets: the zero-wait cocycles over
    the two alternating paths of length 2m+1, stacked x-to-y first.  Matrix
    columns are ambient coordinates of 1 cup f - f cup 1 per source basis
    vector; ranks and kernels are basis-independent.
    """
    if m < 0:
        raise InputError("level must be nonnegative")
    return _commutator_level(square_qset(sq), m, budget)


def _commutator_level(delta, m, budget) -> CommutatorLevel:
    f = delta.field
    sx_cx, sx = _flat_kernel(delta, _walk(delta, "x", 2 * m), 2 * m, budget)
    sy_cx, sy = _flat_kernel(delta, _walk(delta, "y", 2 * m), 2 * m, budget)
    txy_cx, txy = _flat_kernel(delta, _walk(delta, "x", 2 * m + 1), 2 * m + 1, budget)
    tyx_cx, tyx = _flat_kernel(delta, _walk(delta, "y", 2 * m + 1), 2 * m + 1, budget)
    axy = txy_cx.spaces[2 * m + 1] if txy_cx is not None else 0
    ayx = tyx_cx.spaces[2 * m + 1] if tyx_cx is not None else 0

    lab_a = delta.quiver.arrow_between("x", "y")
    lab_b = delta.quiver.arrow_between("y", "x")
    ua = _arrow_identity_on(delta, lab_a, budget) if lab_a else None
    ub = _arrow_identity_on(delta, lab_b, budget) if lab_b else None

    def column(src_cx, vec, lead_unit, lead_out, trail_unit, trail_out, lead_off,
               trail_off):
        fc = Cochain(src_cx, 2 * m, vec)
        col = {}
        if lead_unit is not None and lead_out is not None:
            for c, v in cup_product(lead_unit, fc, out=lead_out).vec.items():
                col[lead_off + c] = v
        if trail_unit is not None and trail_out is not None:
            for c, v in cup_product(fc, trail_unit, out=trail_out).vec.items():
                col[trail_off + c] = f.neg(v)
        return col

    cols = []
    for vec in sx:  # sources at x map into both targets
        cols.append(column(sx_cx, vec, ua, txy_cx, ub, tyx_cx, 0, axy))
    for vec in sy:
        cols.append(column(sy_cx, vec, ub, tyx_cx, ua, txy_cx, axy, 0))

    span = Subspace.from_vectors(
        f, axy + ayx,
        [dict(v) for v in txy] + [{axy + c: v for c, v in vec.items()} for vec in tyx])
    for col in cols:
        if not span.contains(col):
            raise ConsistencyError("commutator image is not a flat cocycle")

    matrix = SparseMatrix(f, axy + ayx, len(cols),
                          [(r, j, v) for j, col in enumerate(cols)
                           for r, v in col.items()])
    return CommutatorLevel(m, matrix, len(sx) + len(sy), len(txy) + len(tyx))


class FiveTermReport:
    """A verified five-node exact window of a round trip's long sequence."""

    def __init__(self, m, dims, labels, maps):
        self.m = m
        self.dims = dims
        self.labels = labels
        self.maps = maps

    def alternating_sum(self):
        s = 0
        for i, d in enumerate(self.dims):
            s += d if i % 2 == 0 else -d
        return s


def five_term(sq: SquareData, m, n_max, budget=DEFAULT_BUDGET) -> FiveTermReport:
    """The exact window in degrees 2m, 2m+1 of a projective null square.

    Both corner bimodules must carry a projectivity certificate (structural,
    or extension probes vanishing in degrees 1..n_max).  The report holds the
    five node dimensions 0 -> HH^2m -> H^2m(quot) -> H^(2m+1)(sub) ->
    HH^(2m+1) -> H^(2m+1)(quot) -> 0 and the four verified maps.
    """
    if m < 0 or n_max < 1:
        raise InputError("need m >= 0 and n_max >= 1")
    if not (sq.alpha.is_zero() and sq.beta.is_zero()):
        raise InputError("five-term window needs both corner products zero")
    _certify_projective(sq.M, n_max, "M")
    _certify_projective(sq.N, n_max, "N")
    delta = square_qset(sq)
    lo, hi = 2 * m, 2 * m + 1
    ctx = _LesContext(delta, hi, budget)
    if ctx.h_sub.dims[lo]:
        raise ExactnessFailure(f"H^{lo}(sub)", "expected to vanish on a round trip")

    proj_lo = ctx.induced(ctx.projs[lo], ctx.h_all.representatives[lo],
                          ctx.quot, ctx.h_quot, lo)
    nab = ctx.snake_matrix(lo)
    incl_hi = ctx.induced(ctx.incls[hi], ctx.h_sub.representatives[hi],
                          ctx.relative, ctx.h_all, hi)
    proj_hi = ctx.induced(ctx.projs[hi], ctx.h_all.representatives[hi],
                          ctx.quot, ctx.h_quot, hi)

    dims = (ctx.h_all.dims[lo], ctx.h_quot.dims[lo], ctx.h_sub.dims[hi],
            ctx.h_all.dims[hi], ctx.h_quot.dims[hi])
    stations = [
        (f"HH^{lo}", None, proj_lo, dims[0]),
        (f"H^{lo}(quot)", proj_lo, nab, dims[1]),
        (f"H^{hi}(sub)", nab, incl_hi, dims[2]),
        (f"HH^{hi}", incl_hi, proj_hi, dims[3]),
        (f"H^{hi}(quot)", proj_hi, None, dims[4]),
    ]
    for node, arriving, leaving, dim in stations:
        r_in = rank(arriving) if arriving is not None else 0
        r_out = rank(leaving) if leaving is not None else 0
        if arriving is not None and leaving is not None and \
                not leaving.matmul(arriving).is_zero():
            raise ExactnessFailure(node, "consecutive maps do not compose to zero")
        if r_in != dim - r_out:
            raise ExactnessFailure(
                node, f"image rank {r_in} != kernel dimension {dim - r_out}")
    labels = (f"HH^{lo}(whole)", f"H^{lo}(cycles)", f"H^{hi}(non-cycles)",
              f"HH^{hi}(whole)", f"H^{hi}(cycles)")
    return FiveTermReport(m, dims, labels, (proj_lo, nab, incl_hi, proj_hi))


class NullSquareReport:
    """Closed-form dimension table of a projective null square.

    dims[n] is the n-th Hochschild dimension for n = 0..2*m_max+1; parts[n]
    records the split into the two vertex contributions plus the kernel
    (even degrees) or cokernel (odd degrees) of the commutator level.
    """

    def __init__(self, dims, parts, levels, vertex_a, vertex_b):
        self.dims = dims
        self.parts = parts
        self.levels = levels
        self.vertex_a = vertex_a
        self.vertex_b = vertex_b


def null_square_hh(sq: SquareData, m_max, hh_a=None, hh_b=None,
                   budget=DEFAULT_BUDGET) -> NullSquareReport:
    """Hochschild dimensions of a projective null square, degrees 0..2m_max+1.

    Even degrees: the two vertex dimensions plus the kernel of the level-m
    commutator.  Odd degrees: its cokernel plus the vertex dimensions.
    Vertex tables hh_a, hh_b may be supplied when the bar oracle would be
    too large; they must cover degrees 0..2*m_max+1.
    """
    if m_max < 0:
        raise InputError("m_max must be nonnegative")
    if not (sq.alpha.is_zero() and sq.beta.is_zero()):
        raise InputError("closed forms need both corner products zero")
    _certify_projective(sq.M, 2, "M")
    _certify_projective(sq.N, 2, "N")
    top = 2 * m_max + 1
    if hh_a is None:
        hh_a = bar_hochschild(sq.A, top, budget=budget).dims
    if hh_b is None:
        hh_b = bar_hochschild(sq.B, top, budget=budget).dims
    if len(hh_a) <= top or len(hh_b) <= top:
        raise InputError(f"vertex dimension tables must cover degrees 0..{top}")

    delta = square_qset(sq)
    dims, parts, levels = [], [], []
    for m in range(m_max + 1):
        lv = _commutator_level(delta, m, budget)
        levels.append(lv)
        vertex_even = 0 if m == 0 else hh_a[2 * m] + hh_b[2 * m]
        dims.append(vertex_even + lv.kernel_dim)
        parts.append({"vertex": vertex_even, "kernel": lv.kernel_dim})
        vertex_odd = hh_a[2 * m + 1] + hh_b[2 * m + 1]
        dims.append(lv.cokernel_dim + vertex_odd)
        parts.append({"vertex": vertex_odd, "cokernel": lv.cokernel_dim})
    return NullSquareReport(dims, parts, levels,
                            list(hh_a[:top + 1]), list(hh_b[:top + 1]))


# -- two-floor quivers and nilpotence ------------------------------------------


class PeirceSquareQuiver:
    """Two quiver floors joined by weighted vertical arrows.

    `down` maps (upper vertex, lower vertex) pairs to multiplicities, `up`
    the reverse direction; an arrow exists exactly when its multiplicity is
    positive, and zero entries are dropped at construction.
    """

    def __init__(self, quiver_e, quiver_f, down, up):
        self.quiver_e = quiver_e
        self.quiver_f = quiver_f
        upper = set(quiver_e.vertices)
        lower = set(quiver_f.vertices)

        def clean(pairs, srcs, dsts, what):
            out = {}
            for key, mult in pairs.items():
                s, t = key
                if s not in srcs or t not in dsts:
                    raise InputError(f"{what} arrow {key!r} references unknown vertices")
                mult = int(mult)
                if mult < 0:
                    raise InputError(f"negative multiplicity on {what} arrow {key!r}")
                if mult:
                    out[(s, t)] = mult
            return out

        self.down = clean(down, upper, lower, "down")
        self.up = clean(up, lower, upper, "up")

    def vertical_count(self) -> int:
        return len(self.down) + len(self.up)

    def vertex_count(self) -> int:
        return len(self.quiver_e.vertices) + len(self.quiver_f.vertices)


def efficient_cycles(pq: PeirceSquareQuiver):
    """Search for a cycle that never repeats a floor on consecutive arrows.

    Floor arrows of the same floor may not follow one another (cyclically);
    vertical arrows may follow anything.  Returns (True, witness) with the
    shortest such cycle through a vertical arrow, ties broken by least label
    sequence starting at a vertical arrow, else (False, None).
    """
    edges = {}

    def add(src, dst, lab, kind):
        edges.setdefault(src, []).append((lab, dst, kind))

    for lab, s, t in pq.quiver_e.arrows:
        add(("E", s), ("E", t), str(lab), "E")
    for lab, s, t in pq.quiver_f.arrows:
        add(("F", s), ("F", t), str(lab), "F")
    verticals = []
    for e, fv in sorted(pq.down):
        verticals.append((f"down:{e}>{fv}", ("E", e), ("F", fv)))
    for fv, e in sorted(pq.up):
        verticals.append((f"up:{fv}>{e}", ("F", fv), ("E", e)))
    for lab, s, t in verticals:
        add(s, t, lab, "V")
    for v in edges:
        edges[v].sort()

    best = None
    for lab0, s0, t0 in verticals:
        tail = _shortest_return(edges, t0, s0)
        if tail is None:
            continue
        cand = (1 + len(tail), (lab0,) + tail)
        if best is None or cand < best:
            best = cand
    if best is None:
        return False, None
    return True, list(best[1])


def _shortest_return(edges, start, goal):
    """Lex-least shortest legal walk from start back to the goal vertex."""
    heap = [(0, (), (start, "V"))]
    seen = set()
    while heap:
        ln, labs, state = heapq.heappop(heap)
        if state in seen:
            continue
        seen.add(state)
        vertex, last = state
        if vertex == goal:
            return labs
        for lab, dst, kind in edges.get(vertex, ()):
            if kind != "V" and kind == last:
                continue  # two consecutive arrows on the same floor
            if (dst, kind) not in seen:
                heapq.heappush(heap, (ln + 1, labs + (lab,), (dst, kind)))
    return None


def tensor_nilpotence(alg, mod, h_max):
    """Smallest h <= h_max with the h-fold tensor power of mod zero, or None."""
    if mod.left != alg or mod.right != alg:
        raise AlgebraMismatch("nilpotence needs a bimodule over the given algebra")
    if h_max < 1:
        raise InputError("h_max must be at least 1")
    acc = mod
    for h in range(1, h_max + 1):
        if acc.dim == 0:
            return h
        if h < h_max:
            acc = tensor_over(acc, mod)
    return None
