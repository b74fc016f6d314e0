"""Cup products, connecting maps, long exact sequences, closed forms."""

import random

import pytest

from quiverhh.algebras import field_algebra, truncated_polynomial
from quiverhh.bimodules import (
    Bimodule,
    direct_sum,
    free_corner_bimodule,
    free_rank_one_bimodule,
    tensor_over,
    zero_bimodule,
)
from quiverhh.complexes import (
    along_path_complex,
    bar_hochschild,
    cohomology,
    relative_complex,
    split_noncycle,
)
from quiverhh.errors import (
    AlgebraMismatch,
    BudgetExceeded,
    ConsistencyError,
    InputError,
    NotACocycle,
    NotProjective,
)
from quiverhh.fields import GF, QQ
from quiverhh.presentations import RewritePresentation, algebra_from_presentation
from quiverhh.qset import QSet, assemble_lambda, assemble_square, SquareData
from quiverhh.quiver import QPath, Quiver
from quiverhh.sparse import SparseMatrix, Subspace, rank
from quiverhh.structure import (
    Cochain,
    PeirceSquareQuiver,
    arrow_identity_cochain,
    class_coordinates,
    commutator_matrix,
    connecting_nabla_formula,
    connecting_snake,
    cup_annihilation_check,
    cup_product,
    efficient_cycles,
    five_term,
    long_exact_sequence,
    null_square,
    null_square_hh,
    square_module,
    square_qset,
    tensor_nilpotence,
    unit_cochain,
)

K = field_algebra()


def delta_point():
    return QSet(Quiver(["x"], []), {"x": K}, {})


def delta_a2():
    q = Quiver(["x", "y"], [("a", "x", "y")])
    return QSet(q, {"x": K, "y": K}, {"a": free_rank_one_bimodule(K, K)})


def delta_round_trip():
    q = Quiver(["x", "y"], [("a", "x", "y"), ("b", "y", "x")])
    m = free_rank_one_bimodule(K, K)
    return QSet(q, {"x": K, "y": K}, {"a": m, "b": m})


def delta_mixed():
    kt = truncated_polynomial(QQ, 2)
    q = Quiver(["x", "y"], [("a", "x", "y")])
    return QSet(q, {"x": kt, "y": K}, {"a": free_rank_one_bimodule(K, kt)})


def delta_chord():
    q = Quiver(["x", "w", "y"],
               [("a", "x", "y"), ("b", "x", "w"), ("c", "w", "y")])
    m = free_rank_one_bimodule(K, K)
    return QSet(q, {"x": K, "w": K, "y": K}, {"a": m, "b": m, "c": m})


ALL_DELTAS = [delta_point, delta_a2, delta_round_trip, delta_mixed, delta_chord]


def kA2():
    return algebra_from_presentation(
        RewritePresentation(Quiver(["u", "v"], [("p", "u", "v")]), []))


def rand_cochain(rng, cx, deg, count=5):
    dim = cx.spaces[deg]
    vec = {}
    for _ in range(min(count, dim)):
        vec[rng.randrange(dim)] = QQ.of(rng.choice([-2, -1, 1, 2, 3]))
    return Cochain(cx, deg, vec)


# -- cochain plumbing -------------------------------------------------------

def test_cochain_support_round_trip():
    delta = delta_chord()
    cx = relative_complex(assemble_lambda(delta), delta, 2)
    rng = random.Random(3)
    f = rand_cochain(rng, cx, 1, count=8)
    total = {}
    for blk, local in f.support():
        for c, v in local.items():
            total[blk.offset + c] = v
    assert total == f.vec


def test_cochain_add_and_scale():
    delta = delta_a2()
    cx = relative_complex(assemble_lambda(delta), delta, 2)
    f = Cochain(cx, 1, {0: QQ.one, 2: QQ.of(2)})
    g = Cochain(cx, 1, {0: QQ.neg(QQ.one), 1: QQ.one})
    assert (f + g).vec == {1: QQ.one, 2: QQ.of(2)}
    assert f.scaled(QQ.of(3)).vec == {0: QQ.of(3), 2: QQ.of(6)}
    assert f.scaled(QQ.zero).is_zero()


def test_unit_cochain_is_a_cocycle():
    for make in ALL_DELTAS:
        delta = make()
        cx = relative_complex(assemble_lambda(delta), delta, 2)
        assert unit_cochain(cx).differential().is_zero()


def test_top_degree_has_no_differential():
    delta = delta_a2()
    cx = relative_complex(assemble_lambda(delta), delta, 2)
    with pytest.raises(InputError):
        Cochain(cx, cx.top_degree, {}).differential()


def test_class_coordinates_extracts_coefficients():
    img = Subspace.from_vectors(QQ, 4, [{0: QQ.one, 1: QQ.one}])
    coords = class_coordinates(QQ, img, [{2: QQ.one}, {3: QQ.one}])
    v = {0: QQ.of(5), 1: QQ.of(5), 2: QQ.one, 3: QQ.of(2)}
    assert coords(v) == [QQ.one, QQ.of(2)]
    # a zero representative carries no new class
    with pytest.raises(ConsistencyError):
        class_coordinates(QQ, img, [{}])
    with pytest.raises(ConsistencyError):
        coords({0: QQ.one})


# -- cup product ------------------------------------------------------------

def test_unit_is_two_sided_cup_identity():
    for make in ALL_DELTAS:
        delta = make()
        cx = relative_complex(assemble_lambda(delta), delta, 2)
        one = unit_cochain(cx)
        h = cohomology(cx, with_representatives=True)
        for n in range(3):
            for rep in h.representatives[n]:
                f = Cochain(cx, n, rep)
                assert cup_product(one, f).vec == f.vec
                assert cup_product(f, one).vec == f.vec


def test_cup_of_non_composable_paths_vanishes():
    delta = delta_chord()
    cx = relative_complex(assemble_lambda(delta), delta, 3)
    blocks = {b.path.label(): b for b in cx.layouts[1].blocks
              if b.path.length == 1}
    fa = Cochain(cx, 1, {blocks["a"].offset: QQ.one})
    fc = Cochain(cx, 1, {blocks["c"].offset: QQ.one})
    # a runs x->y, c runs w->y: no concatenation either way
    assert cup_product(fa, fc).is_zero()
    assert cup_product(fc, fa).is_zero()


def test_cup_of_two_arrow_slots_vanishes():
    # concatenable arrow cochains cup to zero: both values sit in bimodules
    delta = delta_chord()
    cx = relative_complex(assemble_lambda(delta), delta, 3)
    one = arrow_identity_cochain(cx)
    assert cup_product(one, one).is_zero()


@pytest.mark.parametrize("make", ALL_DELTAS, ids=lambda f: f.__name__)
def test_cup_satisfies_graded_leibniz(make):
    delta = make()
    cx = relative_complex(assemble_lambda(delta), delta, 3)
    rng = random.Random(7)
    for p, q in [(0, 0), (0, 1), (1, 1), (1, 2), (2, 1)]:
        for _ in range(3):
            f = rand_cochain(rng, cx, p)
            g = rand_cochain(rng, cx, q)
            lhs = cup_product(f, g).differential()
            sign = QQ.one if p % 2 == 0 else QQ.neg(QQ.one)
            rhs = cup_product(f.differential(), g) + \
                cup_product(f, g.differential()).scaled(sign)
            assert lhs.vec == rhs.vec


def test_cup_is_associative():
    delta = delta_chord()
    cx = relative_complex(assemble_lambda(delta), delta, 3)
    rng = random.Random(9)
    for _ in range(5):
        f = rand_cochain(rng, cx, 1)
        g = rand_cochain(rng, cx, 1)
        h = rand_cochain(rng, cx, 1)
        assert cup_product(cup_product(f, g), h).vec == \
            cup_product(f, cup_product(g, h)).vec


def test_cup_rejects_bad_inputs():
    delta = delta_a2()
    cx = relative_complex(assemble_lambda(delta), delta, 2)
    d5 = QSet(Quiver(["x"], []), {"x": field_algebra(GF(5))}, {})
    cx5 = relative_complex(assemble_lambda(d5), d5, 2)
    with pytest.raises(InputError):
        cup_product(unit_cochain(cx), unit_cochain(cx5))
    f = Cochain(cx, 2, {})
    with pytest.raises(InputError):
        cup_product(f, f)  # degree 4 exceeds the top degree
    # out-complex without the merged block
    q = delta.quiver
    vx = along_path_complex(delta, QPath.at_vertex(q, "x"), 3)
    va = along_path_complex(delta, QPath.at_vertex(q, "x").then("a"), 3)
    one = arrow_identity_cochain(va)
    g = Cochain(vx, 1, {0: QQ.one})
    with pytest.raises(InputError):
        cup_product(one, g, out=vx)


# -- connecting map: snake vs closed formula --------------------------------

@pytest.mark.parametrize("make", ALL_DELTAS, ids=lambda f: f.__name__)
def test_connecting_formula_matches_snake(make):
    delta = make()
    cx = relative_complex(assemble_lambda(delta), delta, 3)
    sub, quot, incls, projs = split_noncycle(cx, delta)
    h_sub = cohomology(sub, with_representatives=True)
    h_quot = cohomology(quot, with_representatives=True)
    for n in range(3):
        reps = h_quot.representatives[n]
        snake = connecting_snake(delta, n)
        assert snake.cols == len(reps)
        assert snake.rows == len(h_sub.representatives[n + 1])
        coords = class_coordinates(QQ, Subspace.image(sub.diffs[n]),
                                   h_sub.representatives[n + 1])
        for j, rep in enumerate(reps):
            f = Cochain(cx, n, projs[n].transpose().matvec(rep))
            out = connecting_nabla_formula(delta, n, f)
            u = incls[n + 1].transpose().matvec(out.vec)
            assert incls[n + 1].matvec(u) == out.vec
            assert coords(u) == [snake.entries.get((i, j), QQ.zero)
                                 for i in range(snake.rows)]


def test_connecting_formula_raises_path_length_by_one():
    delta = delta_chord()
    cx = relative_complex(assemble_lambda(delta), delta, 3)
    quot = split_noncycle(cx, delta)[1]
    projs = split_noncycle(cx, delta)[3]
    h_quot = cohomology(quot, with_representatives=True)
    for n in range(3):
        for rep in h_quot.representatives[n]:
            f = Cochain(cx, n, projs[n].transpose().matvec(rep))
            lengths = {b.path.length for b, _ in f.support()}
            out = connecting_nabla_formula(delta, n, f)
            for b, _ in out.support():
                assert not b.path.is_cycle
                assert b.path.length - 1 in lengths


def test_connecting_formula_on_point_is_zero():
    delta = delta_point()
    cx = relative_complex(assemble_lambda(delta), delta, 2)
    f = unit_cochain(cx)
    assert connecting_nabla_formula(delta, 0, f).is_zero()
    assert connecting_snake(delta, 0).rows == 0


def test_connecting_formula_input_checks():
    delta = delta_mixed()
    cx = relative_complex(assemble_lambda(delta), delta, 3)
    blk = next(b for b in cx.layouts[1].blocks
               if b.path.is_cycle and b.path.source == "x")
    # f(t) = 1 is killed by no coboundary: df(t, t) = 2t - t.f(t) - f(t).t
    f = Cochain(cx, 1, {blk.offset + 1 * blk.delta_dim + 0: QQ.one})
    with pytest.raises(NotACocycle):
        connecting_nabla_formula(delta, 1, f)
    with pytest.raises(InputError):
        connecting_nabla_formula(delta, 2, f)
    arrow_blk = next(b for b in cx.layouts[1].blocks if not b.path.is_cycle)
    g = Cochain(cx, 1, {arrow_blk.offset: QQ.one})
    with pytest.raises(InputError):
        connecting_nabla_formula(delta, 1, g)


# -- long exact sequence ----------------------------------------------------

def test_les_one_arrow_values():
    rep = long_exact_sequence(delta_a2(), 2)
    assert rep.sub_dims == [0, 1, 0]
    assert rep.full_dims == [1, 0, 0]
    assert rep.quot_dims == [2, 0, 0]
    assert dict(rep.nabla[0].entries) == \
        {(0, 0): QQ.one, (0, 1): QQ.neg(QQ.one)}
    assert all(flag for _, _, flag in rep.exact_nodes)
    assert rep.sub_breakdown == [[], [("a", 1)], [("a", 0)]]
    assert rep.quot_breakdown[0] == [("x", 1), ("y", 1)]


def test_les_round_trip_values():
    rep = long_exact_sequence(delta_round_trip(), 4)
    assert rep.full_dims == [1, 1, 1, 1, 1]
    assert rep.sub_dims == [0, 2, 0, 2, 0]
    assert rep.quot_dims == [2, 0, 2, 0, 2]
    assert len(rep.exact_nodes) == 12
    assert all(flag for _, _, flag in rep.exact_nodes)


def test_les_chord_breakdowns():
    rep = long_exact_sequence(delta_chord(), 2)
    assert rep.sub_dims == [0, 3, 1]
    assert rep.full_dims == [1, 1, 1]
    assert rep.quot_dims == [3, 0, 0]
    # every non-cycle path of length <= n appears, even with dim zero
    assert rep.sub_breakdown[1] == [("a", 1), ("b", 1), ("c", 1)]
    assert rep.sub_breakdown[2] == [("a", 0), ("b", 0), ("c", 0), ("cb", 1)]
    assert rep.quot_breakdown[0] == [("w", 1), ("x", 1), ("y", 1)]


def test_les_single_vertex_is_all_quotient():
    kt2 = truncated_polynomial(QQ, 2)
    delta = QSet(Quiver(["x"], []), {"x": kt2}, {})
    rep = long_exact_sequence(delta, 3)
    assert rep.sub_dims == [0, 0, 0, 0]
    assert rep.full_dims == [2, 1, 1, 1]
    assert rep.quot_dims == rep.full_dims
    for m in rep.proj:
        assert rank(m) == m.rows


def test_les_rejects_degenerate_window():
    with pytest.raises(InputError):
        long_exact_sequence(delta_a2(), 0)


# -- cup annihilation checks ------------------------------------------------

@pytest.mark.parametrize("make", ALL_DELTAS, ids=lambda f: f.__name__)
def test_cup_annihilation_check_passes(make):
    report = cup_annihilation_check(make(), 2)
    assert report
    assert report.unit_ok and report.annihilation_ok and report.projection_ok
    assert report.pairs >= 0


def test_non_cycle_cup_lands_in_coboundaries():
    delta = delta_round_trip()
    cx = relative_complex(assemble_lambda(delta), delta, 3)
    sub, _, incls, _ = split_noncycle(cx, delta)
    h_sub = cohomology(sub, with_representatives=True)
    img = Subspace.image(cx.diffs[1])
    for r1 in h_sub.representatives[1]:
        for r2 in h_sub.representatives[1]:
            f = Cochain(cx, 1, incls[1].matvec(r1))
            g = Cochain(cx, 1, incls[1].matvec(r2))
            assert img.contains(cup_product(f, g).vec)


# -- five-term windows ------------------------------------------------------

def test_five_term_field_square():
    sq = null_square(K, K, free_rank_one_bimodule(K, K),
                     free_rank_one_bimodule(K, K))
    ft = five_term(sq, 0, 4)
    assert ft.dims == (1, 2, 2, 1, 0)
    assert ft.alternating_sum() == 0
    assert ft.labels == ("HH^0(whole)", "H^0(cycles)", "H^1(non-cycles)",
                         "HH^1(whole)", "H^1(cycles)")
    ft = five_term(sq, 1, 4)
    assert ft.dims == (1, 2, 2, 1, 0)
    assert ft.alternating_sum() == 0


def test_five_term_one_point_extension():
    sq = null_square(kA2(), K, free_rank_one_bimodule(K, kA2()),
                     free_rank_one_bimodule(kA2(), K))
    ft = five_term(sq, 0, 4)
    assert ft.dims == (1, 2, 6, 5, 0)
    assert ft.alternating_sum() == 0


def test_five_term_input_checks():
    m = free_rank_one_bimodule(K, K)
    sq = null_square(K, K, m, m)
    with pytest.raises(InputError):
        five_term(sq, -1, 2)
    with pytest.raises(InputError):
        five_term(sq, 0, 0)
    alpha = SparseMatrix(QQ, 1, 1, [(0, 0, QQ.one)])
    beta = SparseMatrix.zeros(QQ, 1, 1)
    crooked = SquareData(K, K, m, m, alpha, beta)
    with pytest.raises(InputError):
        five_term(crooked, 0, 2)


def test_five_term_demands_projective_corners():
    kt2 = truncated_polynomial(QQ, 2)
    one = SparseMatrix(QQ, 1, 1, [(0, 0, QQ.one)])
    zero = SparseMatrix.zeros(QQ, 1, 1)
    simple = Bimodule(kt2, kt2, 1, [one, zero], [one, zero])
    sq = null_square(kt2, kt2, simple, simple)
    with pytest.raises(NotProjective):
        five_term(sq, 0, 2)


def test_commutator_matrix_rejects_negative_level():
    m = free_rank_one_bimodule(K, K)
    sq = null_square(K, K, m, m)
    with pytest.raises(InputError):
        commutator_matrix(sq, -1)


# -- closed-form dimensions for null squares --------------------------------

def test_closed_form_field_square():
    sq = null_square(K, K, free_rank_one_bimodule(K, K),
                     free_rank_one_bimodule(K, K))
    r = null_square_hh(sq, 2)
    assert r.dims == [1, 1, 1, 1, 1, 1]
    assert r.parts[0] == {"vertex": 0, "kernel": 1}
    assert r.parts[1] == {"vertex": 0, "cokernel": 1}
    # the commutator kernel is genuinely nonzero at every level here
    assert [(lv.level, lv.kernel_dim, lv.cokernel_dim) for lv in r.levels] == \
        [(0, 1, 1), (1, 1, 1), (2, 1, 1)]


def test_closed_form_one_point_extension():
    a2 = kA2()
    sq = null_square(a2, K, free_rank_one_bimodule(K, a2),
                     free_rank_one_bimodule(a2, K))
    r = null_square_hh(sq, 2)
    assert r.dims == [1, 5, 0, 12, 0, 36]
    assert r.parts[0] == {"vertex": 0, "kernel": 1}
    assert r.parts[3] == {"vertex": 0, "cokernel": 12}
    # the level-m commutator is injective for m > 0
    assert all(lv.kernel_dim == 0 for lv in r.levels if lv.level > 0)


def test_closed_form_matches_bar_oracle_and_les():
    a2 = kA2()
    sq = null_square(a2, K, free_rank_one_bimodule(K, a2),
                     free_rank_one_bimodule(a2, K))
    lam = assemble_square(sq)
    assert lam.dim == 10
    assert bar_hochschild(lam, 2).dims == [1, 5, 0]
    rep = long_exact_sequence(square_qset(sq), 3)
    assert rep.full_dims == [1, 5, 0, 12]


def test_closed_form_accepts_supplied_tables():
    a2 = kA2()
    sq = null_square(a2, K, free_rank_one_bimodule(K, a2),
                     free_rank_one_bimodule(a2, K))
    hh_a = bar_hochschild(a2, 3).dims
    hh_b = bar_hochschild(K, 3).dims
    r = null_square_hh(sq, 1, hh_a=hh_a, hh_b=hh_b)
    assert r.dims == [1, 5, 0, 12]
    with pytest.raises(InputError):
        null_square_hh(sq, 1, hh_a=[1], hh_b=hh_b)


def test_closed_form_one_sided_square():
    # N = 0: the one-point extension of the dual numbers by its regular module
    kt2 = truncated_polynomial(QQ, 2)
    sq = null_square(kt2, K, free_rank_one_bimodule(K, kt2),
                     zero_bimodule(kt2, K))
    r = null_square_hh(sq, 1)
    assert r.dims == [1, 1, 1, 1]
    assert r.parts == [{"vertex": 0, "kernel": 1},
                       {"vertex": 1, "cokernel": 0},
                       {"vertex": 1, "kernel": 0},
                       {"vertex": 1, "cokernel": 0}]
    hh_a = bar_hochschild(kt2, 3).dims
    assert hh_a == [2, 1, 1, 1]
    # degrees past the vanishing tensor powers split over the diagonal
    assert r.dims[2] == hh_a[2] and r.dims[3] == hh_a[3]
    lam = assemble_square(sq)
    assert lam.dim == 5
    assert bar_hochschild(lam, 3).dims == r.dims
    prod, mod = square_module(sq)
    assert tensor_nilpotence(prod, mod, 6) == 2


def test_closed_form_free_corner_square():
    a2 = kA2()
    m = free_corner_bimodule(K, 0, 0, a2)
    n = free_corner_bimodule(a2, 0, 0, K)
    assert (m.dim, n.dim) == (1, 2)
    sq = null_square(a2, K, m, n)
    lam = assemble_square(sq)
    assert lam.dim == 7
    r = null_square_hh(sq, 1)
    assert r.dims == [1, 1, 1, 1]
    assert bar_hochschild(lam, 3).dims == r.dims
    prod, mod = square_module(sq)
    assert tensor_nilpotence(prod, mod, 6) is None
    pq = PeirceSquareQuiver(Quiver(["u", "v"], [("p", "u", "v")]),
                            Quiver(["z"], []), {("u", "z"): 1}, {("z", "u"): 1})
    assert efficient_cycles(pq) == (True, ["down:u>z", "up:z>u"])


# -- one-sided units against composition ------------------------------------

def source_matrix(cx, path, p, alg_dim, h):
    """Coefficient table of a `1_M cup f` cochain on the (p, 0) block."""
    blk = cx.block_of(1 + p, (path.key(), (p, 0)))
    out = {}
    for c, val in h.vec.items():
        if blk.offset <= c < blk.offset + blk.dim:
            j, r = divmod(c - blk.offset, blk.delta_dim)
            m_idx, aidx = divmod(j, alg_dim ** p)
            out[(r, m_idx, aidx)] = val
    return out


def test_source_side_unit_is_multiplicative():
    # nu(f) = 1_M cup f turns vertex cochains into endomorphism towers
    kt3 = truncated_polynomial(QQ, 3)
    q = Quiver(["x", "y"], [("a", "x", "y")])
    delta = QSet(q, {"x": kt3, "y": K}, {"a": free_rank_one_bimodule(K, kt3)})
    pa = QPath.at_vertex(q, "x").then("a")
    vx = along_path_complex(delta, QPath.at_vertex(q, "x"), 5)
    va = along_path_complex(delta, pa, 5)
    one = arrow_identity_cochain(va)
    dA = kt3.dim

    def nu(f):
        return cup_product(one, f, out=va)

    def compose(F, G, q_deg):
        out = {}
        for (r, s, bidx), gv in G.items():
            for (s2, m_idx, aidx), fv in F.items():
                if s2 != s:
                    continue
                key = (r, m_idx, aidx * (dA ** q_deg) + bidx)
                w = QQ.add(out.get(key, QQ.zero), QQ.mul(gv, fv))
                if w:
                    out[key] = w
                else:
                    out.pop(key, None)
        return out

    rng = random.Random(11)
    for p, q_deg in [(1, 1), (1, 2), (2, 1), (2, 2)]:
        for _ in range(3):
            f = rand_cochain(rng, vx, p)
            g = rand_cochain(rng, vx, q_deg)
            lhs = source_matrix(va, pa, p + q_deg, dA,
                                nu(cup_product(f, g, out=vx)))
            rhs = compose(source_matrix(va, pa, p, dA, nu(f)),
                          source_matrix(va, pa, q_deg, dA, nu(g)), q_deg)
            assert lhs == rhs


def test_target_side_unit_is_anti_multiplicative():
    # mu(f) = (-1)^(p+1) f cup 1_M satisfies mu(f cup g) = -(mu f . mu g)
    kt3 = truncated_polynomial(QQ, 3)
    q = Quiver(["x", "y"], [("a", "x", "y")])
    delta = QSet(q, {"x": K, "y": kt3}, {"a": free_rank_one_bimodule(kt3, K)})
    pa = QPath.at_vertex(q, "x").then("a")
    vy = along_path_complex(delta, QPath.at_vertex(q, "y"), 5)
    va = along_path_complex(delta, pa, 5)
    one = arrow_identity_cochain(va)
    dA = kt3.dim
    dM = 3

    def mu(f, p):
        sgn = QQ.one if (p + 1) % 2 == 0 else QQ.neg(QQ.one)
        return cup_product(f, one, out=va).scaled(sgn)

    def table(h, p):
        blk = va.block_of(1 + p, (pa.key(), (0, p)))
        out = {}
        for c, val in h.vec.items():
            if blk.offset <= c < blk.offset + blk.dim:
                j, r = divmod(c - blk.offset, blk.delta_dim)
                aidx, m_idx = divmod(j, dM)
                out[(r, aidx, m_idx)] = val
        return out

    def compose(F, G, q_deg):
        out = {}
        for (r, aidx, s), fv in F.items():
            for (s2, bidx, m_idx), gv in G.items():
                if s2 != s:
                    continue
                key = (r, aidx * (dA ** q_deg) + bidx, m_idx)
                w = QQ.add(out.get(key, QQ.zero), QQ.mul(fv, gv))
                if w:
                    out[key] = w
                else:
                    out.pop(key, None)
        return out

    rng = random.Random(13)
    for p, q_deg in [(1, 1), (1, 2), (2, 1), (2, 2)]:
        for _ in range(3):
            f = rand_cochain(rng, vy, p)
            g = rand_cochain(rng, vy, q_deg)
            lhs = table(mu(cup_product(f, g, out=vy), p + q_deg), p + q_deg)
            comp = compose(table(mu(f, p), p), table(mu(g, q_deg), q_deg), q_deg)
            assert lhs == {k: QQ.neg(v) for k, v in comp.items()}


# -- efficient cycles and tensor nilpotence ---------------------------------

def replay_witness(pq, witness):
    """Check a cycle witness: closed, alternating, at least one vertical."""
    arrows_e = {lab: (s, t) for lab, s, t in pq.quiver_e.arrows}
    arrows_f = {lab: (s, t) for lab, s, t in pq.quiver_f.arrows}
    verticals = 0
    state = None
    start = None
    last_kind = None
    for step in witness:
        if step.startswith("down:"):
            e, f = step[len("down:"):].split(">")
            assert pq.down.get((e, f))
            here = ("E", e)
            nxt = ("F", f)
            kind = "V"
            verticals += 1
        elif step.startswith("up:"):
            f, e = step[len("up:"):].split(">")
            assert pq.up.get((f, e))
            here = ("F", f)
            nxt = ("E", e)
            kind = "V"
            verticals += 1
        elif step in arrows_e:
            s, t = arrows_e[step]
            here, nxt, kind = ("E", s), ("E", t), "E"
        else:
            s, t = arrows_f[step]
            here, nxt, kind = ("F", s), ("F", t), "F"
        if start is None:
            start = here
        else:
            assert state == here
        assert not (kind != "V" and kind == last_kind)
        state = nxt
        last_kind = kind
    assert state == start
    assert verticals >= 1


def test_efficient_cycle_round_trip():
    pq = PeirceSquareQuiver(Quiver(["e"], []), Quiver(["f"], []),
                            {("e", "f"): 1}, {("f", "e"): 1})
    found, witness = efficient_cycles(pq)
    assert found and witness == ["down:e>f", "up:f>e"]
    replay_witness(pq, witness)


def test_efficient_cycle_through_floor_arrow():
    pq = PeirceSquareQuiver(Quiver(["e1", "e2"], [("r", "e1", "e2")]),
                            Quiver(["f"], []), {("e2", "f"): 1}, {("f", "e1"): 1})
    found, witness = efficient_cycles(pq)
    assert found and witness == ["down:e2>f", "up:f>e1", "r"]
    replay_witness(pq, witness)


def test_no_cycle_without_alternation():
    pq = PeirceSquareQuiver(Quiver(["e"], []), Quiver(["f"], []),
                            {("e", "f"): 1}, {})
    assert efficient_cycles(pq) == (False, None)
    # closing would need two consecutive floor arrows on the same floor
    pq = PeirceSquareQuiver(
        Quiver(["e1", "e2", "e3"], [("r1", "e1", "e2"), ("r2", "e2", "e3")]),
        Quiver(["f"], []), {("e3", "f"): 1}, {("f", "e1"): 1})
    assert efficient_cycles(pq) == (False, None)


def test_peirce_square_quiver_validation():
    qe, qf = Quiver(["e"], []), Quiver(["f"], [])
    pq = PeirceSquareQuiver(qe, qf, {("e", "f"): 0}, {("f", "e"): 1})
    assert pq.vertical_count() == 1
    assert pq.vertex_count() == 2
    assert efficient_cycles(pq) == (False, None)
    with pytest.raises(InputError):
        PeirceSquareQuiver(qe, qf, {("e", "f"): -1}, {})
    with pytest.raises(InputError):
        PeirceSquareQuiver(qe, qf, {("zz", "f"): 1}, {})


def test_tensor_nilpotence_input_checks():
    kt2 = truncated_polynomial(QQ, 2)
    m = free_rank_one_bimodule(K, kt2)
    with pytest.raises(AlgebraMismatch):
        tensor_nilpotence(K, m, 3)
    sq = null_square(K, K, free_rank_one_bimodule(K, K),
                     free_rank_one_bimodule(K, K))
    prod, mod = square_module(sq)
    with pytest.raises(InputError):
        tensor_nilpotence(prod, mod, 0)


# -- two-floor example with a quantum exterior floor ------------------------

def quantum_exterior(qval):
    loops = Quiver(["s"], [("a", "s", "s"), ("b", "s", "s")])
    return algebra_from_presentation(RewritePresentation(loops, [
        (("a", "a"), {}),
        (("b", "b"), {}),
        (("b", "a"), {("a", "b"): QQ.of(qval)}),
    ]))


def two_floor_square():
    A = quantum_exterior(2)
    B = algebra_from_presentation(
        RewritePresentation(Quiver(["x", "y"], [("h", "x", "y")]), []))
    M = free_corner_bimodule(B, 1, 0, A)
    N = free_corner_bimodule(A, 0, 0, B)
    return null_square(A, B, M, N)


def test_two_floor_square_assembles():
    sq = two_floor_square()
    assert sq.A.dim == 4 and sq.B.dim == 3
    assert sq.M.dim == 4 and sq.N.dim == 4
    assert tensor_over(sq.N, sq.M).dim == 0
    assert tensor_over(sq.M, sq.N).dim == 4
    assert assemble_square(sq).dim == 15


def test_two_floor_square_is_nilpotent_without_cycles():
    sq = two_floor_square()
    prod, mod = square_module(sq)
    assert tensor_nilpotence(prod, mod, 10) == 3
    pq = PeirceSquareQuiver(
        Quiver(["s"], [("a", "s", "s"), ("b", "s", "s")]),
        Quiver(["x", "y"], [("h", "x", "y")]),
        {("s", "y"): 1}, {("x", "s"): 1})
    assert efficient_cycles(pq) == (False, None)


def test_two_floor_square_closed_form():
    sq = two_floor_square()
    hh_a = bar_hochschild(sq.A, 5).dims
    hh_b = bar_hochschild(sq.B, 5).dims
    assert hh_a == [2, 2, 1, 0, 0, 0]
    assert hh_b == [1, 0, 0, 0, 0, 0]
    r = null_square_hh(sq, 2, hh_a=hh_a, hh_b=hh_b, budget=10 ** 9)
    assert r.dims == [1, 8, 5, 0, 0, 0]
    # vanishing tensor powers force zero kernels and cokernels past level 1
    assert [(lv.level, lv.kernel_dim, lv.cokernel_dim) for lv in r.levels] == \
        [(0, 1, 6), (1, 4, 0), (2, 0, 0)]
    assert bar_hochschild(assemble_square(sq), 1).dims == r.dims[:2]


def test_two_floor_square_budget_guard():
    sq = two_floor_square()
    with pytest.raises(BudgetExceeded):
        null_square_hh(sq, 2)


# -- randomized equivalence against a transfer-count oracle -----------------

def rad_square_zero(quiver):
    rules = []
    for l1, s1, t1 in quiver.arrows:
        for l2, s2, t2 in quiver.arrows:
            if s2 == t1:
                rules.append(((l2, l1), {}))
    return algebra_from_presentation(RewritePresentation(quiver, rules))


def rand_peirce_instance(rng):
    ne, nf = rng.randint(1, 3), rng.randint(1, 3)
    ev = [f"e{i}" for i in range(ne)]
    fv = [f"f{i}" for i in range(nf)]
    e_arr = [(f"ae{i}{j}", ev[i], ev[j]) for i in range(ne)
             for j in range(i + 1, ne) if rng.random() < .35]
    f_arr = [(f"af{i}{j}", fv[i], fv[j]) for i in range(nf)
             for j in range(i + 1, nf) if rng.random() < .35]
    downs, ups = {}, {}
    for e in ev:
        for f in fv:
            if rng.random() < .3:
                downs[(e, f)] = 2 if rng.random() < .08 else 1
            if rng.random() < .3:
                ups[(f, e)] = 2 if rng.random() < .08 else 1
    return Quiver(ev, e_arr), Quiver(fv, f_arr), downs, ups


def predicted_power_dims(qe, qf, downs, ups, h_max):
    """Tensor power dims by transfer counting over corner summands."""
    def outdeg(q, v):
        return len(q.arrows_from(v))

    def indeg(q, v):
        return len(q.arrows_into(v))

    def arrows_between(q, s, t):
        return sum(1 for lab, a, b in q.arrows if a == s and b == t)

    states = ([("d", e, f, m) for (e, f), m in sorted(downs.items())] +
              [("u", f, e, m) for (f, e), m in sorted(ups.items())])

    def leftdim(c):
        kind, _, near, _ = c
        return 1 + (outdeg(qf, near) if kind == "d" else outdeg(qe, near))

    def rightdim(c):
        kind, far, _, _ = c
        return 1 + (indeg(qe, far) if kind == "d" else indeg(qf, far))

    def middle(cl, cr):
        kl, al, _, _ = cl
        kr, _, br, _ = cr
        if kl == kr:
            return 0
        floor = qe if kl == "d" else qf
        return (1 if al == br else 0) + arrows_between(floor, br, al)

    vec = {c: c[3] * rightdim(c) for c in states}
    dims = []
    for _ in range(h_max):
        dims.append(sum(leftdim(c) * v for c, v in vec.items()))
        vec = {c2: c2[3] * sum(middle(c2, c) * v for c, v in vec.items())
               for c2 in states}
    return dims


def test_efficient_cycles_match_nilpotence_on_random_squares():
    rng = random.Random(20260823)
    accepted = cyclic = acyclic = 0
    tried = 0
    while accepted < 20 and tried < 200:
        tried += 1
        qe, qf, downs, ups = rand_peirce_instance(rng)
        if not downs and not ups:
            continue
        h_max = max(1, (len(downs) + len(ups)) *
                    (len(qe.vertices) + len(qf.vertices)))
        if h_max > 48:
            continue
        pred = predicted_power_dims(qe, qf, downs, ups, h_max)
        if any(d > 60 for d in pred):
            continue
        A, B = rad_square_zero(qe), rad_square_zero(qf)
        mparts = [free_corner_bimodule(B, qf.vertices.index(f),
                                       qe.vertices.index(e), A)
                  for (e, f), mult in sorted(downs.items())
                  for _ in range(mult)]
        nparts = [free_corner_bimodule(A, qe.vertices.index(e),
                                       qf.vertices.index(f), B)
                  for (f, e), mult in sorted(ups.items())
                  for _ in range(mult)]
        M = direct_sum(*mparts) if mparts else zero_bimodule(B, A)
        N = direct_sum(*nparts) if nparts else zero_bimodule(A, B)
        if M.dim + N.dim > 24:
            continue
        sq = null_square(A, B, M, N)
        prod, mod = square_module(sq)
        pq = PeirceSquareQuiver(qe, qf, downs, ups)
        found, witness = efficient_cycles(pq)
        nil = tensor_nilpotence(prod, mod, h_max)
        assert found == (nil is None)
        if found:
            replay_witness(pq, witness)
            cyclic += 1
        else:
            acyclic += 1
        acc = mod
        for h in range(1, (nil if nil is not None else h_max) + 1):
            assert acc.dim == pred[h - 1]
            if acc.dim == 0:
                break
            acc = tensor_over(acc, mod)
        accepted += 1
    assert accepted == 20
    assert cyclic >= 1 and acyclic >= 1
