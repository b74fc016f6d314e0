from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from quiverhh.algebras import field_algebra, product_algebra, truncated_polynomial
from quiverhh.bimodules import (
    direct_sum,
    free_corner_bimodule,
    hom_bimodule,
    hom_vector_to_matrix,
    regular_bimodule,
    tensor_chain,
    tensor_over,
    zero_bimodule,
)
from quiverhh.errors import AlgebraMismatch, NotInSystem
from quiverhh.fields import QQ
from quiverhh.presentations import RewritePresentation, algebra_from_presentation
from quiverhh.quiver import Quiver


def kA2():
    q = Quiver(["x", "y"], [("a", "x", "y")])
    return algebra_from_presentation(RewritePresentation(q, []))


def test_regular_bimodule_valid():
    a = truncated_polynomial(n=3)
    m = regular_bimodule(a)
    m._validate()  # would raise on any axiom failure
    assert m.dim == 3


def test_free_corner_k():
    k = field_algebra()
    m = free_corner_bimodule(k, 0, 0, k)
    assert m.dim == 1


def test_free_corner_kA2():
    b = kA2()
    k = field_algebra()
    # f = e_x: Bf has basis {e_x, a}
    m = free_corner_bimodule(b, 0, 0, k)
    assert m.dim == 2
    # f = e_y: Bf = k e_y
    m2 = free_corner_bimodule(b, 1, 0, k)
    assert m2.dim == 1
    with pytest.raises(NotInSystem):
        free_corner_bimodule(b, 5, 0, k)


def test_tensor_k_over_k():
    k = field_algebra()
    m = regular_bimodule(k)
    t = tensor_over(m, m)
    assert t.dim == 1


def test_tensor_with_zero():
    k = field_algebra()
    m = regular_bimodule(k)
    z = zero_bimodule(k, k)
    assert tensor_over(m, z).dim == 0
    assert tensor_over(z, m).dim == 0


def test_tensor_free_corners_collapse_middle():
    # (Bf (x) eA) (x)_A (Ae' (x) f'B) has dim = dim Bf * dim eAe' * dim f'B
    from quiverhh.algebras import corner_dims

    b = kA2()
    m = free_corner_bimodule(b, 0, 1, b)   # Be_x (x) e_yA: dim 2 * 2
    n = free_corner_bimodule(b, 0, 0, b)   # Ae_x (x) e_xB: dim 2 * 1
    assert m.dim == 4 and n.dim == 2
    t = tensor_over(m, n)
    middle = corner_dims(b)[(0, 1)]        # e_y A e_x = k a
    assert middle == 1
    assert t.dim == 2 * middle * 1


def test_tensor_mismatch():
    k = field_algebra()
    b = kA2()
    with pytest.raises(AlgebraMismatch):
        tensor_over(regular_bimodule(k), regular_bimodule(b))


def test_tensor_regular_absorbs():
    # A (x)_A A = A for any algebra
    for alg in (field_algebra(), truncated_polynomial(n=2), kA2()):
        m = regular_bimodule(alg)
        t = tensor_over(m, m)
        assert t.dim == alg.dim


def test_tensor_assoc_dims():
    a = truncated_polynomial(n=2)
    m = regular_bimodule(a)
    left = tensor_over(tensor_over(m, m), m)
    right = tensor_over(m, tensor_over(m, m))
    assert left.dim == right.dim == a.dim
    assert tensor_chain([m, m, m]).dim == a.dim


def test_hom_end_k():
    k = field_algebra()
    m = regular_bimodule(k)
    assert hom_bimodule(m, m).dim == 1


def test_hom_into_zero():
    k = field_algebra()
    m = regular_bimodule(k)
    z = zero_bimodule(k, k)
    assert hom_bimodule(m, z).dim == 0


def test_hom_free_rank_one_truncated():
    # End_{B-A}(B (x) A) for B = A = k[t]/t^2: maps are free on the image of
    # 1 (x) 1, so dim = dim B (x) A = 4
    b = truncated_polynomial(n=2)
    m = free_corner_bimodule(b, 0, 0, b)
    assert m.dim == 4
    assert hom_bimodule(m, m).dim == 4


def test_hom_vectors_are_bimodule_maps():
    b = kA2()
    k = field_algebra()
    m = free_corner_bimodule(b, 0, 0, k)
    sol = hom_bimodule(m, m)
    for vec in sol.basis_vectors():
        F = hom_vector_to_matrix(QQ, vec, m.dim, m.dim)
        for i in range(b.dim):
            assert F.matmul(m.left_act[i]) == m.left_act[i].matmul(F)
        for i in range(k.dim):
            assert F.matmul(m.right_act[i]) == m.right_act[i].matmul(F)


def test_direct_sum_dims_and_actions():
    k = field_algebra()
    m = regular_bimodule(k)
    s = direct_sum(m, m, m)
    assert s.dim == 3
    s._validate()


@given(st.integers(min_value=1, max_value=3), st.integers(min_value=1, max_value=3))
@settings(max_examples=9, deadline=None)
def test_tensor_dim_bound(n1, n2):
    a = truncated_polynomial(n=n1)
    b = truncated_polynomial(n=n2)
    # (A as A-k bimodule) (x)_k (B as k-B bimodule): no balancing at all
    k = field_algebra()
    ma = free_corner_bimodule(a, 0, 0, k)
    mb = free_corner_bimodule(k, 0, 0, b)
    t = tensor_over(ma, mb)
    assert t.dim == a.dim * b.dim
