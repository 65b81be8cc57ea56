from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lieflow.algebra import (
    LieAlgebra,
    StructureError,
    abelian,
    ad_of_map,
    ad_operator,
    bracket,
    center,
    check_jacobi,
    heisenberg,
    is_derivation,
    killing_form,
    sl,
    sl2,
    unvec,
    vec,
)
from lieflow.linalg import Subspace, to_float

from conftest import Q

H2 = np.array([[1, 0], [0, -1]])
E2 = np.array([[0, 1], [0, 0]])
F2 = np.array([[0, 0], [1, 0]])


def sl2_coords(M):
    # (H, E, F) coordinates of a traceless 2x2 matrix
    return np.array([M[0, 0], M[0, 1], M[1, 0]])


def test_heisenberg_bracket_reads_structure_constant():
    h = heisenberg()
    e1, e2, e3 = (h.basis_vector(i) for i in range(3))
    assert list(bracket(h, e1, e2)) == list(e3)
    assert list(bracket(h, e2, e1)) == list(-e3)


def test_sl2_bracket_matches_matrix_commutator():
    alg = sl2()
    mats = [H2, E2, F2]
    for i in range(3):
        for j in range(3):
            comm = mats[i] @ mats[j] - mats[j] @ mats[i]
            got = bracket(alg, alg.basis_vector(i), alg.basis_vector(j))
            assert [int(v) for v in got] == list(sl2_coords(comm))


def test_bracket_with_self_vanishes():
    alg = sl(3)
    x = np.array([Fraction(k, 3) for k in range(alg.dim)], dtype=object)
    assert not np.any(bracket(alg, x, x) != 0)


def test_jacobi_holds_exactly_for_standard_algebras():
    for alg in (heisenberg(), sl2(), sl(3), abelian(4)):
        rep = check_jacobi(alg)
        assert rep.passed and rep.max_residual() == 0


def test_jacobi_detects_perturbed_constants():
    bad = LieAlgebra.from_structure(3, [(0, 1, 1, "2.1"), (0, 2, 2, -2), (1, 2, 0, 1)])
    rep = check_jacobi(bad)
    assert not rep.passed
    # [H,[E,F]] + [E,[F,H]] + [F,[H,E]] = (2 - 2.1) H
    assert rep.max_residual() == pytest.approx(0.1)


def test_structure_rejects_inconsistent_orientation():
    with pytest.raises(StructureError):
        LieAlgebra.from_structure(2, [(0, 1, 0, 1), (1, 0, 0, 1)])
    with pytest.raises(StructureError):
        LieAlgebra.from_structure(2, [(0, 0, 1, 1)])


def test_is_derivation_examples():
    h = heisenberg()
    assert is_derivation(h, Q([[1, 0, 0], [0, -1, 0], [0, 0, 0]])).passed
    rep = is_derivation(h, Q([[1, 0, 0], [0, 1, 0], [0, 0, 1]]))
    assert not rep.passed
    # D e3 = e3 while [De1, e2] + [e1, De2] = 2 e3
    assert rep.max_residual() == pytest.approx(1.0)
    rnd = np.random.default_rng(1).normal(size=(4, 4))
    assert is_derivation(abelian(4, "float"), rnd).passed


def test_ad_operator_examples():
    alg = sl2()
    adH = ad_operator(alg, alg.basis_vector(0))
    assert [[int(v) for v in r] for r in adH] == [[0, 0, 0], [0, 2, 0], [0, 0, -2]]
    assert not np.any(ad_operator(alg, np.zeros(3, dtype=object) * Fraction(0)) != 0)
    h = heisenberg()
    assert list(ad_operator(h, h.basis_vector(0)) @ h.basis_vector(1)) == [0, 0, 1]


def test_ad_of_map_examples():
    A = Q([[1, 0], [0, 2]])
    E12 = Q([[0, 1], [0, 0]])
    out = unvec(ad_of_map(A) @ vec(E12), 2)
    assert [[int(v) for v in r] for r in out] == [[0, -1], [0, 0]]
    assert not np.any(ad_of_map(Q([[1, 0], [0, 1]])) != 0)


def test_ad_of_square_zero_map_is_nilpotent_of_order_three():
    A = Q([[0, 1, 2], [0, 0, 0], [0, 0, 0]])
    assert not np.any(A @ A != 0)
    adA = ad_of_map(A)
    assert not np.any(adA @ adA @ adA != 0)
    assert np.any(adA @ adA != 0)


def test_killing_form_sl2():
    alg = sl2()
    H, E, F = (alg.basis_vector(i) for i in range(3))
    # brute force: trace of products of 3x3 ad matrices
    ad = lambda x: to_float(ad_operator(alg, x))
    assert killing_form(alg, H, H) == 8 == round(np.trace(ad(H) @ ad(H)))
    assert killing_form(alg, E, E) == 0
    assert killing_form(alg, E, F) == 4


def test_killing_form_heisenberg_vanishes():
    h = heisenberg()
    for i in range(3):
        for j in range(3):
            assert killing_form(h, h.basis_vector(i), h.basis_vector(j)) == 0


def test_center_examples():
    assert center(heisenberg()).equals(Subspace(Q([[0], [0], [1]])))
    assert center(abelian(3)).dim == 3
    assert center(sl2()).dim == 0
    assert center(sl(3)).dim == 0


# ---------------------------------------------------------------- properties

vectors3 = st.lists(st.integers(-5, 5), min_size=3, max_size=3).map(
    lambda v: np.array([Fraction(x) for x in v], dtype=object))
algebras = st.sampled_from([heisenberg(), sl2()])


@given(algebras, vectors3, vectors3, vectors3, st.integers(-3, 3))
def test_bracket_is_bilinear_and_antisymmetric(alg, x, y, z, a):
    assert not np.any(bracket(alg, a * x + z, y) - (a * bracket(alg, x, y) + bracket(alg, z, y)) != 0)
    assert not np.any(bracket(alg, x, y) + bracket(alg, y, x) != 0)


@given(algebras, vectors3)
def test_inner_derivations_are_derivations(alg, x):
    assert is_derivation(alg, ad_operator(alg, x)).max_residual() == 0


@given(vectors3, vectors3, vectors3)
def test_killing_form_is_invariant(x, y, z):
    alg = sl2()
    assert killing_form(alg, bracket(alg, x, y), z) == killing_form(alg, x, bracket(alg, y, z))


@given(algebras, vectors3, vectors3)
def test_ad_is_a_homomorphism(alg, x, y):
    X, Y = ad_operator(alg, x), ad_operator(alg, y)
    assert not np.any(ad_operator(alg, bracket(alg, x, y)) - (X @ Y - Y @ X) != 0)


@given(st.lists(st.integers(-4, 4), min_size=4, max_size=4),
       st.lists(st.integers(-4, 4), min_size=4, max_size=4))
def test_ad_of_map_is_the_commutator(a, b):
    A, B = Q([a[:2], a[2:]]), Q([b[:2], b[2:]])
    assert not np.any(unvec(ad_of_map(A) @ vec(B), 2) - (A @ B - B @ A) != 0)
