import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import block_diag, expm

from lieflow.algebra import ad_of_map, heisenberg, semidirect_algebra
from lieflow.corpus import rational_corpus
from lieflow.group_models import catmap_generator
from lieflow.jordan import (
    ClusterAmbiguityError,
    JordanTriple,
    NotDerivationError,
    ad_jordan_consistency,
    derivation_parts,
    elliptic_hyperbolic_split,
    exp_factorization_residual,
    jordan_decompose,
    semisimple_nilpotent_split,
    verify_jordan,
)
from lieflow.linalg import inverse, is_exact, to_exact, to_float

from conftest import Q, matrix_oracle_parts


def zero(M):
    return not np.any(np.asarray(M) != 0)


def close(a, b, tol=1e-10):
    return np.abs(to_float(a) - to_float(b)).max() <= tol


def test_single_eigenvalue_split():
    S, N = semisimple_nilpotent_split(Q([[2, 1], [0, 2]]))
    assert zero(S - Q([[2, 0], [0, 2]]))
    assert zero(N - Q([[0, 1], [0, 0]]))


def test_strictly_upper_triangular_is_nilpotent():
    A = Q([[0, 3, -1], [0, 0, 5], [0, 0, 0]])
    S, N = semisimple_nilpotent_split(A)
    assert zero(S) and zero(N - A)


def test_split_against_generalized_eigenspace_oracle():
    # minimal polynomial (x - 1)^2 (x + 2), conjugated by an integer matrix
    B = Q([[1, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, -2]])
    P = Q([[1, 2, 0, 1], [0, 1, 1, 0], [1, 0, 1, 1], [0, 1, 0, 2]])
    A = P @ B @ inverse(P)
    S, N = semisimple_nilpotent_split(A)
    _, H_or, N_or = matrix_oracle_parts(A)
    assert close(N, N_or, 1e-12) and close(S, H_or, 1e-12)
    assert is_exact(S)


def test_rotation_scaling_block_parts():
    lam, mu = Fraction(3, 2), Fraction(-2)
    S = Q([[lam, -mu], [mu, lam]])
    E, H = elliptic_hyperbolic_split(S)
    assert zero(E - Q([[0, -mu], [mu, 0]]))
    assert zero(H - Q([[lam, 0], [0, lam]]))


def test_real_diagonal_is_hyperbolic():
    S = Q([[3, 0, 0], [0, -1, 0], [0, 0, 0]])
    E, H = elliptic_hyperbolic_split(S)
    assert zero(E) and zero(H - S)


@pytest.mark.parametrize("mode", ["exact", "float"])
def test_block_mix_conjugated(mode):
    # rotation-scaling blocks (a, b) and a real eigenvalue, conjugated by P
    blocks = [(1, 2), (-2, 1)]
    rot = [Q([[a, -b], [b, a]]) for a, b in blocks]
    Bm = np.array(block_diag(*[to_float(r) for r in rot], [[3.0]]), dtype=float)
    Eb = block_diag(*[[[0, -b], [b, 0]] for _, b in blocks], [[0.0]])
    Hb = block_diag(*[[[a, 0], [0, a]] for a, _ in blocks], [[3.0]])
    P = Q([[1, 1, 0, 0, 1], [0, 1, 2, 0, 0], [0, 0, 1, 1, 0], [1, 0, 0, 1, 0], [0, 0, 1, 0, 1]])
    Pi = inverse(P)
    S = P @ to_exact(Bm) @ Pi
    if mode == "float":
        S = to_float(S)
    E, H = elliptic_hyperbolic_split(S)
    Pf, Pif = to_float(P), to_float(Pi)
    assert close(E, Pf @ Eb @ Pif, 1e-9) and close(H, Pf @ Hb @ Pif, 1e-9)
    if mode == "exact":
        assert is_exact(E) and zero(E + H - S)


def test_catmap_generator_is_hyperbolic():
    D = catmap_generator()
    t = jordan_decompose(D)
    assert np.abs(t.H - D).max() < 1e-12
    assert np.abs(t.E).max() < 1e-12 and np.abs(t.N).max() < 1e-12


def test_rotation_generator_is_elliptic():
    A = Q([[0, -1], [1, 0]])
    t = jordan_decompose(A)
    assert t.method == "exact"
    assert zero(t.E - A) and zero(t.H) and zero(t.N)


def test_three_by_three_against_oracle():
    A = Q([[1, 1, 0], [0, 1, 0], [0, 0, -2]])
    t = jordan_decompose(A)
    E_or, H_or, N_or = matrix_oracle_parts(A)
    assert zero(t.E) and zero(t.H - Q([[1, 0, 0], [0, 1, 0], [0, 0, -2]]))
    assert zero(t.N - Q([[0, 1, 0], [0, 0, 0], [0, 0, 0]]))
    assert close(t.H, H_or) and close(t.N, N_or) and close(t.E, E_or)


def test_irrational_mixed_spectrum_stays_exact():
    # eigenvalues 1 +- i sqrt 2 and +- sqrt 2
    A = Q([[1, -2, 0, 0], [1, 1, 0, 0], [0, 0, 0, 2], [0, 0, 1, 0]])
    t = jordan_decompose(A)
    assert t.method == "exact" and t.certificates.max_residual() == 0
    assert zero(t.E - Q([[0, -2, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]))


def test_cubic_factor_falls_back_to_high_precision():
    # x^3 - 2 has one real and two complex roots: no rational real-part map
    A = Q([[0, 0, 2], [1, 0, 0], [0, 1, 0]])
    t = jordan_decompose(A)
    assert t.method == "exact+mp" and t.certificates.passed
    E_or, H_or, _ = matrix_oracle_parts(A)
    assert close(t.E, E_or, 1e-12) and close(t.H, H_or, 1e-12)


def test_verify_jordan_examples():
    A = Q([[2, 1], [0, 2]])
    good = JordanTriple(Q([[0, 0], [0, 0]]), Q([[2, 0], [0, 2]]), Q([[0, 1], [0, 0]]))
    assert verify_jordan(A, good).passed
    swapped = JordanTriple(good.E, good.N, good.H)
    rep = verify_jordan(A, swapped)
    assert not rep["hyperbolic_H"].passed
    bad = JordanTriple(to_float(good.E), to_float(good.H), to_float(good.N))
    bad.E[0, 1] += 1e-3
    rep = verify_jordan(A, bad)
    assert not rep["sum"].passed
    assert rep["sum"].residual == pytest.approx(1e-3 / np.linalg.norm(to_float(A)), rel=1e-6)


def test_semidirect_derivation_parts_block_formula():
    lam, mu, xi = Fraction(2), Fraction(-1, 2), Q([3, 1])
    A = Q([[lam, -mu], [mu, lam]])
    D = Q([[0, 0, 0], [xi[0], lam, -mu], [xi[1], mu, lam]])
    t = derivation_parts(semidirect_algebra(), D)
    Ai = inverse(A)
    A_E, A_H = Q([[0, -mu], [mu, 0]]), Q([[lam, 0], [0, lam]])
    for part, Ap in ((t.E, A_E), (t.H, A_H)):
        assert zero(part[1:, 1:] - Ap)
        assert zero(part[1:, 0] - Ap @ Ai @ xi)
        assert zero(part[0])
    assert zero(t.N)
    assert all(c.passed for c in t.certificates.checks if c.name.startswith("derivation_"))


def test_heisenberg_diagonal_derivation():
    D = Q([[1, 0, 0], [0, -1, 0], [0, 0, 0]])
    t = derivation_parts(heisenberg(), D)
    assert zero(t.E) and zero(t.H - D) and zero(t.N)


def test_heisenberg_derivation_with_nilpotent_part():
    D = Q([[1, 1, 0], [0, 1, 0], [2, -1, 2]])
    t = derivation_parts(heisenberg(), D)
    E_or, H_or, N_or = matrix_oracle_parts(D)
    assert close(t.H, H_or) and close(t.N, N_or) and close(t.E, E_or)
    assert t.certificates.passed and not zero(t.N)


def test_non_derivation_rejected():
    with pytest.raises(NotDerivationError):
        derivation_parts(heisenberg(), Q([[1, 0, 0], [0, 1, 0], [0, 0, 1]]))


@pytest.mark.parametrize("A", [
    Q([[1, 0], [0, -1]]),
    Q([[0, -1], [1, 0]]),
    Q([[2, 1], [0, 2]]),
])
def test_ad_jordan_consistency(A):
    rep = ad_jordan_consistency(A)
    assert rep.passed


def test_ad_parts_of_diagonal_and_rotation():
    t = jordan_decompose(ad_of_map(Q([[1, 0], [0, -1]])))
    assert zero(t.E) and zero(t.N)
    t = jordan_decompose(ad_of_map(Q([[0, -1], [1, 0]])))
    assert zero(t.H) and zero(t.N)


def test_float_split_rejects_ambiguous_clusters():
    # gaps growing by a factor 3 from 3e-8 to 0.14: no cut separates them by 10x
    gaps = 3e-8 * 3.0 ** np.arange(15)
    with pytest.raises(ClusterAmbiguityError):
        jordan_decompose(np.diag(np.concatenate([[0.0], np.cumsum(gaps)])))


# ---------------------------------------------------------------- properties

def test_exact_residuals_vanish_on_corpus():
    for A, label in rational_corpus(30, seed=7):
        t = jordan_decompose(A)
        assert t.method == "exact", label
        assert t.certificates.max_residual() == 0, label


def test_exact_and_float_paths_agree():
    for A, label in rational_corpus(30, seed=8):
        te = jordan_decompose(A)
        tf = jordan_decompose(to_float(A))
        for a, b in zip(te.as_float(), tf.as_float()):
            assert np.abs(a - b).max() <= 1e-8, label


unimodular = st.lists(st.integers(-2, 2), min_size=3, max_size=3)


@given(unimodular, st.sampled_from(range(12)))
def test_conjugation_equivariance(lower, which):
    A, _ = rational_corpus(12, seed=3, dims=(3, 3))[which]
    L = np.eye(3)
    L[1, 0], L[2, 0], L[2, 1] = lower
    U = L.T.copy()
    P = L @ U
    Af = to_float(A)
    t = jordan_decompose(Af)
    tc = jordan_decompose(P @ Af @ np.linalg.inv(P))
    Pi = np.linalg.inv(P)
    scale = max(1.0, np.linalg.norm(Af)) * np.linalg.cond(P)
    for a, b in zip(t.as_float(), tc.as_float()):
        assert np.abs(P @ a @ Pi - b).max() <= 1e-8 * scale


@given(st.sampled_from(range(20)))
def test_exp_factorization(which):
    A, _ = rational_corpus(20, seed=4)[which]
    Af = to_float(A) / max(1.0, np.abs(to_float(A)).max())
    t = jordan_decompose(Af)
    assert exp_factorization_residual(Af, t) <= 1e-9
    assert np.allclose(expm(Af), expm(t.E) @ expm(t.H) @ expm(t.N), atol=1e-9)


@given(st.integers(-4, 4), st.integers(1, 4), st.integers(-4, 4))
def test_parts_of_a_rotation_scaling_jordan_block(a, b, c):
    # 4x4 block with repeated complex pair a +- ib and a shear of size c
    R = [[a, -b], [b, a]]
    A = Q([[*R[0], c, 0], [*R[1], 0, c], [0, 0, *R[0]], [0, 0, *R[1]]])
    t = jordan_decompose(A)
    assert t.certificates.max_residual() == 0
    assert zero(t.N - Q([[0, 0, c, 0], [0, 0, 0, c], [0, 0, 0, 0], [0, 0, 0, 0]]))
    assert zero(t.H - Q([[a if i == j else 0 for j in range(4)] for i in range(4)]))
