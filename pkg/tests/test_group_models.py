import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from lieflow.group_models import (
    EuclideanAbelian,
    GroupElement,
    HeisenbergExp,
    ModelError,
    SemidirectRxR2,
    Torus2,
    ad_conjugation_identity,
    automorphism_check,
    candidate_set,
    catmap_discrete_counterexample,
    catmap_generator,
    catmap_generator_check,
    catmap_iterate,
    catmap_periods,
    fix_intersection_certificate,
    fixed_set_semidirect,
    flow,
    group_inverse,
    group_multiply,
    linear_flow,
    recurrent_set_certificate,
    semidirect_flow,
    semidirect_ode_check,
    semidirect_vector_field,
)
from lieflow.jordan import NotDerivationError, derivation_parts
from lieflow.linalg import to_float

from conftest import Q

J = np.array([[0.0, -1.0], [1.0, 0.0]])
HYP = Q([[1, 0, 0], [0, -1, 0], [0, 0, 0]])
ELL = Q([[0, -1, 0], [1, 0, 0], [0, 0, 0]])
half = Fraction(1, 2)


# ---------------------------------------------------------------- group law

def test_heisenberg_product():
    m = HeisenbergExp()
    g = group_multiply(m, m.element(Q([1, 0, 0])), m.element(Q([0, 1, 0])))
    assert list(g.coords) == [1, 1, half]


def test_semidirect_quarter_rotation():
    m = SemidirectRxR2(0, 1, (0, 0))
    g = group_multiply(m, m.element([math.pi / 2, 0, 0]), m.element([0, 1, 0]))
    assert np.allclose(g.coords, [math.pi / 2, 0, 1], atol=1e-15)


@pytest.mark.parametrize("m, coords", [
    (EuclideanAbelian(3), [1.0, -2.0, 0.5]),
    (HeisenbergExp(), [1.0, -2.0, 0.5]),
    (SemidirectRxR2(), [0.7, -2.0, 0.5]),
    (Torus2(), [Fraction(1, 3), Fraction(3, 7)]),
])
def test_inverse_gives_identity(m, coords):
    g = m.element(coords)
    e = group_multiply(m, g, group_inverse(m, g))
    assert np.allclose(to_float(e.coords), 0, atol=1e-15)


def test_model_mismatch():
    a, b = HeisenbergExp(), EuclideanAbelian(3)
    with pytest.raises(ModelError):
        group_multiply(a, a.element([0, 0, 0]), b.element([0, 0, 0]))


def test_torus_validation_and_reduction():
    with pytest.raises(ModelError):
        Torus2(((2, 0), (0, 1)))
    with pytest.raises(ModelError):
        Torus2(((1, half), (0, 1)))
    assert list(Torus2().element([Fraction(5, 4), Fraction(-1, 3)]).coords) == [Fraction(1, 4), Fraction(2, 3)]


triples = st.lists(st.floats(-3, 3), min_size=3, max_size=3).map(np.array)


@given(st.sampled_from([HeisenbergExp(), SemidirectRxR2(), EuclideanAbelian(3)]), triples, triples, triples)
def test_associativity(m, a, b, c):
    lhs = m.multiply(m.multiply(a, b), c)
    rhs = m.multiply(a, m.multiply(b, c))
    assert np.allclose(lhs, rhs, atol=1e-12)


# ---------------------------------------------------------------- flows

def test_heisenberg_linear_flow_diagonal():
    m = HeisenbergExp()
    g = linear_flow(m, HYP, math.log(2), m.element([1.0, 1.0, 0.0]))
    assert np.allclose(g.coords, [2.0, 0.5, 0.0], atol=1e-15)


@pytest.mark.parametrize("m, D", [(HeisenbergExp(), ELL), (EuclideanAbelian(2), Q([[1, 2], [3, 4]]))])
def test_linear_flow_at_zero(m, D):
    g = m.element(Q([Fraction(k, 3) for k in range(1, m.dim + 1)]))
    assert linear_flow(m, D, 0, g) == g


def test_linear_flow_rejects_non_derivation_and_wrong_model():
    m = HeisenbergExp()
    with pytest.raises(NotDerivationError):
        linear_flow(m, Q([[1, 0, 0], [0, 1, 0], [0, 0, 1]]), 1, m.element([0, 0, 0]))
    s = SemidirectRxR2()
    with pytest.raises(ModelError):
        linear_flow(s, s.derivation(), 1, s.element([0, 0, 0]))


def test_heisenberg_random_derivation_is_automorphism():
    rng = np.random.default_rng(4)
    m = HeisenbergExp()
    a, b, c, d, x, y = rng.normal(size=6)
    D = np.array([[a, b, 0], [c, d, 0], [x, y, a + d]])
    for _ in range(20):
        g, h = m.element(rng.normal(size=3)), m.element(rng.normal(size=3))
        t = float(rng.uniform(-1, 1))
        lhs = linear_flow(m, D, t, group_multiply(m, g, h)).coords
        rhs = group_multiply(m, linear_flow(m, D, t, g), linear_flow(m, D, t, h)).coords
        assert np.linalg.norm(lhs - rhs) <= 1e-9 * max(1, np.linalg.norm(rhs))


def test_vector_field_trivial_cases():
    m0 = SemidirectRxR2(1, 1, (0, 0))
    assert np.array_equal(semidirect_vector_field(m0, [0.3, 0.0, 0.0]), [0, 0, 0])
    m = SemidirectRxR2(1, 1, (1, 0))
    assert np.array_equal(semidirect_vector_field(m, [0.0, 0.0, 0.0]), [0, 0, 0])


def test_vector_field_against_expm_oracle():
    m = SemidirectRxR2(1, 1, (1, 0))
    A = np.array([[1.0, -1.0], [1.0, 1.0]])
    v, xi = np.array([1.0, 0.0]), np.array([1.0, 0.0])
    expected = A @ v + (expm(math.pi * J) - np.eye(2)) @ np.linalg.inv(J) @ xi
    got = semidirect_vector_field(m, [math.pi, *v])
    assert got[0] == 0 and np.allclose(got[1:], expected, atol=1e-14)
    # (e^{pi J} - I) J^-1 xi = -2 J^-1 xi = (0, 2), so X = (0, 1 + 0, 1 + 2)
    assert np.allclose(got[1:], [1.0, 3.0], atol=1e-14)


def test_semidirect_flow_without_xi():
    m = SemidirectRxR2(Fraction(1, 2), 2, (0, 0))
    g = [0.4, 1.0, -1.0]
    A = np.array([[0.5, -2.0], [2.0, 0.5]])
    assert np.allclose(semidirect_flow(m, 1.3, g).coords[1:], expm(1.3 * A) @ g[1:], atol=1e-13)
    assert semidirect_flow(m, 1.3, g).coords[0] == 0.4


def test_semidirect_flow_at_zero():
    m = SemidirectRxR2(1, 2, (1, 1))
    g = np.array([1.0, 0.5, -0.3])
    assert np.allclose(semidirect_flow(m, 0.0, g).coords, g, atol=1e-15)


def test_semidirect_flow_ode_oracle():
    m = SemidirectRxR2(1, 2, (1, 1))
    g = np.array([1.0, 0.5, -0.3])
    sol = solve_ivp(lambda _, y: semidirect_vector_field(m, y), (0.0, 0.7), g,
                    method="RK45", rtol=1e-12, atol=1e-12)
    assert np.linalg.norm(semidirect_flow(m, 0.7, g).coords - sol.y[:, -1]) <= 1e-8


def test_semidirect_flow_rejects_singular_generator():
    with pytest.raises(ModelError):
        semidirect_flow(SemidirectRxR2(0, 0, (1, 0)), 1.0, [0, 0, 0])


def test_generic_flow_matches_closed_form():
    m = SemidirectRxR2(Fraction(-1, 3), 2, (1, -2))
    g = np.array([0.9, 0.1, 0.2])
    for s in (-2.0, 0.5, 3.0):
        assert np.allclose(flow(m, m.derivation(), s, g), semidirect_flow(m, s, g).coords, atol=1e-11)


# ---------------------------------------------------------------- fixed and recurrent sets

def test_fixed_set_without_xi():
    m = SemidirectRxR2(1, 1, (0, 0))
    for t, v in fixed_set_semidirect(m, np.linspace(-3, 3, 7)):
        assert np.array_equal(v, [0, 0])


def test_fixed_set_at_zero_time():
    (t, v), = fixed_set_semidirect(SemidirectRxR2(2, -1, (3, 5)), [0.0])
    assert t == 0 and np.allclose(v, 0)


def test_fixed_set_quarter_turn():
    m = SemidirectRxR2(1, 1, (1, 0))
    A = np.array([[1.0, -1.0], [1.0, 1.0]])
    (t, v), = fixed_set_semidirect(m, [math.pi / 2])
    expected = -np.linalg.inv(A) @ (expm(math.pi / 2 * J) - np.eye(2)) @ np.linalg.inv(J) @ [1.0, 0.0]
    assert np.allclose(v, expected, atol=1e-15)
    assert np.linalg.norm(semidirect_vector_field(m, [t, *v])) <= 1e-12


def test_heisenberg_candidate_set_is_center_line():
    m = HeisenbergExp()
    Z = candidate_set(m, derivation_parts(m.algebra, HYP))
    assert Z.kernel.dim == 1 and Z.kernel.contains(Q([0, 0, 1]))
    rep = recurrent_set_certificate(m, HYP, n_samples=10)
    assert rep.passed and rep.data["candidate_dim"] == 1


def test_semidirect_without_xi_certificate():
    rep = recurrent_set_certificate(SemidirectRxR2(1, 1, (0, 0)), n_samples=10)
    assert rep.passed and rep.data["candidate_set"] == "R x {0}"


def test_abelian_rotation_everything_recurrent():
    m = EuclideanAbelian(2)
    rep = recurrent_set_certificate(m, Q([[0, -1], [1, 0]]), n_samples=10)
    assert rep.passed and rep.data["candidate_dim"] == 2
    assert "vacuous" in rep["offset_nonrecurrent"].note


def test_semidirect_with_xi_certificate():
    rep = recurrent_set_certificate(SemidirectRxR2(1, 1, (1, 0)), n_samples=10)
    assert rep.passed and rep.data["xi_H"] == ["1/2", "-1/2"]


def test_recurrent_certificate_rejects_torus():
    with pytest.raises(ModelError):
        recurrent_set_certificate(Torus2(), Q([[0, 0], [0, 0]]))


def test_fix_intersection_semidirect_equals_hyperbolic_fixed_set():
    m = SemidirectRxR2(1, 1, (1, 0))
    rep = fix_intersection_certificate(m)
    assert rep.passed
    parts = derivation_parts(m.algebra, m.derivation())
    for t in np.linspace(-3, 3, 7):
        full = candidate_set(m, parts, t, include=("E", "H", "N"))
        hyp = candidate_set(m, parts, t, include=("H",))
        assert np.allclose(to_float(full.point), to_float(hyp.point), atol=1e-14)


def test_fix_intersection_zero_derivation():
    m = HeisenbergExp()
    rep = fix_intersection_certificate(m, Q([[0] * 3] * 3))
    assert rep.passed
    Z = candidate_set(m, derivation_parts(m.algebra, Q([[0] * 3] * 3)), include=("E", "H", "N"))
    assert Z.kernel.dim == 3


def test_fix_intersection_mixed_heisenberg():
    # elliptic block on (e1, e2) plus a hyperbolic scaling: trace goes to e3
    D = Q([[1, -1, 0], [1, 1, 0], [0, 0, 2]])
    assert fix_intersection_certificate(HeisenbergExp(), D).passed


def test_ad_conjugation_examples():
    m = HeisenbergExp()
    assert np.array_equal(m.adjoint(np.zeros(3)), np.eye(3))
    rep = ad_conjugation_identity(m, HYP, samples=30, t_range=(1.3, 1.3))
    assert rep.max_residual() <= 1e-8
    rep = ad_conjugation_identity(SemidirectRxR2(1, 2, (1, 1)), samples=30, t_range=(0.0, 0.0))
    assert rep.max_residual() <= 1e-15


@pytest.mark.parametrize("m, D", [
    (HeisenbergExp(), HYP),
    (HeisenbergExp(), Q([[1, 2, 0], [-1, 0, 0], [3, 1, 1]])),
    (SemidirectRxR2(1, 1, (1, 0)), None),
    (SemidirectRxR2(Fraction(-1, 2), 3, (2, -1)), None),
    (EuclideanAbelian(2), Q([[0, -1], [1, 0]])),
])
def test_automorphism_and_flow_property(m, D):
    rep = automorphism_check(m, D, samples=50)
    assert rep.passed, rep.to_text()
    assert ad_conjugation_identity(m, D, samples=20).passed


def test_ode_check_report():
    assert semidirect_ode_check(SemidirectRxR2(1, 2, (1, 1)), samples=3).passed


# ---------------------------------------------------------------- cat map

def test_catmap_origin_fixed():
    m = Torus2()
    for n in (0, 1, 7):
        assert list(catmap_iterate(m, Q([0, 0]), n).coords) == [0, 0]


def test_catmap_half_points_cycle():
    m = Torus2()
    orbit = [list(catmap_iterate(m, Q([half, half]), n).coords) for n in range(4)]
    assert orbit == [[half, half], [0, half], [half, 0], [half, half]]


def test_catmap_zero_steps():
    p = Q([Fraction(2, 7), Fraction(3, 7)])
    assert list(catmap_iterate(Torus2(), p, 0).coords) == list(p)


def test_catmap_small_scans():
    rep = catmap_discrete_counterexample(q_max=1)
    assert rep.passed and rep.data["points"] == 1 and rep.data["periods_by_q"]["1"] == [1]
    rep = catmap_discrete_counterexample(q_max=2)
    assert rep.passed and rep.data["periods_by_q"]["2"] == [3]


def test_catmap_denominator_five_by_iteration():
    m = Torus2()
    found = {}
    for a in range(5):
        for b in range(5):
            p = Q([Fraction(a, 5), Fraction(b, 5)])
            period = next(n for n in range(1, 26) if list(catmap_iterate(m, p, n).coords) == list(p))
            assert (period == 1) == (a == b == 0)
            found[a, b] = period
    a, b, per = catmap_periods(m, 5)
    assert {(int(x), int(y)): int(k) for x, y, k in zip(a, b, per)} == {
        k: v for k, v in found.items() if k != (0, 0)}


def test_catmap_generator_numbers():
    D = catmap_generator()
    assert np.abs(expm(D) - [[1, 1], [1, 2]]).max() <= 1e-12
    assert abs(np.trace(D)) <= 1e-12
    assert catmap_generator_check().passed
