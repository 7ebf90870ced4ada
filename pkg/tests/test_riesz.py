import numpy as np
import pytest
from hypothesis import given, strategies as st

from intertwining import linalg as la
from intertwining.errors import BadMetric, HypothesisViolated, NotPseudoHermitian, Singular
from intertwining.instances import (
    diagonal_t,
    make_rng,
    nogo_instance,
    polynomial,
    random_hermitian,
    random_invertible,
    random_unitary,
)
from intertwining.intertwine import synthesize_from_spectrum
from intertwining.models import make_pseudoboson
from intertwining.riesz import (
    biorthogonal_criterion,
    biorthogonality_defect,
    build_riesz,
    corollary_riesz_transport,
    dual_basis,
    frame_inequality_check,
    frame_sum,
    nogo_check,
    pseudo_hermiticity_check,
    resolution_identity_check,
    riesz_from_pseudohermitian,
)

TOL = la.DEFAULT_TOL
seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_build_riesz_identity_and_diagonal():
    b = build_riesz(np.eye(3))
    np.testing.assert_array_equal(b.frame_op, np.eye(3))
    assert b.bounds == (1.0, 1.0)
    b = build_riesz(np.diag([1.0, 2.0]))
    np.testing.assert_allclose(b.frame_op, np.diag([1.0, 4.0]))
    assert b.bounds == pytest.approx((1.0, 4.0))
    # S^-1 (2 e_2) = e_2 / 2, the only choice with <phi_2, dual_2> = 1
    np.testing.assert_allclose(b.t_dual[:, 1], [0, 0.5])
    assert np.vdot(b.t[:, 1], b.t_dual[:, 1]) == pytest.approx(1.0)
    assert b.condition_number == pytest.approx(2.0)


def test_build_riesz_rejects_singular():
    with pytest.raises(Singular):
        build_riesz(np.diag([1.0, 0.0]))


def test_frame_inequality_random(rng):
    basis = build_riesz(random_invertible(10, rng, 50.0))
    rep = frame_inequality_check(basis, samples=1000, rng=rng)
    assert rep.passed
    a_bound, b_bound = basis.bounds
    # direct evaluation of sum |<phi_n, f>|^2 for fresh unit vectors
    for _ in range(200):
        f = rng.standard_normal(10) + 1j * rng.standard_normal(10)
        f /= np.linalg.norm(f)
        total = sum(abs(np.vdot(basis.t[:, n], f)) ** 2 for n in range(10))
        assert a_bound - 1e-8 <= total <= b_bound + 1e-8
        assert total == pytest.approx(frame_sum(basis, f), rel=1e-12)


def test_frame_inequality_examples(rng):
    basis = build_riesz(random_unitary(4, rng))
    for _ in range(5):
        f = rng.standard_normal(4)
        assert frame_sum(basis, f / np.linalg.norm(f)) == pytest.approx(1.0)
    assert frame_sum(build_riesz(np.diag([1.0, 2.0])), [0.0, 1.0]) == pytest.approx(4.0)
    rep = frame_inequality_check(build_riesz(random_invertible(8, rng, 20.0)), rng=rng)
    assert rep.details["extreme_gap"] <= 0.05


def test_dual_basis_examples(rng):
    b = build_riesz(np.eye(3))
    np.testing.assert_array_equal(dual_basis(b).vectors, np.eye(3))
    b = build_riesz(np.diag([1.0, 2.0]))
    np.testing.assert_allclose(dual_basis(b).vectors, np.diag([1.0, 0.5]))
    b = build_riesz(random_invertible(10, rng, 50.0))
    gram = b.vectors.conj().T @ dual_basis(b).vectors
    assert la.opnorm(gram - np.eye(10)) <= 1e-9


def test_resolution_identity_examples(rng):
    b = build_riesz(random_unitary(5, rng))
    assert resolution_identity_check(b, dual_basis(b)).worst <= 1e-14
    b = build_riesz(np.diag([1.0, 2.0]))
    assert resolution_identity_check(b, dual_basis(b)).worst == 0.0
    b = build_riesz(random_invertible(12, rng, 50.0))
    assert resolution_identity_check(b, dual_basis(b)).worst <= 1e-9


@given(seeds)
def test_dual_is_an_involution(seed):
    b = build_riesz(random_invertible(6, make_rng(seed), 20.0))
    twice = dual_basis(dual_basis(b).as_riesz())
    assert la.relative(twice.vectors - b.vectors, la.opnorm(b.vectors)) <= TOL.residual_tol


def test_biorthogonal_criterion_examples(rng):
    b = build_riesz(random_invertible(6, rng, 10.0))
    s_inv = np.linalg.inv(b.frame_op)
    rep = biorthogonal_criterion(b, s_inv)
    assert rep.x_is_inverse_frame and rep.transported_biorthogonal
    # oracle: Gram matrix of F1 against {S^-1 phi_n}
    gram = b.t.conj().T @ (s_inv.conj().T @ b.t)
    np.testing.assert_allclose(gram, np.eye(6), atol=1e-9)
    rep = biorthogonal_criterion(b, np.eye(6))
    assert not rep.x_is_inverse_frame and not rep.transported_biorthogonal
    rep = biorthogonal_criterion(b, 2 * s_inv)
    assert not rep.x_is_inverse_frame and not rep.transported_biorthogonal
    assert rep.gram_defect == pytest.approx(1.0, rel=1e-8)


@given(seeds, st.sampled_from(["inverse", "identity", "scaled", "random"]))
def test_biorthogonal_criterion_equivalence(seed, kind):
    rng = make_rng(seed)
    b = build_riesz(random_invertible(6, rng, 20.0))
    s_inv = np.linalg.inv(b.frame_op)
    x = {"inverse": s_inv, "identity": np.eye(6), "scaled": 1.5 * s_inv,
         "random": random_invertible(6, rng, 5.0)}[kind]
    assert biorthogonal_criterion(b, x).equivalent


def test_nogo_polynomial_of_s(rng):
    inst = nogo_instance(8, rng)
    rep = nogo_check(build_riesz(inst.t), inst.theta1)
    assert rep.residuals["theta2_minus_theta1"] <= 1e-9
    assert rep.details["min_overlap"] >= 1 - 1e-9
    assert rep.passed


def test_nogo_identity_frame(rng):
    u = random_unitary(5, rng)
    theta1 = (u * (rng.standard_normal(5) + 1j * rng.standard_normal(5))) @ u.conj().T
    rep = nogo_check(build_riesz(u), theta1)
    assert rep.residuals["theta2_minus_theta1"] <= 1e-12


def test_nogo_refuses_pseudobosons(rng):
    pb = make_pseudoboson(random_invertible(8, rng, 5.0))
    with pytest.raises(HypothesisViolated):
        nogo_check(pb.basis, pb.theta1)


@given(seeds)
def test_nogo_conclusion_asserted(seed):
    inst = nogo_instance(6, make_rng(seed))
    pair_theta1 = inst.theta1
    rep = nogo_check(build_riesz(inst.t), pair_theta1)
    assert rep.passed, rep.failures()


def test_pseudo_hermiticity_examples(rng):
    h = random_hermitian(4, rng)
    assert pseudo_hermiticity_check(h, np.eye(4)).residual <= 1e-15
    pb = make_pseudoboson(random_invertible(8, rng, 5.0))
    assert pseudo_hermiticity_check(pb.theta1, np.linalg.inv(pb.s)).residual <= 1e-8
    assert pseudo_hermiticity_check(np.diag([1, 1j]), np.eye(2)).residual > 0.1


def test_pseudo_hermiticity_bad_metric():
    with pytest.raises(BadMetric):
        pseudo_hermiticity_check(np.eye(2), [[1, 1], [0, 1]])
    with pytest.raises(BadMetric):
        pseudo_hermiticity_check(np.eye(2), np.diag([1.0, -1.0]))


def test_certificate_dict(rng):
    b = build_riesz(random_invertible(4, rng, 5.0))
    cert = pseudo_hermiticity_check(np.eye(4), np.linalg.inv(b.frame_op))
    doc = cert.to_dict(b)
    assert set(doc) == {"metric_residual", "frame_bounds", "condition_number"}
    assert doc["condition_number"] == pytest.approx(5.0)


@given(seeds)
def test_riesz_pair_synthesis_is_pseudo_hermitian(seed):
    rng = make_rng(seed)
    b = build_riesz(random_invertible(6, rng, 10.0))
    eps = rng.uniform(-3, 3, 6)
    m = synthesize_from_spectrum(eps, b.vectors, dual_basis(b).vectors)
    cert = pseudo_hermiticity_check(m, np.linalg.inv(b.frame_op))
    assert cert.passed


def test_riesz_from_pseudohermitian_examples(rng):
    h = random_hermitian(4, rng)
    basis, eps = riesz_from_pseudohermitian(h, np.eye(4))
    np.testing.assert_allclose(eps, np.linalg.eigvalsh(h), atol=1e-12)
    assert biorthogonality_defect(basis.vectors, basis.vectors) <= 1e-12

    t = random_invertible(3, rng, 5.0)
    theta1 = t @ np.diag([0.0, 1.0, 2.0]) @ np.linalg.inv(t)
    _, eps = riesz_from_pseudohermitian(theta1, t)
    np.testing.assert_allclose(eps, [0, 1, 2], atol=1e-10)

    pb = make_pseudoboson(random_invertible(8, rng, 5.0))
    _, eps = riesz_from_pseudohermitian(pb.theta1, la.sqrt_positive(pb.s))
    np.testing.assert_allclose(eps, np.arange(8), atol=1e-8)


def test_riesz_from_pseudohermitian_rejects(rng):
    with pytest.raises(NotPseudoHermitian):
        riesz_from_pseudohermitian(np.array([[0, 1], [0, 0]], dtype=complex), np.eye(2))


def test_corollary_transport_identity(rng):
    h = random_hermitian(4, rng)
    rep = corollary_riesz_transport(h, np.eye(4), np.eye(4))
    assert rep.passed and rep.details["theta2_equals_theta1"]


def test_corollary_transport_commuting_unitary(rng):
    v = random_unitary(5, rng)
    eps = np.array([0.0, 1.0, 2.5, 3.0, 4.0])
    theta1 = (v * eps) @ v.conj().T
    t = v * np.sqrt(np.array([0.5, 1.0, 2.0, 1.5, 3.0]))
    # unitary assembled from the spectral projectors of theta1
    phases = np.exp(1j * rng.uniform(0, 2 * np.pi, 5))
    x = sum(p * np.outer(v[:, k], v[:, k].conj()) for k, p in enumerate(phases))
    rep = corollary_riesz_transport(theta1, t, x)
    assert rep.passed, rep.failures()
    np.testing.assert_allclose(np.sort(rep.details["eigenvalues"]), eps, atol=1e-10)


def test_corollary_transport_function_of_s(rng):
    inst = nogo_instance(6, rng)
    x = np.linalg.inv(polynomial(inst.s, [1.0, 0.5]))
    rep = corollary_riesz_transport(inst.theta1, inst.t, x)
    assert rep.passed, rep.failures()
    assert rep.details["theta2_equals_theta1"]
    # x differs from S^-1, so the transported family is not the dual one
    assert not rep.details["biorthogonal"]


def test_diagonal_t_commutes_with_pseudoboson_theta(rng):
    pb = make_pseudoboson(diagonal_t(6, rng))
    s_inv2 = np.linalg.inv(pb.s @ pb.s)
    assert la.opnorm(la.commutator(pb.theta1, s_inv2)) <= 1e-10 * la.opnorm(pb.theta1) * la.opnorm(s_inv2)
