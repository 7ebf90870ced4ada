"""Riesz bases, frame operators, dual bases and pseudo-hermiticity.

At finite dimension a Riesz basis is the set of columns of an invertible
matrix ``T``; its frame operator is ``S = T T^dagger`` and the frame
bounds are the extreme eigenvalues of ``S``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import linalg as la
from .errors import (
    BadMetric,
    CommutatorTooLarge,
    HypothesisViolated,
    NotPseudoHermitian,
    SimilarFormNotHermitian,
)
from .intertwine import build_partners
from .linalg import DEFAULT_TOL, Tolerances
from .reporting import CheckReport


@dataclass(frozen=True)
class RieszBasis:
    t: np.ndarray
    frame_op: np.ndarray
    bounds: tuple
    t_dual: np.ndarray
    condition_number: float

    @property
    def vectors(self) -> np.ndarray:
        """Basis vectors ``T e_n`` as columns."""
        return self.t

    @property
    def dim(self) -> int:
        return self.t.shape[0]

    def vector(self, n: int) -> np.ndarray:
        return self.t[:, n]

    def frame_inverse(self, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
        return la.inverse(self.frame_op, tol)

    def dual(self, tol: Tolerances = DEFAULT_TOL) -> "DualBasis":
        return dual_basis(self, tol)


@dataclass(frozen=True)
class DualBasis:
    vectors: np.ndarray  # S^{-1} phi_n as columns
    t_dual: np.ndarray

    def as_riesz(self, tol: Tolerances = DEFAULT_TOL) -> RieszBasis:
        """The dual family is itself a Riesz basis, generated by ``S^{-1} T``."""
        return build_riesz(self.t_dual, tol)


def build_riesz(t, tol: Tolerances = DEFAULT_TOL) -> RieszBasis:
    t = la.as_matrix(t)
    la.inverse(t, tol)
    s = t @ t.conj().T
    s = (s + s.conj().T) / 2
    w = la.eig_hermitian(s, tol).eigenvalues
    sv = np.linalg.svd(t, compute_uv=False)
    return RieszBasis(
        t=t,
        frame_op=s,
        bounds=(float(w[0]), float(w[-1])),
        t_dual=np.linalg.solve(s, t),
        condition_number=float(sv[0] / sv[-1]),
    )


def frame_sum(basis: RieszBasis, f) -> float:
    """``sum_n |<phi_n, f>|^2`` evaluated coefficient by coefficient."""
    coeffs = basis.vectors.conj().T @ la.as_vector(f)
    return float(np.sum(np.abs(coeffs) ** 2))


def frame_inequality_check(basis: RieszBasis, samples: int = 1000, tol: Tolerances = DEFAULT_TOL,
                           rng: Optional[np.random.Generator] = None) -> CheckReport:
    """Probe ``A ||f||^2 <= sum |<phi_n, f>|^2 <= B ||f||^2`` with random unit vectors.

    Eigenvectors of S are added as probes; they attain the bounds, so
    ``extreme_gap`` measures how closely the probes reach A and B.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    d = basis.dim
    a_bound, b_bound = basis.bounds
    slack = tol.residual_tol * b_bound
    probes = rng.standard_normal((d, samples)) + 1j * rng.standard_normal((d, samples))
    probes /= np.linalg.norm(probes, axis=0)
    eigvecs = la.eig_hermitian(basis.frame_op, tol).eigenvectors
    probes = np.concatenate([probes, eigvecs], axis=1)

    sums = np.sum(np.abs(basis.vectors.conj().T @ probes) ** 2, axis=0)
    quad = np.real(np.einsum("ij,ij->j", probes.conj(), basis.frame_op @ probes))
    below = float(np.max(np.clip(a_bound - slack - sums, 0, None)))
    above = float(np.max(np.clip(sums - b_bound - slack, 0, None)))
    extreme_gap = max(abs(sums.min() - a_bound), abs(sums.max() - b_bound)) / b_bound
    return CheckReport(
        name="frame_inequality",
        residuals={
            "lower_bound_violation": below,
            "upper_bound_violation": above,
            "sum_vs_quadratic_form": float(np.max(np.abs(sums - quad))) / b_bound,
        },
        threshold=tol.residual_tol,
        details={
            "min_sum": float(sums.min()),
            "max_sum": float(sums.max()),
            "extreme_gap": float(extreme_gap),
            "random_min": float(sums[:samples].min()) if samples else None,
            "random_max": float(sums[:samples].max()) if samples else None,
        },
    )


def dual_basis(basis: RieszBasis, tol: Tolerances = DEFAULT_TOL) -> DualBasis:
    vectors = np.linalg.solve(basis.frame_op, basis.vectors)
    return DualBasis(vectors=vectors, t_dual=basis.t_dual)


def biorthogonality_defect(vectors, duals) -> float:
    gram = np.asarray(vectors).conj().T @ np.asarray(duals)
    return la.opnorm(gram - np.eye(gram.shape[0]))


def resolution_identity_check(basis: RieszBasis, dual: DualBasis, tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """Residuals of ``sum |dual_n><phi_n| = 1`` and ``sum |phi_n><dual_n| = 1``."""
    phi, dual_v = basis.vectors, dual.vectors
    eye = np.eye(basis.dim)
    return CheckReport(
        name="resolution_identity",
        residuals={
            "dual_phi": la.opnorm(dual_v @ phi.conj().T - eye),
            "phi_dual": la.opnorm(phi @ dual_v.conj().T - eye),
            "biorthogonality": biorthogonality_defect(phi, dual_v),
        },
        threshold=tol.residual_tol,
    )


@dataclass(frozen=True)
class BiorthogonalReport:
    x_is_inverse_frame: bool
    transported_biorthogonal: bool
    x_distance: float
    gram_defect: float

    @property
    def equivalent(self) -> bool:
        return self.x_is_inverse_frame == self.transported_biorthogonal


def biorthogonal_criterion(basis: RieszBasis, x, tol: Tolerances = DEFAULT_TOL) -> BiorthogonalReport:
    """Compare (a) ``x == S^{-1}`` with (b) ``{x^dagger phi_n}`` being a biorthogonal Riesz basis."""
    x = la.as_matrix(x)
    s_inv = basis.frame_inverse(tol)
    dist = la.relative(x - s_inv, la.opnorm(s_inv))
    generator = x.conj().T @ basis.t
    gram_defect = biorthogonality_defect(basis.vectors, generator)
    riesz = la.is_invertible(generator, tol)
    return BiorthogonalReport(
        x_is_inverse_frame=dist <= tol.residual_tol,
        transported_biorthogonal=riesz and gram_defect <= tol.residual_tol,
        x_distance=dist,
        gram_defect=gram_defect,
    )


def _eigen_defects(theta, vectors):
    """Per-column ``||theta v - (v^dagger theta v / v^dagger v) v|| / (||theta|| ||v||)``."""
    tv = theta @ vectors
    norms = np.linalg.norm(vectors, axis=0)
    rayleigh = np.einsum("ij,ij->j", vectors.conj(), tv) / norms**2
    scale = max(la.opnorm(theta), 1e-300)
    return np.linalg.norm(tv - vectors * rayleigh, axis=0) / (scale * norms), rayleigh


def nogo_check(basis: RieszBasis, theta1, tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """When F1 is an eigen-Riesz basis of theta1 and ``[theta1, S^{-2}] = 0``, the partner is trivial.

    Builds the partner with ``x = S^{-1}`` and reports ``[theta1, S^{-1}]``,
    ``theta2 - theta1`` and how far each ``x^dagger phi_n`` is from being
    parallel to ``phi_n``. Raises :class:`HypothesisViolated` if the
    commutation hypothesis fails or the basis vectors are not eigenvectors.
    """
    theta1 = la.as_matrix(theta1)
    s_inv = basis.frame_inverse(tol)
    n1 = s_inv @ s_inv
    hyp = la.relative(la.commutator(theta1, n1), la.opnorm(theta1) * la.opnorm(n1))
    if hyp > tol.commute_tol:
        raise HypothesisViolated(f"[theta1, S^-2] relative norm {hyp:.3g} exceeds {tol.commute_tol:g}")
    eig_def, _ = _eigen_defects(theta1, basis.vectors)
    if eig_def.max() > tol.residual_tol:
        raise HypothesisViolated(f"basis vectors are not eigenvectors of theta1 (defect {eig_def.max():.3g})")
    try:
        pair = build_partners(theta1, s_inv, tol)
    except CommutatorTooLarge as exc:
        raise HypothesisViolated(str(exc)) from exc
    phi1 = basis.vectors / np.linalg.norm(basis.vectors, axis=0)
    phi2 = s_inv.conj().T @ basis.vectors
    phi2 = phi2 / np.linalg.norm(phi2, axis=0)
    overlaps = np.abs(np.einsum("ij,ij->j", phi2.conj(), phi1))
    scale = la.opnorm(theta1)
    return CheckReport(
        name="nogo",
        residuals={
            "commutator_theta1_sinv": la.relative(la.commutator(theta1, s_inv), scale * la.opnorm(s_inv)),
            "theta2_minus_theta1": la.relative(pair.theta2 - theta1, scale),
            "parallel_defect": float(np.max(1.0 - overlaps)),
        },
        threshold=tol.residual_tol,
        details={"hypothesis_defect": hyp, "min_overlap": float(overlaps.min()), "mode": pair.mode},
    )


@dataclass(frozen=True)
class PseudoHermitianCert:
    metric: np.ndarray
    residual: float
    similar_form: np.ndarray
    threshold: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.threshold

    def to_dict(self, basis: Optional[RieszBasis] = None) -> dict:
        out = {"metric_residual": self.residual}
        if basis is not None:
            out["frame_bounds"] = [basis.bounds[0], basis.bounds[1]]
            out["condition_number"] = basis.condition_number
        return out


def pseudo_hermiticity_check(theta, metric, tol: Tolerances = DEFAULT_TOL, t=None) -> PseudoHermitianCert:
    """Residual ``||M theta - theta^dagger M|| / (||M|| ||theta||)``.

    ``similar_form`` is ``T^{-1} theta T`` for any ``T`` with
    ``T T^dagger = M^{-1}``; ``M^{-1/2}`` is used when ``t`` is not given.
    """
    theta = la.as_matrix(theta)
    m = la.as_matrix(metric)
    if la.hermiticity_defect(m) > tol.commute_tol:
        raise BadMetric("metric is not Hermitian")
    w = np.linalg.eigvalsh((m + m.conj().T) / 2)
    if w[-1] <= 0 or w[0] <= tol.rank_tol * w[-1]:
        raise BadMetric("metric is not positive definite")
    resid = la.relative(m @ theta - theta.conj().T @ m, la.opnorm(m) * la.opnorm(theta))
    if t is None:
        t = la.sqrt_positive(la.inverse(m, tol), tol)
    t = la.as_matrix(t)
    similar = np.linalg.solve(t, theta @ t)
    return PseudoHermitianCert(metric=m, residual=resid, similar_form=similar, threshold=tol.residual_tol)


def riesz_from_pseudohermitian(theta1, t, tol: Tolerances = DEFAULT_TOL) -> tuple:
    """Real spectrum and Riesz eigenbasis of a ``(T T^dagger)^{-1}``-pseudo-hermitian operator.

    Returns ``(basis, eigenvalues)`` where ``basis`` is generated by
    ``T U`` with U the orthonormal eigenbasis of ``T^{-1} theta1 T``.
    """
    theta1 = la.as_matrix(theta1)
    t = la.as_matrix(t)
    metric = la.inverse(t @ t.conj().T, tol)
    metric = (metric + metric.conj().T) / 2
    cert = pseudo_hermiticity_check(theta1, metric, tol, t=t)
    if not cert.passed:
        raise NotPseudoHermitian(f"pseudo-hermiticity residual {cert.residual:.3g}")
    similar = cert.similar_form
    if la.hermiticity_defect(similar) > tol.residual_tol:
        raise SimilarFormNotHermitian(f"hermiticity defect {la.hermiticity_defect(similar):.3g}")
    es = la.eig_hermitian(similar, tol)
    basis = build_riesz(t @ es.eigenvectors, tol)
    return basis, es.eigenvalues


def eigen_residual(theta, vectors, eigenvalues) -> float:
    """Largest ``||theta v - eps v|| / (||theta|| ||v||)`` over the columns."""
    theta = la.as_matrix(theta)
    v = np.asarray(vectors, dtype=complex)
    r = np.linalg.norm(theta @ v - v * np.asarray(eigenvalues), axis=0)
    return float(np.max(r / (max(la.opnorm(theta), 1e-300) * np.linalg.norm(v, axis=0))))


def corollary_riesz_transport(theta1, t, x, tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """Transporting a pseudo-hermitian operator by an invertible commuting x keeps a real Riesz eigenbasis."""
    theta1 = la.as_matrix(theta1)
    x = la.as_matrix(x)
    la.inverse(x, tol)
    basis1, eps = riesz_from_pseudohermitian(theta1, t, tol)
    pair = build_partners(theta1, x, tol)
    gen2 = x.conj().T @ basis1.t
    basis2 = build_riesz(gen2, tol)
    spectrum2 = np.linalg.eigvals(pair.theta2)
    return CheckReport(
        name="riesz_transport",
        residuals={
            "theta1_eigen": eigen_residual(theta1, basis1.vectors, eps),
            "theta2_eigen": eigen_residual(pair.theta2, basis2.vectors, eps),
            "theta2_imag_spectrum": float(np.max(np.abs(spectrum2.imag))) / max(la.opnorm(pair.theta2), 1e-300),
        },
        threshold=tol.residual_tol,
        details={
            "eigenvalues": eps,
            "mode": pair.mode,
            "theta2_equals_theta1": la.relative(pair.theta2 - theta1, la.opnorm(theta1)) <= tol.residual_tol,
            "basis2_condition_number": basis2.condition_number,
            "biorthogonal": biorthogonality_defect(basis1.vectors, basis2.vectors) <= tol.residual_tol,
        },
    )
