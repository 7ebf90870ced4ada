"""Truncated ladder models: the harmonic oscillator, quons and pseudo-bosons.

Ladder matrices are the exact action of the infinite operators restricted to
the first ``d`` levels (``a e_n = sqrt(n) e_{n-1}``); nothing is
renormalized, so identities such as ``[a, a^dagger] = 1`` fail in the last
row and column. Checks therefore look only at the leading ``d - guard``
block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import linalg as la
from .errors import QOutOfRange
from .intertwine import (
    BETA_PINV,
    EigenFamily,
    build_partners,
    canonical_family,
    map_eigenfamily,
)
from .linalg import DEFAULT_TOL, Tolerances
from .reporting import CheckReport
from .riesz import RieszBasis, build_riesz, pseudo_hermiticity_check

MIN_DIM = 3
# 1/sqrt(n!) underflows the useful double range soon after this
MAX_PSEUDOBOSON_DIM = 34

RAISE = "raise"
LOWER = "lower"


def _check_dim(d):
    if isinstance(d, bool) or int(d) != d or d < MIN_DIM:
        raise ValueError(f"dimension must be an integer >= {MIN_DIM}, got {d!r}")
    return int(d)


def lowering_matrix(weights) -> np.ndarray:
    """Matrix sending e_n to ``weights[n-1] * e_{n-1}`` (and e_0 to zero)."""
    w = np.asarray(weights, dtype=float)
    return np.diag(w.astype(complex), k=1)


@dataclass(frozen=True)
class LadderSystem:
    dim: int
    lower: np.ndarray
    raise_: np.ndarray
    h1: np.ndarray
    q: float = 1.0

    @property
    def eps(self) -> np.ndarray:
        return np.real(np.diag(self.h1)).copy()

    def family(self) -> EigenFamily:
        """Eigenvectors of h1: the standard basis with eigenvalues eps_n."""
        return canonical_family(self.eps)

    def matrices(self) -> dict:
        return {"lower": self.lower, "raise": self.raise_, "h1": self.h1}


@dataclass(frozen=True)
class QuonSystem(LadderSystem):
    beta: np.ndarray = None

    @property
    def b(self) -> np.ndarray:
        return self.lower


def make_oscillator(d: int) -> LadderSystem:
    d = _check_dim(d)
    a = lowering_matrix(np.sqrt(np.arange(1, d)))
    return LadderSystem(dim=d, lower=a, raise_=a.conj().T, h1=a.conj().T @ a, q=1.0)


def quon_beta(d: int, q: float) -> np.ndarray:
    """``beta_n = sqrt(1 + q + ... + q^n)`` for n = 0..d-1, as a running sum."""
    powers = np.cumprod(np.concatenate([[1.0], np.full(d - 1, float(q))]))
    return np.sqrt(np.cumsum(powers))


def make_quon(d: int, q: float) -> QuonSystem:
    d = _check_dim(d)
    if not (0.0 <= q <= 1.0):
        raise QOutOfRange(f"q must lie in [0, 1], got {q!r}")
    beta = quon_beta(d, q)
    b = lowering_matrix(beta[:-1])
    return QuonSystem(dim=d, lower=b, raise_=b.conj().T, h1=b.conj().T @ b, q=float(q), beta=beta)


def ladder_partner_expectations(sys: LadderSystem, direction: str, tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """Compare the constructed partner of h1 with its closed form.

    ``raise`` (x = raising operator): theta2 = q h1 + 1 on the guard block,
    with N2 = 1 + q h1 invertible there. ``lower`` (x = lowering operator):
    N2 = h1 is singular, the pseudo-inverse path must be taken, and
    theta2 = (h1 - 1)/q on the guard-banded part of span(F2). The
    oscillator is the case q = 1.
    """
    k = tol.block(sys.dim)
    eye = np.eye(sys.dim)
    fam1 = sys.family()
    if direction == RAISE:
        pair = build_partners(sys.h1, sys.raise_, tol)
        expected = sys.q * sys.h1 + eye
        n2_block = pair.n2[:k, :k]
        res = {
            "theta2_closed_form": la.relative((pair.theta2 - expected)[:k, :k], la.opnorm(expected[:k, :k])),
            "n2_identity": la.relative((pair.n2 - expected)[:k, :k], la.opnorm(expected[:k, :k])),
            "n2_block_singular": 0.0 if la.is_invertible(n2_block, tol) else 1.0,
        }
        fam2 = map_eigenfamily(sys.raise_, fam1, tol)
    elif direction == LOWER:
        if sys.q <= tol.rank_tol:
            raise QOutOfRange("the lower direction needs q > rank_tol: (h1 - 1)/q diverges")
        pair = build_partners(sys.h1, sys.lower, tol)
        fam2 = map_eigenfamily(sys.lower, fam1, tol)
        expected = (sys.h1 - eye) / sys.q
        inside = np.linalg.norm(fam2.vectors[k:, :], axis=0) <= tol.rank_tol * fam2.norms()
        q_basis = la.range_basis(fam2.vectors[:, inside], tol)
        restrict = lambda m: q_basis.conj().T @ m @ q_basis  # noqa: E731
        res = {
            "theta2_closed_form": la.relative(restrict(pair.theta2 - expected), la.opnorm(restrict(expected))),
            "n2_invertible": 1.0 if la.is_invertible(pair.n2, tol) else 0.0,
            "pseudo_inverse_not_used": 0.0 if pair.mode == BETA_PINV else 1.0,
        }
    else:
        raise ValueError(f"direction must be {RAISE!r} or {LOWER!r}, got {direction!r}")
    return CheckReport(
        name=f"ladder_{direction}",
        residuals=res,
        threshold=tol.residual_tol,
        details={"mode": pair.mode, "pair": pair, "fam2": fam2},
    )


def quon_partner_expectations(sys: QuonSystem, direction: str, tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    return ladder_partner_expectations(sys, direction, tol)


def ladder_invariants(sys: LadderSystem, tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """``B B^dagger - q B^dagger B = 1`` on the leading block, h1 spectrum and vacuum."""
    k = sys.dim - 1
    b, bd = sys.lower, sys.raise_
    qcomm = b @ bd - sys.q * bd @ b - np.eye(sys.dim)
    beta2 = np.concatenate([[0.0], np.cumsum(sys.q ** np.arange(sys.dim - 1))])
    ker = la.kernel_basis(b, tol)
    vacuum = 1.0
    if len(ker) == 1:
        vacuum = 1.0 - abs(ker[0][0])
    return CheckReport(
        name="ladder_invariants",
        residuals={
            "q_commutator": la.opnorm(qcomm[:k, :k]),
            "h1_spectrum": float(np.max(np.abs(np.linalg.eigvalsh(sys.h1) - np.sort(beta2)))),
            "vacuum_kernel": vacuum,
        },
        threshold=tol.residual_tol,
    )


# -- pseudo-bosons ---------------------------------------------------------

@dataclass(frozen=True)
class PseudoBosonSystem:
    basis: RieszBasis
    s: np.ndarray
    lower_a: np.ndarray
    raise_b: np.ndarray
    theta1: np.ndarray
    theta2: np.ndarray
    f1: EigenFamily
    f2: EigenFamily

    @property
    def dim(self) -> int:
        return self.s.shape[0]

    @property
    def t(self) -> np.ndarray:
        return self.basis.t

    def matrices(self) -> dict:
        return {"t": self.t, "s": self.s, "a": self.lower_a, "b": self.raise_b,
                "theta1": self.theta1, "theta2": self.theta2}


def make_pseudoboson(t, tol: Tolerances = DEFAULT_TOL) -> PseudoBosonSystem:
    """Pseudo-bosons built from the Riesz basis ``{t e_n}``.

    With S the frame operator, ``S^{-1/2} t e_n`` is orthonormal; A lowers
    along that basis, and ``a = S^{1/2} A S^{-1/2}``,
    ``b = S^{1/2} A^dagger S^{-1/2}`` satisfy ``[a, b] = 1`` without
    ``a = b^dagger``. theta1 = b a and theta2 = theta1^dagger.
    """
    t = la.as_matrix(t)
    d = _check_dim(t.shape[0])
    if d > MAX_PSEUDOBOSON_DIM:
        raise ValueError(f"pseudo-boson dimension capped at {MAX_PSEUDOBOSON_DIM}")
    basis = build_riesz(t, tol)
    s = basis.frame_op
    s_half = la.sqrt_positive(s, tol)
    s_mhalf = la.inverse(s_half, tol)
    hat = s_mhalf @ t
    a0 = lowering_matrix(np.sqrt(np.arange(1, d)))
    big_a = hat @ a0 @ hat.conj().T
    a = s_half @ big_a @ s_mhalf
    b = s_half @ big_a.conj().T @ s_mhalf
    theta1 = b @ a
    theta2 = a.conj().T @ b.conj().T

    ns = np.arange(d, dtype=float)
    phi1 = np.empty((d, d), dtype=complex)
    phi2 = np.empty((d, d), dtype=complex)
    phi1[:, 0] = t[:, 0]
    phi2[:, 0] = np.linalg.solve(s, t[:, 0])
    ad = a.conj().T
    for n in range(1, d):
        # b^n phi_0 / sqrt(n!) built one factor at a time
        phi1[:, n] = b @ phi1[:, n - 1] / math.sqrt(n)
        phi2[:, n] = ad @ phi2[:, n - 1] / math.sqrt(n)
    idx = tuple(range(d))
    return PseudoBosonSystem(
        basis=basis,
        s=s,
        lower_a=a,
        raise_b=b,
        theta1=theta1,
        theta2=theta2,
        f1=EigenFamily(indices=idx, vectors=phi1, eigenvalues=ns),
        f2=EigenFamily(indices=idx, vectors=phi2, eigenvalues=ns),
    )


def pseudoboson_verify(sys: PseudoBosonSystem, tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    d = sys.dim
    k = tol.block(d)
    a, b, s = sys.lower_a, sys.raise_b, sys.s
    th1, th2 = sys.theta1, sys.theta2
    phi1, phi2 = sys.f1.vectors, sys.f2.vectors
    n_th1 = la.opnorm(th1)
    s_inv = la.inverse(s, tol)

    # [a, b] = 1 only on span{phi_0..phi_{k-1}}; the top level sees the truncation
    comm = (a @ b - b @ a - np.eye(d)) @ phi1[:, :k]
    sq = np.sqrt(np.arange(d))
    lower_res = a @ phi1[:, 1:] - phi1[:, :-1] * sq[1:]
    raise_res = b @ phi1[:, :-1] - phi1[:, 1:] * sq[1:]
    col = lambda m: np.linalg.norm(m, axis=0)  # noqa: E731
    eps = sys.f1.eigenvalues
    res = {
        "ab_commutator": la.opnorm(comm) / la.opnorm(phi1[:, :k]),
        "theta2_is_theta1_adjoint": la.relative(th2 - th1.conj().T, n_th1),
        "theta1_s_intertwine": la.relative(th1 @ s - s @ th2, n_th1 * la.opnorm(s)),
        "pseudo_hermiticity": pseudo_hermiticity_check(th1, s_inv, tol).residual,
        "biorthogonality": la.opnorm(phi1.conj().T @ phi2 - np.eye(d)),
        "lowering_action": float(np.max(col(lower_res) / (la.opnorm(a) * col(phi1[:, 1:])))),
        "raising_action": float(np.max(col(raise_res) / (la.opnorm(b) * col(phi1[:, :-1])))),
        "theta1_eigen": float(np.max(col(th1 @ phi1 - phi1 * eps) / (n_th1 * col(phi1)))),
        "theta2_eigen": float(np.max(col(th2 @ phi2 - phi2 * eps) / (la.opnorm(th2) * col(phi2)))),
        "f2_is_sinv_f1": la.relative(phi2 - s_inv @ phi1, la.opnorm(phi2)),
    }
    return CheckReport(name="pseudoboson", residuals=res, threshold=tol.residual_tol)
