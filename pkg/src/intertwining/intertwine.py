"""Partner construction and eigenfamily transport.

Given an operator ``theta1`` and an intertwiner ``x`` with
``[x x^dagger, theta1] = 0``, build the partner ``theta2`` so that
``x theta2 = theta1 x``; the vectors ``x^dagger phi`` then carry the
eigenvalues of ``theta1`` over to ``theta2``.  The remaining functions
are numerical certificates of the properties that construction is
supposed to have.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import linalg as la
from .errors import (
    BiorthogonalityViolated,
    CommutatorTooLarge,
    DegenerateNu,
    DimensionMismatch,
    SingularN2,
    ZeroVector,
)
from .linalg import DEFAULT_TOL, Tolerances
from .reporting import CheckReport

ALPHA = "alpha"
BETA = "beta"
BETA_PINV = "beta_pseudoinverse"
MODES = (ALPHA, BETA, BETA_PINV)


@dataclass(frozen=True)
class EigenFamily:
    """Indexed eigenvectors (stored as columns) with their eigenvalues.

    ``nu`` holds the N-eigenvalues when known, ``multiplicity`` the
    multiplicity of each ``nu`` value, and ``dropped`` the indices that
    were lost when the family was transported (the set I1 minus I2).
    """

    indices: tuple
    vectors: np.ndarray
    eigenvalues: np.ndarray
    nu: Optional[np.ndarray] = None
    multiplicity: Optional[tuple] = None
    dropped: tuple = ()

    def __post_init__(self):
        idx = tuple(int(i) for i in self.indices)
        vecs = np.asarray(self.vectors, dtype=complex)
        if vecs.ndim != 2:
            raise DimensionMismatch("vectors must be a 2-D array of columns")
        ev = np.asarray(self.eigenvalues, dtype=complex).reshape(-1)
        if not (len(idx) == vecs.shape[1] == ev.size):
            raise DimensionMismatch(
                f"{len(idx)} indices, {vecs.shape[1]} vectors, {ev.size} eigenvalues"
            )
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("indices must be strictly increasing")
        if idx and np.any(np.linalg.norm(vecs, axis=0) == 0):
            raise ValueError("family vectors must be nonzero")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "vectors", vecs)
        object.__setattr__(self, "eigenvalues", ev)
        object.__setattr__(self, "dropped", tuple(int(i) for i in self.dropped))
        if self.nu is not None:
            nu = np.asarray(self.nu, dtype=float).reshape(-1)
            if nu.size != len(idx):
                raise DimensionMismatch("one nu value per index is required")
            if np.any(nu < 0):
                raise ValueError("nu values must be non-negative")
            object.__setattr__(self, "nu", nu)
        if self.multiplicity is not None:
            object.__setattr__(self, "multiplicity", tuple(int(m) for m in self.multiplicity))

    def __len__(self):
        return len(self.indices)

    @property
    def dim(self) -> int:
        return self.vectors.shape[0]

    def position(self, n: int) -> int:
        return self.indices.index(n)

    def vector(self, n: int) -> np.ndarray:
        return self.vectors[:, self.position(n)]

    def eigenvalue(self, n: int) -> complex:
        return self.eigenvalues[self.position(n)]

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.vectors, axis=0)

    def normalized(self) -> "EigenFamily":
        return replace(self, vectors=self.vectors / self.norms())

    def restrict(self, keep: Sequence[int]) -> "EigenFamily":
        pos = [self.position(n) for n in keep]
        return EigenFamily(
            indices=tuple(keep),
            vectors=self.vectors[:, pos],
            eigenvalues=self.eigenvalues[pos],
            nu=None if self.nu is None else self.nu[pos],
            multiplicity=None if self.multiplicity is None else tuple(self.multiplicity[p] for p in pos),
        )


def canonical_family(eigenvalues) -> EigenFamily:
    """Standard basis e_0, e_1, ... labelled with the given eigenvalues."""
    ev = np.asarray(eigenvalues, dtype=complex)
    return EigenFamily(indices=tuple(range(ev.size)), vectors=np.eye(ev.size), eigenvalues=ev)


def eigenfamily(theta, tol: Tolerances = DEFAULT_TOL) -> EigenFamily:
    """Eigenfamily of a diagonalizable matrix, ordered by (real, imag) of the eigenvalue."""
    es = la.eig_general(theta, tol)
    order = np.lexsort((es.eigenvalues.imag, es.eigenvalues.real))
    return EigenFamily(
        indices=tuple(range(order.size)),
        vectors=es.eigenvectors[:, order],
        eigenvalues=es.eigenvalues[order],
    )


@dataclass(frozen=True)
class IntertwinePair:
    theta1: np.ndarray
    x: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    theta2: np.ndarray
    mode: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.theta1.shape[0]

    @property
    def pseudo_inverse_used(self) -> bool:
        return self.mode == BETA_PINV


def _commutator_defect(a, b) -> float:
    return la.relative(la.commutator(a, b), la.opnorm(a) * la.opnorm(b))


def theta2_alpha(theta1, x, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """``x^{-1} theta1 x``; raises :class:`~intertwining.errors.Singular` for singular x."""
    x = la.as_matrix(x)
    la.inverse(x, tol)  # rank check only
    return np.linalg.solve(x, la.as_matrix(theta1) @ x)


def theta2_beta(theta1, x, tol: Tolerances = DEFAULT_TOL) -> tuple:
    """``N2^{-1} (x^dagger theta1 x)``, falling back to the pseudo-inverse of N2.

    Returns ``(theta2, used_pseudo_inverse)``.
    """
    x = la.as_matrix(x)
    n2 = x.conj().T @ x
    sandwich = x.conj().T @ la.as_matrix(theta1) @ x
    if la.is_invertible(n2, tol):
        return np.linalg.solve(n2, sandwich), False
    return la.pseudo_inverse(n2, tol) @ sandwich, True


def build_partners(
    theta1,
    x,
    tol: Tolerances = DEFAULT_TOL,
    *,
    allow_noncommuting: bool = False,
    mode: Optional[str] = None,
) -> IntertwinePair:
    """Construct the partner of ``theta1`` through the intertwiner ``x``.

    With ``mode=None`` the alpha form ``x^{-1} theta1 x`` is used whenever
    x is invertible, otherwise the beta form with N2 inverted (or
    pseudo-inverted, flagged as ``beta_pseudoinverse``). Passing
    ``mode="beta"`` forces the beta form even for invertible x.

    The commutation hypothesis ``[x x^dagger, theta1] = 0`` is checked
    against ``commute_tol``; ``allow_noncommuting`` turns the error into a
    recorded diagnostic.
    """
    theta1 = la.as_matrix(theta1)
    x = la.as_matrix(x)
    if theta1.shape != x.shape:
        raise DimensionMismatch(f"theta1 is {theta1.shape} but x is {x.shape}")
    if mode not in (None, ALPHA, BETA):
        raise ValueError(f"mode must be None, {ALPHA!r} or {BETA!r}")

    n1 = x @ x.conj().T
    n2 = x.conj().T @ x
    defect = _commutator_defect(n1, theta1)
    if defect > tol.commute_tol and not allow_noncommuting:
        raise CommutatorTooLarge(
            f"relative ||[x x^dagger, theta1]|| = {defect:.3g} exceeds commute_tol {tol.commute_tol:g}",
            defect,
        )

    if mode == ALPHA or (mode is None and la.is_invertible(x, tol)):
        theta2 = theta2_alpha(theta1, x, tol)
        chosen = ALPHA
    else:
        theta2, pinv = theta2_beta(theta1, x, tol)
        chosen = BETA_PINV if pinv else BETA

    pair = IntertwinePair(theta1=theta1, x=x, n1=n1, n2=n2, theta2=theta2, mode=chosen)
    diagnostics = {"commutator_n1_theta1": defect}
    diagnostics.update(verify_intertwining(pair, tol).residuals)
    diagnostics["hermiticity_theta1"] = la.hermiticity_defect(theta1)
    diagnostics["hermiticity_theta2"] = la.hermiticity_defect(theta2)
    diagnostics["pseudo_inverse_used"] = chosen == BETA_PINV
    return replace(pair, diagnostics=diagnostics)


# -- eigenfamily transport -------------------------------------------------

def nu_values(x, fam1: EigenFamily) -> np.ndarray:
    """``||x^dagger phi_n||^2 / ||phi_n||^2`` for every member of the family."""
    xd = la.adjoint(x)
    return np.linalg.norm(xd @ fam1.vectors, axis=0) ** 2 / fam1.norms() ** 2


def multiplicities(values, tol: Tolerances = DEFAULT_TOL) -> tuple:
    """How many entries of ``values`` share each entry's value (relative rank_tol clustering)."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return ()
    groups = la.cluster_values(values, tol.rank_tol * max(float(np.max(np.abs(values))), 1e-300))
    out = [0] * values.size
    for g in groups:
        for i in g:
            out[i] = len(g)
    return tuple(out)


def with_nu(x, fam1: EigenFamily, tol: Tolerances = DEFAULT_TOL) -> EigenFamily:
    """Attach N1-eigenvalues and their multiplicities to ``fam1``."""
    nu = nu_values(x, fam1)
    return replace(fam1, nu=nu, multiplicity=multiplicities(nu, tol))


def _transport_mask(x, fam1, tol):
    xd = la.adjoint(x)
    images = xd @ fam1.vectors
    keep = np.linalg.norm(images, axis=0) > tol.rank_tol * la.opnorm(xd) * fam1.norms()
    return images, keep


def map_eigenfamily(x, fam1: EigenFamily, tol: Tolerances = DEFAULT_TOL) -> EigenFamily:
    """Transport ``fam1`` through ``x^dagger``.

    Members whose image is numerically zero are dropped and listed in
    ``dropped``; survivors keep their eigenvalue and carry
    ``nu = ||x^dagger phi||^2 / ||phi||^2``.
    """
    images, keep = _transport_mask(x, fam1, tol)
    nu = nu_values(x, fam1)
    mult = multiplicities(nu, tol)
    idx = [n for n, k in zip(fam1.indices, keep) if k]
    return EigenFamily(
        indices=tuple(idx),
        vectors=images[:, keep],
        eigenvalues=fam1.eigenvalues[keep],
        nu=nu[keep],
        multiplicity=tuple(m for m, k in zip(mult, keep) if k),
        dropped=tuple(n for n, k in zip(fam1.indices, keep) if not k),
    )


def recover_family1(x, fam2: EigenFamily, tol: Tolerances = DEFAULT_TOL) -> EigenFamily:
    """Invert the transport: ``phi1 = x phi2 / ||phi2||^2``.

    Exact for normalized ``phi1``. Raises :class:`ZeroVector` if x kills a
    transported vector, which the construction rules out.
    """
    if len(fam2) == 0:
        raise ValueError("cannot recover from an empty family")
    x = la.as_matrix(x)
    images = x @ fam2.vectors
    norms2 = fam2.norms()
    zero = np.linalg.norm(images, axis=0) <= tol.rank_tol * la.opnorm(x) * norms2
    if np.any(zero):
        bad = [n for n, z in zip(fam2.indices, zero) if z]
        raise ZeroVector(f"x maps transported vectors {bad} to zero")
    return EigenFamily(
        indices=fam2.indices,
        vectors=images / norms2**2,
        eigenvalues=fam2.eigenvalues,
    )


@dataclass(frozen=True)
class KernelReport:
    ker_xdag: tuple
    ker_n1: tuple
    ker_x_phi2: tuple

    @property
    def consistent(self) -> bool:
        return self.ker_xdag == self.ker_n1 == self.ker_x_phi2


def kernel_equivalence_check(x, fam1: EigenFamily, tol: Tolerances = DEFAULT_TOL) -> KernelReport:
    """Index sets of phi with x^dagger phi = 0, N1 phi = 0 and x x^dagger phi = 0.

    The three tests use independent routes (N1 is formed explicitly) and
    each is relative to the norm of the operator applied.
    """
    x = la.as_matrix(x)
    xd = x.conj().T
    n1 = x @ xd
    norms = fam1.norms()
    nx = la.opnorm(x)
    v = fam1.vectors

    def zero_set(images, scale):
        small = np.linalg.norm(images, axis=0) <= tol.rank_tol * scale * norms
        return tuple(n for n, s in zip(fam1.indices, small) if s)

    phi2 = xd @ v
    return KernelReport(
        ker_xdag=zero_set(phi2, nx),
        ker_n1=zero_set(n1 @ v, la.opnorm(n1)),
        ker_x_phi2=zero_set(x @ phi2, nx * nx),
    )


# -- verification ----------------------------------------------------------

def _blk(m, block):
    return m if block is None else m[:block, :block]


def verify_intertwining(pair: IntertwinePair, tol: Tolerances = DEFAULT_TOL, block=None) -> CheckReport:
    """Relative residuals of ``x theta2 = theta1 x`` and ``theta2 x^dagger = x^dagger theta1``.

    In pseudo-inverse mode both residuals are projected onto the closure of
    range(x^dagger) first; ``block`` restricts them to the leading block.
    """
    x, t1, t2 = pair.x, pair.theta1, pair.theta2
    xd = x.conj().T
    left = x @ t2 - t1 @ x
    right = t2 @ xd - xd @ t1
    if pair.mode == BETA_PINV:
        p = la.projector(la.range_basis(xd, tol))
        left = left @ p
        right = p @ right
    scale = la.opnorm(x) * la.opnorm(t1)
    return CheckReport(
        name="intertwining",
        residuals={
            "intertwine_left": la.relative(_blk(left, block), scale),
            "intertwine_right": la.relative(_blk(right, block), scale),
        },
        threshold=tol.residual_tol,
        details={"mode": pair.mode},
    )


def _invertible_n2(pair, tol, block):
    n2 = _blk(pair.n2, block)
    if not la.is_invertible(n2, tol):
        raise SingularN2("N2 is not invertible" + ("" if block is None else f" on the leading {block} block"))
    return n2, np.linalg.inv(n2)


def verify_commutation_suite(pair: IntertwinePair, tol: Tolerances = DEFAULT_TOL, block=None) -> CheckReport:
    """Relative norms of the nine commutators that must vanish for the partner pair."""
    n2, n2inv = _invertible_n2(pair, tol, block)
    x, t1, t2 = pair.x, pair.theta1, pair.theta2
    xd = x.conj().T
    c = lambda m: _blk(m, block)  # noqa: E731
    T2, T2d = c(t2), c(t2.conj().T)
    A = c(xd @ t1.conj().T @ x)
    B = c(x @ t2.conj().T @ xd)
    C = c(xd @ t1 @ x)
    n1 = c(pair.n1)
    res = {
        "theta2_n2": _commutator_defect(T2, n2),
        "theta2_n2inv": _commutator_defect(T2, n2inv),
        "theta2dag_n2": _commutator_defect(T2d, n2),
        "theta2dag_n2inv": _commutator_defect(T2d, n2inv),
        "theta1dag_n1": _commutator_defect(c(t1.conj().T), n1),
        "xdag_theta1dag_x_n2": _commutator_defect(A, n2),
        "xdag_theta1dag_x_n2inv": _commutator_defect(A, n2inv),
        "x_theta2dag_xdag_n1": _commutator_defect(B, n1),
        "xdag_theta1_x_n2": _commutator_defect(C, n2),
    }
    return CheckReport(name="commutation_suite", residuals=res, threshold=tol.residual_tol)


@dataclass(frozen=True)
class SelfAdjointnessReport:
    delta1: float
    delta2: float
    threshold: float

    @property
    def theta1_hermitian(self) -> bool:
        return self.delta1 <= self.threshold

    @property
    def theta2_hermitian(self) -> bool:
        return self.delta2 <= self.threshold

    @property
    def passed(self) -> bool:
        return self.theta1_hermitian == self.theta2_hermitian


def selfadjointness_equivalence(pair: IntertwinePair, tol: Tolerances = DEFAULT_TOL, block=None) -> SelfAdjointnessReport:
    """Compare hermiticity verdicts of theta1 and theta2; they should agree."""
    _invertible_n2(pair, tol, block)
    return SelfAdjointnessReport(
        delta1=la.hermiticity_defect(_blk(pair.theta1, block)),
        delta2=la.hermiticity_defect(_blk(pair.theta2, block)),
        threshold=tol.residual_tol,
    )


def _restricted_theta2(pair, fam2, tol):
    if pair.mode == BETA_PINV:
        q = la.range_basis(fam2.vectors, tol)
        return q.conj().T @ pair.theta2 @ q
    return pair.theta2


def spectral_inclusion_check(pair: IntertwinePair, fam2: EigenFamily, tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """Every transported eigenvalue must appear in the spectrum of theta2.

    The spectrum is taken on span(F2) in pseudo-inverse mode. Eigenvalues
    are paired one-to-one by minimum total distance, so the same theta2
    eigenvalue is never used twice; the residual is the largest pair
    distance over the spectral radius.
    """
    op = _restricted_theta2(pair, fam2, tol)
    spectrum = np.linalg.eigvals(op) if op.size else np.zeros(0, dtype=complex)
    eps = fam2.eigenvalues
    radius = float(np.max(np.abs(spectrum))) if spectrum.size else 0.0
    pairs = []
    worst = 0.0
    if eps.size:
        if spectrum.size < eps.size:
            worst = np.inf
        else:
            cost = np.abs(eps[:, None] - spectrum[None, :])
            rows, cols = linear_sum_assignment(cost)
            pairs = [(int(fam2.indices[r]), complex(eps[r]), complex(spectrum[c])) for r, c in zip(rows, cols)]
            d = float(cost[rows, cols].max())
            worst = 0.0 if d == 0.0 else d / radius if radius > 0 else d
    return CheckReport(
        name="spectral_inclusion",
        residuals={"spectral_inclusion": worst},
        threshold=tol.residual_tol,
        details={"pairs": pairs, "spectrum": spectrum},
    )


def transport_check(pair: IntertwinePair, fam2: EigenFamily, tol: Tolerances = DEFAULT_TOL, block=None) -> CheckReport:
    """``theta2 phi2 = eps phi2`` and ``N2 phi2 = nu phi2`` for every transported vector.

    Also reports the largest overlap between normalized members with
    distinct nu. ``block`` keeps only members supported on the leading block.
    """
    v = fam2.vectors
    norms = fam2.norms()
    keep = np.ones(len(fam2), dtype=bool)
    if block is not None:
        keep = np.linalg.norm(v[block:, :], axis=0) <= tol.rank_tol * norms
    t2 = pair.theta2
    if pair.mode == BETA_PINV:
        # theta2 is only meaningful on span(F2): compare inside that subspace
        p = la.projector(la.range_basis(v, tol))
        t2 = p @ t2 @ p
    eig_res = np.linalg.norm(t2 @ v - v * fam2.eigenvalues, axis=0) / (max(la.opnorm(t2), 1e-300) * norms)
    nu = fam2.nu if fam2.nu is not None else norms**2
    n2_res = np.linalg.norm(pair.n2 @ v - v * nu, axis=0) / (max(la.opnorm(pair.n2), 1e-300) * norms)
    hat = v / norms
    overlap = 0.0
    for i in range(len(fam2)):
        for j in range(i + 1, len(fam2)):
            if not (keep[i] and keep[j]):
                continue
            if abs(nu[i] - nu[j]) > tol.rank_tol * max(nu.max(), 1e-300):
                overlap = max(overlap, abs(np.vdot(hat[:, i], hat[:, j])))
    res = {
        "theta2_eigen": float(eig_res[keep].max(initial=0.0)),
        "n2_eigen": float(n2_res[keep].max(initial=0.0)),
        "distinct_nu_overlap": float(overlap),
    }
    return CheckReport(name="transport", residuals=res, threshold=tol.residual_tol)


def normality_check(pair: IntertwinePair, fam1: EigenFamily, tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """Consequences of multiplicity-one N-eigenvalues.

    Each phi1 whose nu has multiplicity one must satisfy
    ``theta1^dagger phi1 = conj(eps) phi1`` (and the same for phi2 with
    theta2). When every multiplicity is one the families are orthogonal,
    and a complete family forces the operator to be normal.
    """
    fam1 = with_nu(pair.x, fam1, tol) if fam1.nu is None else fam1
    fam2 = map_eigenfamily(pair.x, fam1, tol)
    res = {}

    def adjoint_eigen(theta, fam, label):
        worst = 0.0
        for k, m in enumerate(fam.multiplicity):
            if m != 1:
                continue
            v = fam.vectors[:, k]
            r = theta.conj().T @ v - np.conj(fam.eigenvalues[k]) * v
            worst = max(worst, la.relative(r, max(la.opnorm(theta), 1e-300) * np.linalg.norm(v)))
        res[f"{label}_adjoint_eigen"] = worst

    adjoint_eigen(pair.theta1, fam1, "theta1")
    adjoint_eigen(_restricted_op(pair, fam2, tol), fam2, "theta2")

    all_simple = all(m == 1 for m in fam1.multiplicity)
    details = {"all_multiplicity_one": all_simple}
    if all_simple:
        for label, fam in (("f1", fam1), ("f2", fam2)):
            hat = fam.vectors / fam.norms()
            gram = hat.conj().T @ hat
            res[f"{label}_orthogonality"] = la.opnorm(gram - np.eye(len(fam))) if len(fam) else 0.0
        for label, theta, fam in (("theta1", pair.theta1, fam1), ("theta2", pair.theta2, fam2)):
            complete = la.numerical_rank(fam.vectors, tol) == pair.dim
            details[f"{label}_family_complete"] = complete
            if complete:
                res[f"{label}_normal"] = la.relative(la.commutator(theta, theta.conj().T), la.opnorm(theta) ** 2)
    return CheckReport(name="multiplicity_one", residuals=res, threshold=tol.residual_tol, details=details)


def _restricted_op(pair, fam2, tol):
    if pair.mode != BETA_PINV:
        return pair.theta2
    p = la.projector(la.range_basis(fam2.vectors, tol))
    return p @ pair.theta2 @ p


# -- spectral synthesis and completeness -----------------------------------

def _columns(vectors):
    if isinstance(vectors, np.ndarray) and vectors.ndim == 2:
        return vectors.astype(complex)
    return np.column_stack([la.as_vector(v) for v in vectors])


def synthesize_from_spectrum(eigenvalues, vectors, duals=None, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """``sum_n eps_n |v_n><d_n|`` with ``d = v`` when no duals are given.

    Separate duals must be biorthogonal to the vectors.
    """
    eps = np.asarray(eigenvalues, dtype=complex).reshape(-1)
    v = _columns(vectors)
    d = v if duals is None else _columns(duals)
    if not (eps.size == v.shape[1] == d.shape[1]) or v.shape[0] != d.shape[0]:
        raise DimensionMismatch("eigenvalues, vectors and duals must have matching lengths")
    if duals is not None:
        gram = d.conj().T @ v
        defect = la.opnorm(gram - np.eye(eps.size))
        if defect > tol.residual_tol:
            raise BiorthogonalityViolated(f"||<d_k, v_n> - delta|| = {defect:.3g}")
    return (v * eps) @ d.conj().T


@dataclass(frozen=True)
class CompletenessReport:
    complete: bool
    rank: int
    n2_invertible: Optional[bool] = None

    @property
    def consistent(self) -> Optional[bool]:
        return None if self.n2_invertible is None else self.complete == self.n2_invertible


def completeness_check(fam: EigenFamily, dim: int, tol: Tolerances = DEFAULT_TOL, n2=None) -> CompletenessReport:
    """Is the family spanning? Optionally cross-checked against invertibility of ``n2``."""
    rank = la.numerical_rank(fam.vectors, tol) if len(fam) else 0
    return CompletenessReport(
        complete=rank == dim,
        rank=rank,
        n2_invertible=None if n2 is None else la.is_invertible(n2, tol),
    )


def corollary_n2_decomposition(fam2: EigenFamily, n2, tol: Tolerances = DEFAULT_TOL, block=None) -> CheckReport:
    """Residuals of ``N2 = sum P_n`` and ``N2 = sum nu_n Phat_n`` over the transported family.

    The sum runs over the single index of I2 (the displayed formula carries
    a stray second index).
    """
    n2 = la.as_matrix(n2)
    nu = fam2.nu if fam2.nu is not None else fam2.norms() ** 2
    if any(m > 1 for m in multiplicities(nu, tol)):
        raise DegenerateNu("nu values are not pairwise distinct")
    if not la.is_invertible(_blk(n2, block), tol):
        raise SingularN2("N2 is not invertible" + ("" if block is None else f" on the leading {block} block"))
    v = fam2.vectors
    hat = v / fam2.norms()
    plain = v @ v.conj().T
    weighted = (hat * nu) @ hat.conj().T
    scale = la.opnorm(_blk(n2, block))
    return CheckReport(
        name="n2_decomposition",
        residuals={
            "n2_sum_projectors": la.relative(_blk(n2 - plain, block), scale),
            "n2_sum_nu_normalized": la.relative(_blk(n2 - weighted, block), scale),
        },
        threshold=tol.residual_tol,
    )


# -- rank-one operators ----------------------------------------------------

def rank_one(phi_from, phi_to) -> np.ndarray:
    """Matrix of ``f -> <phi_from, f> phi_to``."""
    return np.outer(la.as_vector(phi_to), la.as_vector(phi_from).conj())


def projector_family(fam: EigenFamily, normalized: bool = False) -> dict:
    """``P_n f = <phi_n, f> phi_n`` for each member (``Phat_n`` if normalized)."""
    src = fam.normalized() if normalized else fam
    return {n: rank_one(src.vectors[:, k], src.vectors[:, k]) for k, n in enumerate(src.indices)}


def projector_check(fam: EigenFamily, tol: Tolerances = DEFAULT_TOL) -> CheckReport:
    """Normalized projectors are orthogonal projections; unnormalized ones with nu != 1 are not idempotent."""
    hat = projector_family(fam, normalized=True)
    raw = projector_family(fam)
    res = {"phat_idempotent": 0.0, "phat_selfadjoint": 0.0}
    for p in hat.values():
        res["phat_idempotent"] = max(res["phat_idempotent"], la.relative(p @ p - p, 1.0))
        res["phat_selfadjoint"] = max(res["phat_selfadjoint"], la.relative(p - p.conj().T, 1.0))
    not_idem = []
    for n, p in raw.items():
        sq = fam.norms()[fam.position(n)] ** 2
        if abs(sq - 1.0) > tol.residual_tol:
            not_idem.append(la.relative(p @ p - p, la.opnorm(p)) > tol.residual_tol)
    res["p_not_idempotent_violations"] = float(sum(1 for ok in not_idem if not ok))
    return CheckReport(name="projectors", residuals=res, threshold=tol.residual_tol)
