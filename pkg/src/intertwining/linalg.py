"""Dense complex matrix primitives.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; nothing here
mutates its inputs. All "is this zero?" decisions are relative: a singular
value counts as zero when it is at most ``rank_tol`` times the largest one.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ConvergenceError,
    DimensionMismatch,
    MatrixFormatError,
    NegativeEigenvalue,
    NotHermitian,
    Singular,
)

__all__ = [
    "Tolerances",
    "HermitianEigenSystem",
    "GeneralEigenSystem",
    "as_matrix",
    "as_vector",
    "adjoint",
    "multiply",
    "commutator",
    "opnorm",
    "relative",
    "hermiticity_defect",
    "numerical_rank",
    "is_invertible",
    "inverse",
    "pseudo_inverse",
    "eig_hermitian",
    "eig_general",
    "sqrt_positive",
    "kernel_basis",
    "range_basis",
    "projector",
    "matrix_to_json",
    "matrix_from_json",
    "matrix_to_dict",
    "matrix_from_dict",
]


@dataclass(frozen=True)
class Tolerances:
    """Named numerical thresholds.

    ``rank_tol`` decides numerical rank, ``commute_tol`` bounds relative
    commutator norms, ``residual_tol`` bounds relative residuals of
    operator identities, and ``guard`` is the number of top levels of a
    truncated ladder operator excluded from identity checks.
    """

    rank_tol: float = 1e-10
    commute_tol: float = 1e-9
    residual_tol: float = 1e-9
    guard: int = 2

    def __post_init__(self):
        for name in ("rank_tol", "commute_tol", "residual_tol"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value!r}")
        if int(self.guard) != self.guard or self.guard <= 0:
            raise ValueError(f"guard must be a positive integer, got {self.guard!r}")

    def check_dim(self, dim):
        if self.guard >= dim:
            raise ValueError(f"guard ({self.guard}) must be smaller than the dimension ({dim})")

    def block(self, dim):
        """Size of the guard-banded leading block for dimension ``dim``."""
        self.check_dim(dim)
        return dim - self.guard


DEFAULT_TOL = Tolerances()


def as_matrix(m) -> np.ndarray:
    """Validate ``m`` as a finite square matrix and return a complex copy."""
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionMismatch(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def as_vector(v) -> np.ndarray:
    a = np.array(v, dtype=complex)
    if a.ndim != 1 or a.size == 0:
        raise DimensionMismatch(f"expected a non-empty vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("vector has non-finite entries")
    return a


def adjoint(m) -> np.ndarray:
    """Conjugate transpose."""
    return as_matrix(m).conj().T


def _same_dim(a, b):
    if a.shape != b.shape:
        raise DimensionMismatch(f"dimension mismatch: {a.shape} vs {b.shape}")


def multiply(a, b) -> np.ndarray:
    a, b = as_matrix(a), as_matrix(b)
    _same_dim(a, b)
    return a @ b


def commutator(a, b) -> np.ndarray:
    """``[a, b] = ab - ba``."""
    a, b = as_matrix(a), as_matrix(b)
    _same_dim(a, b)
    return a @ b - b @ a


def opnorm(m) -> float:
    """Spectral norm (largest singular value)."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    if m.ndim == 1:
        return float(np.linalg.norm(m))
    return float(np.linalg.norm(m, 2))


def relative(residual, scale) -> float:
    """``||residual|| / scale``, with a zero residual always reported as 0.

    A nonzero residual against a zero scale is reported against 1 instead,
    so that the result stays finite.
    """
    r = opnorm(residual)
    if r == 0.0:
        return 0.0
    return r / scale if scale > 0 else r


def hermiticity_defect(m) -> float:
    """``||M - M^dagger|| / ||M||`` (0 for the zero matrix)."""
    m = as_matrix(m)
    return relative(m - m.conj().T, opnorm(m))


def _singular_values(m):
    return np.linalg.svd(m, compute_uv=False)


def numerical_rank(m, tol: Tolerances = DEFAULT_TOL) -> int:
    """Number of singular values above ``rank_tol * sigma_max``.

    Works for rectangular input too (used for families of column vectors).
    """
    a = np.asarray(m, dtype=complex)
    if a.size == 0:
        return 0
    s = _singular_values(a)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol.rank_tol * s[0]))


def is_invertible(m, tol: Tolerances = DEFAULT_TOL) -> bool:
    a = as_matrix(m)
    return numerical_rank(a, tol) == a.shape[0]


def inverse(m, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Inverse of ``m``; raises :class:`Singular` below the rank cutoff."""
    a = as_matrix(m)
    s = _singular_values(a)
    if s[0] == 0.0 or s[-1] <= tol.rank_tol * s[0]:
        cond = np.inf if s[-1] == 0.0 else s[0] / s[-1]
        raise Singular(f"matrix is numerically singular (condition number {cond:.3g})")
    return np.linalg.inv(a)


def pseudo_inverse(m, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse with relative cutoff ``rank_tol``."""
    a = as_matrix(m)
    # numpy zeroes singular values <= rcond * sigma_max, same rule as numerical_rank
    return np.linalg.pinv(a, rcond=tol.rank_tol)


def _fix_phases(vectors):
    """Make the largest-modulus entry of each column real and positive."""
    v = np.array(vectors, dtype=complex)
    for j in range(v.shape[1]):
        col = v[:, j]
        k = int(np.argmax(np.abs(col)))
        if col[k] != 0:
            v[:, j] = col * (abs(col[k]) / col[k])
    return v


@dataclass(frozen=True)
class HermitianEigenSystem:
    eigenvalues: np.ndarray  # real, ascending
    eigenvectors: np.ndarray  # orthonormal columns

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


@dataclass(frozen=True)
class GeneralEigenSystem:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # unit-norm right eigenvectors as columns
    residuals: np.ndarray  # ||Mv - lambda v|| / ||M|| per pair
    clusters: list = field(default_factory=list)  # index groups sharing an eigenvalue

    @property
    def degenerate(self) -> bool:
        return any(len(c) > 1 for c in self.clusters)


def _check_hermitian(a, tol):
    scale = opnorm(a)
    defect = opnorm(a - a.conj().T)
    if defect > tol.commute_tol * scale:
        raise NotHermitian(f"relative hermiticity defect {defect / scale:.3g} exceeds {tol.commute_tol:g}")


def eig_hermitian(m, tol: Tolerances = DEFAULT_TOL) -> HermitianEigenSystem:
    a = as_matrix(m)
    _check_hermitian(a, tol)
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    return HermitianEigenSystem(eigenvalues=w, eigenvectors=_fix_phases(v))


def cluster_values(values, threshold):
    """Group indices whose values lie within ``threshold`` of each other (single linkage)."""
    values = np.asarray(values)
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(values[i] - values[j]) <= threshold:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: g[0])


def eig_general(m, tol: Tolerances = DEFAULT_TOL) -> GeneralEigenSystem:
    """Right eigenpairs of an arbitrary square matrix.

    Eigenvalues closer than ``rank_tol * spectral_radius`` are grouped into
    clusters; any cluster of size > 1 flags the system as degenerate.
    """
    a = as_matrix(m)
    try:
        w, v = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(str(exc)) from exc
    v = v / np.linalg.norm(v, axis=0)
    v = _fix_phases(v)
    scale = opnorm(a)
    res = np.linalg.norm(a @ v - v * w, axis=0)
    if scale > 0:
        res = res / scale
    radius = float(np.max(np.abs(w))) if w.size else 0.0
    clusters = cluster_values(w, tol.rank_tol * radius)
    return GeneralEigenSystem(eigenvalues=w, eigenvectors=v, residuals=res, clusters=clusters)


def sqrt_positive(m, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Unique positive semidefinite square root of a PSD Hermitian matrix."""
    a = as_matrix(m)
    _check_hermitian(a, tol)
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    floor = -tol.rank_tol * opnorm(a)
    if w[0] < floor:
        raise NegativeEigenvalue(f"eigenvalue {w[0]:.3g} below clamping window {floor:.3g}")
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.conj().T


def kernel_basis(m, tol: Tolerances = DEFAULT_TOL) -> list:
    """Orthonormal vectors spanning the numerical nullspace (empty for trivial kernel)."""
    a = as_matrix(m)
    _, s, vh = np.linalg.svd(a)
    cutoff = tol.rank_tol * s[0]
    null = vh[s <= cutoff].conj() if s[0] > 0 else np.eye(a.shape[0], dtype=complex)
    return [_fix_phases(vec[:, None])[:, 0] for vec in null]


def range_basis(m, tol: Tolerances = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal columns spanning the numerical column space (works for rectangular input)."""
    a = np.asarray(m, dtype=complex)
    if a.size == 0:
        return np.zeros((a.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    if s[0] == 0.0:
        return np.zeros((a.shape[0], 0), dtype=complex)
    return u[:, s > tol.rank_tol * s[0]]


def projector(basis) -> np.ndarray:
    """Orthogonal projector onto the span of orthonormal columns."""
    q = np.asarray(basis, dtype=complex)
    return q @ q.conj().T


# -- JSON interchange ------------------------------------------------------

def matrix_to_dict(m) -> dict:
    a = as_matrix(m)
    return {
        "dim": int(a.shape[0]),
        "entries": [[float(z.real), float(z.imag)] for z in a.ravel()],
    }


def matrix_from_dict(doc) -> np.ndarray:
    try:
        dim = doc["dim"]
        entries = doc["entries"]
    except (TypeError, KeyError) as exc:
        raise MatrixFormatError(f"matrix document needs 'dim' and 'entries': {exc}") from exc
    if isinstance(dim, bool) or not isinstance(dim, int) or dim <= 0:
        raise MatrixFormatError(f"'dim' must be a positive integer, got {dim!r}")
    if not isinstance(entries, list) or len(entries) != dim * dim:
        raise MatrixFormatError(f"'entries' must hold dim**2 = {dim * dim} pairs")
    try:
        arr = np.array(entries, dtype=float)
    except (TypeError, ValueError) as exc:
        raise MatrixFormatError(f"entries are not numeric [re, im] pairs: {exc}") from exc
    if arr.shape != (dim * dim, 2):
        raise MatrixFormatError("each entry must be a [re, im] pair")
    if not np.all(np.isfinite(arr)):
        raise MatrixFormatError("entries must be finite")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(dim, dim)


def matrix_to_json(m) -> str:
    return json.dumps(matrix_to_dict(m))


def matrix_from_json(text) -> np.ndarray:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFormatError(f"invalid JSON: {exc}") from exc
    return matrix_from_dict(doc)
