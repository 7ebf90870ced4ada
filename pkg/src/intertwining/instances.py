"""Random test instances that satisfy (or deliberately break) the hypotheses.

Every generator takes an explicit ``numpy.random.Generator``; the CLI
seeds a counter-based Philox stream so runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .intertwine import EigenFamily

GENERATOR_NAME = "numpy.random.Philox"


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def complex_gaussian(rng, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_unitary(d: int, rng) -> np.ndarray:
    """Haar-distributed unitary (QR with the phase correction)."""
    q, r = np.linalg.qr(complex_gaussian(rng, (d, d)))
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_hermitian(d: int, rng) -> np.ndarray:
    g = complex_gaussian(rng, (d, d))
    return (g + g.conj().T) / 2


def random_invertible(d: int, rng, max_cond: float = 50.0) -> np.ndarray:
    """``U diag(s) V^dagger`` with singular values spread over [1, max_cond]."""
    s = np.exp(rng.uniform(0.0, np.log(max_cond), d))
    s[0], s[-1] = 1.0, max_cond  # pin the extremes so the condition number is exactly max_cond
    return (random_unitary(d, rng) * s) @ random_unitary(d, rng).conj().T


def distinct_values(d: int, rng, low=0.5, high=3.0, gap=0.05) -> np.ndarray:
    """``d`` sorted values in [low, high] with pairwise spacing >= gap."""
    span = high - low - gap * (d - 1)
    cuts = np.sort(rng.uniform(0.0, span, d))
    return low + cuts + gap * np.arange(d)


@dataclass(frozen=True)
class KernelInstance:
    theta1: np.ndarray
    x: np.ndarray
    family: EigenFamily
    kernel: tuple


def prescribed_kernel_instance(d: int, rng, kernel=None) -> KernelInstance:
    """theta1 and x sharing an orthonormal eigenbasis, with ``x^dagger`` killing ``phi_k`` for k in ``kernel``.

    ``x = V D W^dagger`` where V holds the eigenvectors of theta1, W is a
    random unitary and D zeroes the kernel coordinates.
    """
    if kernel is None:
        size = int(rng.integers(0, d))
        kernel = tuple(sorted(int(k) for k in rng.choice(d, size=size, replace=False)))
    kernel = tuple(kernel)
    v = random_unitary(d, rng)
    w = random_unitary(d, rng)
    diag = distinct_values(d, rng)
    diag[list(kernel)] = 0.0
    x = (v * diag) @ w.conj().T
    eps = distinct_values(d, rng) + 1j * rng.uniform(-1, 1, d)
    theta1 = (v * eps) @ v.conj().T
    fam = EigenFamily(indices=tuple(range(d)), vectors=v, eigenvalues=eps)
    return KernelInstance(theta1=theta1, x=x, family=fam, kernel=kernel)


@dataclass(frozen=True)
class CommutingInstance:
    theta1: np.ndarray
    x: np.ndarray
    hermitian: bool


def commuting_instance(d: int, rng, hermitian: bool, degenerate: bool = False) -> CommutingInstance:
    """theta1 commuting with N1 = x x^dagger, x invertible and not normal.

    ``x = V diag(sigma) W^dagger``, so N1 = V diag(sigma^2) V^dagger; theta1
    is diagonal in V, except that with ``degenerate=True`` the first two
    sigma coincide and theta1 carries a non-normal 2x2 block there.
    """
    v = random_unitary(d, rng)
    w = random_unitary(d, rng)
    sigma = distinct_values(d, rng)
    if degenerate:
        sigma[1] = sigma[0]
    x = (v * sigma) @ w.conj().T
    core = np.diag(distinct_values(d, rng)).astype(complex)
    if not hermitian:
        core += np.diag(1j * rng.uniform(0.5, 1.5, d) * rng.choice([-1, 1], d))
        if degenerate:
            core[0, 1] = 1.0 + rng.uniform(0, 1)
    theta1 = v @ core @ v.conj().T
    if hermitian:
        theta1 = (theta1 + theta1.conj().T) / 2
    return CommutingInstance(theta1=theta1, x=x, hermitian=hermitian)


def polynomial(m, coeffs) -> np.ndarray:
    """``sum_k coeffs[k] m^k`` by Horner's rule."""
    m = np.asarray(m, dtype=complex)
    out = np.zeros_like(m)
    eye = np.eye(m.shape[0])
    for c in reversed(coeffs):
        out = out @ m + c * eye
    return out


@dataclass(frozen=True)
class NogoInstance:
    t: np.ndarray
    s: np.ndarray
    theta1: np.ndarray
    coeffs: tuple


def nogo_instance(d: int, rng) -> NogoInstance:
    """Riesz eigenbasis ``T = V diag(c)`` with theta1 = g(S) for a polynomial g.

    g is strictly increasing on the spectrum of S, so the columns of T are
    (up to scale) the only eigenvectors of theta1.
    """
    v = random_unitary(d, rng)
    c = np.sqrt(distinct_values(d, rng, low=0.5, high=2.0))
    t = v * c
    s = (v * c**2) @ v.conj().T
    s = (s + s.conj().T) / 2
    # increasing on the positive spectrum of S, hence injective there
    coeffs = (rng.uniform(-1, 1), rng.uniform(0.5, 1.5), rng.uniform(0.0, 0.3))
    theta1 = polynomial(s, coeffs)
    return NogoInstance(t=t, s=s, theta1=theta1, coeffs=coeffs)


def diagonal_t(d: int, rng) -> np.ndarray:
    return np.diag(np.sqrt(distinct_values(d, rng, low=1.0, high=4.0))).astype(complex)
