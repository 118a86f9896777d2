"""Dense complex matrix kernels.

Matrices are plain ``numpy`` arrays of dtype ``complex128``. Every tolerance is
an explicit keyword argument; there is no module-level epsilon.
"""
from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyInput, NoConvergence, NotHermitian

DEFAULT_SWEEP_CAP = 100
DEFAULT_OFFDIAG_TOL = 1e-14
HERMITIAN_TOL = 1e-12

PADE_ORDER = 8
SCALED_NORM_TARGET = 0.5


class HermEigResult(NamedTuple):
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(a) -> np.ndarray:
    return np.asarray(a, dtype=np.complex128)


def adjoint(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def _require_square(a: np.ndarray, what: str = "matrix") -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{what} must be square, got shape {a.shape}")


def is_hermitian(a: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    a = as_matrix(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return np.linalg.norm(a - adjoint(a)) <= tol * np.linalg.norm(a)


def hermitian_part(a: np.ndarray) -> np.ndarray:
    a = as_matrix(a)
    return 0.5 * (a + adjoint(a))


def _offdiag_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def herm_eig(
    a: np.ndarray,
    *,
    sweep_cap: int = DEFAULT_SWEEP_CAP,
    offdiag_tol: float = DEFAULT_OFFDIAG_TOL,
    herm_tol: float = HERMITIAN_TOL,
) -> HermEigResult:
    """Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Each rotation zeroes one off-diagonal pair ``(p, q)``: a diagonal phase makes
    ``a[p, q]`` real, then a real plane rotation annihilates it. Sweeps stop once
    the off-diagonal Frobenius norm falls below ``offdiag_tol * ||a||_F``.

    Returns eigenvalues in ascending order with the matching unitary of column
    eigenvectors. Raises ``NotHermitian`` when ``||a - a*||_F > herm_tol ||a||_F``
    and ``NoConvergence`` after ``sweep_cap`` sweeps.
    """
    a = as_matrix(a)
    _require_square(a)
    if not is_hermitian(a, herm_tol):
        raise NotHermitian("herm_eig requires a Hermitian matrix")
    n = a.shape[0]
    work = hermitian_part(a).copy()
    vecs = np.eye(n, dtype=np.complex128)
    threshold = offdiag_tol * np.linalg.norm(work)

    for _ in range(sweep_cap):
        off = _offdiag_norm(work)
        if off <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = work[p, q]
                mag = abs(apq)
                if mag == 0.0 or mag <= 1e-3 * threshold / n:
                    continue
                phase = apq / mag
                app = work[p, p].real
                aqq = work[q, q].real
                tau = (aqq - app) / (2.0 * mag)
                t = math.copysign(1.0, tau) / (abs(tau) + math.sqrt(1.0 + tau * tau))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                # G = diag-phase @ plane rotation, restricted to the (p, q) block
                g = np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=np.complex128)
                idx = [p, q]
                work[:, idx] = work[:, idx] @ g
                work[idx, :] = adjoint(g) @ work[idx, :]
                work[p, q] = 0.0
                work[q, p] = 0.0
                vecs[:, idx] = vecs[:, idx] @ g
    else:
        off = _offdiag_norm(work)
        if off > threshold:
            raise NoConvergence(f"Jacobi iteration exceeded {sweep_cap} sweeps (off-diagonal {off:.3e})")

    evals = np.real(np.diag(work))
    order = np.argsort(evals, kind="stable")
    return HermEigResult(evals[order], vecs[:, order])


def _pade_coefficients(q: int) -> list[float]:
    return [
        math.factorial(2 * q - j) * math.factorial(q)
        / (math.factorial(2 * q) * math.factorial(j) * math.factorial(q - j))
        for j in range(q + 1)
    ]


_PADE = _pade_coefficients(PADE_ORDER)


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a diagonal Pade(8, 8) kernel.

    The matrix is scaled by ``2**-s`` until its Frobenius norm is at most 0.5,
    where the Pade truncation error is below 1e-23, then squared back ``s`` times.
    """
    a = as_matrix(a)
    _require_square(a)
    n = a.shape[0]
    norm = np.linalg.norm(a)
    s = 0
    if norm > SCALED_NORM_TARGET:
        s = int(math.ceil(math.log2(norm / SCALED_NORM_TARGET)))
    x = a / (2.0 ** s)

    ident = np.eye(n, dtype=np.complex128)
    num = _PADE[0] * ident
    den = _PADE[0] * ident
    power = ident
    for j in range(1, PADE_ORDER + 1):
        power = power @ x
        term = _PADE[j] * power
        num = num + term
        den = den + term if j % 2 == 0 else den - term
    result = np.linalg.solve(den, num)
    for _ in range(s):
        result = result @ result
    return result


def trace_norm(a: np.ndarray, *, herm_tol: float = HERMITIAN_TOL) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    evals = herm_eig(a, herm_tol=herm_tol).eigenvalues
    return float(np.sum(np.abs(evals)))


def spectral_norm(a: np.ndarray) -> float:
    """Largest singular value, from the eigenvalues of ``a* a``."""
    a = as_matrix(a)
    if a.size == 0:
        return 0.0
    gram = adjoint(a) @ a
    evals = herm_eig(hermitian_part(gram)).eigenvalues
    return float(math.sqrt(max(evals[-1], 0.0)))


def null_space(a: np.ndarray, tol: float = 1e-10) -> list[np.ndarray]:
    """Orthonormal basis of ``{x : ||a x|| <= tol ||a|| ||x||}``.

    Singular values are compared against ``tol`` times the largest one; a zero
    matrix has the whole space as its kernel.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = as_matrix(a)
    if a.ndim != 2:
        raise DimensionMismatch(f"null_space expects a 2-D array, got shape {a.shape}")
    ncols = a.shape[1]
    _, sing, vh = np.linalg.svd(a, full_matrices=True)
    smax = sing[0] if sing.size else 0.0
    rank = int(np.sum(sing > tol * smax)) if smax > 0 else 0
    return [np.conj(vh[k]) for k in range(rank, ncols)]


def gram_matrix(vectors: Sequence[np.ndarray]) -> np.ndarray:
    flat = np.array([as_matrix(v).reshape(-1) for v in vectors])
    return np.conj(flat) @ flat.T


def gram_rank(vectors: Sequence[np.ndarray], tol: float = 1e-10) -> int:
    """Rank of the Hilbert-Schmidt Gram matrix ``trace(A_i* A_j)``."""
    vectors = list(vectors)
    if not vectors:
        raise EmptyInput("gram_rank needs at least one vector")
    shape = np.shape(vectors[0])
    if any(np.shape(v) != shape for v in vectors):
        raise DimensionMismatch("gram_rank inputs must share one shape")
    if tol <= 0:
        raise ValueError("tol must be positive")
    gram = hermitian_part(gram_matrix(vectors))
    evals = herm_eig(gram).eigenvalues
    top = evals[-1]
    if top <= 0:
        return 0
    return int(np.sum(evals > tol * top))


def matrix_power_frac(eigen: HermEigResult, power: float) -> np.ndarray:
    """``U diag(lambda**power) U*`` for a positive definite decomposition."""
    vals, vecs = eigen
    return (vecs * vals ** power) @ adjoint(vecs)
