"""Clock and shift unitaries over an admissible basis, and the Weyl words u^i v^j."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotOrthonormal, ScalarInput
from .matrixcore import adjoint, as_matrix, null_space

SCALAR_TOL = 1e-10
CANDIDATE_MIN_RATIO = 1e-8
ORTHONORMAL_TOL = 1e-12
DEFAULT_SEED = 20240611
RANDOM_CANDIDATES = 64


@dataclass(frozen=True)
class WeylPair:
    r: int
    lam: complex
    u: np.ndarray
    v: np.ndarray
    basis: np.ndarray  # columns xi_0 .. xi_{r-1}

    def word(self, i: int, j: int) -> np.ndarray:
        return np.linalg.matrix_power(self.u, i % self.r) @ np.linalg.matrix_power(self.v, j % self.r)


def root_of_unity(r: int) -> complex:
    return complex(np.exp(2j * np.pi / r))


def _householder_to_e0(a: np.ndarray) -> tuple[np.ndarray, complex]:
    """Unitary Hermitian ``H`` and phase ``alpha`` with ``H a = alpha e_0`` for a unit vector ``a``."""
    n = a.size
    a0 = a[0]
    alpha = -a0 / abs(a0) if abs(a0) > 0 else -1.0 + 0j
    w = a.copy()
    w[0] -= alpha
    wn = np.vdot(w, w).real
    if wn < 1e-30:
        return np.eye(n, dtype=np.complex128), complex(a0)
    return np.eye(n, dtype=np.complex128) - 2.0 * np.outer(w, np.conj(w)) / wn, complex(alpha)


def _unitary_taking(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """A unitary ``W`` with ``W a = b`` for unit vectors ``a``, ``b``."""
    ha, alpha = _householder_to_e0(a)
    hb, beta = _householder_to_e0(b)
    d = np.ones(a.size, dtype=np.complex128)
    d[0] = beta / alpha
    return adjoint(hb) @ (d[:, None] * ha)


def _candidates(r: int, seed: int):
    ident = np.eye(r, dtype=np.complex128)
    for k in range(r):
        yield ident[:, k]
    yield np.ones(r, dtype=np.complex128) / np.sqrt(r)
    rng = np.random.default_rng(seed)
    for _ in range(RANDOM_CANDIDATES):
        z = rng.normal(size=r) + 1j * rng.normal(size=r)
        yield z / np.linalg.norm(z)


def is_scalar(t: np.ndarray, tol: float = SCALAR_TOL) -> bool:
    t = as_matrix(t)
    c = np.trace(t) / t.shape[0]
    return np.linalg.norm(t - c * np.eye(t.shape[0])) <= tol * max(np.linalg.norm(t), 1.0)


def admissible_basis(t: np.ndarray, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Orthonormal basis ``xi_0..xi_{r-1}`` (as columns) with every ``<T xi_0, xi_k>`` nonzero.

    ``xi_0`` is the first candidate (standard basis, uniform superposition, then
    seeded random unit vectors) that is far from being an eigenvector of ``T``.
    The remaining vectors are an orthonormal basis of ``xi_0``'s complement
    rotated so that the off-axis part ``zeta`` of ``T xi_0`` has equal, real,
    positive coordinates ``||zeta|| / sqrt(r-1)``.
    """
    t = as_matrix(t)
    if t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise DimensionMismatch("admissible_basis needs a square matrix")
    r = t.shape[0]
    if r < 2:
        raise DimensionMismatch("admissible_basis needs r >= 2")
    if is_scalar(t):
        raise ScalarInput("T is numerically a scalar multiple of the identity")

    scale = np.linalg.norm(t)
    for xi0 in _candidates(r, seed):
        image = t @ xi0
        zeta = image - np.vdot(xi0, image) * xi0
        if np.linalg.norm(zeta) >= CANDIDATE_MIN_RATIO * scale:
            break
    else:  # pragma: no cover - a non-scalar T has a non-eigenvector among the random candidates
        raise ScalarInput("no admissible starting vector found")

    h0, _ = _householder_to_e0(xi0)
    complement = adjoint(h0)[:, 1:]  # orthonormal basis of xi0^perp
    z = adjoint(complement) @ zeta
    znorm = np.linalg.norm(z)
    target = np.ones(r - 1, dtype=np.complex128) / np.sqrt(r - 1)
    # want W with W^* z = ||z|| target, i.e. W^* takes z/||z|| to target
    w_adj = _unitary_taking(z / znorm, target)
    rest = complement @ adjoint(w_adj)
    return np.column_stack([xi0, rest])


def clock_shift(r: int, basis: np.ndarray) -> WeylPair:
    """Clock ``u xi_k = lam^-k xi_k`` and shift ``v xi_k = xi_{k+1 mod r}``."""
    basis = as_matrix(basis)
    if basis.shape != (r, r):
        raise DimensionMismatch(f"basis shape {basis.shape} does not match r = {r}")
    if np.linalg.norm(adjoint(basis) @ basis - np.eye(r)) > ORTHONORMAL_TOL * r:
        raise NotOrthonormal("basis columns are not orthonormal")
    lam = root_of_unity(r)
    phases = lam ** (-np.arange(r))
    u = (basis * phases) @ adjoint(basis)
    v = np.roll(basis, -1, axis=1) @ adjoint(basis)
    # v maps basis[:, k] to basis[:, (k+1) % r]: column k of roll(-1) is basis[:, k+1]
    return WeylPair(r=r, lam=lam, u=u, v=v, basis=basis)


def weyl_family(pair: WeylPair) -> dict[tuple[int, int], np.ndarray]:
    """All ``r**2`` words ``w[i, j] = u^i v^j`` keyed by ``(i, j)``."""
    r = pair.r
    upow = [np.eye(r, dtype=np.complex128)]
    vpow = [np.eye(r, dtype=np.complex128)]
    for _ in range(1, r):
        upow.append(upow[-1] @ pair.u)
        vpow.append(vpow[-1] @ pair.v)
    return {(i, j): upow[i] @ vpow[j] for i in range(r) for j in range(r)}


def commutation_matrix(s: np.ndarray) -> np.ndarray:
    """Matrix of ``x -> x s - s x`` on row-major vectorized ``x``."""
    s = as_matrix(s)
    n = s.shape[0]
    ident = np.eye(n, dtype=np.complex128)
    return np.kron(ident, s.T) - np.kron(s, ident)


def commutant_basis(ops, tol: float = 1e-9) -> list[np.ndarray]:
    ops = [as_matrix(o) for o in ops]
    n = ops[0].shape[0]
    if any(o.shape != (n, n) for o in ops):
        raise DimensionMismatch("commutant inputs must be square of one size")
    stacked = np.vstack([commutation_matrix(o) for o in ops])
    return [vec.reshape(n, n) for vec in null_space(stacked, tol)]


def check_irreducible_pair(t: np.ndarray, u: np.ndarray, tol: float = 1e-9) -> bool:
    """True iff only scalars commute with both ``t`` and ``u``."""
    t = as_matrix(t)
    u = as_matrix(u)
    if t.shape != u.shape or t.ndim != 2 or t.shape[0] != t.shape[1]:
        raise DimensionMismatch("check_irreducible_pair needs equal square matrices")
    return len(commutant_basis([t, u], tol)) == 1
