"""Lindblad generators, superoperators, and the state-preserving perturbation machinery.

Vectorization is row-major: ``vec(x) = x.reshape(-1)``, so the map
``x -> a x b`` has matrix ``kron(a, b.T)``.

The dual ``L_*`` is taken against the *bilinear* trace pairing
``trace(L_*(y) x) = trace(y L(x))``, not the Hilbert-Schmidt inner product.
In row-major coordinates that is ``swap @ S.T @ swap`` where ``swap`` is the
permutation ``vec(x) -> vec(x.T)``; it is not the conjugate transpose.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateState,
    DimensionMismatch,
    EpsilonTooLarge,
    NotCompletelyPositive,
    TracialState,
    UnbalancedKraus,
)
from .matrixcore import adjoint, as_matrix, herm_eig, hermitian_part, trace_norm
from .states import FaithfulState, centralizer_expectation, matrix_from_json, matrix_to_json
from . import states as _states

CP_TOL = 1e-9
BALANCE_TOL = 1e-10
CRITERION_TOL = 1e-9


@dataclass(frozen=True)
class Superoperator:
    """A linear map on ``M_r(C)`` as an ``r**2 x r**2`` matrix on row-major vectors."""

    r: int
    matrix: np.ndarray

    def __post_init__(self):
        n = self.r * self.r
        if self.matrix.shape != (n, n):
            raise DimensionMismatch(f"superoperator for r = {self.r} must be {n}x{n}, got {self.matrix.shape}")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = as_matrix(x)
        if x.shape != (self.r, self.r):
            raise DimensionMismatch(f"operand shape {x.shape} does not match r = {self.r}")
        return (self.matrix @ x.reshape(-1)).reshape(self.r, self.r)

    def __matmul__(self, other: Superoperator) -> Superoperator:
        _same_r(self, other)
        return Superoperator(self.r, self.matrix @ other.matrix)

    def __add__(self, other: Superoperator) -> Superoperator:
        _same_r(self, other)
        return Superoperator(self.r, self.matrix + other.matrix)

    def __sub__(self, other: Superoperator) -> Superoperator:
        _same_r(self, other)
        return Superoperator(self.r, self.matrix - other.matrix)

    def __mul__(self, scalar: complex) -> Superoperator:
        return Superoperator(self.r, scalar * self.matrix)

    __rmul__ = __mul__


def _same_r(a: Superoperator, b: Superoperator) -> None:
    if a.r != b.r:
        raise DimensionMismatch(f"superoperators act on different algebras (r = {a.r} vs {b.r})")


def identity_map(r: int) -> Superoperator:
    return Superoperator(r, np.eye(r * r, dtype=np.complex128))


def sandwich(a: np.ndarray, b: np.ndarray) -> Superoperator:
    """The map ``x -> a x b``."""
    a = as_matrix(a)
    b = as_matrix(b)
    return Superoperator(a.shape[0], np.kron(a, b.T))


def conjugation(v: np.ndarray) -> Superoperator:
    """The map ``x -> v x v*``."""
    v = as_matrix(v)
    return sandwich(v, adjoint(v))


def kraus_map(kraus: Sequence[np.ndarray], r: int | None = None) -> Superoperator:
    kraus = [as_matrix(v) for v in kraus]
    if not kraus:
        if r is None:
            raise DimensionMismatch("empty Kraus list needs an explicit r")
        return Superoperator(r, np.zeros((r * r, r * r), dtype=np.complex128))
    total = conjugation(kraus[0])
    for v in kraus[1:]:
        total = total + conjugation(v)
    return total


def commutator_map(ell: np.ndarray) -> Superoperator:
    """The map ``x -> ell x - x ell``."""
    ell = as_matrix(ell)
    ident = np.eye(ell.shape[0], dtype=np.complex128)
    return Superoperator(ell.shape[0], np.kron(ell, ident) - np.kron(ident, ell.T))


def functional_map(d: np.ndarray) -> Superoperator:
    """The rank-one map ``x -> trace(d x) 1``."""
    d = as_matrix(d)
    r = d.shape[0]
    ident = np.eye(r, dtype=np.complex128).reshape(-1)
    return Superoperator(r, np.outer(ident, d.T.reshape(-1)))


def transpose_map(r: int) -> Superoperator:
    return Superoperator(r, _swap(r).astype(np.complex128))


def _swap(r: int) -> np.ndarray:
    idx = np.arange(r * r).reshape(r, r).T.reshape(-1)
    perm = np.zeros((r * r, r * r))
    perm[np.arange(r * r), idx] = 1.0
    return perm


@dataclass(frozen=True)
class LindbladGenerator:
    """``L(x) = sum_j v_j x v_j* + k x + x k*``.

    ``perturbation`` records the skew-adjoint part ``ell`` of the drift when the
    generator came out of :func:`build_preserving`; it is informational only.
    """

    r: int
    kraus: tuple[np.ndarray, ...]
    drift: np.ndarray
    perturbation: np.ndarray | None = field(default=None, compare=False)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = as_matrix(x)
        out = self.drift @ x + x @ adjoint(self.drift)
        for v in self.kraus:
            out = out + v @ x @ adjoint(v)
        return out

    @property
    def unital_defect(self) -> float:
        return float(np.linalg.norm(self(np.eye(self.r, dtype=np.complex128)), 2))

    def operator_set(self) -> list[np.ndarray]:
        """``{k, k*, v_j, v_j*}``, the set whose commutant is the fixed-point algebra."""
        ops = [self.drift, adjoint(self.drift)]
        for v in self.kraus:
            ops.extend([v, adjoint(v)])
        return ops


def make_generator(kraus: Sequence[np.ndarray], drift: np.ndarray) -> LindbladGenerator:
    drift = as_matrix(drift)
    if drift.ndim != 2 or drift.shape[0] != drift.shape[1]:
        raise DimensionMismatch("drift must be square")
    r = drift.shape[0]
    ks = tuple(as_matrix(v) for v in kraus)
    if any(v.shape != (r, r) for v in ks):
        raise DimensionMismatch("Kraus operators must match the drift dimension")
    return LindbladGenerator(r=r, kraus=ks, drift=drift)


def as_superoperator(gen: LindbladGenerator) -> Superoperator:
    r = gen.r
    ident = np.eye(r, dtype=np.complex128)
    mat = np.kron(gen.drift, ident) + np.kron(ident, np.conj(gen.drift))
    for v in gen.kraus:
        mat = mat + np.kron(v, np.conj(v))
    return Superoperator(r, mat)


def dual(s: Superoperator) -> Superoperator:
    """Trace dual: ``trace(dual(s)(y) x) = trace(y s(x))``."""
    perm = _swap(s.r)
    return Superoperator(s.r, perm @ s.matrix.T @ perm)


def _check_state(s: Superoperator, state: FaithfulState) -> None:
    if s.r != state.r:
        raise DimensionMismatch(f"superoperator r = {s.r} but state r = {state.r}")


def sharp(s: Superoperator, state: FaithfulState) -> Superoperator:
    """``x -> density^-1/2 s_*(density^1/2 x density^1/2) density^-1/2``."""
    _check_state(s, state)
    root = state.sqrt
    inv_root = state.inv_sqrt
    return sandwich(inv_root, inv_root) @ dual(s) @ sandwich(root, root)


def choi_matrix(s: Superoperator) -> np.ndarray:
    """``sum_ij E_ij (x) s(E_ij)`` as an ``r**2 x r**2`` matrix."""
    r = s.r
    return s.matrix.reshape(r, r, r, r).transpose(2, 0, 3, 1).reshape(r * r, r * r)


def choi_positive(s: Superoperator, tol: float = CP_TOL) -> tuple[bool, float]:
    """Complete positivity test on the Choi matrix.

    Returns ``(verdict, min_eigenvalue)``; a Choi matrix that is not Hermitian
    (the map does not preserve adjoints) is never positive.
    """
    c = choi_matrix(s)
    herm = hermitian_part(c)
    min_eig = float(herm_eig(herm).eigenvalues[0])
    skew = float(np.linalg.norm(c - herm))
    hermitian = skew <= max(tol, 1e-12 * np.linalg.norm(c))
    return bool(hermitian and min_eig >= -tol), min_eig


def _require_cp(s: Superoperator) -> None:
    ok, min_eig = choi_positive(s)
    if not ok:
        raise NotCompletelyPositive(f"map is not completely positive (Choi min eigenvalue {min_eig:.3e})")


def unperturbed(q: Superoperator) -> Superoperator:
    """``x -> Q(x) - (Q(1) x + x Q(1)) / 2``; annihilates the identity."""
    _require_cp(q)
    q1 = q(np.eye(q.r, dtype=np.complex128))
    return q - 0.5 * sandwich(q1, np.eye(q.r)) - 0.5 * sandwich(np.eye(q.r), q1)


def invariance_defect(lmap: Superoperator, state: FaithfulState) -> float:
    """Trace norm of ``L_*(density)``; zero exactly when ``omega o L = 0``."""
    _check_state(lmap, state)
    return trace_norm(hermitian_part(dual(lmap)(state.density)))


def criterion_38(q: Superoperator, state: FaithfulState, tol: float = CRITERION_TOL) -> tuple[bool, float]:
    """Solvability test for a unital, state-preserving ``Q + k x + x k*``.

    Compares the centralizer compressions of ``Q(1)`` and ``Q^#(1)``; returns the
    verdict and the Frobenius norm of their difference.
    """
    _check_state(q, state)
    _require_cp(q)
    one = np.eye(q.r, dtype=np.complex128)
    q1 = q(one)
    delta = centralizer_expectation(state, q1) - centralizer_expectation(state, sharp(q, state)(one))
    residual = float(np.linalg.norm(delta))
    return bool(residual <= tol * (1.0 + np.linalg.norm(q1))), residual


def commutator_solution(state: FaithfulState, t: np.ndarray) -> np.ndarray:
    """Skew-adjoint ``ell`` with ``ell Omega - Omega ell = t - E_A(t)``.

    ``ell = sum_{i != j} e_i t e_j / (lam_j - lam_i)``, which has ``E_A(ell) = 0``.
    """
    t = as_matrix(t)
    off = t - centralizer_expectation(state, t)
    if state.is_tracial:
        if np.linalg.norm(off) > 1e-12 * (1.0 + np.linalg.norm(t)):
            raise DegenerateState("single-eigenvalue state cannot absorb a nonzero off-block defect")
        return np.zeros_like(off)
    lam = state.distinct_eigenvalues
    proj = state.spectral_projections
    ell = np.zeros_like(off)
    for i, ei in enumerate(proj):
        for j, ej in enumerate(proj):
            if i != j:
                ell = ell + (ei @ off @ ej) / (lam[j] - lam[i])
    # exact for Hermitian t; removes the roundoff-level Hermitian part
    return 0.5 * (ell - adjoint(ell))


def solve_perturbation(lmap: Superoperator, state: FaithfulState) -> np.ndarray:
    """Canonical skew-adjoint ``ell`` such that ``L + [ell, .]`` matches ``omega o E_A L E_A``.

    ``T = L_*(Omega) - E_A(L_*(Omega))`` is fed to :func:`commutator_solution`.
    """
    _check_state(lmap, state)
    defect = hermitian_part(dual(lmap)(state.density))
    return commutator_solution(state, defect)


def perturb(lmap: Superoperator, ell: np.ndarray) -> Superoperator:
    return lmap + commutator_map(ell)


def _balance(kraus: Sequence[np.ndarray]) -> float:
    left = sum(v @ adjoint(v) for v in kraus)
    right = sum(adjoint(v) @ v for v in kraus)
    return float(np.linalg.norm(left - right))


def build_preserving(state: FaithfulState, kraus: Sequence[np.ndarray]) -> LindbladGenerator:
    """Unital, ``omega``-preserving generator with Kraus part ``Omega^-1/2 v_j``.

    Requires ``sum v v* = sum v* v``. The drift is ``-Q(1)/2 + ell`` with ``ell``
    from :func:`solve_perturbation` applied to the unperturbed part.
    """
    kraus = [as_matrix(v) for v in kraus]
    if not kraus:
        raise UnbalancedKraus("at least one Kraus operator is required")
    if any(v.shape != (state.r, state.r) for v in kraus):
        raise DimensionMismatch("Kraus operators must match the state dimension")
    imbalance = _balance(kraus)
    if imbalance > BALANCE_TOL:
        raise UnbalancedKraus(f"sum v v* != sum v* v (difference {imbalance:.3e})")

    inv_root = state.inv_sqrt
    scaled = tuple(inv_root @ v for v in kraus)
    q = kraus_map(scaled)
    q1 = hermitian_part(q(np.eye(state.r, dtype=np.complex128)))
    ell = solve_perturbation(unperturbed(q), state)
    drift = -0.5 * q1 + ell
    return LindbladGenerator(r=state.r, kraus=scaled, drift=drift, perturbation=ell)


@dataclass(frozen=True)
class PerturbationDemo:
    before: Superoperator
    ell: np.ndarray
    after: Superoperator
    defect_before: float
    defect_after: float
    shifted_density: np.ndarray


def demo_3_19(state: FaithfulState, epsilon: float) -> PerturbationDemo:
    """An unperturbed generator that moves ``omega`` and the commutator that repairs it.

    ``P(x) = omega'(x) 1`` with ``Omega' = Omega + epsilon (v + v*)`` for a rank-one
    partial isometry ``v`` from the lowest to the next eigenspace; ``L = P - id``.
    """
    if state.is_tracial:
        raise TracialState("the demo needs a state with at least two distinct eigenvalues")
    e1, e2 = state.spectral_projections[0], state.spectral_projections[1]
    xi = herm_eig(e1).eigenvectors[:, -1]
    eta = herm_eig(e2).eigenvectors[:, -1]
    v = np.outer(eta, np.conj(xi))
    shifted = state.density + epsilon * (v + adjoint(v))
    if herm_eig(hermitian_part(shifted)).eigenvalues[0] <= 0:
        raise EpsilonTooLarge(f"epsilon = {epsilon} makes the shifted density non-positive")

    before = functional_map(shifted) - identity_map(state.r)
    ell = solve_perturbation(before, state)
    after = perturb(before, ell)
    return PerturbationDemo(
        before=before,
        ell=ell,
        after=after,
        defect_before=invariance_defect(before, state),
        defect_after=invariance_defect(after, state),
        shifted_density=shifted,
    )


def generator_to_json(gen: LindbladGenerator, state: FaithfulState) -> dict:
    return {
        "r": gen.r,
        "kraus": [matrix_to_json(v) for v in gen.kraus],
        "drift": matrix_to_json(gen.drift),
        "state": _states.to_json(state),
    }


def generator_from_json(obj: dict) -> tuple[LindbladGenerator, FaithfulState]:
    r = int(obj["r"])
    gen = make_generator([matrix_from_json(v) for v in obj["kraus"]], matrix_from_json(obj["drift"]))
    if gen.r != r:
        raise DimensionMismatch(f"drift dimension {gen.r} does not match r = {r}")
    state = _states.from_json(obj["state"])
    if state.r != r:
        raise DimensionMismatch(f"state dimension {state.r} does not match r = {r}")
    return gen, state
