"""Faithful states on M_r(C) and their centralizer data."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionMismatch, NotAState, NotUnitary
from .matrixcore import adjoint, as_matrix, herm_eig, hermitian_part

SUM_TOL = 1e-12
UNITARY_TOL = 1e-10
# eigenvalues closer than this relative gap share one spectral projection
GROUPING_TOL = 1e-9


@dataclass(frozen=True)
class FaithfulState:
    """A state ``omega(x) = trace(density @ x)`` with strictly positive density.

    ``eigenvalue_list`` is multiplicity-expanded and decreasing;
    ``distinct_eigenvalues`` is strictly increasing and pairs index-wise with
    ``spectral_projections``.
    """

    r: int
    density: np.ndarray
    eigenvalue_list: tuple[float, ...]
    basis: np.ndarray
    distinct_eigenvalues: tuple[float, ...]
    spectral_projections: tuple[np.ndarray, ...]

    @property
    def is_tracial(self) -> bool:
        return len(self.distinct_eigenvalues) == 1

    def power(self, p: float) -> np.ndarray:
        """``density ** p`` from the stored spectral data."""
        return sum(lam ** p * e for lam, e in zip(self.distinct_eigenvalues, self.spectral_projections))

    @property
    def sqrt(self) -> np.ndarray:
        return self.power(0.5)

    @property
    def inv_sqrt(self) -> np.ndarray:
        return self.power(-0.5)

    def __call__(self, x: np.ndarray) -> complex:
        return trace_pair(self.density, x)


def _group(values: np.ndarray, vectors: np.ndarray) -> tuple[tuple[float, ...], tuple[np.ndarray, ...]]:
    """Merge ascending eigenvalues within the grouping tolerance into projections."""
    groups: list[list[int]] = []
    for k, lam in enumerate(values):
        if groups and abs(lam - values[groups[-1][0]]) <= GROUPING_TOL * max(abs(lam), 1e-300):
            groups[-1].append(k)
        else:
            groups.append([k])
    distinct = tuple(float(np.mean(values[g])) for g in groups)
    projections = tuple(vectors[:, g] @ adjoint(vectors[:, g]) for g in groups)
    return distinct, projections


def make_state(eigenvalue_list: Sequence[float], basis: np.ndarray | None = None) -> FaithfulState:
    """Build ``basis @ diag(eigenvalue_list) @ basis*``.

    The list must be strictly positive, non-increasing and sum to one within
    1e-12. ``basis`` defaults to the identity.
    """
    lam = np.asarray(eigenvalue_list, dtype=float)
    if lam.ndim != 1 or lam.size < 2:
        raise NotAState("eigenvalue list must have at least two entries")
    r = lam.size
    if np.any(lam <= 0):
        raise NotAState("eigenvalues must be strictly positive")
    if np.any(np.diff(lam) > 0):
        raise NotAState("eigenvalue list must be non-increasing")
    if abs(lam.sum() - 1.0) > SUM_TOL:
        raise NotAState(f"eigenvalues must sum to 1 (sum = {lam.sum():.15g})")

    u = np.eye(r, dtype=np.complex128) if basis is None else as_matrix(basis)
    if u.shape != (r, r):
        raise DimensionMismatch(f"basis shape {u.shape} does not match r = {r}")
    if np.linalg.norm(adjoint(u) @ u - np.eye(r)) > UNITARY_TOL:
        raise NotUnitary("basis must be unitary")

    density = hermitian_part((u * lam) @ adjoint(u))
    ascending = lam[::-1]
    distinct, projections = _group(ascending, u[:, ::-1])
    return FaithfulState(
        r=r,
        density=density,
        eigenvalue_list=tuple(float(x) for x in lam),
        basis=u,
        distinct_eigenvalues=distinct,
        spectral_projections=projections,
    )


def state_from_density(density: np.ndarray) -> FaithfulState:
    """Recover a ``FaithfulState`` from a raw density matrix via ``herm_eig``."""
    d = as_matrix(density)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise DimensionMismatch("density must be square")
    vals, vecs = herm_eig(d)
    order = np.arange(vals.size)[::-1]
    lam = vals[order]
    if abs(lam.sum() - 1.0) > 1e-10:
        raise NotAState("density must have trace 1")
    lam = lam / lam.sum()
    return make_state(lam, vecs[:, order])


def centralizer_expectation(state: FaithfulState, x: np.ndarray) -> np.ndarray:
    """``sum_k e_k x e_k`` over the minimal spectral projections of the density."""
    x = as_matrix(x)
    if x.shape != (state.r, state.r):
        raise DimensionMismatch(f"operator shape {x.shape} does not match r = {state.r}")
    if state.is_tracial:
        return x.copy()
    return sum(e @ x @ e for e in state.spectral_projections)


def trace_pair(d: np.ndarray, x: np.ndarray) -> complex:
    """Bilinear trace pairing ``trace(d @ x)`` (no complex conjugation)."""
    d = as_matrix(d)
    x = as_matrix(x)
    if d.shape != x.shape or d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise DimensionMismatch(f"cannot pair shapes {d.shape} and {x.shape}")
    return complex(np.sum(d * x.T))


def to_json(state: FaithfulState) -> dict:
    return {
        "r": state.r,
        "eigenvalue_list": list(state.eigenvalue_list),
        "basis": matrix_to_json(state.basis),
    }


def from_json(obj: dict) -> FaithfulState:
    r = int(obj["r"])
    lam = [float(v) for v in obj["eigenvalue_list"]]
    if len(lam) != r:
        raise NotAState(f"eigenvalue_list has {len(lam)} entries, expected r = {r}")
    basis = matrix_from_json(obj["basis"]) if obj.get("basis") is not None else None
    return make_state(lam, basis)


def matrix_to_json(a: np.ndarray) -> list:
    a = as_matrix(a)
    return [[[float(z.real), float(z.imag)] for z in row] for row in a]


def matrix_from_json(rows) -> np.ndarray:
    a = np.array([[complex(pair[0], pair[1]) for pair in row] for row in rows], dtype=np.complex128)
    if a.ndim != 2:
        raise ValueError("matrix must be a list of rows")
    return a
