"""Fixed points, purity certificates, semigroup evolution and return to equilibrium."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptyInput, InconsistentVerdict, NoInvariantState, NotADensity, NotInvariant
from .generator import (
    LindbladGenerator,
    Superoperator,
    as_superoperator,
    choi_positive,
    dual,
    invariance_defect,
)
from .matrixcore import adjoint, as_matrix, expm, herm_eig, hermitian_part, null_space, trace_norm
from .states import FaithfulState
from .weyl import commutant_basis

__all__ = [
    "ConvergenceReport",
    "GapEstimate",
    "PurityCertificate",
    "choi_positive",
    "commutant",
    "contraction_check",
    "evolve",
    "fixed_point_algebra",
    "l2_operator_norms",
    "purity_verdict",
    "spectral_gap",
    "stationary_density",
    "trajectory",
    "trajectories",
]

KERNEL_TOL = 1e-9
INVARIANCE_TOL = 1e-8
UNITAL_TOL = 1e-8
DEFAULT_M_MAX = 64
GAP_SLACK = 0.05
DENSITY_TOL = 1e-10
UNDERFLOW_GUARD = 1e-250
# trace distances below this are roundoff and carry no decay information
NOISE_FLOOR = 1e-12


@dataclass(frozen=True)
class PurityCertificate:
    ergodic: bool
    irreducible: bool
    fixed_point_dim: int
    commutant_dim: int
    spectral_gap: float
    gap_constant: float
    method_notes: str = ""

    @property
    def pure(self) -> bool:
        return self.ergodic and self.irreducible and self.spectral_gap > 0

    def to_json(self) -> dict:
        return {
            "pure": self.pure,
            "ergodic": self.ergodic,
            "irreducible": self.irreducible,
            "fixed_point_dim": self.fixed_point_dim,
            "commutant_dim": self.commutant_dim,
            "spectral_gap": self.spectral_gap,
            "gap_constant": self.gap_constant,
            "method_notes": self.method_notes,
        }


@dataclass(frozen=True)
class GapEstimate:
    epsilon: float
    constant: float
    spectral_radius: float
    power_norms: tuple[float, ...]


@dataclass(frozen=True)
class ConvergenceReport:
    times: np.ndarray
    distances: np.ndarray
    gap_bound_curve: np.ndarray
    initial_state: np.ndarray
    epsilon: float
    constant: float

    @property
    def final_distance(self) -> float:
        return float(self.distances[-1])

    def dominated(self, floor: float = NOISE_FLOOR) -> bool:
        return bool(np.all(self.distances <= self.gap_bound_curve * (1 + 1e-12) + floor))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,trace_distance,gap_bound\n")
        for t, d, b in zip(self.times, self.distances, self.gap_bound_curve):
            buf.write(f"{t:.17g},{d:.17g},{b:.17g}\n")
        return buf.getvalue()


def fixed_point_algebra(lmap: Superoperator, tol: float = KERNEL_TOL) -> list[np.ndarray]:
    """Hilbert-Schmidt orthonormal basis of ``{x : L(x) = 0}``."""
    r = lmap.r
    return [v.reshape(r, r) for v in null_space(lmap.matrix, tol)]


def commutant(ops: Sequence[np.ndarray], tol: float = KERNEL_TOL) -> list[np.ndarray]:
    """Hilbert-Schmidt orthonormal basis of the joint commutant of ``ops``."""
    ops = list(ops)
    if not ops:
        raise EmptyInput("commutant needs at least one operator")
    return commutant_basis(ops, tol)


def evolve(lmap: Superoperator, t: float) -> Superoperator:
    """``P_t = exp(t L)``."""
    if t < 0:
        raise ValueError("evolution time must be nonnegative")
    return Superoperator(lmap.r, expm(t * lmap.matrix))


def _omega_inner(state: FaithfulState, x: np.ndarray, y: np.ndarray) -> complex:
    # <x, y> = omega(y* x)
    return complex(np.sum(state.density * (adjoint(y) @ x).T))


def mean_zero_basis(state: FaithfulState) -> list[np.ndarray]:
    """Orthonormal basis of ``{x : omega(x) = 0}`` for ``<x, y> = omega(y* x)``.

    Modified Gram-Schmidt (two passes) over ``E_ij - omega(E_ij) 1`` in
    row-major order; the one dependent direction is dropped.
    """
    r = state.r
    ident = np.eye(r, dtype=np.complex128)
    basis: list[np.ndarray] = []
    for i in range(r):
        for j in range(r):
            e = np.zeros((r, r), dtype=np.complex128)
            e[i, j] = 1.0
            x = e - state.density[j, i] * ident
            for _ in range(2):
                for b in basis:
                    x = x - _omega_inner(state, x, b) * b
            norm = math.sqrt(max(_omega_inner(state, x, x).real, 0.0))
            if norm > 1e-10:
                basis.append(x / norm)
    return basis


def _coefficients(lmap: Superoperator, state: FaithfulState, basis: Sequence[np.ndarray]) -> np.ndarray:
    """Matrix ``M[i, j] = <L b_j, b_i>`` of ``L`` in an orthonormal basis."""
    n = len(basis)
    images = [lmap(b) for b in basis]
    m = np.empty((n, n), dtype=np.complex128)
    for j, img in enumerate(images):
        for i, b in enumerate(basis):
            m[i, j] = _omega_inner(state, img, b)
    return m


def _require_invariant(lmap: Superoperator, state: FaithfulState) -> None:
    defect = invariance_defect(lmap, state)
    if defect > INVARIANCE_TOL:
        raise NotInvariant(f"omega is not invariant (defect {defect:.3e})")


def spectral_gap(lmap: Superoperator, state: FaithfulState, m_max: int = DEFAULT_M_MAX) -> GapEstimate:
    """Decay rate of ``exp(t L)`` on the mean-zero subspace by Gelfand's formula.

    With ``A = exp(L_0)`` in an ``omega``-orthonormal basis, the spectral radius
    is bounded above by ``||A^m||^(1/m)`` for every ``m``; the smallest such
    bound over ``m <= m_max`` gives ``epsilon = -log(rho)`` (clamped at 0) and
    ``C = max_m ||A^m|| e^(m epsilon)``.
    """
    if m_max < 1:
        raise ValueError("m_max must be positive")
    _require_invariant(lmap, state)
    basis = mean_zero_basis(state)
    a = expm(_coefficients(lmap, state, basis))
    norms = [1.0]
    power = np.eye(a.shape[0], dtype=np.complex128)
    for _ in range(m_max):
        power = power @ a
        norm = float(np.linalg.norm(power, 2))
        if norm < UNDERFLOW_GUARD:
            break
        norms.append(norm)
    if len(norms) == 1:
        # exp(L_0) itself is below the guard: decay faster than any tracked rate
        norm = float(np.linalg.norm(a, 2))
        epsilon = -math.log(norm) if norm > 0 else -math.log(UNDERFLOW_GUARD)
        return GapEstimate(epsilon=epsilon, constant=1.0, spectral_radius=math.exp(-epsilon), power_norms=(1.0,))
    rates = [-math.log(norms[m]) / m for m in range(1, len(norms))]
    epsilon = max(max(rates), 0.0)
    constant = max(math.exp(math.log(norms[m]) + m * epsilon) for m in range(len(norms)))
    return GapEstimate(epsilon=epsilon, constant=constant, spectral_radius=math.exp(-epsilon), power_norms=tuple(norms))


def l2_operator_norms(lmap: Superoperator, state: FaithfulState, t_samples: Sequence[float]) -> list[float]:
    """Operator norms of ``P_t`` on ``L2(M, omega)`` at each sampled time."""
    basis = [np.eye(state.r, dtype=np.complex128)] + mean_zero_basis(state)
    m = _coefficients(lmap, state, basis)
    return [float(np.linalg.norm(expm(t * m), 2)) for t in t_samples]


def contraction_check(
    lmap: Superoperator, state: FaithfulState, t_samples: Sequence[float], tol: float = 1e-9
) -> bool:
    """True iff ``||P_t||`` on ``L2(M, omega)`` is at most ``1 + tol`` at every sample."""
    _require_invariant(lmap, state)
    return all(n <= 1.0 + tol for n in l2_operator_norms(lmap, state, t_samples))


def purity_verdict(
    gen: LindbladGenerator,
    state: FaithfulState,
    *,
    tol: float = KERNEL_TOL,
    m_max: int = DEFAULT_M_MAX,
) -> PurityCertificate:
    """Ergodicity, irreducibility and spectral gap for a generator with a faithful invariant state.

    Ergodicity (one-dimensional kernel of ``L``) and irreducibility (scalar
    commutant of ``{k, k*, v_j, v_j*}``) must agree here; disagreement raises
    ``InconsistentVerdict``.
    """
    lmap = as_superoperator(gen)
    unital = gen.unital_defect
    defect = invariance_defect(lmap, state)
    if unital > UNITAL_TOL or defect > INVARIANCE_TOL:
        raise NoInvariantState(
            f"generator is not unital and omega-preserving (L(1) defect {unital:.3e}, invariance defect {defect:.3e})"
        )
    fixed_dim = len(fixed_point_algebra(lmap, tol))
    comm_dim = len(commutant(gen.operator_set(), tol))
    ergodic = fixed_dim == 1
    irreducible = comm_dim == 1
    if ergodic != irreducible:
        raise InconsistentVerdict(f"fixed-point dimension {fixed_dim} but commutant dimension {comm_dim}")
    gap = spectral_gap(lmap, state, m_max)
    notes = (
        f"kernel tol {tol:g}; Gelfand bound over m <= {m_max}; "
        f"unital defect {unital:.2e}; invariance defect {defect:.2e}"
    )
    return PurityCertificate(
        ergodic=ergodic,
        irreducible=irreducible,
        fixed_point_dim=fixed_dim,
        commutant_dim=comm_dim,
        spectral_gap=gap.epsilon,
        gap_constant=gap.constant,
        method_notes=notes,
    )


def validate_density(rho: np.ndarray, r: int) -> np.ndarray:
    rho = as_matrix(rho)
    if rho.shape != (r, r):
        raise NotADensity(f"density shape {rho.shape} does not match r = {r}")
    if np.linalg.norm(rho - adjoint(rho)) > DENSITY_TOL * max(1.0, np.linalg.norm(rho)):
        raise NotADensity("density must be Hermitian")
    rho = hermitian_part(rho)
    if abs(np.trace(rho) - 1.0) > DENSITY_TOL:
        raise NotADensity(f"density must have trace 1 (trace = {np.trace(rho).real:.12g})")
    if herm_eig(rho).eigenvalues[0] < -DENSITY_TOL:
        raise NotADensity("density must be positive semidefinite")
    return rho


def _normalize_times(times: Sequence[float]) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise ValueError("time grid must be a nonempty 1-D sequence")
    if np.any(t < 0) or np.any(np.diff(t) <= 0):
        raise ValueError("time grid must be nonnegative and strictly increasing")
    if t[0] != 0.0:
        t = np.concatenate([[0.0], t])
    return t


def trajectories(
    gen: LindbladGenerator,
    state: FaithfulState,
    rho0s: Sequence[np.ndarray],
    times: Sequence[float],
    *,
    gap: GapEstimate | None = None,
    slack: float = GAP_SLACK,
) -> list[ConvergenceReport]:
    """Trace-norm distances ``||rho o P_t - omega||`` for several initial densities.

    The time grid always starts at 0 (prepended when absent). ``exp(t L)`` is
    computed once per time point and shared by every initial density. When the
    state is invariant the fitted bound is ``C' exp(-(1 - slack) eps t)`` with the
    smallest ``C'`` dominating the computed distances that lie above
    ``NOISE_FLOOR``; below it the distance is roundoff, so domination is only
    meaningful up to that absolute floor (see :meth:`ConvergenceReport.dominated`).
    """
    lmap = as_superoperator(gen)
    rhos = [validate_density(rho, gen.r) for rho in rho0s]
    t = _normalize_times(times)
    if gap is None:
        try:
            gap = spectral_gap(lmap, state)
        except NotInvariant:
            gap = None
    epsilon = gap.epsilon if gap is not None else 0.0

    dists = np.zeros((len(rhos), t.size))
    r = gen.r
    if invariance_defect(lmap, state) <= INVARIANCE_TOL:
        # rho o P_t - omega = exp(t L_*)(rho - Omega) stays traceless; evolving it with
        # L_* restricted to traceless matrices keeps roundoff decaying with the signal
        flat_ident = np.eye(r, dtype=np.complex128).reshape(1, -1)
        b = np.column_stack(null_space(flat_ident))
        gen0 = adjoint(b) @ dual(lmap).matrix @ b
        devs = np.column_stack([adjoint(b) @ (rho - state.density).reshape(-1) for rho in rhos])
        for i, ti in enumerate(t):
            moved = b @ (expm(float(ti) * gen0) @ devs)
            for k in range(len(rhos)):
                dists[k, i] = trace_norm(hermitian_part(moved[:, k].reshape(r, r)))
    else:
        for i, ti in enumerate(t):
            predual = dual(evolve(lmap, float(ti)))
            for k, rho in enumerate(rhos):
                evolved = hermitian_part(predual(rho))
                dists[k, i] = trace_norm(evolved - state.density)

    rate = (1.0 - slack) * epsilon
    reports = []
    for k, rho in enumerate(rhos):
        d = dists[k]
        above = d > NOISE_FLOOR
        c_fit = float(np.max(d[above] * np.exp(rate * t[above]))) if above.any() else 0.0
        reports.append(
            ConvergenceReport(
                times=t,
                distances=d,
                gap_bound_curve=c_fit * np.exp(-rate * t),
                initial_state=rho,
                epsilon=epsilon,
                constant=c_fit,
            )
        )
    return reports


def trajectory(
    gen: LindbladGenerator,
    state: FaithfulState,
    rho0: np.ndarray,
    times: Sequence[float],
    *,
    gap: GapEstimate | None = None,
    slack: float = GAP_SLACK,
) -> ConvergenceReport:
    return trajectories(gen, state, [rho0], times, gap=gap, slack=slack)[0]


def stationary_density(gen: LindbladGenerator, state: FaithfulState, tol: float = KERNEL_TOL) -> np.ndarray | None:
    """A stationary density other than ``omega``'s, or ``None`` for ergodic generators.

    Takes a non-scalar Hermitian fixed point, its top spectral projection ``p``
    (again fixed, the fixed points forming an algebra), and returns
    ``p Omega p / omega(p)``.
    """
    lmap = as_superoperator(gen)
    r = gen.r
    ident = np.eye(r, dtype=np.complex128) / math.sqrt(r)
    for x in fixed_point_algebra(lmap, tol):
        for h in (hermitian_part(x), hermitian_part(1j * x)):
            h = h - np.vdot(ident, h) * ident
            if np.linalg.norm(h) < 1e-6:
                continue
            vals, vecs = herm_eig(h / np.linalg.norm(h))
            top = vals >= vals[-1] - 1e-6
            p = vecs[:, top] @ adjoint(vecs[:, top])
            rho = p @ state.density @ p
            return hermitian_part(rho / np.trace(rho).real)
    return None
