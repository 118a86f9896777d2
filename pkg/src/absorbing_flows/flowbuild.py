"""Pure, state-preserving CP semigroups with prescribed eigenvalue list and index."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .analysis import PurityCertificate, purity_verdict
from .errors import ConstructionFailed, IndexOutOfRange, NotAState
from .generator import (
    LindbladGenerator,
    as_superoperator,
    build_preserving,
    generator_to_json,
    invariance_defect,
)
from .matrixcore import gram_rank
from .states import FaithfulState, make_state
from .weyl import WeylPair, admissible_basis, clock_shift, weyl_family

TRACIAL_SPREAD_TOL = 1e-10
INVARIANCE_TOL = 1e-9
RANK_TOL = 1e-10


class Branch(str, Enum):
    NON_TRACIAL = "NonTracial"
    TRACIAL = "Tracial"


@dataclass(frozen=True)
class MetricOperatorSpace:
    basis_ops: tuple[np.ndarray, ...]
    dim: int
    intersects_scalars: bool


@dataclass(frozen=True)
class PureFlowModel:
    generator: LindbladGenerator
    state: FaithfulState
    certificate: PurityCertificate
    index: int
    branch: Branch
    kraus_selection: tuple[tuple[int, int], ...]
    weyl: WeylPair
    invariance_defect: float

    def to_json(self) -> dict:
        obj = generator_to_json(self.generator, self.state)
        obj.update(
            {
                "certificate": self.certificate.to_json(),
                "index": self.index,
                "branch": self.branch.value,
                "kraus_selection": [list(p) for p in self.kraus_selection],
            }
        )
        return obj


def canonical_skew(r: int) -> np.ndarray:
    """``E_01 - E_10``, the fixed non-scalar skew-adjoint operator for the tracial branch."""
    t = np.zeros((r, r), dtype=np.complex128)
    t[0, 1] = 1.0
    t[1, 0] = -1.0
    return t


def select_kraus(r: int, n: int) -> list[tuple[int, int]]:
    """``(1, 0)`` first, then the other nonzero index pairs in lexicographic order."""
    if not 1 <= n <= r * r - 1:
        raise IndexOutOfRange(f"index n = {n} must satisfy 1 <= n <= r^2 - 1 = {r * r - 1}")
    rest = [(i, j) for i in range(r) for j in range(r) if (i, j) not in ((0, 0), (1, 0))]
    return [(1, 0)] + rest[: n - 1]


def is_constant_list(eigenvalue_list: Sequence[float]) -> bool:
    lam = np.asarray(eigenvalue_list, dtype=float)
    return float(lam.max() - lam.min()) <= TRACIAL_SPREAD_TOL * float(lam.max())


def index(gen: LindbladGenerator, state: FaithfulState | None = None, tol: float = RANK_TOL) -> tuple[int, MetricOperatorSpace]:
    """Dimension of the Kraus span modulo scalars: ``rank(kraus + [1]) - 1``.

    Agrees with ``dim span(kraus)`` whenever the span meets the scalars only
    at zero, which ``intersects_scalars`` reports.
    """
    ops = tuple(gen.kraus)
    if not ops:
        return 0, MetricOperatorSpace(basis_ops=(), dim=0, intersects_scalars=False)
    ident = np.eye(gen.r, dtype=np.complex128)
    dim = gram_rank(ops, tol)
    augmented = gram_rank(list(ops) + [ident], tol)
    space = MetricOperatorSpace(basis_ops=ops, dim=dim, intersects_scalars=augmented == dim)
    return augmented - 1, space


def _tracial_generator(words: Sequence[np.ndarray], t: np.ndarray) -> LindbladGenerator:
    r = t.shape[0]
    n = len(words)
    drift = -0.5 * n * np.eye(r, dtype=np.complex128) + t
    return LindbladGenerator(r=r, kraus=tuple(words), drift=drift, perturbation=t)


def build_theorem51(eigenvalue_list: Sequence[float], n: int, *, seed: int | None = None) -> PureFlowModel:
    """Certified pure generator preserving ``diag(eigenvalue_list)`` with index ``n``.

    Non-constant list: clock/shift pair admissible for the density itself,
    Kraus words ``Omega^-1/2 w_ij`` and the perturbed drift from
    :func:`build_preserving`. Constant list: clock/shift admissible for
    ``E_01 - E_10`` and ``L(x) = sum w x w* - n x + [T, x]``.
    """
    lam = [float(x) for x in eigenvalue_list]
    r = len(lam)
    if r < 2:
        raise NotAState("need at least two eigenvalues")
    selection = select_kraus(r, n)
    state = make_state(lam)

    kwargs = {} if seed is None else {"seed": seed}
    if is_constant_list(lam):
        branch = Branch.TRACIAL
        t = canonical_skew(r)
        pair = clock_shift(r, admissible_basis(t, **kwargs))
        family = weyl_family(pair)
        gen = _tracial_generator([family[p] for p in selection], t)
    else:
        branch = Branch.NON_TRACIAL
        pair = clock_shift(r, admissible_basis(state.density, **kwargs))
        family = weyl_family(pair)
        gen = build_preserving(state, [family[p] for p in selection])

    defect = invariance_defect(as_superoperator(gen), state)
    if defect > INVARIANCE_TOL:
        raise ConstructionFailed(f"invariance defect {defect:.3e} exceeds {INVARIANCE_TOL:g}")
    certificate = purity_verdict(gen, state)
    if not certificate.pure:
        raise ConstructionFailed(f"purity certificate failed: {certificate}")
    idx, _ = index(gen, state)
    if idx != n:
        raise ConstructionFailed(f"index {idx} differs from requested {n}")
    return PureFlowModel(
        generator=gen,
        state=state,
        certificate=certificate,
        index=idx,
        branch=branch,
        kraus_selection=tuple(selection),
        weyl=pair,
        invariance_defect=defect,
    )


def nonconstant_list(r: int) -> list[float]:
    """The fixed non-constant list ``(r, r-1, ..., 1) / (r (r+1) / 2)`` used by sweeps."""
    weights = np.arange(r, 0, -1, dtype=float)
    return list(weights / weights.sum())


def constant_list(r: int) -> list[float]:
    return [1.0 / r] * r
