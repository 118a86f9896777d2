"""Closed-form reference generators used by the CLI and the test-suite."""
from __future__ import annotations

import math

import numpy as np

from .generator import LindbladGenerator
from .states import FaithfulState


def depolarizing(state: FaithfulState) -> LindbladGenerator:
    """``L(x) = omega(x) 1 - x`` written in Lindblad form.

    ``omega(x) 1 = sum_ij v_ij x v_ij*`` with ``v_ij = sqrt(lam_j) |b_i><b_j|`` over
    the state's eigenbasis; the drift ``-1/2`` supplies ``-x``.
    """
    r = state.r
    b = state.basis
    kraus = []
    for j, lam in enumerate(state.eigenvalue_list):
        for i in range(r):
            kraus.append(math.sqrt(lam) * np.outer(b[:, i], np.conj(b[:, j])))
    return LindbladGenerator(r=r, kraus=tuple(kraus), drift=-0.5 * np.eye(r, dtype=np.complex128))


def dephasing(r: int) -> LindbladGenerator:
    """``L(x) = u x u* - x`` with the diagonal clock ``u = diag(1, -1, 1, ...)``; not ergodic."""
    u = np.diag([(-1.0) ** k for k in range(r)]).astype(np.complex128)
    return LindbladGenerator(r=r, kraus=(u,), drift=-0.5 * np.eye(r, dtype=np.complex128))
