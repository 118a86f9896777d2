"""Construction, certification and simulation of state-preserving pure quantum dynamical semigroups."""
from __future__ import annotations

from .analysis import (
    ConvergenceReport,
    GapEstimate,
    PurityCertificate,
    purity_verdict,
    spectral_gap,
    stationary_density,
    trajectories,
    trajectory,
)
from .errors import FlowError
from .flowbuild import Branch, PureFlowModel, build_theorem51, index
from .generator import (
    LindbladGenerator,
    Superoperator,
    as_superoperator,
    build_preserving,
    criterion_38,
    dual,
    invariance_defect,
    make_generator,
    sharp,
)
from .states import FaithfulState, make_state
from .weyl import WeylPair, admissible_basis, clock_shift, weyl_family

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "ConvergenceReport",
    "FaithfulState",
    "FlowError",
    "GapEstimate",
    "LindbladGenerator",
    "PureFlowModel",
    "PurityCertificate",
    "Superoperator",
    "WeylPair",
    "admissible_basis",
    "as_superoperator",
    "build_preserving",
    "build_theorem51",
    "clock_shift",
    "criterion_38",
    "dual",
    "index",
    "invariance_defect",
    "make_generator",
    "make_state",
    "purity_verdict",
    "sharp",
    "spectral_gap",
    "stationary_density",
    "trajectories",
    "trajectory",
    "weyl_family",
]
