"""Kinetic simulation and metastability diagnostics for the hyperbolic Allen-Cahn equation."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AdmissibilityError,
    BlowUpError,
    CertificateError,
    ConfigError,
    HyperACError,
    InvalidPotentialError,
)
from .potential import QUARTIC, DampingSpec, PotentialSpec, compute_c0, psi  # noqa: E402
from .kinetics import (  # noqa: E402
    Grid1D,
    InitialData,
    KineticState,
    Observer,
    SchemeParams,
    build_initial_state,
    check_compatibility,
    derive_params,
    reconstruct,
    run,
    step,
)

__all__ = [
    "AdmissibilityError",
    "BlowUpError",
    "CertificateError",
    "ConfigError",
    "DampingSpec",
    "Grid1D",
    "HyperACError",
    "InitialData",
    "InvalidPotentialError",
    "KineticState",
    "Observer",
    "PotentialSpec",
    "QUARTIC",
    "SchemeParams",
    "build_initial_state",
    "check_compatibility",
    "compute_c0",
    "derive_params",
    "psi",
    "reconstruct",
    "run",
    "step",
]
