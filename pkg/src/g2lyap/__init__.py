"""Certify G2 monodromy data, predict Lyapunov spectra from weights, and estimate them by Monte Carlo."""

__version__ = "0.1.0"

from .engine import (  # noqa: E402
    EstimationResult,
    SpectrumHints,
    WalkConfig,
    analyze_spectrum,
    coupled_estimate,
    estimate_exponents,
)
from .exact_linalg import ExactMatrix, signature  # noqa: E402
from .monodromy import CocycleGenerators, load_builtin, verify_invariance  # noqa: E402
from .roots import predict_spectrum, recover_lyapunov_vector, representation_weights  # noqa: E402

__all__ = [
    "CocycleGenerators",
    "EstimationResult",
    "ExactMatrix",
    "SpectrumHints",
    "WalkConfig",
    "analyze_spectrum",
    "coupled_estimate",
    "estimate_exponents",
    "load_builtin",
    "predict_spectrum",
    "recover_lyapunov_vector",
    "representation_weights",
    "signature",
    "verify_invariance",
]
