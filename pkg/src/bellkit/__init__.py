"""Bell-functional toolkit.

Dense linear algebra, the three-setting correlation Bell family, qubit
extraction channels with validity certificates, analytic robustness bounds,
non-commutative moment relaxations, a dense primal-dual SDP solver, and the
high-level certification studies (fidelity, randomness, commutation maxima).
"""

__version__ = "0.1.0"

from . import bellmodel, bounds, certify, extraction, linalg, moments, npa, sampling, sdp

__all__ = [
    "__version__",
    "bellmodel",
    "bounds",
    "certify",
    "extraction",
    "linalg",
    "moments",
    "npa",
    "sampling",
    "sdp",
]
