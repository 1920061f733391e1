"""Numerical kernels: ellipsoid method, scalar Newton, energy-beamforming SDP, dual loop."""

from .dual import SchemeResult, solve_average_constrained
from .ellipsoid import EllipsoidStatus, ellipsoid_minimize
from .newton import newton_maximize_scalar
from .sdp import (
    SdpConvergenceError,
    SdpSolution,
    closed_form_dual,
    batch_energy_beamforming,
    closed_form_two_user_ebf,
    dual_certificate,
    randomize_rank_one,
    randomize_rank_one_batch,
    solve_sdp_dual,
    two_user_ebf_batch,
    weight_matrix,
    weighted_energy_beamforming,
)

__all__ = [
    "EllipsoidStatus",
    "SchemeResult",
    "SdpConvergenceError",
    "SdpSolution",
    "closed_form_dual",
    "batch_energy_beamforming",
    "closed_form_two_user_ebf",
    "dual_certificate",
    "ellipsoid_minimize",
    "newton_maximize_scalar",
    "randomize_rank_one",
    "randomize_rank_one_batch",
    "solve_average_constrained",
    "solve_sdp_dual",
    "two_user_ebf_batch",
    "weight_matrix",
    "weighted_energy_beamforming",
]
