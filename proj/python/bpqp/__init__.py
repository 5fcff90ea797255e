# SPDX-License-Identifier: Apache-2.0
"""Differentiable convex optimization layers backed by the C++ core."""

from _bpqp import (  # noqa: F401
    GradientBundle,
    LayerTape,
    QpProblem,
    SocpTape,
    Solution,
    SolverSettings,
    attach_external_solution,
    cosine_similarity,
    derive_seed,
    exact_backward_oracle,
    gen_lp,
    gen_qp,
    gen_socp,
    gradient_agreement,
    kkt_residual_norm,
    lp_backward,
    lp_forward,
    mvo_backward,
    mvo_forward,
    qp_backward,
    qp_forward,
    socp_backward,
    socp_forward,
    solve,
)

__all__ = [
    "GradientBundle",
    "LayerTape",
    "QpProblem",
    "SocpTape",
    "Solution",
    "SolverSettings",
    "attach_external_solution",
    "cosine_similarity",
    "derive_seed",
    "exact_backward_oracle",
    "gen_lp",
    "gen_qp",
    "gen_socp",
    "gradient_agreement",
    "kkt_residual_norm",
    "lp_backward",
    "lp_forward",
    "mvo_backward",
    "mvo_forward",
    "qp_backward",
    "qp_forward",
    "socp_backward",
    "socp_forward",
    "solve",
]

__version__ = "0.1.0"
