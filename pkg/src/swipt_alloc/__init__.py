"""SWIPT downlink resource allocation on a small dense conic solver.

Two allocator families share one interior-point core:

* energy-efficiency multi-objective beamforming for a separated
  information/harvesting receiver pair (`swipt_alloc.moop`), and
* transmit-power minimization with artificial noise and power-splitting
  receivers under secrecy constraints (`swipt_alloc.secure`).

Supporting layers: physical system model and channel draws
(`swipt_alloc.sysmodel`), link/power metrics (`swipt_alloc.metrics`),
the conic problem container and solver (`swipt_alloc.conic`,
`swipt_alloc.solver`), and the experiment harness + CLI
(`swipt_alloc.harness`, `swipt_alloc.cli`).
"""

__version__ = "0.1.0"

from .sysmodel import (  # noqa: F401
    SystemParams,
    SecureParams,
    ChannelSet,
    dbm_to_watt,
    watt_to_dbm,
    path_loss_gain,
    draw_rician,
    place_receivers,
    draw_channels_sep,
    draw_channels_secure,
)
from .conic import (  # noqa: F401
    ConicProblem,
    ConicSolution,
    hermitian_embed,
    hermitian_coeff,
    recover_hermitian,
    kkt_residuals,
    OPTIMAL,
    INFEASIBLE,
    UNBOUNDED,
    NUMERICAL_LIMIT,
)
from .solver import solve, solve_batch  # noqa: F401
from .metrics import (  # noqa: F401
    MoopObjectives,
    SecureQoS,
    rate_sep,
    harvested_sep,
    total_power,
    moop_objectives,
    sinr_k,
    eav_rate_upper,
    secrecy_rate,
    harvested_secure,
)
from .moop import (  # noqa: F401
    WeightVector,
    LiftedVars,
    MoopAllocation,
    lift,
    recover,
    normalize,
    rank_one_extract,
    solve_power_min,
    solve_ehee_max,
    solve_iree_max,
    solve_weighted_minmax,
    solve_throughput_minmax,
    kkt_structure_check,
    pareto_filter,
    sweep_weights,
)
from .secure import (  # noqa: F401
    SecureAllocation,
    SecureInfeasible,
    VerifyReport,
    build_secure_sdp,
    solve_secure,
    rank_one_reconstruct,
    optimal_rho_from_duals,
    baseline_zf,
    verify_secure,
)
