"""fracstates: pseudospectral ground states and multi-well localized states
of semiclassical fractional Schrodinger equations with asymptotically linear
(saturable) nonlinearity, computed by Nehari-manifold constrained descent."""

__version__ = "0.1.0"

from ._kernels import backend as kernel_backend
from .grid import (
    Field,
    Grid,
    apply_frac_laplacian,
    gagliardo_sq,
    helmholtz_inverse,
    inner_l2,
    make_grid,
    norm_lp,
    resample_field,
)
from .models import (
    NonlinearitySpec,
    PotentialSpec,
    Well,
    nonlin_eval,
    sample_potential,
    validate_nonlinearity,
    validate_potential,
)
from .variational import (
    EnergyReport,
    Problem,
    energy,
    gradient,
    project_to_nehari,
    ray_argmax_oracle,
    theta_defect,
)
from .solver import (
    SolveOptions,
    SolveResult,
    energy_curve,
    solve_constrained,
    solve_limit,
    sweep_epsilon,
)
from .localization import (
    BoxFamily,
    BranchLabel,
    barycenter_h,
    beta_map,
    build_boxes,
    classify,
    seed_field,
    solve_branches,
    truncated_coordinate,
)
from .diagnostics import (
    SweepRecord,
    concentration_report,
    decay_fit,
    locate_max,
    profile_error,
    select_ground_state,
    sigma_membership,
)
