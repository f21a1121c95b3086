"""Nehari-constrained energy descent.

Each iteration takes a Sobolev-preconditioned step against the free L2
gradient and reprojects onto the Nehari manifold along the ray, so accepted
iterates stay on the constraint and the energy decreases monotonically.
Because constrained critical points of this functional are free critical
points, the free-gradient norm is the convergence certificate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dfield
from typing import Optional, Sequence

import numpy as np

from .errors import (
    BudgetExceeded,
    Diverged,
    InvalidInput,
    NotInTheta,
    SeedNotInTheta,
    SlopeOrdering,
    ZeroField,
)
from . import _kernels
from .grid import Field, Grid, helmholtz_inverse, make_grid
from .models import NonlinearitySpec, sample_potential
from .variational import (
    EnergyReport,
    Problem,
    energy,
    gradient,
    project_to_nehari,
    theta_defect,
)


@dataclass
class SolveOptions:
    max_iter: int = 2000
    tol_residual: float = 1e-8
    precond_shift: Optional[float] = None  # default: grid mean of the potential
    step_init: float = 1.0
    step_shrink: float = 0.5
    sufficient_decrease: float = 1e-4
    max_backtracks: int = 50
    rng_seed: int = 0

    def __post_init__(self):
        if self.max_iter < 1:
            raise InvalidInput("max_iter must be at least 1")
        if self.tol_residual <= 0:
            raise InvalidInput("tol_residual must be positive")


@dataclass
class SolveResult:
    u: Field
    report: EnergyReport
    iterations: int
    converged: bool
    residual: float
    t_history: list = dfield(default_factory=list)
    energy_history: list = dfield(default_factory=list)
    max_point: tuple = ()
    negative_mass: float = 0.0

    @property
    def energy(self) -> float:
        return self.report.total


def _l2(grid: Grid, values: np.ndarray) -> float:
    return math.sqrt(grid.weight * float(np.dot(values, values)))


def _max_point(u: Field) -> tuple:
    idx = np.unravel_index(int(np.argmax(u.values)), u.grid.shape)
    return tuple(float(u.grid.axis[i]) for i in idx)


def _finish(p: Problem, u: Field, iterations, converged, residual, t_hist, e_hist) -> SolveResult:
    rep = energy(p, u)
    neg = p.grid.weight * _kernels.negative_sq_sum(u.values)
    return SolveResult(
        u=u,
        report=rep,
        iterations=iterations,
        converged=converged,
        residual=residual,
        t_history=t_hist,
        energy_history=e_hist,
        max_point=_max_point(u),
        negative_mass=neg,
    )


def solve_constrained(p: Problem, seed: Field, opts: Optional[SolveOptions] = None) -> SolveResult:
    """Descend I on the Nehari manifold starting from an admissible seed.

    Raises SeedNotInTheta when the seed's defect is nonnegative, Diverged
    when the backtracking line search cannot find any decrease while the
    residual is still above tolerance. Hitting max_iter returns the best
    iterate with converged=False.
    """
    opts = opts or SolveOptions()
    if not np.any(seed.values):
        raise ZeroField("seed is identically zero")
    if theta_defect(p, seed) >= 0:
        raise SeedNotInTheta("seed has nonnegative theta defect")
    shift = opts.precond_shift
    if shift is None:
        shift = float(np.mean(p.potential_field.values))

    try:
        t0, u = project_to_nehari(p, seed)
    except NotInTheta as exc:
        raise SeedNotInTheta(str(exc)) from exc
    rep = energy(p, u)
    t_hist = [t0]
    e_hist = [rep.total]
    best_u, best_total = u, rep.total
    residual = math.inf

    for it in range(1, opts.max_iter + 1):
        grad = gradient(p, u)
        residual = _l2(p.grid, grad.values) / _l2(p.grid, u.values)
        if residual <= opts.tol_residual:
            return _finish(p, u, it - 1, True, residual, t_hist, e_hist)

        direction = helmholtz_inverse(grad, p.alpha, shift)
        dvals = -direction.values
        slope = p.grid.weight * float(np.dot(grad.values, dvals))  # negative

        sigma = opts.step_init
        accepted = False
        # near the minimum the Armijo decrease drops below the rounding
        # noise of the energy sums; the floor keeps steps acceptable there
        floor = 1e-13 * (1.0 + abs(rep.total))
        for _ in range(opts.max_backtracks):
            trial = Field(p.grid, u.values + sigma * dvals)
            try:
                t_star, proj = project_to_nehari(p, trial)
            except (NotInTheta, ZeroField):
                sigma *= opts.step_shrink
                continue
            rep_new = energy(p, proj)
            if rep_new.total <= rep.total + opts.sufficient_decrease * sigma * slope + floor:
                u, rep = proj, rep_new
                if rep.total < best_total:
                    best_u, best_total = u, rep.total
                t_hist.append(t_star)
                e_hist.append(rep.total)
                accepted = True
                break
            sigma *= opts.step_shrink
        if not accepted:
            raise Diverged(
                f"line search failed {opts.max_backtracks} times at iteration "
                f"{it} (residual {residual:.3g})"
            )

    grad = gradient(p, best_u)
    residual = _l2(p.grid, grad.values) / _l2(p.grid, best_u.values)
    converged = residual <= opts.tol_residual
    return _finish(p, best_u, opts.max_iter, converged, residual, t_hist, e_hist)


# --------------------------------------------------------------------------
# autonomous limit problem
# --------------------------------------------------------------------------


def _gaussian_seed(grid: Grid, width: float, center=None) -> Field:
    r2 = np.zeros(grid.shape)
    for i, c in enumerate(grid.coords):
        ci = 0.0 if center is None else center[i]
        r2 += (c - ci) ** 2
    return Field(grid, 2.0 * np.exp(-r2 / (2.0 * width**2)))


DEFAULT_SEED_WIDTHS = (1.0, 1.7, 2.9, 4.9, 8.3)


def limit_problem(a: float, nonlinearity: NonlinearitySpec, grid: Grid, alpha: float) -> Problem:
    if a <= 0:
        raise InvalidInput(f"constant potential level must be positive, got {a}")
    if a >= nonlinearity.l0:
        raise SlopeOrdering(
            f"level a = {a} is not below the asymptotic slope l0 = {nonlinearity.l0}"
        )
    const = Field(grid, np.full(grid.size, float(a)))
    return Problem(grid=grid, alpha=alpha, eps=1.0, potential_field=const, nonlinearity=nonlinearity)


def solve_limit(
    a: float,
    nonlinearity: NonlinearitySpec,
    grid: Grid,
    alpha: float,
    opts: Optional[SolveOptions] = None,
    seed_widths: Sequence[float] = DEFAULT_SEED_WIDTHS,
) -> SolveResult:
    """Ground state of (-Lap)^a u + a u = f(u) by multistart descent.

    Seeds are origin-centered Gaussians of the given widths; widths whose
    defect is nonnegative are skipped. Lowest energy wins, earliest seed
    index breaking ties.
    """
    p = limit_problem(a, nonlinearity, grid, alpha)
    best = None
    tried = 0
    for width in seed_widths:
        seed = _gaussian_seed(grid, width)
        try:
            res = solve_constrained(p, seed, opts)
        except SeedNotInTheta:
            continue
        tried += 1
        if best is None or res.energy < best.energy - 1e-10:
            best = res
    if best is None:
        raise SeedNotInTheta(
            f"no Gaussian seed width in {tuple(seed_widths)} is admissible for a = {a}"
        )
    return best


def energy_curve(
    a_values: Sequence[float],
    nonlinearity: NonlinearitySpec,
    grid: Grid,
    alpha: float,
    opts: Optional[SolveOptions] = None,
):
    """(a, c_a) pairs along a strictly increasing list of levels."""
    a_values = list(a_values)
    if any(b <= a for a, b in zip(a_values, a_values[1:])):
        raise InvalidInput("a_values must be strictly increasing")
    out = []
    for a in a_values:
        res = solve_limit(a, nonlinearity, grid, alpha, opts)
        out.append((float(a), res.energy))
    return out


# --------------------------------------------------------------------------
# epsilon sweep
# --------------------------------------------------------------------------


def grid_for_epsilon(d: int, eps: float, R0: float, R_cap: float, h0: float, point_budget: int) -> Grid:
    """Rescaled-box grid: half-width min(R0/eps, R_cap) at fixed spacing h0
    (half-width rounded up so n is even)."""
    R = min(R0 / eps, R_cap)
    n = int(math.ceil(2.0 * R / h0))
    if n % 2:
        n += 1
    n = max(n, 8)
    if n**d > point_budget:
        raise BudgetExceeded(
            f"grid {n}^{d} exceeds the point budget {point_budget} at eps={eps}"
        )
    return make_grid(d, n * h0 / 2.0, n)


def sweep_epsilon(config) -> list:
    """Run the branch experiment for every epsilon in the config.

    Returns one SweepRecord per epsilon (see diagnostics). The limit ground
    state is solved once on the limit grid and reused as seed profile and
    as the reference for profile errors.
    """
    from .diagnostics import build_sweep_record
    from .localization import solve_branches

    eps_list = list(config.sweep.epsilons)
    if not eps_list:
        return []
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise InvalidInput("epsilon list must be strictly decreasing")

    pb = config.problem
    opts = config.solve_options()
    limit_grid = make_grid(pb.d, config.limit.R, config.limit.n)
    potential = config.potential
    v0 = potential.v0_proxy
    w_limit = solve_limit(v0, config.nonlinearity, limit_grid, pb.alpha, opts)
    c_v0 = w_limit.energy

    records = []
    for eps in eps_list:
        g = grid_for_epsilon(pb.d, eps, pb.R0, pb.R_cap, pb.h0, config.sweep.point_budget)
        vfield = sample_potential(potential, g, eps)
        p = Problem(grid=g, alpha=pb.alpha, eps=eps, potential_field=vfield, nonlinearity=config.nonlinearity)
        boxes = config.box_family()
        experiment = solve_branches(p, boxes, w_limit.u, opts)
        records.append(
            build_sweep_record(
                eps=eps,
                problem=p,
                experiment=experiment,
                w_limit=w_limit.u,
                c_v0=c_v0,
                potential=potential,
                v0=v0,
                decay_window_frac=config.sweep.decay_window,
            )
        )
    return records
