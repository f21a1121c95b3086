"""Energy functional, its L2 gradient, the restricted-set defect, and the
unique ray projection onto the Nehari manifold.

For a problem with potential samples V(eps*x) and nonlinearity f, the energy
is I(u) = (1/2)(<u,(-Lap)^a u> + int V u^2) - int F(u). The Nehari residual
is J(u) = <I'(u), u> and the defect Q(u) = [u]^2 + int V u^2 - l0 |u|^2
decides membership in the restricted set (Q < 0). Rays from Q-negative
fields cross the manifold exactly once because f(t)/t is increasing, which
makes g(t) = |u|^2_eps - int f(tu)u/t strictly decreasing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidInput, NonFinite, NotInTheta, ZeroField
from .grid import Field, Grid, apply_frac_laplacian, gagliardo_sq
from .models import NonlinearitySpec
from .errors import NonpositivePotential


@dataclass(frozen=True)
class Problem:
    """Rescaled problem data: (-Lap)^alpha u + V(eps x) u = f(u)."""

    grid: Grid
    alpha: float
    eps: float
    potential_field: Field
    nonlinearity: NonlinearitySpec

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise InvalidInput(f"alpha must lie in (0,1], got {self.alpha}")
        if self.eps <= 0:
            raise InvalidInput(f"eps must be positive, got {self.eps}")
        if self.potential_field.grid != self.grid:
            raise InvalidInput("potential field lives on a different grid")
        if np.min(self.potential_field.values) <= 0:
            raise NonpositivePotential("potential samples must be positive")


@dataclass
class EnergyReport:
    seminorm_part: float
    potential_part: float
    nonlinear_part: float
    total: float
    nehari_residual: float
    theta_defect: float

    @property
    def norm_eps_sq(self) -> float:
        return 2.0 * (self.seminorm_part + self.potential_part)


def energy(p: Problem, u: Field) -> EnergyReport:
    """All parts of I(u) plus the Nehari residual J and the defect Q."""
    w = p.grid.weight
    semi = gagliardo_sq(u, p.alpha)
    pot_sum, f_int, fu_sum = p.nonlinearity.energy_sums(
        u.values, p.potential_field.values
    )
    mass = float(np.dot(u.values, u.values))
    seminorm_part = 0.5 * semi
    potential_part = 0.5 * w * pot_sum
    nonlinear_part = w * f_int
    total = seminorm_part + potential_part - nonlinear_part
    nehari = semi + w * pot_sum - w * fu_sum
    defect = semi + w * pot_sum - p.nonlinearity.l0 * w * mass
    report = EnergyReport(seminorm_part, potential_part, nonlinear_part, total, nehari, defect)
    # defect may legitimately be -inf for an unbounded declared slope
    if not np.isfinite([total, nehari]).all() or np.isnan(defect):
        raise NonFinite("energy evaluation produced NaN or Inf")
    return report


def gradient(p: Problem, u: Field) -> Field:
    """Plain L2 gradient (-Lap)^a u + V(eps x) u - f(u)."""
    lap = apply_frac_laplacian(u, p.alpha)
    out = lap.values + p.potential_field.values * u.values - p.nonlinearity.f(u.values)
    if not np.all(np.isfinite(out)):
        raise NonFinite("gradient produced NaN or Inf")
    return Field(p.grid, out)


def norm_eps_sq(p: Problem, u: Field) -> float:
    """[u]^2_alpha + int V(eps x) u^2."""
    semi = gagliardo_sq(u, p.alpha)
    return semi + p.grid.weight * float(
        np.dot(p.potential_field.values, u.values * u.values)
    )


def theta_defect(p: Problem, u: Field) -> float:
    """Q(u) = [u]^2 + int V u^2 - l0 |u|^2; u is admissible iff Q(u) < 0."""
    mass = p.grid.weight * float(np.dot(u.values, u.values))
    return norm_eps_sq(p, u) - p.nonlinearity.l0 * mass


class NehariProjection(NamedTuple):
    t_star: float
    projected: Field


def project_to_nehari(
    p: Problem,
    u: Field,
    tol: float = 1e-10,
    max_doublings: int = 60,
    bisect_iters: int = 80,
) -> NehariProjection:
    """Unique t* > 0 with J(t* u) = 0, by bracketed bisection on
    g(t) = |u|^2_eps - int f(tu)u/t; raises NotInTheta when no ray point
    exists (Q(u) >= 0, or insufficient positive-part mass for signed u).
    """
    w = p.grid.weight
    if not np.any(u.values):
        raise ZeroField("cannot project the zero field")
    nsq = norm_eps_sq(p, u)
    mass = w * float(np.dot(u.values, u.values))
    if nsq - p.nonlinearity.l0 * mass >= 0:
        raise NotInTheta(
            f"theta defect {nsq - p.nonlinearity.l0 * mass:.6g} >= 0: "
            "ray never meets the Nehari manifold"
        )
    up = np.where(u.values > 0, u.values, 0.0)
    pos_mass = w * float(np.dot(up, up))
    if nsq - p.nonlinearity.l0 * pos_mass >= 0:
        raise NotInTheta(
            "positive-part mass too small: g(t) stays positive along the ray"
        )

    def g(t: float) -> float:
        return nsq - w * p.nonlinearity.rate_sum(u.values, t)

    t_lo, t_hi = 1e-6, 1.0
    k = 0
    while g(t_hi) >= 0:
        t_hi *= 2.0
        k += 1
        if k > max_doublings:
            raise NotInTheta("bracket expansion failed: g never becomes negative")
    for _ in range(bisect_iters):
        mid = 0.5 * (t_lo + t_hi)
        if g(mid) > 0:
            t_lo = mid
        else:
            t_hi = mid
    t_star = 0.5 * (t_lo + t_hi)
    residual = t_star * t_star * g(t_star)
    if abs(residual) > tol * nsq:
        raise NotInTheta(
            f"bisection stalled: |J(t* u)| = {abs(residual):.3g} exceeds tolerance"
        )
    return NehariProjection(t_star, Field(p.grid, t_star * u.values))


class RayScan(NamedTuple):
    t_best: float
    interior: bool


def ray_argmax_oracle(p: Problem, u: Field, t_max: float, steps: int) -> RayScan:
    """Brute-force argmax of t -> I(tu) on a uniform t-grid; test oracle for
    the bisection projection. interior=False flags a boundary maximum."""
    if steps < 100:
        raise InvalidInput(f"need at least 100 steps, got {steps}")
    if t_max <= 0:
        raise InvalidInput(f"t_max must be positive, got {t_max}")
    ts = np.linspace(t_max / steps, t_max, steps)
    vals = np.array([energy(p, Field(p.grid, t * u.values)).total for t in ts])
    k = int(np.argmax(vals))
    return RayScan(float(ts[k]), bool(0 < k < steps - 1))
