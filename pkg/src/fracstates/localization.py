"""Localization machinery for the multi-well branch experiment.

Hypercube families around the declared potential minima define branch sets:
a solution belongs to branch j when it is nonnegative and its truncated
barycenter lies in the box around the j-th minimum (rescaled by 1/eps).
Branch solves are seeded with cut-off translates of the limit ground state;
boundary-seeded ray projections provide the probe estimate of the boundary
energy floor that separates branches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Optional

import numpy as np

from .errors import (
    BoundaryNotSeparating,
    InvalidInput,
    OverlappingBoxes,
    SeedLeftTheta,
    SeedNotInTheta,
    ZeroField,
)
from . import _kernels
from .grid import Field, resample_field
from .models import PotentialSpec
from .solver import SolveOptions, SolveResult, solve_constrained
from .variational import Problem, energy, project_to_nehari, theta_defect


@dataclass(frozen=True)
class BoxFamily:
    """k disjoint closed hypercubes of half-side l inside (-L, L)^d."""

    centers: tuple
    l: float
    L: float
    nu: float

    @property
    def k(self) -> int:
        return len(self.centers)

    @property
    def d(self) -> int:
        return len(self.centers[0])


@dataclass(frozen=True)
class BranchLabel:
    kind: str  # "interior" | "boundary" | "outside"
    j: Optional[int] = None  # 1-based branch index, None for outside

    @classmethod
    def interior(cls, j: int):
        return cls("interior", j)

    @classmethod
    def boundary(cls, j: int):
        return cls("boundary", j)

    @classmethod
    def outside(cls):
        return cls("outside", None)


def build_boxes(
    spec: PotentialSpec,
    l: float,
    L: float,
    nu: Optional[float] = None,
    margin: Optional[float] = None,
    samples_per_face: int = 5,
) -> BoxFamily:
    """Validated hypercube family around the declared well centers.

    Checks pairwise disjointness of the closed boxes, containment in
    (-L, L)^d, the 2l <= L constraint, and that the potential rises above
    V0 + margin on every sampled box boundary.
    """
    if l <= 0 or L <= 0:
        raise InvalidInput("box sizes l and L must be positive")
    if 2.0 * l > L:
        raise InvalidInput(f"need 2l <= L, got l={l}, L={L}")
    if nu is None:
        nu = 0.1 * l
    centers = tuple(np.asarray(w.center, dtype=float) for w in spec.wells)
    d = spec.d
    for i in range(len(centers)):
        for j in range(i + 1, len(centers)):
            if np.max(np.abs(centers[i] - centers[j])) <= 2.0 * l:
                raise OverlappingBoxes(
                    f"closed boxes around wells {i + 1} and {j + 1} intersect"
                )
    for i, c in enumerate(centers):
        if np.max(np.abs(c)) + l >= L:
            raise InvalidInput(
                f"box around well {i + 1} is not contained in (-{L}, {L})^{d}"
            )

    v0 = spec.v0_proxy
    if margin is None:
        margin = 0.02 * max(spec.v_inf_level - v0, 0.0)
    ticks = np.linspace(-l, l, samples_per_face)
    center_vals = spec.center_values()
    for i, c in enumerate(centers):
        pts = []
        for axis in range(d):
            others = [ticks] * (d - 1)
            for combo in product(*others) if d > 1 else [()]:
                for sgn in (-l, l):
                    p = np.array(c)
                    p[axis] += sgn
                    rest = [a for a in range(d) if a != axis]
                    for a, val in zip(rest, combo):
                        p[a] += val
                    pts.append(p)
        vals = spec.evaluate(np.array(pts))
        if np.min(vals) <= max(center_vals[i], v0) + margin:
            raise BoundaryNotSeparating(
                f"potential does not rise above the well level on the boundary "
                f"of box {i + 1} (min {np.min(vals):.6g})"
            )
    return BoxFamily(tuple(tuple(c) for c in centers), float(l), float(L), float(nu))


# --------------------------------------------------------------------------
# seed fields and barycenter maps
# --------------------------------------------------------------------------


def _cutoff(r: np.ndarray) -> np.ndarray:
    """C1 non-increasing cutoff: 1 on [0, 1/2], 0 on [1, inf), cubic blend."""
    tau = np.clip(2.0 * (r - 0.5), 0.0, 1.0)
    return 1.0 - tau * tau * (3.0 - 2.0 * tau)


def seed_field(w_limit: Field, y, problem: Problem) -> Field:
    """Cut-off translate of the limit state centered at y/eps:
    psi(x) = eta(|eps x - y|) * w(x - y/eps), with the translate rounded to
    whole grid cells. Raises SeedLeftTheta when the construction leaves the
    restricted set (eps too large for this box)."""
    g = problem.grid
    eps = problem.eps
    y = np.atleast_1d(np.asarray(y, dtype=float))
    w = resample_field(w_limit, g)
    shifts = [int(round(yi / eps / g.h)) for yi in y]
    vals = np.roll(w.shaped, shifts, axis=tuple(range(g.d)))
    r2 = np.zeros(g.shape)
    for c, yi in zip(g.coords, y):
        r2 += (eps * c - yi) ** 2
    vals = vals * _cutoff(np.sqrt(r2))
    out = Field(g, vals)
    q = theta_defect(problem, out)
    if q >= 0:
        raise SeedLeftTheta(
            f"cut-off translate at y={tuple(y)} has theta defect {q:.6g} >= 0 "
            f"(eps={eps} too large)"
        )
    return out


def truncated_coordinate(t, eps: float, L: float):
    """Coordinate clamp to [-2L/eps, 2L/eps]."""
    if eps <= 0 or L <= 0:
        raise InvalidInput("eps and L must be positive")
    bound = 2.0 * L / eps
    return np.clip(t, -bound, bound)


def barycenter_h(u: Field, p: float, eps: float, L: float) -> np.ndarray:
    """Truncated-coordinate barycenter with weight |u|^p per component."""
    if p < 2:
        raise InvalidInput(f"weight exponent p must be >= 2, got {p}")
    weight = np.abs(u.shaped) ** p
    total = float(np.sum(weight))
    if total == 0.0:
        raise ZeroField("barycenter of the zero field is undefined")
    out = np.empty(u.grid.d)
    for i, c in enumerate(u.grid.coords):
        out[i] = float(np.sum(truncated_coordinate(c, eps, L) * weight)) / total
    return out


def beta_map(u: Field, rho: float, eps: float) -> np.ndarray:
    """Mass barycenter of u^2 under the radial clamp chi (identity inside
    the rho-ball of the original variables, radial projection outside)."""
    if rho <= 0:
        raise InvalidInput(f"rho must be positive, got {rho}")
    w = u.shaped * u.shaped
    total = float(np.sum(w))
    if total == 0.0:
        raise ZeroField("beta map of the zero field is undefined")
    g = u.grid
    r = np.zeros(g.shape)
    for c in g.coords:
        r += (eps * c) ** 2
    r = np.sqrt(r)
    scale = np.where(r > rho, rho / np.where(r > 0, r, 1.0), 1.0)
    out = np.empty(g.d)
    for i, c in enumerate(g.coords):
        out[i] = float(np.sum(eps * c * scale * w)) / total
    return out


NEGATIVITY_TOL = 1e-6


def classify(u: Field, boxes: BoxFamily, eps: float, tol: Optional[float] = None) -> BranchLabel:
    """Branch label from the barycenter: interior/boundary of the rescaled
    box within margin tol/eps, outside otherwise. Negative mass beyond
    tolerance forces outside."""
    if tol is None:
        tol = boxes.nu
    mass = float(np.dot(u.values, u.values))
    if mass == 0.0:
        raise ZeroField("cannot classify the zero field")
    if _kernels.negative_sq_sum(u.values) > NEGATIVITY_TOL * mass:
        return BranchLabel.outside()
    hb = barycenter_h(u, 2.0, eps, boxes.L)
    dists = [
        np.max(np.abs(hb - np.asarray(c) / eps)) for c in boxes.centers
    ]
    j = int(np.argmin(dists))
    half = boxes.l / eps
    band = tol / eps
    if dists[j] < half - band:
        return BranchLabel.interior(j + 1)
    if dists[j] <= half + band:
        return BranchLabel.boundary(j + 1)
    return BranchLabel.outside()


# --------------------------------------------------------------------------
# branch experiment
# --------------------------------------------------------------------------


@dataclass
class BranchResult:
    j: int
    result: SolveResult
    label: BranchLabel
    alpha_energy: float
    alpha_bar: Optional[float]
    barycenter: np.ndarray
    center: tuple
    eps: float
    l: float

    def to_record(self) -> dict:
        return {
            "branch": self.j,
            "label": self.label.kind,
            "energy": self.alpha_energy,
            "alpha_bar": self.alpha_bar,
            "barycenter": [float(x) for x in self.barycenter],
            "max_point": [float(x) for x in self.result.max_point],
            "converged": bool(self.result.converged),
            "iterations": self.result.iterations,
            "residual": self.result.residual,
            "nehari_residual": self.result.report.nehari_residual,
            "negative_mass": self.result.negative_mass,
        }


@dataclass
class BranchExperiment:
    branches: list
    distinct: bool
    pairwise_distance: np.ndarray
    escaped: list

    def interior_branches(self) -> list:
        return [b for b in self.branches if b.label.kind == "interior"]


def _probe_alpha_bar(p: Problem, boxes: BoxFamily, w_limit: Field, center) -> Optional[float]:
    """Boundary energy floor estimate: minimum Nehari-projected energy over
    cut-off translates seeded on the box boundary (centers at a^j +- l e_i).

    Probes stay on the boundary branch set by construction, so each one is
    an upper bound of the boundary infimum; descent would migrate off the
    boundary and is deliberately not applied.
    """
    energies = []
    for axis in range(boxes.d):
        for sgn in (-1.0, 1.0):
            y = np.array(center, dtype=float)
            y[axis] += sgn * boxes.l
            try:
                psi = seed_field(w_limit, y, p)
                _, proj = project_to_nehari(p, psi)
            except (SeedLeftTheta, SeedNotInTheta, ZeroField):
                continue
            energies.append(energy(p, proj).total)
    return min(energies) if energies else None


def solve_branches(
    p: Problem,
    boxes: BoxFamily,
    w_limit: Field,
    opts: Optional[SolveOptions] = None,
    classify_tol: Optional[float] = None,
) -> BranchExperiment:
    """One constrained solve per well, seeded at its center, plus the
    boundary probe floor. Escaped branches (label not interior) are reported
    and the run continues."""
    branches = []
    for j, center in enumerate(boxes.centers, start=1):
        try:
            seed = seed_field(w_limit, center, p)
        except SeedLeftTheta as exc:
            raise SeedNotInTheta(f"branch {j}: {exc}") from exc
        res = solve_constrained(p, seed, opts)
        label = classify(res.u, boxes, p.eps, classify_tol)
        hb = barycenter_h(res.u, 2.0, p.eps, boxes.L)
        abar = _probe_alpha_bar(p, boxes, w_limit, center)
        branches.append(
            BranchResult(
                j=j,
                result=res,
                label=label,
                alpha_energy=res.energy,
                alpha_bar=abar,
                barycenter=hb,
                center=tuple(center),
                eps=p.eps,
                l=boxes.l,
            )
        )

    k = len(branches)
    dist = np.zeros((k, k))
    w = p.grid.weight
    for i in range(k):
        for j in range(i + 1, k):
            ui = branches[i].result.u.values
            uj = branches[j].result.u.values
            diff = math.sqrt(w * float(np.dot(ui - uj, ui - uj)))
            mean = 0.5 * (
                math.sqrt(w * float(np.dot(ui, ui)))
                + math.sqrt(w * float(np.dot(uj, uj)))
            )
            dist[i, j] = dist[j, i] = diff / mean
    labels = [b.label for b in branches]
    interior_js = [lb.j for lb in labels if lb.kind == "interior"]
    distinct = (
        len(interior_js) == k
        and len(set(interior_js)) == k
        and (k < 2 or float(np.min(dist[np.triu_indices(k, 1)])) > 0.1)
    )
    escaped = [b.j for b in branches if b.label.kind != "interior"]
    return BranchExperiment(branches, distinct, dist, escaped)
