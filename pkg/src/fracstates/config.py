"""Experiment configuration: strict YAML parsing into validated blocks.

Unknown keys anywhere in the file are hard errors so typos in hypothesis
parameters cannot pass silently.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import yaml

from .errors import ConfigError
from .localization import BoxFamily, build_boxes
from .models import NonlinearitySpec, PotentialSpec, Well
from .solver import SolveOptions


def _require(mapping: dict, context: str, required, optional=()):
    if not isinstance(mapping, dict):
        raise ConfigError(f"{context}: expected a mapping, got {type(mapping).__name__}")
    known = set(required) | set(optional)
    unknown = set(mapping) - known
    if unknown:
        raise ConfigError(f"{context}: unknown keys {sorted(unknown)}")
    missing = set(required) - set(mapping)
    if missing:
        raise ConfigError(f"{context}: missing keys {sorted(missing)}")
    return mapping


@dataclass(frozen=True)
class ProblemBlock:
    d: int
    alpha: float
    R0: float
    R_cap: float = 400.0
    h0: float = 0.25


@dataclass(frozen=True)
class BoxesBlock:
    l: float
    L: float
    nu: Optional[float] = None


@dataclass(frozen=True)
class SweepBlock:
    epsilons: tuple
    max_iter: int = 2000
    tol_residual: float = 1e-8
    point_budget: int = 4_000_000
    precond_shift: Optional[float] = None
    step_init: float = 1.0
    step_shrink: float = 0.5
    sufficient_decrease: float = 1e-4
    max_backtracks: int = 50
    decay_window: tuple = (0.2, 0.35)


@dataclass(frozen=True)
class LimitBlock:
    a_values: tuple = ()
    R: float = 80.0
    n: int = 640


@dataclass(frozen=True)
class SolveBlock:
    epsilon: Optional[float] = None
    branch: int = 1


@dataclass(frozen=True)
class OutputBlock:
    directory: str = "out"
    formats: tuple = ("csv", "json")


@dataclass
class ExperimentConfig:
    problem: ProblemBlock
    potential: PotentialSpec
    nonlinearity: NonlinearitySpec
    boxes: BoxesBlock
    sweep: SweepBlock
    limit: LimitBlock = field(default_factory=LimitBlock)
    solve: SolveBlock = field(default_factory=SolveBlock)
    output: OutputBlock = field(default_factory=OutputBlock)
    rng_seed: int = 0
    raw: dict = field(default_factory=dict)

    def solve_options(self) -> SolveOptions:
        return SolveOptions(
            max_iter=self.sweep.max_iter,
            tol_residual=self.sweep.tol_residual,
            precond_shift=self.sweep.precond_shift,
            step_init=self.sweep.step_init,
            step_shrink=self.sweep.step_shrink,
            sufficient_decrease=self.sweep.sufficient_decrease,
            max_backtracks=self.sweep.max_backtracks,
            rng_seed=self.rng_seed,
        )

    def box_family(self) -> BoxFamily:
        return build_boxes(self.potential, self.boxes.l, self.boxes.L, self.boxes.nu)

    def star_exponent(self) -> float:
        """Critical exponent 2d/(d-2a) for d > 2a, +inf otherwise."""
        d, a = self.problem.d, self.problem.alpha
        if d > 2 * a:
            return 2.0 * d / (d - 2.0 * a)
        return float("inf")


def _parse_potential(block) -> PotentialSpec:
    _require(block, "potential", ["v_inf_level", "wells"])
    wells = []
    if not isinstance(block["wells"], list) or not block["wells"]:
        raise ConfigError("potential.wells: expected a non-empty list")
    for i, w in enumerate(block["wells"]):
        _require(w, f"potential.wells[{i}]", ["center", "depth", "width"])
        center = w["center"]
        if not isinstance(center, (list, tuple)):
            center = [center]
        wells.append(Well(tuple(float(c) for c in center), float(w["depth"]), float(w["width"])))
    return PotentialSpec(float(block["v_inf_level"]), tuple(wells))


def _parse_nonlinearity(block) -> NonlinearitySpec:
    _require(block, "nonlinearity", ["kind"], ["s", "q", "C0"])
    kind = block["kind"]
    if kind != "saturable":
        raise ConfigError(
            f"nonlinearity.kind: only 'saturable' is configurable, got {kind!r} "
            "(custom triples are library-level)"
        )
    if "s" not in block:
        raise ConfigError("nonlinearity: saturable kind requires 's'")
    kwargs = {}
    if "q" in block:
        kwargs["q"] = float(block["q"])
    if "C0" in block:
        kwargs["C0"] = float(block["C0"])
    return NonlinearitySpec.saturable(float(block["s"]), **kwargs)


def parse_config(data: dict) -> ExperimentConfig:
    _require(
        data,
        "config",
        ["problem", "potential", "nonlinearity", "boxes", "sweep"],
        ["limit", "solve", "output", "rng_seed"],
    )
    pb = _require(data["problem"], "problem", ["d", "alpha", "R0"], ["R_cap", "h0"])
    problem = ProblemBlock(
        d=int(pb["d"]),
        alpha=float(pb["alpha"]),
        R0=float(pb["R0"]),
        R_cap=float(pb.get("R_cap", 400.0)),
        h0=float(pb.get("h0", 0.25)),
    )
    potential = _parse_potential(data["potential"])
    nonlinearity = _parse_nonlinearity(data["nonlinearity"])
    bx = _require(data["boxes"], "boxes", ["l", "L"], ["nu"])
    boxes = BoxesBlock(float(bx["l"]), float(bx["L"]), bx.get("nu"))
    sw = _require(
        data["sweep"],
        "sweep",
        ["epsilons"],
        [
            "max_iter",
            "tol_residual",
            "point_budget",
            "precond_shift",
            "step_init",
            "step_shrink",
            "sufficient_decrease",
            "max_backtracks",
            "decay_window",
        ],
    )
    eps = tuple(float(e) for e in sw["epsilons"])
    window = sw.get("decay_window", (0.2, 0.35))
    sweep = SweepBlock(
        epsilons=eps,
        max_iter=int(sw.get("max_iter", 2000)),
        tol_residual=float(sw.get("tol_residual", 1e-8)),
        point_budget=int(sw.get("point_budget", 4_000_000)),
        precond_shift=None if sw.get("precond_shift") is None else float(sw["precond_shift"]),
        step_init=float(sw.get("step_init", 1.0)),
        step_shrink=float(sw.get("step_shrink", 0.5)),
        sufficient_decrease=float(sw.get("sufficient_decrease", 1e-4)),
        max_backtracks=int(sw.get("max_backtracks", 50)),
        decay_window=(float(window[0]), float(window[1])),
    )
    lim = data.get("limit", {})
    _require(lim, "limit", [], ["a_values", "R", "n"])
    limit = LimitBlock(
        a_values=tuple(float(a) for a in lim.get("a_values", ())),
        R=float(lim.get("R", 80.0)),
        n=int(lim.get("n", 640)),
    )
    so = data.get("solve", {})
    _require(so, "solve", [], ["epsilon", "branch"])
    solve = SolveBlock(
        epsilon=None if so.get("epsilon") is None else float(so["epsilon"]),
        branch=int(so.get("branch", 1)),
    )
    ob = data.get("output", {})
    _require(ob, "output", [], ["directory", "formats"])
    output = OutputBlock(
        directory=str(ob.get("directory", "out")),
        formats=tuple(ob.get("formats", ("csv", "json"))),
    )
    return ExperimentConfig(
        problem=problem,
        potential=potential,
        nonlinearity=nonlinearity,
        boxes=boxes,
        sweep=sweep,
        limit=limit,
        solve=solve,
        output=output,
        rng_seed=int(data.get("rng_seed", 0)),
        raw=data,
    )


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"config {path} is not valid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping at top level")
    return parse_config(data)
