"""Command-line orchestration: validation, limit curves, single solves,
epsilon sweeps, and report regeneration.

Exit codes: 0 success, 1 validation failure, 2 solver error, 3 I/O error.
Every failure also leaves a machine-readable error.json in the output
directory.
"""

from __future__ import annotations

import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import __version__, _kernels
from .config import ExperimentConfig, load_config
from .diagnostics import SweepRecord, build_sweep_record, concentration_report
from .errors import ConfigError, FracstatesError
from .grid import Field, make_grid
from .localization import barycenter_h, classify, seed_field, solve_branches
from .models import sample_potential, validate_nonlinearity, validate_potential
from .solver import (
    Problem,
    energy_curve,
    grid_for_epsilon,
    solve_constrained,
    solve_limit,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_SOLVER = 2
EXIT_IO = 3


def _jsonable(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _write_json(path: Path, payload):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")


def _error_record(out_dir: Path, stage: str, exc: Exception):
    try:
        _write_json(
            out_dir / "error.json",
            {"stage": stage, "error": type(exc).__name__, "message": str(exc)},
        )
    except OSError:
        pass


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return repr(x)
    return str(x)


SUMMARY_SCHEMA = "fracstates-summary-v1"

SUMMARY_COLUMNS = [
    "eps",
    "branch",
    "label",
    "converged",
    "energy",
    "alpha_bar",
    "c_eps",
    "c_v0",
    "nehari_residual",
    "residual",
    "negative_mass",
    "barycenter",
    "max_point",
    "v_at_max",
    "v_gap",
    "c_gap",
    "profile_error",
    "decay_exponent",
    "decay_r2",
    "boundary_mass",
    "sigma_member",
    "trusted",
]


def _summary_rows(records):
    rows = []
    for rec in records:
        for br, diag in zip(rec.branches, rec.diagnostics):
            rows.append(
                {
                    "eps": rec.eps,
                    "branch": br.j,
                    "label": br.label.kind,
                    "converged": br.result.converged,
                    "energy": br.alpha_energy,
                    "alpha_bar": br.alpha_bar,
                    "c_eps": rec.c_eps,
                    "c_v0": rec.c_v0,
                    "nehari_residual": br.result.report.nehari_residual,
                    "residual": br.result.residual,
                    "negative_mass": br.result.negative_mass,
                    "barycenter": ";".join(repr(float(x)) for x in br.barycenter),
                    "max_point": ";".join(repr(float(x)) for x in diag.max_point),
                    "v_at_max": diag.v_at_max,
                    "v_gap": diag.v_at_max - rec.v0,
                    "c_gap": rec.c_eps - rec.c_v0,
                    "profile_error": diag.profile_err,
                    "decay_exponent": diag.decay_exponent,
                    "decay_r2": diag.decay_r2,
                    "boundary_mass": diag.boundary_mass,
                    "sigma_member": br.j in rec.sigma_members,
                    "trusted": rec.trusted,
                }
            )
    return rows


def write_summary_csv(path: Path, records):
    rows = _summary_rows(records)
    lines = [f"# schema: {SUMMARY_SCHEMA}", ",".join(SUMMARY_COLUMNS)]
    for row in rows:
        lines.append(",".join(_fmt(row[c]) for c in SUMMARY_COLUMNS))
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _record_payload(rec: SweepRecord) -> dict:
    return {
        "eps": rec.eps,
        "c_eps": rec.c_eps,
        "c_v0": rec.c_v0,
        "v0": rec.v0,
        "omega": rec.omega,
        "sigma_members": rec.sigma_members,
        "trusted": rec.trusted,
        "branches": [
            dict(
                br.to_record(),
                v_at_max=diag.v_at_max,
                profile_error=diag.profile_err,
                decay_exponent=diag.decay_exponent,
                decay_r2=diag.decay_r2,
                boundary_mass=diag.boundary_mass,
            )
            for br, diag in zip(rec.branches, rec.diagnostics)
        ],
    }


def dump_field(out_dir: Path, name: str, field: Field, extra=None):
    """Flat little-endian float64 dump with a JSON grid sidecar."""
    out_dir.mkdir(parents=True, exist_ok=True)
    raw = field.values.astype("<f8").tobytes()
    with open(out_dir / f"{name}.f64", "wb") as fh:
        fh.write(raw)
    meta = {
        "dtype": "<f8",
        "count": int(field.values.size),
        "axis_order": "row-major",
        "d": field.grid.d,
        "n": field.grid.n,
        "R": field.grid.R,
        "h": field.grid.h,
    }
    if extra:
        meta.update(extra)
    _write_json(out_dir / f"{name}.json", meta)


def run_check(config: ExperimentConfig, out_dir: Path) -> int:
    """Hypothesis validators only; exit 1 on any failure."""
    pb = config.problem
    n_val = min(max(int(2 * pb.R0 / pb.h0), 64), 4096)
    if n_val % 2:
        n_val += 1
    grid = make_grid(pb.d, pb.R0, n_val)
    pot_report = validate_potential(config.potential, grid)
    nl_report = validate_nonlinearity(
        config.nonlinearity, sup_v=config.potential.sup_level
    )
    q_ok = 2.0 < config.nonlinearity.q < config.star_exponent()
    messages = list(pot_report.messages) + list(nl_report.messages)
    if not q_ok:
        messages.append(
            f"(f2) fail: growth exponent q = {config.nonlinearity.q} outside "
            f"(2, {config.star_exponent()})"
        )
    boxes_ok = True
    try:
        config.box_family()
    except FracstatesError as exc:
        boxes_ok = False
        messages.append(f"boxes fail: {exc}")
    ok = pot_report.all_pass and nl_report.all_pass and q_ok and boxes_ok
    payload = {
        "pass": ok,
        "V1": pot_report.pass_v1,
        "V2": pot_report.pass_v2,
        "f1": nl_report.pass_f1,
        "f2": nl_report.pass_f2 and q_ok,
        "f3": nl_report.pass_f3,
        "f4": nl_report.pass_f4,
        "f5": nl_report.pass_f5,
        "boxes": boxes_ok,
        "V0": pot_report.v0,
        "V_inf_proxy": pot_report.v_inf_proxy,
        "l0": config.nonlinearity.l0,
        "horizon": nl_report.horizon,
        "messages": messages,
    }
    _write_json(out_dir / "validation.json", payload)
    for name in ("V1", "V2", "f1", "f2", "f3", "f4", "f5", "boxes"):
        click.echo(f"{name}: {'pass' if payload[name] else 'FAIL'}")
    for m in messages:
        click.echo(f"  {m}")
    return EXIT_OK if ok else EXIT_VALIDATION


def ensure_hypotheses(config: ExperimentConfig):
    """Hypothesis gate: no solve launches on a failing (V1)-(V2)/(f1)-(f5)."""
    pb = config.problem
    n_val = min(max(int(2 * pb.R0 / pb.h0), 64), 4096)
    if n_val % 2:
        n_val += 1
    grid = make_grid(pb.d, pb.R0, n_val)
    pot = validate_potential(config.potential, grid)
    nl = validate_nonlinearity(config.nonlinearity, sup_v=config.potential.sup_level)
    q_ok = 2.0 < config.nonlinearity.q < config.star_exponent()
    if not (pot.all_pass and nl.all_pass and q_ok):
        msgs = list(pot.messages) + list(nl.messages)
        if not q_ok:
            msgs.append(f"growth exponent q = {config.nonlinearity.q} is not admissible")
        raise ConfigError("hypothesis validation failed: " + "; ".join(msgs))


def run_limit(config: ExperimentConfig, out_dir: Path) -> int:
    pb = config.problem
    if not config.limit.a_values:
        raise ConfigError("limit.a_values is empty; nothing to solve")
    ensure_hypotheses(config)
    grid = make_grid(pb.d, config.limit.R, config.limit.n)
    curve = energy_curve(
        list(config.limit.a_values), config.nonlinearity, grid, pb.alpha,
        config.solve_options(),
    )
    lines = ["# schema: fracstates-limit-v1", "a,c_a"]
    for a, c in curve:
        lines.append(f"{_fmt(a)},{_fmt(c)}")
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "limit_curve.csv", "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    _write_json(out_dir / "limit_curve.json", {"curve": [[a, c] for a, c in curve]})
    for a, c in curve:
        click.echo(f"a = {a:g}: c_a = {c:.10g}")
    return EXIT_OK


def _sweep_one(config: ExperimentConfig, eps: float, w_limit, c_v0: float, v0: float):
    pb = config.problem
    g = grid_for_epsilon(pb.d, eps, pb.R0, pb.R_cap, pb.h0, config.sweep.point_budget)
    vfield = sample_potential(config.potential, g, eps)
    p = Problem(
        grid=g, alpha=pb.alpha, eps=eps,
        potential_field=vfield, nonlinearity=config.nonlinearity,
    )
    experiment = solve_branches(p, config.box_family(), w_limit, config.solve_options())
    return build_sweep_record(
        eps=eps, problem=p, experiment=experiment, w_limit=w_limit,
        c_v0=c_v0, potential=config.potential, v0=v0,
        decay_window_frac=config.sweep.decay_window,
    )


def run_sweep(config: ExperimentConfig, out_dir: Path, workers: int = 1) -> int:
    pb = config.problem
    ensure_hypotheses(config)
    eps_list = list(config.sweep.epsilons)
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ConfigError("sweep.epsilons must be strictly decreasing")
    limit_grid = make_grid(pb.d, config.limit.R, config.limit.n)
    v0 = config.potential.v0_proxy
    w_res = solve_limit(
        v0, config.nonlinearity, limit_grid, pb.alpha, config.solve_options()
    )
    c_v0 = w_res.energy

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_sweep_one, config, eps, w_res.u, c_v0, v0)
                for eps in eps_list
            ]
            records = [f.result() for f in futures]
    else:
        records = [_sweep_one(config, eps, w_res.u, c_v0, v0) for eps in eps_list]

    _write_json(
        out_dir / "records.json",
        {
            "schema": "fracstates-records-v1",
            "c_v0": c_v0,
            "v0": v0,
            "records": [_record_payload(r) for r in records],
        },
    )
    write_summary_csv(out_dir / "summary.csv", records)
    table = concentration_report(records, c_v0, v0)
    _write_json(out_dir / "concentration.json", table)
    fields_dir = out_dir / "fields"
    dump_field(fields_dir, "limit_state", w_res.u, {"a": v0})
    for rec in records:
        for br in rec.branches:
            dump_field(
                fields_dir,
                f"eps{rec.eps:g}_branch{br.j}",
                br.result.u,
                {"eps": rec.eps, "branch": br.j},
            )
    for rec in records:
        click.echo(
            f"eps = {rec.eps:g}: c_eps = {rec.c_eps:.8g} "
            f"(gap {rec.c_eps - c_v0:.3g}), sigma = {rec.sigma_members}, "
            f"trusted = {rec.trusted}"
        )
    return EXIT_OK


def run_solve(config: ExperimentConfig, out_dir: Path) -> int:
    """Exactly one (eps, branch) problem from the solve block."""
    pb = config.problem
    ensure_hypotheses(config)
    eps = config.solve.epsilon
    if eps is None:
        eps = config.sweep.epsilons[0]
    j = config.solve.branch
    boxes = config.box_family()
    if not (1 <= j <= boxes.k):
        raise ConfigError(f"solve.branch must be in 1..{boxes.k}, got {j}")
    limit_grid = make_grid(pb.d, config.limit.R, config.limit.n)
    v0 = config.potential.v0_proxy
    opts = config.solve_options()
    w_res = solve_limit(v0, config.nonlinearity, limit_grid, pb.alpha, opts)
    g = grid_for_epsilon(pb.d, eps, pb.R0, pb.R_cap, pb.h0, config.sweep.point_budget)
    p = Problem(
        grid=g, alpha=pb.alpha, eps=eps,
        potential_field=sample_potential(config.potential, g, eps),
        nonlinearity=config.nonlinearity,
    )
    seed = seed_field(w_res.u, boxes.centers[j - 1], p)
    res = solve_constrained(p, seed, opts)
    label = classify(res.u, boxes, eps)
    hb = barycenter_h(res.u, 2.0, eps, boxes.L)
    payload = {
        "eps": eps,
        "branch": j,
        "label": label.kind,
        "energy": res.energy,
        "c_v0": w_res.energy,
        "converged": res.converged,
        "iterations": res.iterations,
        "residual": res.residual,
        "nehari_residual": res.report.nehari_residual,
        "negative_mass": res.negative_mass,
        "barycenter": [float(x) for x in hb],
        "max_point": [float(x) for x in res.max_point],
    }
    _write_json(out_dir / f"solve_eps{eps:g}_branch{j}.json", payload)
    dump_field(out_dir / "fields", f"eps{eps:g}_branch{j}", res.u,
               {"eps": eps, "branch": j})
    click.echo(
        f"eps = {eps:g}, branch {j}: energy = {res.energy:.10g}, "
        f"label = {label.kind}, converged = {res.converged}"
    )
    return EXIT_OK


def _concentration_from_stored(stored: dict) -> dict:
    rows = []
    for rec in stored["records"]:
        energies = [b["energy"] for b in rec["branches"]]
        best = rec["branches"][int(np.argmin(energies))]
        rows.append(
            {
                "eps": rec["eps"],
                "c_gap": rec["c_eps"] - stored["c_v0"],
                "v_gap": best["v_at_max"] - stored["v0"],
                "profile_error": best["profile_error"],
                "decay_exponent": best["decay_exponent"],
                "trusted": rec["trusted"],
            }
        )
    flags = {}
    if len(rows) >= 2:
        c_gaps = [r["c_gap"] for r in rows]
        v_gaps = [r["v_gap"] for r in rows]
        p_errs = [r["profile_error"] for r in rows]
        flags = {
            "c_gap_decreasing": all(b < a for a, b in zip(c_gaps, c_gaps[1:])),
            "v_gap_decreasing": all(b < a for a, b in zip(v_gaps, v_gaps[1:])),
            "profile_error_decreasing": all(b < a for a, b in zip(p_errs, p_errs[1:])),
        }
    return {"rows": rows, "flags": flags}


def run_report(config: ExperimentConfig, out_dir: Path) -> int:
    """Regenerate summary.csv and the concentration table from records.json."""
    rec_path = out_dir / "records.json"
    if not rec_path.exists():
        raise OSError(f"no records.json under {out_dir}; run sweep first")
    with open(rec_path) as fh:
        stored = json.load(fh)
    _write_json(out_dir / "concentration.json", _concentration_from_stored(stored))
    lines = [f"# schema: {SUMMARY_SCHEMA}", ",".join(SUMMARY_COLUMNS)]
    for rec in stored["records"]:
        for br in rec["branches"]:
            row = {
                "eps": rec["eps"],
                "branch": br["branch"],
                "label": br["label"],
                "converged": br["converged"],
                "energy": br["energy"],
                "alpha_bar": br["alpha_bar"],
                "c_eps": rec["c_eps"],
                "c_v0": rec["c_v0"],
                "nehari_residual": br["nehari_residual"],
                "residual": br["residual"],
                "negative_mass": br["negative_mass"],
                "barycenter": ";".join(repr(float(x)) for x in br["barycenter"]),
                "max_point": ";".join(repr(float(x)) for x in br["max_point"]),
                "v_at_max": br["v_at_max"],
                "v_gap": br["v_at_max"] - stored["v0"],
                "c_gap": rec["c_eps"] - rec["c_v0"],
                "profile_error": br["profile_error"],
                "decay_exponent": br["decay_exponent"],
                "decay_r2": br["decay_r2"],
                "boundary_mass": br["boundary_mass"],
                "sigma_member": br["branch"] in rec["sigma_members"],
                "trusted": rec["trusted"],
            }
            lines.append(",".join(_fmt(row[c]) for c in SUMMARY_COLUMNS))
    with open(out_dir / "summary.csv", "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
    click.echo(f"regenerated {out_dir / 'summary.csv'}")
    return EXIT_OK


STAGES = {
    "check": run_check,
    "limit": run_limit,
    "sweep": run_sweep,
    "solve": run_solve,
    "report": run_report,
}


def _dispatch(command: str, config_path: str, out, workers: int, seed) -> int:
    t0 = time.perf_counter()
    out_dir = Path(out) if out else None
    code = EXIT_IO
    status = "ok"
    try:
        config = load_config(config_path)
        if seed is not None:
            config.rng_seed = int(seed)
        if out_dir is None:
            out_dir = Path(config.output.directory)
        out_dir.mkdir(parents=True, exist_ok=True)
        if command == "sweep":
            code = run_sweep(config, out_dir, workers=workers)
        else:
            code = STAGES[command](config, out_dir)
    except ConfigError as exc:
        status = "config-error"
        click.echo(f"error: {exc}", err=True)
        if out_dir is not None:
            _error_record(out_dir, command, exc)
        return EXIT_VALIDATION
    except FracstatesError as exc:
        status = "solver-error"
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        if out_dir is not None:
            _error_record(out_dir, command, exc)
        return EXIT_SOLVER
    except OSError as exc:
        status = "io-error"
        click.echo(f"error: {exc}", err=True)
        if out_dir is not None:
            _error_record(out_dir, command, exc)
        return EXIT_IO
    finally:
        if out_dir is not None and status == "ok":
            try:
                _write_json(
                    out_dir / "manifest.json",
                    {
                        "tool_version": __version__,
                        "kernel_backend": _kernels.backend(),
                        "command": command,
                        "wall_time_s": time.perf_counter() - t0,
                        "stages": {command: "ok" if code == EXIT_OK else "validation-failed"},
                        "config": _load_raw(config_path),
                    },
                )
            except OSError:
                pass
    return code


def _load_raw(config_path):
    try:
        import yaml

        with open(config_path) as fh:
            return yaml.safe_load(fh)
    except Exception:
        return None


@click.group()
def main():
    """Solvers and experiments for semiclassical fractional Schrodinger
    ground states with saturable nonlinearity."""


def _command(name: str, help_text: str):
    @main.command(name=name, help=help_text)
    @click.option("--config", "config_path", required=True, type=click.Path())
    @click.option("--out", default=None, type=click.Path())
    @click.option("--workers", default=1, type=int, show_default=True)
    @click.option("--seed", default=None, type=int)
    def _cmd(config_path, out, workers, seed):
        sys.exit(_dispatch(name, config_path, out, workers, seed))

    return _cmd


check = _command("check", "Run the hypothesis validators only.")
limit = _command("limit", "Solve the autonomous limit problems (c_a curve).")
solve = _command("solve", "Solve one (epsilon, branch) problem.")
sweep = _command("sweep", "Run the full multi-epsilon branch experiment.")
report = _command("report", "Regenerate tables from stored records.")


if __name__ == "__main__":
    main()
