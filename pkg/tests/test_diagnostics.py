"""Max location, profile error, decay fit, sigma membership, ground-state
selection, and the concentration table."""

import numpy as np
import pytest

from conftest import gaussian_field
from fracstates.diagnostics import (
    BranchDiagnostics,
    boundary_mass_fraction,
    concentration_report,
    decay_fit,
    locate_max,
    profile_error,
    select_ground_state,
    sigma_membership,
)
from fracstates.errors import (
    GridMismatch,
    InvalidInput,
    NoInteriorSolutions,
    NonpositiveTail,
    WindowTooSmall,
    ZeroField,
)
from fracstates.grid import Field, gagliardo_sq, make_grid
from fracstates.localization import BranchLabel, BranchResult
from fracstates.variational import EnergyReport


class TestLocateMax:
    def test_gaussian_bump(self):
        g = make_grid(1, 8.0, 128)
        u = gaussian_field(g, 1.0, center=(2.3,))
        eta = locate_max(u)
        assert abs(eta[0] - 2.3) <= g.h / 2

    def test_constant_ties_to_first_point(self):
        g = make_grid(1, 8.0, 64)
        eta = locate_max(Field(g, np.ones(g.size)))
        assert eta[0] == g.axis[0]

    def test_two_equal_bumps_tie_lexicographic(self):
        g = make_grid(1, 8.0, 64)
        vals = np.zeros(g.size)
        vals[10] = 1.0
        vals[40] = 1.0
        assert locate_max(Field(g, vals))[0] == g.axis[10]

    def test_zero_field(self):
        g = make_grid(1, 8.0, 64)
        with pytest.raises(ZeroField):
            locate_max(Field(g, np.zeros(g.size)))


class TestProfileError:
    def test_exact_translate(self, limit_state):
        u = limit_state.u
        shifted = Field(u.grid, np.roll(u.values, 3))
        err = profile_error(shifted, u, locate_max(shifted), 0.5)
        assert err <= 1e-10

    def test_scaling_linearity(self, limit_state):
        u = limit_state.u
        scaled = Field(u.grid, 1.1 * u.values)
        err = profile_error(scaled, u, locate_max(scaled), 0.5)
        norm = np.sqrt(
            gagliardo_sq(u, 0.5) + u.grid.weight * np.dot(u.values, u.values)
        )
        assert err == pytest.approx(0.1 * norm, rel=1e-8)

    def test_pad_across_grids(self, limit_state):
        u = limit_state.u
        big = make_grid(1, 160.0, 1280)
        from fracstates.grid import resample_field

        moved = resample_field(u, big)
        err = profile_error(moved, u, locate_max(moved), 0.5)
        # only the cropped far tail differs
        assert err < 1e-3

    def test_incommensurate_rejected(self, limit_state):
        other = make_grid(1, 80.0, 512)
        with pytest.raises(GridMismatch):
            profile_error(Field(other, np.ones(other.size)), limit_state.u, (0.0,), 0.5)


class TestDecayFit:
    def test_recovers_synthetic_power_law(self):
        g = make_grid(1, 40.0, 1024)
        u = Field(g, 1.0 / (1.0 + np.abs(g.axis) ** 2))
        fit = decay_fit(u, (0.0,), (0.2 * g.R, 0.5 * g.R))
        assert fit.exponent == pytest.approx(-2.0, rel=0.02)
        assert fit.r2 > 0.99

    def test_gaussian_flagged_by_low_r2(self):
        g = make_grid(1, 40.0, 1024)
        u = gaussian_field(g, 2.0)
        fit = decay_fit(u, (0.0,), (0.2 * g.R, 0.5 * g.R))
        assert fit.exponent < -8
        assert fit.r2 < 0.98

    def test_window_bounds_enforced(self):
        g = make_grid(1, 40.0, 1024)
        u = Field(g, 1.0 / (1.0 + np.abs(g.axis) ** 2))
        with pytest.raises(InvalidInput):
            decay_fit(u, (0.0,), (1.0, 10.0))

    def test_too_few_shells(self):
        g = make_grid(1, 40.0, 1024)
        u = Field(g, 1.0 / (1.0 + np.abs(g.axis) ** 2))
        with pytest.raises(WindowTooSmall):
            decay_fit(u, (0.0,), (0.2 * g.R, 0.5 * g.R), n_shells=4)

    def test_nonpositive_tail(self):
        g = make_grid(1, 40.0, 1024)
        u = Field(g, np.cos(g.axis))
        with pytest.raises(NonpositiveTail):
            decay_fit(u, (0.0,), (0.2 * g.R, 0.4 * g.R))


def _fake_report(total, nehari=0.0, norm_sq=10.0):
    return EnergyReport(
        seminorm_part=norm_sq / 4,
        potential_part=norm_sq / 4,
        nonlinear_part=0.0,
        total=total,
        nehari_residual=nehari,
        theta_defect=-1.0,
    )


class _FakeResult:
    def __init__(self, total, nehari=0.0, converged=True):
        self.report = _fake_report(total, nehari)
        self.converged = converged


def _branch(j, energy, label="interior", converged=True, bary=None, center=(0.0,), eps=0.25, l=1.0):
    return BranchResult(
        j=j,
        result=_FakeResult(energy, converged=converged),
        label=getattr(BranchLabel, label)(j) if label != "outside" else BranchLabel.outside(),
        alpha_energy=energy,
        alpha_bar=None,
        barycenter=np.array(bary if bary is not None else np.asarray(center) / eps),
        center=center,
        eps=eps,
        l=l,
    )


class TestSigmaMembership:
    def test_inside_window(self):
        assert sigma_membership(_FakeResult(1.05), c_v0=1.0, omega=0.1)

    def test_energy_too_high(self):
        assert not sigma_membership(_FakeResult(1.2), c_v0=1.0, omega=0.1)

    def test_off_manifold_rejected(self):
        res = _FakeResult(1.05, nehari=1.0)
        assert not sigma_membership(res, c_v0=1.0, omega=0.1)


class TestSelectGroundState:
    def test_picks_minimum_energy(self):
        records = [_branch(1, 2.0, center=(-2.0,)), _branch(2, 1.5, center=(2.0,))]
        sel = select_ground_state(records)
        assert sel.j == 2
        assert sel.gate_ok

    def test_tie_breaks_to_smallest_index(self):
        records = [_branch(2, 1.5, center=(2.0,)), _branch(1, 1.5, center=(-2.0,))]
        assert select_ground_state(records).j == 1

    def test_permutation_invariant(self):
        records = [
            _branch(1, 1.7, center=(-2.0,)),
            _branch(2, 1.5, center=(2.0,)),
            _branch(3, 1.9, center=(4.5,)),
        ]
        sel_fwd = select_ground_state(records)
        sel_rev = select_ground_state(records[::-1])
        assert sel_fwd.j == sel_rev.j == 2

    def test_gate_flags_far_barycenter(self):
        off = _branch(1, 1.0, center=(2.0,), bary=(2.0 / 0.25 + 3.0,))
        assert not select_ground_state([off]).gate_ok

    def test_no_interior(self):
        records = [_branch(1, 1.0, label="outside"), _branch(2, 1.2, converged=False)]
        with pytest.raises(NoInteriorSolutions):
            select_ground_state(records)


class TestBoundaryMass:
    def test_core_bump_negligible(self):
        g = make_grid(1, 40.0, 512)
        u = gaussian_field(g, 2.0)
        assert boundary_mass_fraction(u) < 1e-10

    def test_edge_bump_registers(self):
        g = make_grid(1, 40.0, 512)
        u = gaussian_field(g, 2.0, center=(39.0,))
        assert boundary_mass_fraction(u) > 0.5


def _fake_record(eps, c_gap, v_gap, perr, c_v0=3.0, v0=1.0, bmass=1e-8):
    from fracstates.diagnostics import SweepRecord

    br = _branch(1, c_v0 + c_gap, eps=eps)
    diag = BranchDiagnostics(
        max_point=np.array([0.0]),
        v_at_max=v0 + v_gap,
        profile_err=perr,
        decay_exponent=-2.0,
        decay_r2=0.999,
        boundary_mass=bmass,
    )
    return SweepRecord(
        eps=eps, branches=[br], diagnostics=[diag], c_eps=c_v0 + c_gap,
        c_v0=c_v0, v0=v0, omega=np.sqrt(eps) * c_v0, sigma_members=[1],
    )


class TestConcentrationReport:
    def test_trend_flags(self):
        recs = [
            _fake_record(0.5, 0.4, 1e-3, 0.7),
            _fake_record(0.25, 0.1, 2.5e-4, 0.4),
        ]
        table = concentration_report(recs, 3.0, 1.0)
        assert table["flags"]["c_gap_decreasing"]
        assert table["flags"]["v_gap_decreasing"]
        assert table["flags"]["profile_error_decreasing"]

    def test_single_record_no_flags(self):
        table = concentration_report([_fake_record(0.5, 0.4, 1e-3, 0.7)], 3.0, 1.0)
        assert table["flags"] == {}
        assert len(table["rows"]) == 1

    def test_untrusted_marking(self):
        rec = _fake_record(0.5, 0.4, 1e-3, 0.7, bmass=1e-3)
        table = concentration_report([rec], 3.0, 1.0)
        assert not table["rows"][0]["trusted"]
