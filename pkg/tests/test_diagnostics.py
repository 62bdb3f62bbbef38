import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.distance import directed_hausdorff

from conftest import tanh_layer
from hyperac import diagnostics as dg
from hyperac.errors import CertificateError, ConfigError
from hyperac.experiments import example_config, prepare
from hyperac.kinetics import Grid1D, KineticState, Observer, derive_params, run, step
from hyperac.potential import DampingSpec, compute_c0

C0 = 2.0 * math.sqrt(2.0) / 3.0


def _const_state(grid, value):
    half = np.full(grid.cells, 0.5 * value)
    return KineticState(half, half, 0.0, grid)


# --- energy -------------------------------------------------------------------------


def test_energy_of_well_state_is_zero(quartic):
    grid = Grid1D(-4.0, 4.0, 200)
    params = derive_params(0.1, 0.8, grid)
    e = dg.energy(_const_state(grid, 1.0), params, quartic)
    assert (e.kinetic, e.gradient, e.potential, e.total_scaled) == (0.0, 0.0, 0.0, 0.0)


def test_energy_of_zero_state_is_pure_potential(quartic):
    grid = Grid1D(-4.0, 4.0, 200)
    params = derive_params(0.1, 0.8, grid)
    e = dg.energy(_const_state(grid, 0.0), params, quartic)
    assert e.kinetic == 0.0 and e.gradient == 0.0
    assert e.potential == pytest.approx(20.0, rel=1e-14)


def test_tanh_layer_energy_matches_c0(quartic):
    eps = 0.1
    grid = Grid1D(-4.0, 4.0, 4000)  # dx = eps / 50
    u = tanh_layer(grid.nodes, eps)
    e = dg.energy_from_samples(u, np.zeros_like(u), grid, eps, 0.8, quartic)
    assert abs(e.total_scaled - C0) < 1e-4


def test_energy_parts_sum_and_unscaled_scaling(quartic):
    grid, params, pot, state, _ = prepare(example_config(3, {"horizon": 1.0}))
    state = run(state, params, pot, 1.0)
    e = dg.energy(state, params, pot)
    assert min(e.kinetic, e.gradient, e.potential) >= 0.0
    assert e.total_scaled == e.kinetic + e.gradient + e.potential
    assert e.total_unscaled == pytest.approx(params.epsilon * e.total_scaled, rel=2**-52)


def test_time_difference_agrees_with_flux_u_t(quartic):
    grid, params, pot, state, _ = prepare(example_config(3, {"cells": 800}))
    s0 = run(state, params, pot, 0.5)
    s1 = step(s0, params, pot)
    _, _, u_t = dg.reconstruct(s0, params, pot)
    fd = dg.time_difference_u_t(s0, s1)
    # both approximate u_t(0.5); they differ by O(dt + dx)
    assert np.max(np.abs(fd - u_t)) < 0.1 * np.max(np.abs(u_t)) + 10 * params.dt


# --- dissipation identity -------------------------------------------------------------


def test_dissipation_residual_of_equilibrium_is_zero(quartic):
    grid = Grid1D(-4.0, 4.0, 200)
    params = derive_params(0.1, 0.8, grid)
    traj = dg.Trajectory()
    run(_const_state(grid, 1.0), params, quartic, 5.0, [traj])
    assert len(traj.states) > 2
    assert dg.dissipation_residual(traj, params, quartic, DampingSpec.relaxation(0.8)) == 0.0


def _residual(config):
    grid, params, pot, state, _ = prepare(config)
    traj = dg.Trajectory()
    run(state, params, pot, config.horizon, [traj])
    damping = DampingSpec.relaxation(config.tau, pot)
    return traj, params, pot, damping, dg.dissipation_residual(traj, params, pot, damping)


def test_example1_residual_halves_under_refinement():
    coarse = _residual(example_config(1, {"horizon": 10.0, "cells": 4000}))[-1]
    fine = _residual(example_config(1, {"horizon": 10.0, "cells": 8000}))[-1]
    assert coarse / fine >= 1.5


def test_sigma_dissipation_inequality():
    traj, params, pot, damping, res = _residual(example_config(3, {"horizon": 10.0}))
    drop = dg.energy(traj.states[0], params, pot).total_scaled - dg.energy(traj.states[-1], params, pot).total_scaled
    unit = dg.dissipated(traj, params, pot, DampingSpec.constant(1.0))
    assert drop >= damping.sigma * unit - res


def test_energy_is_monotone_within_ten_residuals():
    traj, params, pot, _, res = _residual(example_config(3, {"horizon": 10.0}))
    energies = np.array([dg.energy(s, params, pot).total_scaled for s in traj.states])
    assert np.max(np.diff(energies)) <= 10.0 * res


def test_meter_matches_batch_dissipation():
    grid, params, pot, state, _ = prepare(example_config(3, {"horizon": 2.0}))
    damping = DampingSpec.relaxation(0.6)
    traj = dg.Trajectory()
    meter = dg.DissipationMeter(params, pot, damping)
    run(state, params, pot, 2.0, [traj, meter])
    assert meter.expended == pytest.approx(dg.dissipated(traj, params, pot, damping), rel=1e-13)
    assert meter.times == traj.times
    assert all(b >= a for a, b in zip(meter.history, meter.history[1:]))


# --- interfaces -------------------------------------------------------------------------


def test_tanh_interface_is_analytic_preimage():
    eps = 0.2
    grid = Grid1D(-4.0, 4.0, 4000)
    rep = dg.interface_set(tanh_layer(grid.nodes, eps), grid, -0.5, 0.5)
    half = math.sqrt(2.0) * eps * math.atanh(0.5)
    assert len(rep.intervals) == 1 and rep.count == 1
    lo, hi = rep.intervals[0]
    assert lo == pytest.approx(-half, abs=1e-5)
    assert hi == pytest.approx(half, abs=1e-5)
    assert half == pytest.approx(0.155367, abs=1e-6)


def test_interface_of_well_state_is_empty():
    grid = Grid1D(-4.0, 4.0, 100)
    rep = dg.interface_set(np.ones(100), grid)
    assert rep.intervals == [] and rep.count == 0


def test_smoothed_step_has_two_interfaces():
    grid = Grid1D(-4.0, 4.0, 80)
    prof = dg.StepProfile((-2.0, 2.0))
    u = np.convolve(np.pad(prof(grid.nodes), 1, mode="edge"), [1 / 3, 1 / 3, 1 / 3], mode="valid")
    rep = dg.interface_set(u, grid, -0.5, 0.5)
    assert len(rep.intervals) == 2 and rep.count == 2


def test_bad_K_rejected():
    grid = Grid1D(0.0, 1.0, 10)
    with pytest.raises(ValueError):
        dg.interface_set(np.zeros(10), grid, -1.0, 0.5)
    with pytest.raises(ValueError):
        dg.interface_set(np.zeros(10), grid, 0.5, 0.2)


def _scan_oracle(u, grid, lo, hi, sub=64):
    """Dense membership scan of the linear interpolant; returns a point set."""
    x = grid.nodes
    pts = []
    s = np.linspace(0.0, 1.0, sub + 1)
    for j in range(len(u) - 1):
        vals = (1.0 - s) * u[j] + s * u[j + 1]
        xs = (1.0 - s) * x[j] + s * x[j + 1]
        pts.extend(xs[(vals >= lo) & (vals <= hi)])
    return np.array(pts)


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.floats(-1.5, 1.5), min_size=3, max_size=25),
    st.floats(-0.9, 0.9),
    st.floats(0.0, 0.9),
)
def test_interface_agrees_with_brute_force_scan(values, lo, width):
    hi = min(lo + width, 0.95)
    u = np.array(values)
    grid = Grid1D(0.0, 1.0, len(u))
    x = grid.nodes
    rep = dg.interface_set(u, grid, lo, hi)
    tol = 1e-9

    def covered(p):
        return any(a - tol <= p <= b + tol for a, b in rep.intervals)

    # every node and every scanned point of the preimage is covered
    for p in _scan_oracle(u, grid, lo, hi):
        assert covered(p)
    for xj, uj in zip(x, u):
        if min(abs(uj - lo), abs(uj - hi)) > 1e-6:  # clear of the boundary of K
            assert covered(xj) == (lo <= uj <= hi)
    # nothing outside the preimage is covered
    for a, b in rep.intervals:
        inside = np.interp(np.linspace(a, b, 257), x, u)
        assert np.all((inside >= lo - tol) & (inside <= hi + tol))
    assert all(b1 < a2 for (_, b1), (a2, _) in zip(rep.intervals, rep.intervals[1:]))


# --- hausdorff --------------------------------------------------------------------------


def test_hausdorff_examples():
    assert dg.hausdorff([0.0], [0.0]) == 0.0
    assert dg.hausdorff([0.0], [1.0]) == 1.0
    assert dg.hausdorff([0.0, 2.0], [1.0]) == 1.0
    assert dg.hausdorff([(0.0, 1.0)], [(0.0, 1.0), 3.0]) == 2.0
    # midpoint of the gap of B maximizes the distance from A's interval
    assert dg.hausdorff([(0.0, 4.0)], [0.0, 4.0]) == 2.0


def test_hausdorff_empty_is_inf():
    assert dg.hausdorff([], [1.0]) == math.inf
    assert dg.hausdorff([(0.0, 1.0)], []) == math.inf


_item = st.one_of(
    st.floats(-5, 5),
    st.tuples(st.floats(-5, 5), st.floats(-5, 5)),
)
_set = st.lists(_item, min_size=1, max_size=4)


def _dense(A, h=1e-3):
    pts = []
    for a, b in dg._as_intervals(A):
        n = max(1, int(math.ceil((b - a) / h)))
        pts.extend(np.linspace(a, b, n + 1))
    return np.array(pts)[:, None]


@settings(max_examples=80, deadline=None)
@given(_set, _set)
def test_hausdorff_matches_dense_sampling(A, B):
    exact = dg.hausdorff(A, B)
    a, b = _dense(A), _dense(B)
    sampled = max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0])
    assert exact == pytest.approx(sampled, abs=2e-3)


@settings(max_examples=80, deadline=None)
@given(_set, _set, _set)
def test_hausdorff_is_a_metric(A, B, C):
    assert dg.hausdorff(A, A) == 0.0
    assert dg.hausdorff(A, B) == dg.hausdorff(B, A)
    assert dg.hausdorff(A, C) <= dg.hausdorff(A, B) + dg.hausdorff(B, C) + 1e-12


# --- transition counting -----------------------------------------------------------------


def test_transition_count_examples():
    grid = Grid1D(-4.0, 4.0, 800)
    assert dg.transition_count(tanh_layer(grid.nodes, 0.1), grid) == 1
    assert dg.transition_count(np.zeros(800), grid) == 0
    assert dg.transition_count(np.cos(np.pi * grid.nodes / 2), grid) == 4
    # dips into the dead band do not count
    assert dg.transition_count([1.0, 0.4, 0.9, -0.4, 1.0]) == 0
    with pytest.raises(ValueError):
        dg.transition_count([0.0], hysteresis=1.0)


def _layers(x):
    return -np.tanh((x + 2.0) / 0.2) * np.tanh((x - 1.0) / 0.2) * np.tanh((x - 3.0) / 0.2)


@pytest.mark.parametrize("power", [0.5, 2.0, 3.0])
def test_transition_count_invariant_under_monotone_warp(power):
    grid = Grid1D(-4.0, 4.0, 2000)
    x = grid.nodes
    warped = -4.0 + 8.0 * ((x + 4.0) / 8.0) ** power
    base = dg.transition_count(_layers(x), grid)
    assert base == 3
    assert dg.transition_count(_layers(warped), grid) == base


@given(st.lists(st.floats(-2, 2), max_size=40))
def test_transition_count_symmetric_under_negation(values):
    u = np.array(values)
    assert dg.transition_count(u) == dg.transition_count(-u)


def test_example2_final_count_is_four():
    grid, params, pot, state, _ = prepare(example_config(2))
    final = run(state, params, pot, 1000.0)
    assert dg.transition_count(final.u, grid) == 4


# --- step profiles, L1 distance and the layer certificate -------------------------------


def test_step_profile_values():
    prof = dg.StepProfile((-2.0, 2.0), -1)
    assert prof(np.array([-3.0, 0.0, 3.0])).tolist() == [-1.0, 1.0, -1.0]
    assert prof.N == 2
    assert prof.side_signs(1) == (1, -1)
    with pytest.raises(ValueError):
        dg.StepProfile((1.0, 0.0))
    with pytest.raises(ValueError):
        dg.StepProfile((0.0,), 0)


def test_l1_distance_examples():
    grid = Grid1D(-4.0, 4.0, 800)
    prof = dg.StepProfile((0.0,), -1)
    assert dg.l1_distance_to_profile(prof(grid.nodes), grid, prof) == 0.0
    assert dg.l1_distance_to_profile(np.ones(800), grid, prof) == pytest.approx(8.0, rel=1e-14)


def test_l1_distance_of_tanh_layer():
    # int |tanh(x/w) - sign(x)| = 2 w ln 2 with w = sqrt(2) eps
    values = {}
    for eps in (0.1, 0.05):
        grid = Grid1D(-4.0, 4.0, 16000)
        prof = dg.StepProfile((0.0,), -1)
        values[eps] = dg.l1_distance_to_profile(tanh_layer(grid.nodes, eps), grid, prof)
        assert values[eps] == pytest.approx(2.0 * math.sqrt(2.0) * eps * math.log(2.0), rel=1e-5)
    assert values[0.1] == pytest.approx(0.19605162869, rel=1e-5)
    assert values[0.1] / values[0.05] == pytest.approx(2.0, rel=1e-4)


def test_certificate_on_tanh_layer(quartic):
    eps = 0.01
    grid = Grid1D(-4.0, 4.0, 4000)
    cert = dg.layer_certificate(tanh_layer(grid.nodes, eps), grid, quartic, dg.StepProfile((0.0,)), eps, 1, 0.5)
    assert cert.x_points[0] < 0.0 < cert.y_points[0]
    assert cert.margin >= -5 * eps
    assert cert.c0 == pytest.approx(C0, abs=1e-10)


def test_certificate_on_exact_step(quartic):
    eps = 0.1
    grid = Grid1D(-4.0, 4.0, 800)
    prof = dg.StepProfile((0.0,))
    cert = dg.layer_certificate(prof(grid.nodes), grid, quartic, prof, eps, 1, 0.5)
    assert cert.F_x == [0.0] and cert.F_y == [0.0]
    # two cells carry u_x = 1/dx, everything else vanishes
    assert cert.layer_energies[0] == pytest.approx(eps / grid.dx, rel=1e-12)


def test_certificate_errors(quartic):
    grid = Grid1D(-4.0, 4.0, 800)
    with pytest.raises(CertificateError) as info:
        dg.layer_certificate(np.zeros(800), grid, quartic, dg.StepProfile((0.0,)), 0.1)
    assert info.value.jump == 0.0
    with pytest.raises(ValueError):
        dg.layer_certificate(np.zeros(800), grid, quartic, dg.StepProfile((-0.1, 0.1)), 0.1, 1, 0.1)
    with pytest.raises(ValueError):
        dg.layer_certificate(np.zeros(800), grid, quartic, dg.StepProfile((5.0,)), 0.1)


def test_certificate_default_c0_is_quartic_constant(quartic):
    assert compute_c0(quartic) == pytest.approx(C0, abs=1e-12)


# --- exit time -------------------------------------------------------------------------


def test_exit_time_of_frozen_layer_is_inf():
    grid = Grid1D(-4.0, 4.0, 800)
    u = tanh_layer(grid.nodes, 0.1)
    states = [KineticState(u / 2, u / 2, float(t), grid) for t in range(20)]
    assert dg.exit_time(states, grid) == math.inf


def test_exit_time_of_translating_layer():
    grid = Grid1D(-4.0, 4.0, 1600)
    states = []
    for t in range(11):
        u = tanh_layer(grid.nodes, 0.1, center=0.1 * t)
        states.append(KineticState(u / 2, u / 2, float(t), grid))
    # drift 0.1 t exceeds 0.25 first at the sample t = 3
    assert dg.exit_time(states, grid, delta1=0.25) == 3.0


def test_exit_time_needs_an_initial_interface():
    grid = Grid1D(-4.0, 4.0, 100)
    with pytest.raises(ConfigError):
        dg.exit_time([_const_state(grid, 1.0)], grid)
    with pytest.raises(ConfigError):
        dg.exit_time([], grid)


def test_example1_interfaces_do_not_escape():
    # cos/10 lies inside K everywhere at t=0, so the reference is taken once layers exist
    cfg = example_config(1)
    grid, params, pot, state, _ = prepare(cfg)
    traj = dg.Trajectory()
    run(state, params, pot, cfg.horizon, [Observer(traj, [20.0, 50.0, 100.0, 200.0, 500.0, 1000.0])])
    assert traj.times[0] >= 20.0
    assert dg.exit_time(traj, grid, delta1=0.2) == math.inf
