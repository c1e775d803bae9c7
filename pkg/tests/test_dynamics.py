"""Guided-trajectory integration and loop circulation."""

import math
from dataclasses import replace

import numpy as np
import pytest

from bohmpol.dynamics import (
    IntegrationParams,
    Loop,
    circulation,
    glauber_analytic,
    integrate,
    integrate_fixed_rk4,
    sample_positions,
)
from bohmpol.states import make_glauber, make_su2, point_density_velocity

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# adaptive integrator
# ---------------------------------------------------------------------------

def test_adaptive_matches_coherent_closed_form():
    state = make_glauber(4.0, 2.0j)
    params = IntegrationParams(t0=0.0, t1=TWO_PI)
    for seed in ([4.0 * math.sqrt(2.0), 0.0], [5.0, 0.7]):
        traj = integrate(state, seed, params)
        assert traj.status == "completed"
        exact = glauber_analytic(4.0, 2.0j, seed, traj.times)
        assert np.max(np.abs(traj.points - exact)) < 1e-8


def test_sample_spacing_never_exceeds_max_step():
    state = make_su2(4.0, 2.0j, 3)
    traj = integrate(state, [2.5, 0.0], IntegrationParams(t0=0.0, t1=1.5))
    assert traj.status == "completed"
    assert traj.times[0] == 0.0
    assert np.all(np.diff(traj.times) > 0)
    assert np.max(np.diff(traj.times)) <= 0.01 * (1 + 1e-12)
    assert traj.accepted_steps == len(traj.times) - 1


def test_backward_integration_reverses_forward():
    state = make_su2(4.0, 2.0j, 3)
    seed = np.array([2.5, 0.0])
    fwd = integrate(state, seed, IntegrationParams(t0=0.0, t1=1.5))
    back = integrate(state, fwd.points[-1], IntegrationParams(t0=1.5, t1=0.0))
    assert back.status == "completed"
    assert np.max(np.abs(back.points[-1] - seed)) < 1e-10


def test_zero_span_returns_single_sample():
    state = make_glauber(4.0, 2.0j)
    traj = integrate(state, [5.65, 0.0], IntegrationParams(t0=0.3, t1=0.3))
    assert traj.status == "completed"
    assert len(traj.times) == 1
    assert traj.times[0] == 0.3


def test_seed_on_node_is_rejected():
    state = make_su2(1.0, 1.0j, 2)
    with pytest.raises(ValueError):
        integrate(state, [0.0, 0.0], IntegrationParams())


def test_step_underflow_status():
    # min_step above max_step leaves no admissible step at all
    state = make_glauber(4.0, 2.0j)
    params = IntegrationParams(max_step=0.01, min_step=0.5)
    traj = integrate(state, [5.65, 0.0], params)
    assert traj.status == "step_underflow"
    assert len(traj.times) == 1


def test_abort_near_node_when_orbit_dips_under_guard():
    # orbits around the off-axis region pass through a density trough; an
    # abort threshold placed inside the orbit's density range must stop
    # the trajectory partway instead of stepping across the trough
    state = make_su2(4.0, 2.0j, 3)
    params = IntegrationParams()
    orbit = integrate(state, [0.0, 0.3], params)
    assert orbit.status == "completed"
    dens = np.array([
        point_density_velocity(state, p[0], p[1], t)[0]
        for t, p in zip(orbit.times, orbit.points)
    ])
    assert dens.max() > 2.0 * dens.min()
    seed = orbit.points[int(np.argmax(dens))]     # stationary state: same orbit
    cut = math.sqrt(dens.max() * dens.min())
    guarded = replace(params, node_abort_density=cut / state.peak_density)
    traj = integrate(state, seed, guarded)
    assert traj.status == "aborted_near_node"
    assert traj.times[-1] < params.t1


def test_fixed_rk4_fourth_order_convergence():
    state = make_su2(4.0, 2.0j, 3)
    seed = [2.5, 0.0]
    ref = integrate(state, seed,
                    IntegrationParams(t0=0.0, t1=0.5, rel_tol=1e-12, abs_tol=1e-14))
    errs = []
    for h in (0.02, 0.01):
        traj = integrate_fixed_rk4(state, seed, IntegrationParams(t0=0.0, t1=0.5, max_step=h))
        errs.append(float(np.max(np.abs(traj.points[-1] - ref.points[-1]))))
    ratio = errs[0] / errs[1]
    assert 12.0 < ratio < 20.0            # halving h cuts the error ~2^4


def test_params_validation():
    with pytest.raises(ValueError):
        IntegrationParams(max_step=0.0)
    with pytest.raises(ValueError):
        IntegrationParams(min_step=-1e-3)
    with pytest.raises(ValueError):
        IntegrationParams(rel_tol=0.0)
    with pytest.raises(ValueError):
        integrate(make_glauber(1.0, 1.0), [1.0, 2.0, 3.0], IntegrationParams())


# ---------------------------------------------------------------------------
# closed form and resampling
# ---------------------------------------------------------------------------

def test_analytic_trajectories_close_after_one_cycle():
    seed = np.array([5.0, 0.3])
    path = glauber_analytic(4.0, 2.0j, seed, np.array([0.0, TWO_PI]))
    assert path.shape == (2, 2)
    assert np.max(np.abs(path[1] - path[0])) < 1e-12
    single = glauber_analytic(4.0, 2.0j, seed, 0.0)
    assert single.shape == (2,)
    assert np.allclose(single, seed, atol=1e-15)


def test_sample_positions_interpolates_accurately():
    state = make_glauber(4.0, 2.0j)
    seed = [5.65685424949238, 0.0]
    traj = integrate(state, seed, IntegrationParams(t0=0.0, t1=TWO_PI))
    rng = np.random.default_rng(13)
    times = rng.uniform(0.0, TWO_PI, size=25)
    got = sample_positions(traj, state, times)
    exact = glauber_analytic(4.0, 2.0j, seed, times)
    assert np.max(np.abs(got - exact)) < 1e-8
    scalar = sample_positions(traj, state, 1.234)
    assert scalar.shape == (2,)
    with pytest.raises(ValueError):
        sample_positions(traj, state, [TWO_PI + 0.1])


# ---------------------------------------------------------------------------
# circulation
# ---------------------------------------------------------------------------

def test_circulation_counts_enclosed_charge():
    state = make_su2(1.0, 1.0j, 2)
    for radius in (0.3, 0.7, 1.5):
        circ = circulation(state, Loop(center=[0.0, 0.0], radius=radius), 0.0)
        assert abs(circ - 2.0 * TWO_PI) < 1e-10
    empty = circulation(state, Loop(center=[2.5, 0.0], radius=0.3), 0.0)
    assert abs(empty) < 1e-10


def test_circulation_vanishes_for_nodeless_state():
    state = make_glauber(4.0, 2.0j)
    circ = circulation(state, Loop(center=[5.65, 0.0], radius=1.0), 0.0)
    assert abs(circ) < 1e-10


def test_circulation_rejects_loop_through_node():
    state = make_su2(1.0, 1.0j, 2)
    with pytest.raises(ValueError):
        circulation(state, Loop(center=[0.5, 0.0], radius=0.5), 0.0)


def test_loop_validation():
    with pytest.raises(ValueError):
        Loop(center=[0.0, 0.0, 0.0], radius=1.0)
    with pytest.raises(ValueError):
        Loop(center=[0.0, 0.0], radius=0.0)
    with pytest.raises(ValueError):
        Loop(center=[0.0, 0.0], radius=1.0, samples=32)
