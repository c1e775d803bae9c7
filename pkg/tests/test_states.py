"""Two-mode state constructors and pointwise field evaluation."""

import math

import numpy as np
import pytest

from bohmpol.states import (
    NODE_GUARD,
    density_velocity_current,
    evaluate,
    from_coefficients,
    glauber_center,
    make_glauber,
    make_glauber_truncated,
    make_noon,
    make_su2,
    point_density_velocity,
    wave_and_gradient,
)

SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def test_su2_coefficients_small_n_longhand():
    # binomial amplitudes sqrt(C(n,m)) a1^m a2^(n-m) / |a|^n for n = 2,
    # a = (4, 2i): |a|^2 = 20, so the three entries are 16/20, sqrt(2)*8i/20,
    # and (2i)^2/20 = -4/20, already unit norm
    state = make_su2(4.0, 2.0j, 2)
    c = state.coefficients
    assert c.shape == (3, 3)
    assert abs(c[2, 0] - 0.8) < 1e-15
    assert abs(c[1, 1] - (8.0 * SQRT2 / 20.0) * 1j) < 1e-15
    assert abs(c[0, 2] - (-0.2)) < 1e-15
    off = [c[m, k] for m in range(3) for k in range(3) if m + k != 2]
    assert max(abs(v) for v in off) == 0.0
    assert state.total_photon_number == 2
    assert state.normalized


def test_noon_coefficients_two_entries():
    state = make_noon(4.0, 2.0j, 3)
    c = state.coefficients
    scale = math.sqrt(20.0)
    assert abs(c[3, 0] - 4.0 / scale) < 1e-15
    assert abs(c[0, 3] - 2.0j / scale) < 1e-15
    assert np.count_nonzero(c) == 2
    assert state.total_photon_number == 3


def test_su2_norm_is_unit_for_any_amplitudes():
    rng = np.random.default_rng(5)
    for _ in range(5):
        a1, a2 = (complex(*rng.normal(size=2)) for _ in range(2))
        n = int(rng.integers(1, 7))
        state = make_su2(a1, a2, n)
        assert abs(np.sum(np.abs(state.coefficients) ** 2) - 1.0) < 1e-12


def test_truncated_coherent_is_normalized_mixture_of_totals():
    state = make_glauber_truncated(4.0, 2.0j, 60)
    assert state.total_photon_number is None
    assert abs(np.sum(np.abs(state.coefficients) ** 2) - 1.0) < 1e-12


def test_coefficients_are_write_protected():
    state = make_su2(1.0, 1.0j, 2)
    with pytest.raises(ValueError):
        state.coefficients[0, 0] = 1.0


def test_constructor_rejects_bad_input():
    with pytest.raises(ValueError):
        make_su2(0.0, 0.0, 2)
    with pytest.raises(ValueError):
        make_su2(1.0, 1.0j, -1)
    with pytest.raises(ValueError):
        make_noon(1.0, 1.0j, 0)
    with pytest.raises(ValueError):
        make_glauber_truncated(1.0, 1.0j, -1)
    with pytest.raises(ValueError):
        from_coefficients(np.zeros((3, 3), dtype=complex))
    with pytest.raises(ValueError):
        from_coefficients(np.array([1.0, 0.0], dtype=complex))


# ---------------------------------------------------------------------------
# coherent states
# ---------------------------------------------------------------------------

def test_glauber_density_is_translated_gaussian():
    state = make_glauber(4.0, 2.0j)
    assert abs(state.peak_density - 1.0 / math.pi) < 1e-15
    rng = np.random.default_rng(3)
    for t in (0.0, 0.9, 4.1):
        center = glauber_center(4.0, 2.0j, t)
        pts = center.x_tilde + rng.uniform(-2, 2, size=(20, 2))
        psi, _, _ = wave_and_gradient(state, pts, t)
        d2 = np.sum((pts - center.x_tilde) ** 2, axis=-1)
        expect = np.exp(-d2) / math.pi
        assert np.max(np.abs(np.abs(psi) ** 2 - expect)) < 1e-14


def test_glauber_velocity_field_is_uniform():
    # Gaussian packet phase is linear in x, so the guided velocity is the
    # same everywhere and equals the center's conjugate coordinate
    state = make_glauber(4.0, 2.0j)
    rng = np.random.default_rng(11)
    for t in (0.0, 1.3):
        center = glauber_center(4.0, 2.0j, t)
        pts = center.x_tilde + rng.uniform(-1.5, 1.5, size=(10, 2))
        for p in pts:
            _, v1, v2 = point_density_velocity(state, p[0], p[1], t)
            assert abs(v1 - center.y_tilde[0]) < 1e-10
            assert abs(v2 - center.y_tilde[1]) < 1e-10


def test_glauber_center_orbit_geometry():
    c0 = glauber_center(4.0, 2.0j, 0.0)
    assert np.allclose(c0.x_tilde, [4.0 * SQRT2, 0.0], atol=1e-14)
    assert np.allclose(c0.y_tilde, [0.0, 2.0 * SQRT2], atol=1e-14)
    # half a cycle reflects the center through the origin
    for t in (0.0, 0.7, 2.0):
        a = glauber_center(4.0, 2.0j, t)
        b = glauber_center(4.0, 2.0j, t + math.pi)
        assert np.allclose(b.x_tilde, -a.x_tilde, atol=1e-12)
        assert np.allclose(b.y_tilde, -a.y_tilde, atol=1e-12)
    # the conjugate coordinate is the center's velocity
    h = 1e-6
    mid = glauber_center(4.0, 2.0j, 0.7)
    fd = (glauber_center(4.0, 2.0j, 0.7 + h).x_tilde
          - glauber_center(4.0, 2.0j, 0.7 - h).x_tilde) / (2 * h)
    assert np.max(np.abs(fd - mid.y_tilde)) < 1e-8


# ---------------------------------------------------------------------------
# fixed-total-number states
# ---------------------------------------------------------------------------

def test_su2_equal_amplitude_case_is_pure_vortex():
    # for amplitudes (1, i) the superposition collapses to
    # (x1 + i x2)^n exp(-r^2/2) up to a constant factor
    rng = np.random.default_rng(9)
    pts = rng.uniform(-2, 2, size=(12, 2))
    for n in (1, 2, 3):
        state = make_su2(1.0, 1.0j, n)
        psi, _, _ = wave_and_gradient(state, pts, 0.0)
        z = pts[:, 0] + 1j * pts[:, 1]
        model = z**n * np.exp(-0.5 * np.abs(z) ** 2)
        ratio = psi / model
        assert np.max(np.abs(ratio - ratio[0])) < 1e-12


def test_number_state_time_dependence_is_global_phase():
    # a fixed total photon number n evolves as exp(-i n t) in the frame
    # with the zero-point energy removed
    rng = np.random.default_rng(2)
    pts = rng.uniform(-2, 2, size=(8, 2))
    for state, n in ((make_su2(4.0, 2.0j, 3), 3), (make_noon(4.0, 2.0j, 4), 4)):
        base, _, _ = wave_and_gradient(state, pts, 0.0)
        later, _, _ = wave_and_gradient(state, pts, 0.6)
        assert np.max(np.abs(later - np.exp(-1j * n * 0.6) * base)) < 1e-12


def test_number_state_parity():
    rng = np.random.default_rng(4)
    pts = rng.uniform(-2.5, 2.5, size=(10, 2))
    for state, n in ((make_su2(4.0, 2.0j, 3), 3), (make_noon(4.0, 2.0j, 2), 2)):
        plus, _, _ = wave_and_gradient(state, pts, 0.2)
        minus, _, _ = wave_and_gradient(state, -pts, 0.2)
        assert np.max(np.abs(minus - (-1.0) ** n * plus)) < 1e-13


# ---------------------------------------------------------------------------
# evaluation paths
# ---------------------------------------------------------------------------

def test_scalar_path_matches_array_path():
    rng = np.random.default_rng(8)
    pts = rng.uniform(-3, 3, size=(30, 2))
    t = 0.45
    for state in (make_glauber(4.0, 2.0j), make_su2(4.0, 2.0j, 3),
                  make_noon(4.0, 2.0j, 3), make_glauber_truncated(4.0, 2.0j, 40)):
        rho, v, _ = density_velocity_current(state, pts, t)
        for p, r_expect, v_expect in zip(pts, rho, v):
            r, v1, v2 = point_density_velocity(state, p[0], p[1], t)
            assert abs(r - r_expect) < 1e-12 * max(1.0, r_expect)
            scale = max(1.0, float(np.hypot(*v_expect)))
            assert abs(v1 - v_expect[0]) < 1e-8 * scale
            assert abs(v2 - v_expect[1]) < 1e-8 * scale


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(6)
    pts = rng.uniform(-2, 2, size=(15, 2))
    h = 1e-6
    for state in (make_glauber(4.0, 2.0j), make_noon(4.0, 2.0j, 3)):
        _, d1, d2 = wave_and_gradient(state, pts, 0.3)
        fp1, _, _ = wave_and_gradient(state, pts + [h, 0.0], 0.3)
        fm1, _, _ = wave_and_gradient(state, pts - [h, 0.0], 0.3)
        fp2, _, _ = wave_and_gradient(state, pts + [0.0, h], 0.3)
        fm2, _, _ = wave_and_gradient(state, pts - [0.0, h], 0.3)
        assert np.max(np.abs((fp1 - fm1) / (2 * h) - d1)) < 1e-7
        assert np.max(np.abs((fp2 - fm2) / (2 * h) - d2)) < 1e-7


def test_evaluate_guards_velocity_at_nodes():
    state = make_noon(4.0, 2.0j, 3)
    at_node = evaluate(state, (0.0, 0.0), 0.0)
    assert at_node.density < NODE_GUARD * state.peak_density
    assert at_node.velocity is None
    assert np.all(np.isfinite(at_node.current))
    away = evaluate(state, (0.9, 0.4), 0.0)
    assert away.velocity is not None
    assert np.allclose(away.current, away.density * away.velocity, atol=1e-15)


def test_point_evaluation_at_exact_zero_density():
    # odd-order eigenfunctions vanish exactly at 0 in floats, so the origin
    # of an odd two-mode cat is a bit-exact zero; the scalar fast path
    # reports (0, nan, nan) there instead of dividing by zero
    state = make_noon(4.0, 2.0j, 3)
    rho, v1, v2 = point_density_velocity(state, 0.0, 0.0, 0.0)
    assert rho == 0.0
    assert math.isnan(v1) and math.isnan(v2)


def test_wave_and_gradient_point_shapes():
    state = make_su2(4.0, 2.0j, 3)
    psi, d1, d2 = wave_and_gradient(state, np.zeros((4, 5, 2)), 0.0)
    assert psi.shape == d1.shape == d2.shape == (4, 5)
    with pytest.raises(ValueError):
        wave_and_gradient(state, np.zeros((4, 3)), 0.0)
