"""Trajectory integration and phase circulation.

The guidance equation dx/dt = Im(grad psi / psi) is integrated with an
embedded Dormand-Prince 4/5 pair under proportional step control.  Steps
are capped at max_step, so the recorded samples (every accepted step) are
never further apart than max_step in time.

Near zeros of psi the velocity diverges; any step whose endpoint density
falls below node_abort_density * peak stops the trajectory with status
"aborted_near_node" instead of extrapolating through the singularity.
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .states import TwoModeState, point_density_velocity, wave_and_gradient

__all__ = [
    "IntegrationParams",
    "Trajectory",
    "Loop",
    "integrate",
    "integrate_fixed_rk4",
    "glauber_analytic",
    "sample_positions",
    "circulation",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class IntegrationParams:
    """Controls for one trajectory integration.

    Tolerances enter the mixed componentwise scale
    abs_tol + rel_tol * |x|; node_abort_density is relative to the
    state's peak-density estimate.
    """

    t0: float = 0.0
    t1: float = TWO_PI
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float = 0.01
    min_step: float = 1e-10
    node_abort_density: float = 1e-12

    def __post_init__(self):
        if self.max_step <= 0 or self.min_step <= 0:
            raise ValueError("step bounds must be positive")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class Trajectory:
    """Integration result: samples at every accepted step.

    times is strictly monotone and starts at t0 with points[0] = seed;
    status is one of "completed", "aborted_near_node", "step_underflow".
    """

    seed: np.ndarray
    times: np.ndarray
    points: np.ndarray
    status: str
    accepted_steps: int = 0
    rejected_steps: int = 0


@dataclass(frozen=True)
class Loop:
    """Closed circular loop used for phase-circulation integrals."""

    center: np.ndarray
    radius: float
    samples: int = 64

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        if self.center.shape != (2,):
            raise ValueError("loop center must be a point of shape (2,)")
        if not self.radius > 0:
            raise ValueError("loop radius must be positive")
        if self.samples < 64:
            raise ValueError("loop needs at least 64 samples")


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4) tableau
# ---------------------------------------------------------------------------

_DP_C = (0.2, 0.3, 0.8, 8.0 / 9.0, 1.0)
_DP_A = (
    (0.2,),
    (3.0 / 40.0, 9.0 / 40.0),
    (44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0),
    (19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0),
    (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0,
     -5103.0 / 18656.0),
)
_DP_B5 = (35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0,
          -2187.0 / 6784.0, 11.0 / 84.0)
# fifth-order minus embedded fourth-order weights; k7 = f(t+h, y5)
_DP_ERR = (71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0,
           -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)


def _guided_velocity(state: TwoModeState, t: float, x1: float, x2: float):
    rho, v1, v2 = point_density_velocity(state, x1, x2, t)
    return rho, v1, v2


def integrate(state: TwoModeState, seed, params: IntegrationParams) -> Trajectory:
    """Integrate one guided trajectory from seed over [t0, t1].

    Backward spans (t1 < t0) are allowed.  The seed must sit above the
    node guard at t0.  Every accepted step is recorded, so consecutive
    sample times differ by at most max_step.
    """
    seed = np.asarray(seed, dtype=float)
    if seed.shape != (2,):
        raise ValueError("seed must be a point of shape (2,)")
    threshold = params.node_abort_density * state.peak_density
    t = float(params.t0)
    x1, x2 = float(seed[0]), float(seed[1])
    rho, v1, v2 = _guided_velocity(state, t, x1, x2)
    if not rho > threshold:
        raise ValueError(
            f"seed density {rho:.3e} is inside the node guard "
            f"({threshold:.3e}); refusing to start on a zero of psi"
        )
    times = [t]
    pts = [(x1, x2)]
    span = float(params.t1) - float(params.t0)
    if span == 0.0:
        return Trajectory(seed=seed.copy(), times=np.array(times),
                          points=np.array(pts), status="completed")

    direction = 1.0 if span > 0 else -1.0
    h = min(params.max_step, abs(span))
    k1 = (v1, v2)                      # FSAL: first stage reused from last step
    accepted = 0
    rejected = 0
    status = "completed"
    t_end = float(params.t1)

    while (t_end - t) * direction > 0.0:
        h = min(h, abs(t_end - t))
        if h < params.min_step:
            status = "step_underflow"
            break
        hs = direction * h
        ks = [k1]
        bad_stage = not (math.isfinite(k1[0]) and math.isfinite(k1[1]))
        if not bad_stage:
            for row, cfrac in zip(_DP_A, _DP_C):
                y1 = x1 + hs * sum(a * k[0] for a, k in zip(row, ks))
                y2 = x2 + hs * sum(a * k[1] for a, k in zip(row, ks))
                _, w1, w2 = _guided_velocity(state, t + cfrac * hs, y1, y2)
                if not (math.isfinite(w1) and math.isfinite(w2)):
                    bad_stage = True
                    break
                ks.append((w1, w2))
        if not bad_stage:
            n1 = x1 + hs * sum(b * k[0] for b, k in zip(_DP_B5, ks))
            n2 = x2 + hs * sum(b * k[1] for b, k in zip(_DP_B5, ks))
            rho_new, w1, w2 = _guided_velocity(state, t + hs, n1, n2)
            bad_stage = not (math.isfinite(w1) and math.isfinite(w2))
        if bad_stage or rho_new <= threshold:
            # Endpoint (or a stage) ran under the node guard: shrink rather
            # than step across a zero; truncate once steps bottom out.
            rejected += 1
            h *= 0.5
            if h < params.min_step:
                status = "aborted_near_node"
                break
            continue
        ks.append((w1, w2))
        e1 = hs * sum(e * k[0] for e, k in zip(_DP_ERR, ks))
        e2 = hs * sum(e * k[1] for e, k in zip(_DP_ERR, ks))
        s1 = params.abs_tol + params.rel_tol * max(abs(x1), abs(n1))
        s2 = params.abs_tol + params.rel_tol * max(abs(x2), abs(n2))
        err = math.sqrt(0.5 * ((e1 / s1) ** 2 + (e2 / s2) ** 2))
        if err > 1.0:
            rejected += 1
            h *= max(0.2, 0.9 * err ** -0.2)
            if h < params.min_step:
                status = "step_underflow"
                break
            continue
        t += hs
        x1, x2 = n1, n2
        times.append(t)
        pts.append((x1, x2))
        accepted += 1
        k1 = (w1, w2)
        grow = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        h = min(h * grow, params.max_step)

    return Trajectory(
        seed=seed.copy(),
        times=np.array(times),
        points=np.array(pts),
        status=status,
        accepted_steps=accepted,
        rejected_steps=rejected,
    )


def integrate_fixed_rk4(state: TwoModeState, seed, params: IntegrationParams) -> Trajectory:
    """Classical fixed-step RK4 fallback, step size = max_step.

    No error control and no node guard beyond non-finite propagation; kept
    for convergence-order checks against the adaptive integrator.
    """
    seed = np.asarray(seed, dtype=float)
    if seed.shape != (2,):
        raise ValueError("seed must be a point of shape (2,)")
    span = float(params.t1) - float(params.t0)
    steps = max(1, math.ceil(abs(span) / params.max_step)) if span else 0
    h = span / steps if steps else 0.0
    t = float(params.t0)
    x1, x2 = float(seed[0]), float(seed[1])
    times = [t]
    pts = [(x1, x2)]
    for _ in range(steps):
        _, a1, a2 = _guided_velocity(state, t, x1, x2)
        _, b1, b2 = _guided_velocity(state, t + 0.5 * h, x1 + 0.5 * h * a1, x2 + 0.5 * h * a2)
        _, c1, c2 = _guided_velocity(state, t + 0.5 * h, x1 + 0.5 * h * b1, x2 + 0.5 * h * b2)
        _, d1, d2 = _guided_velocity(state, t + h, x1 + h * c1, x2 + h * c2)
        x1 += h / 6.0 * (a1 + 2.0 * b1 + 2.0 * c1 + d1)
        x2 += h / 6.0 * (a2 + 2.0 * b2 + 2.0 * c2 + d2)
        t += h
        times.append(t)
        pts.append((x1, x2))
    return Trajectory(
        seed=seed.copy(),
        times=np.array(times),
        points=np.array(pts),
        status="completed",
        accepted_steps=steps,
    )


def glauber_analytic(alpha1, alpha2, seed, times) -> np.ndarray:
    """Exact coherent-state trajectories.

    The packet center pulls every point rigidly:

        x_l(t) = x_l(0) + sqrt(2)|alpha_l| (cos(t - delta_l) - cos(delta_l))

    with delta_l = arg(alpha_l).  All trajectories are congruent ellipse
    translates and close after one cycle.  times may be a scalar or array;
    the result has shape times.shape + (2,).
    """
    seed = np.asarray(seed, dtype=float)
    t = np.asarray(times, dtype=float)
    out = np.empty(t.shape + (2,))
    for axis, alpha in enumerate((complex(alpha1), complex(alpha2))):
        amp = math.sqrt(2.0) * abs(alpha)
        delta = cmath.phase(alpha) if alpha != 0 else 0.0
        out[..., axis] = seed[axis] + amp * (np.cos(t - delta) - math.cos(delta))
    return out


def sample_positions(traj: Trajectory, state: TwoModeState, times) -> np.ndarray:
    """Trajectory positions at arbitrary times inside the integrated span.

    Cubic Hermite interpolation on each step interval, with endpoint
    velocities recomputed from the state; interpolation error is O(h^4)
    and negligible next to the integrator tolerance for max_step <= 0.01.
    """
    query = np.atleast_1d(np.asarray(times, dtype=float))
    ts = traj.times
    order = np.argsort(ts)
    ts_sorted = ts[order]
    if np.any(query < ts_sorted[0] - 1e-12) or np.any(query > ts_sorted[-1] + 1e-12):
        raise ValueError("requested times fall outside the trajectory span")
    vel = np.empty_like(traj.points)
    for i, (tt, pt) in enumerate(zip(traj.times, traj.points)):
        _, v1, v2 = point_density_velocity(state, pt[0], pt[1], tt)
        vel[i] = (v1, v2)
    idx = np.clip(np.searchsorted(ts_sorted, query, side="right") - 1, 0, len(ts) - 2)
    out = np.empty(query.shape + (2,))
    for j, (q, i_sorted) in enumerate(zip(query, idx)):
        i0, i1 = order[i_sorted], order[i_sorted + 1]
        h = ts[i1] - ts[i0]
        s = 0.0 if h == 0 else (q - ts[i0]) / h
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        out[j] = (h00 * traj.points[i0] + h10 * h * vel[i0]
                  + h01 * traj.points[i1] + h11 * h * vel[i1])
    return out if np.ndim(times) else out[0]


# ---------------------------------------------------------------------------
# circulation
# ---------------------------------------------------------------------------

_MAX_LOOP_SAMPLES = 2 ** 20


def circulation(state: TwoModeState, loop: Loop, t: float = 0.0) -> float:
    """Phase circulation of psi around a closed circular loop.

    Sums principal-branch phase increments arg(psi_{k+1} / psi_k) along
    the polyline and refines (doubling the vertex count) until every
    increment is below pi/2, which pins the winding number unambiguously.
    The result is 2*pi times the enclosed topological charge.

    Raises if any vertex density falls under the node guard or if the
    refinement cap is hit; both mean the loop runs too close to a zero.
    """
    guard = 1e-12 * state.peak_density
    samples = loop.samples
    while True:
        theta = np.linspace(0.0, TWO_PI, samples, endpoint=False)
        ring = loop.center + loop.radius * np.stack(
            [np.cos(theta), np.sin(theta)], axis=-1
        )
        verts = np.vstack([ring, ring[:1]])    # exact closure: first == last
        psi, _, _ = wave_and_gradient(state, verts, t)
        dens = psi.real ** 2 + psi.imag ** 2
        if not np.all(dens > guard):
            worst = verts[int(np.argmin(dens))]
            raise ValueError(
                "loop passes the node guard at "
                f"({worst[0]:.6f}, {worst[1]:.6f}); move or shrink the loop"
            )
        increments = np.angle(psi[1:] / psi[:-1])
        if np.max(np.abs(increments)) < 0.5 * math.pi:
            return float(np.sum(increments))
        if samples >= _MAX_LOOP_SAMPLES:
            raise ValueError(
                "circulation did not resolve below the refinement cap; "
                "the loop is too close to a zero of psi"
            )
        samples *= 2
