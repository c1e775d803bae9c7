"""Two-mode field states and their configuration-space wave functions.

A two-mode state lives on the configuration plane x = (x1, x2) of the two
quadratures.  Everything uses natural units (hbar = M = omega = 1), so one
optical cycle is t in [0, 2*pi).

Two representations cover all supported states:

* ``glauber``: a product of two coherent states, evaluated through its
  Gaussian closed form.  The wave packet keeps its ground-state shape and
  its center follows the classical ellipse.
* ``number``: a finite superposition over the two-mode number basis,
  c[m, k] multiplying psi_m(x1) psi_k(x2).  Time evolution multiplies
  c[m, k] by exp(-i (m + k) t); states supported on a single total photon
  number n therefore evolve by a global phase only, and their velocity
  field is stationary.

Velocities follow the guidance equation dx/dt = grad S with
psi = sqrt(rho) exp(i S), computed as Im(grad psi / psi).
"""

import cmath
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .hermite import oscillator_derivatives, oscillator_eigenfunctions

__all__ = [
    "NODE_GUARD",
    "TwoModeState",
    "GlauberCenter",
    "WaveSample",
    "make_glauber",
    "make_su2",
    "make_noon",
    "make_glauber_truncated",
    "from_coefficients",
    "glauber_center",
    "wave_and_gradient",
    "density_velocity_current",
    "point_density_velocity",
    "evaluate",
]

# Velocity is reported as undefined when the local density falls below
# NODE_GUARD times the state's peak-density estimate; closer to a zero the
# phase gradient is numerically meaningless.
NODE_GUARD = 1e-12


# ---------------------------------------------------------------------------
# state container and constructors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoModeState:
    """Immutable two-mode state.

    kind
        "glauber" for the coherent closed form, "number" for a finite
        number-basis superposition.
    alpha1, alpha2
        Mode amplitudes.  For "number" states built by a constructor these
        record the defining parameters; for custom coefficient matrices
        they are zero.
    coefficients
        Complex matrix c[m, k] for "number" states (unit Frobenius norm),
        None for "glauber".
    total_photon_number
        n when the state is supported on a single total photon number
        m + k = n (stationary velocity field), else None.
    normalized
        Always True for constructed states; kept explicit so downstream
        code can assert on it.
    peak_density
        Estimate of max |psi|^2 used for node guards: exact (1/pi) for
        "glauber", a coarse 64x64 scan of the working region for "number".
    """

    kind: Literal["glauber", "number"]
    alpha1: complex
    alpha2: complex
    coefficients: np.ndarray | None
    total_photon_number: int | None
    normalized: bool
    peak_density: float

    def __post_init__(self):
        # Fast-path data for single-point evaluation: a flat tuple of
        # (m, k, c) over nonzero coefficients, consumed by
        # point_density_velocity.
        if self.coefficients is not None:
            c = self.coefficients
            ms, ks = np.nonzero(c)
            entries = tuple((int(m), int(k), complex(c[m, k])) for m, k in zip(ms, ks))
            object.__setattr__(self, "_entries", entries)
            object.__setattr__(self, "_max_m", int(ms.max()) if len(ms) else 0)
            object.__setattr__(self, "_max_k", int(ks.max()) if len(ks) else 0)


@dataclass(frozen=True)
class GlauberCenter:
    """Instantaneous center x_tilde and phase-gradient vector y_tilde.

    Defined per mode by sqrt(2) alpha_l exp(-i t) = x_tilde_l + i y_tilde_l;
    the wave packet is centered at x_tilde and the velocity field equals
    y_tilde everywhere.
    """

    x_tilde: np.ndarray
    y_tilde: np.ndarray
    t: float


@dataclass(frozen=True)
class WaveSample:
    """Wave function and derived local fields at one configuration point.

    velocity is None where the density sits below the node guard; current
    j = Im(conj(psi) grad psi) stays finite everywhere and is reported
    unconditionally.
    """

    psi: complex
    grad_psi: tuple[complex, complex]
    density: float
    velocity: np.ndarray | None
    current: np.ndarray


def _check_amplitude(alpha: complex, name: str) -> complex:
    alpha = complex(alpha)
    if not (math.isfinite(alpha.real) and math.isfinite(alpha.imag)):
        raise ValueError(f"{name} must be finite, got {alpha!r}")
    return alpha


def _scan_peak_density(state: TwoModeState) -> float:
    # Coarse 64x64 scan of the working region at t = 0.  An estimate is all
    # the guards need; the scan region covers the classical turning radius
    # of the highest occupied total photon number plus a margin.
    n_top = state._max_m + state._max_k
    reach = math.sqrt(2.0 * n_top + 1.0) + 2.0
    axis = np.linspace(-reach, reach, 64)
    g1, g2 = np.meshgrid(axis, axis, indexing="ij")
    pts = np.stack([g1, g2], axis=-1)
    psi, _, _ = wave_and_gradient(state, pts, 0.0)
    return float((psi.real ** 2 + psi.imag ** 2).max())


def _finish_number_state(coeff: np.ndarray, alpha1: complex, alpha2: complex) -> TwoModeState:
    norm = math.sqrt(float(np.sum(np.abs(coeff) ** 2)))
    if norm == 0.0 or not math.isfinite(norm):
        raise ValueError("state coefficients have zero or non-finite norm")
    coeff = coeff / norm
    coeff.setflags(write=False)
    totals = {int(m + k) for m, k in zip(*np.nonzero(coeff))}
    total = totals.pop() if len(totals) == 1 else None
    state = TwoModeState(
        kind="number",
        alpha1=alpha1,
        alpha2=alpha2,
        coefficients=coeff,
        total_photon_number=total,
        normalized=True,
        peak_density=0.0,
    )
    object.__setattr__(state, "peak_density", _scan_peak_density(state))
    return state


def make_glauber(alpha1, alpha2) -> TwoModeState:
    """Two-mode coherent state with mode amplitudes alpha1, alpha2."""
    alpha1 = _check_amplitude(alpha1, "alpha1")
    alpha2 = _check_amplitude(alpha2, "alpha2")
    return TwoModeState(
        kind="glauber",
        alpha1=alpha1,
        alpha2=alpha2,
        coefficients=None,
        total_photon_number=None,
        normalized=True,
        peak_density=1.0 / math.pi,
    )


def make_su2(alpha1, alpha2, n: int) -> TwoModeState:
    """SU(2) (binomial) state with n photons shared between the modes.

    The coefficient on |m, n-m> is sqrt(C(n, m)) alpha1^m alpha2^(n-m)
    normalized by (|alpha1|^2 + |alpha2|^2)^(n/2); only the direction of
    (alpha1, alpha2) matters.  Built in log space so large n stays finite.
    """
    alpha1 = _check_amplitude(alpha1, "alpha1")
    alpha2 = _check_amplitude(alpha2, "alpha2")
    if n < 0:
        raise ValueError("photon number n must be >= 0")
    a1, a2 = abs(alpha1), abs(alpha2)
    if a1 == 0.0 and a2 == 0.0:
        raise ValueError("alpha1 and alpha2 cannot both vanish")
    ph1 = alpha1 / a1 if a1 > 0 else 0.0
    ph2 = alpha2 / a2 if a2 > 0 else 0.0
    log_norm = 0.5 * n * math.log(a1 * a1 + a2 * a2)
    coeff = np.zeros((n + 1, n + 1), dtype=complex)
    for m in range(n + 1):
        k = n - m
        if (a1 == 0.0 and m > 0) or (a2 == 0.0 and k > 0):
            continue
        log_mag = 0.5 * (math.lgamma(n + 1) - math.lgamma(m + 1) - math.lgamma(k + 1))
        log_mag += m * (math.log(a1) if a1 > 0 else 0.0)
        log_mag += k * (math.log(a2) if a2 > 0 else 0.0)
        coeff[m, k] = math.exp(log_mag - log_norm) * ph1 ** m * ph2 ** k
    return _finish_number_state(coeff, alpha1, alpha2)


def make_noon(alpha1, alpha2, n: int) -> TwoModeState:
    """Path-entangled state alpha1 |n, 0> + alpha2 |0, n> (normalized)."""
    alpha1 = _check_amplitude(alpha1, "alpha1")
    alpha2 = _check_amplitude(alpha2, "alpha2")
    if n < 1:
        raise ValueError("photon number n must be >= 1")
    if abs(alpha1) == 0.0 and abs(alpha2) == 0.0:
        raise ValueError("alpha1 and alpha2 cannot both vanish")
    coeff = np.zeros((n + 1, n + 1), dtype=complex)
    coeff[n, 0] = alpha1
    coeff[0, n] = alpha2
    return _finish_number_state(coeff, alpha1, alpha2)


def make_glauber_truncated(alpha1, alpha2, n_max: int) -> TwoModeState:
    """Number-basis approximation of the coherent state up to m + k <= n_max.

    Superposes the fixed-n states with Poissonian weight in the total
    photon number; equivalently c[m, k] is the double Poisson amplitude
    exp(-|alpha|^2/2) alpha1^m alpha2^k / sqrt(m! k!), renormalized after
    the cut.  Useful as an independent cross-check of the closed form.
    """
    alpha1 = _check_amplitude(alpha1, "alpha1")
    alpha2 = _check_amplitude(alpha2, "alpha2")
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    a1, a2 = abs(alpha1), abs(alpha2)
    ph1 = alpha1 / a1 if a1 > 0 else 0.0
    ph2 = alpha2 / a2 if a2 > 0 else 0.0
    half_sq = 0.5 * (a1 * a1 + a2 * a2)
    coeff = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    for m in range(n_max + 1):
        for k in range(n_max + 1 - m):
            if (a1 == 0.0 and m > 0) or (a2 == 0.0 and k > 0):
                continue
            log_mag = -half_sq - 0.5 * (math.lgamma(m + 1) + math.lgamma(k + 1))
            log_mag += m * (math.log(a1) if a1 > 0 else 0.0)
            log_mag += k * (math.log(a2) if a2 > 0 else 0.0)
            coeff[m, k] = math.exp(log_mag) * ph1 ** m * ph2 ** k
    return _finish_number_state(coeff, alpha1, alpha2)


def from_coefficients(coefficients) -> TwoModeState:
    """Number-basis state from an explicit complex matrix c[m, k]."""
    coeff = np.asarray(coefficients, dtype=complex)
    if coeff.ndim != 2:
        raise ValueError("coefficients must be a 2-D matrix c[m, k]")
    if not np.all(np.isfinite(coeff)):
        raise ValueError("coefficients must be finite")
    return _finish_number_state(coeff.copy(), 0j, 0j)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def glauber_center(alpha1, alpha2, t: float) -> GlauberCenter:
    """Packet center and velocity vector of the coherent state at time t.

    Per mode, sqrt(2) alpha exp(-i t) = x_tilde + i y_tilde, i.e.

        x_tilde(t) =  sqrt(2) |alpha| cos(t - delta)
        y_tilde(t) = -sqrt(2) |alpha| sin(t - delta),   delta = arg(alpha).

    |x_tilde|^2 + |y_tilde|^2 = 2 |alpha|^2 per mode at all times.
    """
    alpha1 = _check_amplitude(alpha1, "alpha1")
    alpha2 = _check_amplitude(alpha2, "alpha2")
    z1 = math.sqrt(2.0) * alpha1 * cmath.exp(-1j * t)
    z2 = math.sqrt(2.0) * alpha2 * cmath.exp(-1j * t)
    return GlauberCenter(
        x_tilde=np.array([z1.real, z2.real]),
        y_tilde=np.array([z1.imag, z2.imag]),
        t=float(t),
    )


def _pack_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 0 or pts.shape[-1] != 2:
        raise ValueError("points must have trailing dimension 2")
    return pts


def wave_and_gradient(state: TwoModeState, points, t: float = 0.0):
    """psi and its gradient at an array of configuration points.

    Parameters
    ----------
    state : the state to evaluate.
    points : array of shape (..., 2).
    t : time.

    Returns
    -------
    (psi, dpsi1, dpsi2), complex arrays of shape points.shape[:-1].
    """
    pts = _pack_points(points)
    x1 = pts[..., 0]
    x2 = pts[..., 1]
    if state.kind == "glauber":
        center = glauber_center(state.alpha1, state.alpha2, t)
        xt, yt = center.x_tilde, center.y_tilde
        u1 = x1 - xt[0]
        u2 = x2 - xt[1]
        psi = np.pi ** -0.5 * np.exp(
            -0.5 * (u1 * u1 + u2 * u2) + 1j * (yt[0] * x1 + yt[1] * x2)
        )
        d1 = psi * (-u1 + 1j * yt[0])
        d2 = psi * (-u2 + 1j * yt[1])
        return psi, d1, d2

    c = state.coefficients
    max_m = state._max_m
    max_k = state._max_k
    flat1 = np.ascontiguousarray(x1).reshape(-1)
    flat2 = np.ascontiguousarray(x2).reshape(-1)
    t1 = oscillator_eigenfunctions(max_m, flat1)
    t2 = oscillator_eigenfunctions(max_k, flat2)
    d1t = oscillator_derivatives(max_m, flat1, t1)
    d2t = oscillator_derivatives(max_k, flat2, t2)
    phase_m = np.exp(-1j * t * np.arange(max_m + 1))
    phase_k = np.exp(-1j * t * np.arange(max_k + 1))
    ct = c[: max_m + 1, : max_k + 1] * phase_m[:, None] * phase_k[None, :]
    a = ct @ t2          # (max_m+1, N): x2 part contracted with coefficients
    ad = ct @ d2t
    psi = np.einsum("mn,mn->n", t1, a)
    d1 = np.einsum("mn,mn->n", d1t, a)
    d2 = np.einsum("mn,mn->n", t1, ad)
    shape = x1.shape
    return psi.reshape(shape), d1.reshape(shape), d2.reshape(shape)


def density_velocity_current(state: TwoModeState, points, t: float = 0.0):
    """Density, raw velocity, and current at an array of points.

    Returns (rho, v, j) where rho has shape points.shape[:-1] and v, j
    have a trailing axis of length 2.  The velocity v = j / rho is not
    guarded here: entries can be huge or non-finite arbitrarily close to a
    zero of psi.  Callers that need a guard should compare rho against
    NODE_GUARD * state.peak_density.
    """
    psi, d1, d2 = wave_and_gradient(state, points, t)
    rho = psi.real ** 2 + psi.imag ** 2
    j1 = (np.conj(psi) * d1).imag
    j2 = (np.conj(psi) * d2).imag
    with np.errstate(divide="ignore", invalid="ignore"):
        v1 = j1 / rho
        v2 = j2 / rho
    v = np.stack([v1, v2], axis=-1)
    j = np.stack([j1, j2], axis=-1)
    return rho, v, j


def point_density_velocity(state: TwoModeState, x1: float, x2: float, t: float):
    """Scalar fast path: (rho, v1, v2) at one point.

    Same mathematics as density_velocity_current but built on Python
    scalars, which keeps adaptive integrators off the numpy allocation
    overhead.  Velocity components are math.inf/nan at exact zeros.
    """
    if state.kind == "glauber":
        z1 = math.sqrt(2.0) * state.alpha1 * cmath.exp(-1j * t)
        z2 = math.sqrt(2.0) * state.alpha2 * cmath.exp(-1j * t)
        u1 = x1 - z1.real
        u2 = x2 - z2.real
        rho = math.exp(-(u1 * u1 + u2 * u2)) / math.pi
        # grad psi / psi = -(x - x_tilde) + i y_tilde: uniform velocity field
        return rho, z1.imag, z2.imag

    max_m = state._max_m
    max_k = state._max_k
    tab1 = _scalar_eigen_table(max_m, x1)
    tab2 = _scalar_eigen_table(max_k, x2)
    psi = 0j
    d1 = 0j
    d2 = 0j
    for m, k, cmk in state._entries:
        w = cmk * cmath.exp(-1j * t * (m + k))
        p1 = tab1[m]
        p2 = tab2[k]
        q1 = math.sqrt(2.0 * m) * tab1[m - 1] - x1 * p1 if m else -x1 * p1
        q2 = math.sqrt(2.0 * k) * tab2[k - 1] - x2 * p2 if k else -x2 * p2
        psi += w * p1 * p2
        d1 += w * q1 * p2
        d2 += w * p1 * q2
    rho = psi.real * psi.real + psi.imag * psi.imag
    if rho == 0.0:
        return 0.0, math.nan, math.nan
    j1 = (psi.conjugate() * d1).imag
    j2 = (psi.conjugate() * d2).imag
    return rho, j1 / rho, j2 / rho


def _scalar_eigen_table(max_order: int, x: float) -> list:
    tab = [math.pi ** -0.25 * math.exp(-0.5 * x * x)]
    if max_order >= 1:
        tab.append(math.sqrt(2.0) * x * tab[0])
    for k in range(1, max_order):
        tab.append(math.sqrt(2.0 / (k + 1)) * x * tab[k]
                   - math.sqrt(k / (k + 1.0)) * tab[k - 1])
    return tab


def evaluate(state: TwoModeState, x, t: float = 0.0) -> WaveSample:
    """Full local sample (psi, gradient, density, velocity, current) at x.

    The velocity is None when density < NODE_GUARD * peak_density; the
    current is always reported since j = Im(conj(psi) grad psi) stays
    finite through zeros of psi.
    """
    pt = np.asarray(x, dtype=float)
    if pt.shape != (2,):
        raise ValueError("x must be a single point of shape (2,)")
    psi, d1, d2 = wave_and_gradient(state, pt[None, :], t)
    psi = complex(psi[0])
    d1 = complex(d1[0])
    d2 = complex(d2[0])
    rho = psi.real ** 2 + psi.imag ** 2
    j = np.array([(psi.conjugate() * d1).imag, (psi.conjugate() * d2).imag])
    if rho < NODE_GUARD * state.peak_density:
        velocity = None
    else:
        velocity = j / rho
    return WaveSample(
        psi=psi,
        grad_psi=(d1, d2),
        density=float(rho),
        velocity=velocity,
        current=j,
    )
