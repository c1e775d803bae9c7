"""Equilibrium structure of the guidance field.

Two kinds of distinguished points organize the trajectories of a
stationary state:

* nodes: isolated zeros of psi, around which the phase winds an integer
  number of turns (the topological charge);
* hyperbolic stationary points of the velocity field (saddles), where the
  current vanishes but psi does not.

Both are located by a dense grid scan followed by damped Newton
refinement.  Charges come from phase circulation on small loops.
"""

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import IntegrationParams, Loop, Trajectory, circulation, integrate
from .states import TwoModeState, wave_and_gradient

__all__ = [
    "SearchRegion",
    "EquilibriumPoint",
    "FieldReport",
    "Separatrix",
    "find_nodes",
    "find_stationary_points",
    "classify_field",
    "trace_separatrices",
]

# A refined zero counts as a node only if |psi|^2 lands below this.
_NODE_RESIDUAL = 1e-20
# Newton iterates closer than this merge into one equilibrium.
_MERGE_RADIUS = 1e-6
# Stationary points closer than this to a node are the node itself.
_NODE_EXCLUSION = 1e-4
# A stationary point counts only if |j| lands below this.
_SPEED_RESIDUAL = 1e-12


@dataclass(frozen=True)
class SearchRegion:
    """Axis-aligned search window with a scan resolution."""

    x1_min: float
    x1_max: float
    x2_min: float
    x2_max: float
    scan_resolution: int = 256

    def __post_init__(self):
        if not (self.x1_min < self.x1_max and self.x2_min < self.x2_max):
            raise ValueError("region bounds must satisfy min < max on both axes")
        if self.scan_resolution < 16:
            raise ValueError("scan_resolution must be at least 16")

    def cell_centers(self, resolution: int | None = None):
        """Axis vectors of cell-center coordinates at the given resolution."""
        res = self.scan_resolution if resolution is None else resolution
        h1 = (self.x1_max - self.x1_min) / res
        h2 = (self.x2_max - self.x2_min) / res
        x1 = self.x1_min + h1 * (np.arange(res) + 0.5)
        x2 = self.x2_min + h2 * (np.arange(res) + 0.5)
        return x1, x2

    def contains(self, point) -> bool:
        p = np.asarray(point, dtype=float)
        return bool(
            self.x1_min <= p[0] <= self.x1_max
            and self.x2_min <= p[1] <= self.x2_max
        )


@dataclass(frozen=True)
class EquilibriumPoint:
    """One refined equilibrium.

    kind is "node" (zero of psi, integer charge, no defined velocity),
    "saddle" (zero of the current with opposite-sign velocity-Jacobian
    eigenvalues), or "extremum" for the never-expected same-sign case,
    kept so a census can prove there are no sources or sinks.
    """

    position: np.ndarray
    kind: str
    charge: int | None
    density_residual: float
    speed_residual: float | None
    jacobian_eigenvalues: tuple[float, float] | None


@dataclass(frozen=True)
class FieldReport:
    """Census of a search region at one instant."""

    time: float
    region: SearchRegion
    nodes: tuple[EquilibriumPoint, ...]
    saddles: tuple[EquilibriumPoint, ...]
    extrema: tuple[EquilibriumPoint, ...]
    boundary_circulation: float
    total_charge: int
    source_sink_free: bool


@dataclass(frozen=True)
class Separatrix:
    """Four invariant branches attached to one saddle."""

    saddle: EquilibriumPoint
    unstable: tuple[Trajectory, Trajectory]
    stable: tuple[Trajectory, Trajectory]


# ---------------------------------------------------------------------------
# grid scanning helpers
# ---------------------------------------------------------------------------

def _grid_field(state, region, t):
    x1, x2 = region.cell_centers()
    g1, g2 = np.meshgrid(x1, x2, indexing="ij")
    pts = np.stack([g1, g2], axis=-1)
    psi, d1, d2 = wave_and_gradient(state, pts, t)
    return x1, x2, psi, d1, d2


def _local_minima(values: np.ndarray) -> np.ndarray:
    """Interior cells not exceeded by any of their eight neighbors."""
    c = values[1:-1, 1:-1]
    mask = np.ones_like(c, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            mask &= c <= values[1 + di:values.shape[0] - 1 + di,
                                1 + dj:values.shape[1] - 1 + dj]
    out = np.zeros_like(values, dtype=bool)
    out[1:-1, 1:-1] = mask
    return out


def _neighbor_max(values: np.ndarray) -> np.ndarray:
    """Largest of the eight neighbors, for interior cells (zero at borders)."""
    out = np.zeros_like(values)
    c = out[1:-1, 1:-1]
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            np.maximum(c, values[1 + di:values.shape[0] - 1 + di,
                                 1 + dj:values.shape[1] - 1 + dj], out=c)
    return out


def _merge_points(points: list[np.ndarray], radius: float) -> list[np.ndarray]:
    merged: list[np.ndarray] = []
    for p in sorted(points, key=lambda q: (q[0], q[1])):
        if all(np.hypot(*(p - q)) > radius for q in merged):
            merged.append(p)
    return merged


# ---------------------------------------------------------------------------
# Newton refinement
# ---------------------------------------------------------------------------

def _newton_wave_zero(state, x0, t, max_iter=50):
    """Damped Newton on (Re psi, Im psi) = 0 with the analytic Jacobian.

    Keeps polishing while steps still move the iterate, which lets
    higher-order zeros (where convergence is only linear) grind down to
    the merge radius within the iteration budget.
    """
    x = np.array(x0, dtype=float)

    def residual(p):
        psi, d1, d2 = wave_and_gradient(state, p, t)
        f = np.array([psi.real, psi.imag])
        jac = np.array([[d1.real, d2.real], [d1.imag, d2.imag]])
        return f, jac

    f, jac = residual(x)
    fn = math.hypot(*f)
    for _ in range(max_iter):
        if fn == 0.0:
            break
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, -f, rcond=None)[0]
        if not np.all(np.isfinite(step)):
            break
        lam = 1.0
        moved = False
        for _ in range(12):
            trial = x + lam * step
            f_new, jac_new = residual(trial)
            fn_new = math.hypot(*f_new)
            if fn_new < fn:
                x, f, jac, fn = trial, f_new, jac_new, fn_new
                moved = True
                break
            lam *= 0.5
        if not moved or np.linalg.norm(lam * step) < 1e-13:
            break
    return x, fn * fn


def _fd_jacobian(func, x, step=1e-6):
    """Central-difference Jacobian of a plane vector field."""
    jac = np.empty((2, 2))
    for axis in range(2):
        e = np.zeros(2)
        e[axis] = step
        fp = func(x + e)
        fm = func(x - e)
        jac[:, axis] = (fp - fm) / (2.0 * step)
    return jac


def _newton_current_zero(state, x0, t, max_iter=50):
    """Damped Newton on the current j(x) = 0 with a finite-difference Jacobian."""

    def current(p):
        psi, d1, d2 = wave_and_gradient(state, p, t)
        return np.array([(np.conj(psi) * d1).imag, (np.conj(psi) * d2).imag])

    x = np.array(x0, dtype=float)
    f = current(x)
    fn = np.linalg.norm(f)
    for _ in range(max_iter):
        if fn == 0.0:
            break
        jac = _fd_jacobian(current, x)
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(jac, -f, rcond=None)[0]
        if not np.all(np.isfinite(step)):
            break
        lam = 1.0
        moved = False
        for _ in range(12):
            trial = x + lam * step
            f_new = current(trial)
            fn_new = np.linalg.norm(f_new)
            if fn_new < fn:
                x, f, fn = trial, f_new, fn_new
                moved = True
                break
            lam *= 0.5
        if not moved or np.linalg.norm(lam * step) < 1e-14:
            break
    return x, fn


# ---------------------------------------------------------------------------
# node finding
# ---------------------------------------------------------------------------

def _phase_winds(state, center, t, radius=1e-3, samples=256) -> bool:
    """True when the phase of psi actually winds on a small circle.

    Zeros of a (locally) constant-phase wave function come in curves, not
    points; there the phase of psi^2 is flat apart from sign flips and the
    candidate is not an isolated node.  Checked on psi^2 so the pi jumps
    of a real profile do not masquerade as winding.
    """
    theta = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    ring = center + radius * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    psi, _, _ = wave_and_gradient(state, ring, t)
    sq = psi * psi
    good = np.abs(sq) > 0
    if not np.all(good):
        return False
    rotated = sq / np.abs(sq)
    spread = np.abs(rotated - rotated.mean()).max()
    return spread > 1e-3


def find_nodes(state: TwoModeState, region: SearchRegion, t: float = 0.0):
    """Isolated zeros of psi inside the region, with topological charges.

    Scans |psi|^2 on the region grid for deep local minima, refines each
    candidate with damped Newton on (Re psi, Im psi), drops zero curves
    and failed refinements, merges duplicates, and assigns each node the
    circulation of a loop of radius min(0.25, half the distance to the
    nearest other node).

    Only "number" states are searched; the coherent closed form has no
    zeros at finite range.
    """
    if state.kind != "number":
        raise ValueError("node search requires a number-basis state")
    x1, x2, psi, _, _ = _grid_field(state, region, t)
    rho = psi.real ** 2 + psi.imag ** 2
    peak = rho.max()
    if peak == 0.0:
        return []
    # The scan cannot resolve a zero better than (gradient x cell)^2, so
    # no fixed fraction of the peak separates zeros from shallow valleys.
    # A cell sitting at a zero is instead much deeper than its own
    # neighborhood (quadratic growth); Newton's residual does the final
    # vetting either way.
    candidates_mask = (_local_minima(rho)
                       & (rho < 2e-2 * peak)
                       & (rho < 0.3 * _neighbor_max(rho)))
    ii, jj = np.nonzero(candidates_mask)
    raw: list[np.ndarray] = []
    for i, j in zip(ii, jj):
        pos, residual = _newton_wave_zero(state, (x1[i], x2[j]), t)
        if residual >= _NODE_RESIDUAL:
            if residual < 1e-12:
                warnings.warn(
                    f"node candidate near ({x1[i]:.3f}, {x2[j]:.3f}) did not "
                    f"converge (|psi|^2 = {residual:.2e}); dropped",
                    stacklevel=2,
                )
            continue
        if not region.contains(pos):
            continue
        raw.append(pos)
    positions = _merge_points(raw, _MERGE_RADIUS)
    positions = [p for p in positions if _phase_winds(state, p, t)]

    nodes = []
    for p in positions:
        others = [q for q in positions if q is not p]
        radius = 0.25
        if others:
            nearest = min(np.hypot(*(p - q)) for q in others)
            radius = min(radius, 0.5 * nearest)
        circ = circulation(state, Loop(center=p, radius=radius), t)
        charge = round(circ / (2.0 * math.pi))
        psi_p, _, _ = wave_and_gradient(state, p, t)
        nodes.append(EquilibriumPoint(
            position=p,
            kind="node",
            charge=int(charge),
            density_residual=float(abs(psi_p) ** 2),
            speed_residual=None,
            jacobian_eigenvalues=None,
        ))
    return nodes


# ---------------------------------------------------------------------------
# stationary points of the velocity field
# ---------------------------------------------------------------------------

def _velocity_jacobian(state, position, t, step=1e-6):
    def velocity(p):
        psi, d1, d2 = wave_and_gradient(state, p, t)
        rho = abs(psi) ** 2
        return np.array([(np.conj(psi) * d1).imag / rho,
                         (np.conj(psi) * d2).imag / rho])

    return _fd_jacobian(velocity, np.asarray(position, dtype=float), step)


def find_stationary_points(state: TwoModeState, region: SearchRegion,
                           t: float = 0.0, nodes=None):
    """Zeros of the current away from nodes, classified by the velocity Jacobian.

    The velocity Jacobian at a stationary point is the Hessian of the
    phase, hence symmetric with real eigenvalues: opposite signs mean a
    saddle, equal signs would be a source or sink ("extremum").  States
    whose current vanishes identically (real wave functions) have no
    isolated stationary points and return an empty list.
    """
    if state.kind != "number":
        raise ValueError("stationary-point search requires a number-basis state")
    if nodes is None:
        nodes = find_nodes(state, region, t)
    node_positions = [n.position for n in nodes]
    x1, x2, psi, d1, d2 = _grid_field(state, region, t)
    rho = psi.real ** 2 + psi.imag ** 2
    peak = rho.max()
    j_sq = (np.conj(psi) * d1).imag ** 2 + (np.conj(psi) * d2).imag ** 2
    if math.sqrt(j_sq.max()) < 1e-10 * peak:
        return []          # current vanishes identically: no isolated zeros
    candidates_mask = _local_minima(j_sq) & (rho > 1e-9 * peak)
    ii, jj = np.nonzero(candidates_mask)
    refined: list[np.ndarray] = []
    for i, j in zip(ii, jj):
        pos, speed = _newton_current_zero(state, (x1[i], x2[j]), t)
        if speed >= _SPEED_RESIDUAL:
            continue
        if not region.contains(pos):
            continue
        if node_positions and min(
            np.hypot(*(pos - q)) for q in node_positions
        ) < _NODE_EXCLUSION:
            continue
        psi_p, _, _ = wave_and_gradient(state, pos, t)
        # near-vanishing density means the iterate slid onto a node, not
        # a stationary point of a well-defined velocity field
        if abs(psi_p) ** 2 < 1e-9 * state.peak_density:
            continue
        refined.append(pos)
    points = []
    for p in _merge_points(refined, _MERGE_RADIUS):
        jac = _velocity_jacobian(state, p, t)
        eigs = np.sort(np.linalg.eigvalsh(0.5 * (jac + jac.T)))
        kind = "saddle" if eigs[0] < 0.0 < eigs[1] else "extremum"
        psi_p, dp1, dp2 = wave_and_gradient(state, p, t)
        speed = float(np.hypot((np.conj(psi_p) * dp1).imag,
                               (np.conj(psi_p) * dp2).imag))
        points.append(EquilibriumPoint(
            position=p,
            kind=kind,
            charge=None,
            density_residual=float(abs(psi_p) ** 2),
            speed_residual=speed,
            jacobian_eigenvalues=(float(eigs[0]), float(eigs[1])),
        ))
    return points


# ---------------------------------------------------------------------------
# census and separatrices
# ---------------------------------------------------------------------------

def _boundary_loop(state, region, t, equilibria) -> Loop:
    # A loop that encloses every equilibrium while staying where the
    # density is still well above the node guard; a region-sized loop
    # through the Gaussian tails would trip the guard.
    half = 0.5 * min(region.x1_max - region.x1_min, region.x2_max - region.x2_min)
    center = np.array([0.5 * (region.x1_min + region.x1_max),
                       0.5 * (region.x2_min + region.x2_max)])
    reach = max((np.hypot(*(e.position - center)) for e in equilibria), default=1.0)
    radius = min(reach + 1.0, 0.98 * half)
    guard = 1e-12 * state.peak_density
    while radius > reach + 0.05:
        theta = np.linspace(0.0, 2.0 * math.pi, 256, endpoint=False)
        ring = center + radius * np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        psi, _, _ = wave_and_gradient(state, ring, t)
        if np.min(np.abs(psi) ** 2) > 10.0 * guard:
            break
        radius *= 0.85
    return Loop(center=center, radius=radius)


def classify_field(state: TwoModeState, region: SearchRegion, t: float = 0.0) -> FieldReport:
    """Full census: nodes, saddles, boundary circulation, charge balance."""
    nodes = find_nodes(state, region, t)
    stationary = find_stationary_points(state, region, t, nodes=nodes)
    saddles = tuple(p for p in stationary if p.kind == "saddle")
    extrema = tuple(p for p in stationary if p.kind == "extremum")
    if nodes or stationary:
        loop = _boundary_loop(state, region, t, list(nodes) + list(stationary))
        boundary = circulation(state, loop, t)
    else:
        boundary = 0.0
    return FieldReport(
        time=float(t),
        region=region,
        nodes=tuple(nodes),
        saddles=saddles,
        extrema=extrema,
        boundary_circulation=float(boundary),
        total_charge=sum(n.charge for n in nodes),
        source_sink_free=not extrema,
    )


def trace_separatrices(state: TwoModeState, saddle: EquilibriumPoint,
                       region: SearchRegion,
                       params: IntegrationParams | None = None,
                       offset: float = 1e-4) -> Separatrix:
    """Invariant branches through a saddle of a stationary velocity field.

    Seeds sit offset along the unstable eigendirection (integrated
    forward) and the stable one (integrated backward); each branch is
    truncated at its first sample outside the region.
    """
    if state.total_photon_number is None:
        raise ValueError(
            "separatrices need a stationary velocity field "
            "(single total photon number)"
        )
    if params is None:
        params = IntegrationParams(t0=0.0, t1=8.0 * math.pi)
    jac = _velocity_jacobian(state, saddle.position, 0.0)
    eigvals, eigvecs = np.linalg.eigh(0.5 * (jac + jac.T))
    if not (eigvals[0] < 0.0 < eigvals[1]):
        raise ValueError("point is not hyperbolic; cannot trace separatrices")
    stable_dir = eigvecs[:, 0]
    unstable_dir = eigvecs[:, 1]
    backward = replace(params, t1=params.t0 - (params.t1 - params.t0))

    def branch(direction, sign, prms):
        seed = saddle.position + sign * offset * direction
        traj = integrate(state, seed, prms)
        inside = np.array([region.contains(p) for p in traj.points])
        if not np.all(inside):
            cut = int(np.argmin(inside)) + 1   # keep the first outside sample
            traj = Trajectory(
                seed=traj.seed,
                times=traj.times[:cut],
                points=traj.points[:cut],
                status=traj.status,
                accepted_steps=traj.accepted_steps,
                rejected_steps=traj.rejected_steps,
            )
        return traj

    return Separatrix(
        saddle=saddle,
        unstable=(branch(unstable_dir, 1.0, params),
                  branch(unstable_dir, -1.0, params)),
        stable=(branch(stable_dir, 1.0, backward),
                branch(stable_dir, -1.0, backward)),
    )
