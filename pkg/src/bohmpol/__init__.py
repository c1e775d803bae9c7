"""Bohmian polarization trajectories of two-mode quantum light.

The quadrature wave function of two field modes plays the role of a
two-dimensional configuration-space wave function.  This package builds
such wave functions for coherent, fixed-photon-number, and two-mode
superposition states, integrates the trajectories guided by their phase,
and maps the topology of the flow: nodes with quantized circulation,
hyperbolic stationary points, separatrices, and the statistics that tie
trajectory ensembles back to the density.
"""

from .analysis import (
    AveragedDensity,
    GridField,
    averaged_density,
    continuity_residual,
    draw_density_samples,
    equivariance_check,
    sample_grid,
)
from .dynamics import (
    IntegrationParams,
    Loop,
    Trajectory,
    circulation,
    glauber_analytic,
    integrate,
    integrate_fixed_rk4,
    sample_positions,
)
from .figures import render_figure
from .hermite import (
    hermite_values,
    oscillator_derivatives,
    oscillator_eigenfunctions,
)
from .states import (
    NODE_GUARD,
    GlauberCenter,
    TwoModeState,
    WaveSample,
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
from .topology import (
    EquilibriumPoint,
    FieldReport,
    SearchRegion,
    Separatrix,
    classify_field,
    find_nodes,
    find_stationary_points,
    trace_separatrices,
)

__version__ = "0.1.0"

__all__ = [
    "AveragedDensity",
    "EquilibriumPoint",
    "FieldReport",
    "GlauberCenter",
    "GridField",
    "IntegrationParams",
    "Loop",
    "NODE_GUARD",
    "SearchRegion",
    "Separatrix",
    "Trajectory",
    "TwoModeState",
    "WaveSample",
    "averaged_density",
    "circulation",
    "classify_field",
    "continuity_residual",
    "draw_density_samples",
    "equivariance_check",
    "evaluate",
    "find_nodes",
    "find_stationary_points",
    "from_coefficients",
    "glauber_analytic",
    "glauber_center",
    "hermite_values",
    "integrate",
    "integrate_fixed_rk4",
    "make_glauber",
    "make_glauber_truncated",
    "make_noon",
    "make_su2",
    "oscillator_derivatives",
    "oscillator_eigenfunctions",
    "point_density_velocity",
    "render_figure",
    "sample_grid",
    "sample_positions",
    "trace_separatrices",
    "wave_and_gradient",
    "__version__",
]
