"""SVG figure rendering."""

import numpy as np

from bohmpol.analysis import sample_grid
from bohmpol.dynamics import IntegrationParams, integrate
from bohmpol.figures import render_figure
from bohmpol.states import make_su2
from bohmpol.topology import SearchRegion, classify_field


def test_render_full_overlay_stack():
    state = make_su2(4.0, 2.0j, 3)
    region = SearchRegion(-4.0, 4.0, -4.0, 4.0, 64)
    field = sample_grid(state, region)
    report = classify_field(state, region)
    traj = integrate(state, [2.5, 0.0], IntegrationParams(t0=0.0, t1=1.0))
    svg = render_figure(field, trajectories=[traj],
                        equilibria=list(report.nodes) + list(report.saddles),
                        title="census overlay")
    assert svg.startswith("<svg ")
    assert svg.rstrip().endswith("</svg>")
    assert "<polyline" in svg                     # the trajectory
    assert svg.count("<circle") >= 3              # one marker per node
    assert "<line" in svg                         # saddle crosses
    assert "census overlay" in svg
    assert "<rect" in svg                         # density raster


def test_render_escapes_title_markup():
    state = make_su2(4.0, 2.0j, 3)
    region = SearchRegion(-3.0, 3.0, -3.0, 3.0, 32)
    field = sample_grid(state, region)
    svg = render_figure(field, title='<b attr="x">&')
    assert "<b " not in svg
    assert "&lt;b" in svg and "&amp;" in svg


def test_render_handles_bare_density_map():
    region = SearchRegion(-2.0, 2.0, -2.0, 2.0, 32)
    field = sample_grid(make_su2(1.0, 1.0j, 1), region)
    svg = render_figure(field)
    assert "<polyline" not in svg
    assert "<circle" not in svg
    assert svg.count("<rect") > 10                # raster cells still drawn


def test_render_downsamples_large_grids():
    # a 256-wide grid must be block-averaged down, not emitted cell by cell
    region = SearchRegion(-3.0, 3.0, -3.0, 3.0, 256)
    field = sample_grid(make_su2(1.0, 1.0j, 1), region)
    svg = render_figure(field)
    assert svg.count("<rect") <= 96 * 96 + 2


def test_polyline_points_stay_inside_canvas():
    state = make_su2(4.0, 2.0j, 3)
    region = SearchRegion(-4.0, 4.0, -4.0, 4.0, 32)
    field = sample_grid(state, region)
    traj = integrate(state, [2.5, 0.0], IntegrationParams(t0=0.0, t1=2.0))
    svg = render_figure(field, trajectories=[traj], size=400)
    start = svg.index('<polyline points="') + len('<polyline points="')
    chunk = svg[start:svg.index('"', start)]
    coords = np.array([float(v) for pair in chunk.split() for v in pair.split(",")])
    assert np.all(coords >= 0.0)
    assert np.all(coords <= 400.0)
