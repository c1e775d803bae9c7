"""Command-line front end.

Three subcommands:

* ``run <config.json>``: execute a scenario (state + seeds + region +
  outputs) and write trajectory CSVs, a field grid CSV, an equilibria
  JSON report, an averaged-density CSV, and an SVG figure as requested.
* ``equilibria``: locate and classify nodes and stationary points for a
  state given on the command line; print a table, optionally write JSON.
* ``verify [--quick]``: run the built-in check suite.

The output directory from the config can be overridden with the
BOHMPOL_OUTPUT_DIR environment variable.  All sampling is driven by the
config's integer ``seed`` (default 0), so runs are reproducible.
"""

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import verify as verify_module
from .analysis import averaged_density, draw_density_samples, sample_grid
from .dynamics import IntegrationParams, integrate
from .figures import render_figure
from .states import (
    TwoModeState,
    from_coefficients,
    make_glauber,
    make_noon,
    make_su2,
)
from .topology import SearchRegion, classify_field

__all__ = ["ConfigError", "ScenarioConfig", "load_config", "main"]

_ENV_OUTPUT_DIR = "BOHMPOL_OUTPUT_DIR"


class ConfigError(ValueError):
    """Invalid scenario configuration; message carries the field path."""


@dataclass(frozen=True)
class ScenarioOutputs:
    directory: str
    trajectories: bool
    field_grid: bool
    equilibria: bool
    averaged_density: bool
    svg: bool


@dataclass(frozen=True)
class ScenarioConfig:
    state: TwoModeState
    state_echo: dict
    params: IntegrationParams
    seeds_spec: object
    region: SearchRegion
    outputs: ScenarioOutputs
    rng_seed: int


# ---------------------------------------------------------------------------
# config parsing with field-path diagnostics
# ---------------------------------------------------------------------------

def _as_mapping(value, path):
    if not isinstance(value, dict):
        raise ConfigError(f"{path}: expected an object")
    return value

def _as_number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number")
    return float(value)

def _as_int(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path}: expected an integer")
    return value

def _as_bool(value, path):
    if not isinstance(value, bool):
        raise ConfigError(f"{path}: expected true or false")
    return value

def _as_complex_pair(value, path):
    if (not isinstance(value, (list, tuple)) or len(value) != 2
            or any(isinstance(v, bool) or not isinstance(v, (int, float))
                   for v in value)):
        raise ConfigError(f"{path}: expected [re, im]")
    return complex(value[0], value[1])

def _reject_unknown(obj, allowed, path):
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}: unknown key")


def _parse_state(obj, path="state"):
    obj = _as_mapping(obj, path)
    kind = obj.get("kind")
    if kind not in ("glauber", "su2", "noon", "custom"):
        raise ConfigError(
            f"{path}.kind: expected one of glauber, su2, noon, custom"
        )
    if kind == "custom":
        _reject_unknown(obj, {"kind", "coefficients"}, path)
        rows = obj.get("coefficients")
        if not isinstance(rows, list) or not rows:
            raise ConfigError(f"{path}.coefficients: expected a non-empty matrix")
        width = None
        matrix = []
        for i, row in enumerate(rows):
            if not isinstance(row, list) or not row:
                raise ConfigError(f"{path}.coefficients[{i}]: expected a non-empty row")
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ConfigError(f"{path}.coefficients[{i}]: ragged row")
            matrix.append([
                _as_complex_pair(entry, f"{path}.coefficients[{i}][{j}]")
                for j, entry in enumerate(row)
            ])
        try:
            state = from_coefficients(np.array(matrix, dtype=complex))
        except ValueError as exc:
            raise ConfigError(f"{path}.coefficients: {exc}") from exc
        return state, dict(obj)

    allowed = {"kind", "alpha1", "alpha2"} | ({"n"} if kind != "glauber" else set())
    _reject_unknown(obj, allowed, path)
    for key in ("alpha1", "alpha2"):
        if key not in obj:
            raise ConfigError(f"{path}.{key}: required for kind {kind}")
    a1 = _as_complex_pair(obj["alpha1"], f"{path}.alpha1")
    a2 = _as_complex_pair(obj["alpha2"], f"{path}.alpha2")
    try:
        if kind == "glauber":
            state = make_glauber(a1, a2)
        else:
            if "n" not in obj:
                raise ConfigError(f"{path}.n: required for kind {kind}")
            n = _as_int(obj["n"], f"{path}.n")
            state = make_su2(a1, a2, n) if kind == "su2" else make_noon(a1, a2, n)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return state, dict(obj)


def _parse_integration(obj, path="integration"):
    if obj is None:
        return IntegrationParams()
    obj = _as_mapping(obj, path)
    _reject_unknown(obj, {"rel_tol", "abs_tol", "max_step", "t0", "t1"}, path)
    kwargs = {key: _as_number(obj[key], f"{path}.{key}") for key in obj}
    try:
        return IntegrationParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_seeds(obj, path="seeds"):
    if isinstance(obj, list):
        if not obj:
            raise ConfigError(f"{path}: seed list is empty")
        seeds = []
        for i, entry in enumerate(obj):
            if not isinstance(entry, (list, tuple)) or len(entry) != 2:
                raise ConfigError(f"{path}[{i}]: expected [x1, x2]")
            seeds.append([_as_number(entry[0], f"{path}[{i}][0]"),
                          _as_number(entry[1], f"{path}[{i}][1]")])
        return ("explicit", np.array(seeds))
    obj = _as_mapping(obj, path)
    if set(obj) == {"ring"}:
        ring = _as_mapping(obj["ring"], f"{path}.ring")
        _reject_unknown(ring, {"center", "radius", "count"}, f"{path}.ring")
        center = ring.get("center", [0.0, 0.0])
        if not isinstance(center, (list, tuple)) or len(center) != 2:
            raise ConfigError(f"{path}.ring.center: expected [x1, x2]")
        cx = _as_number(center[0], f"{path}.ring.center[0]")
        cy = _as_number(center[1], f"{path}.ring.center[1]")
        radius = _as_number(ring.get("radius"), f"{path}.ring.radius")
        count = _as_int(ring.get("count"), f"{path}.ring.count")
        if radius <= 0:
            raise ConfigError(f"{path}.ring.radius: must be positive")
        if count < 1:
            raise ConfigError(f"{path}.ring.count: must be positive")
        return ("ring", (cx, cy, radius, count))
    if set(obj) == {"density_sample"}:
        count = _as_int(obj["density_sample"], f"{path}.density_sample")
        if count < 1:
            raise ConfigError(f"{path}.density_sample: must be positive")
        return ("density_sample", count)
    raise ConfigError(
        f"{path}: expected a seed list, {{\"ring\": ...}}, or "
        f"{{\"density_sample\": ...}}"
    )


def _parse_region(obj, path="region"):
    if obj is None:
        return SearchRegion(-6.0, 6.0, -6.0, 6.0)
    obj = _as_mapping(obj, path)
    _reject_unknown(obj, {"x_min", "x_max", "y_min", "y_max", "scan_resolution"}, path)
    for key in ("x_min", "x_max", "y_min", "y_max"):
        if key not in obj:
            raise ConfigError(f"{path}.{key}: required")
    kwargs = dict(
        x1_min=_as_number(obj["x_min"], f"{path}.x_min"),
        x1_max=_as_number(obj["x_max"], f"{path}.x_max"),
        x2_min=_as_number(obj["y_min"], f"{path}.y_min"),
        x2_max=_as_number(obj["y_max"], f"{path}.y_max"),
    )
    if "scan_resolution" in obj:
        kwargs["scan_resolution"] = _as_int(obj["scan_resolution"],
                                            f"{path}.scan_resolution")
    try:
        return SearchRegion(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_outputs(obj, path="outputs"):
    if obj is None:
        obj = {}
    obj = _as_mapping(obj, path)
    _reject_unknown(obj, {"dir", "trajectories", "field_grid", "equilibria",
                          "averaged_density", "svg"}, path)
    directory = obj.get("dir", "out")
    if not isinstance(directory, str) or not directory:
        raise ConfigError(f"{path}.dir: expected a non-empty path string")
    flags = {}
    for key, default in (("trajectories", True), ("field_grid", False),
                         ("equilibria", False), ("averaged_density", False),
                         ("svg", False)):
        flags[key] = _as_bool(obj[key], f"{path}.{key}") if key in obj else default
    return ScenarioOutputs(directory=directory, **flags)


def load_config(path) -> ScenarioConfig:
    """Parse and validate a scenario JSON file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    raw = _as_mapping(raw, "config")
    _reject_unknown(raw, {"state", "integration", "seeds", "region",
                          "outputs", "seed"}, "config")
    if "state" not in raw:
        raise ConfigError("state: required")
    if "seeds" not in raw:
        raise ConfigError("seeds: required")
    state, echo = _parse_state(raw["state"])
    outputs = _parse_outputs(raw.get("outputs"))
    if outputs.equilibria and state.kind != "number":
        raise ConfigError(
            "outputs.equilibria: coherent states have no nodes or stationary "
            "points to report; use a number-basis state"
        )
    return ScenarioConfig(
        state=state,
        state_echo=echo,
        params=_parse_integration(raw.get("integration")),
        seeds_spec=_parse_seeds(raw["seeds"]),
        region=_parse_region(raw.get("region")),
        outputs=outputs,
        rng_seed=_as_int(raw.get("seed", 0), "seed"),
    )


def _resolve_seeds(config: ScenarioConfig) -> np.ndarray:
    mode, payload = config.seeds_spec
    if mode == "explicit":
        return payload
    if mode == "ring":
        cx, cy, radius, count = payload
        theta = 2.0 * math.pi * np.arange(count) / count
        return np.column_stack([cx + radius * np.cos(theta),
                                cy + radius * np.sin(theta)])
    count = payload
    return draw_density_samples(config.state, count, config.params.t0,
                                seed=config.rng_seed)


# ---------------------------------------------------------------------------
# output writers
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_trajectory_csv(path: Path, traj) -> None:
    with path.open("w", encoding="utf-8") as fh:
        fh.write("t,x1,x2\n")
        for t, (x1, x2) in zip(traj.times, traj.points):
            fh.write(f"{_fmt(t)},{_fmt(x1)},{_fmt(x2)}\n")


def _write_field_csv(path: Path, field) -> None:
    with path.open("w", encoding="utf-8") as fh:
        fh.write("x1,x2,density,v1,v2,j1,j2,re_psi,im_psi,masked\n")
        for i, x1 in enumerate(field.x1):
            for j, x2 in enumerate(field.x2):
                fh.write(",".join((
                    _fmt(x1), _fmt(x2), _fmt(field.density[i, j]),
                    _fmt(field.velocity1[i, j]), _fmt(field.velocity2[i, j]),
                    _fmt(field.current1[i, j]), _fmt(field.current2[i, j]),
                    _fmt(field.psi_real[i, j]), _fmt(field.psi_imag[i, j]),
                    str(int(field.mask[i, j])),
                )) + "\n")


def _write_averaged_csv(path: Path, avg) -> None:
    with path.open("w", encoding="utf-8") as fh:
        fh.write("x1,x2,density\n")
        for i, x1 in enumerate(avg.x1):
            for j, x2 in enumerate(avg.x2):
                fh.write(f"{_fmt(x1)},{_fmt(x2)},{_fmt(avg.density[i, j])}\n")


def _equilibria_payload(report, state_echo) -> dict:
    def as_point(eq):
        return {
            "position": [float(eq.position[0]), float(eq.position[1])],
            "kind": eq.kind,
            "charge": eq.charge,
            "density_residual": eq.density_residual,
            "speed_residual": eq.speed_residual,
            "jacobian_eigenvalues": (
                None if eq.jacobian_eigenvalues is None
                else list(eq.jacobian_eigenvalues)
            ),
        }

    points = list(report.nodes) + list(report.saddles) + list(report.extrema)
    return {
        "state": state_echo,
        "equilibria": [as_point(eq) for eq in points],
        "boundary_circulation": report.boundary_circulation,
        "total_charge": report.total_charge,
        "source_sink_free": report.source_sink_free,
        "generated_at": datetime.now(timezone.utc).isoformat(),
    }


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_run(args) -> int:
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"config error in {args.config}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read {args.config}: {exc}", file=sys.stderr)
        return 2

    out_dir = Path(os.environ.get(_ENV_OUTPUT_DIR) or config.outputs.directory)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"cannot create output directory {out_dir}: {exc}", file=sys.stderr)
        return 1

    written = []
    trajectories = []
    if config.outputs.trajectories or config.outputs.svg:
        seeds = _resolve_seeds(config)
        for k, seed in enumerate(seeds):
            traj = integrate(config.state, seed, config.params)
            trajectories.append(traj)
            if traj.status != "completed":
                print(f"trajectory {k} ended early: {traj.status}", file=sys.stderr)
        if config.outputs.trajectories:
            for k, traj in enumerate(trajectories):
                path = out_dir / f"traj_{k}.csv"
                _write_trajectory_csv(path, traj)
                written.append(path)

    field = None
    if config.outputs.field_grid:
        field = sample_grid(config.state, config.region, config.params.t0)
        path = out_dir / "field.csv"
        _write_field_csv(path, field)
        written.append(path)

    report = None
    if config.outputs.equilibria:
        report = classify_field(config.state, config.region, config.params.t0)
        path = out_dir / "equilibria.json"
        payload = _equilibria_payload(report, config.state_echo)
        path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
        written.append(path)

    averaged = None
    if config.outputs.averaged_density:
        averaged = averaged_density(config.state, config.region)
        path = out_dir / "averaged_density.csv"
        _write_averaged_csv(path, averaged)
        written.append(path)

    if config.outputs.svg:
        background = averaged or field or sample_grid(
            config.state, config.region, config.params.t0
        )
        equilibria = []
        if report is not None:
            equilibria = (list(report.nodes) + list(report.saddles)
                          + list(report.extrema))
        svg = render_figure(background, trajectories, equilibria,
                            title=Path(args.config).stem)
        path = out_dir / "figure.svg"
        path.write_text(svg, encoding="utf-8")
        written.append(path)

    for path in written:
        print(path)
    return 0


def _parse_amplitude(text: str, flag: str) -> complex:
    parts = text.split(",")
    try:
        if len(parts) != 2:
            raise ValueError
        return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        raise SystemExit(f"{flag}: expected re,im (got {text!r})") from None


def cmd_equilibria(args) -> int:
    if args.state == "glauber":
        print("equilibria: coherent states have no nodes or stationary points "
              "(the wave function never vanishes)", file=sys.stderr)
        return 2
    alpha1 = _parse_amplitude(args.alpha1, "--alpha1")
    alpha2 = _parse_amplitude(args.alpha2, "--alpha2")
    if args.n is None:
        print("equilibria: --n is required for su2 and noon states",
              file=sys.stderr)
        return 2
    try:
        make = make_su2 if args.state == "su2" else make_noon
        state = make(alpha1, alpha2, args.n)
    except ValueError as exc:
        print(f"equilibria: {exc}", file=sys.stderr)
        return 2
    bounds = [float(v) for v in args.region.split(",")]
    if len(bounds) != 4:
        print("equilibria: --region expects x_min,x_max,y_min,y_max",
              file=sys.stderr)
        return 2
    try:
        region = SearchRegion(*bounds, scan_resolution=args.scan_resolution)
    except ValueError as exc:
        print(f"equilibria: {exc}", file=sys.stderr)
        return 2

    report = classify_field(state, region)
    print(f"{'kind':<10} {'x1':>14} {'x2':>14} {'charge':>7}  eigenvalues")
    for eq in list(report.nodes) + list(report.saddles) + list(report.extrema):
        charge = f"{eq.charge:+d}" if eq.charge is not None else "-"
        eigs = ("-" if eq.jacobian_eigenvalues is None else
                "({:+.3f}, {:+.3f})".format(*eq.jacobian_eigenvalues))
        print(f"{eq.kind:<10} {eq.position[0]:>14.10f} {eq.position[1]:>14.10f} "
              f"{charge:>7}  {eigs}")
    turns = report.boundary_circulation / (2.0 * math.pi)
    print(f"boundary circulation: {report.boundary_circulation:.9f} "
          f"({turns:+.4f} turns)")
    print(f"total charge: {report.total_charge}; "
          f"source/sink free: {'yes' if report.source_sink_free else 'no'}")
    if args.out:
        echo = {"kind": args.state,
                "alpha1": [alpha1.real, alpha1.imag],
                "alpha2": [alpha2.real, alpha2.imag],
                "n": args.n}
        payload = _equilibria_payload(report, echo)
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n",
                                  encoding="utf-8")
        print(args.out)
    return 0


def cmd_verify(args) -> int:
    return verify_module.main(quick=args.quick)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bohmpol",
        description="Trajectories and phase topology of two-mode quantum "
                    "light in the quadrature plane.",
        epilog=f"The {_ENV_OUTPUT_DIR} environment variable overrides the "
               f"output directory of `run` configs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a scenario config")
    p_run.add_argument("config", help="path to a scenario JSON file")
    p_run.set_defaults(func=cmd_run)

    p_eq = sub.add_parser("equilibria", help="locate nodes and stationary points")
    p_eq.add_argument("--state", required=True, choices=("glauber", "su2", "noon"))
    p_eq.add_argument("--alpha1", required=True, help="mode-1 amplitude as re,im")
    p_eq.add_argument("--alpha2", required=True, help="mode-2 amplitude as re,im")
    p_eq.add_argument("--n", type=int, help="total photon number (su2/noon)")
    p_eq.add_argument("--region", default="-6,6,-6,6",
                      help="search window x_min,x_max,y_min,y_max")
    p_eq.add_argument("--scan-resolution", type=int, default=256)
    p_eq.add_argument("--out", help="also write the report as JSON here")
    p_eq.set_defaults(func=cmd_equilibria)

    p_ver = sub.add_parser("verify", help="run the built-in check suite")
    p_ver.add_argument("--quick", action="store_true",
                       help="skip the heavy ensemble-transport check")
    p_ver.set_defaults(func=cmd_verify)

    args = parser.parse_args(argv)
    return args.func(args)
