"""Command-line front end.

Each subcommand builds a system, runs one analysis pipeline, and writes
figure-ready CSV (with a ``#``-prefixed JSON header line) or JSON. When an
output path is given, a PNG rendering of the same data lands next to it
unless ``--no-plot`` is passed. Identical invocations produce byte-identical
data files.

Exit codes: 0 success, 2 invalid parameters, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import QDecayError
from .io import read_json, save_system, system_to_dict, write_csv, write_json
from .models import (
    MultiChannelSystem,
    TwoLevelParams,
    mean_time_by_quadrature,
    propagate,
    ring_preparation_state,
    tight_binding_line,
    tight_binding_ring,
    two_level_closed_forms,
    two_level_system,
)
from .poles import find_poles
from .resolvent import PotentialField, compute_winding, potential_value
from .spectral import QuantumSystem, build_spectral_model, eigendecompose, total_subspace_rank
from .stats import (
    conditional_mean_curve,
    decay_density,
    decay_time_stats,
    predicted_mean,
)
from . import io as _io

COMMANDS = (
    "winding",
    "poles",
    "spectrum",
    "decay-dist",
    "moments",
    "conditional-mean",
    "two-level",
    "ring",
    "line-multichannel",
    "prep-sweep",
)

_MODEL_CHOICES = ("two-level", "ring", "single-level", "file")


class _Parser(argparse.ArgumentParser):
    """argparse with a machine-parsable single-line error channel."""

    def error(self, message):
        _fail(2, message)


def _fail(code: int, message: str):
    sys.stderr.write(json.dumps({"error": message, "code": code}) + "\n")
    raise SystemExit(code)


def parse_sweep(text: str) -> np.ndarray:
    """``start:stop:count`` linear grid, or ``log:start:stop:count``."""
    parts = text.split(":")
    logscale = False
    if parts and parts[0].lower() == "log":
        logscale = True
        parts = parts[1:]
    if len(parts) != 3:
        raise ValueError(f"sweep {text!r} is not start:stop:count")
    start, stop = float(parts[0]), float(parts[1])
    count = int(parts[2])
    if count < 1:
        raise ValueError(f"sweep {text!r} needs a positive count")
    if logscale:
        if start <= 0 or stop <= 0:
            raise ValueError(f"log sweep {text!r} needs positive endpoints")
        return np.geomspace(start, stop, count)
    return np.linspace(start, stop, count)


@dataclass
class RunConfig:
    """A validated invocation: command, resolved parameters, output choices."""

    command: str
    params: dict = field(default_factory=dict)
    output: str | None = None
    format: str = "csv"
    plot: bool = True

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise ValueError(f"unknown format {self.format!r}")
        if self.format == "csv" and self.output is None and self.command != "moments":
            raise ValueError(f"{self.command} writes CSV and needs --output")

    def header(self) -> dict:
        return {
            "command": self.command,
            "params": self.params,
            "seed": self.params.get("seed"),
            "version": __version__,
        }


def _build_system(params: dict):
    """System named by the shared --model flags, plus its reduced model."""
    kind = params["model"]
    gamma = params["gamma"]
    if kind == "two-level":
        system = two_level_system(TwoLevelParams(params["delta"], params["omega"], gamma))
    elif kind == "ring":
        system = tight_binding_ring(
            params["L"], params["gamma_hop"], params["eps"], params["seed"], gamma
        )
    elif kind == "single-level":
        system = QuantumSystem(
            np.array([[params["energy"]]]), np.array([1.0]), gamma
        )
    elif kind == "file":
        if not params.get("system"):
            raise ValueError("--model file needs --system pointing at a system JSON")
        system = _io.load_system(params["system"])
        if isinstance(system, MultiChannelSystem):
            raise ValueError("this command works on single-channel systems")
        system = QuantumSystem(system.hamiltonian, system.decay_state, gamma)
    else:
        raise ValueError(f"unknown model {kind!r}")
    return system, build_spectral_model(system)


def _stem(output: str) -> Path:
    path = Path(output)
    return path.with_suffix("") if path.suffix else path


def _emit(config: RunConfig, columns: dict, extra: dict | None = None):
    """Write the primary data file for a command; returns parsed-ready dict."""
    header = config.header()
    if extra:
        header.update(extra)
    if config.format == "json":
        payload = dict(header)
        payload["columns"] = {k: list(map(float, v)) for k, v in columns.items()}
        if config.output:
            write_json(config.output, payload)
        else:
            print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        write_csv(config.output, header, columns)


def _auto_horizon(system, states) -> float:
    """Smallest doubling of 8/Gamma whose survival drops below 1e-11."""
    horizon = 8.0 / system.gamma
    for _ in range(40):
        worst = max(
            float(np.linalg.norm(propagate(system, state, horizon)) ** 2)
            for state in states
        )
        if worst < 1e-11:
            return horizon
        horizon *= 2.0
    raise QDecayError("no horizon below 2^40 * 8/Gamma reaches survival 1e-11")


def _run_winding(config: RunConfig):
    _, model = _build_system(config.params)
    curve = compute_winding(model, config.params["gamma"], config.params["init_points"])
    extra = {
        "w": curve.winding,
        "arg_residual": curve.arg_residual,
        "points": len(curve.omegas),
    }
    if config.format == "json" and config.output is None:
        payload = {**config.header(), **extra}
        print(json.dumps(payload, sort_keys=True, indent=2))
        return
    _emit(
        config,
        {
            "omega": curve.omegas,
            "re_C": curve.curve_points.real,
            "im_C": curve.curve_points.imag,
        },
        extra,
    )
    if config.plot and config.output:
        from .plotting import plot_winding_curve

        plot_winding_curve(curve.curve_points, curve.winding, _stem(config.output).with_suffix(".png"))


def _run_poles(config: RunConfig):
    _, model = _build_system(config.params)
    gamma = config.params["gamma"]
    poles = find_poles(model, gamma)
    stem = _stem(config.output) if config.output else None

    span = model.span + 1.0
    x_lo = 1.3 * float(poles.poles.real.min())
    xs = np.linspace(x_lo, -0.01 * abs(x_lo), 81)
    ys = np.linspace(model.energies[0] - 0.25 * span, model.energies[-1] + 0.25 * span, 81)
    field = PotentialField(model, gamma)
    grid = np.array([[potential_value(field, x, y) for x in xs] for y in ys])
    mesh_x, mesh_y = np.meshgrid(xs, ys)

    pole_cols = {
        "re_s": poles.poles.real,
        "im_s": poles.poles.imag,
        "re_r": poles.residuals.real,
        "im_r": poles.residuals.imag,
    }
    charge_cols = {"energy": model.energies, "overlap": model.overlaps}
    grid_cols = {"x": mesh_x.ravel(), "y": mesh_y.ravel(), "v": grid.ravel()}

    if config.format == "json":
        payload = dict(config.header())
        payload["poles"] = {k: list(map(float, v)) for k, v in pole_cols.items()}
        payload["charges"] = {k: list(map(float, v)) for k, v in charge_cols.items()}
        payload["potential"] = {k: list(map(float, v)) for k, v in grid_cols.items()}
        if config.output:
            write_json(config.output, payload)
        else:
            print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        write_csv(config.output, config.header(), pole_cols)
        write_csv(stem.parent / (stem.name + ".charges.csv"), config.header(), charge_cols)
        write_csv(stem.parent / (stem.name + ".potential.csv"), config.header(), grid_cols)
    if config.plot and config.output:
        from .plotting import plot_pole_chart

        plot_pole_chart(
            poles.poles, model.energies, model.overlaps, mesh_x, mesh_y, grid,
            stem.with_suffix(".png"),
        )


def _run_spectrum(config: RunConfig):
    _, model = _build_system(config.params)
    extra = {"w": model.w, "discarded_overlap": model.discarded_overlap}
    _emit(config, {"energy": model.energies, "overlap": model.overlaps}, extra)


def _run_decay_dist(config: RunConfig):
    _, model = _build_system(config.params)
    gamma = config.params["gamma"]
    poles = find_poles(model, gamma)
    sweep = config.params.get("t_sweep")
    times = parse_sweep(sweep) if sweep else np.linspace(0.0, 3.0 * model.w / gamma, 400)
    density = decay_density(poles, times)
    _emit(config, {"t": times, "F": density}, {"w": model.w})
    if config.plot and config.output:
        from .plotting import plot_decay_distribution

        plot_decay_distribution(times, density, _stem(config.output).with_suffix(".png"))


def _run_moments(config: RunConfig):
    _, model = _build_system(config.params)
    gamma = config.params["gamma"]
    stats = decay_time_stats(find_poles(model, gamma), config.params["max_moment"])
    payload = dict(config.header())
    payload.update(
        {
            "w": model.w,
            "p_det": stats.p_det,
            "mean": stats.mean,
            "variance": stats.variance,
            "moments": list(stats.moments),
            "predicted_mean": predicted_mean(model.w, gamma),
        }
    )
    if config.output:
        write_json(config.output, payload)
    else:
        print(json.dumps(payload, sort_keys=True, indent=2))


def _run_conditional_mean(config: RunConfig):
    _, model = _build_system(config.params)
    gamma = config.params["gamma"]
    poles = find_poles(model, gamma)
    sweep = config.params.get("theta_sweep")
    thetas = (
        parse_sweep(sweep)
        if sweep
        else np.geomspace(0.1 / gamma, 1e6 / gamma, 60)
    )
    curve = conditional_mean_curve(poles, thetas)
    extra = {"w": model.w, "w_apparent": curve.w_apparent}
    _emit(config, {"theta": curve.thetas, "mean_c": curve.values}, extra)
    if config.plot and config.output:
        from .plotting import plot_conditional_mean

        plot_conditional_mean(
            curve.thetas, curve.values, gamma, model.w, _stem(config.output).with_suffix(".png")
        )


def _run_two_level(config: RunConfig):
    delta = config.params["delta"]
    gamma = config.params["gamma"]
    omegas = parse_sweep(config.params["omega_sweep"])
    means, variances = [], []
    for omega in omegas:
        stats = decay_time_stats(two_level_closed_forms(TwoLevelParams(delta, float(omega), gamma)))
        means.append(stats.mean)
        variances.append(stats.variance)
    _emit(config, {"omega": omegas, "mean": np.array(means), "variance": np.array(variances)})
    if config.plot and config.output:
        from .plotting import plot_two_level_sweep

        plot_two_level_sweep(omegas, means, variances, gamma, _stem(config.output).with_suffix(".png"))


def _run_ring(config: RunConfig):
    params = config.params
    system = tight_binding_ring(
        params["L"], params["gamma_hop"], params["eps"], params["seed"], params["gamma"]
    )
    if config.output is None:
        raise ValueError("ring writes a system JSON and needs --output")
    payload = system_to_dict(system)
    payload["metadata"] = {
        "L": params["L"],
        "epsilon": params["eps"],
        "seed": params["seed"],
        "gamma_hop": params["gamma_hop"],
        "version": __version__,
    }
    write_json(config.output, payload)


def _run_line_multichannel(config: RunConfig):
    params = config.params
    sites = params["channels"]
    line = tight_binding_line(params["L"], params["gamma_hop"])
    basis = np.eye(params["L"])
    channels = basis[[s - 1 for s in sites]]
    gammas = parse_sweep(params["gamma_sweep"])
    eig = eigendecompose(QuantumSystem(line, basis[0], 1.0))
    w = total_subspace_rank(channels, eig)
    d = len(sites)

    per_channel = {f"mean_site_{s}": [] for s in sites}
    mixed = []
    for gamma in gammas:
        system = MultiChannelSystem(line, channels, float(gamma))
        horizon = _auto_horizon(system, list(channels))
        for s, channel in zip(sites, channels):
            per_channel[f"mean_site_{s}"].append(
                mean_time_by_quadrature(system, horizon, initial_state=channel, rel_tol=1e-7)[1]
            )
        mixed.append(mean_time_by_quadrature(system, horizon, rel_tol=1e-7)[1])

    columns = {"gamma": gammas}
    columns.update({k: np.array(v) for k, v in per_channel.items()})
    columns["mean_mixed"] = np.array(mixed)
    extra = {"w": int(w), "d": d, "prediction_gamma_mean": w / (2.0 * d)}
    _emit(config, columns, extra)
    if config.plot and config.output:
        from .plotting import plot_multichannel_sweep

        plot_multichannel_sweep(
            gammas, per_channel, mixed, w / (2.0 * d), _stem(config.output).with_suffix(".png")
        )


def _run_prep_sweep(config: RunConfig):
    params = config.params
    gammas = parse_sweep(params["gamma_sweep"])
    deltas = params["delta_in"]
    system0 = tight_binding_ring(params["L"], params["gamma_hop"], 0.0, 0, 1.0)
    w = build_spectral_model(system0).w

    out_gamma, out_delta, out_mean, out_pdet = [], [], [], []
    curves = {}
    for delta in deltas:
        state = ring_preparation_state(params["L"], delta)
        series = []
        for gamma in gammas:
            system = tight_binding_ring(params["L"], params["gamma_hop"], 0.0, 0, float(gamma))
            horizon = _auto_horizon(system, [state])
            p_det, mean = mean_time_by_quadrature(
                system, horizon, initial_state=state, rel_tol=1e-7
            )
            out_gamma.append(float(gamma))
            out_delta.append(delta)
            out_mean.append(mean)
            out_pdet.append(p_det)
            series.append(mean)
        curves[f"delta={delta:g}"] = series

    columns = {
        "gamma": np.array(out_gamma),
        "delta": np.array(out_delta),
        "mean": np.array(out_mean),
        "p_det": np.array(out_pdet),
    }
    _emit(config, columns, {"w": w})
    if config.plot and config.output:
        from .plotting import plot_preparation_sweep

        plot_preparation_sweep(gammas, curves, w, _stem(config.output).with_suffix(".png"))


_RUNNERS = {
    "winding": _run_winding,
    "poles": _run_poles,
    "spectrum": _run_spectrum,
    "decay-dist": _run_decay_dist,
    "moments": _run_moments,
    "conditional-mean": _run_conditional_mean,
    "two-level": _run_two_level,
    "ring": _run_ring,
    "line-multichannel": _run_line_multichannel,
    "prep-sweep": _run_prep_sweep,
}


def _add_model_flags(parser):
    parser.add_argument("--model", choices=_MODEL_CHOICES, default="ring")
    parser.add_argument("--delta", type=float, default=0.5, help="two-level detuning")
    parser.add_argument("--omega", type=float, default=0.1, help="two-level drive")
    parser.add_argument("--L", type=int, default=6, help="ring size")
    parser.add_argument("--eps", type=float, default=0.0, help="disorder strength")
    parser.add_argument("--seed", type=int, default=0, help="disorder seed")
    parser.add_argument("--gamma-hop", type=float, default=1.0, help="hopping energy")
    parser.add_argument("--energy", type=float, default=0.0, help="single-level energy")
    parser.add_argument("--system", type=str, default=None, help="system JSON for --model file")


def _add_output_flags(parser, default_format="csv"):
    parser.add_argument("--output", "-o", type=str, default=None)
    parser.add_argument("--format", choices=("csv", "json"), default=default_format)
    parser.add_argument("--no-plot", dest="plot", action="store_false")


def build_parser() -> _Parser:
    parser = _Parser(prog="qdecay", description=__doc__)
    parser.add_argument("--config", type=str, default=None, help="JSON file with command and flags")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command")

    for name in ("winding", "poles", "spectrum", "decay-dist", "moments", "conditional-mean"):
        p = sub.add_parser(name)
        _add_model_flags(p)
        p.add_argument("--gamma", type=float, default=1.0, help="decay rate")
        _add_output_flags(p, "json" if name in ("spectrum", "moments") else "csv")
        if name == "winding":
            p.add_argument("--init-points", type=int, default=256)
            p.set_defaults(format="json")
        if name == "decay-dist":
            p.add_argument("--t-sweep", type=str, default=None)
        if name == "moments":
            p.add_argument("--max-moment", type=int, default=2)
        if name == "conditional-mean":
            p.add_argument("--theta-sweep", type=str, default=None)

    p = sub.add_parser("two-level")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--omega-sweep", type=str, required=True)
    _add_output_flags(p)

    p = sub.add_parser("ring")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--eps", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gamma-hop", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=1.0)
    _add_output_flags(p, "json")

    p = sub.add_parser("line-multichannel")
    p.add_argument("--L", type=int, default=6)
    p.add_argument("--channels", type=str, default="1,2,4", help="comma-separated sites, 1-based")
    p.add_argument("--gamma-hop", type=float, default=1.0)
    p.add_argument("--gamma-sweep", type=str, default="log:0.1:10:16")
    _add_output_flags(p)

    p = sub.add_parser("prep-sweep")
    p.add_argument("--L", type=int, default=6)
    p.add_argument("--gamma-hop", type=float, default=1.0)
    p.add_argument("--delta-in", type=str, default="0.01,0.05,0.1", help="comma-separated overlaps")
    p.add_argument("--gamma-sweep", type=str, default="log:0.01:1:10")
    _add_output_flags(p)

    return parser


def _namespace_to_config(args: argparse.Namespace) -> RunConfig:
    command = args.command
    skip = {"command", "config", "output", "format", "plot"}
    params = {k: v for k, v in vars(args).items() if k not in skip}
    if command == "line-multichannel":
        try:
            params["channels"] = [int(s) for s in str(params["channels"]).split(",") if s]
        except ValueError:
            raise ValueError(f"channels {params['channels']!r} must be comma-separated integers")
        if not params["channels"]:
            raise ValueError("need at least one channel site")
        if any(s < 1 or s > params["L"] for s in params["channels"]):
            raise ValueError("channel sites must lie in 1..L")
        if len(set(params["channels"])) != len(params["channels"]):
            raise ValueError("channel sites must be distinct")
    if command == "prep-sweep":
        try:
            params["delta_in"] = [float(s) for s in str(params["delta_in"]).split(",") if s]
        except ValueError:
            raise ValueError(f"delta-in {params['delta_in']!r} must be comma-separated floats")
        if any(not 0.0 <= d <= 1.0 for d in params["delta_in"]):
            raise ValueError("delta-in values must lie in [0, 1]")
    return RunConfig(
        command=command,
        params=params,
        output=args.output,
        format=args.format,
        plot=args.plot,
    )


def _argv_from_config_file(path: str) -> list:
    data = read_json(path)
    if "command" not in data:
        raise ValueError(f"config {path} lacks a 'command' entry")
    argv = [str(data["command"])]
    for key, value in data.items():
        if key == "command":
            continue
        flag = "--" + key.replace("_", "-")
        if isinstance(value, bool):
            if key == "plot" and not value:
                argv.append("--no-plot")
            continue
        if isinstance(value, (list, tuple)):
            argv.extend([flag, ",".join(str(v) for v in value)])
        else:
            argv.extend([flag, str(value)])
    return argv


def run(config: RunConfig) -> int:
    """Execute a validated configuration; returns the exit status."""
    _RUNNERS[config.command](config)
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args, _ = parser.parse_known_args(argv) if "--config" in argv else (None, None)
    if args is not None and args.config:
        argv = _argv_from_config_file(args.config) + [
            a for a in argv if a not in ("--config", args.config)
        ]
    args = parser.parse_args(argv)
    if args.command is None:
        _fail(2, "no command given; see qdecay --help")
    try:
        config = _namespace_to_config(args)
    except ValueError as err:
        _fail(2, str(err))
    try:
        return run(config)
    except ValueError as err:
        _fail(2, str(err))
    except QDecayError as err:
        _fail(3, f"{type(err).__name__}: {err}")


if __name__ == "__main__":
    raise SystemExit(main())
